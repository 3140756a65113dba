//! Zarantonello fixed-point iteration `a <- a - tau K^{-1} r(a)`, with `K`
//! the unit-reluctivity stiffness matrix.

use super::cg::solve_cg;
use super::newton::{norm2, theory_constants, IterationRecord, NewtonConfig, NewtonReport, Termination};
use crate::assembly::Problem;
use crate::femspace::CoefficientVector;
use crate::{Error, Real, Result};

/// `sqrt(1 - 2 tau gamma + tau^2 L^2)`, clamped at zero.
pub fn zarantonello_contraction<T: Real>(tau: T, gamma: T, lipschitz: T) -> T {
    let v = T::one() - T::lit(2.0) * tau * gamma + tau * tau * lipschitz * lipschitz;
    v.max(T::zero()).sqrt()
}

/// Runs the damped fixed-point iteration. Uses the tolerances, iteration
/// budget and CG settings of `cfg`; the line-search fields are ignored.
pub fn zarantonello_solve<T: Real>(
    problem: &Problem<T>,
    tau: T,
    a0: Option<CoefficientVector<T>>,
    cfg: &NewtonConfig<T>,
) -> Result<(CoefficientVector<T>, NewtonReport<T>)> {
    cfg.validate()?;
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!("damping must be positive, got {tau}")));
    }
    let n_free = problem.n_free();
    let mut a = a0.unwrap_or_else(|| CoefficientVector::zeros(n_free));
    if a.len() != n_free {
        return Err(Error::InvalidArgument(format!(
            "initial iterate has length {}, expected {n_free}",
            a.len()
        )));
    }
    let theory = theory_constants(problem, cfg);
    let bound = theory.map(|t| {
        let limit = T::lit(2.0) * t.gamma / (t.lipschitz * t.lipschitz);
        if tau >= limit {
            log::warn!("Zarantonello damping {tau:e} is not below 2 gamma / L^2 = {limit:e}; contraction is not guaranteed");
        }
        zarantonello_contraction(tau, t.gamma, t.lipschitz)
    });

    let mut report = NewtonReport {
        method: "zarantonello".into(),
        config: *cfg,
        records: Vec::new(),
        converged: false,
        termination: Termination::MaxIterations,
        final_energy: T::zero(),
        final_residual_norm: T::zero(),
        theory,
        zarantonello_tau: Some(tau),
        zarantonello_bound: bound,
        contraction_ratios: Vec::new(),
        iterates: Vec::new(),
    };
    if cfg.keep_iterates {
        report.iterates.push(a.clone());
    }

    let k = problem.assemble_stiffness();
    let mut r = problem.assemble_residual(&a)?;
    let mut rnorm = norm2(&r);
    let r0 = rnorm;
    let mut energy = problem.assemble_energy(&a)?;
    let mut inc0: Option<T> = None;
    let mut prev_inc: Option<T> = None;

    loop {
        let n = report.records.len();
        if rnorm == T::zero() || (n > 0 && rnorm <= cfg.tol_residual * r0) {
            report.converged = true;
            report.termination = Termination::Residual;
            break;
        }
        if n == cfg.max_iter {
            break;
        }
        let rhs: Vec<T> = r.iter().map(|&x| -tau * x).collect();
        let cg = solve_cg(&k, &rhs, &cfg.cg)?;
        let step = cg.x;
        let inc = k.bilinear(&step, &step).max(T::zero()).sqrt();
        if let Some(p) = prev_inc {
            if p > T::zero() {
                report.contraction_ratios.push(inc / p);
            }
        }
        let change = problem.energy_change(&a, &step, T::one())?;
        report.records.push(IterationRecord {
            n,
            energy,
            residual_norm: rnorm,
            tau,
            backtracks: 0,
            increment_norm: inc,
            cg_iterations: cg.iterations,
            cg_converged: cg.converged,
        });
        a = a.axpy(T::one(), &step);
        energy += change;
        if cfg.keep_iterates {
            report.iterates.push(a.clone());
        }
        r = problem.assemble_residual(&a)?;
        rnorm = norm2(&r);
        prev_inc = Some(inc);
        let first = *inc0.get_or_insert(inc);
        if n > 0 && inc <= cfg.tol_increment * first {
            report.converged = true;
            report.termination = Termination::Increment;
            break;
        }
    }
    report.final_energy = problem.assemble_energy(&a)?;
    report.final_residual_norm = rnorm;
    Ok((a, report))
}
