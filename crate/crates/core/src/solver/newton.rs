//! Damped Newton with Armijo backtracking.

use serde::{Deserialize, Serialize};

use super::cg::{solve_cg, CgConfig};
use crate::assembly::Problem;
use crate::femspace::CoefficientVector;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NewtonConfig<T: Real> {
    /// Backtracking factor, `0 < rho <= 1/2`.
    pub rho: T,
    /// Armijo slope fraction, `0 < sigma < 1/2`.
    pub sigma: T,
    /// Stop when `||Curl da||_h <= tol_increment * ||Curl da^0||_h`.
    pub tol_increment: T,
    /// Stop when `||r||_2 <= tol_residual * ||r(a^0)||_2`.
    pub tol_residual: T,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub cg: CgConfig<T>,
    /// Store every iterate in the report (for post-hoc error analysis).
    pub keep_iterates: bool,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            rho: T::lit(0.5),
            sigma: T::lit(0.01),
            tol_increment: T::lit(1e-10),
            tol_residual: T::lit(1e-10),
            max_iter: 100,
            max_backtracks: 60,
            cg: CgConfig::default(),
            keep_iterates: false,
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.rho > T::zero() && self.rho <= half) {
            return Err(Error::Config(format!("rho must lie in (0, 1/2], got {}", self.rho)));
        }
        if !(self.sigma > T::zero() && self.sigma < half) {
            return Err(Error::Config(format!("sigma must lie in (0, 1/2), got {}", self.sigma)));
        }
        if !(self.tol_increment >= T::zero() && self.tol_residual >= T::zero()) {
            return Err(Error::Config("tolerances must be nonnegative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.cg.rel_tol > T::zero()) || self.cg.max_iter == 0 {
            return Err(Error::Config("CG needs a positive tolerance and iteration budget".into()));
        }
        Ok(())
    }

    /// `q = 1 - 4 rho sigma (1 - sigma) gamma^3 / L^3`.
    pub fn contraction_factor(&self, gamma: T, lipschitz: T) -> T {
        let r = gamma / lipschitz;
        T::one() - T::lit(4.0) * self.rho * self.sigma * (T::one() - self.sigma) * r * r * r
    }

    /// `tau_* = 2 rho (1 - sigma) gamma / L`.
    pub fn tau_star(&self, gamma: T, lipschitz: T) -> T {
        T::lit(2.0) * self.rho * (T::one() - self.sigma) * gamma / lipschitz
    }
}

/// One accepted step `a^{n+1} = a^n + tau^n da^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct IterationRecord<T: Real> {
    pub n: usize,
    /// `W(a^n)`, before the step.
    pub energy: T,
    /// `||r(a^n)||_2`.
    pub residual_norm: T,
    pub tau: T,
    pub backtracks: usize,
    /// `||Curl da^n||_h` of the full (undamped) direction.
    pub increment_norm: T,
    pub cg_iterations: usize,
    pub cg_converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Residual,
    Increment,
    MaxIterations,
    /// The computed direction was not a descent direction (roundoff level).
    Stalled,
}

/// Constants of the global convergence theory for certified `(gamma, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TheoryConstants<T: Real> {
    pub gamma: T,
    pub lipschitz: T,
    /// Energy contraction factor per step.
    pub q: T,
    pub tau_star: T,
    /// Guaranteed lower bound of accepted steps, `min(1, tau_star)`.
    pub step_floor: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NewtonReport<T: Real> {
    pub method: String,
    pub config: NewtonConfig<T>,
    pub records: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub termination: Termination,
    pub final_energy: T,
    pub final_residual_norm: T,
    pub theory: Option<TheoryConstants<T>>,
    /// Zarantonello only: damping and `sqrt(1 - 2 tau gamma + tau^2 L^2)`.
    pub zarantonello_tau: Option<T>,
    pub zarantonello_bound: Option<T>,
    /// Zarantonello only: `||Curl(a^{n+1}-a^n)|| / ||Curl(a^n-a^{n-1})||`.
    pub contraction_ratios: Vec<T>,
    /// `a^0, ..., a^N` when `keep_iterates` is set.
    #[serde(skip)]
    pub iterates: Vec<CoefficientVector<T>>,
}

impl<T: Real> NewtonReport<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fails with [`Error::NoConvergence`] if the run did not converge.
    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations(),
            })
        }
    }
}

pub(crate) fn theory_constants<T: Real>(problem: &Problem<T>, cfg: &NewtonConfig<T>) -> Option<TheoryConstants<T>> {
    problem.bounds().map(|b| {
        let tau_star = cfg.tau_star(b.gamma, b.lipschitz);
        TheoryConstants {
            gamma: b.gamma,
            lipschitz: b.lipschitz,
            q: cfg.contraction_factor(b.gamma, b.lipschitz),
            tau_star,
            step_floor: tau_star.min(T::one()),
        }
    })
}

/// Multiple of machine epsilon below which a residual norm is treated as
/// assembly roundoff.
pub const RESIDUAL_NOISE_FACTOR: f64 = 100.0;

/// True when `rnorm` is within roundoff of zero, judged against the
/// absolute-value assembly of the residual.
pub(crate) fn at_noise_floor<T: Real>(problem: &Problem<T>, a: &[T], rnorm: T) -> Result<bool> {
    let floor = T::lit(RESIDUAL_NOISE_FACTOR) * T::epsilon() * problem.residual_magnitude(a)?;
    let hit = rnorm <= floor;
    if hit {
        log::info!("residual {rnorm:e} is at the roundoff floor {floor:e}; accepting the current iterate");
    }
    Ok(hit)
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Minimizes the problem's energy from `a0` (zero if `None`).
///
/// Each step solves `H(a^n) da = -r(a^n)` by CG, then accepts the first
/// `tau in {1, rho, rho^2, ...}` with
/// `W(a^n + tau da) - W(a^n) <= sigma tau r^T da`. The energy change is
/// evaluated from pointwise increments, so the test stays meaningful when
/// it is far below the roundoff of `W` itself.
pub fn newton_solve<T: Real>(
    problem: &Problem<T>,
    a0: Option<CoefficientVector<T>>,
    cfg: &NewtonConfig<T>,
) -> Result<(CoefficientVector<T>, NewtonReport<T>)> {
    cfg.validate()?;
    let n_free = problem.n_free();
    let mut a = a0.unwrap_or_else(|| CoefficientVector::zeros(n_free));
    if a.len() != n_free {
        return Err(Error::InvalidArgument(format!(
            "initial iterate has length {}, expected {n_free}",
            a.len()
        )));
    }
    let mut report = NewtonReport {
        method: "newton".into(),
        config: *cfg,
        records: Vec::new(),
        converged: false,
        termination: Termination::MaxIterations,
        final_energy: T::zero(),
        final_residual_norm: T::zero(),
        theory: theory_constants(problem, cfg),
        zarantonello_tau: None,
        zarantonello_bound: None,
        contraction_ratios: Vec::new(),
        iterates: Vec::new(),
    };
    if cfg.keep_iterates {
        report.iterates.push(a.clone());
    }

    let mut energy = problem.assemble_energy(&a)?;
    let mut r = problem.assemble_residual(&a)?;
    let mut rnorm = norm2(&r);
    let r0 = rnorm;
    let mut inc0: Option<T> = None;

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
        let hess = problem.assemble_hessian(&a)?;
        let rhs: Vec<T> = r.iter().map(|&x| -x).collect();
        let cg = solve_cg(&hess, &rhs, &cfg.cg)?;
        let dir = cg.x;
        let slope: T = r.iter().zip(&dir).map(|(&x, &y)| x * y).sum();
        let inc = problem.curl_norm(&dir)?;
        if !(slope < T::zero()) {
            if at_noise_floor(problem, &a, rnorm)? {
                report.converged = true;
                report.termination = Termination::Residual;
                break;
            }
            if n == 0 {
                return Err(Error::LineSearch { iteration: n, backtracks: 0 });
            }
            log::warn!("Newton direction at iteration {n} is not a descent direction (slope {slope:e}); stopping");
            report.termination = Termination::Stalled;
            break;
        }

        let mut tau = T::one();
        let mut backtracks = 0;
        let mut change = problem.energy_change(&a, &dir, tau)?;
        while !(change <= cfg.sigma * tau * slope) {
            if backtracks == cfg.max_backtracks {
                if at_noise_floor(problem, &a, rnorm)? {
                    break;
                }
                return Err(Error::LineSearch { iteration: n, backtracks });
            }
            tau *= cfg.rho;
            backtracks += 1;
            change = problem.energy_change(&a, &dir, tau)?;
        }
        if !(change <= cfg.sigma * tau * slope) {
            report.converged = true;
            report.termination = Termination::Residual;
            break;
        }
        log::debug!(
            "newton n={n} W={energy:e} |r|={rnorm:e} tau={tau:e} bt={backtracks} |Curl da|={inc:e} cg={}",
            cg.iterations
        );
        report.records.push(IterationRecord {
            n,
            energy,
            residual_norm: rnorm,
            tau,
            backtracks,
            increment_norm: inc,
            cg_iterations: cg.iterations,
            cg_converged: cg.converged,
        });
        a = a.axpy(tau, &dir);
        energy += change;
        if cfg.keep_iterates {
            report.iterates.push(a.clone());
        }
        r = problem.assemble_residual(&a)?;
        rnorm = norm2(&r);

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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Source;
    use crate::femspace::FESpace;
    use crate::materials::{BrauerParams, LinearIsotropic, SharedLaw};
    use crate::mesh::generate_unit_square;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn problem(law: SharedLaw<f64>, n: usize, p: usize) -> Problem<f64> {
        let space = Arc::new(FESpace::new(Arc::new(generate_unit_square(n).unwrap()), p, &[1]).unwrap());
        Problem::with_default_rule(
            space,
            BTreeMap::from([(1, law)]),
            Source::Field(Arc::new(|x: [f64; 2]| [1e3 * x[1], -2e3 * x[0]])),
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        let ok = NewtonConfig::<f64>::default();
        ok.validate().unwrap();
        for bad in [
            NewtonConfig { rho: 0.6, ..ok },
            NewtonConfig { rho: 0.0, ..ok },
            NewtonConfig { sigma: 0.5, ..ok },
            NewtonConfig { max_iter: 0, ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn contraction_factor_example() {
        let cfg = NewtonConfig { rho: 0.5, sigma: 0.25, ..NewtonConfig::<f64>::default() };
        assert!((cfg.contraction_factor(3.0, 3.0) - 0.625).abs() < 1e-15);
        assert!((cfg.tau_star(1.0, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn linear_law_one_full_step() {
        let p = problem(Arc::new(LinearIsotropic::new(2.5).unwrap()), 4, 2);
        let (_, rep) = newton_solve(&p, None, &NewtonConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations(), 1);
        assert_eq!(rep.records[0].tau, 1.0);
        assert_eq!(rep.records[0].backtracks, 0);
    }

    #[test]
    fn brauer_converges_with_decreasing_energy() {
        let p = problem(Arc::new(BrauerParams::standard_iron()), 6, 2);
        let cfg = NewtonConfig { keep_iterates: true, ..NewtonConfig::default() };
        let (a, rep) = newton_solve(&p, None, &cfg).unwrap();
        assert!(rep.converged, "{:?}", rep.termination);
        assert!(rep.records.windows(2).all(|w| w[1].energy < w[0].energy));
        assert!(rep.final_energy < rep.records.last().unwrap().energy);
        let floor = rep.theory.unwrap().step_floor;
        assert!(rep.records.iter().all(|r| r.tau >= floor && r.tau <= 1.0));
        assert_eq!(rep.iterates.len(), rep.iterations() + 1);
        assert_eq!(rep.iterates.last().unwrap(), &a);
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json["records"].as_array().unwrap().len(), rep.iterations());
    }

    #[test]
    fn zero_source_needs_no_iterations() {
        let space = Arc::new(FESpace::new(Arc::new(generate_unit_square(3).unwrap()), 2, &[1]).unwrap());
        let p = Problem::with_default_rule(
            space,
            BTreeMap::from([(1, Arc::new(BrauerParams::standard_iron()) as SharedLaw<f64>)]),
            Source::None,
        )
        .unwrap();
        let (a, rep) = newton_solve(&p, None, &NewtonConfig::default()).unwrap();
        assert!(rep.converged && rep.iterations() == 0);
        assert!(a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn roundoff_load_is_accepted() {
        // a constant h_s has zero load against fields vanishing on the boundary
        let space = Arc::new(FESpace::new(Arc::new(generate_unit_square(8).unwrap()), 2, &[1]).unwrap());
        let p = Problem::with_default_rule(
            space,
            BTreeMap::from([(1, Arc::new(BrauerParams::standard_iron()) as SharedLaw<f64>)]),
            Source::Field(Arc::new(|_| [2000.0, 500.0])),
        )
        .unwrap();
        let (a, rep) = newton_solve(&p, None, &NewtonConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.termination, Termination::Residual);
        assert!(p.curl_norm(&a).unwrap() < 1e-12);
    }

    #[test]
    fn wrong_length_initial_iterate() {
        let p = problem(Arc::new(LinearIsotropic::new(1.0).unwrap()), 3, 1);
        assert!(newton_solve(&p, Some(CoefficientVector(vec![0.0; 2])), &NewtonConfig::default()).is_err());
    }
}
