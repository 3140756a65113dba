//! Post-hoc analysis of the locally quadratic phase of a Newton run.

use serde::Serialize;

use super::newton::NewtonReport;
use crate::assembly::Problem;
use crate::{Error, Real, Result};

/// Errors below `TAIL_NOISE_FLOOR * ||Curl a_ref||` are treated as roundoff
/// and excluded from the ratio estimates.
pub const TAIL_NOISE_FLOOR: f64 = 1e-10;

/// Largest accepted `max / min` over the last tail ratios.
pub const TAIL_STABILITY_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TailSummary<T: Real> {
    /// `e_n = ||Curl(a^n - a_ref)||` for every stored iterate.
    pub errors: Vec<T>,
    /// First step index from which every step used `tau = 1` without backtracking.
    pub tail_start: usize,
    pub tail_steps: usize,
    /// `(n, e_{n+1} / e_n^2)` for tail steps above the noise floor.
    pub ratios: Vec<(usize, T)>,
    /// Largest of the last (up to three) ratios.
    pub m_hat: Option<T>,
    /// `max / min` of the last ratios is at most [`TAIL_STABILITY_FACTOR`].
    pub stable: bool,
    /// The first tail step already reached the noise floor.
    pub immediate: bool,
}

/// Measures `e_{n+1} / e_n^2` along a run recorded with `keep_iterates`.
pub fn quadratic_tail_diagnostic<T: Real>(
    report: &NewtonReport<T>,
    reference: &[T],
    problem: &Problem<T>,
) -> Result<TailSummary<T>> {
    if report.iterates.len() != report.records.len() + 1 {
        return Err(Error::InsufficientData(
            "report has no stored iterates; rerun with keep_iterates".into(),
        ));
    }
    let errors: Vec<T> = report
        .iterates
        .iter()
        .map(|a| {
            let d: Vec<T> = a.iter().zip(reference).map(|(&x, &y)| x - y).collect();
            problem.curl_norm(&d)
        })
        .collect::<Result<_>>()?;
    let floor = T::lit(TAIL_NOISE_FLOOR) * problem.curl_norm(reference)?;

    let steps = report.records.len();
    let mut tail_start = steps;
    while tail_start > 0 {
        let r = &report.records[tail_start - 1];
        if r.tau == T::one() && r.backtracks == 0 {
            tail_start -= 1;
        } else {
            break;
        }
    }
    let tail_steps = steps - tail_start;
    let immediate = tail_steps >= 1 && errors[tail_start + 1..].iter().all(|&e| e <= floor);
    if !immediate && tail_steps < 3 {
        return Err(Error::InsufficientData(format!(
            "only {tail_steps} full Newton steps in the tail, need 3"
        )));
    }

    let ratios: Vec<(usize, T)> = (tail_start..steps)
        .filter(|&n| errors[n + 1] > floor && errors[n] > T::zero())
        .map(|n| (n, errors[n + 1] / (errors[n] * errors[n])))
        .collect();
    let last = &ratios[ratios.len().saturating_sub(3)..];
    let (lo, hi) = last.iter().fold((T::infinity(), T::zero()), |(lo, hi), &(_, q)| (lo.min(q), hi.max(q)));
    let m_hat = (!last.is_empty()).then_some(hi);
    let stable = immediate || (!last.is_empty() && hi <= T::lit(TAIL_STABILITY_FACTOR) * lo && hi.is_finite());
    Ok(TailSummary {
        errors,
        tail_start,
        tail_steps,
        ratios,
        m_hat,
        stable,
        immediate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Source;
    use crate::femspace::FESpace;
    use crate::materials::{LinearIsotropic, SharedLaw};
    use crate::mesh::generate_unit_square;
    use crate::solver::{newton_solve, NewtonConfig};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    #[test]
    fn linear_law_converges_immediately() {
        let space = Arc::new(FESpace::new(Arc::new(generate_unit_square(4).unwrap()), 2, &[1]).unwrap());
        let p = Problem::with_default_rule(
            space,
            BTreeMap::from([(1, Arc::new(LinearIsotropic::new(2.0).unwrap()) as SharedLaw<f64>)]),
            Source::Field(Arc::new(|x: [f64; 2]| [x[1], -x[0]])),
        )
        .unwrap();
        let cfg = NewtonConfig { keep_iterates: true, ..NewtonConfig::default() };
        let (a, rep) = newton_solve(&p, None, &cfg).unwrap();
        let tail = quadratic_tail_diagnostic(&rep, &a, &p).unwrap();
        assert!(tail.immediate && tail.stable);
        assert_eq!(tail.errors[1], 0.0);

        let bare = NewtonReport { iterates: vec![], ..rep };
        assert!(matches!(quadratic_tail_diagnostic(&bare, &a, &p), Err(Error::InsufficientData(_))));
    }
}
