//! Refinement studies: solve a benchmark on a level sequence and measure
//! relative `L2` errors of `b` and `h`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::benchmarks::{Benchmark, ErrorMode};
use super::eoc::compute_eoc;
use crate::assembly::Problem;
use crate::femspace::CoefficientVector;
use crate::geometry::VectorFn;
use crate::mesh::child_reference_map;
use crate::quadrature::{rule_for_degree, QuadratureRule, MAX_DEGREE};
use crate::solver::{newton_solve, NewtonConfig, NewtonReport};
use crate::{Error, Result};

/// One row of a study table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub level: usize,
    pub ne: usize,
    pub dof: usize,
    pub iter: usize,
    pub err_b: f64,
    pub eoc_b: Option<f64>,
    pub err_h: f64,
    pub eoc_h: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub benchmark: String,
    pub degree: usize,
    pub error_mode: String,
    pub rows: Vec<StudyRow>,
    /// Solver reports of every solve, in the order they were run.
    pub reports: Vec<NewtonReport<f64>>,
    /// Set when a solve failed; `rows` then holds the levels completed before.
    pub failure: Option<String>,
}

impl StudyResult {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// A solved level.
#[derive(Clone, Debug)]
pub struct Solution {
    pub problem: Problem<f64>,
    pub coeffs: CoefficientVector<f64>,
    pub report: NewtonReport<f64>,
}

pub fn solve_level(bench: &Benchmark, level: usize, k: usize, cfg: &NewtonConfig<f64>) -> Result<Solution> {
    let problem = bench.problem(level, k)?;
    let (coeffs, report) = newton_solve(&problem, None, cfg)?;
    report.require_converged()?;
    Ok(Solution { problem, coeffs, report })
}

/// What the coarse solution is compared against.
pub enum Reference<'a> {
    Exact(&'a VectorFn<f64>),
    /// Solution on a uniform refinement of the coarse mesh.
    Finer(&'a Solution),
    /// Solution on the same mesh with a different degree.
    SameMesh(&'a Solution),
}

/// Rule used for error integration: two degrees above the bilinear rule
/// of the coarse space, capped at the largest stored degree.
pub fn error_rule(space_degree: usize) -> Result<QuadratureRule<f64>> {
    rule_for_degree((2 * (space_degree - 1) + 2).min(MAX_DEGREE))
}

/// Maps reference coordinates of element `f` of a mesh refined uniformly
/// until each element has `per` descendants to those of its ancestor.
fn descendant_to_ancestor(f: usize, per: usize, mut xi: [f64; 2]) -> [f64; 2] {
    let (mut f, mut per) = (f, per);
    while per > 1 {
        let (o, cols) = child_reference_map::<f64>(f % 4);
        xi = [
            o[0] + cols[0][0] * xi[0] + cols[1][0] * xi[1],
            o[1] + cols[0][1] * xi[0] + cols[1][1] * xi[1],
        ];
        f /= 4;
        per /= 4;
    }
    xi
}

/// `(||b_ref - b_h|| / ||b_ref||, ||h_ref - h_h|| / ||h_ref||)`.
///
/// A `Finer` reference must live on a uniform refinement (any depth) of the
/// coarse mesh, numbered so that the children of `t` are `4t..4t+3`.
pub fn relative_errors(coarse: &Solution, reference: Reference<'_>) -> Result<(f64, f64)> {
    let space = coarse.problem.space();
    let rule = error_rule(space.degree())?;
    if let Reference::Finer(fine) = &reference {
        let (nc, nf) = (space.num_elements(), fine.problem.space().num_elements());
        let per = nf / nc.max(1);
        if nc == 0 || nf % nc != 0 || !per.is_power_of_two() || per.trailing_zeros() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "reference mesh with {nf} elements is not a uniform refinement of {nc} elements"
            )));
        }
    }
    let parts: Vec<Result<[f64; 4]>> = (0..space.num_elements())
        .into_par_iter()
        .map(|e| {
            let law = coarse.problem.law_of_element(e);
            let mut acc = [0.0; 4];
            let mut add = |x: [f64; 2], w: f64, bh: [f64; 2], br: [f64; 2], hr: [f64; 2]| {
                let hh = law.field(x, bh);
                acc[0] += w * ((br[0] - bh[0]).powi(2) + (br[1] - bh[1]).powi(2));
                acc[1] += w * (br[0].powi(2) + br[1].powi(2));
                acc[2] += w * ((hr[0] - hh[0]).powi(2) + (hr[1] - hh[1]).powi(2));
                acc[3] += w * (hr[0].powi(2) + hr[1].powi(2));
            };
            match &reference {
                Reference::Exact(flux) => {
                    for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
                        let x = space.map_to_physical(e, xi);
                        let bh = space.eval_curl_field(&coarse.coeffs, e, xi)?;
                        let br = flux(x);
                        add(x, w * space.element_area(e), bh, br, law.field(x, br));
                    }
                }
                Reference::SameMesh(other) => {
                    let os = other.problem.space();
                    for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
                        let x = space.map_to_physical(e, xi);
                        let bh = space.eval_curl_field(&coarse.coeffs, e, xi)?;
                        let br = os.eval_curl_field(&other.coeffs, e, xi)?;
                        let hr = other.problem.law_of_element(e).field(x, br);
                        add(x, w * space.element_area(e), bh, br, hr);
                    }
                }
                Reference::Finer(fine) => {
                    let fs = fine.problem.space();
                    let per = fs.num_elements() / space.num_elements();
                    for f in e * per..(e + 1) * per {
                        for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
                            let xp = descendant_to_ancestor(f, per, xi);
                            let x = fs.map_to_physical(f, xi);
                            let bh = space.eval_curl_field(&coarse.coeffs, e, xp)?;
                            let br = fs.eval_curl_field(&fine.coeffs, f, xi)?;
                            let hr = fine.problem.law_of_element(f).field(x, br);
                            add(x, w * fs.element_area(f), bh, br, hr);
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut tot = [0.0; 4];
    for p in parts {
        let p = p?;
        for i in 0..4 {
            tot[i] += p[i];
        }
    }
    let rel = |num: f64, den: f64| if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok((rel(tot[0], tot[1]), rel(tot[2], tot[3])))
}

fn fill_eoc(rows: &mut [StudyRow]) {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        let eb = compute_eoc(&[a.err_b, b.err_b], 2.0).ok().map(|v| v[0]);
        let eh = compute_eoc(&[a.err_h, b.err_h], 2.0).ok().map(|v| v[0]);
        rows[i].eoc_b = eb;
        rows[i].eoc_h = eh;
    }
}

fn row(level: usize, sol: &Solution, err: (f64, f64)) -> StudyRow {
    StudyRow {
        level: level + 1,
        ne: sol.problem.space().num_elements(),
        dof: sol.problem.n_free(),
        iter: sol.report.iterations(),
        err_b: err.0,
        eoc_b: None,
        err_h: err.1,
        eoc_h: None,
    }
}

/// Runs `levels` levels of `bench` at degree `k` (space degree `k + 1`).
pub fn run_study(bench: &Benchmark, k: usize, levels: usize, cfg: &NewtonConfig<f64>) -> Result<StudyResult> {
    if levels == 0 {
        return Err(Error::InvalidArgument("a study needs at least one level".into()));
    }
    let mut result = StudyResult {
        benchmark: bench.name.clone(),
        degree: k,
        error_mode: bench.error_mode.name().into(),
        rows: Vec::new(),
        reports: Vec::new(),
        failure: None,
    };
    let outcome = (|| -> Result<()> {
        match bench.error_mode {
            ErrorMode::ManufacturedExact => {
                let flux = bench.exact_flux.as_ref().ok_or_else(|| {
                    Error::Config(format!("benchmark '{}' has no exact flux", bench.name))
                })?;
                for level in 0..levels {
                    let sol = solve_level(bench, level, k, cfg)?;
                    result.reports.push(sol.report.clone());
                    let err = relative_errors(&sol, Reference::Exact(flux))?;
                    result.rows.push(row(level, &sol, err));
                }
            }
            ErrorMode::SuccessiveRefinement => {
                let mut prev = solve_level(bench, 0, k, cfg)?;
                result.reports.push(prev.report.clone());
                for level in 0..levels {
                    let fine_mesh = bench.build_mesh(level + 1)?;
                    if fine_mesh.num_triangles() != 4 * prev.problem.space().num_elements() {
                        return Err(Error::InvalidMesh(format!(
                            "level {} mesh of '{}' is not a uniform refinement of the previous level",
                            level + 1,
                            bench.name
                        )));
                    }
                    let problem = bench.problem_on(Arc::new(fine_mesh), k)?;
                    let (coeffs, report) = newton_solve(&problem, None, cfg)?;
                    report.require_converged()?;
                    let fine = Solution { problem, coeffs, report };
                    result.reports.push(fine.report.clone());
                    let err = relative_errors(&prev, Reference::Finer(&fine))?;
                    result.rows.push(row(level, &prev, err));
                    prev = fine;
                }
            }
            ErrorMode::SuccessiveDegree => {
                for level in 0..levels {
                    let sol = solve_level(bench, level, k, cfg)?;
                    let higher = solve_level(bench, level, k + 1, cfg)?;
                    result.reports.push(sol.report.clone());
                    result.reports.push(higher.report.clone());
                    let err = relative_errors(&sol, Reference::SameMesh(&higher))?;
                    result.rows.push(row(level, &sol, err));
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        log::error!("study '{}' stopped after {} rows: {e}", bench.name, result.rows.len());
        result.failure = Some(e.to_string());
    }
    fill_eoc(&mut result.rows);
    Ok(result)
}
