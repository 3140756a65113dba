//! Preconditioned conjugate gradients for symmetric positive definite
//! systems.

use serde::{Deserialize, Serialize};

use crate::assembly::SparseMatrix;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CgConfig<T: Real> {
    /// Stop once `||A x - b|| <= rel_tol ||b||`.
    pub rel_tol: T,
    pub max_iter: usize,
    /// Diagonal (Jacobi) preconditioning.
    pub jacobi: bool,
    /// Turn an exhausted iteration budget into an error.
    pub strict: bool,
}

impl<T: Real> Default for CgConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-12),
            max_iter: 20_000,
            jacobi: true,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// `||A x - b|| / ||b||` of the returned iterate (recomputed, not recursive).
    pub rel_residual: T,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from `x = 0`.
pub fn solve_cg<T: Real>(a: &SparseMatrix<T>, b: &[T], cfg: &CgConfig<T>) -> Result<CgOutcome<T>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            b.len()
        )));
    }
    let bnorm = norm(b);
    if bnorm == T::zero() || n == 0 {
        return Ok(CgOutcome {
            x: vec![T::zero(); n],
            iterations: 0,
            rel_residual: T::zero(),
            converged: true,
        });
    }
    let inv_diag: Vec<T> = if cfg.jacobi {
        a.diagonal()
            .into_iter()
            .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
            .collect()
    } else {
        vec![T::one(); n]
    };
    let target = cfg.rel_tol * bnorm;

    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rnorm = bnorm;
    // true residual at the previous failed confirmation
    let mut last_true: Option<T> = None;
    let mut stagnated = false;

    while iterations < cfg.max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not positive definite (p^T A p = {pap:e} at CG iteration {iterations})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        rnorm = norm(&r);
        if rnorm <= target {
            // confirm against the true residual; recursive drift can be optimistic
            let ax = a.mul(&x);
            let true_norm = norm(&b.iter().zip(&ax).map(|(&bi, &yi)| bi - yi).collect::<Vec<_>>());
            rnorm = true_norm;
            if true_norm <= target {
                break;
            }
            if last_true.is_some_and(|prev| true_norm > T::lit(0.5) * prev) {
                stagnated = true;
                break;
            }
            last_true = Some(true_norm);
            r = b.iter().zip(&ax).map(|(&bi, &yi)| bi - yi).collect();
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            rz = dot(&r, &z);
            p.clone_from(&z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = rnorm / bnorm;
    let converged = rnorm <= target;
    if !converged {
        if stagnated {
            log::info!("CG stagnated after {iterations} iterations at relative residual {rel:e}");
        } else {
            log::warn!("CG stopped after {iterations} iterations at relative residual {rel:e}");
        }
        if cfg.strict {
            return Err(Error::CgNoConvergence {
                iterations,
                residual: rel.to_f64_lossy(),
            });
        }
    }
    Ok(CgOutcome {
        x,
        iterations,
        rel_residual: rel,
        converged,
    })
}
