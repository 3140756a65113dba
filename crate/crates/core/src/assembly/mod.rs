//! Quadrature-based energy, residual and Hessian of
//!
//! ```text
//! W(a) = <w(Curl a), 1>_h - <h_s, Curl a>_h        (field source)
//! W(a) = <w(Curl a), 1>_h - <j_s, a>_h             (density source)
//! ```
//!
//! over the free dofs of an [`FESpace`]. Element work runs in parallel;
//! every global sum and scatter is done in element order so results do not
//! depend on the thread count.

mod sparse;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

pub use sparse::SparseMatrix;

use crate::femspace::{FESpace, ReferenceTable};
use crate::geometry::{ScalarFn, VectorFn};
use crate::materials::{combined_bounds, Bounds, SharedLaw};
use crate::quadrature::{rule_for_degree, QuadratureRule};
use crate::real::{dot, mat_vec, Mat2, Vec2};
use crate::{Error, Real, Result};

/// Right-hand side of the variational problem.
#[derive(Clone, Default)]
pub enum Source<T> {
    /// No impressed source (magnet-driven problems).
    #[default]
    None,
    /// `h_s` in A/m, paired with `Curl v`.
    Field(VectorFn<T>),
    /// `j_s` in A/m^2, paired with `v`.
    Density(ScalarFn<T>),
    /// Piecewise constant `j_s` per mesh region; absent regions carry none.
    RegionDensity(BTreeMap<i32, T>),
}

impl<T> fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::None => "Source::None",
            Source::Field(_) => "Source::Field(..)",
            Source::Density(_) => "Source::Density(..)",
            Source::RegionDensity(_) => "Source::RegionDensity(..)",
        })
    }
}

/// A discrete minimization problem: space, one law per mesh region, source
/// and the quadrature rule used for every term.
#[derive(Clone)]
pub struct Problem<T: Real> {
    space: Arc<FESpace<T>>,
    laws: BTreeMap<i32, SharedLaw<T>>,
    source: Source<T>,
    rule: QuadratureRule<T>,
    table: ReferenceTable<T>,
    elem_law: Vec<SharedLaw<T>>,
    // element-major quadrature data, `ne * nq` entries
    xq: Vec<Vec2<T>>,
    wq: Vec<T>,
    hs: Option<Vec<Vec2<T>>>,
    js: Option<Vec<T>>,
}

impl<T: Real> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("elements", &self.space.num_elements())
            .field("degree", &self.space.degree())
            .field("n_free", &self.space.n_free())
            .field("laws", &self.laws)
            .field("source", &self.source)
            .field("rule_degree", &self.rule.degree())
            .finish()
    }
}

/// The smallest stored rule exact for the bilinear terms of a degree-`p`
/// space, i.e. degree `2(p - 1)` (at least 1).
pub fn default_rule<T: Real>(space_degree: usize) -> Result<QuadratureRule<T>> {
    rule_for_degree((2 * space_degree.saturating_sub(1)).max(1))
}

impl<T: Real> Problem<T> {
    pub fn new(
        space: Arc<FESpace<T>>,
        laws: BTreeMap<i32, SharedLaw<T>>,
        source: Source<T>,
        rule: QuadratureRule<T>,
    ) -> Result<Self> {
        let need = 2 * (space.degree() - 1);
        if rule.degree() < need {
            return Err(Error::InvalidArgument(format!(
                "quadrature degree {} below {need} required by space degree {}",
                rule.degree(),
                space.degree()
            )));
        }
        let mesh = space.mesh();
        let mut elem_law = Vec::with_capacity(mesh.num_triangles());
        for (t, r) in mesh.regions().iter().enumerate() {
            let law = laws.get(r).ok_or_else(|| {
                Error::Config(format!("region {r} (element {t}) has no material law"))
            })?;
            elem_law.push(Arc::clone(law));
        }
        let table = space.tabulate(&rule);
        let ne = space.num_elements();
        let mut xq = Vec::with_capacity(ne * rule.len());
        let mut wq = Vec::with_capacity(ne * rule.len());
        for e in 0..ne {
            let area = space.element_area(e);
            for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
                xq.push(space.map_to_physical(e, xi));
                wq.push(w * area);
            }
        }
        let hs = match &source {
            Source::Field(f) => Some(xq.par_iter().map(|&x| f(x)).collect()),
            _ => None,
        };
        let js = match &source {
            Source::Density(f) => Some(xq.par_iter().map(|&x| f(x)).collect()),
            Source::RegionDensity(values) => {
                let nq = rule.len();
                Some(
                    (0..ne * nq)
                        .map(|k| values.get(&mesh.regions()[k / nq]).copied().unwrap_or_else(T::zero))
                        .collect(),
                )
            }
            _ => None,
        };
        Ok(Self {
            space,
            laws,
            source,
            rule,
            table,
            elem_law,
            xq,
            wq,
            hs,
            js,
        })
    }

    /// [`Problem::new`] with [`default_rule`].
    pub fn with_default_rule(
        space: Arc<FESpace<T>>,
        laws: BTreeMap<i32, SharedLaw<T>>,
        source: Source<T>,
    ) -> Result<Self> {
        let rule = default_rule(space.degree())?;
        Self::new(space, laws, source, rule)
    }

    pub fn space(&self) -> &FESpace<T> {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FESpace<T>> {
        &self.space
    }

    pub fn laws(&self) -> &BTreeMap<i32, SharedLaw<T>> {
        &self.laws
    }

    pub fn law_of_element(&self, e: usize) -> &SharedLaw<T> {
        &self.elem_law[e]
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    pub fn n_free(&self) -> usize {
        self.space.n_free()
    }

    /// Conservative `(gamma, L)` over all laws, if every law certifies them.
    pub fn bounds(&self) -> Option<Bounds<T>> {
        combined_bounds(self.laws.values())
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.n_free() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, space has {} free dofs",
                v.len(),
                self.n_free()
            )));
        }
        Ok(())
    }

    fn nq(&self) -> usize {
        self.rule.len()
    }

    /// Physical Curl of every local basis function at every quadrature
    /// point of element `e`, `[q * nloc + i]`.
    fn element_curls(&self, e: usize) -> Vec<Vec2<T>> {
        self.table
            .grads
            .iter()
            .flat_map(|g| g.iter().map(move |&gi| self.space.curl_from_ref_grad(e, gi)))
            .collect()
    }

    fn combine(curls: &[Vec2<T>], local: &[T]) -> Vec2<T> {
        let mut b = [T::zero(); 2];
        for (c, &a) in curls.iter().zip(local) {
            b[0] += a * c[0];
            b[1] += a * c[1];
        }
        b
    }

    fn combine_values(values: &[T], local: &[T]) -> T {
        values.iter().zip(local).map(|(&v, &a)| v * a).sum()
    }

    fn local(&self, e: usize, coeffs: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.space.local_dim()];
        self.space.gather(e, coeffs, &mut out);
        out
    }

    /// Sum of per-element values, added in element order.
    fn element_sum<F>(&self, f: F) -> T
    where
        F: Fn(usize) -> T + Sync + Send,
    {
        let parts: Vec<T> = (0..self.space.num_elements()).into_par_iter().map(f).collect();
        parts.into_iter().fold(T::zero(), |s, v| s + v)
    }

    /// `W(a)`.
    pub fn assemble_energy(&self, coeffs: &[T]) -> Result<T> {
        self.check_len(coeffs)?;
        let nq = self.nq();
        let nloc = self.space.local_dim();
        Ok(self.element_sum(|e| {
            let local = self.local(e, coeffs);
            let curls = self.element_curls(e);
            let law = &self.elem_law[e];
            let mut s = T::zero();
            for q in 0..nq {
                let k = e * nq + q;
                let b = Self::combine(&curls[q * nloc..(q + 1) * nloc], &local);
                let mut v = law.energy(self.xq[k], b);
                if let Some(hs) = &self.hs {
                    v -= dot(hs[k], b);
                }
                if let Some(js) = &self.js {
                    v -= js[k] * Self::combine_values(&self.table.values[q], &local);
                }
                s += self.wq[k] * v;
            }
            s
        }))
    }

    /// `W(a + tau d) - W(a)`, summed from pointwise stable increments so
    /// that it stays accurate when the change is near roundoff of `W`.
    pub fn energy_change(&self, coeffs: &[T], dir: &[T], tau: T) -> Result<T> {
        self.check_len(coeffs)?;
        self.check_len(dir)?;
        let nq = self.nq();
        let nloc = self.space.local_dim();
        Ok(self.element_sum(|e| {
            let local = self.local(e, coeffs);
            let dloc: Vec<T> = self.local(e, dir).into_iter().map(|d| d * tau).collect();
            let curls = self.element_curls(e);
            let law = &self.elem_law[e];
            let mut s = T::zero();
            for q in 0..nq {
                let k = e * nq + q;
                let cq = &curls[q * nloc..(q + 1) * nloc];
                let b = Self::combine(cq, &local);
                let db = Self::combine(cq, &dloc);
                let mut v = law.energy_increment(self.xq[k], b, db);
                if let Some(hs) = &self.hs {
                    v -= dot(hs[k], db);
                }
                if let Some(js) = &self.js {
                    v -= js[k] * Self::combine_values(&self.table.values[q], &dloc);
                }
                s += self.wq[k] * v;
            }
            s
        }))
    }

    /// Scatters per-element vectors into free-dof order, element by element.
    fn scatter(&self, parts: Vec<Vec<T>>) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_free()];
        for (e, local) in parts.into_iter().enumerate() {
            for (&g, v) in self.space.element_dofs(e).iter().zip(local) {
                if let Some(i) = self.space.free_index(g) {
                    out[i] += v;
                }
            }
        }
        out
    }

    /// `r_i = <d_b w(Curl a) - h_s, Curl phi_i>_h - <j_s, phi_i>_h`.
    pub fn assemble_residual(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_len(coeffs)?;
        let nq = self.nq();
        let nloc = self.space.local_dim();
        let parts: Vec<Vec<T>> = (0..self.space.num_elements())
            .into_par_iter()
            .map(|e| {
                let local = self.local(e, coeffs);
                let curls = self.element_curls(e);
                let law = &self.elem_law[e];
                let mut r = vec![T::zero(); nloc];
                for q in 0..nq {
                    let k = e * nq + q;
                    let cq = &curls[q * nloc..(q + 1) * nloc];
                    let b = Self::combine(cq, &local);
                    let mut h = law.field(self.xq[k], b);
                    if let Some(hs) = &self.hs {
                        h = [h[0] - hs[k][0], h[1] - hs[k][1]];
                    }
                    let w = self.wq[k];
                    for (ri, c) in r.iter_mut().zip(cq) {
                        *ri += w * dot(h, *c);
                    }
                    if let Some(js) = &self.js {
                        for (ri, &v) in r.iter_mut().zip(&self.table.values[q]) {
                            *ri -= w * js[k] * v;
                        }
                    }
                }
                r
            })
            .collect();
        Ok(self.scatter(parts))
    }

    /// Euclidean norm of the residual assembled from absolute values of its
    /// terms. Roundoff in `assemble_residual` is a small multiple of
    /// `epsilon` times this.
    pub fn residual_magnitude(&self, coeffs: &[T]) -> Result<T> {
        self.check_len(coeffs)?;
        let nq = self.nq();
        let nloc = self.space.local_dim();
        let abs2 = |v: Vec2<T>| v[0].hypot(v[1]);
        let parts: Vec<Vec<T>> = (0..self.space.num_elements())
            .into_par_iter()
            .map(|e| {
                let local = self.local(e, coeffs);
                let curls = self.element_curls(e);
                let law = &self.elem_law[e];
                let mut r = vec![T::zero(); nloc];
                for q in 0..nq {
                    let k = e * nq + q;
                    let cq = &curls[q * nloc..(q + 1) * nloc];
                    let b = Self::combine(cq, &local);
                    let mut h = abs2(law.field(self.xq[k], b));
                    if let Some(hs) = &self.hs {
                        h += abs2(hs[k]);
                    }
                    let w = self.wq[k].abs();
                    for (ri, c) in r.iter_mut().zip(cq) {
                        *ri += w * h * abs2(*c);
                    }
                    if let Some(js) = &self.js {
                        for (ri, &v) in r.iter_mut().zip(&self.table.values[q]) {
                            *ri += w * js[k].abs() * v.abs();
                        }
                    }
                }
                r
            })
            .collect();
        Ok(self.scatter(parts).iter().map(|&x| x * x).sum::<T>().sqrt())
    }

    /// `<h_s, Curl phi_i>_h + <j_s, phi_i>_h`.
    pub fn assemble_load(&self) -> Vec<T> {
        let nq = self.nq();
        let nloc = self.space.local_dim();
        let parts: Vec<Vec<T>> = (0..self.space.num_elements())
            .into_par_iter()
            .map(|e| {
                let curls = self.element_curls(e);
                let mut r = vec![T::zero(); nloc];
                for q in 0..nq {
                    let k = e * nq + q;
                    let w = self.wq[k];
                    if let Some(hs) = &self.hs {
                        for (ri, c) in r.iter_mut().zip(&curls[q * nloc..(q + 1) * nloc]) {
                            *ri += w * dot(hs[k], *c);
                        }
                    }
                    if let Some(js) = &self.js {
                        for (ri, &v) in r.iter_mut().zip(&self.table.values[q]) {
                            *ri += w * js[k] * v;
                        }
                    }
                }
                r
            })
            .collect();
        self.scatter(parts)
    }

    /// Assembles `<N Curl phi_j, Curl phi_i>_h` where `N = tensor(e, k, b)`,
    /// `k` the global quadrature-point index
    /// and `b` is the flux of `coeffs` (zero if `None`).
    fn assemble_operator<F>(&self, coeffs: Option<&[T]>, tensor: F) -> SparseMatrix<T>
    where
        F: Fn(usize, usize, Vec2<T>) -> Mat2<T> + Sync + Send,
    {
        let nq = self.nq();
        let nloc = self.space.local_dim();
        let parts: Vec<Vec<T>> = (0..self.space.num_elements())
            .into_par_iter()
            .map(|e| {
                let curls = self.element_curls(e);
                let local = coeffs.map(|c| self.local(e, c));
                let mut m = vec![T::zero(); nloc * nloc];
                for q in 0..nq {
                    let k = e * nq + q;
                    let cq = &curls[q * nloc..(q + 1) * nloc];
                    let b = local.as_ref().map_or([T::zero(); 2], |l| Self::combine(cq, l));
                    let h = tensor(e, k, b);
                    let w = self.wq[k];
                    for j in 0..nloc {
                        let hc = mat_vec(&h, cq[j]);
                        for i in 0..nloc {
                            m[i * nloc + j] += w * dot(cq[i], hc);
                        }
                    }
                }
                m
            })
            .collect();
        let mut triplets = Vec::with_capacity(parts.len() * nloc * nloc);
        for (e, m) in parts.into_iter().enumerate() {
            let dofs = self.space.element_dofs(e);
            for (i, &gi) in dofs.iter().enumerate() {
                let Some(fi) = self.space.free_index(gi) else { continue };
                for (j, &gj) in dofs.iter().enumerate() {
                    if let Some(fj) = self.space.free_index(gj) {
                        triplets.push((fi, fj, m[i * nloc + j]));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(self.n_free(), triplets)
    }

    /// `H_ij = <d_bb w(Curl a) Curl phi_j, Curl phi_i>_h`.
    pub fn assemble_hessian(&self, coeffs: &[T]) -> Result<SparseMatrix<T>> {
        self.check_len(coeffs)?;
        Ok(self.assemble_operator(Some(coeffs), |e, k, b| {
            self.elem_law[e].differential_reluctivity(self.xq[k], b)
        }))
    }

    /// The unit-reluctivity stiffness matrix `K_ij = <Curl phi_j, Curl phi_i>_h`.
    pub fn assemble_stiffness(&self) -> SparseMatrix<T> {
        self.assemble_operator(None, |_, _, _| [[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    /// `Curl a_h` and `h = d_b w(Curl a_h)` at every quadrature point,
    /// element-major, together with the point coordinates.
    pub fn fields_at_quadrature(&self, coeffs: &[T]) -> Result<Vec<QuadraturePointFields<T>>> {
        self.check_len(coeffs)?;
        let nq = self.nq();
        let nloc = self.space.local_dim();
        let per_element: Vec<Vec<QuadraturePointFields<T>>> = (0..self.space.num_elements())
            .into_par_iter()
            .map(|e| {
                let local = self.local(e, coeffs);
                let curls = self.element_curls(e);
                (0..nq)
                    .map(|q| {
                        let k = e * nq + q;
                        let b = Self::combine(&curls[q * nloc..(q + 1) * nloc], &local);
                        QuadraturePointFields {
                            element: e,
                            x: self.xq[k],
                            weight: self.wq[k],
                            b,
                            h: self.elem_law[e].field(self.xq[k], b),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(per_element.into_iter().flatten().collect())
    }

    /// `||Curl v||_h` under the problem's rule.
    pub fn curl_norm(&self, coeffs: &[T]) -> Result<T> {
        self.check_len(coeffs)?;
        Ok(self.space.curl_norm_h(coeffs, &self.rule))
    }
}

/// Flux and field at one quadrature point; `weight` includes the element area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraturePointFields<T> {
    pub element: usize,
    pub x: Vec2<T>,
    pub weight: T,
    pub b: Vec2<T>,
    pub h: Vec2<T>,
}
