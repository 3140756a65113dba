//! `P_p` Lagrange spaces with homogeneous Dirichlet constraints and the
//! scalar-to-vector `Curl a = (d_y a, -d_x a)`.

mod lagrange;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use lagrange::LagrangeBasis;

use crate::mesh::Mesh;
use crate::quadrature::{map_point, QuadratureRule};
use crate::real::{Mat2, Vec2};
use crate::{Error, Real, Result};

/// Tolerance for the boundary trace check in [`FESpace::interpolate`].
pub const BOUNDARY_TRACE_TOL: f64 = 1e-10;

/// Degrees of freedom of a discrete vector potential, one per free dof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector<T>(pub Vec<T>);

impl<T: Real> CoefficientVector<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: T, other: &[T]) -> Self {
        Self(self.0.iter().zip(other).map(|(&a, &b)| a + alpha * b).collect())
    }
}

impl<T> Deref for CoefficientVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for CoefficientVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for CoefficientVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Shape-function values and reference gradients tabulated at the points
/// of a quadrature rule.
#[derive(Clone, Debug)]
pub struct ReferenceTable<T> {
    pub values: Vec<Vec<T>>,
    pub grads: Vec<Vec<Vec2<T>>>,
}

/// Sentinel for constrained dofs in the global-to-free map.
const CONSTRAINED: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct FESpace<T> {
    mesh: Arc<Mesh<T>>,
    basis: LagrangeBasis,
    elem_dofs: Vec<usize>,
    node_coords: Vec<Vec2<T>>,
    global_to_free: Vec<usize>,
    free_to_global: Vec<usize>,
    inv_jac_t: Vec<Mat2<T>>,
    areas: Vec<T>,
    dirichlet_tags: BTreeSet<i32>,
}

impl<T: Real> FESpace<T> {
    /// Builds the degree-`degree` space; dofs on edges whose tag is in
    /// `dirichlet_tags` are constrained to zero.
    ///
    /// Global numbering: vertex dofs by vertex index, then edge dofs by
    /// sorted edge (ordered from the lower to the higher vertex index),
    /// then interior dofs by element.
    pub fn new(mesh: Arc<Mesh<T>>, degree: usize, dirichlet_tags: &[i32]) -> Result<Self> {
        if !(1..=5).contains(&degree) {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree must be in 1..=5, got {degree}"
            )));
        }
        let present = mesh.boundary_tags();
        let dirichlet_tags: BTreeSet<i32> = dirichlet_tags.iter().copied().collect();
        if let Some(t) = dirichlet_tags.iter().find(|t| !present.contains(t)) {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet tag {t} not present in mesh (tags {present:?})"
            )));
        }

        let basis = LagrangeBasis::new(degree);
        let p = degree;
        let nloc = basis.len();
        let per_edge = basis.edge_nodes_per_edge();
        let per_cell = basis.interior_nodes();
        let nv = mesh.num_vertices();
        let edges = mesh.edges();
        let edge_index: BTreeMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let edge_base = nv;
        let cell_base = nv + edges.len() * per_edge;
        let ndofs = cell_base + mesh.num_triangles() * per_cell;

        let mut elem_dofs = Vec::with_capacity(mesh.num_triangles() * nloc);
        let mut node_coords = vec![[T::zero(); 2]; ndofs];
        let mut inv_jac_t = Vec::with_capacity(mesh.num_triangles());
        let mut areas = Vec::with_capacity(mesh.num_triangles());

        for (t, tri) in mesh.triangles().iter().enumerate() {
            let verts = mesh.triangle_vertices(t);
            let mut local = Vec::with_capacity(nloc);
            local.extend_from_slice(tri);
            for m in 0..3 {
                let (a, b) = (tri[m], tri[(m + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                let start = edge_base + edge_index[&key] * per_edge;
                for j in 1..p {
                    let k = if a < b { j } else { p - j };
                    local.push(start + k - 1);
                }
            }
            for i in 0..per_cell {
                local.push(cell_base + t * per_cell + i);
            }
            for (i, &g) in local.iter().enumerate() {
                node_coords[g] = map_point(&verts, basis.node(i));
            }
            elem_dofs.extend_from_slice(&local);

            let [p0, p1, p2] = verts;
            let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            // J^{-T}
            inv_jac_t.push([
                [jac[1][1] / det, -jac[1][0] / det],
                [-jac[0][1] / det, jac[0][0] / det],
            ]);
            areas.push(T::lit(0.5) * det);
        }

        let mut constrained = vec![false; ndofs];
        for be in mesh.boundary_edges() {
            if !dirichlet_tags.contains(&be.tag) {
                continue;
            }
            let [a, b] = be.vertices;
            constrained[a] = true;
            constrained[b] = true;
            let key = if a < b { (a, b) } else { (b, a) };
            let start = edge_base + edge_index[&key] * per_edge;
            for c in &mut constrained[start..start + per_edge] {
                *c = true;
            }
        }
        let mut global_to_free = vec![CONSTRAINED; ndofs];
        let mut free_to_global = Vec::new();
        for (g, &c) in constrained.iter().enumerate() {
            if !c {
                global_to_free[g] = free_to_global.len();
                free_to_global.push(g);
            }
        }

        Ok(Self {
            mesh,
            basis,
            elem_dofs,
            node_coords,
            global_to_free,
            free_to_global,
            inv_jac_t,
            areas,
            dirichlet_tags,
        })
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn dirichlet_tags(&self) -> &BTreeSet<i32> {
        &self.dirichlet_tags
    }

    /// Local space dimension `(p+1)(p+2)/2`.
    pub fn local_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_to_global.len()
    }

    pub fn num_elements(&self) -> usize {
        self.areas.len()
    }

    /// Global dof indices of element `e`, in local order.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let n = self.local_dim();
        &self.elem_dofs[e * n..(e + 1) * n]
    }

    /// Free index of a global dof, `None` if constrained.
    pub fn free_index(&self, global: usize) -> Option<usize> {
        match self.global_to_free[global] {
            CONSTRAINED => None,
            i => Some(i),
        }
    }

    pub fn is_constrained(&self, global: usize) -> bool {
        self.global_to_free[global] == CONSTRAINED
    }

    pub fn free_to_global(&self) -> &[usize] {
        &self.free_to_global
    }

    pub fn node_coords(&self) -> &[Vec2<T>] {
        &self.node_coords
    }

    pub fn element_area(&self, e: usize) -> T {
        self.areas[e]
    }

    pub fn inverse_jacobian_t(&self, e: usize) -> &Mat2<T> {
        &self.inv_jac_t[e]
    }

    fn check_element(&self, e: usize) -> Result<()> {
        if e >= self.num_elements() {
            return Err(Error::InvalidArgument(format!(
                "element {e} out of range ({} elements)",
                self.num_elements()
            )));
        }
        Ok(())
    }

    /// Physical point of reference coordinates `xi` in element `e`.
    pub fn map_to_physical(&self, e: usize, xi: Vec2<T>) -> Vec2<T> {
        map_point(&self.mesh.triangle_vertices(e), xi)
    }

    /// Physical gradient -> Curl: `(g_y, -g_x)` with `g = J^{-T} g_ref`.
    #[inline]
    pub fn curl_from_ref_grad(&self, e: usize, g: Vec2<T>) -> Vec2<T> {
        let m = &self.inv_jac_t[e];
        let gx = m[0][0] * g[0] + m[0][1] * g[1];
        let gy = m[1][0] * g[0] + m[1][1] * g[1];
        [gy, -gx]
    }

    /// Values and physical Curl vectors of every local shape function.
    pub fn eval_basis(&self, e: usize, xi: Vec2<T>) -> Result<(Vec<T>, Vec<Vec2<T>>)> {
        self.check_element(e)?;
        let n = self.local_dim();
        let mut values = vec![T::zero(); n];
        let mut grads = vec![[T::zero(); 2]; n];
        self.basis.eval(xi, &mut values, &mut grads);
        let curls = grads.iter().map(|&g| self.curl_from_ref_grad(e, g)).collect();
        Ok((values, curls))
    }

    pub fn tabulate(&self, rule: &QuadratureRule<T>) -> ReferenceTable<T> {
        let n = self.local_dim();
        let mut values = Vec::with_capacity(rule.len());
        let mut grads = Vec::with_capacity(rule.len());
        for &xi in rule.points() {
            let mut v = vec![T::zero(); n];
            let mut g = vec![[T::zero(); 2]; n];
            self.basis.eval(xi, &mut v, &mut g);
            values.push(v);
            grads.push(g);
        }
        ReferenceTable { values, grads }
    }

    /// Element-local coefficients (zeros on constrained dofs).
    pub fn gather(&self, e: usize, coeffs: &[T], out: &mut [T]) {
        for (o, &g) in out.iter_mut().zip(self.element_dofs(e)) {
            *o = match self.global_to_free[g] {
                CONSTRAINED => T::zero(),
                i => coeffs[i],
            };
        }
    }

    /// Nodal interpolant of `f`. Fails if `f` does not vanish (within
    /// [`BOUNDARY_TRACE_TOL`]) at a constrained node.
    pub fn interpolate<F: Fn(Vec2<T>) -> T>(&self, f: F) -> Result<CoefficientVector<T>> {
        let tol = T::lit(BOUNDARY_TRACE_TOL);
        let mut out = vec![T::zero(); self.n_free()];
        for (g, &x) in self.node_coords.iter().enumerate() {
            let v = f(x);
            match self.global_to_free[g] {
                CONSTRAINED => {
                    if !(v.abs() <= tol) {
                        return Err(Error::BoundaryCompatibility {
                            x: x[0].to_f64_lossy(),
                            y: x[1].to_f64_lossy(),
                            value: v.to_f64_lossy(),
                        });
                    }
                }
                i => out[i] = v,
            }
        }
        Ok(CoefficientVector(out))
    }

    pub fn eval_field(&self, coeffs: &[T], e: usize, xi: Vec2<T>) -> Result<T> {
        let (values, _) = self.eval_basis(e, xi)?;
        let mut local = vec![T::zero(); self.local_dim()];
        self.gather(e, coeffs, &mut local);
        Ok(values.iter().zip(&local).map(|(&v, &c)| v * c).sum())
    }

    /// `Curl a_h` at reference point `xi` of element `e`.
    pub fn eval_curl_field(&self, coeffs: &[T], e: usize, xi: Vec2<T>) -> Result<Vec2<T>> {
        let (_, curls) = self.eval_basis(e, xi)?;
        let mut local = vec![T::zero(); self.local_dim()];
        self.gather(e, coeffs, &mut local);
        let mut b = [T::zero(); 2];
        for (c, &a) in curls.iter().zip(&local) {
            b[0] += a * c[0];
            b[1] += a * c[1];
        }
        Ok(b)
    }

    /// `Curl a_h` at every quadrature point of every element, element-major.
    pub fn curl_at_quadrature(&self, coeffs: &[T], rule: &QuadratureRule<T>) -> Vec<Vec2<T>> {
        let table = self.tabulate(rule);
        let n = self.local_dim();
        let mut local = vec![T::zero(); n];
        let mut out = Vec::with_capacity(self.num_elements() * rule.len());
        for e in 0..self.num_elements() {
            self.gather(e, coeffs, &mut local);
            for grads in &table.grads {
                let mut g = [T::zero(); 2];
                for (gr, &a) in grads.iter().zip(&local) {
                    g[0] += a * gr[0];
                    g[1] += a * gr[1];
                }
                out.push(self.curl_from_ref_grad(e, g));
            }
        }
        out
    }

    /// `||Curl a_h||_h` under `rule`.
    pub fn curl_norm_h(&self, coeffs: &[T], rule: &QuadratureRule<T>) -> T {
        let curls = self.curl_at_quadrature(coeffs, rule);
        let nq = rule.len();
        let mut total = T::zero();
        for e in 0..self.num_elements() {
            let s: T = curls[e * nq..(e + 1) * nq]
                .iter()
                .zip(rule.weights())
                .map(|(b, &w)| w * (b[0] * b[0] + b[1] * b[1]))
                .sum();
            total += s * self.areas[e];
        }
        total.sqrt()
    }
}
