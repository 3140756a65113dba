//! Conforming triangular meshes with region and boundary tags.

mod io;

use std::collections::{BTreeMap, BTreeSet};

use crate::real::Vec2;
use crate::{Error, Real, Result};

pub use io::{parse_mesh, serialize_mesh};

/// A tagged boundary segment, stored with 0-based vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: i32,
}

/// Immutable conforming triangulation.
///
/// Triangles are counterclockwise; every edge used by exactly one triangle
/// is listed in `boundary_edges` and vice versa.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<Vec2<T>>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<i32>,
    boundary_edges: Vec<BoundaryEdge>,
}

/// Relative area below which a triangle counts as degenerate.
const DEGENERATE_AREA: f64 = 1e-14;

#[inline]
fn sorted_edge(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Real> Mesh<T> {
    pub fn new(
        vertices: Vec<Vec2<T>>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<i32>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        if regions.len() != triangles.len() {
            return Err(Error::InvalidMesh(format!(
                "{} region tags for {} triangles",
                regions.len(),
                triangles.len()
            )));
        }
        let nv = vertices.len();
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {v} (have {nv})"
                )));
            }
        }
        for e in &boundary_edges {
            if let Some(&v) = e.vertices.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge references vertex {v} (have {nv})"
                )));
            }
        }

        let mesh = Self {
            vertices,
            triangles,
            regions,
            boundary_edges,
        };

        let (lo, hi) = mesh.bounding_box();
        let bbox_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let threshold = T::lit(DEGENERATE_AREA) * bbox_area;
        for t in 0..mesh.triangles.len() {
            let a = mesh.signed_area(t);
            if a <= threshold {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has signed area {a:e} (threshold {threshold:e})"
                )));
            }
        }

        let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &mesh.triangles {
            for i in 0..3 {
                *edge_use.entry(sorted_edge(tri[i], tri[(i + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((e, n)) = edge_use.iter().find(|(_, &n)| n > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {e:?} shared by {n} triangles"
            )));
        }
        let mut listed = BTreeSet::new();
        for be in &mesh.boundary_edges {
            let key = sorted_edge(be.vertices[0], be.vertices[1]);
            match edge_use.get(&key) {
                Some(1) => {}
                Some(_) => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge {key:?} is interior"
                    )))
                }
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge {key:?} is not a triangle edge"
                    )))
                }
            }
            if !listed.insert(key) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge {key:?} listed twice"
                )));
            }
        }
        if let Some((e, _)) = edge_use
            .iter()
            .find(|(e, &n)| n == 1 && !listed.contains(*e))
        {
            return Err(Error::InvalidMesh(format!(
                "edge {e:?} lies on the boundary but is untagged (non-conforming?)"
            )));
        }

        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[i32] {
        &self.regions
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn region_tags(&self) -> BTreeSet<i32> {
        self.regions.iter().copied().collect()
    }

    pub fn boundary_tags(&self) -> BTreeSet<i32> {
        self.boundary_edges.iter().map(|e| e.tag).collect()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec2<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> T {
        let [p0, p1, p2] = self.triangle_vertices(t);
        T::lit(0.5) * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn bounding_box(&self) -> (Vec2<T>, Vec2<T>) {
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }

    /// All distinct edges as sorted vertex pairs, in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<_> = self
            .triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |i| sorted_edge(tri[i], tri[(i + 1) % 3])))
            .collect();
        set.into_iter().collect()
    }

    pub fn max_edge_length(&self) -> T {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .fold(T::zero(), T::max)
    }

    /// Circumradius over inradius of triangle `t` (2 for equilateral).
    pub fn shape_ratio(&self, t: usize) -> T {
        let [p0, p1, p2] = self.triangle_vertices(t);
        let len = |p: Vec2<T>, q: Vec2<T>| (q[0] - p[0]).hypot(q[1] - p[1]);
        let (a, b, c) = (len(p1, p2), len(p2, p0), len(p0, p1));
        let area = self.signed_area(t);
        let circum = a * b * c / (T::lit(4.0) * area);
        let inr = T::lit(2.0) * area / (a + b + c);
        circum / inr
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> Self {
        self.refine_uniform_with(|_, _, m| m)
    }

    /// Uniform red refinement with a hook that may relocate each new
    /// midpoint (used to snap points onto curved boundaries).
    ///
    /// The hook receives the parent edge endpoints and the straight
    /// midpoint. New vertices are appended in sorted-edge order. Triangle
    /// `t` becomes children `4t..4t+4`, laid out as described by
    /// [`child_reference_map`].
    pub fn refine_uniform_with<F>(&self, mut place: F) -> Self
    where
        F: FnMut(Vec2<T>, Vec2<T>, Vec2<T>) -> Vec2<T>,
    {
        let edges = self.edges();
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut midpoint_of = BTreeMap::new();
        let half = T::lit(0.5);
        for (i, &(a, b)) in edges.iter().enumerate() {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            let mid = [half * (p[0] + q[0]), half * (p[1] + q[1])];
            vertices.push(place(p, q, mid));
            midpoint_of.insert((a, b), nv + i);
        }
        let mid = |a: usize, b: usize| midpoint_of[&sorted_edge(a, b)];

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (tri, &region) in self.triangles.iter().zip(&self.regions) {
            let [v0, v1, v2] = *tri;
            let (m01, m12, m20) = (mid(v0, v1), mid(v1, v2), mid(v2, v0));
            triangles.push([v0, m01, m20]);
            triangles.push([m01, v1, m12]);
            triangles.push([m20, m12, v2]);
            triangles.push([m01, m12, m20]);
            regions.extend([region; 4]);
        }

        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            let m = mid(a, b);
            boundary_edges.push(BoundaryEdge { vertices: [a, m], tag: be.tag });
            boundary_edges.push(BoundaryEdge { vertices: [m, b], tag: be.tag });
        }

        Self {
            vertices,
            triangles,
            regions,
            boundary_edges,
        }
    }

    /// Same mesh with region tags reassigned per triangle.
    pub fn with_regions<F>(mut self, mut region_of: F) -> Self
    where
        F: FnMut(usize, Vec2<T>) -> i32,
    {
        let third = T::lit(1.0 / 3.0);
        for t in 0..self.triangles.len() {
            let [p0, p1, p2] = self.triangle_vertices(t);
            let c = [third * (p0[0] + p1[0] + p2[0]), third * (p0[1] + p1[1] + p2[1])];
            self.regions[t] = region_of(t, c);
        }
        self
    }
}

/// Affine map from the reference coordinates of child `c` (of a uniform
/// refinement) to reference coordinates of its parent: returns
/// `(origin, [col0, col1])` so that `xi_parent = origin + s*col0 + t*col1`.
pub fn child_reference_map<T: Real>(child: usize) -> (Vec2<T>, [Vec2<T>; 2]) {
    let h = T::lit(0.5);
    let z = T::zero();
    let (o, p1, p2) = match child {
        0 => ([z, z], [h, z], [z, h]),
        1 => ([h, z], [T::one(), z], [h, h]),
        2 => ([z, h], [h, h], [z, T::one()]),
        3 => ([h, z], [h, h], [z, h]),
        _ => panic!("uniform refinement has four children, got index {child}"),
    };
    (o, [[p1[0] - o[0], p1[1] - o[1]], [p2[0] - o[0], p2[1] - o[1]]])
}

/// Structured mesh of `[x0, x1] x [y0, y1]` with `nx * ny` cells, each cut
/// along its lower-left to upper-right diagonal. All triangles get region 1
/// and the outer boundary tag 1.
pub fn generate_rectangle<T: Real>(
    nx: usize,
    ny: usize,
    x_range: [T; 2],
    y_range: [T; 2],
) -> Result<Mesh<T>> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell counts must be positive, got {nx} x {ny}"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let fy = T::from_usize_lossy(j) / T::from_usize_lossy(ny);
        let y = y_range[0] + (y_range[1] - y_range[0]) * fy;
        for i in 0..=nx {
            let fx = T::from_usize_lossy(i) / T::from_usize_lossy(nx);
            vertices.push([x_range[0] + (x_range[1] - x_range[0]) * fx, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    let mut push = |a, b| boundary_edges.push(BoundaryEdge { vertices: [a, b], tag: 1 });
    for i in 0..nx {
        push(id(i, 0), id(i + 1, 0));
    }
    for j in 0..ny {
        push(id(nx, j), id(nx, j + 1));
    }
    for i in (0..nx).rev() {
        push(id(i + 1, ny), id(i, ny));
    }
    for j in (0..ny).rev() {
        push(id(0, j + 1), id(0, j));
    }
    let regions = vec![1; triangles.len()];
    Mesh::new(vertices, triangles, regions, boundary_edges)
}

/// Uniform `n x n` mesh of the unit square.
pub fn generate_unit_square<T: Real>(n: usize) -> Result<Mesh<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    generate_rectangle(n, n, [T::zero(), T::one()], [T::zero(), T::one()])
}

/// Disc of radius `radius` centred at the origin, triangulated by `rings`
/// concentric rings; ring `i` carries `6 i` vertices, giving `6 rings^2`
/// triangles. The boundary (tag 1) is the inscribed `6 rings`-gon.
pub fn generate_disc<T: Real>(radius: T, rings: usize) -> Result<Mesh<T>> {
    if rings == 0 {
        return Err(Error::InvalidArgument("rings must be at least 1".into()));
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let two_pi = T::TAU();
    let mut vertices = vec![[T::zero(), T::zero()]];
    let mut ring_start = vec![0usize];
    for i in 1..=rings {
        ring_start.push(vertices.len());
        let r = radius * T::from_usize_lossy(i) / T::from_usize_lossy(rings);
        let n = 6 * i;
        for j in 0..n {
            let phi = two_pi * T::from_usize_lossy(j) / T::from_usize_lossy(n);
            vertices.push([r * phi.cos(), r * phi.sin()]);
        }
    }
    let ring_len = |i: usize| if i == 0 { 1 } else { 6 * i };
    let at = |i: usize, j: usize| ring_start[i] + j % ring_len(i);

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for i in 1..=rings {
        let (n_in, n_out) = (ring_len(i - 1), ring_len(i));
        // Merge the two rings by angle; each sector of 60 degrees holds
        // i-1 inner and i outer intervals.
        let (mut a, mut b) = (0usize, 0usize);
        while a < n_in || b < n_out {
            let advance_outer = if a == n_in {
                true
            } else if b == n_out {
                false
            } else {
                // Compare the angles of the next candidates: (b+1)/n_out vs (a+1)/n_in.
                (b + 1) * n_in <= (a + 1) * n_out
            };
            if i == 1 {
                triangles.push([at(0, 0), at(1, b), at(1, b + 1)]);
                b += 1;
                a = n_in;
                continue;
            }
            if advance_outer {
                triangles.push([at(i - 1, a), at(i, b), at(i, b + 1)]);
                b += 1;
            } else {
                triangles.push([at(i - 1, a), at(i, b), at(i - 1, a + 1)]);
                a += 1;
            }
        }
    }
    let outer = rings;
    let n = ring_len(outer);
    let boundary_edges = (0..n)
        .map(|j| BoundaryEdge {
            vertices: [at(outer, j), at(outer, j + 1)],
            tag: 1,
        })
        .collect();
    let regions = vec![1; triangles.len()];
    Mesh::new(vertices, triangles, regions, boundary_edges)
}
