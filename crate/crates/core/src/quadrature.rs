//! Positive-weight symmetric quadrature on the reference triangle
//! `(0,0), (1,0), (0,1)` and the mesh-wide discrete inner product
//! `<u, v>_h = sum_T sum_j u(x_Tj) v(x_Tj) w_j |T|`.
//!
//! Weights are normalised to sum to one, so a rule integrates the mean of
//! a function over the triangle.

use rayon::prelude::*;

use crate::mesh::Mesh;
use crate::real::Vec2;
use crate::{Error, Real, Result};

/// Highest exactness degree available.
pub const MAX_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    points: Vec<Vec2<T>>,
    weights: Vec<T>,
    degree: usize,
}

enum Orbit {
    /// Centroid, one point.
    Centroid(f64),
    /// Barycentric `(a, a, 1 - 2a)` and permutations, three points.
    Three(f64, f64),
    /// Barycentric `(a, b, 1 - a - b)` and permutations, six points.
    Six(f64, f64, f64),
}

// Per-point weights. Computed by solving the symmetric moment equations in
// 40-digit arithmetic; printed to 20 significant digits.
#[allow(clippy::excessive_precision)]
const DEG4: &[Orbit] = &[
    Orbit::Three(0.22338158967801146570, 0.44594849091596488632),
    Orbit::Three(0.10995174365532186764, 0.091576213509770743460),
];

#[allow(clippy::excessive_precision)]
const DEG5: &[Orbit] = &[
    Orbit::Centroid(0.225),
    Orbit::Three(0.13239415278850618074, 0.47014206410511508977),
    Orbit::Three(0.12593918054482715260, 0.10128650732345633880),
];

#[allow(clippy::excessive_precision)]
const DEG6: &[Orbit] = &[
    Orbit::Three(0.11678627572637936603, 0.24928674517091042129),
    Orbit::Three(0.050844906370206816921, 0.063089014491502228340),
    Orbit::Six(0.082851075618373575194, 0.053145049844816947353, 0.31035245103378440542),
];

#[allow(clippy::excessive_precision)]
const DEG8: &[Orbit] = &[
    Orbit::Centroid(0.14431560767778716825),
    Orbit::Three(0.095091634267284624794, 0.45929258829272315603),
    Orbit::Three(0.10321737053471825028, 0.17056930775176020662),
    Orbit::Three(0.032458497623198080311, 0.050547228317030975458),
    Orbit::Six(0.027230314174434994265, 0.0083947774099576053372, 0.26311282963463811342),
];

/// Stored exactness degrees, ascending.
pub const STORED_DEGREES: [usize; 6] = [1, 2, 4, 5, 6, 8];

impl<T: Real> QuadratureRule<T> {
    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Declared exactness degree.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn from_orbits(orbits: &[Orbit], degree: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for orbit in orbits {
            match *orbit {
                Orbit::Centroid(w) => {
                    points.push([T::lit(1.0 / 3.0); 2]);
                    weights.push(T::lit(w));
                }
                Orbit::Three(w, a) => {
                    let (a, c) = (T::lit(a), T::one() - T::lit(2.0 * a));
                    for p in [[a, a], [a, c], [c, a]] {
                        points.push(p);
                        weights.push(T::lit(w));
                    }
                }
                Orbit::Six(w, a, b) => {
                    let (a, b) = (T::lit(a), T::lit(b));
                    let c = T::one() - a - b;
                    for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
                        points.push(p);
                        weights.push(T::lit(w));
                    }
                }
            }
        }
        Self { points, weights, degree }
    }

    /// Integral of `f` over one triangle given its vertices.
    pub fn integrate_on<F: Fn(Vec2<T>) -> T>(&self, verts: &[Vec2<T>; 3], f: F) -> T {
        let area = triangle_area(verts);
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| w * f(map_point(verts, xi)))
            .sum::<T>()
            * area
    }
}

/// The smallest stored rule whose exactness is at least `degree`.
pub fn rule_for_degree<T: Real>(degree: usize) -> Result<QuadratureRule<T>> {
    let stored = STORED_DEGREES
        .iter()
        .copied()
        .find(|&d| d >= degree)
        .ok_or(Error::UnsupportedDegree {
            requested: degree,
            max: MAX_DEGREE,
        })?;
    Ok(match stored {
        1 => QuadratureRule {
            points: vec![[T::lit(1.0 / 3.0); 2]],
            weights: vec![T::one()],
            degree: 1,
        },
        2 => {
            let (h, z) = (T::lit(0.5), T::zero());
            QuadratureRule {
                points: vec![[h, z], [h, h], [z, h]],
                weights: vec![T::lit(1.0 / 3.0); 3],
                degree: 2,
            }
        }
        4 => QuadratureRule::from_orbits(DEG4, 4),
        5 => QuadratureRule::from_orbits(DEG5, 5),
        6 => QuadratureRule::from_orbits(DEG6, 6),
        8 => QuadratureRule::from_orbits(DEG8, 8),
        _ => unreachable!("stored degree table out of sync"),
    })
}

#[inline]
pub(crate) fn map_point<T: Real>(verts: &[Vec2<T>; 3], xi: Vec2<T>) -> Vec2<T> {
    let [p0, p1, p2] = *verts;
    [
        p0[0] + xi[0] * (p1[0] - p0[0]) + xi[1] * (p2[0] - p0[0]),
        p0[1] + xi[0] * (p1[1] - p0[1]) + xi[1] * (p2[1] - p0[1]),
    ]
}

#[inline]
pub(crate) fn triangle_area<T: Real>(verts: &[Vec2<T>; 3]) -> T {
    let [p0, p1, p2] = *verts;
    T::lit(0.5) * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

/// Sum over elements of `integrand` evaluated at mapped quadrature points,
/// weighted by `w_j |T|`. Elements are evaluated in parallel and reduced in
/// element order.
pub fn quadrature_sum<T, F>(mesh: &Mesh<T>, rule: &QuadratureRule<T>, integrand: F) -> T
where
    T: Real,
    F: Fn(usize, Vec2<T>) -> T + Sync,
{
    let per_element: Vec<T> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let verts = mesh.triangle_vertices(t);
            let area = triangle_area(&verts);
            let s: T = rule
                .points()
                .iter()
                .zip(rule.weights())
                .map(|(&xi, &w)| w * integrand(t, map_point(&verts, xi)))
                .sum();
            s * area
        })
        .collect();
    per_element.into_iter().fold(T::zero(), |acc, x| acc + x)
}

/// Discrete inner product of two scalar point-functions.
pub fn discrete_inner_product<T, U, V>(mesh: &Mesh<T>, rule: &QuadratureRule<T>, u: U, v: V) -> T
where
    T: Real,
    U: Fn(Vec2<T>) -> T + Sync,
    V: Fn(Vec2<T>) -> T + Sync,
{
    quadrature_sum(mesh, rule, |_, x| u(x) * v(x))
}

/// Discrete inner product of two vector point-functions.
pub fn discrete_inner_product_vec<T, U, V>(
    mesh: &Mesh<T>,
    rule: &QuadratureRule<T>,
    u: U,
    v: V,
) -> T
where
    T: Real,
    U: Fn(Vec2<T>) -> Vec2<T> + Sync,
    V: Fn(Vec2<T>) -> Vec2<T> + Sync,
{
    quadrature_sum(mesh, rule, |_, x| {
        let (a, b) = (u(x), v(x));
        a[0] * b[0] + a[1] * b[1]
    })
}
