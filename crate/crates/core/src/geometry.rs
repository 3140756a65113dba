//! Pull-back of laws and sources from a mapped physical domain
//! `Omega' = phi(Omega)` onto the reference domain `Omega`.
//!
//! With `F = D phi` and `J = det F`, the two-dimensional transforms are
//!
//! ```text
//! b'(phi(x)) = F b / J        h(x) = F^T h'(phi(x))
//! w(x, b)    = J w'(phi(x), F b / J)
//! ```
//!
//! For a scalar potential `a(x) = a'(phi(x))` these follow from
//! `Curl a = (grad a)^perp` and the adjugate identity for 2x2 matrices.

use std::fmt;
use std::sync::Arc;

use crate::materials::{Bounds, MaterialLaw, SharedLaw};
use crate::real::{det, mat_t_vec, mat_vec, sym_eigenvalues, Mat2, Vec2};
use crate::{Error, Real, Result};

pub trait DomainMap<T: Real>: Send + Sync + fmt::Debug {
    fn phi(&self, x: Vec2<T>) -> Vec2<T>;

    /// `F(x) = D phi(x)`, row-major: `F[i][j] = d phi_i / d x_j`.
    fn jacobian(&self, x: Vec2<T>) -> Mat2<T>;

    fn det_jacobian(&self, x: Vec2<T>) -> T {
        det(&self.jacobian(x))
    }
}

pub type SharedMap<T> = Arc<dyn DomainMap<T>>;

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl<T: Real> DomainMap<T> for IdentityMap {
    fn phi(&self, x: Vec2<T>) -> Vec2<T> {
        x
    }
    fn jacobian(&self, _x: Vec2<T>) -> Mat2<T> {
        [[T::one(), T::zero()], [T::zero(), T::one()]]
    }
}

/// `phi(x) = A x + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap<T> {
    pub matrix: Mat2<T>,
    pub shift: Vec2<T>,
}

impl<T: Real> DomainMap<T> for AffineMap<T> {
    fn phi(&self, x: Vec2<T>) -> Vec2<T> {
        let y = mat_vec(&self.matrix, x);
        [y[0] + self.shift[0], y[1] + self.shift[1]]
    }
    fn jacobian(&self, _x: Vec2<T>) -> Mat2<T> {
        self.matrix
    }
}

/// Unit square `(s, t)` onto the quarter annulus
/// `r = r_inner + (r_outer - r_inner) s`, `theta = pi/2 t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarterAnnulus<T> {
    pub r_inner: T,
    pub r_outer: T,
}

impl<T: Real> QuarterAnnulus<T> {
    pub fn new(r_inner: T, r_outer: T) -> Result<Self> {
        if !(r_inner > T::zero() && r_outer > r_inner) {
            return Err(Error::InvalidArgument(format!(
                "quarter annulus needs 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
            )));
        }
        Ok(Self { r_inner, r_outer })
    }

    /// Radius and angle of reference point `x`.
    pub fn polar(&self, x: Vec2<T>) -> (T, T) {
        (
            self.r_inner + (self.r_outer - self.r_inner) * x[0],
            T::FRAC_PI_2() * x[1],
        )
    }
}

impl<T: Real> DomainMap<T> for QuarterAnnulus<T> {
    fn phi(&self, x: Vec2<T>) -> Vec2<T> {
        let (r, th) = self.polar(x);
        [r * th.cos(), r * th.sin()]
    }
    fn jacobian(&self, x: Vec2<T>) -> Mat2<T> {
        let (r, th) = self.polar(x);
        let dr = self.r_outer - self.r_inner;
        let dth = T::FRAC_PI_2();
        let (c, s) = (th.cos(), th.sin());
        [[dr * c, -r * dth * s], [dr * s, r * dth * c]]
    }
}

fn orientation_error<T: Real>(x: Vec2<T>, j: T) -> Error {
    Error::Orientation {
        x: x[0].to_f64_lossy(),
        y: x[1].to_f64_lossy(),
        jacobian: j.to_f64_lossy(),
    }
}

/// Fails if `J <= 0` at any of `points`.
pub fn check_orientation<T: Real>(map: &dyn DomainMap<T>, points: &[Vec2<T>]) -> Result<()> {
    for &x in points {
        let j = map.det_jacobian(x);
        if !(j > T::zero()) {
            return Err(orientation_error(x, j));
        }
    }
    Ok(())
}

/// Largest relative deviation between `F` and central differences of
/// `phi` over `points`.
pub fn jacobian_consistency<T: Real>(map: &dyn DomainMap<T>, points: &[Vec2<T>]) -> T {
    let mut worst = T::zero();
    for &x in points {
        let f = map.jacobian(x);
        let scale = f.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
        let h = T::lit(1e-6) * (T::one() + x[0].abs().max(x[1].abs()));
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (pp, pm) = (map.phi(xp), map.phi(xm));
            for i in 0..2 {
                let fd = (pp[i] - pm[i]) / (h + h);
                worst = worst.max((fd - f[i][j]).abs() / scale);
            }
        }
    }
    worst
}

/// Extremal singular values of `F`.
fn singular_values<T: Real>(f: &Mat2<T>) -> (T, T) {
    let ftf = [
        [
            f[0][0] * f[0][0] + f[1][0] * f[1][0],
            f[0][0] * f[0][1] + f[1][0] * f[1][1],
        ],
        [
            f[0][1] * f[0][0] + f[1][1] * f[1][0],
            f[0][1] * f[0][1] + f[1][1] * f[1][1],
        ],
    ];
    let (lo, hi) = sym_eigenvalues(&ftf);
    (lo.max(T::zero()).sqrt(), hi.sqrt())
}

/// Reference-domain law `w(x, b) = J w'(phi(x), F b / J)`.
pub struct PulledBackLaw<T: Real> {
    map: SharedMap<T>,
    law: SharedLaw<T>,
    bounds: Option<Bounds<T>>,
}

impl<T: Real> fmt::Debug for PulledBackLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PulledBackLaw")
            .field("map", &self.map)
            .field("law", &self.law)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl<T: Real> PulledBackLaw<T> {
    #[inline]
    fn frame(&self, x: Vec2<T>) -> (Vec2<T>, Mat2<T>, T) {
        let f = self.map.jacobian(x);
        (self.map.phi(x), f, det(&f))
    }

    #[inline]
    fn push(f: &Mat2<T>, j: T, b: Vec2<T>) -> Vec2<T> {
        let y = mat_vec(f, b);
        [y[0] / j, y[1] / j]
    }
}

impl<T: Real> MaterialLaw<T> for PulledBackLaw<T> {
    fn energy(&self, x: Vec2<T>, b: Vec2<T>) -> T {
        let (xp, f, j) = self.frame(x);
        j * self.law.energy(xp, Self::push(&f, j, b))
    }

    fn field(&self, x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        let (xp, f, j) = self.frame(x);
        mat_t_vec(&f, self.law.field(xp, Self::push(&f, j, b)))
    }

    fn differential_reluctivity(&self, x: Vec2<T>, b: Vec2<T>) -> Mat2<T> {
        let (xp, f, j) = self.frame(x);
        let hp = self.law.differential_reluctivity(xp, Self::push(&f, j, b));
        // (1/J) F^T H' F
        let mut out = [[T::zero(); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let mut s = T::zero();
                for k in 0..2 {
                    for l in 0..2 {
                        s += f[k][r] * hp[k][l] * f[l][c];
                    }
                }
                *v = s / j;
            }
        }
        out
    }

    fn energy_increment(&self, x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        let (xp, f, j) = self.frame(x);
        j * self
            .law
            .energy_increment(xp, Self::push(&f, j, b), Self::push(&f, j, d))
    }

    fn bounds(&self) -> Option<Bounds<T>> {
        self.bounds
    }
}

/// Pulls `law` back through `map`, checking orientation at `probe`
/// points. If the physical law has certified bounds they are rescaled by
/// the extremal values of `sigma(F)^2 / J` over the probe points; the
/// result is reported, not assumed tight.
pub fn pullback_material<T: Real>(
    map: SharedMap<T>,
    law: SharedLaw<T>,
    probe: &[Vec2<T>],
) -> Result<PulledBackLaw<T>> {
    check_orientation(map.as_ref(), probe)?;
    let bounds = match (law.bounds(), probe.is_empty()) {
        (Some(b), false) => {
            let mut lo = T::infinity();
            let mut hi = T::zero();
            for &x in probe {
                let f = map.jacobian(x);
                let j = det(&f);
                let (smin, smax) = singular_values(&f);
                lo = lo.min(smin * smin / j);
                hi = hi.max(smax * smax / j);
            }
            Some(Bounds {
                gamma: b.gamma * lo,
                lipschitz: b.lipschitz * hi,
                hess_lipschitz: None,
            })
        }
        _ => None,
    };
    Ok(PulledBackLaw { map, law, bounds })
}

pub type VectorFn<T> = Arc<dyn Fn(Vec2<T>) -> Vec2<T> + Send + Sync>;
pub type ScalarFn<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;

/// `h_s(x) = F(x)^T h_s'(phi(x))`.
pub fn pullback_source<T: Real>(map: SharedMap<T>, hs_phys: VectorFn<T>) -> VectorFn<T> {
    Arc::new(move |x| mat_t_vec(&map.jacobian(x), hs_phys(map.phi(x))))
}

/// `j_s(x) = J(x) j_s'(phi(x))`, so that `<j_s, v>_Omega = <j_s', v'>_Omega'`.
pub fn pullback_density<T: Real>(map: SharedMap<T>, js_phys: ScalarFn<T>) -> ScalarFn<T> {
    Arc::new(move |x| map.det_jacobian(x) * js_phys(map.phi(x)))
}

/// `b'(phi(x)) = F(x) b / J(x)`.
pub fn pushforward_b<T: Real>(map: &dyn DomainMap<T>, x: Vec2<T>, b: Vec2<T>) -> Result<Vec2<T>> {
    let f = map.jacobian(x);
    let j = det(&f);
    if !(j > T::zero()) {
        return Err(orientation_error(x, j));
    }
    Ok(PulledBackLaw::<T>::push(&f, j, b))
}
