//! Energy densities `w(x, b)` with their gradient `h = d_b w` and Hessian
//! (the differential reluctivity), plus numerical certification of the
//! convexity bounds `gamma |xi|^2 <= <d_bb w xi, xi> <= L |xi|^2`.

mod brauer;

use std::fmt;
use std::sync::Arc;

pub use brauer::BrauerParams;

use crate::real::{dot, sym_eigenvalues, Mat2, Vec2};
use crate::{Error, Real, Result};

/// `(w, h, nu_d)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialEval<T> {
    pub energy: T,
    pub field: Vec2<T>,
    pub nu_d: Mat2<T>,
}

/// Certified spectral bounds of `d_bb w`; `hess_lipschitz` is the
/// Lipschitz constant of `d_bb w` when known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds<T> {
    pub gamma: T,
    pub lipschitz: T,
    pub hess_lipschitz: Option<T>,
}

/// A convex energy density. Implementations must keep `field` the exact
/// gradient of `energy` and `differential_reluctivity` the exact Jacobian
/// of `field`.
pub trait MaterialLaw<T: Real>: Send + Sync + fmt::Debug {
    fn energy(&self, x: Vec2<T>, b: Vec2<T>) -> T;

    fn field(&self, x: Vec2<T>, b: Vec2<T>) -> Vec2<T>;

    fn differential_reluctivity(&self, x: Vec2<T>, b: Vec2<T>) -> Mat2<T>;

    fn eval(&self, x: Vec2<T>, b: Vec2<T>) -> MaterialEval<T> {
        MaterialEval {
            energy: self.energy(x, b),
            field: self.field(x, b),
            nu_d: self.differential_reluctivity(x, b),
        }
    }

    /// `w(x, b + d) - w(x, b)`. Implementations should avoid the
    /// cancellation of the naive difference for small `d`.
    fn energy_increment(&self, x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        self.energy(x, [b[0] + d[0], b[1] + d[1]]) - self.energy(x, b)
    }

    /// Certified `(gamma, L)` if the law knows them.
    fn bounds(&self) -> Option<Bounds<T>>;
}

pub type SharedLaw<T> = Arc<dyn MaterialLaw<T>>;

/// Evaluates `law` after checking that `b` is finite.
pub fn material_eval<T: Real>(
    law: &dyn MaterialLaw<T>,
    x: Vec2<T>,
    b: Vec2<T>,
) -> Result<MaterialEval<T>> {
    if !(b[0].is_finite() && b[1].is_finite() && x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::InvalidArgument("non-finite point or flux density".into()));
    }
    Ok(law.eval(x, b))
}

#[inline]
fn quadratic_increment<T: Real>(n: &Mat2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
    let nd = crate::real::mat_vec(n, d);
    dot(nd, b) + T::lit(0.5) * dot(nd, d)
}

/// `w = nu/2 |b|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearIsotropic<T> {
    pub nu: T,
}

impl<T: Real> LinearIsotropic<T> {
    pub fn new(nu: T) -> Result<Self> {
        if !(nu > T::zero()) {
            return Err(Error::InvalidArgument(format!("reluctivity must be positive, got {nu}")));
        }
        Ok(Self { nu })
    }
}

impl<T: Real> MaterialLaw<T> for LinearIsotropic<T> {
    fn energy(&self, _x: Vec2<T>, b: Vec2<T>) -> T {
        T::lit(0.5) * self.nu * dot(b, b)
    }
    fn field(&self, _x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        [self.nu * b[0], self.nu * b[1]]
    }
    fn differential_reluctivity(&self, _x: Vec2<T>, _b: Vec2<T>) -> Mat2<T> {
        [[self.nu, T::zero()], [T::zero(), self.nu]]
    }
    fn energy_increment(&self, _x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        self.nu * (dot(b, d) + T::lit(0.5) * dot(d, d))
    }
    fn bounds(&self) -> Option<Bounds<T>> {
        Some(Bounds {
            gamma: self.nu,
            lipschitz: self.nu,
            hess_lipschitz: Some(T::zero()),
        })
    }
}

/// `w = nu0/2 |b|^2 - m.b`, i.e. `h = nu0 b - m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermanentMagnet<T> {
    pub nu0: T,
    pub magnetization: Vec2<T>,
}

impl<T: Real> PermanentMagnet<T> {
    pub fn new(nu0: T, magnetization: Vec2<T>) -> Result<Self> {
        if !(nu0 > T::zero()) {
            return Err(Error::InvalidArgument(format!("reluctivity must be positive, got {nu0}")));
        }
        Ok(Self { nu0, magnetization })
    }
}

impl<T: Real> MaterialLaw<T> for PermanentMagnet<T> {
    fn energy(&self, _x: Vec2<T>, b: Vec2<T>) -> T {
        T::lit(0.5) * self.nu0 * dot(b, b) - dot(self.magnetization, b)
    }
    fn field(&self, _x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        let m = self.magnetization;
        [self.nu0 * b[0] - m[0], self.nu0 * b[1] - m[1]]
    }
    fn differential_reluctivity(&self, _x: Vec2<T>, _b: Vec2<T>) -> Mat2<T> {
        [[self.nu0, T::zero()], [T::zero(), self.nu0]]
    }
    fn energy_increment(&self, _x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        self.nu0 * (dot(b, d) + T::lit(0.5) * dot(d, d)) - dot(self.magnetization, d)
    }
    fn bounds(&self) -> Option<Bounds<T>> {
        Some(Bounds {
            gamma: self.nu0,
            lipschitz: self.nu0,
            hess_lipschitz: Some(T::zero()),
        })
    }
}

/// `w = 1/2 <N b, b>` with a constant symmetric positive definite `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropicLinear<T> {
    pub tensor: Mat2<T>,
}

impl<T: Real> AnisotropicLinear<T> {
    pub fn new(tensor: Mat2<T>) -> Result<Self> {
        let asym = (tensor[0][1] - tensor[1][0]).abs();
        let scale = tensor[0][0].abs() + tensor[1][1].abs();
        if asym > T::lit(1e-12) * scale {
            return Err(Error::InvalidArgument("reluctivity tensor is not symmetric".into()));
        }
        if !(sym_eigenvalues(&tensor).0 > T::zero()) {
            return Err(Error::InvalidArgument("reluctivity tensor is not positive definite".into()));
        }
        Ok(Self { tensor })
    }
}

impl<T: Real> MaterialLaw<T> for AnisotropicLinear<T> {
    fn energy(&self, _x: Vec2<T>, b: Vec2<T>) -> T {
        T::lit(0.5) * dot(crate::real::mat_vec(&self.tensor, b), b)
    }
    fn field(&self, _x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        crate::real::mat_vec(&self.tensor, b)
    }
    fn differential_reluctivity(&self, _x: Vec2<T>, _b: Vec2<T>) -> Mat2<T> {
        self.tensor
    }
    fn energy_increment(&self, _x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        quadratic_increment(&self.tensor, b, d)
    }
    fn bounds(&self) -> Option<Bounds<T>> {
        let (lo, hi) = sym_eigenvalues(&self.tensor);
        Some(Bounds {
            gamma: lo,
            lipschitz: hi,
            hess_lipschitz: Some(T::zero()),
        })
    }
}

pub type TensorFn<T> = Arc<dyn Fn(Vec2<T>) -> Mat2<T> + Send + Sync>;

/// `w(x, b) = 1/2 <N(x) b, b>` with a spatially varying SPD tensor.
#[derive(Clone)]
pub struct LinearTensorField<T> {
    tensor: TensorFn<T>,
    bounds: Option<Bounds<T>>,
}

impl<T: Real> LinearTensorField<T> {
    pub fn new(tensor: TensorFn<T>, bounds: Option<Bounds<T>>) -> Self {
        Self { tensor, bounds }
    }
}

impl<T> fmt::Debug for LinearTensorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearTensorField").finish_non_exhaustive()
    }
}

impl<T: Real> MaterialLaw<T> for LinearTensorField<T> {
    fn energy(&self, x: Vec2<T>, b: Vec2<T>) -> T {
        T::lit(0.5) * dot(crate::real::mat_vec(&(self.tensor)(x), b), b)
    }
    fn field(&self, x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        crate::real::mat_vec(&(self.tensor)(x), b)
    }
    fn differential_reluctivity(&self, x: Vec2<T>, _b: Vec2<T>) -> Mat2<T> {
        (self.tensor)(x)
    }
    fn energy_increment(&self, x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        quadratic_increment(&(self.tensor)(x), b, d)
    }
    fn bounds(&self) -> Option<Bounds<T>> {
        self.bounds
    }
}

/// Points at which [`certify_bounds`] samples a law.
#[derive(Clone, Debug)]
pub enum SampleSpec<T> {
    /// Polar grid `b = s (cos t, sin t)`, `s` in `[0, s_max]`, at fixed `x`.
    Radial {
        s_max: T,
        radii: usize,
        angles: usize,
        x: Vec2<T>,
    },
    /// Arbitrary `(x, b)` samples.
    Cloud(Vec<(Vec2<T>, Vec2<T>)>),
}

/// Sampled spectral bounds of `d_bb w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport<T> {
    pub gamma_hat: T,
    pub lipschitz_hat: T,
    /// Largest difference quotient `||d2w(b1) - d2w(b2)|| / |b1 - b2|` over
    /// neighbouring sample pairs (spectral norm).
    pub hess_lipschitz_hat: T,
    /// The law's own certified bounds, if any.
    pub analytic: Option<Bounds<T>>,
}

fn spectral_norm_of_difference<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    let d = [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ];
    let (lo, hi) = sym_eigenvalues(&d);
    lo.abs().max(hi.abs())
}

type Samples<T> = Vec<(Vec2<T>, Vec2<T>)>;

pub fn certify_bounds<T: Real>(
    law: &dyn MaterialLaw<T>,
    spec: &SampleSpec<T>,
) -> Result<BoundsReport<T>> {
    // (x, b) samples and neighbour pairs for the Lipschitz estimate
    let (samples, pairs): (Samples<T>, Vec<(usize, usize)>) = match spec {
        SampleSpec::Radial {
            s_max,
            radii,
            angles,
            x,
        } => {
            if *radii < 2 || *angles == 0 {
                return Err(Error::InvalidArgument(
                    "radial sampling needs at least 2 radii and 1 angle".into(),
                ));
            }
            let mut samples = Vec::with_capacity(radii * angles);
            let mut pairs = Vec::new();
            for i in 0..*radii {
                let s = *s_max * T::from_usize_lossy(i) / T::from_usize_lossy(radii - 1);
                for j in 0..*angles {
                    let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(*angles);
                    let idx = samples.len();
                    samples.push((*x, [s * t.cos(), s * t.sin()]));
                    if i > 0 {
                        pairs.push((idx - angles, idx));
                    }
                    if j > 0 && i > 0 {
                        pairs.push((idx - 1, idx));
                    }
                }
            }
            (samples, pairs)
        }
        SampleSpec::Cloud(points) => {
            if points.is_empty() {
                return Err(Error::InvalidArgument("empty sample set".into()));
            }
            let n = points.len();
            let pairs = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect();
            (points.clone(), pairs)
        }
    };

    let hessians: Vec<Mat2<T>> = samples
        .iter()
        .map(|&(x, b)| law.differential_reluctivity(x, b))
        .collect();
    let mut gamma_hat = T::infinity();
    let mut lipschitz_hat = T::neg_infinity();
    for h in &hessians {
        let (lo, hi) = sym_eigenvalues(h);
        gamma_hat = gamma_hat.min(lo);
        lipschitz_hat = lipschitz_hat.max(hi);
    }
    let mut hess_lipschitz_hat = T::zero();
    for &(i, j) in &pairs {
        let (xi, bi) = samples[i];
        let (xj, bj) = samples[j];
        let dist = (bi[0] - bj[0]).hypot(bi[1] - bj[1]);
        let same_x = xi == xj;
        if same_x && dist > T::zero() {
            let q = spectral_norm_of_difference(&hessians[i], &hessians[j]) / dist;
            hess_lipschitz_hat = hess_lipschitz_hat.max(q);
        }
    }
    Ok(BoundsReport {
        gamma_hat,
        lipschitz_hat,
        hess_lipschitz_hat,
        analytic: law.bounds(),
    })
}

/// Conservative bounds over a set of laws: smallest `gamma`, largest `L`.
pub fn combined_bounds<'a, T: Real>(
    laws: impl IntoIterator<Item = &'a SharedLaw<T>>,
) -> Option<Bounds<T>> {
    let mut out: Option<Bounds<T>> = None;
    for law in laws {
        let b = law.bounds()?;
        out = Some(match out {
            None => b,
            Some(o) => Bounds {
                gamma: o.gamma.min(b.gamma),
                lipschitz: o.lipschitz.max(b.lipschitz),
                hess_lipschitz: match (o.hess_lipschitz, b.hess_lipschitz) {
                    (Some(a), Some(c)) => Some(a.max(c)),
                    _ => None,
                },
            },
        });
    }
    out
}

/// Vacuum reluctivity `1 / mu0 = 10^7 / (4 pi)` in m/H.
pub fn vacuum_reluctivity<T: Real>() -> T {
    T::lit(1e7) / (T::lit(4.0) * T::PI())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_isotropic_example() {
        let law = LinearIsotropic::new(2.0).unwrap();
        let e = material_eval(&law, [0.0, 0.0], [3.0, 0.0]).unwrap();
        assert_eq!(e.energy, 9.0);
        assert_eq!(e.field, [6.0, 0.0]);
        assert_eq!(e.nu_d, [[2.0, 0.0], [0.0, 2.0]]);
    }

    #[test]
    fn permanent_magnet_example() {
        let law = PermanentMagnet::new(1.0, [0.0, 1.0]).unwrap();
        let e = law.eval([0.0, 0.0], [0.0, 0.0]);
        assert_eq!(e.energy, 0.0);
        assert_eq!(e.field, [0.0, -1.0]);
    }

    #[test]
    fn non_finite_rejected() {
        let law = LinearIsotropic::new(1.0).unwrap();
        assert!(material_eval(&law, [0.0, 0.0], [f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn anisotropic_bounds() {
        let law = AnisotropicLinear::new([[1.0f64, 0.0], [0.0, 4.0]]).unwrap();
        let r = certify_bounds(
            &law,
            &SampleSpec::Radial { s_max: 2.0, radii: 5, angles: 8, x: [0.0, 0.0] },
        )
        .unwrap();
        assert!((r.gamma_hat - 1.0).abs() < 1e-14 && (r.lipschitz_hat - 4.0).abs() < 1e-14);
        assert_eq!(r.hess_lipschitz_hat, 0.0);
        assert!(AnisotropicLinear::new([[1.0, 2.0], [2.0, 1.0]]).is_err());
    }

    #[test]
    fn linear_bounds_certified() {
        let law = LinearIsotropic::new(3.5).unwrap();
        let r = certify_bounds(&law, &SampleSpec::Cloud(vec![([0.0, 0.0], [1.0, 2.0])])).unwrap();
        assert_eq!((r.gamma_hat, r.lipschitz_hat, r.hess_lipschitz_hat), (3.5, 3.5, 0.0));
        assert!(certify_bounds(&law, &SampleSpec::Cloud(vec![])).is_err());
    }

    #[test]
    fn increments_match_naive_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let laws: Vec<SharedLaw<f64>> = vec![
            Arc::new(LinearIsotropic::new(3.0).unwrap()),
            Arc::new(PermanentMagnet::new(2.0, [0.3, -0.4]).unwrap()),
            Arc::new(AnisotropicLinear::new([[2.0, 0.5], [0.5, 1.0]]).unwrap()),
        ];
        for law in &laws {
            for _ in 0..50 {
                let b = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let x = [0.0, 0.0];
                let naive = law.energy(x, [b[0] + d[0], b[1] + d[1]]) - law.energy(x, b);
                assert!((law.energy_increment(x, b, d) - naive).abs() < 1e-12);
            }
        }
    }
}
