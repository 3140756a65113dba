//! Brauer iron law with a C^2 quadratic continuation above the threshold:
//!
//! ```text
//! w(s) = k1/(2 k2) exp(k2 s^2) + k3/2 s^2     s <= s*
//!        a0 + a1 s + nu0/2 s^2                 s >  s*
//! ```
//!
//! `s*` is where the differential reluctivity of the exponential branch
//! reaches `nu0`, so `w''` is bounded by `nu0` everywhere and the Hessian
//! spectrum lies in `[k1 + k3, nu0]`.

use super::{Bounds, MaterialLaw};
use crate::real::{dot, Mat2, Vec2};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrauerParams<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub nu0: T,
    pub s_star: T,
    pub a0: T,
    pub a1: T,
    // Branch values at s*, used to evaluate the upper branch in shifted form.
    w_star: T,
    dw_star: T,
}

impl<T: Real> BrauerParams<T> {
    /// Published iron coefficients `k1 = 3.8`, `k2 = 2.17`, `k3 = 396.2`
    /// with `nu0` the vacuum reluctivity.
    pub fn standard_iron() -> Self {
        Self::build(
            T::lit(3.8),
            T::lit(2.17),
            T::lit(396.2),
            super::vacuum_reluctivity(),
        )
        .expect("standard coefficients admit a threshold")
    }

    /// Solves `k1 exp(k2 s^2)(1 + 2 k2 s^2) + k3 = nu0` by bisection and
    /// fits `a0`, `a1` for C^2 continuity.
    pub fn build(k1: T, k2: T, k3: T, nu0: T) -> Result<Self> {
        if !(k1 > T::zero() && k2 > T::zero() && k3 > T::zero()) {
            return Err(Error::InvalidArgument(
                "Brauer coefficients k1, k2, k3 must be positive".into(),
            ));
        }
        if !(nu0 > k1 + k3) {
            return Err(Error::NoThreshold {
                nu0: nu0.to_f64_lossy(),
                bound: (k1 + k3).to_f64_lossy(),
            });
        }
        let g = |s: T| k1 * (k2 * s * s).exp() * (T::one() + T::lit(2.0) * k2 * s * s) + k3 - nu0;
        let (mut lo, mut hi) = (T::zero(), T::one());
        while g(hi) < T::zero() {
            lo = hi;
            hi = hi + hi;
            if !hi.is_finite() {
                return Err(Error::NoThreshold {
                    nu0: nu0.to_f64_lossy(),
                    bound: (k1 + k3).to_f64_lossy(),
                });
            }
        }
        // g is increasing; bisect until the bracket stops shrinking.
        loop {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = T::lit(0.5) * (lo + hi);
        let w_star = Self::lower_energy(k1, k2, k3, s);
        let dw_star = k1 * s * (k2 * s * s).exp() + k3 * s;
        let a1 = dw_star - nu0 * s;
        let a0 = w_star - a1 * s - T::lit(0.5) * nu0 * s * s;
        Ok(Self {
            k1,
            k2,
            k3,
            nu0,
            s_star: s,
            a0,
            a1,
            w_star,
            dw_star,
        })
    }

    fn lower_energy(k1: T, k2: T, k3: T, s: T) -> T {
        k1 / (T::lit(2.0) * k2) * (k2 * s * s).exp() + T::lit(0.5) * k3 * s * s
    }

    /// `w(s)`.
    pub fn radial_energy(&self, s: T) -> T {
        if s <= self.s_star {
            Self::lower_energy(self.k1, self.k2, self.k3, s)
        } else {
            let t = s - self.s_star;
            self.w_star + self.dw_star * t + T::lit(0.5) * self.nu0 * t * t
        }
    }

    /// `w'(s)`.
    pub fn radial_derivative(&self, s: T) -> T {
        if s <= self.s_star {
            self.k1 * s * (self.k2 * s * s).exp() + self.k3 * s
        } else {
            self.dw_star + self.nu0 * (s - self.s_star)
        }
    }

    /// Differential reluctivity `w''(s)`.
    pub fn differential(&self, s: T) -> T {
        if s <= self.s_star {
            let e = (self.k2 * s * s).exp();
            self.k1 * e * (T::one() + T::lit(2.0) * self.k2 * s * s) + self.k3
        } else {
            self.nu0
        }
    }

    /// Chord reluctivity `w'(s)/s`, with its limit `k1 + k3` at `s = 0`.
    pub fn chord(&self, s: T) -> T {
        if s <= self.s_star {
            self.k1 * (self.k2 * s * s).exp() + self.k3
        } else {
            (self.dw_star + self.nu0 * (s - self.s_star)) / s
        }
    }

    /// Relative mismatch of `(w, w', w'')` between the two branches at
    /// `s*`, using the `a0 + a1 s + nu0/2 s^2` form of the upper branch.
    pub fn c2_residuals(&self) -> [T; 3] {
        let s = self.s_star;
        let e = (self.k2 * s * s).exp();
        let lo = [
            Self::lower_energy(self.k1, self.k2, self.k3, s),
            self.k1 * s * e + self.k3 * s,
            self.k1 * e * (T::one() + T::lit(2.0) * self.k2 * s * s) + self.k3,
        ];
        let hi = [
            self.a0 + self.a1 * s + T::lit(0.5) * self.nu0 * s * s,
            self.a1 + self.nu0 * s,
            self.nu0,
        ];
        [0, 1, 2].map(|i| (lo[i] - hi[i]).abs() / lo[i].abs().max(hi[i].abs()))
    }

    /// `gamma = k1 + k3` (value at s = 0, where both `w''` and `w'/s` are
    /// smallest) and `L = nu0` (the cap on `w''`, which dominates `w'/s`).
    pub fn analytic_bounds(&self) -> Bounds<T> {
        Bounds {
            gamma: self.k1 + self.k3,
            lipschitz: self.nu0,
            hess_lipschitz: None,
        }
    }

    /// `w(s1) - w(s0)` given `q = s1^2 - s0^2` computed without cancellation.
    fn radial_increment(&self, s0: T, s1: T, q: T) -> T {
        let st = self.s_star;
        match (s0 <= st, s1 <= st) {
            (true, true) => self.lower_increment(s0, q),
            (false, false) => self.upper_increment(s0, s1, q),
            (true, false) => {
                self.lower_increment(s0, (st - s0) * (st + s0))
                    + self.upper_increment(st, s1, (s1 - st) * (s1 + st))
            }
            (false, true) => {
                self.upper_increment(s0, st, (st - s0) * (st + s0))
                    + self.lower_increment(st, (s1 - st) * (s1 + st))
            }
        }
    }

    fn lower_increment(&self, s0: T, q: T) -> T {
        let e0 = (self.k2 * s0 * s0).exp();
        self.k1 / (T::lit(2.0) * self.k2) * e0 * (self.k2 * q).exp_m1() + T::lit(0.5) * self.k3 * q
    }

    fn upper_increment(&self, s0: T, s1: T, q: T) -> T {
        let sum = s0 + s1;
        if sum == T::zero() {
            return T::zero();
        }
        let ds = q / sum;
        ds * (self.dw_star + T::lit(0.5) * self.nu0 * (sum - self.s_star - self.s_star))
    }
}

impl<T: Real> MaterialLaw<T> for BrauerParams<T> {
    fn energy(&self, _x: Vec2<T>, b: Vec2<T>) -> T {
        self.radial_energy(b[0].hypot(b[1]))
    }

    fn field(&self, _x: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
        let c = self.chord(b[0].hypot(b[1]));
        [c * b[0], c * b[1]]
    }

    /// `chord I + (w'' - chord) b b^T / |b|^2`; on the exponential branch
    /// the rank-one coefficient is `2 k1 k2 exp(k2 s^2)` times `b b^T`, so
    /// no division by `|b|` is needed near zero.
    fn differential_reluctivity(&self, _x: Vec2<T>, b: Vec2<T>) -> Mat2<T> {
        let s2 = dot(b, b);
        let s = s2.sqrt();
        let chord = self.chord(s);
        let rank_one = if s <= self.s_star {
            T::lit(2.0) * self.k1 * self.k2 * (self.k2 * s2).exp()
        } else {
            (self.nu0 - chord) / s2
        };
        [
            [chord + rank_one * b[0] * b[0], rank_one * b[0] * b[1]],
            [rank_one * b[1] * b[0], chord + rank_one * b[1] * b[1]],
        ]
    }

    fn energy_increment(&self, _x: Vec2<T>, b: Vec2<T>, d: Vec2<T>) -> T {
        let b1 = [b[0] + d[0], b[1] + d[1]];
        let s0 = b[0].hypot(b[1]);
        let s1 = b1[0].hypot(b1[1]);
        // |b+d|^2 - |b|^2 = (2b + d).d
        let q = (T::lit(2.0) * b[0] + d[0]) * d[0] + (T::lit(2.0) * b[1] + d[1]) * d[1];
        self.radial_increment(s0, s1, q)
    }

    fn bounds(&self) -> Option<Bounds<T>> {
        Some(self.analytic_bounds())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{certify_bounds, material_eval, SampleSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_near_published_value() {
        let p = BrauerParams::<f64>::standard_iron();
        // Independent oracle: bracket the root of the defining equation.
        let g = |s: f64| 3.8 * (2.17 * s * s).exp() * (1.0 + 4.34 * s * s) + 396.2 - p.nu0;
        assert!(g(p.s_star - 1e-9) < 0.0 && g(p.s_star + 1e-9) > 0.0);
        assert!((p.s_star - 2.06).abs() < 0.01, "s* = {}", p.s_star);
        assert!(p.c2_residuals().iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn larger_nu0_moves_threshold_up() {
        let a = BrauerParams::build(3.8, 2.17, 396.2, 5e5).unwrap();
        let b = BrauerParams::build(3.8, 2.17, 396.2, 8e5).unwrap();
        assert!(b.s_star > a.s_star);
    }

    #[test]
    fn no_threshold_error() {
        assert!(matches!(
            BrauerParams::build(3.8, 2.17, 396.2, 300.0),
            Err(Error::NoThreshold { .. })
        ));
    }

    #[test]
    fn zero_field_limits() {
        let p = BrauerParams::<f64>::standard_iron();
        let e = material_eval(&p, [0.0, 0.0], [0.0, 0.0]).unwrap();
        assert_eq!(e.field, [0.0, 0.0]);
        assert!((e.nu_d[0][0] - 400.0).abs() < 1e-12 && (e.nu_d[1][1] - 400.0).abs() < 1e-12);
        assert_eq!(e.nu_d[0][1], 0.0);
        assert!((e.energy - 3.8 / (2.0 * 2.17)).abs() < 1e-15);
    }

    #[test]
    fn truncation_and_monotone_differential() {
        let p = BrauerParams::<f64>::standard_iron();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let s = p.s_star * i as f64 / 1000.0;
            let d = p.differential(s);
            assert!(d >= prev && d <= p.nu0 * (1.0 + 1e-12));
            prev = d;
        }
        for s in [2.1, 3.0, 10.0] {
            assert_eq!(p.differential(s), p.nu0);
            assert!(p.chord(s) <= p.nu0 && p.chord(s) >= 400.0);
        }
    }

    #[test]
    fn eigenvalue_scan_confirms_bounds() {
        let p = BrauerParams::<f64>::standard_iron();
        let r = certify_bounds(
            &p,
            &SampleSpec::Radial { s_max: 2.0 * p.s_star, radii: 801, angles: 4, x: [0.0, 0.0] },
        )
        .unwrap();
        assert!((r.gamma_hat - 400.0).abs() < 1e-9);
        assert!((r.lipschitz_hat - p.nu0).abs() <= 1e-9 * p.nu0);
        assert!(r.hess_lipschitz_hat > 0.0 && r.hess_lipschitz_hat.is_finite());
    }

    fn fd_grad(p: &BrauerParams<f64>, b: [f64; 2]) -> [f64; 2] {
        let h = 1e-5 * (1.0 + b[0].hypot(b[1]));
        let w = |b: [f64; 2]| p.energy([0.0, 0.0], b);
        [
            (w([b[0] + h, b[1]]) - w([b[0] - h, b[1]])) / (2.0 * h),
            (w([b[0], b[1] + h]) - w([b[0], b[1] - h])) / (2.0 * h),
        ]
    }

    #[test]
    fn derivative_consistency() {
        let p = BrauerParams::<f64>::standard_iron();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let s: f64 = rng.gen_range(0.0..3.0);
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = [s * t.cos(), s * t.sin()];
            let h = p.field([0.0, 0.0], b);
            let g = fd_grad(&p, b);
            let hn = h[0].hypot(h[1]);
            assert!((h[0] - g[0]).abs() <= 1e-6 * (1.0 + hn) && (h[1] - g[1]).abs() <= 1e-6 * (1.0 + hn));
            // Hessian against central differences of the field
            let d2 = p.differential_reluctivity([0.0, 0.0], b);
            let step = 1e-5 * (1.0 + s);
            let n2 = d2[0][0].abs().max(d2[1][1].abs()).max(d2[0][1].abs());
            for j in 0..2 {
                let mut bp = b;
                let mut bm = b;
                bp[j] += step;
                bm[j] -= step;
                let (fp, fm) = (p.field([0.0, 0.0], bp), p.field([0.0, 0.0], bm));
                for i in 0..2 {
                    let fd = (fp[i] - fm[i]) / (2.0 * step);
                    // the kink of w''' at s* spoils central differences across it
                    if (s - p.s_star).abs() > 2.0 * step {
                        assert!((fd - d2[i][j]).abs() <= 1e-5 * (1.0 + n2), "s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn stable_increment_matches_naive() {
        let p = BrauerParams::<f64>::standard_iron();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let b = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let naive = p.energy([0.0, 0.0], [b[0] + d[0], b[1] + d[1]]) - p.energy([0.0, 0.0], b);
            let inc = p.energy_increment([0.0, 0.0], b, d);
            assert!((inc - naive).abs() <= 1e-10 * (1.0 + naive.abs()), "{inc} vs {naive}");
        }
        // tiny steps: the increment follows the linearization h.d
        let b = [1.2, -0.7];
        let d = [1e-11, 3e-12];
        let h = p.field([0.0, 0.0], b);
        let lin = h[0] * d[0] + h[1] * d[1];
        assert!((p.energy_increment([0.0, 0.0], b, d) - lin).abs() <= 1e-6 * lin.abs());
    }

    #[test]
    fn strong_monotonicity() {
        let p = BrauerParams::<f64>::standard_iron();
        let Bounds { gamma, lipschitz, .. } = p.analytic_bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let a = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let b = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let (ha, hb) = (p.field([0.0, 0.0], a), p.field([0.0, 0.0], b));
            let d = [a[0] - b[0], a[1] - b[1]];
            let pair = (ha[0] - hb[0]) * d[0] + (ha[1] - hb[1]) * d[1];
            let dd = d[0] * d[0] + d[1] * d[1];
            assert!(pair >= gamma * dd * (1.0 - 1e-12) && pair <= lipschitz * dd * (1.0 + 1e-12));
        }
    }
}
