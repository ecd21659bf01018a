//! Numeric kernel: sign-preserving powers, the gamma function and the
//! smooth surrogates of `|x|` used by the control laws.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A positive exponent `num/den` with both parts odd.
///
/// Odd/odd ratios are what make `x^(num/den)` real and sign-preserving for
/// negative `x`, so the type refuses anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddRational {
    num: u32,
    den: u32,
}

impl OddRational {
    pub const ONE: OddRational = OddRational { num: 1, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::invalid("odd rational", format!("{num}/{den} must be positive")));
        }
        if num.is_multiple_of(2) || den.is_multiple_of(2) {
            return Err(Error::invalid("odd rational", format!("{num}/{den} needs odd numerator and denominator")));
        }
        Ok(OddRational { num, den })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Filename-safe form: `1`, `1_7`.
    pub fn tag(self) -> String {
        if self.den == 1 {
            self.num.to_string()
        } else {
            format!("{}_{}", self.num, self.den)
        }
    }

    /// `1 + 2r`, which stays odd/odd.
    pub fn one_plus_twice(self) -> OddRational {
        OddRational { num: self.den + 2 * self.num, den: self.den }
    }
}

impl fmt::Display for OddRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for OddRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("odd rational", format!("cannot parse {s:?}; expected \"num/den\""));
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        OddRational::new(num, den)
    }
}

impl Serialize for OddRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OddRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `sgn(x) * |x|^r` with odd-ratio semantics. Non-finite input yields NaN.
#[inline]
pub fn pow_oo(x: f64, r: OddRational) -> f64 {
    sig(x, r.value())
}

/// `sgn(x) * |x|^r` for an arbitrary real exponent `r > 0`.
#[inline]
pub fn sig(x: f64, r: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    x.signum() * (r * x.abs().ln()).exp()
}

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)] // published coefficients, kept verbatim
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real `z > 0`.
///
/// Arguments below 1/2 are shifted up with `Γ(z) = Γ(z + 1) / z` instead of
/// the reflection formula, so the reflection identity stays an independent
/// check on this routine.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain { func: "gamma_fn", reason: format!("z = {z} must be finite and > 0") });
    }
    if z < 0.5 {
        return Ok(lanczos(z + 1.0) / z);
    }
    Ok(lanczos(z))
}

fn lanczos(z: f64) -> f64 {
    let x = z - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// `w² sqrt((w² + δ² + ε²) / ((w² + ε²)(w² + δ²)))`, a smooth under-approximation
/// of `|w|` whose deficit stays below `εδ / sqrt(ε² + δ²)`.
#[inline]
pub fn smooth_abs_l7(w: f64, delta: f64, eps: f64) -> f64 {
    let w2 = w * w;
    w2 * radical_l7(w2, delta, eps)
}

/// The radical of [`smooth_abs_l7`] taken at a precomputed even power `s = w²`.
#[inline]
pub(crate) fn radical_l7(s: f64, delta: f64, eps: f64) -> f64 {
    let d2 = delta * delta;
    let e2 = eps * eps;
    ((s + d2 + e2) / ((s + e2) * (s + d2))).sqrt()
}

/// `v² sqrt((v² + δ²) / (v⁴ + v²δ² + δ⁴))`; deficit below `0.2576 δ`.
pub fn smooth_abs_l8a(v: f64, delta_v: f64) -> f64 {
    let v2 = v * v;
    let d2 = delta_v * delta_v;
    if v2 == 0.0 {
        return 0.0;
    }
    v2 * ((v2 + d2) / (v2 * v2 + v2 * d2 + d2 * d2)).sqrt()
}

/// `(2/π) v arctan(v / δ)`; deficit below `(2/π) δ`.
pub fn smooth_abs_l8b(v: f64, delta_v: f64) -> f64 {
    2.0 / PI * v * (v / delta_v).atan()
}

/// Right-hand side of Young's inequality for products of powers.
pub fn young_rhs(psi1: f64, psi2: f64, gamma1: f64, gamma2: f64) -> f64 {
    let s = gamma1 + gamma2;
    gamma1 / s * psi1.abs().powf(s) + gamma2 / s * psi2.abs().powf(s)
}

/// The three members of the power-mean chain
/// `(Σ|χ|)^h ≤ Σ|χ|^h ≤ s^(1-h) (Σ|χ|)^h` for `0 < h ≤ 1`.
pub fn power_sum_chain(chi: &[f64], h: f64) -> (f64, f64, f64) {
    let total: f64 = chi.iter().map(|c| c.abs()).sum();
    let lower = total.powf(h);
    let middle: f64 = chi.iter().map(|c| c.abs().powf(h)).sum();
    let upper = (chi.len() as f64).powf(1.0 - h) * lower;
    (lower, middle, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn r(n: u32, d: u32) -> OddRational {
        OddRational::new(n, d).unwrap()
    }

    #[test]
    fn odd_rational_rejects_even_parts() {
        assert!(OddRational::new(2, 3).is_err());
        assert!(OddRational::new(3, 4).is_err());
        assert!(OddRational::new(0, 1).is_err());
        assert_eq!("5/3".parse::<OddRational>().unwrap(), r(5, 3));
        assert_eq!("7".parse::<OddRational>().unwrap(), r(7, 1));
        assert!("0.6".parse::<OddRational>().is_err());
        assert_eq!(r(3, 5).one_plus_twice(), r(11, 5));
    }

    #[test]
    fn pow_oo_examples() {
        assert_relative_eq!(pow_oo(-8.0, r(1, 3)), -2.0, epsilon = 1e-14);
        assert_eq!(pow_oo(0.0, r(3, 5)), 0.0);
        // oracle: positive-base powf, sign restored by hand
        assert_relative_eq!(pow_oo(-2.0, r(3, 5)), -(2f64.powf(0.6)), max_relative = 1e-14);
        assert_relative_eq!(pow_oo(-2.0, r(3, 5)), -1.515_716_566_510_398, max_relative = 1e-12);
        assert!(pow_oo(f64::NAN, r(1, 1)).is_nan());
        assert!(pow_oo(f64::INFINITY, r(1, 1)).is_nan());
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(1.5).unwrap(), 0.5 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(0.1).unwrap(), 9.513_507_698_668_732, max_relative = 1e-12);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn gamma_reflection_identity() {
        for i in 1..1000 {
            let l = i as f64 / 1000.0;
            let lhs = gamma_fn(l).unwrap() * gamma_fn(1.0 - l).unwrap();
            let rhs = PI / (l * PI).sin();
            assert!(((lhs - rhs) / rhs).abs() <= 1e-9, "l = {l}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn surrogate_examples() {
        assert_eq!(smooth_abs_l7(0.0, 0.1, 0.1), 0.0);
        assert_eq!(smooth_abs_l8a(0.0, 1.0), 0.0);
        assert_eq!(smooth_abs_l8b(0.0, 1.0), 0.0);
        assert_relative_eq!(smooth_abs_l7(1e6, 0.1, 0.1), 1e6, max_relative = 1e-3);
        assert_relative_eq!(smooth_abs_l8a(1e6, 1.0), 1e6, max_relative = 1e-3);
        assert!((smooth_abs_l8b(1e6, 1.0) - (1e6 - 2.0 / PI)).abs() < 1e-3);
    }

    #[test]
    fn young_examples() {
        assert_eq!(young_rhs(1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(young_rhs(2.0, 0.0, 1.0, 1.0), 2.0);
        let lhs = 1.3f64.powi(2) * 0.7f64.powi(3);
        assert_relative_eq!(lhs, 0.579_67, max_relative = 1e-12);
        assert!(lhs <= young_rhs(1.3, 0.7, 2.0, 3.0));
    }

    #[test]
    fn power_sum_chain_equal_entries_hit_upper_bound() {
        let (lo, mid, hi) = power_sum_chain(&[0.7, -0.7, 0.7], 0.4);
        assert!(lo <= mid);
        assert_relative_eq!(mid, hi, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn pow_oo_is_odd(x in -1e3f64..1e3, n in 0u32..6, d in 0u32..6) {
            let e = r(2 * n + 1, 2 * d + 1);
            prop_assert_eq!(pow_oo(-x, e), -pow_oo(x, e));
        }

        #[test]
        fn pow_oo_is_increasing(a in -1e3f64..1e3, b in -1e3f64..1e3, n in 0u32..6, d in 0u32..6) {
            let e = r(2 * n + 1, 2 * d + 1);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9 * (1.0 + hi.abs()));
            prop_assert!(pow_oo(lo, e) < pow_oo(hi, e));
        }

        #[test]
        fn surrogates_are_even(v in -1e4f64..1e4, delta in 1e-3f64..10.0, eps in 1e-3f64..10.0) {
            prop_assert_eq!(smooth_abs_l7(v, delta, eps), smooth_abs_l7(-v, delta, eps));
            prop_assert_eq!(smooth_abs_l8a(v, delta), smooth_abs_l8a(-v, delta));
            prop_assert_eq!(smooth_abs_l8b(v, delta), smooth_abs_l8b(-v, delta));
        }

        #[test]
        fn lemma7_sandwich(w in -1e3f64..1e3, delta in 1e-3f64..10.0, eps in 1e-3f64..10.0) {
            let gap = w.abs() - smooth_abs_l7(w, delta, eps);
            prop_assert!(gap >= -1e-12 * (1.0 + w.abs()));
            prop_assert!(gap < eps * delta / (eps * eps + delta * delta).sqrt());
        }
    }
}
