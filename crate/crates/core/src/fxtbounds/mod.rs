//! Settling-time estimates for practical fixed-time stability, i.e. for
//! Lyapunov functions obeying `V̇ ≤ -μ1 V^p - μ2 V^q + μ3` with
//! `0 < p < 1 < q`.
//!
//! All bounds split one decay term with a factor `τ ∈ (0, 1)`: the `τ` part
//! drives convergence, the `1 - τ` part dominates `μ3` outside the residual
//! set. They are upper bounds on the time to reach that set from any `V(0)`.

mod oracle;
pub mod quad;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powmath::gamma_fn;

pub use oracle::{settle_oracle, settle_oracle_with, OracleOptions, Settled};

/// A positive fraction `num/den` of integers (parity unrestricted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::invalid("fraction", format!("{num}/{den} must be positive")));
        }
        Ok(Fraction { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("fraction", format!("cannot parse {s:?}; expected \"num/den\""));
        match s.trim().split_once('/') {
            Some((n, d)) => Fraction::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => Fraction::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

/// `(μ1, μ2, μ3, p, q, τ)` of a comparison inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundProblem {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub p: f64,
    pub q: f64,
    pub tau: f64,
    /// Exact `p = p2/p1`, `q = q2/q1`, needed by the rational-exponent bound.
    #[serde(skip)]
    pub exact: Option<(Fraction, Fraction)>,
}

impl BoundProblem {
    pub fn new(mu1: f64, mu2: f64, mu3: f64, p: f64, q: f64, tau: f64) -> Result<Self> {
        let bp = BoundProblem { mu1, mu2, mu3, p, q, tau, exact: None };
        bp.validate()?;
        Ok(bp)
    }

    pub fn with_fractions(mu1: f64, mu2: f64, mu3: f64, p: Fraction, q: Fraction, tau: f64) -> Result<Self> {
        let bp = BoundProblem { mu1, mu2, mu3, p: p.value(), q: q.value(), tau, exact: Some((p, q)) };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        if !(self.mu3.is_finite() && self.mu3 >= 0.0) {
            return Err(Error::invalid("mu3", format!("{} must be finite and >= 0", self.mu3)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid("p", format!("{} must lie in (0, 1)", self.p)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::invalid("q", format!("{} must be finite and > 1", self.q)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Domain { func: "bound", reason: format!("tau = {} must lie in (0, 1)", self.tau) });
        }
        Ok(())
    }

    /// `l = (1 - p)/(q - p)`.
    pub fn l(&self) -> f64 {
        (1.0 - self.p) / (self.q - self.p)
    }

    /// The integer `a ≥ 2` with `(a - 1)p + q = a`, if there is one.
    pub fn lemma3_order(&self) -> Option<u32> {
        let a = (self.q - self.p) / (1.0 - self.p);
        let r = a.round();
        if (2.0..1e6).contains(&r) && ((r - 1.0) * self.p + self.q - r).abs() <= 1e-9 {
            Some(r as u32)
        } else {
            None
        }
    }
}

/// Radius (in `V`) of the residual set.
pub fn residual_bound(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    if bp.mu3 == 0.0 {
        return Ok(0.0);
    }
    let r1 = (bp.mu3 / ((1.0 - bp.tau) * bp.mu1)).powf(1.0 / bp.p);
    let r2 = (bp.mu3 / ((1.0 - bp.tau) * bp.mu2)).powf(1.0 / bp.q);
    Ok(r1.min(r2))
}

/// Gamma-function settling bound.
pub fn t1_bound(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    let (p, q, tau) = (bp.p, bp.q, bp.tau);
    let l = bp.l();
    let g = gamma_fn(l)? * gamma_fn((q - 1.0) / (q - p))?;
    let a = g / (bp.mu1 * (q - p)) * (bp.mu1 / (tau * bp.mu2)).powf(l);
    let b = g / (tau * bp.mu1 * (q - p)) * (tau * bp.mu1 / bp.mu2).powf(l);
    Ok(a.max(b))
}

/// The same bound after `Γ(l)Γ(1 - l) = π / sin(lπ)`.
pub fn t1_bound_reflected(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    let (p, q, tau) = (bp.p, bp.q, bp.tau);
    let l = bp.l();
    let c = PI / (l * PI).sin();
    let a = c / (bp.mu1 * (q - p)) * (bp.mu1 / (tau * bp.mu2)).powf(l);
    let b = c / (tau * bp.mu1 * (q - p)) * (tau * bp.mu1 / bp.mu2).powf(l);
    Ok(a.max(b))
}

/// Classical bound `1/(τμ1(1-p)) + 1/(τμ2(q-1))`.
pub fn t2_classical(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    Ok(1.0 / (bp.tau * bp.mu1 * (1.0 - bp.p)) + 1.0 / (bp.tau * bp.mu2 * (bp.q - 1.0)))
}

/// Arctangent bound for `p + q = 2`.
pub fn t_lemma2(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    if (bp.p + bp.q - 2.0).abs() > 1e-9 {
        return Err(Error::Precondition { bound: "arctan bound", reason: format!("p + q = {} != 2", bp.p + bp.q) });
    }
    let (p, tau) = (bp.p, bp.tau);
    let t_bar = 1.0 / ((1.0 - p) * (tau * bp.mu1 * bp.mu2).sqrt());
    let x1 = (bp.mu2 / (tau * bp.mu1)).sqrt() * (bp.mu3 / ((1.0 - tau) * bp.mu1)).powf((1.0 - p) / p);
    let x2 = (tau * bp.mu2 / bp.mu1).sqrt() * (bp.mu3 / ((1.0 - tau) * bp.mu2)).powf((1.0 - p) / (2.0 - p));
    Ok(t_bar * (PI / 2.0 - x1.atan()).max(PI / 2.0 - x2.atan()))
}

/// Antiderivative of `1/(1 + x^a)` from partial fractions over the roots of `-1`.
pub fn i_a(x: f64, a: u32) -> Result<f64> {
    if a < 2 {
        return Err(Error::Domain { func: "i_a", reason: format!("a = {a} must be >= 2") });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain { func: "i_a", reason: format!("x = {x} must be >= 0") });
    }
    let af = a as f64;
    let k_t = (a % 2) as f64;
    let mut acc = k_t / af * x.ln_1p();
    for k in 1..=a / 2 {
        let phi = PI / af * (2 * k - 1) as f64;
        let (s, c) = phi.sin_cos();
        acc += 2.0 / af * s * ((x - c) / s).atan();
        acc -= 1.0 / af * c * (x * x - 2.0 * x * c + 1.0).ln();
    }
    Ok(acc)
}

/// `∫_0^∞ dx/(1 + x^a) = π/(a sin(π/a))`.
pub fn i_a_total(a: u32) -> f64 {
    let af = a as f64;
    PI / (af * (PI / af).sin())
}

/// Bound for `(a - 1)p + q = a` with integer `a ≥ 2`.
pub fn t_lemma3(bp: &BoundProblem, a: u32) -> Result<f64> {
    bp.validate()?;
    if a < 2 {
        return Err(Error::Precondition { bound: "partial-fraction bound", reason: format!("a = {a} must be >= 2") });
    }
    let af = a as f64;
    if ((af - 1.0) * bp.p + bp.q - af).abs() > 1e-9 {
        return Err(Error::Precondition {
            bound: "partial-fraction bound",
            reason: format!("(a-1)p + q = {} != a = {a}", (af - 1.0) * bp.p + bp.q),
        });
    }
    let (p, q, tau) = (bp.p, bp.q, bp.tau);
    let total = i_a_total(a);
    let i0 = i_a(0.0, a)?;
    let t3_bar = 1.0 / ((1.0 - p) * tau * bp.mu1) * (tau * bp.mu1 / bp.mu2).powf(1.0 / af);
    let t4_bar = 1.0 / ((1.0 - p) * bp.mu1) * (bp.mu1 / (tau * bp.mu2)).powf(1.0 / af);
    let x3 = (bp.mu2 / (tau * bp.mu1)).powf(1.0 / af) * (bp.mu3 / ((1.0 - tau) * bp.mu1)).powf((1.0 - p) / p);
    let x4 = (tau * bp.mu2 / bp.mu1).powf(1.0 / af) * (bp.mu3 / ((1.0 - tau) * bp.mu2)).powf((1.0 - p) / q);
    let t3 = t3_bar * (total - i_a(x3, a)? + i0);
    let t4 = t4_bar * (total - i_a(x4, a)? + i0);
    Ok(t3.max(t4))
}

fn exact_exponents(bp: &BoundProblem) -> Result<(Fraction, Fraction)> {
    bp.exact.ok_or_else(|| Error::Precondition {
        bound: "rational-exponent bound",
        reason: "p and q must be given as integer fractions".into(),
    })
}

/// `p1 q1 x^(p1 q1 - 1) / (μ1 x^(p2 q1) + μ2 x^(p1 q2))` written as
/// `p1 q1 / (μ1 x^(1 - p1q1 + p2q1) + μ2 x^(1 - p1q1 + p1q2))` to keep
/// integer exponents small.
pub fn i_ef_integrand(x: f64, bp: &BoundProblem) -> Result<f64> {
    let (p, q) = exact_exponents(bp)?;
    let n = (p.den * q.den) as i32;
    let e1 = (p.num * q.den) as i32 - n + 1;
    let e2 = (p.den * q.num) as i32 - n + 1;
    Ok(n as f64 / (bp.mu1 * x.powi(e1) + bp.mu2 * x.powi(e2)))
}

/// Antiderivative of [`i_ef_integrand`], normalized so that `i_ef(1) = 0`.
pub fn i_ef(x: f64, bp: &BoundProblem) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain { func: "i_ef", reason: format!("x = {x} must be finite and >= 0") });
    }
    exact_exponents(bp)?;
    quad::integrate(|s| i_ef_integrand(s, bp).unwrap_or(f64::NAN), 1.0, x, 1e-15, 1e-14)
}

/// Bound for rational `p = p2/p1`, `q = q2/q1`.
pub fn t_lemma4(bp: &BoundProblem) -> Result<f64> {
    bp.validate()?;
    let (pf, qf) = exact_exponents(bp)?;
    let (p, q, tau) = (bp.p, bp.q, bp.tau);
    let l = bp.l();
    let c_t = PI / (l * PI).sin();
    let x5 = (bp.mu3 / ((1.0 - tau) * bp.mu1)).powf(1.0 / (pf.num * qf.den) as f64);
    let x6 = (bp.mu3 / ((1.0 - tau) * bp.mu2)).powf(1.0 / (pf.den * qf.num) as f64);
    let i0 = i_ef(0.0, bp)?;
    let t5 = c_t / (tau * bp.mu1 * (q - p)) * (tau * bp.mu1 / bp.mu2).powf(l) - i_ef(x5, bp)? + i0;
    let t6 = c_t / (bp.mu1 * (q - p)) * (bp.mu1 / (tau * bp.mu2)).powf(l) - i_ef(x6, bp)? + i0;
    Ok(t5.max(t6))
}
