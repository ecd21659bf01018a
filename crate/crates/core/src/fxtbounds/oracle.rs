//! Brute-force settling time of `V̇ = -μ1 V^p - μ2 V^q + μ3`.
//!
//! The ODE is integrated in `u = ln V` with step-doubling RK4. In log
//! coordinates the huge rates at `V = 10⁶` and near `V = 0` become smooth
//! exponentials, so the step controller can follow both ends. The first
//! crossing of the target level is located by bisecting the last step.

use super::{residual_bound, BoundProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Give up after this much simulated time (s).
    pub horizon: f64,
    /// Local error tolerance on `ln V` per step.
    pub tol: f64,
    /// Level counted as "settled" when `μ3 = 0`.
    pub zero_level: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { horizon: 1e5, tol: 1e-12, zero_level: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settled {
    /// First time `V` reaches the target level (s).
    pub t_settle: f64,
    /// `V` at that time.
    pub v_final: f64,
}

pub fn settle_oracle(bp: &BoundProblem, v0: f64) -> Result<Settled> {
    settle_oracle_with(bp, v0, &OracleOptions::default())
}

pub fn settle_oracle_with(bp: &BoundProblem, v0: f64, opts: &OracleOptions) -> Result<Settled> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::Domain { func: "settle_oracle", reason: format!("v0 = {v0} must be finite and > 0") });
    }
    let level = if bp.mu3 == 0.0 { opts.zero_level } else { residual_bound(bp)? };
    if v0 <= level {
        return Ok(Settled { t_settle: 0.0, v_final: v0 });
    }
    let target = level.ln();
    let rhs = |u: f64| -bp.mu1 * ((bp.p - 1.0) * u).exp() - bp.mu2 * ((bp.q - 1.0) * u).exp() + bp.mu3 * (-u).exp();
    let rk4 = |u: f64, h: f64| {
        let k1 = rhs(u);
        let k2 = rhs(u + 0.5 * h * k1);
        let k3 = rhs(u + 0.5 * h * k2);
        let k4 = rhs(u + h * k3);
        u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    // Two half steps: the accepted method, also used while bisecting.
    let advance = |u: f64, h: f64| rk4(rk4(u, 0.5 * h), 0.5 * h);

    let mut t = 0.0;
    let mut u = v0.ln();
    let mut h = (1e-3 / rhs(u).abs()).min(1e-3);
    while t < opts.horizon {
        let coarse = rk4(u, h);
        let fine = advance(u, h);
        let err = (fine - coarse).abs() / 15.0;
        if !fine.is_finite() || err > opts.tol {
            let shrink = if err.is_finite() && err > 0.0 { 0.9 * (opts.tol / err).powf(0.2) } else { 0.25 };
            h *= shrink.clamp(0.1, 0.9);
            if h < 1e-300 {
                return Err(Error::Invariant(format!("oracle step underflow at t = {t}, V = {:e}", u.exp())));
            }
            continue;
        }
        if fine <= target {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if advance(u, mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * (t + hi).max(1.0) {
                    break;
                }
            }
            return Ok(Settled { t_settle: t + hi, v_final: advance(u, hi).exp() });
        }
        t += h;
        u = fine;
        let grow = if err > 0.0 { 0.9 * (opts.tol / err).powf(0.2) } else { 4.0 };
        h *= grow.clamp(0.2, 4.0);
    }
    Err(Error::HorizonExceeded { horizon: opts.horizon, v: u.exp() })
}
