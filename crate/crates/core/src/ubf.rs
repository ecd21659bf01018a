//! Unified barrier functions mapping the constrained error `e1` to an
//! unconstrained `z1`, together with `η1 = ∂z1/∂e1` and the explicit time
//! partial `η2 = ∂z1/∂K_l K̇_l + ∂z1/∂K_u K̇_u`, so that `ż1 = η1 ė1 + η2`.
//!
//! With `A = K_l - e1 < 0` and `B = K_u - e1 > 0`, odd-ratio powers give
//! `d/dA [c / A^m] = -c m |A|^(-m-1)`, which is where every Jacobian below
//! comes from.

use serde::{Deserialize, Serialize};

use crate::envelope::EnvelopeSample;
use crate::error::{Error, Result};
use crate::powmath::{pow_oo, OddRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UbfVariant {
    /// `z1 = c1/A^m + c2/B^n`
    Barrier,
    /// `z1 = (A^m e1 + c1)/(2A^m) + (B^n e1 + c2)/(2B^n)`; reduces to `e1` when `c1 = c2 = 0`.
    Unified,
    /// Log-ratio transform `½ ln((e1 - K_l)/(K_u - e1))`, used as the classical comparator.
    LogRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UbfConfig {
    pub variant: UbfVariant,
    pub c1: f64,
    pub c2: f64,
    pub m: OddRational,
    pub n: OddRational,
}

impl UbfConfig {
    pub fn barrier(c: f64, m: OddRational) -> Self {
        UbfConfig { variant: UbfVariant::Barrier, c1: c, c2: c, m, n: m }
    }

    pub fn unified(c: f64, m: OddRational) -> Self {
        UbfConfig { variant: UbfVariant::Unified, c1: c, c2: c, m, n: m }
    }

    pub fn log_ratio() -> Self {
        UbfConfig { variant: UbfVariant::LogRatio, c1: 0.0, c2: 0.0, m: OddRational::ONE, n: OddRational::ONE }
    }

    /// The unconstrained identity map `z1 = e1`.
    pub fn identity() -> Self {
        UbfConfig::unified(0.0, OddRational::ONE)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("ubf.c1", self.c1), ("ubf.c2", self.c2)] {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::invalid(name, format!("{c} must be finite and >= 0")));
            }
        }
        if self.variant == UbfVariant::Barrier && !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::invalid("ubf.c1", "barrier variant needs c1 > 0 and c2 > 0"));
        }
        Ok(())
    }

    /// True when the transform has no barrier at all.
    pub fn is_unconstrained(&self) -> bool {
        self.variant == UbfVariant::Unified && self.c1 == 0.0 && self.c2 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UbfOutput {
    pub z1: f64,
    pub eta1: f64,
    pub eta2: f64,
}

/// Relative distance to either bound below which the point counts as outside.
pub const BOUNDARY_GUARD: f64 = 1e-12;

pub fn transform(e1: f64, env: &EnvelopeSample, cfg: &UbfConfig) -> Result<UbfOutput> {
    let violation = || Error::EnvelopeViolation { t: f64::NAN, e1, k_l: env.k_l, k_u: env.k_u };
    if cfg.is_unconstrained() {
        if !e1.is_finite() {
            return Err(violation());
        }
        return Ok(UbfOutput { z1: e1, eta1: 1.0, eta2: 0.0 });
    }
    let guard = BOUNDARY_GUARD * env.width();
    let a = env.k_l - e1;
    let b = env.k_u - e1;
    if !(a < -guard && b > guard) {
        return Err(violation());
    }
    let out = match cfg.variant {
        UbfVariant::Barrier | UbfVariant::Unified => {
            let (m, n) = (cfg.m.value(), cfg.n.value());
            let pa = pow_oo(a, cfg.m);
            let pb = pow_oo(b, cfg.n);
            // c m |A|^(-m-1) = c m |A|^(-m) / |A|
            let ja = cfg.c1 * m / (pa.abs() * a.abs());
            let jb = cfg.c2 * n / (pb.abs() * b.abs());
            let (z1, scale, base) = match cfg.variant {
                UbfVariant::Barrier => (cfg.c1 / pa + cfg.c2 / pb, 1.0, 0.0),
                _ => (e1 + 0.5 * cfg.c1 / pa + 0.5 * cfg.c2 / pb, 0.5, 1.0),
            };
            UbfOutput {
                z1,
                eta1: base + scale * (ja + jb),
                eta2: -scale * (ja * env.k_l_dot + jb * env.k_u_dot),
            }
        }
        UbfVariant::LogRatio => {
            let lo = -a; // e1 - K_l
            UbfOutput {
                z1: 0.5 * (lo / b).ln(),
                eta1: 0.5 * (1.0 / lo + 1.0 / b),
                eta2: -0.5 * (env.k_l_dot / lo + env.k_u_dot / b),
            }
        }
    };
    if !(out.z1.is_finite() && out.eta1.is_finite() && out.eta2.is_finite()) {
        return Err(violation());
    }
    Ok(out)
}
