//! Prescribed performance functions: the time-varying funnel `(K_l, K_u)`
//! that the tracking error has to stay inside.
//!
//! Every family starts at `(e1(0) - Δ, e1(0) + Δ̄)` and lands exactly on
//! `(-e∞, ē∞)` at the deadline `Ts`, with zero slope there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `((Ts - t)/Ts) exp(1 - Ts/(Ts - t))`
    Exp,
    /// `sech(a t/(Ts - t) + b) / sech(b)`
    Sech,
    /// `csch(a t/(Ts - t) + b) / csch(b)`
    Csch,
    /// `(coth(a t/(Ts - t) + b) - 1) / (coth(b) - 1)`
    Coth,
}

/// Parameters of a performance-function pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub family: Family,
    /// Deadline after which the funnel is constant (s).
    pub ts: f64,
    /// Initial clearance below `e1(0)` (rad).
    pub delta: f64,
    /// Initial clearance above `e1(0)` (rad).
    pub delta_bar: f64,
    /// Final lower half-width (rad).
    pub e_inf: f64,
    /// Final upper half-width (rad).
    pub e_inf_bar: f64,
    pub a_l: f64,
    pub b_l: f64,
    pub a_u: f64,
    pub b_u: f64,
    /// Initial tracking error. `None` means "derive from the initial state".
    #[serde(default)]
    pub e1_0: Option<f64>,
}

impl EnvelopeConfig {
    /// Exponential family with symmetric clearances.
    pub fn exp(ts: f64, delta: f64, e_inf: f64) -> Self {
        EnvelopeConfig {
            family: Family::Exp,
            ts,
            delta,
            delta_bar: delta,
            e_inf,
            e_inf_bar: e_inf,
            a_l: 1.0,
            b_l: 1.0,
            a_u: 1.0,
            b_u: 1.0,
            e1_0: None,
        }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }
}

/// `(K_l, K_u, K̇_l, K̇_u)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub k_l: f64,
    pub k_u: f64,
    pub k_l_dot: f64,
    pub k_u_dot: f64,
}

impl EnvelopeSample {
    pub fn width(&self) -> f64 {
        self.k_u - self.k_l
    }

    pub fn contains(&self, e1: f64) -> bool {
        self.k_l < e1 && e1 < self.k_u
    }
}

/// A validated performance-function pair with its initial error bound in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceFunction {
    cfg: EnvelopeConfig,
    e1_0: f64,
    /// Amplitudes `e1(0) - Δ + e∞` and `e1(0) + Δ̄ - ē∞`.
    amp_l: f64,
    amp_u: f64,
    /// `1 / c_{il}` and `1 / c_{iu}` for the hyperbolic families.
    inv_c_l: f64,
    inv_c_u: f64,
}

impl PerformanceFunction {
    pub fn new(cfg: EnvelopeConfig, e1_0: f64) -> Result<Self> {
        let positive = [
            ("envelope.ts", cfg.ts),
            ("envelope.delta", cfg.delta),
            ("envelope.delta_bar", cfg.delta_bar),
            ("envelope.e_inf", cfg.e_inf),
            ("envelope.e_inf_bar", cfg.e_inf_bar),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        if cfg.family != Family::Exp {
            let shape = [("envelope.a_l", cfg.a_l), ("envelope.b_l", cfg.b_l), ("envelope.a_u", cfg.a_u), ("envelope.b_u", cfg.b_u)];
            for (name, v) in shape {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
                }
            }
        }
        if cfg.e_inf >= cfg.delta {
            return Err(Error::invalid("envelope.e_inf", format!("e_inf = {} must be < delta = {}", cfg.e_inf, cfg.delta)));
        }
        if cfg.e_inf_bar >= cfg.delta_bar {
            return Err(Error::invalid(
                "envelope.e_inf_bar",
                format!("e_inf_bar = {} must be < delta_bar = {}", cfg.e_inf_bar, cfg.delta_bar),
            ));
        }
        if !e1_0.is_finite() {
            return Err(Error::invalid("envelope.e1_0", "initial error must be finite"));
        }
        let (inv_c_l, inv_c_u) = match cfg.family {
            Family::Exp => (1.0, 1.0),
            f => (1.0 / shape_fn(f, cfg.b_l), 1.0 / shape_fn(f, cfg.b_u)),
        };
        let pf = PerformanceFunction {
            cfg,
            e1_0,
            amp_l: e1_0 - cfg.delta + cfg.e_inf,
            amp_u: e1_0 + cfg.delta_bar - cfg.e_inf_bar,
            inv_c_l,
            inv_c_u,
        };
        // Unequal shape parameters can make the bounds cross; reject those.
        const GRID: usize = 4000;
        for i in 0..=GRID {
            let t = cfg.ts * i as f64 / GRID as f64;
            let s = pf.sample(t);
            if !(s.k_l < s.k_u) {
                return Err(Error::invalid("envelope", format!("bounds cross at t = {t}: K_l = {}, K_u = {}", s.k_l, s.k_u)));
            }
        }
        Ok(pf)
    }

    pub fn config(&self) -> &EnvelopeConfig {
        &self.cfg
    }

    pub fn e1_0(&self) -> f64 {
        self.e1_0
    }

    pub fn sample(&self, t: f64) -> EnvelopeSample {
        let c = &self.cfg;
        if t >= c.ts {
            return EnvelopeSample { k_l: -c.e_inf, k_u: c.e_inf_bar, k_l_dot: 0.0, k_u_dot: 0.0 };
        }
        let t = t.max(0.0);
        let (g_l, gd_l, g_u, gd_u) = match c.family {
            Family::Exp => {
                let (g, gd) = exp_profile(t, c.ts);
                (g, gd, g, gd)
            }
            f => {
                let (g_l, gd_l) = hyperbolic_profile(f, t, c.ts, c.a_l, c.b_l);
                let (g_u, gd_u) = hyperbolic_profile(f, t, c.ts, c.a_u, c.b_u);
                (g_l * self.inv_c_l, gd_l * self.inv_c_l, g_u * self.inv_c_u, gd_u * self.inv_c_u)
            }
        };
        EnvelopeSample {
            k_l: self.amp_l * g_l - c.e_inf,
            k_u: self.amp_u * g_u + c.e_inf_bar,
            k_l_dot: self.amp_l * gd_l,
            k_u_dot: self.amp_u * gd_u,
        }
    }
}

/// The funnel a controller works against: prescribed, or a fixed band used
/// by the "no performance function" comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Prescribed(PerformanceFunction),
    Fixed { lower: f64, upper: f64 },
}

impl Envelope {
    pub fn sample(&self, t: f64) -> EnvelopeSample {
        match self {
            Envelope::Prescribed(pf) => pf.sample(t),
            Envelope::Fixed { lower, upper } => EnvelopeSample { k_l: *lower, k_u: *upper, k_l_dot: 0.0, k_u_dot: 0.0 },
        }
    }
}

/// Validate `cfg` and sample it at `t` in one go.
pub fn sample(t: f64, cfg: &EnvelopeConfig) -> Result<EnvelopeSample> {
    let e1_0 = cfg.e1_0.ok_or_else(|| Error::invalid("envelope.e1_0", "initial error not set"))?;
    Ok(PerformanceFunction::new(*cfg, e1_0)?.sample(t))
}

/// Normalized exponential profile and its time derivative.
fn exp_profile(t: f64, ts: f64) -> (f64, f64) {
    let r = ts - t;
    let e = (1.0 - ts / r).exp();
    (r / ts * e, -e * (1.0 / ts + 1.0 / r))
}

/// `h(θ)` for the hyperbolic families, written to stay finite for large θ.
fn shape_fn(family: Family, theta: f64) -> f64 {
    let q = (-theta).exp();
    match family {
        Family::Sech => 2.0 * q / (1.0 + q * q),
        Family::Csch => 2.0 * q / -(-2.0 * theta).exp_m1(),
        Family::Coth => 2.0 / (2.0 * theta).exp_m1(),
        Family::Exp => unreachable!("exp family has no hyperbolic shape"),
    }
}

/// `dh/dθ` for the hyperbolic families.
fn shape_deriv(family: Family, theta: f64) -> f64 {
    match family {
        // -sech θ tanh θ
        Family::Sech => -shape_fn(Family::Sech, theta) * theta.tanh(),
        // -csch θ coth θ = -csch θ (1 + (coth θ - 1))
        Family::Csch => -shape_fn(Family::Csch, theta) * (1.0 + shape_fn(Family::Coth, theta)),
        // -csch² θ
        Family::Coth => {
            let c = shape_fn(Family::Csch, theta);
            -c * c
        }
        Family::Exp => unreachable!("exp family has no hyperbolic shape"),
    }
}

fn hyperbolic_profile(family: Family, t: f64, ts: f64, a: f64, b: f64) -> (f64, f64) {
    let r = ts - t;
    let theta = a * t / r + b;
    let theta_dot = a * ts / (r * r);
    let h = shape_fn(family, theta);
    let dh = shape_deriv(family, theta);
    // dh -> 0 faster than theta_dot grows; guard 0 * inf near the deadline.
    let hd = if dh == 0.0 { 0.0 } else { dh * theta_dot };
    (h, hd)
}
