//! Elevation-channel control stack: fixed-time differentiator, compensation
//! signals, non-singular virtual law, control input and the modified
//! adaptive law for the disturbance bound.
//!
//! Signal flow at one instant:
//! envelope -> e1 -> UBF (z1, η1, η2) -> w1 -> α1 -> differentiator -> w2 -> ū.

use serde::{Deserialize, Serialize};

use crate::envelope::{Envelope, EnvelopeSample};
use crate::error::{Error, Result};
use crate::plant::{ChannelModel, Reference};
use crate::powmath::{pow_oo, radical_l7, sgn, sig, OddRational};
use crate::ubf::{self, UbfConfig, UbfOutput};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
    /// Fractional exponent, `1/2 < p < 1`.
    pub p: OddRational,
    /// Super-linear exponent, `q > 1`.
    pub q: OddRational,
    pub delta1: f64,
    pub delta2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub lam1: f64,
    pub lam2: f64,
    pub lam3: f64,
    pub k1f: f64,
    pub k2f: f64,
    pub mu_f: f64,
    /// Upper clamp of the adaptive estimate.
    pub omega_max: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            k11: 1.0,
            k12: 1.5,
            k21: 2.0,
            k22: 6.0,
            p: OddRational::new(3, 5).unwrap(),
            q: OddRational::new(5, 3).unwrap(),
            delta1: 0.1,
            delta2: 0.1,
            eps1: 0.1,
            eps2: 0.1,
            lam1: 1.0,
            lam2: 0.1,
            lam3: 0.1,
            k1f: 4.0,
            k2f: 8.0,
            mu_f: 1.0,
            omega_max: 1e3,
        }
    }
}

impl Gains {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gains.k11", self.k11),
            ("gains.k12", self.k12),
            ("gains.k21", self.k21),
            ("gains.k22", self.k22),
            ("gains.delta1", self.delta1),
            ("gains.delta2", self.delta2),
            ("gains.eps1", self.eps1),
            ("gains.eps2", self.eps2),
            ("gains.lam1", self.lam1),
            ("gains.lam2", self.lam2),
            ("gains.lam3", self.lam3),
            ("gains.k1f", self.k1f),
            ("gains.k2f", self.k2f),
            ("gains.mu_f", self.mu_f),
            ("gains.omega_max", self.omega_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        let p = self.p.value();
        if !(p > 0.5 && p < 1.0) {
            return Err(Error::invalid("gains.p", format!("{} must lie in (1/2, 1)", self.p)));
        }
        if self.q.value() <= 1.0 {
            return Err(Error::invalid("gains.q", format!("{} must exceed 1", self.q)));
        }
        Ok(())
    }
}

/// Differentiator, compensator and adaptive states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControllerState {
    pub x1f: f64,
    pub x2f: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub omega_hat: f64,
}

impl ControllerState {
    pub fn as_array(&self) -> [f64; 5] {
        [self.x1f, self.x2f, self.zeta1, self.zeta2, self.omega_hat]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        ControllerState { x1f: v[0], x2f: v[1], zeta1: v[2], zeta2: v[3], omega_hat: v[4] }
    }
}

/// Every signal the control law produces at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub x1d: f64,
    pub e1: f64,
    pub env: EnvelopeSample,
    pub ubf: UbfOutput,
    pub z1: f64,
    pub w1: f64,
    pub w2: f64,
    pub alpha1: f64,
    pub sigma_f: f64,
    pub x1f_dot: f64,
    pub u1bar: f64,
}

/// `α1 = ẋ1d - (η2 + k12 w1^q + k11 w1^(1+2p) R(|w1|^(2+2p))) / η1`, where `R`
/// is the Lemma-7 style radical. No negative power of `w1` appears, so the
/// law stays finite through `w1 = 0`.
pub fn virtual_law(w1: f64, ubf: &UbfOutput, x1d_dot: f64, g: &Gains) -> Result<f64> {
    if !(ubf.eta1 > 0.0) {
        return Err(Error::Invariant(format!("eta1 = {} must be positive", ubf.eta1)));
    }
    let p = g.p.value();
    let even = w1.abs().powf(2.0 + 2.0 * p);
    let smooth = g.k11 * pow_oo(w1, g.p.one_plus_twice()) * radical_l7(even, g.delta1, g.eps1);
    Ok(x1d_dot - (ubf.eta2 + g.k12 * pow_oo(w1, g.q) + smooth) / ubf.eta1)
}

/// The actual control input for a second-order channel.
///
/// The cross-coupling term is `-η1 z1 = -η1 (w1 + ζ1)`: the `w1` part cancels
/// the `η1 w1 w2` product arising from `ẇ1`, the `ζ1` part cancels the
/// `-η1 ζ1` injected through `ζ̇2`.
#[allow(clippy::too_many_arguments)]
pub fn control_law(
    z1: f64,
    w2: f64,
    angle: f64,
    omega_hat: f64,
    x1f_dot: f64,
    eta1: f64,
    g: &Gains,
    ch: &ChannelModel,
) -> f64 {
    let feedback = -g.k21 * pow_oo(w2, g.p) - g.k22 * pow_oo(w2, g.q);
    let adaptive = omega_hat * w2 * radical_l7(w2 * w2, g.delta2, g.eps2);
    (feedback - ch.drift(angle) + x1f_dot - eta1 * z1 - adaptive) / ch.input_gain
}

/// Fixed-time differentiator driven by `α1`; returns `(ẋ1f, ẋ2f)`.
pub fn differentiator_derivs(x1f: f64, x2f: f64, alpha1: f64, g: &Gains) -> (f64, f64) {
    let s = x1f - alpha1;
    let mu = g.mu_f;
    let phi1 = sig(s, 0.5) + mu * sig(s, 1.5);
    let phi2 = 0.5 * sgn(s) + 2.0 * mu * s + 1.5 * mu * mu * sig(s, 2.0);
    (-g.k1f * phi1 + x2f, -g.k2f * phi2)
}

/// Compensation signals absorbing the differentiator error; returns `(ζ̇1, ζ̇2)`.
pub fn compensator_derivs(zeta1: f64, zeta2: f64, eta1: f64, x1f: f64, alpha1: f64, g: &Gains) -> (f64, f64) {
    let z1dot = -g.k11 * pow_oo(zeta1, g.p) - g.k12 * pow_oo(zeta1, g.q) + eta1 * (x1f - alpha1) + eta1 * zeta2;
    let z2dot = -g.k21 * pow_oo(zeta2, g.p) - g.k22 * pow_oo(zeta2, g.q) - eta1 * zeta1;
    (z1dot, z2dot)
}

/// Rate of the disturbance-bound estimate.
pub fn adaptive_deriv(w2: f64, omega_hat: f64, g: &Gains) -> f64 {
    let surrogate = w2 * w2 * radical_l7(w2 * w2, g.delta2, g.eps2);
    g.lam1 * (surrogate - g.lam2 * omega_hat - g.lam3 * pow_oo(omega_hat, g.q))
}

/// One channel's controller: funnel, barrier transform, gains and model.
#[derive(Debug, Clone, Copy)]
pub struct ChannelController {
    pub envelope: Envelope,
    pub ubf: UbfConfig,
    pub gains: Gains,
    pub channel: ChannelModel,
    pub reference: Reference,
    /// Integrate the compensation signals (disabled for the plain comparator).
    pub compensate: bool,
}

/// Output signals plus the time derivative of the controller state.
#[derive(Debug, Clone, Copy)]
pub struct ChannelEval {
    pub out: ControlOutput,
    pub rates: ControllerState,
}

impl ChannelController {
    fn front_end(&self, t: f64, angle: f64, cs: &ControllerState) -> Result<(f64, f64, f64, EnvelopeSample, UbfOutput, f64, f64)> {
        let (x1d, x1d_dot, _) = self.reference.at(t);
        let e1 = angle - x1d;
        let env = self.envelope.sample(t);
        let u = ubf::transform(e1, &env, &self.ubf).map_err(|e| e.at_time(t))?;
        let w1 = u.z1 - cs.zeta1;
        let alpha1 = virtual_law(w1, &u, x1d_dot, &self.gains)?;
        Ok((x1d, x1d_dot, e1, env, u, w1, alpha1))
    }

    /// Controller state at `t = 0`: differentiator seated on `α1(0)`.
    pub fn initial_state(&self, angle: f64, omega_hat0: f64) -> Result<ControllerState> {
        let mut cs = ControllerState { omega_hat: omega_hat0, ..Default::default() };
        let (.., alpha1) = self.front_end(0.0, angle, &cs)?;
        cs.x1f = alpha1;
        Ok(cs)
    }

    /// Control signals at `(t, angle, rate, cs)`.
    pub fn step_outputs(&self, t: f64, angle: f64, rate: f64, cs: &ControllerState) -> Result<ControlOutput> {
        self.evaluate(t, angle, rate, cs).map(|e| e.out)
    }

    pub fn evaluate(&self, t: f64, angle: f64, rate: f64, cs: &ControllerState) -> Result<ChannelEval> {
        let g = &self.gains;
        let (x1d, _, e1, env, u, w1, alpha1) = self.front_end(t, angle, cs)?;
        let (x1f_dot, x2f_dot) = differentiator_derivs(cs.x1f, cs.x2f, alpha1, g);
        let w2 = rate - cs.x1f - cs.zeta2;
        let u1bar = control_law(u.z1, w2, angle, cs.omega_hat, x1f_dot, u.eta1, g, &self.channel);
        let (zeta1_dot, zeta2_dot) = if self.compensate {
            compensator_derivs(cs.zeta1, cs.zeta2, u.eta1, cs.x1f, alpha1, g)
        } else {
            (0.0, 0.0)
        };
        let omega_dot = adaptive_deriv(w2, cs.omega_hat, g);
        if !u1bar.is_finite() {
            return Err(Error::NonFinite { what: "control input", t });
        }
        Ok(ChannelEval {
            out: ControlOutput {
                x1d,
                e1,
                env,
                ubf: u,
                z1: u.z1,
                w1,
                w2,
                alpha1,
                sigma_f: cs.x1f - alpha1,
                x1f_dot,
                u1bar,
            },
            rates: ControllerState { x1f: x1f_dot, x2f: x2f_dot, zeta1: zeta1_dot, zeta2: zeta2_dot, omega_hat: omega_dot },
        })
    }
}
