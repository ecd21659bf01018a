//! 3-DOF helicopter dynamics, reference command and disturbance signals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the rig.
///
/// The defaults are a desk-scale set, not measured data; every value can be
/// overridden from the scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    /// Arm length from pivot to rotor hub (m).
    pub l_a: f64,
    /// Elevation inertia (kg m²).
    pub j_alpha: f64,
    /// Effective mass (kg).
    pub m_e: f64,
    /// Gravity (m/s²).
    pub g: f64,
    /// Pitch arm (m).
    pub l_h: f64,
    /// Pitch inertia (kg m²).
    pub j_beta: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams { l_a: 0.66, j_alpha: 1.0, m_e: 0.094, g: 9.81, l_h: 0.177, j_beta: 0.044 }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("plant.l_a", self.l_a),
            ("plant.j_alpha", self.j_alpha),
            ("plant.m_e", self.m_e),
            ("plant.g", self.g),
            ("plant.l_h", self.l_h),
            ("plant.j_beta", self.j_beta),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    /// Second-order channel seen by the elevation controller.
    pub fn elevation_channel(&self) -> ChannelModel {
        ChannelModel {
            input_gain: self.l_a / self.j_alpha,
            gravity_coef: self.g / self.j_alpha * self.m_e * self.l_a,
        }
    }

    /// Second-order channel seen by a pitch controller (no gravity term).
    pub fn pitch_channel(&self) -> ChannelModel {
        ChannelModel { input_gain: self.l_h / self.j_beta, gravity_coef: 0.0 }
    }
}

/// `ÿ = input_gain * u - gravity_coef * cos(y) + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub input_gain: f64,
    pub gravity_coef: f64,
}

impl ChannelModel {
    /// The state-dependent drift `-gravity_coef * cos(y)`.
    #[inline]
    pub fn drift(&self, angle: f64) -> f64 {
        -self.gravity_coef * angle.cos()
    }
}

/// Elevation angle/rate and pitch angle/rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeliState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl HeliState {
    pub fn as_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Right-hand side of the helicopter model.
pub fn derivs(s: &HeliState, u1bar: f64, u2bar: f64, d1: f64, d2: f64, p: &PlantParams) -> Result<HeliState> {
    if !(s.is_finite() && u1bar.is_finite() && u2bar.is_finite() && d1.is_finite() && d2.is_finite()) {
        return Err(Error::NonFinite { what: "plant input", t: f64::NAN });
    }
    let elev = p.elevation_channel();
    let pitch = p.pitch_channel();
    Ok(HeliState {
        x1: s.x2,
        x2: elev.input_gain * u1bar + elev.drift(s.x1) + d1,
        x3: s.x4,
        x4: pitch.input_gain * u2bar + d2,
    })
}

/// `offset + amplitude * sin(omega t + phase)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub offset: f64,
}

impl Reference {
    /// The elevation command of the published scenarios:
    /// `(π/18) sin(0.3πt − π/2)`.
    pub fn elevation_default() -> Self {
        Reference { amplitude: PI / 18.0, omega: 0.3 * PI, phase: -PI / 2.0, offset: 0.0 }
    }

    pub fn zero() -> Self {
        Reference { amplitude: 0.0, omega: 0.0, phase: 0.0, offset: 0.0 }
    }

    /// `(y_d, ẏ_d, ÿ_d)` at time `t`.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let arg = self.omega * t + self.phase;
        let (s, c) = arg.sin_cos();
        (
            self.offset + self.amplitude * s,
            self.amplitude * self.omega * c,
            -self.amplitude * self.omega * self.omega * s,
        )
    }
}

impl Default for Reference {
    fn default() -> Self {
        Reference::elevation_default()
    }
}

/// Elevation reference `x1d(t)` with derivatives.
pub fn reference(t: f64) -> (f64, f64, f64) {
    Reference::elevation_default().at(t)
}

/// Sinusoidal disturbance with a declared upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub bound: f64,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        DisturbanceSpec { amplitude: 0.0, frequency: 0.0, phase: 0.0, bound: f64::MIN_POSITIVE }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.bound > 0.0) || !self.bound.is_finite() {
            return Err(Error::invalid(name, format!("bound {} must be finite and > 0", self.bound)));
        }
        if self.amplitude.abs() > self.bound {
            return Err(Error::invalid(name, format!("|amplitude| {} exceeds bound {}", self.amplitude, self.bound)));
        }
        if !(self.frequency.is_finite() && self.phase.is_finite()) {
            return Err(Error::invalid(name, "frequency and phase must be finite"));
        }
        Ok(())
    }
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        DisturbanceSpec { amplitude: 0.3, frequency: 2.0, phase: 0.0, bound: 0.3 }
    }
}

pub fn disturbance(t: f64, spec: &DisturbanceSpec) -> f64 {
    spec.amplitude * (spec.frequency * t + spec.phase).sin()
}
