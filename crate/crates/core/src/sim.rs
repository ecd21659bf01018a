//! Closed-loop fixed-step simulation and trajectory metrics.
//!
//! The integrated state is the plant `[x1, x2, x3, x4]` followed by the
//! elevation controller `[x1f, x2f, ζ1, ζ2, Ω̂]` and the (optional) pitch
//! controller in the same layout. The control input is recomputed at every
//! Runge–Kutta stage.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{ChannelController, ControlOutput, ControllerState, Gains};
use crate::envelope::{Envelope, EnvelopeConfig, PerformanceFunction};
use crate::error::{Error, Result};
use crate::plant::{self, DisturbanceSpec, HeliState, PlantParams, Reference};
use crate::powmath::OddRational;
use crate::ubf::UbfConfig;

pub const STATE_DIM: usize = 14;
pub type AugState = [f64; STATE_DIM];

/// Half-width of the fixed band used by comparators without a performance function.
pub const WIDE_BAND: f64 = 10.0;

/// Which controller the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// The full method as configured.
    None,
    /// Log-ratio transform in place of the configured UBF.
    ClassicalUbf,
    /// Same controller against a fixed ±10 rad band.
    NoPf,
    /// Plain backstepping: `z1 = e1`, no compensation signals, fixed band.
    Cfb,
}

impl Baseline {
    pub fn label(self) -> &'static str {
        match self {
            Baseline::None => "full",
            Baseline::ClassicalUbf => "classical_ubf",
            Baseline::NoPf => "no_pf",
            Baseline::Cfb => "cfb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub dt: f64,
    pub t_end: f64,
    pub x0: HeliState,
    pub omega_hat0: f64,
    pub baseline: Baseline,
    /// Keep every n-th integration step in the trajectory.
    pub record_every: usize,
}

/// Mirrored controller on the pitch channel (gravity term zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PitchSettings {
    pub reference: Reference,
    pub envelope: EnvelopeConfig,
    pub disturbance: DisturbanceSpec,
}

/// A complete, self-describing simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub plant: PlantParams,
    pub disturbance: DisturbanceSpec,
    pub reference: Reference,
    pub envelope: EnvelopeConfig,
    pub ubf: UbfConfig,
    pub gains: Gains,
    pub sim: SimSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<PitchSettings>,
}

impl Scenario {
    /// Attitude-tracking scenario: `Ts = 1.2`, `Δ = 0.05`, `e∞ = 0.01`,
    /// `c1 = c2 = 0.2`, `m = n = 1/7`, 10 s at `dt = 1e-4`.
    pub fn simulation_ii() -> Self {
        Scenario {
            id: "sim2".into(),
            plant: PlantParams::default(),
            disturbance: DisturbanceSpec::default(),
            reference: Reference::elevation_default(),
            envelope: EnvelopeConfig::exp(1.2, 0.05, 0.01),
            ubf: UbfConfig::barrier(0.2, OddRational::new(1, 7).unwrap()),
            gains: Gains::default(),
            sim: SimSettings {
                dt: 1e-4,
                t_end: 10.0,
                x0: HeliState { x1: -2.0 * PI / 15.0, ..Default::default() },
                omega_hat0: 0.0,
                baseline: Baseline::None,
                record_every: 1,
            },
            pitch: None,
        }
    }

    /// UBF study: `e∞ = 0.03`, `c1 = c2 = 1`, exponent `m = n` as given.
    pub fn simulation_i(m: OddRational) -> Self {
        let mut sc = Scenario::simulation_ii();
        sc.id = format!("sim1_m{}", m.tag());
        sc.envelope = EnvelopeConfig::exp(1.2, 0.05, 0.03);
        sc.ubf = UbfConfig::barrier(1.0, m);
        sc
    }

    pub fn with_baseline(mut self, baseline: Baseline) -> Self {
        self.sim.baseline = baseline;
        if baseline != Baseline::None {
            self.id = format!("{}_{}", self.id, baseline.label());
        }
        self
    }

    pub fn initial_error(&self) -> f64 {
        self.sim.x0.x1 - self.reference.at(0.0).0
    }

    /// The configured performance function, regardless of baseline.
    pub fn performance_function(&self) -> Result<PerformanceFunction> {
        let e1_0 = self.envelope.e1_0.unwrap_or_else(|| self.initial_error());
        PerformanceFunction::new(self.envelope, e1_0)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.disturbance.validate("disturbance")?;
        self.ubf.validate()?;
        self.gains.validate()?;
        let s = &self.sim;
        if !(1e-5..=1e-2).contains(&s.dt) {
            return Err(Error::invalid("sim.dt", format!("{} must lie in [1e-5, 1e-2]", s.dt)));
        }
        if !(s.t_end > self.envelope.ts) || !s.t_end.is_finite() {
            return Err(Error::invalid("sim.t_end", format!("{} must exceed envelope.ts = {}", s.t_end, self.envelope.ts)));
        }
        if s.record_every == 0 {
            return Err(Error::invalid("sim.record_every", "must be >= 1"));
        }
        if !s.x0.is_finite() {
            return Err(Error::invalid("sim.x0", "initial state must be finite"));
        }
        if !(s.omega_hat0 >= 0.0 && s.omega_hat0 <= self.gains.omega_max) {
            return Err(Error::invalid("sim.omega_hat0", format!("{} must lie in [0, omega_max]", s.omega_hat0)));
        }
        let pf = self.performance_function()?;
        let env0 = pf.sample(0.0);
        let e0 = self.initial_error();
        if !env0.contains(e0) {
            return Err(Error::invalid("sim.x0", format!("initial error {e0} outside envelope ({}, {})", env0.k_l, env0.k_u)));
        }
        if let Some(pitch) = &self.pitch {
            pitch.disturbance.validate("pitch.disturbance")?;
            let e0 = s.x0.x3 - pitch.reference.at(0.0).0;
            let pf = PerformanceFunction::new(pitch.envelope, pitch.envelope.e1_0.unwrap_or(e0))?;
            if !pf.sample(0.0).contains(e0) {
                return Err(Error::invalid("sim.x0", "initial pitch error outside pitch envelope"));
            }
        }
        Ok(())
    }

    pub fn elevation_controller(&self) -> Result<ChannelController> {
        let prescribed = Envelope::Prescribed(self.performance_function()?);
        let wide = Envelope::Fixed { lower: -WIDE_BAND, upper: WIDE_BAND };
        let (envelope, ubf, compensate) = match self.sim.baseline {
            Baseline::None => (prescribed, self.ubf, true),
            Baseline::ClassicalUbf => (prescribed, UbfConfig::log_ratio(), true),
            Baseline::NoPf => (wide, self.ubf, true),
            Baseline::Cfb => (wide, UbfConfig::identity(), false),
        };
        Ok(ChannelController {
            envelope,
            ubf,
            gains: self.gains,
            channel: self.plant.elevation_channel(),
            reference: self.reference,
            compensate,
        })
    }

    pub fn pitch_controller(&self) -> Result<Option<ChannelController>> {
        let Some(pitch) = &self.pitch else { return Ok(None) };
        let e0 = self.sim.x0.x3 - pitch.reference.at(0.0).0;
        let pf = PerformanceFunction::new(pitch.envelope, pitch.envelope.e1_0.unwrap_or(e0))?;
        Ok(Some(ChannelController {
            envelope: Envelope::Prescribed(pf),
            ubf: self.ubf,
            gains: self.gains,
            channel: self.plant.pitch_channel(),
            reference: pitch.reference,
            compensate: true,
        }))
    }
}

/// One classical Runge–Kutta step of `ẏ = f(t, y)`.
pub fn rk4_step<const N: usize, F>(mut f: F, t: f64, y: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let axpy = |a: &[f64; N], h: f64, k: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| a[i] + h * k[i]) };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k2))?;
    let k4 = f(t + dt, &axpy(y, dt, &k3))?;
    let next: [f64; N] = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "integrated state", t: t + dt });
    }
    Ok(next)
}

/// Uniformly sampled closed-loop signals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
    pub x4: Vec<f64>,
    pub x1d: Vec<f64>,
    pub e1: Vec<f64>,
    pub z1: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub u1bar: Vec<f64>,
    pub u2bar: Vec<f64>,
    pub omega_hat: Vec<f64>,
    pub zeta1: Vec<f64>,
    pub zeta2: Vec<f64>,
    pub x1f: Vec<f64>,
    pub x2f: Vec<f64>,
    pub k_l: Vec<f64>,
    pub k_u: Vec<f64>,
    pub eta1: Vec<f64>,
    pub sigma_f: Vec<f64>,
}

/// Column order of the trajectory CSV.
pub const SERIES: [&str; 22] = [
    "t", "x1", "x2", "x3", "x4", "x1d", "e1", "z1", "w1", "w2", "alpha1", "u1bar", "u2bar", "omega_hat", "zeta1",
    "zeta2", "x1f", "x2f", "k_l", "k_u", "eta1", "sigma_f",
];

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        let s = match name {
            "t" => &self.t,
            "x1" => &self.x1,
            "x2" => &self.x2,
            "x3" => &self.x3,
            "x4" => &self.x4,
            "x1d" => &self.x1d,
            "e1" => &self.e1,
            "z1" => &self.z1,
            "w1" => &self.w1,
            "w2" => &self.w2,
            "alpha1" => &self.alpha1,
            "u1bar" => &self.u1bar,
            "u2bar" => &self.u2bar,
            "omega_hat" => &self.omega_hat,
            "zeta1" => &self.zeta1,
            "zeta2" => &self.zeta2,
            "x1f" => &self.x1f,
            "x2f" => &self.x2f,
            "k_l" => &self.k_l,
            "k_u" => &self.k_u,
            "eta1" => &self.eta1,
            "sigma_f" => &self.sigma_f,
            _ => return None,
        };
        Some(s)
    }

    fn push(&mut self, t: f64, y: &AugState, out: &ControlOutput, u2bar: f64) {
        let cs = ControllerState::from_slice(&y[4..9]);
        self.t.push(t);
        self.x1.push(y[0]);
        self.x2.push(y[1]);
        self.x3.push(y[2]);
        self.x4.push(y[3]);
        self.x1d.push(out.x1d);
        self.e1.push(out.e1);
        self.z1.push(out.z1);
        self.w1.push(out.w1);
        self.w2.push(out.w2);
        self.alpha1.push(out.alpha1);
        self.u1bar.push(out.u1bar);
        self.u2bar.push(u2bar);
        self.omega_hat.push(cs.omega_hat);
        self.zeta1.push(cs.zeta1);
        self.zeta2.push(cs.zeta2);
        self.x1f.push(cs.x1f);
        self.x2f.push(cs.x2f);
        self.k_l.push(out.env.k_l);
        self.k_u.push(out.env.k_u);
        self.eta1.push(out.ubf.eta1);
        self.sigma_f.push(out.sigma_f);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(SERIES)?;
        let cols: Vec<&[f64]> = SERIES.iter().map(|n| self.series(n).unwrap()).collect();
        let mut row = Vec::with_capacity(cols.len());
        for i in 0..self.len() {
            row.clear();
            row.extend(cols.iter().map(|c| format!("{:.12e}", c[i])));
            wtr.write_record(&row)?;
        }
        wtr.flush()
    }

    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        self.write_csv(std::io::BufWriter::new(File::create(path)?))
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct SimFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for SimFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} samples)", self.error, self.partial.len())
    }
}

impl std::error::Error for SimFailure {}

struct ClosedLoop<'a> {
    sc: &'a Scenario,
    elev: ChannelController,
    pitch: Option<ChannelController>,
}

struct StageEval {
    elev: ControlOutput,
    u2bar: f64,
    deriv: AugState,
}

impl ClosedLoop<'_> {
    fn eval(&self, t: f64, y: &AugState) -> Result<StageEval> {
        let s = HeliState { x1: y[0], x2: y[1], x3: y[2], x4: y[3] };
        let elev = self.elev.evaluate(t, s.x1, s.x2, &ControllerState::from_slice(&y[4..9]))?;
        let d1 = plant::disturbance(t, &self.sc.disturbance);
        let (u2bar, d2, pitch_rates) = match (&self.pitch, &self.sc.pitch) {
            (Some(ctrl), Some(ps)) => {
                let e = ctrl.evaluate(t, s.x3, s.x4, &ControllerState::from_slice(&y[9..14]))?;
                (e.out.u1bar, plant::disturbance(t, &ps.disturbance), e.rates.as_array())
            }
            _ => (0.0, 0.0, [0.0; 5]),
        };
        let ds = plant::derivs(&s, elev.out.u1bar, u2bar, d1, d2, &self.sc.plant).map_err(|e| e.at_time(t))?;
        let mut deriv = [0.0; STATE_DIM];
        deriv[..4].copy_from_slice(&ds.as_array());
        deriv[4..9].copy_from_slice(&elev.rates.as_array());
        deriv[9..14].copy_from_slice(&pitch_rates);
        Ok(StageEval { elev: elev.out, u2bar, deriv })
    }
}

/// Integrate the scenario from 0 to `t_end`.
// The partial trajectory is the point of the error type; boxing it buys nothing.
#[allow(clippy::result_large_err)]
pub fn run(sc: &Scenario) -> std::result::Result<Trajectory, SimFailure> {
    let mut tr = Trajectory::default();
    let fail = |error: Error, partial: Trajectory| SimFailure { error, partial };
    if let Err(e) = sc.validate() {
        return Err(fail(e, tr));
    }
    let setup = (|| -> Result<ClosedLoop<'_>> {
        Ok(ClosedLoop { sc, elev: sc.elevation_controller()?, pitch: sc.pitch_controller()? })
    })();
    let cl = match setup {
        Ok(cl) => cl,
        Err(e) => return Err(fail(e, tr)),
    };
    let x0 = sc.sim.x0;
    let mut y: AugState = [0.0; STATE_DIM];
    y[..4].copy_from_slice(&x0.as_array());
    match cl.elev.initial_state(x0.x1, sc.sim.omega_hat0) {
        Ok(cs) => y[4..9].copy_from_slice(&cs.as_array()),
        Err(e) => return Err(fail(e, tr)),
    }
    if let Some(p) = &cl.pitch {
        match p.initial_state(x0.x3, sc.sim.omega_hat0) {
            Ok(cs) => y[9..14].copy_from_slice(&cs.as_array()),
            Err(e) => return Err(fail(e, tr)),
        }
    }

    let dt = sc.sim.dt;
    let steps = (sc.sim.t_end / dt).round() as usize;
    let omega_max = sc.gains.omega_max;
    let mut current = match cl.eval(0.0, &y) {
        Ok(ev) => ev,
        Err(e) => return Err(fail(e, tr)),
    };
    tr.push(0.0, &y, &current.elev, current.u2bar);
    for k in 0..steps {
        let t = k as f64 * dt;
        let first = current.deriv;
        let mut stage = 0;
        let step = rk4_step(
            |ts, ys| {
                stage += 1;
                if stage == 1 {
                    Ok(first)
                } else {
                    cl.eval(ts, ys).map(|e| e.deriv)
                }
            },
            t,
            &y,
            dt,
        );
        y = match step {
            Ok(next) => next,
            Err(e) => return Err(fail(e, tr)),
        };
        // Keep the adaptive estimates in [0, Ω_max].
        y[8] = y[8].clamp(0.0, omega_max);
        y[13] = y[13].clamp(0.0, omega_max);
        let t_next = (k + 1) as f64 * dt;
        current = match cl.eval(t_next, &y) {
            Ok(ev) => ev,
            Err(e) => return Err(fail(e, tr)),
        };
        if (k + 1) % sc.sim.record_every == 0 || k + 1 == steps {
            tr.push(t_next, &y, &current.elev, current.u2bar);
        }
    }
    Ok(tr)
}

/// Summary numbers of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Samples where `e1` is not strictly inside the active envelope.
    pub envelope_violations: usize,
    /// Samples where `e1` is outside the configured performance function
    /// (differs from the above only for the fixed-band comparators).
    pub prescribed_violations: usize,
    pub max_abs_error_after_ts: f64,
    /// Largest excursion past zero, opposite to the initial error, after the
    /// first zero crossing.
    pub overshoot: f64,
    /// First time after which `|e1| ≤ ē∞` for good; `None` if never.
    pub convergence_time: Option<f64>,
    /// `∫ ū1² dt` by the trapezoidal rule.
    pub control_energy: f64,
    pub peak_input: f64,
    pub final_e1: f64,
}

pub fn compute_metrics(tr: &Trajectory, sc: &Scenario) -> Result<Metrics> {
    let pf = sc.performance_function()?;
    let ts = sc.envelope.ts;
    let e_bar = sc.envelope.e_inf_bar.max(sc.envelope.e_inf);
    let n = tr.len();
    let mut envelope_violations = 0;
    let mut prescribed_violations = 0;
    let mut max_after = 0.0f64;
    for i in 0..n {
        let e = tr.e1[i];
        if !(tr.k_l[i] < e && e < tr.k_u[i]) {
            envelope_violations += 1;
        }
        if !pf.sample(tr.t[i]).contains(e) {
            prescribed_violations += 1;
        }
        if tr.t[i] >= ts {
            max_after = max_after.max(e.abs());
        }
    }

    let mut overshoot = 0.0f64;
    if n > 0 {
        let s0 = tr.e1[0].signum();
        if tr.e1[0] != 0.0 {
            if let Some(cross) = tr.e1.iter().position(|&e| e * s0 <= 0.0) {
                overshoot = tr.e1[cross..].iter().map(|&e| (-e * s0).max(0.0)).fold(0.0, f64::max);
            }
        }
    }

    let convergence_time = match tr.e1.iter().rposition(|e| e.abs() > e_bar) {
        None => tr.t.first().copied(),
        Some(i) if i + 1 < n => Some(tr.t[i + 1]),
        Some(_) => None,
    };

    let mut energy = 0.0;
    for i in 1..n {
        energy += 0.5 * (tr.u1bar[i] * tr.u1bar[i] + tr.u1bar[i - 1] * tr.u1bar[i - 1]) * (tr.t[i] - tr.t[i - 1]);
    }
    let peak_input = tr.u1bar.iter().fold(0.0f64, |m, u| m.max(u.abs()));

    Ok(Metrics {
        envelope_violations,
        prescribed_violations,
        max_abs_error_after_ts: max_after,
        overshoot,
        convergence_time,
        control_energy: energy,
        peak_input,
        final_e1: tr.e1.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rk4_constant_field_is_identity() {
        let y = [1.0, -2.0, 3.5];
        let next = rk4_step(|_, _| Ok([0.0; 3]), 0.0, &y, 0.1).unwrap();
        assert_eq!(next, y);
    }

    #[test]
    fn rk4_exponential_decay_is_fifth_order_locally() {
        let dt = 1e-3;
        let next = rk4_step(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, &[1.0], dt).unwrap();
        assert!((next[0] - (-dt).exp()).abs() < 1e-14);
    }

    #[test]
    fn rk4_reports_non_finite() {
        let err = rk4_step(|_, _| Ok([f64::INFINITY]), 2.0, &[1.0], 0.5).unwrap_err();
        assert_eq!(err, Error::NonFinite { what: "integrated state", t: 2.5 });
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::simulation_ii().validate().is_ok());
        let mut sc = Scenario::simulation_ii();
        sc.sim.dt = 0.1;
        assert!(sc.validate().is_err());
        let mut sc = Scenario::simulation_ii();
        sc.sim.t_end = 1.0;
        assert!(sc.validate().is_err());
        let mut sc = Scenario::simulation_ii();
        sc.envelope.e1_0 = Some(0.5);
        assert!(sc.validate().is_err(), "explicit e1_0 far from the actual initial error");
    }

    fn synthetic(e1: Vec<f64>, k: f64) -> Trajectory {
        let n = e1.len();
        Trajectory {
            t: (0..n).map(|i| i as f64 * 0.5).collect(),
            k_l: vec![-k; n],
            k_u: vec![k; n],
            u1bar: vec![2.0; n],
            e1,
            ..Default::default()
        }
    }

    fn flat_scenario() -> Scenario {
        let mut sc = Scenario::simulation_ii();
        sc.envelope = EnvelopeConfig::exp(1.2, 0.5, 0.2);
        sc.envelope.e1_0 = Some(0.0);
        sc
    }

    #[test]
    fn metrics_of_zero_error() {
        let sc = flat_scenario();
        let m = compute_metrics(&synthetic(vec![0.0; 8], 0.2), &sc).unwrap();
        assert_eq!(m.overshoot, 0.0);
        assert_eq!(m.envelope_violations, 0);
        assert_eq!(m.convergence_time, Some(0.0));
        assert_relative_eq!(m.control_energy, 4.0 * 3.5, max_relative = 1e-14);
        assert_eq!(m.peak_input, 2.0);
    }

    #[test]
    fn metrics_count_crossing_of_upper_bound() {
        let sc = flat_scenario();
        let m = compute_metrics(&synthetic(vec![-0.1, 0.0, 0.1, 0.25, 0.1, 0.0, 0.0], 0.2), &sc).unwrap();
        assert_eq!(m.envelope_violations, 1);
        assert_relative_eq!(m.overshoot, 0.25);
        assert_eq!(m.convergence_time, Some(2.0));
        assert_eq!(m.max_abs_error_after_ts, 0.25);
    }

    fn short(mut sc: Scenario) -> Scenario {
        sc.sim.t_end = 2.0;
        sc.sim.dt = 1e-4;
        sc
    }

    #[test]
    fn near_equilibrium_run_stays_inside() {
        let mut sc = short(Scenario::simulation_ii());
        sc.disturbance = DisturbanceSpec::none();
        sc.reference = Reference::zero();
        sc.sim.x0 = HeliState::default();
        let tr = run(&sc).unwrap();
        let m = compute_metrics(&tr, &sc).unwrap();
        assert_eq!(m.envelope_violations, 0);
        assert!(tr.e1.iter().all(|e| e.abs() <= 0.05));
    }

    #[test]
    fn first_step_is_finite_and_inside() {
        let mut sc = Scenario::simulation_ii();
        sc.sim.t_end = 1.2 + 1e-4;
        let tr = run(&sc).unwrap();
        assert!(tr.e1[1].is_finite() && tr.k_l[1] < tr.e1[1] && tr.e1[1] < tr.k_u[1]);
        assert_eq!(tr.len(), 12_002);
    }

    #[test]
    fn runs_are_deterministic() {
        let sc = short(Scenario::simulation_ii());
        assert_eq!(run(&sc).unwrap(), run(&sc).unwrap());
    }

    #[test]
    fn decimated_recording() {
        let mut sc = short(Scenario::simulation_ii());
        sc.sim.record_every = 100;
        let tr = run(&sc).unwrap();
        assert_eq!(tr.len(), 201);
        assert_relative_eq!(tr.t[1] - tr.t[0], 0.01, max_relative = 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut sc = short(Scenario::simulation_ii());
        sc.sim.record_every = 1000;
        let tr = run(&sc).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SERIES.join(","));
        assert_eq!(lines.count(), tr.len());
    }

    #[test]
    fn pitch_channel_tracks_when_enabled() {
        let mut sc = short(Scenario::simulation_ii());
        sc.sim.x0.x3 = 0.1;
        sc.pitch = Some(PitchSettings {
            reference: Reference::zero(),
            envelope: EnvelopeConfig::exp(1.2, 0.05, 0.01),
            disturbance: DisturbanceSpec::none(),
        });
        let tr = run(&sc).unwrap();
        assert!(tr.x3.last().unwrap().abs() <= 0.01);
        assert!(tr.u2bar.iter().any(|u| *u != 0.0));
    }
}
