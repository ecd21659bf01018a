//! Randomized property suites over the numeric kernel, the barrier
//! transforms, the performance functions and the settling-time bounds.
//!
//! Each suite draws from its own ChaCha stream derived from one seed, so a
//! report is reproducible and suites can run in parallel.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{EnvelopeConfig, EnvelopeSample, Family, PerformanceFunction};
use crate::fxtbounds::{self, BoundProblem, Fraction};
use crate::powmath::{self, OddRational};
use crate::ubf::{self, UbfConfig};

/// Outcome of one suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed value of the checked quantity (error, ratio, ...).
    pub worst: f64,
    /// First failing case, if any.
    pub first_failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, worst: f64::NEG_INFINITY, first_failure: None }
    }

    fn check(&mut self, ok: bool, value: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if value.is_nan() || !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
    }

    fn done(self) -> SuiteResult {
        SuiteResult { name: self.name, cases: self.cases, failures: self.failures, worst: self.worst, first_failure: self.first_failure }
    }
}

/// Suite sizes; [`Sizes::default`] matches the acceptance criteria.
#[derive(Debug, Clone, Copy)]
pub struct Sizes {
    pub inequality_draws: usize,
    pub bound_instances: usize,
    pub lemma_instances: usize,
    pub ubf_points: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes { inequality_draws: 10_000, bound_instances: 200, lemma_instances: 50, ubf_points: 1000 }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Young-type inequality `|ψ1|^γ1 |ψ2|^γ2 ≤ young_rhs(ψ1, ψ2, γ1, γ2)`.
pub fn young(rng: &mut ChaCha8Rng, draws: usize) -> SuiteResult {
    let mut t = Tally::new("young_inequality");
    for _ in 0..draws {
        let (p1, p2) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (g1, g2) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
        let lhs = f64::abs(p1).powf(g1) * f64::abs(p2).powf(g2);
        let rhs = powmath::young_rhs(p1, p2, g1, g2);
        t.check(lhs <= rhs + 1e-12, lhs - rhs, || format!("psi=({p1}, {p2}) gamma=({g1}, {g2}): {lhs} > {rhs}"));
    }
    t.done()
}

/// `(Σ|χ|)^h ≤ Σ|χ|^h ≤ s^(1-h) (Σ|χ|)^h`, with equality on the right for equal entries.
pub fn power_chain(rng: &mut ChaCha8Rng, draws: usize) -> SuiteResult {
    let mut t = Tally::new("power_sum_chain");
    for i in 0..draws {
        let s = rng.gen_range(1..=8);
        let h = 1.0 - rng.gen_range(0.0..1.0); // (0, 1]
        let chi: Vec<f64> = if i % 10 == 0 {
            let v = rng.gen_range(0.0..10.0);
            (0..s).map(|k| if k % 2 == 0 { v } else { -v }).collect()
        } else {
            (0..s).map(|_| rng.gen_range(-10.0..10.0)).collect()
        };
        let (lo, mid, hi) = powmath::power_sum_chain(&chi, h);
        let mut margin = (lo - mid).max(mid - hi);
        if i % 10 == 0 {
            margin = margin.max((hi - mid).abs() - 1e-12 * hi.max(1.0));
        }
        t.check(margin <= 1e-12, margin, || format!("chi={chi:?} h={h}: ({lo}, {mid}, {hi})"));
    }
    t.done()
}

/// `0 ≤ |w| - surrogate(w) < bound` for the three smooth absolute values.
pub fn surrogate_sandwich(rng: &mut ChaCha8Rng, draws: usize) -> SuiteResult {
    let mut t = Tally::new("surrogate_sandwich");
    for _ in 0..draws {
        let w = rng.gen_range(-1.0..1.0) * 10f64.powf(rng.gen_range(-4.0..4.0));
        let d = 10f64.powf(rng.gen_range(-3.0..1.0));
        let e = 10f64.powf(rng.gen_range(-3.0..1.0));
        let slack = 1e-12 * w.abs().max(1.0);
        let cases = [
            ("l7", powmath::smooth_abs_l7(w, d, e), d * e / (d * d + e * e).sqrt()),
            ("l8a", powmath::smooth_abs_l8a(w, d), 0.2576 * d),
            ("l8b", powmath::smooth_abs_l8b(w, d), 2.0 / PI * d),
        ];
        for (name, s, bound) in cases {
            let deficit = w.abs() - s;
            let even = s == match name {
                "l7" => powmath::smooth_abs_l7(-w, d, e),
                "l8a" => powmath::smooth_abs_l8a(-w, d),
                _ => powmath::smooth_abs_l8b(-w, d),
            };
            let ok = even && deficit >= -slack && deficit < bound + slack;
            t.check(ok, deficit / bound, || format!("{name}: w={w} delta={d} eps={e}: deficit {deficit}, bound {bound}"));
        }
    }
    t.done()
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Brute-force suprema of `|v| - surrogate(v)`: log grid of 10⁴ points, then local refinement.
pub fn surrogate_suprema() -> Vec<(&'static str, f64, f64)> {
    let grid: Vec<f64> = (0..10_000).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 9_999.0)).collect();
    let sup = |f: &dyn Fn(f64) -> f64| {
        let (i, _) = grid.iter().enumerate().map(|(i, &v)| (i, f(v))).fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        golden_max(f, lo, hi)
    };
    vec![
        ("l7(delta=eps=1)", sup(&|v| v - powmath::smooth_abs_l7(v, 1.0, 1.0)), 1.0 / 2f64.sqrt()),
        ("l8a(delta=1)", sup(&|v| v - powmath::smooth_abs_l8a(v, 1.0)), 0.2576),
        ("l8b(delta=1)", sup(&|v| v - powmath::smooth_abs_l8b(v, 1.0)), 2.0 / PI),
    ]
}

pub fn suprema_suite() -> SuiteResult {
    let mut t = Tally::new("surrogate_suprema");
    for (name, sup, bound) in surrogate_suprema() {
        t.check(sup < bound, sup / bound, || format!("{name}: sup {sup} >= {bound}"));
    }
    t.done()
}

/// `Γ(l)Γ(1-l) = π/sin(lπ)` to 1e-9 relative.
pub fn gamma_reflection(rng: &mut ChaCha8Rng, draws: usize) -> SuiteResult {
    let mut t = Tally::new("gamma_reflection");
    for _ in 0..draws {
        let l = rng.gen_range(1e-3..1.0 - 1e-3);
        let g = powmath::gamma_fn(l).unwrap() * powmath::gamma_fn(1.0 - l).unwrap();
        let exact = PI / (l * PI).sin();
        let rel = (g / exact - 1.0).abs();
        t.check(rel <= 1e-9, rel, || format!("l={l}: {g} vs {exact}"));
    }
    t.done()
}

fn random_unperturbed(rng: &mut ChaCha8Rng) -> BoundProblem {
    BoundProblem::new(
        rng.gen_range(0.1..10.0),
        rng.gen_range(0.1..10.0),
        0.0,
        rng.gen_range(0.1..0.9),
        rng.gen_range(1.1..3.0),
        0.5,
    )
    .unwrap()
}

pub const ORDERING_V0: [f64; 3] = [1.0, 1e3, 1e6];

/// `oracle ≤ T1 ≤ T2 + 1e-9` for unperturbed instances and every `v0`.
pub fn bound_ordering(rng: &mut ChaCha8Rng, n: usize) -> SuiteResult {
    let mut t = Tally::new("bound_ordering");
    for _ in 0..n {
        let bp = random_unperturbed(rng);
        let t1 = fxtbounds::t1_bound(&bp).unwrap();
        let t2 = fxtbounds::t2_classical(&bp).unwrap();
        for v0 in ORDERING_V0 {
            let oracle = fxtbounds::settle_oracle(&bp, v0).map(|s| s.t_settle).unwrap_or(f64::NAN);
            let ok = oracle <= t1 && t1 <= t2 + 1e-9;
            t.check(ok, oracle / t1, || format!("{bp:?} v0={v0}: oracle {oracle}, T1 {t1}, T2 {t2}"));
        }
    }
    t.done()
}

/// Gamma form and reflected form of T1 agree to 1e-9 relative.
pub fn t1_forms(rng: &mut ChaCha8Rng, n: usize) -> SuiteResult {
    let mut t = Tally::new("t1_gamma_vs_reflected");
    for _ in 0..n {
        let bp = random_unperturbed(rng);
        let a = fxtbounds::t1_bound(&bp).unwrap();
        let b = fxtbounds::t1_bound_reflected(&bp).unwrap();
        let rel = (a / b - 1.0).abs();
        t.check(rel <= 1e-9, rel, || format!("{bp:?}: {a} vs {b}"));
    }
    t.done()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    Arctan,
    PartialFractions,
    Rational,
}

/// Initial values at which the lemma bounds are compared with the oracle.
pub const DOMINANCE_V0: [f64; 2] = [1e3, 1e6];

fn random_lemma_instance(rng: &mut ChaCha8Rng, lemma: Lemma) -> (BoundProblem, Option<u32>) {
    let mu1 = rng.gen_range(0.1..10.0);
    let mu2 = rng.gen_range(0.1..10.0);
    let mu3 = rng.gen_range(0.01..5.0);
    let tau = rng.gen_range(0.2..0.8);
    match lemma {
        Lemma::Arctan => {
            let p = rng.gen_range(0.1..0.9);
            (BoundProblem::new(mu1, mu2, mu3, p, 2.0 - p, tau).unwrap(), None)
        }
        Lemma::PartialFractions => {
            let a = rng.gen_range(2..=5u32);
            let p = rng.gen_range(0.1..0.9);
            let q = a as f64 - (a as f64 - 1.0) * p;
            (BoundProblem::new(mu1, mu2, mu3, p, q, tau).unwrap(), Some(a))
        }
        Lemma::Rational => {
            let odd = |rng: &mut ChaCha8Rng, lo: u32, hi: u32| 2 * rng.gen_range(lo..=hi) + 1;
            let p1 = odd(rng, 1, 3);
            let p2 = odd(rng, 0, (p1 - 3) / 2);
            let q1 = odd(rng, 0, 3);
            let q2 = odd(rng, q1.div_ceil(2), (3 * q1) / 2);
            let (p, q) = (Fraction::new(p2, p1).unwrap(), Fraction::new(q2, q1).unwrap());
            (BoundProblem::with_fractions(mu1, mu2, mu3, p, q, tau).unwrap(), None)
        }
    }
}

/// Lemma bound ≥ oracle time to reach the residual set, for perturbed instances.
pub fn lemma_dominance(rng: &mut ChaCha8Rng, lemma: Lemma, n: usize) -> SuiteResult {
    let name = match lemma {
        Lemma::Arctan => "lemma_arctan_dominance",
        Lemma::PartialFractions => "lemma_partial_fraction_dominance",
        Lemma::Rational => "lemma_rational_dominance",
    };
    let mut t = Tally::new(name);
    for _ in 0..n {
        let (bp, a) = random_lemma_instance(rng, lemma);
        let bound = match lemma {
            Lemma::Arctan => fxtbounds::t_lemma2(&bp),
            Lemma::PartialFractions => fxtbounds::t_lemma3(&bp, a.unwrap()),
            Lemma::Rational => fxtbounds::t_lemma4(&bp),
        }
        .unwrap_or(f64::NAN);
        for v0 in DOMINANCE_V0 {
            let oracle = fxtbounds::settle_oracle(&bp, v0).map(|s| s.t_settle).unwrap_or(f64::NAN);
            t.check(oracle <= bound, oracle / bound, || format!("{bp:?} a={a:?} v0={v0}: oracle {oracle} > bound {bound}"));
        }
    }
    t.done()
}

/// Fourth-order central difference.
fn diff4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// `i_a' = 1/(1 + x^a)` on a 10³-point grid over `[0, 10]`, the closed-form
/// total, and `i_ef' = integrand`.
pub fn antiderivatives() -> SuiteResult {
    let mut t = Tally::new("antiderivatives");
    let h = 1e-3;
    for a in 2..=5u32 {
        let f = |x: f64| fxtbounds::i_a(x, a).unwrap();
        for i in 0..1000 {
            let x = 10.0 * i as f64 / 999.0;
            // One-sided third-order stencil at the left end of the domain.
            let d = if x < 2.0 * h {
                (-11.0 * f(x) + 18.0 * f(x + h) - 9.0 * f(x + 2.0 * h) + 2.0 * f(x + 3.0 * h)) / (6.0 * h)
            } else {
                diff4(f, x, h)
            };
            let err = (d - 1.0 / (1.0 + x.powi(a as i32))).abs();
            t.check(err <= 1e-6, err, || format!("i_a' a={a} x={x}: err {err}"));
        }
        let total = f(1e7) - f(0.0);
        let err = (total - fxtbounds::i_a_total(a)).abs();
        t.check(err <= 1e-4, err, || format!("i_a total a={a}: {total}"));
    }
    let problems = [
        BoundProblem::with_fractions(1.3, 0.8, 0.2, Fraction::new(3, 5).unwrap(), Fraction::new(5, 3).unwrap(), 0.5).unwrap(),
        BoundProblem::with_fractions(1.0, 1.0, 0.1, Fraction::new(1, 3).unwrap(), Fraction::new(7, 5).unwrap(), 0.5).unwrap(),
        BoundProblem::with_fractions(4.0, 0.5, 1.0, Fraction::new(5, 7).unwrap(), Fraction::new(3, 1).unwrap(), 0.3).unwrap(),
    ];
    for bp in &problems {
        let f = |x: f64| fxtbounds::i_ef(x, bp).unwrap();
        for i in 1..=200 {
            let x = 5.0 * i as f64 / 200.0;
            let err = (diff4(f, x, h) - fxtbounds::i_ef_integrand(x, bp).unwrap()).abs();
            t.check(err <= 1e-6, err, || format!("i_ef' {bp:?} x={x}: err {err}"));
        }
    }
    t.done()
}

fn random_exponent(rng: &mut ChaCha8Rng) -> OddRational {
    const CHOICES: [(u32, u32); 7] = [(1, 1), (1, 3), (1, 5), (1, 7), (3, 5), (5, 3), (3, 1)];
    let (n, d) = CHOICES[rng.gen_range(0..CHOICES.len())];
    OddRational::new(n, d).unwrap()
}

/// Finite-difference check of `η1 = ∂z1/∂e1` and `η2 = ∂z1/∂t` for the
/// barrier and unified transforms, plus `η1 > 0` and the `c = 0` identity.
pub fn ubf_jacobians(rng: &mut ChaCha8Rng, n: usize) -> SuiteResult {
    let mut t = Tally::new("ubf_jacobians");
    for i in 0..n {
        let k_l = rng.gen_range(-1.0..0.5);
        let k_u = k_l + rng.gen_range(0.05..1.0);
        let (kd_l, kd_u) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let e1 = k_l + (k_u - k_l) * rng.gen_range(0.05..0.95);
        let m = random_exponent(rng);
        let c1 = rng.gen_range(0.1..2.0);
        let mut cfg = if i % 2 == 0 { UbfConfig::barrier(c1, m) } else { UbfConfig::unified(c1, m) };
        cfg.c2 = rng.gen_range(0.1..2.0);
        cfg.n = random_exponent(rng);
        let env_at = |s: f64| EnvelopeSample { k_l: k_l + kd_l * s, k_u: k_u + kd_u * s, k_l_dot: kd_l, k_u_dot: kd_u };
        let out = ubf::transform(e1, &env_at(0.0), &cfg).unwrap();
        let h = 1e-4 * (k_u - k_l).min(e1 - k_l).min(k_u - e1);
        let d_e = diff4(|x| ubf::transform(x, &env_at(0.0), &cfg).unwrap().z1, e1, h);
        let d_t = diff4(|s| ubf::transform(e1, &env_at(s), &cfg).unwrap().z1, 0.0, h);
        let rel = |fd: f64, exact: f64| (fd - exact).abs() / exact.abs().max(1e-6);
        let worst = rel(d_e, out.eta1).max(rel(d_t, out.eta2));
        let ok = out.eta1 > 0.0 && out.eta1.is_finite() && out.eta2.is_finite() && worst <= 1e-5;
        t.check(ok, worst, || format!("{cfg:?} e1={e1} K=({k_l},{k_u}) Kdot=({kd_l},{kd_u}): {out:?} fd=({d_e},{d_t})"));

        let ident = ubf::transform(e1, &env_at(0.0), &UbfConfig::identity()).unwrap();
        t.check(ident.z1 == e1 && ident.eta1 == 1.0 && ident.eta2 == 0.0, 0.0, || format!("identity at e1={e1}: {ident:?}"));
    }
    t.done()
}

/// `K_l(0) = e1(0) - Δ`, `K_u(0) = e1(0) + Δ̄` and continuity at `Ts` for every family.
pub fn envelope_endpoints(rng: &mut ChaCha8Rng, n: usize) -> SuiteResult {
    let mut t = Tally::new("envelope_endpoints");
    let families = [Family::Exp, Family::Sech, Family::Csch, Family::Coth];
    let mut tried = 0;
    while t.cases < 2 * n * families.len() && tried < 100 * n {
        tried += 1;
        let family = families[tried % families.len()];
        let delta = rng.gen_range(0.02..1.0);
        let delta_bar = rng.gen_range(0.02..1.0);
        let cfg = EnvelopeConfig {
            family,
            ts: rng.gen_range(0.2..5.0),
            delta,
            delta_bar,
            e_inf: delta * rng.gen_range(0.05..0.9),
            e_inf_bar: delta_bar * rng.gen_range(0.05..0.9),
            a_l: rng.gen_range(0.2..3.0),
            b_l: rng.gen_range(0.2..3.0),
            a_u: rng.gen_range(0.2..3.0),
            b_u: rng.gen_range(0.2..3.0),
            e1_0: None,
        };
        let e1_0 = rng.gen_range(-1.0..1.0);
        // Random shapes may cross; those configurations are rejected by construction.
        let Ok(pf) = PerformanceFunction::new(cfg, e1_0) else { continue };
        let s0 = pf.sample(0.0);
        let err0 = (s0.k_l - (e1_0 - delta)).abs().max((s0.k_u - (e1_0 + delta_bar)).abs());
        t.check(err0 <= 1e-12, err0, || format!("{cfg:?} e1_0={e1_0}: start {s0:?}"));
        let before = pf.sample(cfg.ts * (1.0 - 1e-9));
        let at = pf.sample(cfg.ts);
        let jump = (before.k_l - at.k_l).abs().max((before.k_u - at.k_u).abs());
        t.check(jump <= 1e-6, jump, || format!("{cfg:?} e1_0={e1_0}: jump {jump} at Ts"));
    }
    t.done()
}

/// Every suite, in a fixed order, each on its own random stream.
pub fn run_all(seed: u64, sizes: Sizes) -> Vec<SuiteResult> {
    type Job = Box<dyn Fn(&mut ChaCha8Rng) -> SuiteResult + Send + Sync>;
    let jobs: Vec<Job> = vec![
        Box::new(move |r| young(r, sizes.inequality_draws)),
        Box::new(move |r| power_chain(r, sizes.inequality_draws)),
        Box::new(move |r| surrogate_sandwich(r, sizes.inequality_draws)),
        Box::new(|_| suprema_suite()),
        Box::new(move |r| gamma_reflection(r, sizes.inequality_draws)),
        Box::new(move |r| bound_ordering(r, sizes.bound_instances)),
        Box::new(move |r| t1_forms(r, sizes.bound_instances)),
        Box::new(move |r| lemma_dominance(r, Lemma::Arctan, sizes.lemma_instances)),
        Box::new(move |r| lemma_dominance(r, Lemma::PartialFractions, sizes.lemma_instances)),
        Box::new(move |r| lemma_dominance(r, Lemma::Rational, sizes.lemma_instances)),
        Box::new(|_| antiderivatives()),
        Box::new(move |r| ubf_jacobians(r, sizes.ubf_points)),
        Box::new(move |r| envelope_endpoints(r, 50)),
    ];
    jobs.par_iter().enumerate().map(|(i, job)| job(&mut stream(seed, i as u64))).collect()
}

/// Seeded random stream for a named suite, for callers running suites one by one.
pub fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    stream(seed, id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let sizes = Sizes { inequality_draws: 300, bound_instances: 8, lemma_instances: 4, ubf_points: 60 };
        for r in run_all(7, sizes) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = young(&mut rng_for(3, 0), 50);
        let b = young(&mut rng_for(3, 0), 50);
        assert_eq!(a.worst, b.worst);
    }

    #[test]
    fn tally_reports_nan_as_failure() {
        let mut t = Tally::new("x");
        t.check(true, f64::NAN, || "nan".into());
        assert_eq!(t.done().failures, 1);
    }
}
