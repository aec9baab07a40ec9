use serde::{Deserialize, Serialize};

use crate::analysis::kronecker;
use crate::certificate::{Certificate, Rigor};
use crate::dd::Dd;
use crate::ergodic::{
    base_angle, coboundary_solve, difference_coefficients, lacunarity_report, sine_coefficients, LacunarityReport,
};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::Rational;
use crate::schedule::{AmplitudeProfile, Schedule, Variant};
use crate::torusmaps::{coboundary_series, Angle, SkewMap, TorusPoint};

use super::{certified_stage, finish_schedule, random_points, Evidence, RunConfig, RunReport};

/// Tolerance on drift of the invariant along simulated orbits.
const BAND_SLACK: f64 = 1e-9;
const BAND_STARTS: usize = 16;
const MAX_BAND_STEPS: u64 = 100_000;

/// Orbits started inside `{u ∈ [lo, hi]}` and stepped one map application at a time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub lo: f64,
    pub hi: f64,
    pub starts: usize,
    pub steps: u64,
    pub escapes: usize,
    /// Largest observed drift of `u` from its starting value.
    pub max_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalEvidence {
    /// Sampled `sup |u∘G_N − u|`.
    pub invariant_residual: f64,
    pub lacunarity: LacunarityReport,
    /// Frequency at which the cohomological equation breaks at `α = p_N/q_N`.
    pub resonant_frequency: Option<i64>,
    /// Worst coefficient error when recovering `g_N` at an angle inside `I_N`.
    pub recovery_error: f64,
    /// `Σ |ĝ_k|` over the recovered modes.
    pub recovered_partial_sums: Vec<f64>,
    pub bands: Vec<BandCheck>,
}

fn band_check(map: &SkewMap, lo: f64, hi: f64, steps: u64) -> BandCheck {
    let drifts = par::map_range(BAND_STARTS, |j| {
        let u0 = lo + (hi - lo) * (j as f64 + 0.5) / BAND_STARTS as f64;
        let x0 = Dd::from_f64(kronecker(j));
        let mut z = TorusPoint::from_dd(x0, Dd::from_f64(u0) - map.g.eval(x0));
        let mut drift = 0.0f64;
        let mut escaped = false;
        for _ in 0..steps {
            z = map.apply(&z);
            let u = map.invariant(&z).to_f64();
            drift = drift.max((u - u0).abs());
            escaped |= u < lo - BAND_SLACK || u > hi + BAND_SLACK;
        }
        (drift, escaped)
    });
    BandCheck {
        lo,
        hi,
        starts: BAND_STARTS,
        steps,
        escapes: drifts.iter().filter(|d| d.1).count(),
        max_drift: drifts.iter().map(|d| d.0).fold(0.0, f64::max),
    }
}

/// Harmonic amplitudes: the limit keeps the measurable invariant `y + g(x)` but no
/// continuous one, so it is minimal and not ergodic. The run forces harmonic amplitudes.
pub fn run_minimal_nonergodic(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.stages < 2 {
        return Err(Error::PrereqViolated("the partial-sum trend needs at least two stages".into()));
    }
    let mut cfg = cfg.clone();
    cfg.variant = Variant::MinimalNonErgodic;
    cfg.policy.amplitudes = AmplitudeProfile::Harmonic;
    let mut report = RunReport {
        variant: Variant::MinimalNonErgodic,
        config: cfg.clone(),
        schedule: Schedule::default(),
        certificates: Vec::new(),
        norm_chain: Vec::new(),
        evidence: Evidence::MinimalNonErgodic(empty_evidence()),
        artifacts: Vec::new(),
        error: None,
    };
    let mut ev = empty_evidence();
    if let Err(e) = body(&cfg, &mut report, &mut ev) {
        report.error = Some(e.to_string());
    }
    report.evidence = Evidence::MinimalNonErgodic(ev);
    Ok(report)
}

fn empty_evidence() -> MinimalEvidence {
    MinimalEvidence {
        invariant_residual: 0.0,
        lacunarity: LacunarityReport { ratio: 0.0, partial_sums: vec![], tail: 0.0, divergent: false, oscillation: vec![] },
        resonant_frequency: None,
        recovery_error: 0.0,
        recovered_partial_sums: vec![],
        bands: vec![],
    }
}

fn body(cfg: &RunConfig, report: &mut RunReport, ev: &mut MinimalEvidence) -> Result<()> {
    let mut sched = Schedule::default();
    for n in 1..=cfg.stages {
        let res = certified_stage(&mut sched, cfg, cfg.policy.amplitudes.amplitude(n), None, None, &[], &mut report.certificates);
        report.schedule = sched.clone();
        res?;
    }
    finish_schedule(&sched, cfg, report)?;
    let big_n = sched.len();
    let last = sched.stage(big_n)?;
    let g = coboundary_series(1, big_n, &sched)?;
    let proxy = base_angle(&last.interval);
    let map = SkewMap::new(proxy.clone(), g.clone());

    let mut rng = cfg.rng();
    let pts = random_points(&mut rng, cfg.budgets.sample_points);
    ev.invariant_residual = par::map(pts, |z| {
        (map.invariant(&map.apply(&z)) - map.invariant(&z)).centered_frac().to_f64().abs()
    })
    .into_iter()
    .fold(0.0, f64::max);
    report.certificates.push(
        Certificate::real_less(
            "invariant-residual",
            "sup over sampled z of |u(G_N z) - u(z)| < 1e-12, u = y + g_N(x)",
            Some(big_n),
            ev.invariant_residual,
            1e-12,
            Rigor::Sampled,
        )
        .with_note(format!("{} points", cfg.budgets.sample_points)),
    );

    ev.lacunarity = lacunarity_report(&g)?;
    report.certificates.push(Certificate::real_at_most(
        "lacunarity-ratio",
        "4 <= min_j q_(j+1)/q_j",
        None,
        4.0,
        ev.lacunarity.ratio,
        Rigor::Exact,
    ));
    report.certificates.push(
        Certificate::real_at_most(
            "divergent-trend",
            "tail sum of |c_j| over the upper half of stages stays >= 1/2",
            None,
            crate::ergodic::DIVERGENCE_TOLERANCE,
            ev.lacunarity.tail,
            Rigor::Analytic,
        )
        .with_note(format!("partial sums {:?}", ev.lacunarity.partial_sums)),
    );

    // The cocycle of G_N at an angle inside I_N, solved again at the resonant center.
    let proxy_angle = Angle::Exact(proxy);
    let phi = difference_coefficients(&g, &proxy_angle);
    let q_n = last.q_u64()? as i64;
    ev.resonant_frequency = match coboundary_solve(&phi, &Angle::Exact(last.center())) {
        Err(Error::SmallDivisorZero { frequency }) => Some(frequency),
        Err(e) => return Err(e),
        Ok(_) => None,
    };
    report.certificates.push(Certificate::exact_equal(
        "resonance-detected",
        "the cohomological equation at p_N/q_N breaks at frequency -q_N",
        Some(big_n),
        Rational::from_integer(ev.resonant_frequency.unwrap_or(0)),
        Rational::from_integer(-q_n),
    ));
    let solved = coboundary_solve(&phi, &proxy_angle)?;
    let truth = sine_coefficients(&g);
    ev.recovery_error = solved
        .modes
        .iter()
        .map(|m| {
            let want: num_complex::Complex64 = truth.iter().filter(|t| t.0 == m.frequency).map(|t| t.1).sum();
            (m.g - want).norm()
        })
        .fold(if solved.modes.len() == truth.len() { 0.0 } else { f64::INFINITY }, f64::max);
    ev.recovered_partial_sums = solved.partial_sums;
    report.certificates.push(Certificate::real_less(
        "coboundary-recovery",
        "max_k |recovered g_k - g_k| < 1e-10 at an angle inside I_N",
        Some(big_n),
        ev.recovery_error,
        1e-10,
        Rigor::Analytic,
    ));

    let steps = cfg.budgets.orbit_iterates.min(MAX_BAND_STEPS);
    for (lo, hi) in [(0.0, 0.4), (0.5, 0.9)] {
        let b = band_check(&map, lo, hi, steps);
        report.certificates.push(
            Certificate::exact_equal(
                "band-invariance",
                format!("orbits started in {{u in [{lo}, {hi}]}} never leave it"),
                Some(big_n),
                Rational::from_integer(b.escapes as i64),
                Rational::zero(),
            )
            .with_note(format!("{} starts, {} steps, drift {:.3e}", b.starts, b.steps, b.max_drift)),
        );
        ev.bands.push(b);
    }
    Ok(())
}
