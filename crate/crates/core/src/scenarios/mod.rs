//! End-to-end runs of the three constructions: a schedule is grown stage by stage, each
//! stage interval is certified, and variant-specific evidence is gathered at the end.
//!
//! Runs are deterministic functions of their [`RunConfig`]; the seed drives every random
//! sample. Scaled runs use the direct interval rule at strip width zero and record the
//! half-widths the derivative chain would have given, so the gap stays visible.

mod family;
mod minimal;
mod nonlinearizable;
mod offset;
mod uniquely_ergodic;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{conjugation_bound, stage_difference, stage_interval, IntervalRule, RefineOptions};
use crate::certificate::{all_pass, Certificate, Rigor};
use crate::error::{Error, Result};
use crate::rational::Interval;
use crate::schedule::{grow_stage, validate_schedule, GrowthPolicy, Schedule, Variant};
use crate::torusmaps::TorusPoint;

pub use family::{enumerate_family, frequency_order, ObservableFamily};
pub use minimal::{run_minimal_nonergodic, BandCheck, MinimalEvidence};
pub use nonlinearizable::{density_stages, run_nonlinearizable, LimitCloseness, NonlinearizableEvidence};
pub use offset::{offset_family_check, OffsetCheck};
pub use uniquely_ergodic::{
    run_uniquely_ergodic, search_amplitude, AmplitudeSearch, BesselProbe, Decomposition, UniqueEvidence, UniqueStage,
    WindowSummary,
};

/// Work limits shared by every pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub quadrature_points: u64,
    /// Longest orbit simulated per starting point.
    pub orbit_iterates: u64,
    /// Angles sampled per interval.
    pub alpha_samples: u32,
    pub bisection_depth: u32,
    /// Starting points form a `z_grid × z_grid` lattice.
    pub z_grid: usize,
    /// Points per sampled sup-norm.
    pub sample_points: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            quadrature_points: 1 << 26,
            orbit_iterates: 1_000_000,
            alpha_samples: 20,
            bisection_depth: 200,
            z_grid: 16,
            sample_points: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub variant: Variant,
    pub stages: usize,
    pub policy: GrowthPolicy,
    /// Number of observables in the uniform-convergence family.
    pub family_size: usize,
    /// Density tolerances checked by the dense-curve run.
    pub eps_ladder: Vec<f64>,
    pub rule: IntervalRule,
    pub budgets: Budgets,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: Variant::NonLinearizable,
            stages: 2,
            policy: scaled_policy(),
            family_size: 3,
            eps_ladder: vec![0.5, 0.25],
            rule: IntervalRule::Direct,
            budgets: Budgets::default(),
            seed: 0,
        }
    }
}

/// Growth base 2, unit amplitudes, strip width zero: small enough denominators for three
/// evaluable stages.
pub fn scaled_policy() -> GrowthPolicy {
    GrowthPolicy { base: 2, strip_r: Some(0.0), ..GrowthPolicy::default() }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        let b = &self.budgets;
        if self.stages == 0 {
            return Err(Error::InvalidArgument("stages must be at least 1".into()));
        }
        if b.quadrature_points == 0
            || b.orbit_iterates == 0
            || b.alpha_samples == 0
            || b.z_grid == 0
            || b.sample_points == 0
        {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        if self.eps_ladder.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::InvalidArgument("density tolerances must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub(crate) fn refine_options(&self) -> RefineOptions {
        RefineOptions { rule: self.rule, max_depth: self.budgets.bisection_depth, ..RefineOptions::default() }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Per-stage closeness of consecutive stage maps at `r = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormChainEntry {
    pub stage: usize,
    pub eps: f64,
    pub alpha_samples: usize,
    /// Sampled `max_α |G_n − G_(n−1)|_0`.
    pub sampled: f64,
    /// `max_α 2 c_n |sin π(q_n α − p_n)|`.
    pub closed_form: f64,
    pub ln_half_width: f64,
    /// Half-width the derivative chain would certify at the policy's strip width.
    pub ln_rigorous_half_width: Option<f64>,
}

/// A file written alongside the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub kind: String,
    pub path: String,
    pub rows: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Nonlinearizable(NonlinearizableEvidence),
    MinimalNonErgodic(MinimalEvidence),
    UniquelyErgodic(UniqueEvidence),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: Variant,
    pub config: RunConfig,
    pub schedule: Schedule,
    pub certificates: Vec<Certificate>,
    pub norm_chain: Vec<NormChainEntry>,
    pub evidence: Evidence,
    pub artifacts: Vec<Artifact>,
    /// Set when a budget ran out; everything before the failure is kept.
    pub error: Option<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && all_pass(&self.certificates)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Certificate> {
        self.certificates.iter().filter(|c| !c.pass)
    }
}

/// Appends stage `n = len + 1` with amplitude `c` and certifies its interval: the
/// conjugation closeness at `eps_n`, `q_n` iterates at `eps_n` and every `extra` iterate
/// requirement.
pub(crate) fn certified_stage(
    sched: &mut Schedule,
    cfg: &RunConfig,
    c: f64,
    target: Option<&Interval>,
    s_min: Option<num_bigint::BigInt>,
    extra: &[(u64, f64)],
    certs: &mut Vec<Certificate>,
) -> Result<()> {
    let n = sched.len() + 1;
    let st = grow_stage(sched, &cfg.policy, c, target, s_min)?;
    sched.stages.push(st);
    let q = sched.stage(n)?.q_u64()?;
    let eps = cfg.policy.eps(n);
    let mut iterates = vec![(q, eps)];
    iterates.extend_from_slice(extra);
    let si = stage_interval(n, sched, cfg.policy.strip(n), eps, &iterates, &cfg.refine_options())?;
    sched.stages[n - 1].interval = si.interval;
    certs.extend(si.certificates);
    Ok(())
}

/// Sampled and closed-form closeness of stage `n` to stage `n − 1` over the angle grid of
/// `I_n`, with its certificate.
pub(crate) fn norm_chain_entry(sched: &Schedule, n: usize, cfg: &RunConfig) -> Result<(NormChainEntry, Certificate)> {
    let st = sched.stage(n)?;
    let alphas = st.interval.grid(cfg.budgets.alpha_samples.saturating_sub(1).max(1));
    let mut sampled = 0.0f64;
    let mut closed = 0.0f64;
    for a in &alphas {
        let (s, c) = stage_difference(sched, n, a, cfg.budgets.sample_points)?;
        sampled = sampled.max(s);
        closed = closed.max(c);
    }
    let r = cfg.policy.strip(n);
    let ln_rigorous = (1..=n)
        .map(|m| conjugation_bound(sched, m, n, r, st.eps).map(|b| b.ln_half_width))
        .collect::<Result<Vec<f64>>>()
        .ok()
        .and_then(|v| v.into_iter().reduce(f64::min));
    let cert = Certificate::real_less(
        "norm-chain",
        "max over sampled alpha in I_n of |G_n - G_(n-1)|_0 < eps_n",
        Some(n),
        sampled,
        st.eps,
        Rigor::Sampled,
    )
    .with_note(format!("{} angles, {} points each, closed form {closed:.6e}", alphas.len(), cfg.budgets.sample_points));
    let entry = NormChainEntry {
        stage: n,
        eps: st.eps,
        alpha_samples: alphas.len(),
        sampled,
        closed_form: closed,
        ln_half_width: st.interval.half_width.ln(),
        ln_rigorous_half_width: ln_rigorous,
    };
    Ok((entry, cert))
}

/// Structural certificates of the finished schedule plus its norm chain.
pub(crate) fn finish_schedule(sched: &Schedule, cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    report.certificates.extend(validate_schedule(sched, Variant::NonLinearizable, &cfg.policy));
    for n in 1..=sched.len() {
        let (entry, cert) = norm_chain_entry(sched, n, cfg)?;
        report.norm_chain.push(entry);
        report.certificates.push(cert);
    }
    Ok(())
}

/// `count` uniformly random torus points from the run's seed.
pub(crate) fn random_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<TorusPoint> {
    (0..count).map(|_| TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

/// Builds a schedule-only run: stages certified as in the dense-curve construction.
pub fn certified_schedule(cfg: &RunConfig) -> Result<(Schedule, Vec<Certificate>)> {
    cfg.validate()?;
    let mut sched = Schedule::default();
    let mut certs = Vec::new();
    for n in 1..=cfg.stages {
        certified_stage(&mut sched, cfg, cfg.policy.amplitudes.amplitude(n), None, None, &[], &mut certs)?;
    }
    certs.extend(validate_schedule(&sched, cfg.variant, &cfg.policy));
    Ok((sched, certs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_defaults_fill_in() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        let partial: RunConfig = serde_json::from_str(r#"{"stages": 3, "budgets": {"z_grid": 4}}"#).unwrap();
        assert_eq!(partial.stages, 3);
        assert_eq!(partial.budgets.z_grid, 4);
        assert_eq!(partial.budgets.alpha_samples, 20);
    }

    #[test]
    fn invalid_budgets_rejected() {
        let mut cfg = RunConfig::default();
        cfg.budgets.orbit_iterates = 0;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { stages: 0, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn literal_base_schedule() {
        let cfg = RunConfig {
            policy: GrowthPolicy { base: 10, strip_r: Some(0.0), ..GrowthPolicy::default() },
            ..RunConfig::default()
        };
        let (sched, certs) = certified_schedule(&cfg).unwrap();
        let qs: Vec<u64> = sched.stages.iter().map(|s| s.q_u64().unwrap()).collect();
        assert_eq!(qs, vec![4, 40016]);
        assert!(all_pass(&certs), "{certs:#?}");
    }
}
