use serde::{Deserialize, Serialize};

use crate::analysis::{iterate_samples, kronecker, kronecker2};
use crate::certificate::{Certificate, Rigor};
use crate::ergodic::{density_check, DensityReport};
use crate::error::{Error, Result};
use crate::par;
use crate::schedule::{Schedule, Variant};
use crate::torusmaps::{SkewMap, TorusPoint};

use super::{certified_stage, finish_schedule, Evidence, RunConfig, RunReport};

/// Starting points per angle in the limit-closeness check.
const LIMIT_POINTS: usize = 64;

/// `sup |G_n^i − G_N^i|` over `i ≤ q_(n+1)`, sampled angles in `I_N` and starting points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCloseness {
    pub stage: usize,
    pub horizon: u64,
    pub sampled: f64,
    /// `Σ_(j=n+1..N) eps_j`, the telescoped iterate tolerances.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearizableEvidence {
    pub density: Vec<DensityReport>,
    pub limit: Vec<LimitCloseness>,
}

/// Stages whose curve is checked against `eps`: `m` is the first stage with `1/q_m ≤ eps`
/// and `n ≥ m` the first whose amplitudes from `m` sum to at least two.
pub fn density_stages(sched: &Schedule, eps: f64) -> Option<(usize, usize)> {
    let m = (1..=sched.len()).find(|&j| sched.stage(j).ok().and_then(|s| s.q_u64().ok()).is_some_and(|q| 1.0 / q as f64 <= eps))?;
    let mut acc = 0.0;
    for n in m..=sched.len() {
        acc += sched.stages[n - 1].c;
        if acc >= 2.0 {
            return Some((m, n));
        }
    }
    Some((m, sched.len()))
}

pub(crate) fn limit_closeness(sched: &Schedule, n: usize, cfg: &RunConfig) -> Result<LimitCloseness> {
    let big_n = sched.len();
    let horizon = sched.stage(n + 1)?.q_u64()?;
    let alphas = sched.stage(big_n)?.interval.grid(cfg.budgets.alpha_samples.saturating_sub(1).max(1));
    let counts = iterate_samples(horizon, 512);
    let starts: Vec<TorusPoint> = (0..LIMIT_POINTS).map(|j| TorusPoint::new(kronecker(j), kronecker2(j))).collect();
    let mut sampled = 0.0f64;
    for a in alphas {
        let early = SkewMap::stage(a.clone(), sched, 1, n)?;
        let late = SkewMap::stage(a, sched, 1, big_n)?;
        let worst = par::map(starts.clone(), |z| {
            counts.iter().map(|&i| early.iterate(&z, i).distance(&late.iterate(&z, i))).fold(0.0, f64::max)
        });
        sampled = worst.into_iter().fold(sampled, f64::max);
    }
    let bound = (n + 1..=big_n).map(|j| sched.stages[j - 1].eps).sum();
    Ok(LimitCloseness { stage: n, horizon, sampled, bound })
}

/// Dense-curve construction: unit (or any divergent) amplitudes; the limit has dense
/// invariant curves and so is not conjugate to a rotation.
pub fn run_nonlinearizable(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if !cfg.policy.amplitudes.diverges() {
        return Err(Error::PrereqViolated("dense curves need a divergent amplitude series".into()));
    }
    let mut report = RunReport {
        variant: Variant::NonLinearizable,
        config: cfg.clone(),
        schedule: Schedule::default(),
        certificates: Vec::new(),
        norm_chain: Vec::new(),
        evidence: Evidence::Nonlinearizable(NonlinearizableEvidence { density: vec![], limit: vec![] }),
        artifacts: Vec::new(),
        error: None,
    };
    let mut ev = NonlinearizableEvidence { density: vec![], limit: vec![] };
    if let Err(e) = body(cfg, &mut report, &mut ev) {
        report.error = Some(e.to_string());
    }
    report.evidence = Evidence::Nonlinearizable(ev);
    Ok(report)
}

fn body(cfg: &RunConfig, report: &mut RunReport, ev: &mut NonlinearizableEvidence) -> Result<()> {
    let mut sched = Schedule::default();
    let mut stage_result = Ok(());
    for n in 1..=cfg.stages {
        stage_result = certified_stage(&mut sched, cfg, cfg.policy.amplitudes.amplitude(n), None, None, &[], &mut report.certificates);
        report.schedule = sched.clone();
        if stage_result.is_err() {
            break;
        }
    }
    stage_result?;
    finish_schedule(&sched, cfg, report)?;

    for &eps in &cfg.eps_ladder {
        let (m, n) = density_stages(&sched, eps)
            .ok_or_else(|| Error::PrereqViolated(format!("no stage has 1/q_m <= {eps}; add stages")))?;
        let d = density_check(m, n, &sched, eps, cfg.budgets.orbit_iterates)?;
        report.certificates.extend(d.certificates.iter().cloned());
        ev.density.push(d);
    }
    for n in 1..sched.len() {
        let lc = limit_closeness(&sched, n, cfg)?;
        report.certificates.push(
            Certificate::real_less(
                "limit-closeness",
                "max over sampled alpha in I_N, z and i <= q_(n+1) of |G_n^i z - G_N^i z| < sum of later eps_j",
                Some(n),
                lc.sampled,
                lc.bound,
                Rigor::Sampled,
            )
            .with_note(format!("{} iterates", lc.horizon)),
        );
        ev.limit.push(lc);
    }
    Ok(())
}
