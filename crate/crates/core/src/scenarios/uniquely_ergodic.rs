//! Fast-growing amplitudes: Birkhoff averages of every observable in a growing family
//! converge to the Lebesgue mean, uniformly on windows of angles that nest down to the
//! limit rotation number.
//!
//! Stage `n` is analysed on its own (curve means, a uniform window) and then compared with
//! stage `n + 1`, which is built inside the window. A run of `N` stages therefore builds a
//! closing stage `N + 1`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Rigor};
use crate::ergodic::{
    base_angle, birkhoff_average, lattice, observe, oscillatory_certificate, pure_x_partial_sum, stage_map,
    term_integral, term_points, uniform_window, window_deviation, Observable, OscillatoryOptions, OscillatoryReport,
    MeasureProfile, WindowOptions,
};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{Interval, Rational};
use crate::schedule::{choose_subdivision, slope_bound, AmplitudeProfile, Schedule, SubdivisionConstants, Variant};
use crate::special::bessel_j0;
use crate::torusmaps::{coboundary_series, InvariantCurve, SkewMap, TorusPoint};

use super::{certified_stage, enumerate_family, finish_schedule, Evidence, ObservableFamily, RunConfig, RunReport};

const PI: f64 = std::f64::consts::PI;
const MAX_DOUBLINGS: u32 = 256;
/// Slack factor in the stage-to-stage bound on averaged differences.
const AVERAGED_FACTOR: f64 = 7.0;
/// Slack factor in the final three-term bound.
const LIMIT_FACTOR: f64 = 10.0;

/// Outcome of doubling `c` until every character clears the analytic part of the
/// oscillatory certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSearch {
    pub start: f64,
    pub c: f64,
    pub doublings: u32,
    /// Largest subdivision count over the characters.
    pub s: u64,
    pub feasible: bool,
}

fn analytic_ok(amplitude: f64, eps: f64, k: &SubdivisionConstants) -> (bool, u64) {
    let ch = choose_subdivision(amplitude, eps, k);
    let s = ch.s as f64;
    let ok = amplitude >= 1.0
        && ch.feasible
        && 2.0 * PI.powi(3) * amplitude / (s * s) < eps / 2.0
        && 4.0 * s / amplitude * (2.0 + s.ln()) < eps / 2.0;
    (ok, ch.s)
}

/// Smallest `start · 2^j` for which every `(k, l)` passes the amplitude floor, the
/// subdivision window, the linearization error and the ladder sum at `eps`.
pub fn search_amplitude(start: f64, characters: &[(i64, i64)], eps: f64, k: &SubdivisionConstants) -> AmplitudeSearch {
    let mut c = start;
    for doublings in 0..=MAX_DOUBLINGS {
        let checks: Vec<(bool, u64)> =
            characters.iter().map(|&(_, l)| analytic_ok(l.unsigned_abs() as f64 * c, eps, k)).collect();
        if checks.iter().all(|r| r.0) {
            let s = checks.iter().map(|r| r.1).max().unwrap_or(0);
            return AmplitudeSearch { start, c, doublings, s, feasible: true };
        }
        c *= 2.0;
    }
    AmplitudeSearch { start, c, doublings: MAX_DOUBLINGS, s: 0, feasible: false }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub alpha0: Rational,
    /// Intersection of the per-observable windows.
    pub interval: Interval,
    pub k: Vec<u64>,
    pub clipped: Vec<bool>,
    /// `max_f τ_f`.
    pub tau: u64,
    /// `⌊max ‖f‖ / eps⌋ + 1`.
    pub a: u64,
    /// `(τ + 1) a`, the horizon handed to the next stage.
    pub horizon: u64,
    /// Worst resampled `|avg_k − curve mean|` over `k ∈ [τ, resample_hi]`.
    pub resample_deviation: f64,
    pub resample_hi: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniqueStage {
    pub stage: usize,
    pub eps: f64,
    pub amplitude: f64,
    pub search: Option<AmplitudeSearch>,
    pub oscillatory: Vec<OscillatoryReport>,
    /// `sup_u |curve mean − Lebesgue mean|` per observable.
    pub mean_distance: Vec<f64>,
    pub window: WindowSummary,
    /// `max |f(G_(n+1)^i z) − f(G_n^i z)|` at `i ∈ {1, τ, T}`.
    pub observable_closeness: Option<f64>,
    /// `max |avg_k(G_(n+1)) − avg_k(G_n)|` for `k` in `[τ, averaged_horizon]`.
    pub averaged_difference: Option<f64>,
    pub averaged_horizon: Option<u64>,
}

/// `avg_k(G_(N+1)) − f̂ = I + II + III`: stage step, window average, curve mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub k: u64,
    pub stage_step: f64,
    pub window_average: f64,
    pub curve_mean: f64,
    pub total: f64,
    /// Directly sampled `max |avg_k(G_(N+1)) − f̂|`.
    pub direct: f64,
    pub bound: f64,
}

/// Quadrature of `∫ e^{2πiΓ_1}` against `J_0(2π c_1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselProbe {
    pub c: f64,
    pub points: u64,
    pub quadrature: f64,
    pub bessel: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniqueEvidence {
    pub family: Vec<String>,
    pub stages: Vec<UniqueStage>,
    pub decomposition: Option<Decomposition>,
    pub bessel: Option<BesselProbe>,
}

/// Characters with `l ≠ 0`, one per conjugate pair.
fn y_characters(family: &ObservableFamily) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for f in &family.members {
        for t in &f.terms {
            if t.l == 0 {
                continue;
            }
            let canon = if t.l > 0 { (t.k, t.l) } else { (-t.k, -t.l) };
            if !out.contains(&canon) {
                out.push(canon);
            }
        }
    }
    out
}

/// Tolerance per character so the observable's non-constant part stays below `eps`.
fn character_eps(family: &ObservableFamily, eps: f64) -> f64 {
    let worst = family
        .members
        .iter()
        .map(|f| f.terms.iter().filter(|t| t.k != 0 || t.l != 0).map(|t| t.coeff.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if worst > 0.0 {
        eps / worst
    } else {
        eps
    }
}

/// `max_f Σ |coeff| 2π|l|`, the Lipschitz constant of the family in `y`.
fn lipschitz_y(family: &ObservableFamily) -> f64 {
    family
        .members
        .iter()
        .map(|f| f.terms.iter().map(|t| t.coeff.norm() * 2.0 * PI * t.l.unsigned_abs() as f64).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Birkhoff average `S_k / (k + 1)`, in closed form when `f` ignores `y`.
fn average(map: &SkewMap, f: &Observable, z: &TorusPoint, k: u64) -> Result<Complex64> {
    if f.x_only() {
        Ok(pure_x_partial_sum(f, z.x, map.alpha_dd(), k) / (k + 1) as f64)
    } else {
        Ok(birkhoff_average(map, f, z, k, Complex64::new(0.0, 0.0))?.last().average)
    }
}

pub fn run_uniquely_ergodic(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.family_size == 0 {
        return Err(Error::InvalidArgument("the observable family must not be empty".into()));
    }
    let mut cfg = cfg.clone();
    cfg.variant = Variant::UniquelyErgodic;
    let family = enumerate_family(cfg.family_size);
    let mut report = RunReport {
        variant: Variant::UniquelyErgodic,
        config: cfg.clone(),
        schedule: Schedule::default(),
        certificates: Vec::new(),
        norm_chain: Vec::new(),
        evidence: Evidence::UniquelyErgodic(UniqueEvidence {
            family: family.labels(),
            stages: vec![],
            decomposition: None,
            bessel: None,
        }),
        artifacts: Vec::new(),
        error: None,
    };
    let mut ev = UniqueEvidence { family: family.labels(), stages: vec![], decomposition: None, bessel: None };
    let mut sched = Schedule::default();
    if let Err(e) = body(&cfg, &family, &mut sched, &mut report, &mut ev) {
        report.error = Some(e.to_string());
    }
    report.schedule = sched;
    report.evidence = Evidence::UniquelyErgodic(ev);
    Ok(report)
}

fn body(
    cfg: &RunConfig,
    family: &ObservableFamily,
    sched: &mut Schedule,
    report: &mut RunReport,
    ev: &mut UniqueEvidence,
) -> Result<()> {
    let big_n = cfg.stages;
    let chars = y_characters(family);
    let lip_y = lipschitz_y(family);
    let constants = cfg.policy.subdivision;
    let osc_opts = OscillatoryOptions {
        constants,
        quadrature_budget: cfg.budgets.quadrature_points,
        ..OscillatoryOptions::default()
    };
    let win_opts = WindowOptions {
        z_grid: cfg.budgets.z_grid,
        max_horizon: cfg.budgets.orbit_iterates.max(64),
        quadrature_budget: cfg.budgets.quadrature_points,
        ..WindowOptions::default()
    };
    let mut target: Option<Interval> = None;
    let mut extra: Vec<(u64, f64)> = Vec::new();

    for n in 1..=big_n + 1 {
        let eps = cfg.policy.eps(n);
        let eps_char = character_eps(family, eps);
        let (c, search) = match cfg.policy.amplitudes {
            AmplitudeProfile::CertificateDriven { start } if !chars.is_empty() => {
                let s = search_amplitude(start, &chars, eps_char, &constants);
                if !s.feasible {
                    return Err(Error::BudgetExceeded(format!("no amplitude below {:.3e} clears stage {n}", s.c)));
                }
                (s.c, Some(s))
            }
            ref p => (p.amplitude(n), None),
        };
        // Room for the slope condition (|l| β + |k|) s < q_n.
        let s_min = if chars.is_empty() {
            None
        } else {
            let beta = slope_bound(&sched.stages);
            let q_prev = sched.stages.last().map_or(1.0, |s| s.q_u64().map_or(f64::INFINITY, |q| q as f64));
            let need = chars
                .iter()
                .map(|&(k, l)| {
                    let s = choose_subdivision(l.unsigned_abs() as f64 * c, eps_char, &constants).s as f64;
                    (l.unsigned_abs() as f64 * beta + k.unsigned_abs() as f64) * s / (4.0 * q_prev)
                })
                .fold(0.0, f64::max);
            BigInt::from_f64(need.floor() + 1.0)
        };
        let res = certified_stage(sched, cfg, c, target.as_ref(), s_min, &extra, &mut report.certificates);
        report.schedule = sched.clone();
        res?;

        if n >= 2 {
            compare_stages(cfg, family, sched, n - 1, &mut ev.stages[n - 2], &mut report.certificates)?;
        }
        if n == big_n + 1 {
            break;
        }

        let g = coboundary_series(1, n, sched)?;
        let mut oscillatory = Vec::new();
        for &(k, l) in &chars {
            let r = oscillatory_certificate(n, sched, k, l, eps_char, &osc_opts)?;
            report.certificates.extend(r.certificates.iter().cloned());
            oscillatory.push(r);
        }
        let mut mean_distance = Vec::new();
        for f in &family.members {
            let d = MeasureProfile::new(f, &g, cfg.budgets.quadrature_points)?.distance_to_lebesgue();
            report.certificates.push(Certificate::real_less(
                "mean-closeness",
                format!("sup_u |mean of {} on y = u - g_n(x) - Lebesgue mean| < eps_n", f.label),
                Some(n),
                d,
                eps,
                Rigor::Analytic,
            ));
            mean_distance.push(d);
        }

        let window = stage_window(cfg, family, sched, n, eps, &win_opts, &mut report.certificates)?;
        target = Some(window.interval.clone());
        extra = if lip_y > 0.0 { vec![(window.horizon, eps / lip_y)] } else { Vec::new() };
        if n == 1 {
            ev.bessel = bessel_probe(sched)?;
        }
        ev.stages.push(UniqueStage {
            stage: n,
            eps,
            amplitude: c,
            search,
            oscillatory,
            mean_distance,
            window,
            observable_closeness: None,
            averaged_difference: None,
            averaged_horizon: None,
        });
    }

    finish_schedule(sched, cfg, report)?;
    let dec = decomposition(cfg, family, sched, &ev.stages[big_n - 1])?;
    report.certificates.push(
        Certificate::real_less(
            "birkhoff-limit",
            "stage step + window average + curve mean < 10 eps_N at k = T_N",
            Some(big_n),
            dec.total,
            dec.bound,
            Rigor::Sampled,
        )
        .with_note(format!("k = {}, direct deviation {:.3e}", dec.k, dec.direct)),
    );
    ev.decomposition = Some(dec);
    Ok(())
}

fn stage_window(
    cfg: &RunConfig,
    family: &ObservableFamily,
    sched: &Schedule,
    n: usize,
    eps: f64,
    opts: &WindowOptions,
    certs: &mut Vec<Certificate>,
) -> Result<WindowSummary> {
    let interval = sched.stage(n)?.interval.clone();
    let mut windows = Vec::new();
    for f in &family.members {
        let w = uniform_window(n, sched, f, eps, &interval, opts)?;
        certs.extend(w.certificates.iter().cloned());
        windows.push(w);
    }
    let alpha0 = windows[0].alpha0.clone();
    let half = windows.iter().map(|w| w.interval.half_width.clone()).reduce(|a, b| Rational::min(&a, &b)).expect("family is non-empty");
    let window = Interval::new(alpha0.clone(), half);
    let tau = windows.iter().map(|w| w.tau).max().unwrap_or(1);
    let a = (family.max_sup() / eps).floor() as u64 + 1;
    let horizon = (tau + 1).saturating_mul(a);
    let all_x = family.members.iter().all(Observable::x_only);
    let resample_hi = if all_x { 2 * tau } else { (2 * tau).min(tau + cfg.budgets.orbit_iterates) };
    let mut resample_deviation = 0.0f64;
    for f in &family.members {
        let d = window_deviation(
            n,
            sched,
            f,
            &window,
            cfg.budgets.alpha_samples,
            cfg.budgets.z_grid,
            tau,
            resample_hi,
            cfg.budgets.quadrature_points,
        )?;
        resample_deviation = resample_deviation.max(d);
    }
    certs.push(
        Certificate::real_less(
            "window-resample",
            "max over sampled alpha in the window, z and k in [tau, 2 tau] of |avg_k - curve mean| < eps_n",
            Some(n),
            resample_deviation,
            eps,
            Rigor::Sampled,
        )
        .with_note(format!("tau = {tau}, k up to {resample_hi}")),
    );
    Ok(WindowSummary {
        alpha0,
        interval: window,
        k: windows.iter().map(|w| w.k).collect(),
        clipped: windows.iter().map(|w| w.clipped).collect(),
        tau,
        a,
        horizon,
        resample_deviation,
        resample_hi,
    })
}

/// Closeness of stage `n + 1` to stage `n` on the window of stage `n`.
fn compare_stages(
    cfg: &RunConfig,
    family: &ObservableFamily,
    sched: &Schedule,
    n: usize,
    st: &mut UniqueStage,
    certs: &mut Vec<Certificate>,
) -> Result<()> {
    let next = sched.stage(n + 1)?.interval.clone();
    let (tau, big_t) = (st.window.tau, st.window.horizon);
    let starts = lattice(cfg.budgets.z_grid);
    let mut closeness = 0.0f64;
    for alpha in next.grid(cfg.budgets.alpha_samples.saturating_sub(1).max(1)) {
        let early = stage_map(n, sched, alpha.clone())?;
        let late = stage_map(n + 1, sched, alpha)?;
        let worst = par::map(starts.clone(), |z| {
            let mut w = 0.0f64;
            for i in [1, tau, big_t] {
                let (p, q) = (early.iterate(&z, i), late.iterate(&z, i));
                for f in &family.members {
                    w = w.max((f.eval(p.x, p.y) - f.eval(q.x, q.y)).norm());
                }
            }
            w
        });
        closeness = worst.into_iter().fold(closeness, f64::max);
    }
    certs.push(Certificate::real_less(
        "observable-closeness",
        "max over sampled alpha in I_(n+1), z, f and i in {1, tau, T} of |f(G_(n+1)^i z) - f(G_n^i z)| < eps_n",
        Some(n),
        closeness,
        st.eps,
        Rigor::Sampled,
    ));
    st.observable_closeness = Some(closeness);

    let alpha = base_angle(&next);
    let early = stage_map(n, sched, alpha.clone())?;
    let late = stage_map(n + 1, sched, alpha)?;
    let all_x = family.members.iter().all(Observable::x_only);
    let hi = if all_x { big_t } else { big_t.min(cfg.budgets.orbit_iterates) };
    let lo = tau.min(hi);
    let diffs = par::map(starts, |z| -> Result<f64> {
        let mut worst = 0.0f64;
        for f in &family.members {
            if f.x_only() {
                for k in crate::ergodic::k_samples(lo, hi, 257) {
                    worst = worst.max((average(&late, f, &z, k)? - average(&early, f, &z, k)?).norm());
                }
            } else {
                let mut a = Vec::with_capacity((hi + 1) as usize);
                observe(&early, f, &z, hi, &mut |_, v| a.push(v));
                let (mut sa, mut sb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                observe(&late, f, &z, hi, &mut |i, v| {
                    sa += a[i as usize];
                    sb += v;
                    if i >= lo {
                        worst = worst.max(((sb - sa) / (i + 1) as f64).norm());
                    }
                });
            }
        }
        Ok(worst)
    });
    let diff = diffs.into_iter().try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
    certs.push(
        Certificate::real_at_most(
            "averaged-difference",
            "max over z, f and k in [tau, T] of |avg_k(G_(n+1)) - avg_k(G_n)| <= 7 eps_n",
            Some(n),
            diff,
            AVERAGED_FACTOR * st.eps,
            Rigor::Sampled,
        )
        .with_note(format!("k in [{lo}, {hi}]")),
    );
    st.averaged_difference = Some(diff);
    st.averaged_horizon = Some(hi);
    Ok(())
}

fn decomposition(cfg: &RunConfig, family: &ObservableFamily, sched: &Schedule, last: &UniqueStage) -> Result<Decomposition> {
    let n = last.stage;
    let all_x = family.members.iter().all(Observable::x_only);
    let k = if all_x { last.window.horizon } else { last.window.tau.min(cfg.budgets.orbit_iterates) };
    let alpha = base_angle(&sched.stage(n + 1)?.interval);
    let early = stage_map(n, sched, alpha.clone())?;
    let late = stage_map(n + 1, sched, alpha)?;
    let g = coboundary_series(1, n, sched)?;
    let profiles: Vec<MeasureProfile> = family
        .members
        .iter()
        .map(|f| MeasureProfile::new(f, &g, cfg.budgets.quadrature_points))
        .collect::<Result<_>>()?;
    let rows = par::map(lattice(cfg.budgets.z_grid), |z| -> Result<[f64; 4]> {
        let mut w = [0.0f64; 4];
        for (f, prof) in family.members.iter().zip(&profiles) {
            let a_late = average(&late, f, &z, k)?;
            let a_early = average(&early, f, &z, k)?;
            let curve = prof.mean_on_curve(early.invariant(&z));
            let terms = [(a_late - a_early).norm(), (a_early - curve).norm(), (curve - f.mean()).norm(), (a_late - f.mean()).norm()];
            for (slot, v) in w.iter_mut().zip(terms) {
                *slot = slot.max(v);
            }
        }
        Ok(w)
    });
    let mut w = [0.0f64; 4];
    for r in rows {
        for (slot, v) in w.iter_mut().zip(r?) {
            *slot = slot.max(v);
        }
    }
    Ok(Decomposition {
        k,
        stage_step: w[0],
        window_average: w[1],
        curve_mean: w[2],
        total: w[0] + w[1] + w[2],
        direct: w[3],
        bound: LIMIT_FACTOR * last.eps,
    })
}

fn bessel_probe(sched: &Schedule) -> Result<Option<BesselProbe>> {
    let g = coboundary_series(1, 1, sched)?;
    let Some(&(c, _)) = g.terms().first() else { return Ok(None) };
    let points = term_points(0, 1, &g);
    let quadrature = term_integral(0, 1, &InvariantCurve { y0: 0.0, g }, points).re;
    let bessel = bessel_j0(2.0 * PI * c);
    Ok(Some(BesselProbe { c, points, quadrature, bessel, difference: (quadrature - bessel).abs() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_search_doubles_until_feasible() {
        let k = SubdivisionConstants::profile();
        let s = search_amplitude(1.0, &[(0, 1)], 1.0, &k);
        assert!(s.feasible && s.doublings > 0);
        assert!(!analytic_ok(s.c / 2.0, 1.0, &k).0);
        assert!(analytic_ok(s.c, 1.0, &k).0);
        let none = search_amplitude(3.0, &[], 0.1, &k);
        assert_eq!((none.c, none.doublings), (3.0, 0));
    }

    #[test]
    fn x_only_family_run_passes() {
        let mut cfg = RunConfig { stages: 1, ..RunConfig::default() };
        cfg.budgets.z_grid = 4;
        cfg.budgets.alpha_samples = 4;
        let r = run_uniquely_ergodic(&cfg).unwrap();
        assert!(r.passed(), "{:?} {:#?}", r.error, r.failures().collect::<Vec<_>>());
        assert_eq!(r.schedule.len(), 2);
        let Evidence::UniquelyErgodic(ev) = &r.evidence else { panic!() };
        assert_eq!(ev.family, vec!["1", "cos 2pi(x)", "sin 2pi(x)"]);
        let probe = ev.bessel.as_ref().unwrap();
        assert!(probe.difference < 1e-12, "{probe:?}");
        let st = &ev.stages[0];
        assert_eq!(st.observable_closeness, Some(0.0));
    }

    #[test]
    fn y_characters_are_canonical() {
        let fam = enumerate_family(7);
        assert_eq!(y_characters(&fam), vec![(-1, 1), (0, 1)]);
        assert!((lipschitz_y(&fam) - 2.0 * PI).abs() < 1e-15);
    }
}
