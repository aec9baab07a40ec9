use std::path::Path;

use akconj_core::ergodic::{
    base_angle, birkhoff_average, density_check, oscillatory_certificate, Dynamics, MeasureProfile, OscillatoryOptions,
};
use akconj_core::scenarios::{
    certified_schedule, density_stages, run_minimal_nonergodic, run_nonlinearizable, run_uniquely_ergodic, Evidence,
    RunReport,
};
use akconj_core::schedule::{GrowthPolicy, Schedule, Variant};
use akconj_core::torusmaps::{coboundary_series, SkewMap, TorusPoint, TrigSeries};
use akconj_core::{all_pass, validate_schedule, Certificate};
use akconj_core::dd::Dd;
use serde::{Deserialize, Serialize};

use crate::args::{Command, MeasureArgs, OrbitArgs, ReportArgs, RunArgs, VerifyArgs};
use crate::config::{parse_observable, resolve};
use crate::output::{num, Output};
use crate::svg::Plot;
use crate::CliError;

/// Largest frequency drawn in curve plots; beyond it a polyline is only noise.
const MAX_PLOTTED_FREQUENCY: u64 = 4096;
const MAX_SCATTER: usize = 4000;

pub fn dispatch(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Schedule(a) => schedule(&a),
        Command::Verify(a) => verify(&a),
        Command::Orbit(a) => orbit(&a),
        Command::Density(a) => density(&a),
        Command::Measure(a) => measure(&a),
        Command::Theorem1(a) => theorem(&a, Variant::NonLinearizable),
        Command::Theorem2(a) => theorem(&a, Variant::MinimalNonErgodic),
        Command::Theorem3(a) => theorem(&a, Variant::UniquelyErgodic),
        Command::Report(a) => report(&a),
    }
}

/// Schedule file as written by `schedule`, or a bare schedule.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Wrapped { schedule: Schedule, policy: Option<GrowthPolicy> },
    Bare(Schedule),
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleDoc {
    policy: GrowthPolicy,
    schedule: Schedule,
    certificates: Vec<Certificate>,
    passed: bool,
}

fn print_certificates(certs: &[Certificate]) {
    let failed: Vec<&Certificate> = certs.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        let stage = c.stage.map_or(String::from("-"), |s| s.to_string());
        println!("FAIL {} stage {stage} margin {:.3e}: {}", c.condition, c.margin, c.statement);
    }
    println!("{} certificates, {} passed, {} failed", certs.len(), certs.len() - failed.len(), failed.len());
}

fn denominators(s: &Schedule) -> String {
    s.stages.iter().map(|st| st.q.to_string()).collect::<Vec<_>>().join(", ")
}

fn certificate_rows(certs: &[Certificate]) -> Vec<Vec<String>> {
    certs
        .iter()
        .map(|c| {
            vec![
                c.condition.clone(),
                c.stage.map_or(String::new(), |s| s.to_string()),
                c.pass.to_string(),
                num(c.margin),
                format!("{:?}", c.rigor).to_lowercase(),
                c.statement.clone(),
            ]
        })
        .collect()
}

const CERT_HEADER: [&str; 6] = ["condition", "stage", "pass", "margin", "rigor", "statement"];

fn schedule(a: &RunArgs) -> Result<bool, CliError> {
    let r = resolve(a)?;
    let (sched, certs) = certified_schedule(&r.run)?;
    let passed = all_pass(&certs);
    let mut out = Output::new(r.out, r.emit);
    out.csv("certificates.csv", &CERT_HEADER, &certificate_rows(&certs))?;
    out.json("schedule.json", &ScheduleDoc { policy: r.run.policy.clone(), schedule: sched.clone(), certificates: certs.clone(), passed })?;
    println!("q = ({})", denominators(&sched));
    print_certificates(&certs);
    Ok(passed)
}

fn verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&a.schedule)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", a.schedule.display())))?;
    let file: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("parsing {}: {e}", a.schedule.display())))?;
    let r = resolve(&a.run)?;
    let (sched, policy) = match file {
        ScheduleFile::Wrapped { schedule, policy: Some(p) } if !a.run.touches_policy() => (schedule, p),
        ScheduleFile::Wrapped { schedule, .. } | ScheduleFile::Bare(schedule) => (schedule, r.run.policy.clone()),
    };
    let variant: Variant = match &a.variant {
        Some(v) => v.parse()?,
        None => Variant::NonLinearizable,
    };
    let certs = validate_schedule(&sched, variant, &policy);
    let passed = all_pass(&certs);
    if a.run.out.is_some() {
        let mut out = Output::new(r.out, r.emit);
        out.csv("verify.csv", &CERT_HEADER, &certificate_rows(&certs))?;
        out.json("verify.json", &certs)?;
    }
    println!("q = ({})", denominators(&sched));
    print_certificates(&certs);
    Ok(passed)
}

fn curve_points(g: &TrigSeries, y0: f64, samples: usize) -> Vec<(f64, f64)> {
    (0..=samples)
        .map(|i| {
            let x = i as f64 / samples as f64;
            (x, (Dd::from_f64(y0) - g.eval(Dd::from_f64(x))).frac().to_f64())
        })
        .collect()
}

fn plot_samples(g: &TrigSeries) -> Option<usize> {
    let q = g.max_frequency();
    (q <= MAX_PLOTTED_FREQUENCY).then(|| (64 * q.max(1) as usize).clamp(1024, 1 << 16))
}

#[derive(Serialize)]
struct OrbitDoc {
    stage: usize,
    alpha: String,
    observable: String,
    start: (f64, f64),
    reference: num_complex::Complex64,
    checkpoints: Vec<akconj_core::ergodic::Checkpoint>,
    certificates: Vec<Certificate>,
    passed: bool,
}

fn orbit(a: &OrbitArgs) -> Result<bool, CliError> {
    let r = resolve(&a.run)?;
    let f = parse_observable(&a.observable)?;
    if a.iterates == 0 {
        return Err(CliError::Config("at least one iterate is required".into()));
    }
    let (sched, certs) = certified_schedule(&r.run)?;
    let n = a.stage.unwrap_or(sched.len());
    let st = sched.stage(n)?;
    let alpha = base_angle(&st.interval);
    let map = SkewMap::stage(alpha.clone(), &sched, 1, n)?;
    let z0 = TorusPoint::new(a.x0, a.y0);
    let profile = MeasureProfile::new(&f, &map.g, r.run.budgets.quadrature_points)?;
    let reference = profile.mean_on_curve(map.invariant(&z0));
    let avg = birkhoff_average(&map, &f, &z0, a.iterates, reference)?;

    let mut rows = Vec::with_capacity(a.iterates as usize + 1);
    map.orbit(&z0, a.iterates, &mut |i, z| rows.push(vec![i.to_string(), num(z.xf()), num(z.yf())]));
    let mut out = Output::new(r.out, r.emit);
    out.csv("orbit.csv", &["i", "x", "y"], &rows)?;
    let cp_rows: Vec<Vec<String>> = avg
        .checkpoints
        .iter()
        .map(|c| vec![c.k.to_string(), num(c.average.re), num(c.average.im), num(c.deviation)])
        .collect();
    out.csv("checkpoints.csv", &["k", "re", "im", "deviation"], &cp_rows)?;
    {
        let mut plot = Plot::new(format!("orbit of G_{n}"));
        if let Some(samples) = plot_samples(&map.g) {
            plot.curve(&curve_points(&map.g, map.invariant(&z0).to_f64(), samples));
        }
        let pts: Vec<(f64, f64)> =
            rows.iter().take(MAX_SCATTER).map(|r| (r[1].parse().unwrap_or(0.0), r[2].parse().unwrap_or(0.0))).collect();
        plot.scatter(&pts);
        out.svg("orbit.svg", plot.finish())?;
    }
    let passed = all_pass(&certs);
    let last = avg.last().clone();
    out.json(
        "orbit.json",
        &OrbitDoc {
            stage: n,
            alpha: alpha.to_string(),
            observable: f.label.clone(),
            start: (a.x0, a.y0),
            reference,
            checkpoints: avg.checkpoints,
            certificates: certs.clone(),
            passed,
        },
    )?;
    println!("stage {n}, alpha = {alpha}, {} iterates of {}", a.iterates, f.label);
    println!("average {:.12} {:+.12}i, curve mean {:.12} {:+.12}i, deviation {:.3e}", last.average.re, last.average.im, reference.re, reference.im, last.deviation);
    print_certificates(&certs);
    Ok(passed)
}

fn density(a: &RunArgs) -> Result<bool, CliError> {
    let r = resolve(a)?;
    let (sched, mut certs) = certified_schedule(&r.run)?;
    let mut reports = Vec::new();
    for &eps in &r.run.eps_ladder {
        let (m, n) = density_stages(&sched, eps)
            .ok_or_else(|| CliError::Config(format!("no stage has 1/q_m <= {eps}; add stages")))?;
        let d = density_check(m, n, &sched, eps, r.run.budgets.orbit_iterates)?;
        certs.extend(d.certificates.iter().cloned());
        println!(
            "eps {eps}: stages {m}..{n}, min oscillation {:.6}, {}/{} cells hit",
            d.min_oscillation,
            d.cells_hit,
            d.cells_per_side * d.cells_per_side
        );
        reports.push(d);
    }
    let mut out = Output::new(r.out, r.emit);
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|d| {
            vec![
                num(d.eps),
                d.m.to_string(),
                d.n.to_string(),
                num(d.min_oscillation),
                d.cells_per_side.to_string(),
                d.cells_hit.to_string(),
                d.iterate_budget.to_string(),
            ]
        })
        .collect();
    out.csv("density.csv", &["eps", "m", "n", "min_oscillation", "cells_per_side", "cells_hit", "iterates"], &rows)?;
    if let Some(d) = reports.last() {
        let g = coboundary_series(1, d.n, &sched)?;
        if let Some(samples) = plot_samples(&g) {
            let pts = curve_points(&g, 0.0, samples);
            out.csv("curve.csv", &["x", "y"], &pts.iter().map(|(x, y)| vec![num(*x), num(*y)]).collect::<Vec<_>>())?;
            let mut plot = Plot::new(format!("invariant curve of stage {}", d.n));
            plot.curve(&pts);
            out.svg("curve.svg", plot.finish())?;
        }
    }
    out.csv("certificates.csv", &CERT_HEADER, &certificate_rows(&certs))?;
    let passed = all_pass(&certs);
    #[derive(Serialize)]
    struct Doc<'a> {
        schedule: &'a Schedule,
        density: &'a [akconj_core::ergodic::DensityReport],
        certificates: &'a [Certificate],
        passed: bool,
    }
    out.json("density.json", &Doc { schedule: &sched, density: &reports, certificates: &certs, passed })?;
    print_certificates(&certs);
    Ok(passed)
}

fn measure(a: &MeasureArgs) -> Result<bool, CliError> {
    let r = resolve(&a.run)?;
    let f = parse_observable(&a.observable)?;
    let (sched, mut certs) = certified_schedule(&r.run)?;
    let n = a.stage.unwrap_or(sched.len());
    let eps = sched.stage(n)?.eps;
    let g = coboundary_series(1, n, &sched)?;
    let profile = MeasureProfile::new(&f, &g, r.run.budgets.quadrature_points)?;
    let distance = profile.distance_to_lebesgue();
    certs.push(Certificate::real_less(
        "mean-closeness",
        format!("sup_u |mean of {} on y = u - g_n(x) - Lebesgue mean| < eps_n", f.label),
        Some(n),
        distance,
        eps,
        akconj_core::Rigor::Analytic,
    ));
    let opts = OscillatoryOptions { quadrature_budget: r.run.budgets.quadrature_points, ..OscillatoryOptions::default() };
    let mut oscillatory = Vec::new();
    for t in f.terms.iter().filter(|t| t.l > 0 || (t.l == 0 && t.k > 0)) {
        let rep = oscillatory_certificate(n, &sched, t.k, t.l, eps, &opts)?;
        certs.extend(rep.certificates.iter().cloned());
        oscillatory.push(rep);
    }
    let rows: Vec<Vec<String>> = (0..64)
        .map(|i| {
            let u = i as f64 / 64.0;
            let m = profile.mean_on_curve(Dd::from_f64(u));
            vec![num(u), num(m.re), num(m.im)]
        })
        .collect();
    let mut out = Output::new(r.out, r.emit);
    out.csv("measure.csv", &["u", "re", "im"], &rows)?;
    out.csv("certificates.csv", &CERT_HEADER, &certificate_rows(&certs))?;
    let passed = all_pass(&certs);
    #[derive(Serialize)]
    struct Doc<'a> {
        stage: usize,
        observable: &'a str,
        lebesgue_mean: num_complex::Complex64,
        distance_to_lebesgue: f64,
        quadrature_points: u64,
        oscillatory: &'a [akconj_core::ergodic::OscillatoryReport],
        certificates: &'a [Certificate],
        passed: bool,
    }
    out.json(
        "measure.json",
        &Doc {
            stage: n,
            observable: &f.label,
            lebesgue_mean: f.mean(),
            distance_to_lebesgue: distance,
            quadrature_points: profile.points,
            oscillatory: &oscillatory,
            certificates: &certs,
            passed,
        },
    )?;
    println!("stage {n}: sup_u |curve mean - Lebesgue mean| of {} = {distance:.6e} (eps_n = {eps:e})", f.label);
    print_certificates(&certs);
    Ok(passed)
}

fn evidence_tables(report: &RunReport, out: &mut Output) -> Result<(), CliError> {
    match &report.evidence {
        Evidence::Nonlinearizable(ev) => {
            let rows: Vec<Vec<String>> = ev
                .density
                .iter()
                .map(|d| vec![num(d.eps), d.m.to_string(), d.n.to_string(), num(d.min_oscillation), num(d.grid_cells_hit)])
                .collect();
            out.csv("density.csv", &["eps", "m", "n", "min_oscillation", "coverage"], &rows)?;
            let rows: Vec<Vec<String>> = ev
                .limit
                .iter()
                .map(|l| vec![l.stage.to_string(), l.horizon.to_string(), num(l.sampled), num(l.bound)])
                .collect();
            out.csv("limit.csv", &["stage", "horizon", "sampled", "bound"], &rows)?;
        }
        Evidence::MinimalNonErgodic(ev) => {
            let lac = &ev.lacunarity;
            let rows: Vec<Vec<String>> = (0..lac.partial_sums.len())
                .map(|j| {
                    vec![
                        (j + 1).to_string(),
                        num(lac.partial_sums[j]),
                        lac.oscillation.get(j).map_or(String::new(), |o| num(*o)),
                    ]
                })
                .collect();
            out.csv("partial_sums.csv", &["stage", "partial_sum", "oscillation"], &rows)?;
            let rows: Vec<Vec<String>> = ev
                .bands
                .iter()
                .map(|b| vec![num(b.lo), num(b.hi), b.starts.to_string(), b.steps.to_string(), b.escapes.to_string(), num(b.max_drift)])
                .collect();
            out.csv("bands.csv", &["lo", "hi", "starts", "steps", "escapes", "max_drift"], &rows)?;
        }
        Evidence::UniquelyErgodic(ev) => {
            let opt = |v: Option<f64>| v.map_or(String::new(), num);
            let rows: Vec<Vec<String>> = ev
                .stages
                .iter()
                .map(|s| {
                    vec![
                        s.stage.to_string(),
                        num(s.eps),
                        num(s.amplitude),
                        s.window.tau.to_string(),
                        s.window.horizon.to_string(),
                        num(s.window.resample_deviation),
                        opt(s.observable_closeness),
                        opt(s.averaged_difference),
                    ]
                })
                .collect();
            out.csv(
                "stages.csv",
                &["stage", "eps", "amplitude", "tau", "horizon", "resample_deviation", "observable_closeness", "averaged_difference"],
                &rows,
            )?;
        }
    }
    Ok(())
}

fn theorem(a: &RunArgs, variant: Variant) -> Result<bool, CliError> {
    let mut r = resolve(a)?;
    if variant == Variant::UniquelyErgodic && a.stages.is_none() && a.config.is_none() {
        r.run.stages = 1;
    }
    let mut report = match variant {
        Variant::NonLinearizable => run_nonlinearizable(&r.run)?,
        Variant::MinimalNonErgodic => run_minimal_nonergodic(&r.run)?,
        Variant::UniquelyErgodic => run_uniquely_ergodic(&r.run)?,
    };
    let mut out = Output::new(r.out, r.emit);
    let rows: Vec<Vec<String>> = report
        .norm_chain
        .iter()
        .map(|e| {
            vec![
                e.stage.to_string(),
                num(e.eps),
                e.alpha_samples.to_string(),
                num(e.sampled),
                num(e.closed_form),
                num(e.ln_half_width),
                e.ln_rigorous_half_width.map_or(String::new(), num),
            ]
        })
        .collect();
    out.csv(
        "norm_chain.csv",
        &["stage", "eps", "alpha_samples", "sampled", "closed_form", "ln_half_width", "ln_rigorous_half_width"],
        &rows,
    )?;
    out.csv("certificates.csv", &CERT_HEADER, &certificate_rows(&report.certificates))?;
    evidence_tables(&report, &mut out)?;
    let mut plot = Plot::new("invariant curves y = -g_n(x)");
    let mut drawn = 0;
    for n in 1..=report.schedule.len() {
        if let Ok(g) = coboundary_series(1, n, &report.schedule) {
            if let Some(samples) = plot_samples(&g) {
                plot.curve(&curve_points(&g, 0.0, samples));
                drawn += 1;
            }
        }
    }
    if drawn > 0 {
        out.svg("curves.svg", plot.finish())?;
    }
    report.artifacts = out.artifacts.clone();
    out.json("report.json", &report)?;
    println!("{}: q = ({})", variant_name(variant), denominators(&report.schedule));
    print_certificates(&report.certificates);
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    Ok(report.passed())
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::NonLinearizable => "theorem1",
        Variant::MinimalNonErgodic => "theorem2",
        Variant::UniquelyErgodic => "theorem3",
    }
}

fn report(a: &ReportArgs) -> Result<bool, CliError> {
    let text = read(&a.input)?;
    let report: RunReport =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("parsing {}: {e}", a.input.display())))?;
    println!("{}: {} stages, q = ({})", variant_name(report.variant), report.schedule.len(), denominators(&report.schedule));
    for e in &report.norm_chain {
        println!("  stage {}: |G_n - G_(n-1)|_0 = {:.3e} < eps_n = {:.0e}", e.stage, e.sampled, e.eps);
    }
    print_certificates(&report.certificates);
    for art in &report.artifacts {
        println!("  artifact {} ({})", art.path, art.kind);
    }
    if let Some(e) = &report.error {
        println!("error: {e}");
    }
    Ok(report.passed())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))
}
