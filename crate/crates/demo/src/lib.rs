//! Browser bindings. Each export rebuilds the certified schedule from its arguments, so the
//! page stays stateless; the inner functions return plain `Result`s and are tested natively.

use akconj_core::ergodic::{base_angle, birkhoff_average, Dynamics, MeasureProfile, Observable};
use akconj_core::scenarios::{certified_schedule, RunConfig};
use akconj_core::schedule::{AmplitudeProfile, Schedule};
use akconj_core::torusmaps::{invariant_curve, SkewMap, TorusPoint};
use akconj_core::{all_pass, Certificate};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Orbit points kept for drawing; averages still use every iterate.
const MAX_DRAWN: u64 = 20_000;
/// Cheaper than the command-line default; the page only shows a reference mean.
const QUADRATURE: u64 = 1 << 21;

fn build(stages: usize, base: u32, amplitude: &str) -> Result<(Schedule, Vec<Certificate>), String> {
    let mut cfg = RunConfig { stages, ..RunConfig::default() };
    cfg.policy.base = base;
    cfg.policy.amplitudes = AmplitudeProfile::parse(amplitude).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    certified_schedule(&cfg).map_err(|e| e.to_string())
}

pub fn schedule_report(stages: usize, base: u32, amplitude: &str) -> Result<String, String> {
    let (sched, certs) = build(stages, base, amplitude)?;
    let rows: Vec<_> = sched
        .stages
        .iter()
        .map(|s| json!({"n": s.n, "p": s.p.to_string(), "q": s.q.to_string(), "c": s.c, "eps": s.eps}))
        .collect();
    let checks: Vec<_> = certs
        .iter()
        .map(|c| json!({"condition": c.condition, "stage": c.stage, "pass": c.pass, "margin": c.margin}))
        .collect();
    Ok(json!({"stages": rows, "certificates": checks, "passed": all_pass(&certs)}).to_string())
}

#[allow(clippy::too_many_arguments)]
pub fn orbit_report(
    stages: usize,
    base: u32,
    amplitude: &str,
    x0: f64,
    y0: f64,
    iterates: u64,
    k: i64,
    l: i64,
) -> Result<String, String> {
    if iterates == 0 {
        return Err("at least one iterate is required".into());
    }
    let (sched, _) = build(stages, base, amplitude)?;
    let n = sched.len();
    let alpha = base_angle(&sched.stage(n).map_err(|e| e.to_string())?.interval);
    let map = SkewMap::stage(alpha, &sched, 1, n).map_err(|e| e.to_string())?;
    let f = Observable::character(k, l);
    let z0 = TorusPoint::new(x0, y0);
    let profile = MeasureProfile::new(&f, &map.g, QUADRATURE).map_err(|e| e.to_string())?;
    let reference = profile.mean_on_curve(map.invariant(&z0));
    let avg = birkhoff_average(&map, &f, &z0, iterates, reference).map_err(|e| e.to_string())?;
    let mut points = Vec::with_capacity(2 * iterates.min(MAX_DRAWN) as usize + 2);
    map.orbit(&z0, iterates.min(MAX_DRAWN), &mut |_, z| {
        points.push(z.xf());
        points.push(z.yf());
    });
    let checkpoints: Vec<_> = avg
        .checkpoints
        .iter()
        .map(|c| json!({"k": c.k, "re": c.average.re, "im": c.average.im, "deviation": c.deviation}))
        .collect();
    Ok(json!({
        "stage": n,
        "observable": f.label,
        "reference": [reference.re, reference.im],
        "checkpoints": checkpoints,
        "points": points,
    })
    .to_string())
}

/// Heights of the invariant curve through `(0, y0)` of stage `stage` at `samples + 1` equally spaced `x`.
pub fn curve_heights(
    stages: usize,
    base: u32,
    amplitude: &str,
    stage: usize,
    y0: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let (sched, _) = build(stages, base, amplitude)?;
    if stage == 0 || stage > sched.len() {
        return Err(format!("stage must lie in 1..={}", sched.len()));
    }
    let curve = invariant_curve(y0, 1, stage, &sched).map_err(|e| e.to_string())?;
    Ok((0..=samples.max(1))
        .map(|i| curve.lift(akconj_core::dd::Dd::from_f64(i as f64 / samples.max(1) as f64)).rem_euclid(1.0))
        .collect())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// JSON with the stage table and its certificates.
#[wasm_bindgen(js_name = buildSchedule)]
pub fn build_schedule(stages: usize, base: u32, amplitude: &str) -> Result<String, JsError> {
    schedule_report(stages, base, amplitude).map_err(js)
}

/// JSON with orbit points of the last stage map and running Birkhoff averages of `e(kx + ly)`.
#[wasm_bindgen(js_name = runOrbit)]
#[allow(clippy::too_many_arguments)]
pub fn run_orbit(
    stages: usize,
    base: u32,
    amplitude: &str,
    x0: f64,
    y0: f64,
    iterates: u32,
    k: i32,
    l: i32,
) -> Result<String, JsError> {
    orbit_report(stages, base, amplitude, x0, y0, iterates.into(), k.into(), l.into()).map_err(js)
}

#[wasm_bindgen(js_name = curveHeights)]
pub fn curve(stages: usize, base: u32, amplitude: &str, stage: usize, y0: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curve_heights(stages, base, amplitude, stage, y0, samples).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_matches_the_base_ten_denominators() {
        let v: serde_json::Value = serde_json::from_str(&schedule_report(2, 10, "constant:1").unwrap()).unwrap();
        assert_eq!(v["stages"][1]["q"], "40016");
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn orbit_report_carries_points_and_averages() {
        let v: serde_json::Value = serde_json::from_str(&orbit_report(2, 2, "constant:1", 0.1, 0.2, 500, 0, 1).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 2 * 501);
        assert!(!v["checkpoints"].as_array().unwrap().is_empty());
        assert!(orbit_report(2, 2, "constant:1", 0.1, 0.2, 0, 0, 1).is_err());
    }

    #[test]
    fn curve_heights_lie_in_the_unit_interval() {
        let h = curve_heights(2, 2, "constant:1", 1, 0.3, 64).unwrap();
        assert_eq!(h.len(), 65);
        assert!(h.iter().all(|y| (0.0..1.0).contains(y)));
        assert!(curve_heights(2, 2, "constant:1", 3, 0.3, 64).is_err());
        assert!(schedule_report(2, 1, "constant:1").is_err());
    }
}
