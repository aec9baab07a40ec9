use std::path::PathBuf;

use akconj_core::ergodic::Observable;
use akconj_core::schedule::{AmplitudeProfile, SubdivisionConstants};
use akconj_core::scenarios::RunConfig;
use akconj_core::analysis::IntervalRule;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::RunArgs;
use crate::output::Emit;
use crate::CliError;

/// Config file layout: a run configuration plus output settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CliConfig {
    #[serde(flatten)]
    pub run: RunConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub emit: Option<Vec<String>>,
}

pub struct Resolved {
    pub run: RunConfig,
    pub out: PathBuf,
    pub emit: Emit,
}

pub fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let mut file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            let bad = |e: serde_json::Error| CliError::Config(format!("parsing {}: {e}", path.display()));
            let given: Value = serde_json::from_str(&text).map_err(bad)?;
            let mut merged = serde_json::to_value(CliConfig::default()).map_err(bad)?;
            merge(&mut merged, given);
            serde_json::from_value::<CliConfig>(merged).map_err(bad)?
        }
        None => CliConfig::default(),
    };
    let cfg = &mut file.run;
    if let Some(v) = args.stages {
        cfg.stages = v;
    }
    if let Some(v) = args.base {
        cfg.policy.base = v;
    }
    if let Some(v) = &args.amplitudes {
        cfg.policy.amplitudes = AmplitudeProfile::parse(v)?;
    }
    if let Some(v) = args.eps_decay {
        cfg.policy.eps_decay = v;
    }
    if let Some(v) = args.strip_r {
        cfg.policy.strip_r = Some(v);
    }
    if args.literal {
        cfg.policy.literal_mode = true;
    }
    if let Some(v) = &args.constants {
        cfg.policy.subdivision = match v.as_str() {
            "literal" => SubdivisionConstants::literal(),
            "profile" => SubdivisionConstants::profile(),
            other => return Err(CliError::Config(format!("unknown constants {other:?}"))),
        };
    }
    if let Some(v) = &args.rule {
        cfg.rule = match v.as_str() {
            "direct" => IntervalRule::Direct,
            "rigorous" => IntervalRule::Rigorous,
            other => return Err(CliError::Config(format!("unknown interval rule {other:?}"))),
        };
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.family_size {
        cfg.family_size = v;
    }
    if let Some(v) = &args.eps {
        cfg.eps_ladder = v.clone();
    }
    let b = &mut cfg.budgets;
    if let Some(v) = args.quadrature_points {
        b.quadrature_points = v;
    }
    if let Some(v) = args.orbit_iterates {
        b.orbit_iterates = v;
    }
    if let Some(v) = args.alpha_samples {
        b.alpha_samples = v;
    }
    if let Some(v) = args.bisection_depth {
        b.bisection_depth = v;
    }
    if let Some(v) = args.z_grid {
        b.z_grid = v;
    }
    if let Some(v) = args.sample_points {
        b.sample_points = v;
    }
    cfg.validate()?;
    let emit = match args.emit.as_ref().or(file.emit.as_ref()) {
        Some(items) => Emit::parse(items)?,
        None => Emit::default(),
    };
    let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
    Ok(Resolved { run: file.run, out, emit })
}

/// Overlays `given` on `base` key by key, so a partial `policy` object keeps the remaining defaults.
fn merge(base: &mut Value, given: Value) {
    match (base, given) {
        (Value::Object(b), Value::Object(g)) => {
            for (k, v) in g {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `char:K:L`, `cos:K:L`, `sin:K:L` or `const:V`.
pub fn parse_observable(s: &str) -> Result<Observable, CliError> {
    let bad = || CliError::Config(format!("bad observable {s:?}; expected char:K:L, cos:K:L, sin:K:L or const:V"));
    let parts: Vec<&str> = s.split(':').collect();
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    match parts.as_slice() {
        ["char", k, l] => Ok(Observable::character(int(k)?, int(l)?)),
        ["cos", k, l] => Ok(Observable::cos(int(k)?, int(l)?)),
        ["sin", k, l] => Ok(Observable::sin(int(k)?, int(l)?)),
        ["const", v] => Ok(Observable::constant(v.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_defaults() {
        let args = RunArgs { stages: Some(3), base: Some(10), amplitudes: Some("harmonic".into()), ..RunArgs::default() };
        let r = resolve(&args).unwrap();
        assert_eq!(r.run.stages, 3);
        assert_eq!(r.run.policy.base, 10);
        assert_eq!(r.run.policy.amplitudes, AmplitudeProfile::Harmonic);
        assert_eq!(r.emit, Emit::default());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let args = RunArgs { base: Some(1), ..RunArgs::default() };
        assert!(matches!(resolve(&args), Err(CliError::Config(_))));
        let args = RunArgs { emit: Some(vec!["png".into()]), ..RunArgs::default() };
        assert!(matches!(resolve(&args), Err(CliError::Config(_))));
        assert!(parse_observable("char:1").is_err());
        assert_eq!(parse_observable("cos:1:0").unwrap().label, "cos 2pi(x)");
    }
}
