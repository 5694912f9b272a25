//! TOML run configuration with sections `[grid]`, `[model]`, `[initial]`,
//! `[diagnostics]` and `[output]`. Unknown keys are errors; `--set
//! section.key=value` overrides are applied before validation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diagnostics::DiagnosticsSpec;
use crate::error::{LandauError, Result};
use crate::evolve::{InitialCondition, SimConfig};
use crate::maxwellian::MixtureComponent;
use crate::weight::{WeightContext, WeightSpec};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    model: Option<RawModel>,
    initial: Option<RawInitial>,
    diagnostics: Option<RawDiagnostics>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    half_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    gamma: Option<f64>,
    t_end: Option<f64>,
    c_cfl: Option<f64>,
    tol_neg: Option<f64>,
    project: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    weight: f64,
    velocity: [f64; 3],
    temperature: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    preset: Option<String>,
    standardize: Option<bool>,
    components: Option<Vec<RawComponent>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnostics {
    dt_diag: Option<f64>,
    eps_log: Option<f64>,
    l1_weights: Option<Vec<String>>,
    l2_k: Option<Vec<f64>>,
    h1_k: Option<Vec<f64>>,
    fisher_k: Option<Vec<f64>>,
    coercivity: Option<bool>,
    ratio_k: Option<Vec<f64>>,
    linear_weights: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    snapshot_every: Option<f64>,
}

/// Every accepted `section.key`.
pub const CONFIG_KEYS: [&str; 21] = [
    "grid.n",
    "grid.half_width",
    "model.gamma",
    "model.t_end",
    "model.c_cfl",
    "model.tol_neg",
    "model.project",
    "initial.preset",
    "initial.standardize",
    "initial.components",
    "diagnostics.dt_diag",
    "diagnostics.eps_log",
    "diagnostics.l1_weights",
    "diagnostics.l2_k",
    "diagnostics.h1_k",
    "diagnostics.fisher_k",
    "diagnostics.coercivity",
    "diagnostics.ratio_k",
    "diagnostics.linear_weights",
    "output.dir",
    "output.snapshot_every",
];

/// A parsed configuration: the simulation parameters plus the parts only the
/// front end uses.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    /// Weights of the norms recorded by linear runs (linearized context).
    pub linear_weights: Vec<WeightSpec>,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sim: SimConfig::default(),
            linear_weights: vec![WeightSpec::StretchedExp { kappa: 0.1, s: 0.75 }],
            output_dir: None,
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first assignment to `key`, or 0 when it does not occur.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}

/// Backtick-quoted name in a serde message (the offending key).
fn quoted_name(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `section.key=value` override.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| LandauError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if !CONFIG_KEYS.contains(&key) {
        return Err(LandauError::Config(format!(
            "override names unknown key `{key}`; known keys: {}",
            CONFIG_KEYS.join(", ")
        )));
    }
    let (section, name) = key.split_once('.').expect("config keys are dotted");
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let sub = entry
        .as_table_mut()
        .ok_or_else(|| LandauError::Config(format!("`{section}` is not a section")))?;
    sub.insert(name.to_string(), parse_value(value.trim()));
    Ok(())
}

fn weights(keys: &[String], context: WeightContext, gamma: f64) -> Result<Vec<WeightSpec>> {
    keys.iter()
        .map(|k| {
            let w = WeightSpec::from_key(k)?;
            w.validate(context, gamma)?;
            Ok(w)
        })
        .collect()
}

fn build(raw: RawConfig) -> Result<RunConfig> {
    let mut out = RunConfig::default();
    let sim = &mut out.sim;
    let grid = raw.grid.unwrap_or_default();
    sim.n = grid.n.unwrap_or(sim.n);
    sim.half_width = grid.half_width.unwrap_or(sim.half_width);
    let model = raw.model.unwrap_or_default();
    sim.gamma = model.gamma.unwrap_or(sim.gamma);
    sim.t_end = model.t_end.unwrap_or(sim.t_end);
    sim.c_cfl = model.c_cfl.unwrap_or(sim.c_cfl);
    sim.tol_neg = model.tol_neg.unwrap_or(sim.tol_neg);
    sim.project = model.project.unwrap_or(sim.project);
    let initial = raw.initial.unwrap_or_default();
    let mut ic = match initial.preset.as_deref() {
        None | Some("bi_maxwellian") => InitialCondition::bi_maxwellian(),
        Some("maxwellian") => InitialCondition::maxwellian(),
        Some(other) => {
            return Err(LandauError::Config(format!(
                "unknown initial preset `{other}` (expected bi_maxwellian or maxwellian)"
            )))
        }
    };
    if let Some(components) = initial.components {
        ic.components = components
            .into_iter()
            .map(|c| MixtureComponent {
                weight: c.weight,
                velocity: c.velocity,
                temperature: c.temperature,
            })
            .collect();
    }
    ic.standardize = initial.standardize.unwrap_or(ic.standardize);
    sim.initial = ic;
    let diag = raw.diagnostics.unwrap_or_default();
    sim.dt_diag = diag.dt_diag.unwrap_or(sim.dt_diag);
    sim.eps_log = diag.eps_log.unwrap_or(sim.eps_log);
    crate::kernels::check_gamma(sim.gamma)?;
    let defaults = DiagnosticsSpec::default();
    sim.diagnostics = DiagnosticsSpec {
        l1_weights: match diag.l1_weights {
            Some(keys) => weights(&keys, WeightContext::Moments, sim.gamma)?,
            None => defaults.l1_weights,
        },
        l2_k: diag.l2_k.unwrap_or(defaults.l2_k),
        h1_k: diag.h1_k.unwrap_or(defaults.h1_k),
        fisher_k: diag.fisher_k.unwrap_or(defaults.fisher_k),
        coercivity: diag.coercivity.unwrap_or(defaults.coercivity),
        ratio_k: diag.ratio_k.unwrap_or(defaults.ratio_k),
    };
    // The default linear weight is checked by the linear workflows, so that
    // configs for other subcommands may use any γ.
    if let Some(keys) = diag.linear_weights {
        out.linear_weights = weights(&keys, WeightContext::Linearized, sim.gamma)?;
    }
    let output = raw.output.unwrap_or_default();
    out.output_dir = output.dir.map(PathBuf::from);
    sim.snapshot_every = output.snapshot_every;
    out.sim.validate()?;
    Ok(out)
}

/// Parses configuration text, applies overrides and validates the result.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| LandauError::ConfigParse {
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let raw: RawConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        let message = e.message().trim().to_string();
        let line = quoted_name(&message).map_or(0, |k| line_of_key(text, k));
        if line > 0 {
            LandauError::ConfigParse { line, message }
        } else {
            LandauError::Config(message)
        }
    })?;
    build(raw)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| LandauError::io(path, e))?;
    parse_config_str(&text, overrides)
}

/// Reads and validates a configuration file without overrides.
pub fn parse_config(path: &Path) -> Result<SimConfig> {
    Ok(load_config(path, &[])?.sim)
}

/// Annotated configuration listing every key with its default.
pub const EXAMPLE_CONFIG: &str = r#"# Velocity box [-half_width, half_width]^3 with n cells per axis.
[grid]
n = 32
half_width = 8.0

[model]
# Interaction exponent, -2 < gamma < 0.
gamma = -0.5
t_end = 5.0
# Step size factor of c_cfl * h^2 / (6 max eig(a * f)).
c_cfl = 0.5
# Smallest admissible min f, relative to max f.
tol_neg = 1e-6
# Restore the initial mass, momentum and energy after every step.
project = false

[initial]
# bi_maxwellian: weights 1 at velocities (+-1, 0, 0), temperature 0.5.
preset = "bi_maxwellian"
# Rescale the mixture to unit mass and temperature and zero momentum.
standardize = true
# Explicit components replace the preset.
# components = [
#   { weight = 1.0, velocity = [-1.0, 0.0, 0.0], temperature = 0.5 },
#   { weight = 1.0, velocity = [1.0, 0.0, 0.0], temperature = 0.5 },
# ]

[diagnostics]
dt_diag = 0.05
# Floor under logarithms, relative to max f.
eps_log = 1e-30
# Weighted L1 norms: k<k> for <v>^k, exp_k<kappa>_s<s> for exp(kappa <v>^s).
l1_weights = ["k4", "exp_k0.1_s0.75"]
l2_k = []
h1_k = []
fisher_k = [4.0]
coercivity = true
ratio_k = [4.0]
# Norms recorded by the linear subcommand (need s + gamma > 0).
linear_weights = ["exp_k0.1_s0.75"]

[output]
# dir = "out"
# Snapshot cadence, a whole multiple of dt_diag.
# snapshot_every = 1.0
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config_str("", &[]).unwrap();
        assert_eq!(c.sim.n, 32);
        assert_eq!(c.sim.half_width, 8.0);
        assert_eq!(c.sim.c_cfl, 0.5);
        assert_eq!(c.sim.eps_log, 1e-30);
    }

    #[test]
    fn example_config_matches_defaults() {
        let c = parse_config_str(EXAMPLE_CONFIG, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn gamma_out_of_range() {
        let e = parse_config_str("[model]\ngamma = -2.5\n", &[]).unwrap_err();
        assert!(e.to_string().contains("(-2, 0)"), "{e}");
    }

    #[test]
    fn linearized_weight_rule() {
        let e = parse_config_str("[diagnostics]\nlinear_weights = [\"exp_k0.1_s0.4\"]\n", &[]).unwrap_err();
        assert!(matches!(e, LandauError::WeightValidation(_)));
        assert!(e.to_string().contains("s + gamma > 0"), "{e}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = parse_config_str("[grid]\nn = 16\nwidth = 3.0\n", &[]).unwrap_err();
        match e {
            LandauError::ConfigParse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("width"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = parse_config_str("[grid]\nn = 16\nhalf_width = = 2\n", &[]).unwrap_err();
        assert!(matches!(e, LandauError::ConfigParse { line: 3, .. }), "{e}");
    }

    #[test]
    fn overrides() {
        let c = parse_config_str(
            "[grid]\nn = 16\n",
            &["grid.n=12".into(), "model.gamma=-1.0".into(), "model.project=true".into()],
        )
        .unwrap();
        assert_eq!((c.sim.n, c.sim.gamma, c.sim.project), (12, -1.0, true));
        let c = parse_config_str("", &["diagnostics.l1_weights=[\"k2\"]".into()]).unwrap();
        assert_eq!(c.sim.diagnostics.l1_weights, vec![WeightSpec::Polynomial { k: 2.0 }]);
        assert!(parse_config_str("", &["grid.size=3".into()]).is_err());
        assert!(parse_config_str("", &["grid.n".into()]).is_err());
    }

    #[test]
    fn explicit_components() {
        let c = parse_config_str(
            "[initial]\nstandardize = false\ncomponents = [{ weight = 2.0, velocity = [0.0, 0.5, 0.0], temperature = 1.5 }]\n",
            &[],
        )
        .unwrap();
        assert_eq!(c.sim.initial.components.len(), 1);
        assert_eq!(c.sim.initial.components[0].temperature, 1.5);
        assert!(!c.sim.initial.standardize);
    }
}
