//! The JSON run configuration and its validation.
//!
//! Parsing goes through `serde_path_to_error`, so type errors name the
//! offending field. Cross-field rules are checked afterwards and reported
//! with the same dotted paths.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use solitonflow_core::integrate::{IntegratorConfig, DEFAULT_RESIDUAL_ABORT, DEFAULT_STEP};
use solitonflow_core::model::{Mode, Orbit, SolitonParams, TwoSummandsSpec, WarpedProductSpec};
use solitonflow_core::seed::{SeedConfig, DEFAULT_T0};
use solitonflow_core::suites::TWO_SUMMANDS_T0;

/// A configuration error tied to a field path such as `params.C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    /// Multiply warped product, `t`-system.
    Warped,
    /// Two-summands orbit, `t`-system.
    TwoSummands,
    /// Multiply warped product, phase-space system in `s`.
    Xy,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFields {
    pub r: Option<usize>,
    pub d: Option<Vec<usize>>,
    pub lambda: Option<Vec<f64>>,
    pub d1: Option<usize>,
    pub d2: Option<usize>,
    #[serde(rename = "A2", alias = "a2")]
    pub a2: Option<f64>,
    #[serde(rename = "A3", alias = "a3")]
    pub a3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Example2,
    Example3,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: PresetName,
    pub m: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFields {
    #[serde(default)]
    pub epsilon: f64,
    #[serde(rename = "C", alias = "c")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedFields {
    pub t0: Option<f64>,
    /// Radii `l_2, ..., l_r` of a warped product.
    pub l: Option<Vec<f64>>,
    /// Radius of the second summand of a two-summands orbit.
    pub h_bar: Option<f64>,
    #[serde(default)]
    pub u0: f64,
    /// Solve the first integral for one series value, see `SeedConfig`.
    #[serde(default)]
    pub constrained: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorFields {
    #[serde(default = "default_h")]
    pub h: f64,
    pub t_max: f64,
    #[serde(default = "default_decimate")]
    pub decimate: usize,
    #[serde(default = "default_residual_abort")]
    pub residual_abort: f64,
    /// Project onto `{L = 0, H = 1}` after every step (`xy`, Ricci-flat).
    #[serde(default)]
    pub project: bool,
}

fn default_h() -> f64 {
    DEFAULT_STEP
}

fn default_decimate() -> usize {
    1
}

fn default_residual_abort() -> f64 {
    DEFAULT_RESIDUAL_ABORT
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFields {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// The file format, before cross-field validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: System,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub spec: Option<SpecFields>,
    pub preset: Option<Preset>,
    #[serde(default)]
    pub params: ParamFields,
    #[serde(default)]
    pub seed: SeedFields,
    pub integrator: IntegratorFields,
    #[serde(default)]
    pub outputs: OutputFields,
}

fn default_mode() -> Mode {
    Mode::Soliton
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitSpec {
    Warped(WarpedProductSpec),
    TwoSummands(TwoSummandsSpec),
}

impl OrbitSpec {
    pub fn r(&self) -> usize {
        match self {
            OrbitSpec::Warped(s) => s.r(),
            OrbitSpec::TwoSummands(s) => s.r(),
        }
    }
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub system: System,
    pub mode: Mode,
    pub orbit: OrbitSpec,
    pub params: SolitonParams,
    pub seed: SeedConfig,
    pub integrator: IntegratorConfig,
    pub project: bool,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks the cross-field rules and builds the core configurations.
    pub fn validate(&self) -> Result<Plan, ConfigError> {
        let orbit = self.orbit()?;
        let r = orbit.r();

        if self.params.epsilon != 0.0 {
            return Err(ConfigError::new(
                "params.epsilon",
                format!("only steady solitons are supported, epsilon must be 0, got {}", self.params.epsilon),
            ));
        }
        let c = match (self.params.c, self.mode) {
            (Some(c), _) => c,
            (None, Mode::RicciFlat) => 0.0,
            (None, Mode::Soliton) => return Err(ConfigError::new("params.C", "required in soliton mode (C < 0)")),
        };
        let params = SolitonParams::steady(c);
        params.check(self.mode).map_err(|e| ConfigError::new("params.C", e))?;

        let seed = self.seed_config(r)?;

        let i = &self.integrator;
        let mut integrator = IntegratorConfig::new(i.h, i.t_max);
        integrator.decimate = i.decimate;
        integrator.residual_abort = i.residual_abort;
        let start = if self.system == System::Xy { 0.0 } else { seed.t0 };
        check_integrator(&integrator, start)?;
        if i.project && !(self.system == System::Xy && self.mode == Mode::RicciFlat) {
            return Err(ConfigError::new(
                "integrator.project",
                "projection applies only to the xy system in ricci-flat mode",
            ));
        }

        Ok(Plan {
            system: self.system,
            mode: self.mode,
            orbit,
            params,
            seed,
            integrator,
            project: i.project,
            csv: self.outputs.csv.clone(),
            report: self.outputs.report.clone(),
        })
    }

    fn orbit(&self) -> Result<OrbitSpec, ConfigError> {
        match (&self.spec, &self.preset) {
            (Some(_), Some(_)) => Err(ConfigError::new("preset", "give either `spec` or `preset`, not both")),
            (None, None) => Err(ConfigError::new("spec", "missing: give either `spec` or `preset`")),
            (None, Some(p)) => {
                if self.system != System::TwoSummands {
                    return Err(ConfigError::new("preset", "presets describe two-summands orbits"));
                }
                let spec = match p.name {
                    PresetName::Example2 => TwoSummandsSpec::example2(p.m),
                    PresetName::Example3 => TwoSummandsSpec::example3(p.m),
                };
                spec.map(OrbitSpec::TwoSummands).map_err(|e| ConfigError::new("preset.m", e))
            }
            (Some(s), None) => match self.system {
                System::Warped | System::Xy => {
                    for (name, set) in [("d1", s.d1.is_some()), ("d2", s.d2.is_some()), ("A2", s.a2.is_some()), ("A3", s.a3.is_some())] {
                        if set {
                            return Err(ConfigError::new(format!("spec.{name}"), "belongs to two-summands orbits"));
                        }
                    }
                    let d = s.d.clone().ok_or_else(|| ConfigError::new("spec.d", "missing"))?;
                    let lambda = s.lambda.clone().ok_or_else(|| ConfigError::new("spec.lambda", "missing"))?;
                    if let Some(r) = s.r {
                        if r != d.len() {
                            return Err(ConfigError::new("spec.r", format!("r = {r} but d has {} entries", d.len())));
                        }
                    }
                    let spec = WarpedProductSpec::new(d, lambda).map_err(|e| ConfigError::new("spec", e))?;
                    spec.check_circle_first().map_err(|e| ConfigError::new("spec.d", e))?;
                    Ok(OrbitSpec::Warped(spec))
                }
                System::TwoSummands => {
                    for (name, set) in [("d", s.d.is_some()), ("lambda", s.lambda.is_some())] {
                        if set {
                            return Err(ConfigError::new(format!("spec.{name}"), "belongs to warped products"));
                        }
                    }
                    if let Some(r) = s.r {
                        if r != 2 {
                            return Err(ConfigError::new("spec.r", "two-summands orbits have r = 2"));
                        }
                    }
                    let need_u = |v: Option<usize>, name: &str| v.ok_or_else(|| ConfigError::new(format!("spec.{name}"), "missing"));
                    let need_f = |v: Option<f64>, name: &str| v.ok_or_else(|| ConfigError::new(format!("spec.{name}"), "missing"));
                    let spec = TwoSummandsSpec::new(need_u(s.d1, "d1")?, need_u(s.d2, "d2")?, need_f(s.a2, "A2")?, need_f(s.a3, "A3")?)
                        .map_err(|e| ConfigError::new("spec", e))?;
                    Ok(OrbitSpec::TwoSummands(spec))
                }
            },
        }
    }

    fn seed_config(&self, r: usize) -> Result<SeedConfig, ConfigError> {
        let s = &self.seed;
        let (l, t0) = match self.system {
            System::Warped | System::Xy => {
                if s.h_bar.is_some() {
                    return Err(ConfigError::new("seed.h_bar", "belongs to two-summands orbits; use `l`"));
                }
                (s.l.clone().ok_or_else(|| ConfigError::new("seed.l", "missing"))?, DEFAULT_T0)
            }
            System::TwoSummands => {
                if s.l.is_some() {
                    return Err(ConfigError::new("seed.l", "two-summands orbits take `h_bar`"));
                }
                (vec![s.h_bar.ok_or_else(|| ConfigError::new("seed.h_bar", "missing"))?], TWO_SUMMANDS_T0)
            }
        };
        let mut cfg = SeedConfig::soliton(l).with_t0(s.t0.unwrap_or(t0));
        cfg.mode = self.mode;
        cfg.u0 = s.u0;
        cfg.enforce_first_integral = s.constrained;
        cfg.validate(r).map_err(|e| {
            let field = match &e {
                _ if !(cfg.t0 > 0.0 && cfg.t0 <= solitonflow_core::seed::MAX_T0) => "seed.t0",
                _ if !cfg.u0.is_finite() => "seed.u0",
                _ if self.system == System::TwoSummands => "seed.h_bar",
                _ => "seed.l",
            };
            ConfigError::new(field, e)
        })?;
        Ok(cfg)
    }
}

fn check_integrator(cfg: &IntegratorConfig, start: f64) -> Result<(), ConfigError> {
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(ConfigError::new("integrator.h", format!("must be positive, got {}", cfg.h)));
    }
    if cfg.decimate == 0 {
        return Err(ConfigError::new("integrator.decimate", "must be at least 1"));
    }
    if cfg.residual_abort.is_nan() || cfg.residual_abort <= 0.0 {
        return Err(ConfigError::new(
            "integrator.residual_abort",
            format!("must be positive, got {}", cfg.residual_abort),
        ));
    }
    cfg.steps_from(start)
        .map(|_| ())
        .map_err(|e| ConfigError::new("integrator.t_max", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = r#"{
        "system": "warped",
        "spec": {"d": [1, 2, 3], "lambda": [0, 1, 1]},
        "params": {"C": -1},
        "seed": {"l": [6, 3]},
        "integrator": {"t_max": 1.001}
    }"#;

    fn with(edit: impl FnOnce(&mut serde_json::Value)) -> Result<Plan, ConfigError> {
        let mut v: serde_json::Value = serde_json::from_str(EXAMPLE1).unwrap();
        edit(&mut v);
        RunConfig::parse(&v.to_string())?.validate()
    }

    #[test]
    fn example1_defaults() {
        let plan = with(|_| {}).unwrap();
        assert_eq!(plan.seed.t0, DEFAULT_T0);
        assert_eq!(plan.integrator.h, DEFAULT_STEP);
        assert_eq!(plan.integrator.decimate, 1);
        assert_eq!(plan.params.c, -1.0);
        assert!(matches!(plan.orbit, OrbitSpec::Warped(_)));
    }

    #[test]
    fn positive_c_is_rejected_with_its_path() {
        let e = with(|v| v["params"]["C"] = 1.0.into()).unwrap_err();
        assert_eq!(e.path, "params.C");
        assert!(e.message.contains("C < 0"), "{e}");
    }

    #[test]
    fn type_errors_carry_paths() {
        let e = with(|v| v["seed"]["l"] = "six".into()).unwrap_err();
        assert_eq!(e.path, "seed.l");
        let e = with(|v| v["integrator"]["decimate"] = (-3).into()).unwrap_err();
        assert_eq!(e.path, "integrator.decimate");
        let e = with(|v| v["spec"]["colour"] = 1.into()).unwrap_err();
        assert_eq!(e.path, "spec.colour");
    }

    #[test]
    fn spec_and_preset_are_exclusive() {
        let e = with(|v| {
            v["system"] = "two-summands".into();
            v["preset"] = serde_json::json!({"name": "example2", "m": 1});
        })
        .unwrap_err();
        assert_eq!(e.path, "preset");
        let e = with(|v| {
            v.as_object_mut().unwrap().remove("spec");
        })
        .unwrap_err();
        assert_eq!(e.path, "spec");
    }

    #[test]
    fn preset_expands_and_defaults_t0() {
        let plan = with(|v| {
            v["system"] = "two-summands".into();
            v.as_object_mut().unwrap().remove("spec");
            v["preset"] = serde_json::json!({"name": "example3", "m": 2});
            v["seed"] = serde_json::json!({"h_bar": 6});
            v["integrator"]["t_max"] = 1.01.into();
        })
        .unwrap();
        assert_eq!(plan.orbit, OrbitSpec::TwoSummands(TwoSummandsSpec::example3(2).unwrap()));
        assert_eq!(plan.seed.t0, TWO_SUMMANDS_T0);
        assert_eq!(plan.seed.l, vec![6.0]);
    }

    #[test]
    fn ricci_flat_defaults_c_and_rejects_nonzero() {
        let plan = with(|v| {
            v["mode"] = "ricci-flat".into();
            v["params"] = serde_json::json!({});
        })
        .unwrap();
        assert_eq!(plan.params.c, 0.0);
        let e = with(|v| v["mode"] = "ricci-flat".into()).unwrap_err();
        assert_eq!(e.path, "params.C");
    }

    #[test]
    fn misc_field_rules() {
        assert_eq!(with(|v| v["params"]["epsilon"] = 0.5.into()).unwrap_err().path, "params.epsilon");
        assert_eq!(with(|v| v["seed"]["l"] = serde_json::json!([6])).unwrap_err().path, "seed.l");
        assert_eq!(with(|v| v["seed"]["t0"] = 0.5.into()).unwrap_err().path, "seed.t0");
        assert_eq!(with(|v| v["spec"]["r"] = 4.into()).unwrap_err().path, "spec.r");
        assert_eq!(with(|v| v["integrator"]["t_max"] = 1.0005.into()).unwrap_err().path, "integrator.t_max");
        assert_eq!(with(|v| v["integrator"]["project"] = true.into()).unwrap_err().path, "integrator.project");
        assert_eq!(with(|v| v["spec"]["d"] = serde_json::json!([2, 2, 3])).unwrap_err().path, "spec");
    }
}
