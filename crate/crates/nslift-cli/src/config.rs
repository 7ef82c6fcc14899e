//! Run configuration: JSON schema, defaults, CLI flag overlay, and
//! validation with per-key error reporting.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEALIAS_NUM: u32 = 2;
pub const DEALIAS_DEN: u32 = 3;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            scheme: default_scheme(),
            dt: default_dt(),
            tolerance: default_tolerance(),
        }
    }
}

fn default_scheme() -> String {
    "rk4".into()
}
fn default_dt() -> f64 {
    1e-3
}
fn default_tolerance() -> f64 {
    1e-10
}
fn default_n() -> usize {
    32
}
fn default_cutoff() -> u32 {
    8
}
fn default_i_star() -> usize {
    7
}
fn default_t_o() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    0.5
}
fn default_formulation() -> String {
    "shifted".into()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_output_every() -> usize {
    10
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    #[serde(default = "default_i_star")]
    pub i_star: usize,
    #[serde(default = "default_t_o")]
    pub t_o: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub integrator: IntegratorSection,
    /// "direct", "shifted", or "both".
    #[serde(default = "default_formulation")]
    pub formulation: String,
    /// Preset name; alternative to initial_field.
    #[serde(default)]
    pub preset: Option<String>,
    /// Initial velocity loaded from a field dump.
    #[serde(default)]
    pub initial_field: Option<PathBuf>,
    /// Forcing loaded from a jet dump (Taylor derivatives at t = 0).
    #[serde(default)]
    pub forcing_jet: Option<PathBuf>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    #[serde(default)]
    pub zero_mean: bool,
    #[serde(default)]
    pub verify_jets: bool,
    #[serde(default)]
    pub fit_constants: bool,
    #[serde(default)]
    pub flatness_fit: bool,
    #[serde(default)]
    pub dump_fields: bool,
    /// Seed used when the preset is "random-smooth" without an inline seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Orders monitored in the diagnostics jet columns.
    #[serde(default)]
    pub i_monitor: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

impl RunConfig {
    /// Validated list of invariant violations, each prefixed by the key path.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.n < 4 || self.n % 2 != 0 {
            errs.push(format!("n: must be even and >= 4, got {}", self.n));
        }
        let k_max = (self.n as u64 * DEALIAS_NUM as u64 / (2 * DEALIAS_DEN as u64)) as u32;
        if self.cutoff == 0 || self.cutoff > k_max {
            errs.push(format!(
                "cutoff: K = {} outside the resolved range 1..={} for n = {}",
                self.cutoff, k_max, self.n
            ));
        }
        if self.i_star > 12 {
            errs.push(format!("i_star: must be in 0..=12, got {}", self.i_star));
        }
        if !(self.t_o > 0.0) {
            errs.push(format!("t_o: must be positive, got {}", self.t_o));
        }
        if !(self.t_end > 0.0) || self.t_end > self.t_o {
            errs.push(format!(
                "t_end: must lie in (0, t_o = {}], got {}",
                self.t_o, self.t_end
            ));
        }
        if !(self.integrator.dt > 0.0) {
            errs.push(format!(
                "integrator.dt: must be positive, got {}",
                self.integrator.dt
            ));
        }
        if !matches!(
            self.integrator.scheme.as_str(),
            "rk4" | "if-rk4" | "adaptive"
        ) {
            errs.push(format!(
                "integrator.scheme: expected rk4 | if-rk4 | adaptive, got {}",
                self.integrator.scheme
            ));
        }
        if !(self.integrator.tolerance > 0.0) {
            errs.push(format!(
                "integrator.tolerance: must be positive, got {}",
                self.integrator.tolerance
            ));
        }
        if !matches!(self.formulation.as_str(), "direct" | "shifted" | "both") {
            errs.push(format!(
                "formulation: expected direct | shifted | both, got {}",
                self.formulation
            ));
        }
        if self.output_every == 0 {
            errs.push("output_every: must be >= 1".into());
        }
        if self.preset.is_none() && self.initial_field.is_none() {
            errs.push("preset: either a preset or an initial_field file is required".into());
        }
        if let Some(name) = &self.preset {
            if self.resolve_preset_name(name).is_none() {
                errs.push(format!("preset: unknown preset `{name}`"));
            }
        }
        if let Some(m) = self.i_monitor {
            if m > self.i_star {
                errs.push(format!(
                    "i_monitor: must not exceed i_star = {}, got {m}",
                    self.i_star
                ));
            }
        }
        errs
    }

    fn resolve_preset_name(&self, name: &str) -> Option<nslift::presets::Preset> {
        if name == "random-smooth" {
            return Some(nslift::presets::Preset::RandomSmooth {
                seed: self.seed.unwrap_or(0),
            });
        }
        nslift::presets::Preset::parse(name)
    }

    pub fn preset(&self) -> Option<nslift::presets::Preset> {
        self.preset
            .as_deref()
            .and_then(|n| self.resolve_preset_name(n))
    }

    pub fn scheme(&self) -> nslift::galerkin::Scheme {
        match self.integrator.scheme.as_str() {
            "if-rk4" => nslift::galerkin::Scheme::IntegratingFactorRk4,
            "adaptive" => nslift::galerkin::Scheme::AdaptiveRk54,
            _ => nslift::galerkin::Scheme::Rk4,
        }
    }

    pub fn integrator_config(&self) -> nslift::galerkin::IntegratorConfig {
        nslift::galerkin::IntegratorConfig {
            scheme: self.scheme(),
            dt: self.integrator.dt,
            t_end: self.t_end,
            tolerance: self.integrator.tolerance,
            output_every: self.output_every.max(1),
        }
    }
}

/// Parse a JSON config file; unknown keys are rejected with the offending
/// key named, invariant violations are reported itemized.
pub fn parse_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| format!("config error in {}: {e}", path.display()))?;
    let violations = config.violations();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(format!(
            "invalid config {}:\n  {}",
            path.display(),
            violations.join("\n  ")
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config_fills_documented_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"preset": "shear"}"#).unwrap();
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.cutoff, 8);
        assert_eq!(cfg.i_star, 7);
        assert_eq!(cfg.integrator.scheme, "rk4");
        assert_eq!(cfg.integrator.dt, 1e-3);
        assert!(cfg.violations().is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"preset": "shear", "nn": 3}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("nn"), "{err}");
    }

    #[test]
    fn cutoff_above_resolved_range_is_rejected() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"preset": "shear", "cutoff": 11}"#).unwrap();
        let errs = cfg.violations();
        assert!(errs.iter().any(|e| e.starts_with("cutoff:")), "{errs:?}");
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"preset": "taylor-green", "n": 16, "cutoff": 4, "t_end": 0.25,
                "integrator": {"scheme": "adaptive", "dt": 0.002, "tolerance": 1e-9}}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn violations_carry_key_paths() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"preset": "nope", "n": 7, "t_end": 9.0, "t_o": 1.0,
                "integrator": {"dt": -1.0}}"#,
        )
        .unwrap();
        let errs = cfg.violations();
        let text = errs.join("\n");
        for key in ["n:", "t_end:", "integrator.dt:", "preset:"] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
    }
}
