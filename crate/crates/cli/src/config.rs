use serde::{Deserialize, Serialize};

use maslov_core::jacobiflow::{CurvatureProfile, FlowSettings, ProfileKind};
use maslov_core::maslov::ScanSettings;
use maslov_core::morse::MorseSettings;
use maslov_core::RealMatrix;

use crate::presets;

/// Invalid or inconsistent configuration (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Numerical settings; every field may be omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    /// Integration steps per unit of `t`.
    pub steps: usize,
    pub drift_tol: f64,
    pub rank_tol: f64,
    /// Elements for the finite-difference and Galerkin matrices.
    pub mesh: usize,
    pub lambda_margin: f64,
    /// Seed for the `random-trig` preset.
    pub seed: u64,
    /// Coarse samples per path in the crossing scan.
    pub grid: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let m = MorseSettings::default();
        Settings {
            steps: m.flow.steps,
            drift_tol: m.flow.drift_tol,
            rank_tol: m.scan.tol,
            mesh: m.mesh,
            lambda_margin: m.lambda_margin,
            seed: 0,
            grid: m.scan.grid,
        }
    }
}

impl Settings {
    pub fn morse(&self) -> MorseSettings {
        MorseSettings {
            flow: FlowSettings {
                steps: self.steps,
                drift_tol: self.drift_tol,
                ..FlowSettings::default()
            },
            scan: ScanSettings {
                grid: self.grid,
                tol: self.rank_tol,
            },
            mesh: self.mesh,
            lambda_margin: self.lambda_margin,
        }
    }
}

/// Per-subcommand parameters; each subcommand reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcommandParams {
    /// `rectangle`, `spectrum`: explicit `λ₀` instead of the automatic one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// `maslov-loop`: the symmetric matrix `S` (default `diag(1, …, n)`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<RealMatrix>,
    /// `maslov-loop`: initial winding samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// `hessian`: meshes to evaluate (default `[mesh, 2·mesh]`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meshes: Option<Vec<usize>>,
}

/// One run of the tool, as read from the configuration document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Named profile from the catalog; explicit fields below override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileKind>,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default, rename = "subcommand-params")]
    pub params: SubcommandParams,
}

/// Strict parse: unknown keys are rejected and errors carry the field path,
/// line and column.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            ConfigError(inner.to_string())
        } else {
            ConfigError(format!("field `{path}`: {inner}"))
        }
    })?;
    cfg.settings
        .morse()
        .validate()
        .map_err(|e| ConfigError(format!("settings: {e}")))?;
    Ok(cfg)
}

/// A configuration with the preset expanded and the profile built.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub profile: CurvatureProfile,
    pub settings: MorseSettings,
    pub params: SubcommandParams,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let base = match &self.preset {
            Some(name) => {
                let p = presets::find(name).ok_or_else(|| {
                    let known: Vec<&str> = presets::catalog().iter().map(|p| p.name).collect();
                    ConfigError(format!("unknown preset `{name}` (known: {})", known.join(", ")))
                })?;
                Some(p.build(self.settings.seed).map_err(|e| ConfigError(format!("preset `{name}`: {e}")))?)
            }
            None => None,
        };
        let (n, interval, kind) = match base {
            Some(b) => (
                self.n.unwrap_or(b.n),
                self.interval.unwrap_or(b.interval),
                self.profile.clone().unwrap_or(b.kind),
            ),
            None => (
                self.n.ok_or_else(|| ConfigError("missing field `n`".into()))?,
                self.interval.ok_or_else(|| ConfigError("missing field `interval`".into()))?,
                self.profile.clone().ok_or_else(|| ConfigError("missing field `profile`".into()))?,
            ),
        };
        let profile = CurvatureProfile::new(n, interval[0], interval[1], kind)
            .map_err(|e| ConfigError(format!("profile: {e}")))?;
        Ok(Resolved {
            profile,
            settings: self.settings.morse(),
            params: self.params.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_flat_config_gets_defaults() {
        let cfg = parse_config(r#"{"n": 1, "interval": [0, 1], "profile": {"kind": "constant", "r": [[0]]}}"#).unwrap();
        assert_eq!(cfg.settings, Settings::default());
        let r = cfg.resolve().unwrap();
        assert_eq!(r.profile.n(), 1);
        assert_eq!(r.settings, MorseSettings::default());
    }

    #[test]
    fn negative_steps_rejected() {
        let e = parse_config(r#"{"preset": "flat", "settings": {"steps": -5}}"#).unwrap_err();
        assert!(e.0.contains("settings.steps"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config(r#"{"preset": "flat", "colour": 1}"#).is_err());
        let e = parse_config(r#"{"preset": "flat", "settings": {"stepz": 10}}"#).unwrap_err();
        assert!(e.0.contains("stepz"));
        let e = parse_config(r#"{"n": 1, "interval": [0, 1], "profile": {"kind": "constant", "r": [[0]], "x": 2}}"#);
        assert!(e.is_err());
    }

    #[test]
    fn out_of_range_settings_rejected() {
        assert!(parse_config(r#"{"preset": "flat", "settings": {"rank_tol": 0}}"#).is_err());
        assert!(parse_config(r#"{"preset": "flat", "settings": {"mesh": 2}}"#).is_err());
    }

    #[test]
    fn preset_expands() {
        let r = parse_config(r#"{"preset": "sphere-like-n2"}"#).unwrap().resolve().unwrap();
        assert_eq!(r.profile.n(), 2);
        assert_eq!(r.profile.eval(1.0).unwrap(), RealMatrix::identity(2).scale(-1.0));
    }

    #[test]
    fn missing_profile_reported() {
        let e = parse_config(r#"{"n": 1, "interval": [0, 1]}"#).unwrap().resolve().unwrap_err();
        assert!(e.0.contains("profile"));
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = r#"{"n": 2, "interval": [0, 4], "profile": {"kind": "diagonal-constant", "diag": [-1, -4]},
            "settings": {"seed": 3}, "subcommand-params": {"lambda0": -6}}"#;
        let cfg = parse_config(text).unwrap();
        let again = serde_json::to_string(&cfg).unwrap();
        let cfg2 = parse_config(&again).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(again, serde_json::to_string(&cfg2).unwrap());
    }
}
