//! Run configuration: JSON file, environment and flag overrides.
//!
//! Precedence is flag > environment > file > default. Unknown keys are
//! rejected. The config hash covers every key that can change results and
//! skips `workers`, `output_dir` and `verbosity`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decoder::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::phase_space::{Quadrature, Squeezing, LATTICE_SPACING};
use crate::report::{ReportSettings, REPORT_IDS};
use crate::simulator::{AbruptSchedule, Mode, ScenarioConfig};

pub const OUTPUT_DIR_ENV: &str = "CVQEC_OUTPUT_DIR";

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Keys that never affect numerical results.
const UNHASHED_KEYS: [&str; 3] = ["workers", "output_dir", "verbosity"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub modes: Vec<Mode>,
    /// Per-round, per-quadrature injected variance.
    pub sigma_sq: f64,
    /// `null` for ideal squeezing.
    pub squeezing_r: Option<f64>,
    pub rounds: usize,
    pub trajectories: usize,
    pub abrupt_enabled: bool,
    pub abrupt_period: u64,
    pub abrupt_magnitude: f64,
    pub abrupt_qumode: usize,
    pub abrupt_quadrature: Quadrature,
    pub decoder_threshold: f64,
    pub seed: u64,
    /// Worker threads, 0 = all cores.
    pub workers: usize,
    /// Trajectories whose full trace is exported (capped at 512).
    pub trace_count: usize,
    pub output_dir: PathBuf,
    pub reports: Vec<String>,
    pub report_settings: ReportSettings,
    pub verbosity: u8,
}

pub const MAX_TRACES: usize = 512;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            modes: Mode::ALL.to_vec(),
            sigma_sq: 0.2,
            squeezing_r: None,
            rounds: 1000,
            trajectories: 2000,
            abrupt_enabled: true,
            abrupt_period: 100,
            abrupt_magnitude: LATTICE_SPACING,
            abrupt_qumode: 1,
            abrupt_quadrature: Quadrature::X,
            decoder_threshold: DEFAULT_THRESHOLD,
            seed: DEFAULT_SEED,
            workers: 0,
            trace_count: 16,
            output_dir: PathBuf::from("cvqec-out"),
            reports: REPORT_IDS.iter().map(|s| s.to_string()).collect(),
            report_settings: ReportSettings::default(),
            verbosity: 1,
        }
    }
}

/// Flag values; `None` leaves the lower-precedence value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub modes: Option<Vec<Mode>>,
    pub sigma_sq: Option<f64>,
    pub squeezing_r: Option<f64>,
    pub ideal: bool,
    pub rounds: Option<usize>,
    pub trajectories: Option<usize>,
    pub abrupt_enabled: Option<bool>,
    pub abrupt_period: Option<u64>,
    pub abrupt_magnitude: Option<f64>,
    pub abrupt_qumode: Option<usize>,
    pub abrupt_quadrature: Option<Quadrature>,
    pub decoder_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub trace_count: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub reports: Option<Vec<String>>,
    pub verbosity: Option<u8>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// File (or default), then environment, then flags.
    pub fn resolve(file: Option<&Path>, env_output_dir: Option<String>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(dir) = env_output_dir.filter(|d| !d.is_empty()) {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(
            modes, sigma_sq, rounds, trajectories, abrupt_enabled, abrupt_period, abrupt_magnitude, abrupt_qumode,
            abrupt_quadrature, decoder_threshold, seed, workers, trace_count, output_dir, reports, verbosity
        );
        if o.ideal {
            self.squeezing_r = None;
        }
        if let Some(r) = o.squeezing_r {
            self.squeezing_r = Some(r);
        }
    }

    pub fn squeezing(&self) -> Squeezing {
        match self.squeezing_r {
            None => Squeezing::Ideal,
            Some(r) => Squeezing::Finite { r },
        }
    }

    pub fn abrupt(&self) -> Option<AbruptSchedule> {
        self.abrupt_enabled.then_some(AbruptSchedule {
            period: self.abrupt_period,
            magnitude: self.abrupt_magnitude,
            target_qumode: self.abrupt_qumode,
            quadrature: self.abrupt_quadrature,
        })
    }

    pub fn scenario(&self, mode: Mode) -> ScenarioConfig {
        ScenarioConfig {
            mode,
            sigma_sq: self.sigma_sq,
            squeezing: self.squeezing(),
            rounds: self.rounds,
            trajectories: self.trajectories,
            abrupt: self.abrupt(),
            decoder_threshold: self.decoder_threshold,
            master_seed: self.seed,
        }
    }

    pub fn effective_trace_count(&self) -> usize {
        self.trace_count.min(MAX_TRACES).min(self.trajectories)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Error::Config(m);
        if self.modes.is_empty() {
            return Err(cfg_err("modes must list at least one mode".into()));
        }
        if let Some(r) = self.squeezing_r {
            Squeezing::finite(r).map_err(|e| cfg_err(format!("squeezing_r: {e}")))?;
        }
        for id in &self.reports {
            if !REPORT_IDS.contains(&id.as_str()) {
                return Err(cfg_err(format!("reports: unknown id '{id}' (valid: {})", REPORT_IDS.join(", "))));
            }
        }
        let rs = &self.report_settings;
        if !(rs.sigma_res_sq.is_finite() && rs.sigma_res_sq > 0.0) {
            return Err(cfg_err("report_settings.sigma_res_sq must be > 0".into()));
        }
        if rs.fig5_grid.iter().chain(rs.residual_sigmas.iter()).any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(cfg_err("report_settings grids must contain only values > 0".into()));
        }
        for mode in &self.modes {
            self.scenario(*mode).validate().map_err(|e| cfg_err(e.to_string()))?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of all result-affecting keys.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            for key in UNHASHED_KEYS {
                map.remove(key);
            }
        }
        // serde_json maps are ordered by key, so this string is canonical
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let cfg = RunConfig {
            squeezing_r: Some(1.151_292_546_497_023),
            sigma_sq: 0.1 + 0.2,
            modes: vec![Mode::GkpOnly],
            ..RunConfig::default()
        };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = RunConfig::from_json("{\n  \"rounds\": 5,\n  \"roundz\": 3\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("roundz") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn three_way_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"rounds": 7, "trajectories": 9, "output_dir": "from-file"}"#).unwrap();
        let flags = Overrides { rounds: Some(3), ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), None, &flags).unwrap();
        assert_eq!(cfg.rounds, 3);
        assert_eq!(cfg.trajectories, 9);
        assert_eq!(cfg.sigma_sq, 0.2);
        assert_eq!(cfg.output_dir, PathBuf::from("from-file"));

        let cfg = RunConfig::resolve(Some(&path), Some("from-env".into()), &Overrides::default()).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("from-env"));
        let flags = Overrides { output_dir: Some("from-flag".into()), ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), Some("from-env".into()), &flags).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("from-flag"));
    }

    #[test]
    fn hash_ignores_presentation_keys() {
        let a = RunConfig::default();
        let b = RunConfig { workers: 8, verbosity: 3, output_dir: "elsewhere".into(), ..a.clone() };
        assert_eq!(a.config_hash(), b.config_hash());
        let c = RunConfig { seed: 1, ..a.clone() };
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn validation_reports_config_errors() {
        for text in [r#"{"rounds": 0}"#, r#"{"reports": ["fig9"]}"#, r#"{"squeezing_r": -1}"#, r#"{"modes": []}"#] {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn trace_count_is_capped() {
        let cfg = RunConfig { trace_count: 5000, ..Default::default() };
        assert_eq!(cfg.effective_trace_count(), MAX_TRACES);
    }
}
