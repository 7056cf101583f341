//! Flat `key = value` run configuration. Precedence: `--set`/`--seed` over the
//! config file over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qnd_core::constants::*;
use qnd_core::inference::QndModel;
use qnd_core::stark::LineCatalog;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub catalog_path: Option<PathBuf>,
    pub intensity_w_m2: f64,
    pub eta: f64,
    pub omega0_hz: f64,
    pub t_odf_s: f64,
    pub t2_s: f64,
    pub nbar_background: f64,
    pub p_alpha: f64,
    pub p_beta: f64,
    pub n_rep: usize,
    /// `None` places the cut halfway between k_t and k_t + 1.
    pub threshold_p: Option<f64>,
    pub prep_success: f64,
    pub mass_correction: f64,
    pub seed: u64,
}

pub const KEYS: [&str; 14] = [
    "catalog_path",
    "intensity_w_m2",
    "eta",
    "omega0_hz",
    "t_odf_s",
    "t2_s",
    "nbar_background",
    "p_alpha",
    "p_beta",
    "n_rep",
    "threshold_p",
    "prep_success",
    "mass_correction",
    "seed",
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            catalog_path: None,
            intensity_w_m2: OPERATING_INTENSITY,
            eta: OPERATING_ETA,
            omega0_hz: OPERATING_OMEGA0,
            t_odf_s: OPERATING_T_ODF,
            t2_s: f64::INFINITY,
            nbar_background: DEFAULT_NBAR_BACKGROUND,
            p_alpha: OPERATING_P_BRIGHT,
            p_beta: OPERATING_P_DARK,
            n_rep: OPERATING_N_REP,
            threshold_p: None,
            prep_success: DEFAULT_PREP_SUCCESS,
            mass_correction: DEFAULT_MASS_CORRECTION,
            seed: 0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str, origin: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::input(format!("{origin}: `{key}` has invalid value {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), CliError> {
        match key {
            "catalog_path" => self.catalog_path = Some(PathBuf::from(value)),
            "intensity_w_m2" => self.intensity_w_m2 = num(key, value, origin)?,
            "eta" => self.eta = num(key, value, origin)?,
            "omega0_hz" => self.omega0_hz = num(key, value, origin)?,
            "t_odf_s" => self.t_odf_s = num(key, value, origin)?,
            "t2_s" => self.t2_s = num(key, value, origin)?,
            "nbar_background" => self.nbar_background = num(key, value, origin)?,
            "p_alpha" => self.p_alpha = num(key, value, origin)?,
            "p_beta" => self.p_beta = num(key, value, origin)?,
            "n_rep" => self.n_rep = num(key, value, origin)?,
            "threshold_p" if value == "auto" => self.threshold_p = None,
            "threshold_p" => self.threshold_p = Some(num(key, value, origin)?),
            "prep_success" => self.prep_success = num(key, value, origin)?,
            "mass_correction" => self.mass_correction = num(key, value, origin)?,
            "seed" => self.seed = num(key, value, origin)?,
            other => {
                return Err(CliError::input(format!(
                    "{origin}: unknown config key `{other}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat config text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let place = format!("{origin}:{}", idx + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("{place}: expected `key = value`")))?;
            self.set(key.trim(), value.trim(), &place)?;
        }
        Ok(())
    }

    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, String)],
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = path {
            let body = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
            config.apply_text(&body, &path.display().to_string())?;
        }
        for (k, v) in overrides {
            config.set(k, v, "--set")?;
        }
        if let Some(seed) = seed {
            config.seed = seed;
        }
        Ok(config)
    }

    pub fn catalog(&self) -> Result<LineCatalog, CliError> {
        match &self.catalog_path {
            None => Ok(LineCatalog::n2_plus()),
            Some(p) => Ok(LineCatalog::load(p)?),
        }
    }

    pub fn model(&self) -> Result<QndModel, CliError> {
        let model = QndModel::new(self.p_alpha, self.p_beta, self.n_rep)?;
        Ok(match self.threshold_p {
            Some(t) => model.with_threshold_p(t)?,
            None => model,
        })
    }

    /// Every key with its effective value, for the result envelope.
    pub fn snapshot(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert(
            "catalog_path",
            self.catalog_path
                .as_ref()
                .map_or_else(|| "<bundled>".to_string(), |p| p.display().to_string()),
        );
        m.insert("intensity_w_m2", self.intensity_w_m2.to_string());
        m.insert("eta", self.eta.to_string());
        m.insert("omega0_hz", self.omega0_hz.to_string());
        m.insert("t_odf_s", self.t_odf_s.to_string());
        m.insert("t2_s", self.t2_s.to_string());
        m.insert("nbar_background", self.nbar_background.to_string());
        m.insert("p_alpha", self.p_alpha.to_string());
        m.insert("p_beta", self.p_beta.to_string());
        m.insert("n_rep", self.n_rep.to_string());
        m.insert(
            "threshold_p",
            self.threshold_p.map_or_else(|| "auto".to_string(), |t| t.to_string()),
        );
        m.insert("prep_success", self.prep_success.to_string());
        m.insert("mass_correction", self.mass_correction.to_string());
        m.insert("seed", self.seed.to_string());
        m
    }
}

/// Splits a `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}
