use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::antenna::AntennaConfig;
use crate::codebook::{DeployConfig, TrainConfig};
use crate::dcc::ScaConfig;
use crate::rectenna::RectennaParams;
use crate::rfc::AbfConfig;
use crate::search::{QuasiNewtonConfig, SeboConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    DccOpt,
    RfcSvd,
    RfcAbf,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::DccOpt => "dcc_opt",
            Scheme::RfcSvd => "rfc_svd",
            Scheme::RfcAbf => "rfc_abf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    Fixed,
    Binary,
    Continuous,
    Codebook,
}

impl Coding {
    pub fn as_str(self) -> &'static str {
        match self {
            Coding::Fixed => "fixed",
            Coding::Binary => "binary",
            Coding::Continuous => "continuous",
            Coding::Codebook => "codebook",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Coding::Fixed),
            "binary" => Ok(Coding::Binary),
            "continuous" => Ok(Coding::Continuous),
            "codebook" => Ok(Coding::Codebook),
            other => Err(Error::config("coding", format!("unknown coding {other:?}"))),
        }
    }
}

/// Everything one Monte Carlo experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Transmit antennas.
    pub m: usize,
    /// Receive antennas.
    pub n: usize,
    /// Pixel ports per antenna.
    pub q: usize,
    /// Angular samples of the radiation patterns.
    pub k: usize,
    /// Basis patterns kept per antenna.
    pub target_rank: usize,
    pub scheme: Scheme,
    pub coding: Coding,
    pub transmit_power_dbm: f64,
    pub path_loss_db: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub rectenna: RectennaParams,
    pub sebo: SeboConfig,
    pub qn: QuasiNewtonConfig,
    pub codebook_path: Option<PathBuf>,

    /// Seed of the synthetic antenna, ignored when `antenna_path` is set.
    pub antenna_seed: u64,
    pub antenna_path: Option<PathBuf>,
    pub antenna: AntennaConfig,
    /// Fixed-configuration coder as a bit string; all zeros when absent.
    pub baseline_coder: Option<String>,
    pub sca: ScaConfig,
    pub abf: AbfConfig,
    /// Alternation cap for binary coding.
    pub max_outer: usize,
    /// Alternation cap for continuous coding.
    pub continuous_max_outer: usize,
    pub outer_tol: f64,
    pub deploy: DeployConfig,
    pub train: TrainConfig,
    /// Worker threads for concurrent trials.
    pub workers: usize,
    /// Write measured times to the `wall_ms` column instead of zeros.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 2,
            n: 2,
            q: 10,
            k: 16,
            target_rank: 4,
            scheme: Scheme::DccOpt,
            coding: Coding::Binary,
            transmit_power_dbm: 36.0,
            path_loss_db: 66.0,
            trials: 200,
            master_seed: 1,
            rectenna: RectennaParams::default(),
            sebo: SeboConfig::default(),
            qn: QuasiNewtonConfig {
                max_iters: 50,
                ..QuasiNewtonConfig::default()
            },
            codebook_path: None,
            antenna_seed: 7,
            antenna_path: None,
            antenna: AntennaConfig::default(),
            baseline_coder: None,
            sca: ScaConfig::default(),
            abf: AbfConfig::default(),
            max_outer: 30,
            continuous_max_outer: 3,
            outer_tol: 1e-6,
            deploy: DeployConfig::default(),
            train: TrainConfig::default(),
            workers: 1,
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    /// Full-size geometry and trial count.
    pub fn paper_scale(mut self) -> Self {
        self.q = 39;
        self.k = 72;
        self.target_rank = 7;
        self.trials = 1000;
        self.qn = QuasiNewtonConfig {
            rng_seed: self.qn.rng_seed,
            ..QuasiNewtonConfig::default()
        };
        self.continuous_max_outer = self.max_outer;
        self
    }

    /// Transmit power in watts.
    pub fn transmit_power_watts(&self) -> f64 {
        10f64.powf((self.transmit_power_dbm - 30.0) / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coding == Coding::Codebook && self.codebook_path.is_none() {
            return Err(Error::config("codebook_path", "required when coding = codebook"));
        }
        self.validate_fields()
    }

    /// Everything in [`validate`](Self::validate) except the codebook file.
    pub(crate) fn validate_fields(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::config(if self.m == 0 { "m" } else { "n" }, "must be >= 1"));
        }
        if self.q == 0 || self.k == 0 || self.target_rank == 0 {
            return Err(Error::config("q", "q, k and target_rank must be >= 1"));
        }
        if !self.transmit_power_dbm.is_finite() {
            return Err(Error::config("transmit_power_dbm", "must be finite"));
        }
        if !self.path_loss_db.is_finite() {
            return Err(Error::config("path_loss_db", "must be finite"));
        }
        if self.max_outer == 0 || self.continuous_max_outer == 0 {
            return Err(Error::config("max_outer", "must be >= 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be >= 1"));
        }
        if let Some(b) = &self.baseline_coder {
            if b.len() != self.q || !b.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::config(
                    "baseline_coder",
                    format!("must be a string of {} zeros and ones", self.q),
                ));
            }
        }
        self.rectenna.validate()?;
        self.sebo.validate()?;
        self.qn.validate()?;
        self.antenna.validate()
    }

    /// Replaces `master_seed` when `value` (the `PIXELWPT_SEED` variable) is set.
    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.master_seed = v
                .trim()
                .parse()
                .map_err(|_| Error::config("PIXELWPT_SEED", format!("not an unsigned integer: {v:?}")))?;
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads JSON for `.json` files and TOML otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        // Relative paths inside the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.codebook_path, &mut cfg.antenna_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
