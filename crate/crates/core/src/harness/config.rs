use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::RicianFactors;
use crate::error::{Error, Result};
use crate::geometry::{PathLossModel, SystemGeometry};
use crate::numeric::dbm_to_watts;
use crate::protocol::Estimator;

/// What an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Monte Carlo achievable rates per scheme.
    #[default]
    Rates,
    /// Bound versus Monte Carlo received power.
    Theory,
    /// Real-multiplication counts.
    Complexity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SweepVar {
    #[default]
    #[serde(rename = "t")]
    T,
    #[serde(rename = "k_r_db")]
    KrDb,
    #[serde(rename = "p_u_dbm")]
    PuDbm,
    #[serde(rename = "n")]
    N,
}

impl SweepVar {
    pub fn label(self) -> &'static str {
        match self {
            SweepVar::T => "t",
            SweepVar::KrDb => "k_r_db",
            SweepVar::PuDbm => "p_u_dbm",
            SweepVar::N => "n",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(SweepVar::T),
            "k_r_db" => Ok(SweepVar::KrDb),
            "p_u_dbm" => Ok(SweepVar::PuDbm),
            "n" => Ok(SweepVar::N),
            other => Err(Error::Config(format!("unknown sweep variable '{other}'"))),
        }
    }
}

/// Rician factors in dB; `inf` gives a pure-LoS link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub k_d_db: f64,
    pub k_r_db: f64,
    pub k_g_db: f64,
    /// Removes the BS-UE link entirely.
    pub direct_blocked: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            k_d_db: -3.0,
            k_r_db: 3.0,
            k_g_db: 4.0,
            direct_blocked: false,
        }
    }
}

impl ChannelConfig {
    pub fn factors(&self) -> RicianFactors {
        RicianFactors::from_db(self.k_d_db, self.k_r_db, self.k_g_db)
    }
}

/// Array sizes, quantization and power budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub m_antennas: usize,
    pub n_elements: usize,
    pub bits: u32,
    /// Codebook size when T is not the swept variable.
    pub t_words: usize,
    /// 0-based reference antenna of the environment-aware codebook.
    pub m_ref: usize,
    pub p_d_dbm: f64,
    pub sigma2_d_dbm: f64,
    pub p_u_dbm: f64,
    pub sigma2_u_dbm: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m_antennas: 8,
            n_elements: 100,
            bits: 1,
            t_words: 50,
            m_ref: 0,
            p_d_dbm: 40.0,
            sigma2_d_dbm: -90.0,
            p_u_dbm: 0.0,
            sigma2_u_dbm: -110.0,
        }
    }
}

impl SystemConfig {
    pub fn p_d(&self) -> f64 {
        dbm_to_watts(self.p_d_dbm)
    }

    pub fn sigma2_d(&self) -> f64 {
        dbm_to_watts(self.sigma2_d_dbm)
    }

    pub fn sigma2_u(&self) -> f64 {
        dbm_to_watts(self.sigma2_u_dbm)
    }
}

/// Where MMSE gets the composite-channel correlation of each word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSource {
    /// Closed-form `E[h h^H]` from the channel statistics.
    #[default]
    Exact,
    /// Sample average over `covariance_samples` offline draws.
    Sample,
}

/// Monte Carlo and scheme settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scheme identifiers, optionally suffixed `@ls`, `@mmse` or `@genie`.
    pub schemes: Vec<String>,
    pub sweep_var: SweepVar,
    pub sweep_values: Vec<f64>,
    /// K_r values in dB for theory runs.
    pub k_r_list_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Default estimator for schemes without a suffix.
    pub estimator: Estimator,
    pub ao_iters: usize,
    pub ao_continuous: bool,
    pub covariance: CovarianceSource,
    /// Channel draws per MMSE sample covariance.
    pub covariance_samples: usize,
    /// Accept shorter codebooks when distinct words run out.
    pub allow_shortfall: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schemes: vec!["proposed".into()],
            sweep_var: SweepVar::T,
            sweep_values: vec![50.0],
            k_r_list_db: vec![3.0],
            trials: 1000,
            seed: 42,
            estimator: Estimator::Genie,
            ao_iters: 3,
            ao_continuous: false,
            covariance: CovarianceSource::Exact,
            covariance_samples: 10_000,
            allow_shortfall: true,
        }
    }
}

/// Full experiment description. Every field has a default, so a config file
/// only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub geometry: SystemGeometry,
    pub path_loss: PathLossModel,
    pub channel: ChannelConfig,
    pub system: SystemConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let run = &self.run;
        if run.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if run.sweep_values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if run.sweep_values.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("sweep grid contains NaN".into()));
        }
        if matches!(run.sweep_var, SweepVar::T | SweepVar::N)
            && run
                .sweep_values
                .iter()
                .any(|v| !(*v >= 1.0 && v.fract() == 0.0 && v.is_finite()))
        {
            return Err(Error::Config(format!(
                "{} grid needs positive integers",
                run.sweep_var
            )));
        }
        if self.kind == ExperimentKind::Theory {
            if run.sweep_var != SweepVar::T {
                return Err(Error::Config("theory runs sweep t".into()));
            }
            if run.k_r_list_db.is_empty() {
                return Err(Error::Config("theory run needs k_r_list_db".into()));
            }
        }
        if self.kind == ExperimentKind::Complexity && run.sweep_var != SweepVar::N {
            return Err(Error::Config("complexity runs sweep n".into()));
        }
        if self.kind == ExperimentKind::Rates {
            if run.schemes.is_empty() {
                return Err(Error::Config("no schemes selected".into()));
            }
            for s in &run.schemes {
                super::SchemeSpec::parse(s, run.estimator)?;
            }
        }
        let sys = &self.system;
        if sys.m_antennas == 0 || sys.n_elements == 0 || sys.t_words == 0 || run.ao_iters == 0 {
            return Err(Error::Config(
                "m_antennas, n_elements, t_words and ao_iters must be positive".into(),
            ));
        }
        if sys.m_ref >= sys.m_antennas {
            return Err(Error::Config(format!(
                "m_ref = {} but only {} antennas",
                sys.m_ref, sys.m_antennas
            )));
        }
        if sys.bits == 0 || sys.bits > crate::codebooks::MAX_BITS {
            return Err(Error::Config(format!(
                "bits must be in 1..={}",
                crate::codebooks::MAX_BITS
            )));
        }
        for (name, v) in [
            ("p_d_dbm", sys.p_d_dbm),
            ("sigma2_d_dbm", sys.sigma2_d_dbm),
            ("p_u_dbm", sys.p_u_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if sys.sigma2_u_dbm.is_nan() || sys.sigma2_u_dbm == f64::INFINITY {
            return Err(Error::Config("sigma2_u_dbm must be finite or -inf".into()));
        }
        for (name, v) in [
            ("k_d_db", self.channel.k_d_db),
            ("k_r_db", self.channel.k_r_db),
            ("k_g_db", self.channel.k_g_db),
        ] {
            if v.is_nan() {
                return Err(Error::Config(format!("{name} is NaN")));
            }
        }
        self.geometry.validate()?;
        self.path_loss.validate()?;
        Ok(())
    }
}
