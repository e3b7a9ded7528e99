//! One coherence block of codebook training: per-word pilot, estimate,
//! MRT beamformer and rate metric, followed by selection of the best word
//! and evaluation of the rate it actually delivers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelRealization;
use crate::error::{Error, Result};
use crate::estimation::{
    ls_estimate, mmse_estimate, uplink_receive, ChannelCovariance, PilotConfig,
};
use crate::numeric::{inner, norm_sqr, CVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Downlink transmit power, watts.
    pub p_d: f64,
    /// UE noise power, watts.
    pub sigma2_d: f64,
}

impl LinkBudget {
    pub fn new(p_d: f64, sigma2_d: f64) -> Result<Self> {
        if !(p_d > 0.0 && sigma2_d > 0.0) {
            return Err(Error::Domain(
                "link budget needs p_d > 0 and sigma2_d > 0".into(),
            ));
        }
        Ok(Self { p_d, sigma2_d })
    }

    pub fn snr_scale(&self) -> f64 {
        self.p_d / self.sigma2_d
    }
}

/// `h / ||h||`.
pub fn mrt_beamformer(h_est: &CVec) -> Result<CVec> {
    let n = h_est.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::DegenerateEstimate);
    }
    Ok(h_est.unscale(n))
}

/// Rate metric from the raw pilot observation:
/// `log2(1 + p_d ||y||^2 / (sigma2_d p_u))`.
pub fn training_metric(y: &CVec, budget: &LinkBudget, cfg: &PilotConfig) -> f64 {
    (1.0 + budget.p_d * norm_sqr(y) / (budget.sigma2_d * cfg.p_u)).log2()
}

/// `log2(1 + p_d |h^H w|^2 / sigma2_d)`.
pub fn realized_rate(h_true: &CVec, w: &CVec, budget: &LinkBudget) -> f64 {
    (1.0 + budget.snr_scale() * inner(h_true, w).norm_sqr()).log2()
}

/// Index of the largest metric; the first one on exact ties.
pub fn select_codeword(metrics: &[f64]) -> Result<usize> {
    if metrics.is_empty() {
        return Err(Error::Domain(
            "cannot select from an empty metric list".into(),
        ));
    }
    let mut best = 0;
    for (i, &v) in metrics.iter().enumerate().skip(1) {
        if v > metrics[best] {
            best = i;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Ls,
    Mmse,
    Genie,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::Ls => "ls",
            Estimator::Mmse => "mmse",
            Estimator::Genie => "genie",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ls" => Ok(Estimator::Ls),
            "mmse" => Ok(Estimator::Mmse),
            "genie" | "perfect" => Ok(Estimator::Genie),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Estimator plus whatever side information it needs.
#[derive(Debug, Clone, Copy)]
pub enum EstimatorChoice<'a> {
    Ls,
    /// One correlation matrix per codebook word, in codebook order.
    Mmse(&'a [ChannelCovariance]),
    Genie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// 0-based index of the selected word.
    pub selected_index: usize,
    /// Per-word training metrics, bits/s/Hz.
    pub training_metrics: Vec<f64>,
    /// Rate of the selected word under the true channel with the
    /// beamformer built from its estimate, bits/s/Hz.
    pub realized_rate: f64,
    pub scheme_label: String,
}

impl TrialResult {
    pub fn metric_rate(&self) -> f64 {
        self.training_metrics[self.selected_index]
    }
}

/// Per-word outcome of one training sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEvaluations {
    /// Training metric of each word, bits/s/Hz.
    pub metrics: Vec<f64>,
    /// Rate each word would deliver if selected: its estimate's MRT
    /// beamformer scored on its true composite channel.
    pub realized: Vec<f64>,
}

impl WordEvaluations {
    /// Selection restricted to the first `t_words` words; returns the
    /// selected index and its realized rate.
    pub fn select_prefix(&self, t_words: usize) -> Result<(usize, f64)> {
        let t = t_words.min(self.metrics.len());
        let k = select_codeword(&self.metrics[..t])?;
        Ok((k, self.realized[k]))
    }
}

/// Trains every word in order on one channel realization.
///
/// For every word the composite channel is formed and estimated: `Ls` and
/// `Mmse` observe one noisy pilot, `Genie` reads the true channel. The
/// metric of a word is the MRT rate its own estimate promises,
/// `log2(1 + p_d ||h_est||^2 / sigma2_d)`, which for LS coincides with
/// [`training_metric`] on the raw observation. Pilot noise is drawn word by
/// word, so any prefix of `words` sees the same draws as a shorter sweep.
pub fn evaluate_words<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    words: &[Vec<num_complex::Complex64>],
    budget: &LinkBudget,
    pilot: &PilotConfig,
    estimator: EstimatorChoice<'_>,
    rng: &mut R,
) -> Result<WordEvaluations> {
    if words.is_empty() {
        return Err(Error::Domain("codebook is empty".into()));
    }
    if let EstimatorChoice::Mmse(covs) = estimator {
        if covs.len() < words.len() {
            return Err(Error::Dimension(format!(
                "{} covariances for {} words",
                covs.len(),
                words.len()
            )));
        }
    }
    let mut metrics = Vec::with_capacity(words.len());
    let mut realized = Vec::with_capacity(words.len());
    for (t, w) in words.iter().enumerate() {
        let h = channel.composite(w)?;
        let est = match estimator {
            EstimatorChoice::Genie => {
                // genie metric is exactly the rate MRT delivers on h
                let rate = match mrt_beamformer(&h) {
                    Ok(bf) => realized_rate(&h, &bf, budget),
                    Err(_) => 0.0,
                };
                metrics.push(rate);
                realized.push(rate);
                continue;
            }
            EstimatorChoice::Ls => ls_estimate(&uplink_receive(&h, pilot, rng), pilot),
            EstimatorChoice::Mmse(covs) => {
                let y = uplink_receive(&h, pilot, rng);
                mmse_estimate(&ls_estimate(&y, pilot), &covs[t], pilot)?
            }
        };
        metrics.push((1.0 + budget.snr_scale() * norm_sqr(&est)).log2());
        realized.push(match mrt_beamformer(&est) {
            Ok(bf) => realized_rate(&h, &bf, budget),
            // an all-zero estimate leaves nothing to beamform toward
            Err(_) => 0.0,
        });
    }
    Ok(WordEvaluations { metrics, realized })
}

/// Runs training over `words` on one channel realization, selects the best
/// word and scores its beamformer on the true composite channel.
pub fn run_coherence_block<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    words: &[Vec<num_complex::Complex64>],
    budget: &LinkBudget,
    pilot: &PilotConfig,
    estimator: EstimatorChoice<'_>,
    rng: &mut R,
    label: &str,
) -> Result<TrialResult> {
    let eval = evaluate_words(channel, words, budget, pilot, estimator, rng)?;
    let (selected, realized) = eval.select_prefix(words.len())?;
    Ok(TrialResult {
        selected_index: selected,
        training_metrics: eval.metrics,
        realized_rate: realized,
        scheme_label: label.to_string(),
    })
}
