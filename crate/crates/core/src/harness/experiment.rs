use std::fmt;

use log::{info, warn};
use rayon::prelude::*;

use super::config::{CovarianceSource, ExperimentConfig, ExperimentKind, SweepVar};
use super::output::{ComplexityRow, ResultRow, TheoryRow};
use crate::baselines::{
    ao_optimize, complexity_model, no_ris_rate, scsi_codeword, AoConfig, AoPhases,
    CascadedEstimator,
};
use crate::channels::{ChannelRealization, ChannelStats, LosComponents};
use crate::codebooks::{
    build_alphabet, dft_codebook, env_aware_codebook, random_codebook, rps_vector, DedupPolicy,
    PhaseAlphabet,
};
use crate::error::{Error, Result};
use crate::estimation::{exact_correlations, sample_covariances, ChannelCovariance, PilotConfig};
use crate::geometry::link_gains;
use crate::numeric::{dbm_to_watts, stream_rng, StreamKind, C64};
use crate::protocol::{
    evaluate_words, mrt_beamformer, realized_rate, Estimator, EstimatorChoice, LinkBudget,
};
use crate::theory::{mc_power_curve, prop1_bound, TheoryParams, TheoryScene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Environment-aware codebook.
    Proposed,
    /// AO with perfect cascaded CSI.
    Ao,
    /// AO on cascaded LS estimates from N + 1 DFT training slots.
    AoEst,
    Rand,
    Dft,
    Rps,
    Scsi,
    NoRis,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::Proposed,
        SchemeKind::Ao,
        SchemeKind::AoEst,
        SchemeKind::Rand,
        SchemeKind::Dft,
        SchemeKind::Rps,
        SchemeKind::Scsi,
        SchemeKind::NoRis,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::Ao => "ao",
            SchemeKind::AoEst => "ao_est",
            SchemeKind::Rand => "rand",
            SchemeKind::Dft => "dft",
            SchemeKind::Rps => "rps",
            SchemeKind::Scsi => "scsi",
            SchemeKind::NoRis => "no_ris",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    /// RNG lane shared by every spec of this kind, so `proposed@ls` and
    /// `proposed@mmse` see the same codebook and pilot noise.
    fn lane(self) -> u32 {
        self as u32
    }

    fn trains_words(self) -> bool {
        matches!(
            self,
            SchemeKind::Proposed
                | SchemeKind::Rand
                | SchemeKind::Dft
                | SchemeKind::Rps
                | SchemeKind::Scsi
        )
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A scheme identifier as written in configs: `kind` or `kind@estimator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub estimator: Estimator,
    pub label: String,
}

impl SchemeSpec {
    pub fn parse(s: &str, default_estimator: Estimator) -> Result<Self> {
        let s = s.trim();
        let (name, suffix) = match s.split_once('@') {
            Some((n, e)) => (n, Some(e)),
            None => (s, None),
        };
        let kind = SchemeKind::from_label(name)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{name}'")))?;
        let estimator = match suffix {
            Some(e) => e.parse()?,
            None => default_estimator,
        };
        if !kind.trains_words() && suffix.is_some() {
            return Err(Error::Config(format!(
                "scheme '{name}' does not take an estimator suffix"
            )));
        }
        if kind == SchemeKind::Rps && estimator == Estimator::Mmse {
            return Err(Error::Config(
                "rps draws a fresh word per trial and has no per-word covariance for MMSE".into(),
            ));
        }
        Ok(Self {
            kind,
            estimator: if kind.trains_words() {
                estimator
            } else {
                Estimator::Genie
            },
            label: s.to_string(),
        })
    }
}

/// Per-trial outcomes of one scheme at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub scheme: String,
    pub sweep_value: f64,
    pub metric: Vec<f64>,
    pub realized: Vec<f64>,
    /// Digest of the channel realization each trial used.
    pub digests: Vec<u64>,
}

impl PointOutcome {
    pub fn row(&self, sweep_var: SweepVar, seed: u64) -> ResultRow {
        let (mean_realized, std_error) = mean_and_se(&self.realized);
        ResultRow {
            scheme: self.scheme.clone(),
            sweep_var: sweep_var.label().to_string(),
            sweep_value: self.sweep_value,
            mean_metric_rate: mean_and_se(&self.metric).0,
            mean_realized_rate: mean_realized,
            std_error,
            trials: self.realized.len(),
            seed,
        }
    }
}

/// Sample mean and its standard error `std / sqrt(n)` (0 for one sample).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Rates(Vec<ResultRow>),
    Theory(Vec<TheoryRow>),
    Complexity(Vec<ComplexityRow>),
}

impl ExperimentOutput {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        match self {
            ExperimentOutput::Rates(r) => super::output::write_csv(r, path),
            ExperimentOutput::Theory(r) => super::output::write_theory_csv(r, path),
            ExperimentOutput::Complexity(r) => super::output::write_complexity_csv(r, path),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Rates => {
            let rows = run_rates_detailed(cfg)?
                .iter()
                .map(|p| p.row(cfg.run.sweep_var, cfg.run.seed))
                .collect();
            Ok(ExperimentOutput::Rates(rows))
        }
        ExperimentKind::Theory => run_theory(cfg).map(ExperimentOutput::Theory),
        ExperimentKind::Complexity => run_complexity(cfg).map(ExperimentOutput::Complexity),
    }
}

/// Everything fixed at one sweep point.
struct PointSetup {
    /// Reported sweep values; several when T is swept over nested codebooks.
    sweep_values: Vec<f64>,
    t_list: Vec<usize>,
    stats: ChannelStats,
    budget: LinkBudget,
    pilot: PilotConfig,
    alphabet: PhaseAlphabet,
    m_ref: usize,
}

impl PointSetup {
    fn new(cfg: &ExperimentConfig, values: &[f64]) -> Result<Self> {
        let mut channel = cfg.channel.clone();
        let mut system = cfg.system.clone();
        let t_list = match cfg.run.sweep_var {
            SweepVar::T => values.iter().map(|v| *v as usize).collect(),
            SweepVar::KrDb => {
                channel.k_r_db = values[0];
                vec![system.t_words]
            }
            SweepVar::PuDbm => {
                system.p_u_dbm = values[0];
                vec![system.t_words]
            }
            SweepVar::N => {
                system.n_elements = values[0] as usize;
                vec![system.t_words]
            }
        };
        let mut los =
            LosComponents::from_geometry(&cfg.geometry, system.m_antennas, system.n_elements)?;
        if channel.direct_blocked {
            los = los.without_direct();
        }
        let stats = ChannelStats {
            los,
            gains: link_gains(&cfg.geometry, &cfg.path_loss)?,
            k: channel.factors(),
        };
        Ok(Self {
            sweep_values: values.to_vec(),
            t_list,
            stats,
            budget: LinkBudget::new(system.p_d(), system.sigma2_d())?,
            pilot: PilotConfig::new(dbm_to_watts(system.p_u_dbm), system.sigma2_u())?,
            alphabet: build_alphabet(system.bits)?,
            m_ref: system.m_ref,
        })
    }

    fn t_max(&self) -> usize {
        *self.t_list.iter().max().expect("at least one T")
    }
}

/// How a word-training scheme obtains its codebook.
enum WordSource {
    /// Deterministic codebook shared by every trial.
    Fixed(Vec<Vec<C64>>),
    /// Environment-aware codebook redrawn per trial.
    EnvAware,
    /// Random codebook redrawn per trial.
    Random,
}

enum Prepared {
    Words {
        source: WordSource,
        /// Correlations of a fixed codebook, computed once.
        fixed_covs: Option<Vec<ChannelCovariance>>,
    },
    Rps,
    Ao(AoConfig),
    AoEst(AoConfig, CascadedEstimator),
    NoRis,
}

fn dedup_policy(cfg: &ExperimentConfig) -> DedupPolicy {
    DedupPolicy {
        max_attempts: None,
        allow_shortfall: cfg.run.allow_shortfall,
    }
}

/// Codebook of trial `trial`, drawn from its own stream so trials stay
/// independent of execution order.
fn draw_words(
    cfg: &ExperimentConfig,
    setup: &PointSetup,
    source: &WordSource,
    lane: u32,
    trial: u32,
) -> Result<Vec<Vec<C64>>> {
    let mut rng = stream_rng(cfg.run.seed, StreamKind::Codebook, lane, trial);
    let t_max = setup.t_max();
    Ok(match source {
        WordSource::Fixed(words) => words.clone(),
        WordSource::EnvAware => env_aware_codebook(
            &setup.stats.los,
            &setup.stats.k,
            t_max,
            setup.m_ref,
            &setup.alphabet,
            dedup_policy(cfg),
            &mut rng,
        )?
        .phasors(),
        WordSource::Random => random_codebook(
            t_max,
            setup.stats.n_elements(),
            &setup.alphabet,
            dedup_policy(cfg),
            &mut rng,
        )?
        .phasors(),
    })
}

fn correlations(
    cfg: &ExperimentConfig,
    setup: &PointSetup,
    words: &[Vec<C64>],
    lane: u32,
    trial: u32,
) -> Result<Vec<ChannelCovariance>> {
    match cfg.run.covariance {
        CovarianceSource::Exact => exact_correlations(words, &setup.stats),
        CovarianceSource::Sample => {
            let mut rng = stream_rng(cfg.run.seed, StreamKind::Covariance, lane, trial);
            sample_covariances(words, &setup.stats, cfg.run.covariance_samples, &mut rng)
        }
    }
}

fn prepare(cfg: &ExperimentConfig, setup: &PointSetup, spec: &SchemeSpec) -> Result<Prepared> {
    let lane = spec.kind.lane();
    let n = setup.stats.n_elements();
    let t_max = setup.t_max();
    let source = match spec.kind {
        SchemeKind::Proposed => WordSource::EnvAware,
        SchemeKind::Rand => WordSource::Random,
        SchemeKind::Dft => WordSource::Fixed(dft_codebook(t_max, n)?),
        SchemeKind::Scsi => {
            WordSource::Fixed(vec![
                scsi_codeword(&setup.stats.los, &setup.alphabet).phasors(&setup.alphabet)
            ])
        }
        SchemeKind::Rps => return Ok(Prepared::Rps),
        SchemeKind::Ao | SchemeKind::AoEst => {
            let ao = AoConfig {
                n_iter: cfg.run.ao_iters,
                phases: if cfg.run.ao_continuous {
                    AoPhases::Continuous
                } else {
                    AoPhases::Discrete(setup.alphabet.clone())
                },
                init_rc: None,
            };
            return Ok(if spec.kind == SchemeKind::Ao {
                Prepared::Ao(ao)
            } else {
                Prepared::AoEst(ao, CascadedEstimator::dft(n))
            });
        }
        SchemeKind::NoRis => return Ok(Prepared::NoRis),
    };
    let fixed_covs = match &source {
        WordSource::Fixed(words) => {
            if spec.estimator == Estimator::Mmse {
                Some(correlations(cfg, setup, words, lane, 0)?)
            } else {
                None
            }
        }
        // a probe draw surfaces dedup shortfall once instead of per trial
        drawn => {
            let words = draw_words(cfg, setup, drawn, lane, 0)?;
            if words.len() < t_max {
                warn!(
                    "{}: only {} distinct words of {} requested in trial 0; larger T reuse the full codebook",
                    spec.label,
                    words.len(),
                    t_max
                );
            }
            None
        }
    };
    Ok(Prepared::Words { source, fixed_covs })
}

/// `(metric, realized)` of one scheme on one channel, per entry of `t_list`.
/// `drawn` carries this trial's codebook for schemes that redraw it.
fn run_scheme(
    cfg: &ExperimentConfig,
    spec: &SchemeSpec,
    prepared: &Prepared,
    setup: &PointSetup,
    channel: &ChannelRealization,
    drawn: Option<&[Vec<C64>]>,
    trial: u32,
) -> Result<Vec<(f64, f64)>> {
    let seed = cfg.run.seed;
    let lane = spec.kind.lane();
    let mut pilot_rng = stream_rng(seed, StreamKind::Pilot, lane, trial);
    let same_for_all = |pair: (f64, f64)| vec![pair; setup.t_list.len()];
    match prepared {
        Prepared::Words { source, fixed_covs } => {
            let words: &[Vec<C64>] = match (source, drawn) {
                (WordSource::Fixed(w), _) => w,
                (_, Some(w)) => w,
                (_, None) => return Err(Error::Domain("drawn codebook missing".into())),
            };
            let trial_covs = match (spec.estimator, fixed_covs) {
                (Estimator::Mmse, None) => Some(correlations(cfg, setup, words, lane, trial)?),
                _ => None,
            };
            let covs = trial_covs.as_deref().or(fixed_covs.as_deref());
            let eval = evaluate_words(
                channel,
                words,
                &setup.budget,
                &setup.pilot,
                estimator_choice(spec.estimator, covs),
                &mut pilot_rng,
            )?;
            setup
                .t_list
                .iter()
                .map(|&t| {
                    let (k, realized) = eval.select_prefix(t)?;
                    Ok((eval.metrics[k], realized))
                })
                .collect()
        }
        Prepared::Rps => {
            let mut rng = stream_rng(seed, StreamKind::Misc, lane, trial);
            let word = rps_vector(channel.n_elements(), &setup.alphabet, &mut rng)
                .phasors(&setup.alphabet);
            let eval = evaluate_words(
                channel,
                &[word],
                &setup.budget,
                &setup.pilot,
                estimator_choice(spec.estimator, None),
                &mut pilot_rng,
            )?;
            Ok(same_for_all((eval.metrics[0], eval.realized[0])))
        }
        Prepared::Ao(ao) => {
            let out = ao_optimize(&channel.h_d, &channel.d_cascade, ao, &setup.budget)?;
            Ok(same_for_all((out.rate, out.rate)))
        }
        Prepared::AoEst(ao, est) => {
            let obs = est.observe(
                &channel.h_d,
                &channel.d_cascade,
                &setup.pilot,
                &mut pilot_rng,
            )?;
            let (h_d, d) = est.estimate(&obs, &setup.pilot)?;
            let out = ao_optimize(&h_d, &d, ao, &setup.budget)?;
            let h = channel.composite(&out.rc)?;
            Ok(same_for_all((
                out.rate,
                realized_rate(&h, &out.w, &setup.budget),
            )))
        }
        Prepared::NoRis => {
            let rate = match mrt_beamformer(&channel.h_d) {
                Ok(_) => no_ris_rate(&channel.h_d, &setup.budget),
                Err(_) => 0.0,
            };
            Ok(same_for_all((rate, rate)))
        }
    }
}

fn estimator_choice(est: Estimator, covs: Option<&[ChannelCovariance]>) -> EstimatorChoice<'_> {
    match (est, covs) {
        (Estimator::Ls, _) => EstimatorChoice::Ls,
        (Estimator::Mmse, Some(c)) => EstimatorChoice::Mmse(c),
        _ => EstimatorChoice::Genie,
    }
}

fn sweep_groups(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    let mut values = cfg.run.sweep_values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    match cfg.run.sweep_var {
        // nested codebooks: one build at the largest T serves the whole grid
        SweepVar::T => vec![values],
        _ => values.into_iter().map(|v| vec![v]).collect(),
    }
}

/// Runs a rates experiment and keeps every per-trial outcome. Channel draws
/// depend only on `(seed, trial)`, so all schemes at a trial index see the
/// same realization. Results come back scheme by scheme in config order,
/// sweep values ascending.
pub fn run_rates_detailed(cfg: &ExperimentConfig) -> Result<Vec<PointOutcome>> {
    cfg.validate()?;
    if cfg.kind != ExperimentKind::Rates {
        return Err(Error::Config("not a rates experiment".into()));
    }
    let specs: Vec<SchemeSpec> = cfg
        .run
        .schemes
        .iter()
        .map(|s| SchemeSpec::parse(s, cfg.run.estimator))
        .collect::<Result<_>>()?;
    let seed = cfg.run.seed;
    let trials = u32::try_from(cfg.run.trials)
        .map_err(|_| Error::Config("trials exceeds u32 range".into()))?;

    // outcomes[scheme][value]
    let mut outcomes: Vec<Vec<PointOutcome>> = vec![Vec::new(); specs.len()];
    for group in sweep_groups(cfg) {
        let setup = PointSetup::new(cfg, &group)?;
        let prepared: Vec<Prepared> = specs
            .iter()
            .map(|s| prepare(cfg, &setup, s))
            .collect::<Result<_>>()?;

        let per_trial: Vec<(u64, Vec<Vec<(f64, f64)>>)> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let channel = setup
                    .stats
                    .draw(&mut stream_rng(seed, StreamKind::Channel, 0, i));
                // specs of one kind share a lane, hence the same drawn codebook
                let mut drawn: Vec<(u32, Vec<Vec<C64>>)> = Vec::new();
                let mut res = Vec::with_capacity(specs.len());
                for (s, p) in specs.iter().zip(&prepared) {
                    let lane = s.kind.lane();
                    let words = match p {
                        Prepared::Words { source, .. }
                            if !matches!(source, WordSource::Fixed(_)) =>
                        {
                            let pos = match drawn.iter().position(|(l, _)| *l == lane) {
                                Some(pos) => pos,
                                None => {
                                    drawn.push((lane, draw_words(cfg, &setup, source, lane, i)?));
                                    drawn.len() - 1
                                }
                            };
                            Some(&drawn[pos].1)
                        }
                        _ => None,
                    };
                    res.push(run_scheme(
                        cfg,
                        s,
                        p,
                        &setup,
                        &channel,
                        words.map(|w| w.as_slice()),
                        i,
                    )?);
                }
                Ok((channel.digest(), res))
            })
            .collect::<Result<_>>()?;

        let digests: Vec<u64> = per_trial.iter().map(|(d, _)| *d).collect();
        for (si, spec) in specs.iter().enumerate() {
            for (vi, &value) in setup.sweep_values.iter().enumerate() {
                let (metric, realized) = per_trial.iter().map(|(_, r)| r[si][vi]).unzip();
                let outcome = PointOutcome {
                    scheme: spec.label.clone(),
                    sweep_value: value,
                    metric,
                    realized,
                    digests: digests.clone(),
                };
                let (mean, se) = mean_and_se(&outcome.realized);
                info!(
                    "{}={}: {} mean realized rate {:.4} (se {:.4})",
                    cfg.run.sweep_var, value, spec.label, mean, se
                );
                outcomes[si].push(outcome);
            }
        }
    }
    Ok(outcomes.into_iter().flatten().collect())
}

pub fn run_theory(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    cfg.validate()?;
    let n = cfg.system.n_elements;
    let gains = link_gains(&cfg.geometry, &cfg.path_loss)?;
    let scene = TheoryScene::from_geometry(&cfg.geometry, n, build_alphabet(cfg.system.bits)?)?;
    let mut t_grid: Vec<usize> = cfg.run.sweep_values.iter().map(|v| *v as usize).collect();
    t_grid.sort_unstable();
    t_grid.dedup();
    let sigma2_d = cfg.system.sigma2_d();
    let rate = |p: f64| (1.0 + p / sigma2_d).log2();
    let mut rows = Vec::new();
    for &k_r_db in &cfg.run.k_r_list_db {
        let params = TheoryParams {
            p_d: cfg.system.p_d(),
            beta_r: gains.beta_r,
            beta_g: gains.beta_g,
            n_elements: n,
            t_words: 1,
            k_r: crate::numeric::db_to_linear(k_r_db),
        };
        let sim = mc_power_curve(&params, &scene, &t_grid, cfg.run.trials, cfg.run.seed)?;
        for (&t, &p) in t_grid.iter().zip(&sim) {
            let bound = prop1_bound(&TheoryParams {
                t_words: t,
                ..params
            })?;
            info!("k_r_db={k_r_db} t={t}: simulated {p:.4e} W, bound {bound:.4e} W");
            rows.push(TheoryRow {
                t,
                k_r_db,
                simulated_power: p,
                bound_power: bound,
                simulated_rate: rate(p),
                bound_rate: rate(bound),
            });
        }
    }
    Ok(rows)
}

pub fn run_complexity(cfg: &ExperimentConfig) -> Result<Vec<ComplexityRow>> {
    cfg.validate()?;
    let mut n_grid: Vec<u64> = cfg.run.sweep_values.iter().map(|v| *v as u64).collect();
    n_grid.sort_unstable();
    n_grid.dedup();
    let sys = &cfg.system;
    n_grid
        .into_iter()
        .map(|n| {
            let r = complexity_model(
                sys.m_antennas as u64,
                n,
                sys.t_words as u64,
                sys.bits,
                cfg.run.ao_iters as u64,
            )?;
            Ok(ComplexityRow {
                m: sys.m_antennas as u64,
                n,
                t: sys.t_words as u64,
                a_bits: sys.bits,
                n_iter: cfg.run.ao_iters as u64,
                report: r,
            })
        })
        .collect()
}
