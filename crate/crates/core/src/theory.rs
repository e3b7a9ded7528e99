//! Closed-form received-power upper bound for the environment-aware
//! codebook and the Monte Carlo oracle it is checked against.
//!
//! The oracle uses the single-antenna scene with the direct link blocked and
//! a pure-LoS BS-RIS link, so the cascaded channel is a length-N vector
//! `d[n] = conj(h_r[n]) g[n]` and the received power of word `t` is
//! `p_d beta_r beta_g |sum_n phi_t[n] d[n]|^2` with unit-power fades.

use rayon::prelude::*;

use crate::channels::{LosComponents, RicianFactors};
use crate::codebooks::{env_aware_codebook, Codebook, DedupPolicy, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::geometry::SystemGeometry;
use crate::numeric::{complex_gaussian, stream_rng, CVec, StreamKind, C64};

pub const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Codebook stream lane reserved for the theory oracle.
const THEORY_CODEBOOK_LANE: u32 = 0xFFFF;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub p_d: f64,
    pub beta_r: f64,
    pub beta_g: f64,
    pub n_elements: usize,
    pub t_words: usize,
    /// Linear Rician factor of the RIS-UE link; may be infinite.
    pub k_r: f64,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_d", self.p_d),
            ("beta_r", self.beta_r),
            ("beta_g", self.beta_g),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.n_elements == 0 || self.t_words == 0 {
            return Err(Error::Domain("N and T must be at least 1".into()));
        }
        if !(self.k_r >= 0.0) {
            return Err(Error::Domain(format!("K_r must be >= 0, got {}", self.k_r)));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.p_d * self.beta_r * self.beta_g
    }

    /// `(K1, K2) = (sqrt(K/(1+K)), sqrt(1/(1+K)))`.
    pub fn k_weights(&self) -> (f64, f64) {
        if self.k_r.is_infinite() {
            (1.0, 0.0)
        } else {
            (
                (self.k_r / (1.0 + self.k_r)).sqrt(),
                (1.0 / (1.0 + self.k_r)).sqrt(),
            )
        }
    }
}

/// `p_d beta_r beta_g (N^2 K1^2 + N K2^2 (log2 T + C) + N^2 K1 K2 sqrt(pi))`.
pub fn prop1_bound(params: &TheoryParams) -> Result<f64> {
    params.validate()?;
    let n = params.n_elements as f64;
    let (k1, k2) = params.k_weights();
    let los = n * n * k1 * k1;
    let nlos = n * k2 * k2 * ((params.t_words as f64).log2() + EULER_GAMMA);
    let cross = n * n * k1 * k2 * std::f64::consts::PI.sqrt();
    Ok(params.scale() * (los + nlos + cross))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryLimits {
    pub pure_los: f64,
    pub pure_nlos: f64,
    pub t_one: f64,
    pub t_max: f64,
}

/// Limit regimes of the bound. `t_max` is the `T = 2^{aN}` value
/// `a p_d beta_r beta_g N^2 K2^2`.
pub fn prop1_limits(params: &TheoryParams, a_bits: u32) -> Result<TheoryLimits> {
    params.validate()?;
    if a_bits == 0 {
        return Err(Error::Domain("a must be at least 1 bit".into()));
    }
    let s = params.scale();
    let n = params.n_elements as f64;
    let (_, k2) = params.k_weights();
    Ok(TheoryLimits {
        pure_los: s * n * n,
        pure_nlos: s * n * ((params.t_words as f64).log2() + EULER_GAMMA),
        t_one: prop1_bound(&TheoryParams {
            t_words: 1,
            ..*params
        })?,
        t_max: a_bits as f64 * s * n * n * k2 * k2,
    })
}

/// Single-antenna LoS scene for the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryScene {
    pub h_r_los: CVec,
    /// BS-RIS LoS column, length N.
    pub g_los: CVec,
    pub alphabet: PhaseAlphabet,
}

impl TheoryScene {
    pub fn from_geometry(
        geom: &SystemGeometry,
        n_elements: usize,
        alphabet: PhaseAlphabet,
    ) -> Result<Self> {
        let los = LosComponents::from_geometry(geom, 1, n_elements)?;
        Ok(Self {
            h_r_los: los.h_r,
            g_los: los.g.column(0).into_owned(),
            alphabet,
        })
    }

    /// All LoS phases zero, so the zero word aligns perfectly at any bit width.
    pub fn zero_phase(n_elements: usize, alphabet: PhaseAlphabet) -> Self {
        let one = CVec::from_element(n_elements, C64::new(1.0, 0.0));
        Self {
            h_r_los: one.clone(),
            g_los: one,
            alphabet,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.h_r_los.len()
    }

    fn los(&self) -> LosComponents {
        LosComponents {
            h_d: None,
            h_r: self.h_r_los.clone(),
            g: crate::numeric::CMat::from_column_slice(self.n_elements(), 1, self.g_los.as_slice()),
        }
    }

    /// Environment-aware codebook for this scene with `K_g -> inf` and the
    /// direct link blocked. Stops early if fewer than `t_words` distinct
    /// words are reachable.
    pub fn codebook(&self, k_r: f64, t_words: usize, seed: u64) -> Result<Codebook> {
        let k = RicianFactors {
            k_d: f64::INFINITY,
            k_r,
            k_g: f64::INFINITY,
        };
        let mut rng = stream_rng(seed, StreamKind::Codebook, THEORY_CODEBOOK_LANE, 0);
        env_aware_codebook(
            &self.los(),
            &k,
            t_words,
            0,
            &self.alphabet,
            DedupPolicy::lenient(),
            &mut rng,
        )
    }
}

/// Monte Carlo mean received power at each `T` of `t_grid`, using prefixes
/// of one codebook built at the largest `T`. `params.t_words` is ignored.
///
/// Trial `i` draws `h_r = K1 los + K2 CN(0, I)` from its own stream, so the
/// result does not depend on thread scheduling.
pub fn mc_power_curve(
    params: &TheoryParams,
    scene: &TheoryScene,
    t_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if scene.n_elements() != params.n_elements || scene.g_los.len() != params.n_elements {
        return Err(Error::Dimension(format!(
            "scene has {} elements, params say {}",
            scene.n_elements(),
            params.n_elements
        )));
    }
    if trials == 0 || t_grid.is_empty() || t_grid.contains(&0) {
        return Err(Error::Domain(
            "need trials >= 1 and a non-empty T grid of positive sizes".into(),
        ));
    }
    let t_max = *t_grid.iter().max().expect("non-empty");
    let book = scene.codebook(params.k_r, t_max, seed)?;
    let words = book.phasors();
    let (k1, k2) = params.k_weights();
    let n = params.n_elements;

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, StreamKind::Theory, 0, i as u32);
            let d: Vec<C64> = (0..n)
                .map(|j| {
                    let nlos = if k2 > 0.0 {
                        complex_gaussian(&mut rng) * k2
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    (scene.h_r_los[j] * k1 + nlos).conj() * scene.g_los[j]
                })
                .collect();
            let mut best = Vec::with_capacity(words.len());
            let mut running = 0.0f64;
            for w in &words {
                let s: C64 = w.iter().zip(d.iter()).map(|(p, x)| p * x).sum();
                running = running.max(s.norm_sqr());
                best.push(running);
            }
            // short codebooks saturate at their last word
            t_grid
                .iter()
                .map(|&t| best[t.min(best.len()) - 1])
                .collect()
        })
        .collect();

    let scale = params.scale();
    Ok((0..t_grid.len())
        .map(|k| scale * per_trial.iter().map(|v| v[k]).sum::<f64>() / trials as f64)
        .collect())
}

/// Monte Carlo mean of `p_d beta_r beta_g max_t |phi_t^T d|^2` at `params.t_words`.
pub fn mc_received_power(
    params: &TheoryParams,
    scene: &TheoryScene,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    Ok(mc_power_curve(params, scene, &[params.t_words], trials, seed)?[0])
}
