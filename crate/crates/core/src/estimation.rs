//! Uplink pilot reception and LS / MMSE estimates of the composite channel.

use rand::Rng;

use crate::channels::ChannelStats;
use crate::error::{Error, Result};
use crate::numeric::{complex_gaussian, CMat, CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    /// Uplink pilot power, watts.
    pub p_u: f64,
    /// BS noise power, watts.
    pub sigma2_u: f64,
    pub pilot_symbol: C64,
}

impl PilotConfig {
    pub fn new(p_u: f64, sigma2_u: f64) -> Result<Self> {
        let cfg = Self {
            p_u,
            sigma2_u,
            pilot_symbol: C64::new(1.0, 0.0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_u > 0.0 && self.p_u.is_finite()) || !(self.sigma2_u >= 0.0) {
            return Err(Error::Domain(
                "pilot needs p_u > 0 and sigma2_u >= 0".into(),
            ));
        }
        if (self.pilot_symbol.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(
                "pilot symbol must have unit magnitude".into(),
            ));
        }
        Ok(())
    }

    /// Noise-to-pilot ratio `sigma2_u / p_u`.
    pub fn inverse_snr(&self) -> f64 {
        self.sigma2_u / self.p_u
    }
}

/// `y = sqrt(p_u) x h + n` with `n ~ CN(0, sigma2_u I)`.
pub fn uplink_receive<R: Rng + ?Sized>(h: &CVec, cfg: &PilotConfig, rng: &mut R) -> CVec {
    let gain = cfg.pilot_symbol * cfg.p_u.sqrt();
    if cfg.sigma2_u == 0.0 {
        return h.map(|z| z * gain);
    }
    let sd = cfg.sigma2_u.sqrt();
    h.map(|z| z * gain + complex_gaussian(rng) * sd)
}

/// `conj(x) y / sqrt(p_u)`.
pub fn ls_estimate(y: &CVec, cfg: &PilotConfig) -> CVec {
    let s = cfg.pilot_symbol.conj() / cfg.p_u.sqrt();
    y.map(|z| z * s)
}

/// Channel correlation matrix `E[h h^H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCovariance {
    r_h: CMat,
}

impl ChannelCovariance {
    /// Accepts `r_h` if it is square, Hermitian and positive semidefinite to
    /// within 1e-10 relative to its largest entry.
    pub fn new(r_h: CMat) -> Result<Self> {
        if !r_h.is_square() {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        let scale = r_h
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let asym = (&r_h - r_h.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > 1e-10 * scale {
            return Err(Error::Domain("covariance is not Hermitian".into()));
        }
        let herm = (&r_h + r_h.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = herm.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 * scale {
            return Err(Error::Domain(format!(
                "covariance has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { r_h: herm })
    }

    pub fn identity_scaled(m: usize, c: f64) -> Self {
        Self {
            r_h: CMat::identity(m, m) * C64::new(c, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.r_h
    }

    pub fn dim(&self) -> usize {
        self.r_h.nrows()
    }
}

const SINGULAR_RTOL: f64 = 1e-12;

/// `R_h (R_h^H + sigma2_u / p_u I)^{-1} h_ls`.
///
/// When the regularized matrix is singular (noiseless pilots with a
/// rank-deficient `R_h`) the filter is undefined and `h_ls` is returned.
pub fn mmse_estimate(h_ls: &CVec, cov: &ChannelCovariance, cfg: &PilotConfig) -> Result<CVec> {
    let m = h_ls.len();
    if cov.dim() != m {
        return Err(Error::Dimension(format!(
            "covariance is {0}x{0}, estimate has {m}",
            cov.dim()
        )));
    }
    let reg = cov.r_h.adjoint() + CMat::identity(m, m) * C64::new(cfg.inverse_snr(), 0.0);
    let eig = reg.clone().symmetric_eigenvalues();
    let top = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !(eig.min() > SINGULAR_RTOL * top) {
        return Ok(h_ls.clone());
    }
    match reg.cholesky() {
        Some(ch) => Ok(&cov.r_h * ch.solve(h_ls)),
        None => Ok(h_ls.clone()),
    }
}

/// Sample correlation matrices of the composite channel for each RC word,
/// all estimated from the same `n_samples` channel draws.
pub fn sample_covariances<R: Rng + ?Sized>(
    words: &[Vec<C64>],
    stats: &ChannelStats,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<ChannelCovariance>> {
    let m = stats.m_antennas();
    if n_samples < m {
        return Err(Error::Domain(format!(
            "need at least M = {m} samples, got {n_samples}"
        )));
    }
    let mut acc = vec![CMat::zeros(m, m); words.len()];
    for _ in 0..n_samples {
        let ch = stats.draw(rng);
        for (w, a) in words.iter().zip(acc.iter_mut()) {
            let h = ch.composite(w)?;
            a.gerc(C64::new(1.0, 0.0), &h, &h, C64::new(1.0, 0.0));
        }
    }
    let inv = C64::new(1.0 / n_samples as f64, 0.0);
    Ok(acc
        .into_iter()
        .map(|a| {
            let r = a * inv;
            let herm = (&r + r.adjoint()) * C64::new(0.5, 0.0);
            ChannelCovariance { r_h: herm }
        })
        .collect())
}

pub fn sample_covariance<R: Rng + ?Sized>(
    rc: &[C64],
    stats: &ChannelStats,
    n_samples: usize,
    rng: &mut R,
) -> Result<ChannelCovariance> {
    let mut v = sample_covariances(&[rc.to_vec()], stats, n_samples, rng)?;
    Ok(v.pop().expect("one word in, one covariance out"))
}

/// Exact correlation `E[h h^H]` of the composite channel for each RC word.
///
/// With every link split into mean `mu` and i.i.d. diffuse part of variance
/// `s2`, and `v = mu_G^H (conj(rc) .* mu_r)`:
///
/// ```text
/// R = (mu_d + v)(mu_d + v)^H + s2_r mu_G^H mu_G + (s2_d + s2_g (|mu_r|^2 + N s2_r)) I
/// ```
///
/// This is the limit of `sample_covariances` as the draw count grows.
pub fn exact_correlations(
    words: &[Vec<C64>],
    stats: &ChannelStats,
) -> Result<Vec<ChannelCovariance>> {
    let (n, m) = (stats.n_elements(), stats.m_antennas());
    let split = |k: f64, beta: f64| {
        if k.is_infinite() {
            (beta.sqrt(), 0.0)
        } else {
            ((beta * k / (k + 1.0)).sqrt(), beta / (k + 1.0))
        }
    };
    let (mu_r_w, s2_r) = split(stats.k.k_r, stats.gains.beta_r);
    let (mu_g_w, s2_g) = split(stats.k.k_g, stats.gains.beta_g);
    let (mu_d, s2_d) = match &stats.los.h_d {
        Some(h) => {
            let (w, s2) = split(stats.k.k_d, stats.gains.beta_d);
            (h * C64::new(w, 0.0), s2)
        }
        None => (CVec::zeros(m), 0.0),
    };
    let mu_r = &stats.los.h_r * C64::new(mu_r_w, 0.0);
    let mu_g = &stats.los.g * C64::new(mu_g_w, 0.0);
    let mu_g_h = mu_g.adjoint();
    let diffuse = (&mu_g_h * &mu_g) * C64::new(s2_r, 0.0);
    let ridge = s2_d + s2_g * (mu_r.norm_squared() + n as f64 * s2_r);
    words
        .iter()
        .map(|rc| {
            if rc.len() != n {
                return Err(Error::Dimension(format!(
                    "RC word has {} entries, expected {n}",
                    rc.len()
                )));
            }
            let u = CVec::from_fn(n, |i, _| rc[i].conj() * mu_r[i]);
            let mean = &mu_d + &mu_g_h * u;
            let mut r = &mean * mean.adjoint() + &diffuse;
            for j in 0..m {
                r[(j, j)] += C64::new(ridge, 0.0);
            }
            let herm = (&r + r.adjoint()) * C64::new(0.5, 0.0);
            Ok(ChannelCovariance { r_h: herm })
        })
        .collect()
}
