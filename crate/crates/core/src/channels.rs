//! Steering vectors, Rician link draws, and the cascaded/composite channels.
//!
//! Channel orientation follows the uplink: `h_d` (length M) and `h_r`
//! (length N) are column vectors, `G` is N x M, and the cascaded channel is
//! `D = diag(conj(h_r)) G`. For an RC vector `phi` the composite uplink
//! channel is `h = h_d + D^H conj(phi)`; the downlink row is its conjugate
//! transpose `h_d^H + phi^T D`.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::TAU;
use std::hash::{Hash, Hasher};

use nalgebra::{allocator::Allocator, DefaultAllocator, Dim, Matrix, OMatrix, RawStorage};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{angles_from_geometry, AngleSet, LinkGains, SystemGeometry};
use crate::numeric::{complex_gaussian, db_to_linear, CMat, CVec, C64};

/// ULA response, entry m (0-based) = `exp(j 2 pi m d sin(phi))`.
pub fn ula_steering(m_antennas: usize, spacing_over_lambda: f64, phi: f64) -> CVec {
    let step = TAU * spacing_over_lambda * phi.sin();
    CVec::from_fn(m_antennas, |m, _| C64::from_polar(1.0, step * m as f64))
}

/// UPA response for an RIS of `n_elements` in rows of `n_x`.
pub fn upa_steering(
    n_elements: usize,
    n_x: usize,
    spacing_over_lambda: f64,
    azimuth: f64,
    elevation: f64,
) -> Result<CVec> {
    if n_x == 0 || !n_elements.is_multiple_of(n_x) {
        return Err(Error::Dimension(format!(
            "n_x = {n_x} does not divide N = {n_elements}"
        )));
    }
    let scale = TAU * spacing_over_lambda * elevation.sin();
    let (sa, ca) = azimuth.sin_cos();
    Ok(CVec::from_fn(n_elements, |n, _| {
        let row = (n / n_x) as f64;
        let col = (n % n_x) as f64;
        C64::from_polar(1.0, scale * (row * sa + col * ca))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianLinkParams {
    /// Linear K-factor; `f64::INFINITY` means pure LoS.
    pub k_factor: f64,
    /// Linear average power gain.
    pub beta: f64,
}

impl RicianLinkParams {
    pub fn new(k_factor: f64, beta: f64) -> Result<Self> {
        if !(k_factor >= 0.0) || !(beta > 0.0) || beta.is_infinite() {
            return Err(Error::Domain(format!(
                "Rician link needs K >= 0 and 0 < beta < inf, got K = {k_factor}, beta = {beta}"
            )));
        }
        Ok(Self { k_factor, beta })
    }
}

/// `sqrt(beta / (K + 1)) * (sqrt(K) * los + nlos)` with i.i.d. CN(0, 1)
/// NLoS entries; `sqrt(beta) * los` exactly when K is infinite.
pub fn rician_draw<R, C, S, G>(
    los: &Matrix<C64, R, C, S>,
    params: RicianLinkParams,
    rng: &mut G,
) -> OMatrix<C64, R, C>
where
    R: Dim,
    C: Dim,
    S: RawStorage<C64, R, C>,
    G: Rng + ?Sized,
    DefaultAllocator: Allocator<R, C>,
{
    let RicianLinkParams { k_factor, beta } = params;
    if k_factor.is_infinite() {
        let s = beta.sqrt();
        return los.map(|l| l * s);
    }
    let scale = (beta / (k_factor + 1.0)).sqrt();
    let los_w = k_factor.sqrt();
    los.map(|l| (l * los_w + complex_gaussian(rng)) * scale)
}

/// Linear Rician factors of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianFactors {
    pub k_d: f64,
    pub k_r: f64,
    pub k_g: f64,
}

impl RicianFactors {
    pub fn from_db(k_d_db: f64, k_r_db: f64, k_g_db: f64) -> Self {
        Self {
            k_d: db_to_linear(k_d_db),
            k_r: db_to_linear(k_r_db),
            k_g: db_to_linear(k_g_db),
        }
    }
}

/// Deterministic unit-modulus LoS components of the three links.
#[derive(Debug, Clone, PartialEq)]
pub struct LosComponents {
    /// `a_BS(phi_d)`, length M; `None` when the direct link is blocked.
    pub h_d: Option<CVec>,
    /// `a_R(alpha_r, gamma_r)`, length N.
    pub h_r: CVec,
    /// `a_R(alpha_g, gamma_g) a_BS(phi_g)^H`, N x M.
    pub g: CMat,
}

impl LosComponents {
    pub fn from_angles(
        geom: &SystemGeometry,
        angles: &AngleSet,
        m_antennas: usize,
        n_elements: usize,
    ) -> Result<Self> {
        if m_antennas == 0 {
            return Err(Error::Domain("need at least one BS antenna".into()));
        }
        geom.check_ris_size(n_elements)?;
        let h_d = ula_steering(m_antennas, geom.bs_spacing_over_lambda, angles.phi_d_a);
        let a_bs_g = ula_steering(m_antennas, geom.bs_spacing_over_lambda, angles.phi_g_d);
        let a_r_g = upa_steering(
            n_elements,
            geom.n_x,
            geom.ris_spacing_over_lambda,
            angles.alpha_g_a,
            angles.gamma_g_a,
        )?;
        let h_r = upa_steering(
            n_elements,
            geom.n_x,
            geom.ris_spacing_over_lambda,
            angles.alpha_r_a,
            angles.gamma_r_a,
        )?;
        let g = &a_r_g * a_bs_g.adjoint();
        Ok(Self {
            h_d: Some(h_d),
            h_r,
            g,
        })
    }

    pub fn from_geometry(
        geom: &SystemGeometry,
        m_antennas: usize,
        n_elements: usize,
    ) -> Result<Self> {
        let angles = angles_from_geometry(geom)?;
        Self::from_angles(geom, &angles, m_antennas, n_elements)
    }

    pub fn m_antennas(&self) -> usize {
        self.g.ncols()
    }

    pub fn n_elements(&self) -> usize {
        self.h_r.len()
    }

    pub fn without_direct(mut self) -> Self {
        self.h_d = None;
        self
    }
}

/// Everything needed to draw independent channel realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub los: LosComponents,
    pub gains: LinkGains,
    pub k: RicianFactors,
}

impl ChannelStats {
    pub fn m_antennas(&self) -> usize {
        self.los.m_antennas()
    }

    pub fn n_elements(&self) -> usize {
        self.los.n_elements()
    }

    /// Draws `h_d`, then `h_r`, then `G` from `rng`. A blocked direct link
    /// yields `h_d = 0` and consumes no randomness.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let m = self.m_antennas();
        let h_d = match &self.los.h_d {
            Some(los) => rician_draw(
                los,
                RicianLinkParams {
                    k_factor: self.k.k_d,
                    beta: self.gains.beta_d,
                },
                rng,
            ),
            None => CVec::zeros(m),
        };
        let h_r = rician_draw(
            &self.los.h_r,
            RicianLinkParams {
                k_factor: self.k.k_r,
                beta: self.gains.beta_r,
            },
            rng,
        );
        let g = rician_draw(
            &self.los.g,
            RicianLinkParams {
                k_factor: self.k.k_g,
                beta: self.gains.beta_g,
            },
            rng,
        );
        ChannelRealization::new(h_d, h_r, g).expect("shapes come from the same LoS set")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_d: CVec,
    pub h_r: CVec,
    pub g: CMat,
    pub d_cascade: CMat,
}

impl ChannelRealization {
    pub fn new(h_d: CVec, h_r: CVec, g: CMat) -> Result<Self> {
        if g.ncols() != h_d.len() {
            return Err(Error::Dimension(format!(
                "G has {} columns but h_d has {} entries",
                g.ncols(),
                h_d.len()
            )));
        }
        let d_cascade = cascade(&h_r, &g)?;
        Ok(Self {
            h_d,
            h_r,
            g,
            d_cascade,
        })
    }

    pub fn m_antennas(&self) -> usize {
        self.h_d.len()
    }

    pub fn n_elements(&self) -> usize {
        self.h_r.len()
    }

    pub fn composite(&self, rc: &[C64]) -> Result<CVec> {
        composite(&self.h_d, &self.d_cascade, rc)
    }

    /// Hash of the exact bit patterns of `(h_d, h_r, G)`.
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for z in self.h_d.iter().chain(self.h_r.iter()).chain(self.g.iter()) {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// `D = diag(conj(h_r)) G`: row n of `G` scaled by `conj(h_r[n])`.
pub fn cascade(h_r: &CVec, g: &CMat) -> Result<CMat> {
    if h_r.len() != g.nrows() {
        return Err(Error::Dimension(format!(
            "h_r has {} entries but G has {} rows",
            h_r.len(),
            g.nrows()
        )));
    }
    let mut d = g.clone();
    for (n, mut row) in d.row_iter_mut().enumerate() {
        row *= h_r[n].conj();
    }
    Ok(d)
}

/// Composite uplink channel `h_d + D^H conj(rc)`.
pub fn composite(h_d: &CVec, d_cascade: &CMat, rc: &[C64]) -> Result<CVec> {
    let (n, m) = d_cascade.shape();
    if h_d.len() != m || rc.len() != n {
        return Err(Error::Dimension(format!(
            "composite: D is {n}x{m}, h_d has {}, rc has {}",
            h_d.len(),
            rc.len()
        )));
    }
    // h[m] = h_d[m] + conj(sum_n rc[n] D[n, m])
    Ok(CVec::from_fn(m, |j, _| {
        let col = d_cascade.column(j);
        let s: C64 = col.iter().zip(rc).map(|(d, r)| d * r).sum();
        h_d[j] + s.conj()
    }))
}

/// Downlink row `h_d^H + rc^T D`, returned as a column of its entries.
pub fn downlink_row(h_d: &CVec, d_cascade: &CMat, rc: &[C64]) -> Result<CVec> {
    let (n, m) = d_cascade.shape();
    if h_d.len() != m || rc.len() != n {
        return Err(Error::Dimension("downlink_row: shape mismatch".into()));
    }
    let phi = CVec::from_column_slice(rc);
    let refl = d_cascade.transpose() * phi;
    Ok(h_d.map(|z| z.conj()) + refl)
}
