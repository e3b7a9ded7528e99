//! Scene geometry: link distances, log-distance path loss, and the angles
//! that parameterize the BS array and RIS steering vectors.
//!
//! Conventions. The BS carries a ULA along the y-axis; its angles are
//! measured from broadside, so `sin(phi)` is the y-component of the unit
//! direction from the BS toward the other end of the link. The RIS is a UPA
//! in the x-z plane with the plane normal along y. Element `n` (0-based) sits
//! in row `n / n_x` (z direction) and column `n % n_x` (x direction). For a
//! unit direction `u` from the RIS toward the far end, the elevation
//! `gamma` is measured from the normal and the azimuth `alpha` inside the
//! plane, with `sin(gamma) * cos(alpha) = u_x` and
//! `sin(gamma) * sin(alpha) = u_z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::db_to_linear;

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemGeometry {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub ue_position: Point3,
    /// BS antenna spacing in wavelengths.
    pub bs_spacing_over_lambda: f64,
    /// RIS element spacing in wavelengths.
    pub ris_spacing_over_lambda: f64,
    /// Elements per RIS row.
    pub n_x: usize,
    /// Measure path-loss distances in the x-y plane instead of 3D.
    pub planar_distances: bool,
}

impl Default for SystemGeometry {
    /// BS at (0, 0, 5), RIS at (100, 6, 5), UE at (100, 0, 0); lambda/2 BS
    /// spacing, lambda/8 RIS spacing, 10 elements per row.
    fn default() -> Self {
        Self {
            bs_position: [0.0, 0.0, 5.0],
            ris_position: [100.0, 6.0, 5.0],
            ue_position: [100.0, 0.0, 0.0],
            bs_spacing_over_lambda: 0.5,
            ris_spacing_over_lambda: 0.125,
            n_x: 10,
            planar_distances: false,
        }
    }
}

impl SystemGeometry {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.bs_position, self.ris_position, self.ue_position]
            .iter()
            .flatten()
            .all(|c| c.is_finite());
        if !finite {
            return Err(Error::DegenerateGeometry("non-finite coordinate".into()));
        }
        if !(self.bs_spacing_over_lambda > 0.0 && self.ris_spacing_over_lambda > 0.0) {
            return Err(Error::Domain(
                "array spacings must be strictly positive".into(),
            ));
        }
        if self.n_x == 0 {
            return Err(Error::Domain("n_x must be positive".into()));
        }
        for (a, b, what) in [
            (self.bs_position, self.ue_position, "BS and UE"),
            (self.bs_position, self.ris_position, "BS and RIS"),
            (self.ris_position, self.ue_position, "RIS and UE"),
        ] {
            if a == b {
                return Err(Error::DegenerateGeometry(format!("{what} coincide")));
            }
        }
        Ok(())
    }

    /// Checks that an RIS of `n_elements` tiles into rows of `n_x`.
    pub fn check_ris_size(&self, n_elements: usize) -> Result<()> {
        if n_elements == 0 || !n_elements.is_multiple_of(self.n_x) {
            return Err(Error::Dimension(format!(
                "n_x = {} does not divide N = {n_elements}",
                self.n_x
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistances {
    pub d_bu: f64,
    pub d_br: f64,
    pub d_ru: f64,
}

fn displacement(from: Point3, to: Point3) -> [f64; 3] {
    [to[0] - from[0], to[1] - from[1], to[2] - from[2]]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn distance(a: Point3, b: Point3, planar: bool) -> Result<f64> {
    let mut v = displacement(a, b);
    if planar {
        v[2] = 0.0;
    }
    let d = norm3(v);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::DegenerateGeometry("zero-length link".into()))
    }
}

pub fn link_distances(geom: &SystemGeometry) -> Result<LinkDistances> {
    geom.validate()?;
    let planar = geom.planar_distances;
    Ok(LinkDistances {
        d_bu: distance(geom.bs_position, geom.ue_position, planar)?,
        d_br: distance(geom.bs_position, geom.ris_position, planar)?,
        d_ru: distance(geom.ris_position, geom.ue_position, planar)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossModel {
    /// Linear gain at the reference distance.
    pub c0: f64,
    /// Reference distance, meters.
    pub d0: f64,
    pub alpha_g: f64,
    pub alpha_r: f64,
    pub alpha_d: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            c0: db_to_linear(-20.0),
            d0: 1.0,
            alpha_g: 2.4,
            alpha_r: 2.5,
            alpha_d: 3.5,
        }
    }
}

impl PathLossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.d0 > 0.0) {
            return Err(Error::Domain("c0 and d0 must be positive".into()));
        }
        if [self.alpha_g, self.alpha_r, self.alpha_d]
            .iter()
            .any(|a| !(*a >= 2.0))
        {
            return Err(Error::Domain("path-loss exponents must be >= 2".into()));
        }
        Ok(())
    }
}

/// `c0 * (d / d0)^(-alpha)`.
pub fn path_loss(d: f64, alpha: f64, model: &PathLossModel) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!(
            "path-loss distance must be positive, got {d}"
        )));
    }
    Ok(model.c0 * (d / model.d0).powf(-alpha))
}

/// Linear large-scale gains of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub beta_d: f64,
    pub beta_g: f64,
    pub beta_r: f64,
}

pub fn link_gains(geom: &SystemGeometry, model: &PathLossModel) -> Result<LinkGains> {
    model.validate()?;
    let d = link_distances(geom)?;
    Ok(LinkGains {
        beta_d: path_loss(d.d_bu, model.alpha_d, model)?,
        beta_g: path_loss(d.d_br, model.alpha_g, model)?,
        beta_r: path_loss(d.d_ru, model.alpha_r, model)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    /// UE -> BS arrival angle at the BS.
    pub phi_d_a: f64,
    /// BS -> RIS departure angle at the BS.
    pub phi_g_d: f64,
    /// BS -> RIS arrival azimuth / elevation at the RIS.
    pub alpha_g_a: f64,
    pub gamma_g_a: f64,
    /// UE -> RIS arrival azimuth / elevation at the RIS.
    pub alpha_r_a: f64,
    pub gamma_r_a: f64,
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn ula_angle(from: Point3, to: Point3) -> f64 {
    let u = unit(displacement(from, to));
    u[1].clamp(-1.0, 1.0).asin()
}

/// Azimuth in [0, pi) and elevation in [-pi/2, pi/2) of direction `from -> to`
/// relative to an x-z plane array.
fn upa_angles(from: Point3, to: Point3) -> Result<(f64, f64)> {
    let u = unit(displacement(from, to));
    if u[1].abs() < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "far end lies in the RIS plane (grazing incidence)".into(),
        ));
    }
    let rho = u[0].hypot(u[2]);
    let (alpha, sin_gamma) = if u[2] > 0.0 || (u[2] == 0.0 && u[0] >= 0.0) {
        (u[2].atan2(u[0]), rho)
    } else {
        ((-u[2]).atan2(-u[0]), -rho)
    };
    // atan2 can land on pi for (-0, negative); fold back into [0, pi)
    let alpha = if alpha >= std::f64::consts::PI {
        0.0
    } else {
        alpha
    };
    Ok((alpha, sin_gamma.clamp(-1.0, 1.0).asin()))
}

pub fn angles_from_geometry(geom: &SystemGeometry) -> Result<AngleSet> {
    geom.validate()?;
    let (alpha_g_a, gamma_g_a) = upa_angles(geom.ris_position, geom.bs_position)?;
    let (alpha_r_a, gamma_r_a) = upa_angles(geom.ris_position, geom.ue_position)?;
    Ok(AngleSet {
        phi_d_a: ula_angle(geom.bs_position, geom.ue_position),
        phi_g_d: ula_angle(geom.bs_position, geom.ris_position),
        alpha_g_a,
        gamma_g_a,
        alpha_r_a,
        gamma_r_a,
    })
}
