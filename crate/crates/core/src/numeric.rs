//! Shared numeric plumbing: complex vector/matrix aliases, unit conversions
//! and the seeded random streams every Monte Carlo path draws from.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Random generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Standard circular complex Gaussian sample, CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVec {
    CVec::from_fn(len, |_, _| complex_gaussian(rng))
}

/// Independent stream families. Each family gets its own ChaCha stream id
/// range so that adding draws in one family never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamKind {
    Channel = 1,
    Pilot = 2,
    Codebook = 3,
    Covariance = 4,
    Theory = 5,
    Misc = 6,
}

/// Counter-style generator: the stream for `(seed, kind, lane, index)` is a
/// pure function of its coordinates, so trial `index` is reproducible no
/// matter which other trials ran before it.
pub fn stream_rng(seed: u64, kind: StreamKind, lane: u32, index: u32) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = ((kind as u64) << 56) | ((lane as u64 & 0x00ff_ffff) << 32) | index as u64;
    rng.set_stream(id);
    rng
}

/// Hermitian inner product `a^H b`.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
