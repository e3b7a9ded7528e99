//! Link-level simulator for RIS-assisted MISO downlinks with
//! codebook-based reflection training.
//!
//! The crate is organised bottom-up: [`geometry`] and [`channels`] describe
//! the scene and draw fading realizations, [`codebooks`] builds RC codebooks,
//! [`estimation`] and [`protocol`] run the training and selection protocol,
//! [`baselines`] holds comparison schemes, [`theory`] the analytical bound,
//! and [`harness`] the Monte Carlo experiments and their CSV output.

pub mod baselines;
pub mod channels;
pub mod codebooks;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod numeric;
pub mod protocol;
pub mod theory;

pub use error::{Error, Result};
