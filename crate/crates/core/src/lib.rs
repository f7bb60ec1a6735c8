//! Forward simulator and analysis toolkit for chirped-pulse interferometry
//! (CPI) axial scans.
//!
//! The crate models a layered sample by its reflection transfer function,
//! synthesizes CPI, white-light (WLI) and Q-OCT interferograms from an
//! effective spectrum, builds time-domain sum-frequency spectrograms of an
//! oppositely chirped pulse pair, and extracts features (dips, peaks, FWHM,
//! signed visibility) from simulated or ingested scans.
//!
//! Units are SI internally. Public structures that face files or the CLI
//! carry their unit in the field name (`x_um`, `lambda_nm`, ...).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod grid;
pub mod materials;
pub mod numeric;
pub mod sample;
pub mod scanio;
pub mod spectra;

pub use error::{Error, Result};
pub use grid::{OmegaGrid, XGrid};
pub use materials::{DispersiveMaterial, MaterialRegistry, SPEED_OF_LIGHT};
