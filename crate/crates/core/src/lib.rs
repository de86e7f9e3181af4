//! Wave-optics simulation of wireless power-delivery laser cavities built
//! from two focal telecentric cat's-eye retroreflectors.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod cavity;
pub mod config;
pub mod error;
pub mod fft;
pub mod field;
pub mod foxli;
pub mod plot;
pub mod power;
pub mod ray;
pub mod report;
pub mod safety;
pub mod sweep;
pub mod wave;

pub use error::{Error, Result};
