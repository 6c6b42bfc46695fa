//! Sum secrecy-rate maximization for a multi-antenna cellular uplink underlaid
//! by D2D pairs whose transmitters act as friendly jammers against a
//! multi-antenna eavesdropper.
//!
//! Layering, bottom to top: [`algebra`] (small complex vectors and an HPD
//! solver), [`model`] (configuration, topology and channel sampling),
//! [`rates`] (SINRs and secrecy rates), [`power_control`] (binary CU power and
//! closed-form jammer power inside an alternating optimization),
//! [`assignment`] (Hungarian solver), [`algorithms`] (end-to-end schemes) and
//! [`harness`] (Monte Carlo sweeps), with [`report`] writing result files.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod algorithms;
pub mod assignment;
pub mod error;
pub mod exec;
pub mod harness;
pub mod model;
pub mod power_control;
pub mod rates;
pub mod report;
pub mod selftest;

pub use error::{Error, Result};
