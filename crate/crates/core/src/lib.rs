//! Riemann theta functions with half-integer characteristics on Siegel space,
//! and the incidence structure of the genus-3 hyperelliptic locus they cut out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod charalg;
pub mod error;
pub mod incidence;
pub mod io;
pub mod siegel;
pub mod thetanum;
pub mod verify;

pub use error::{Error, Result};
