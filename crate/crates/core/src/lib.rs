//! Link-level simulation of fluid antenna multiple access.
//!
//! A receiving user with a `K`-port fluid antenna sees every base-station
//! antenna through spatially correlated Rayleigh fading. This crate samples
//! those channels, forms the per-port received samples, and runs three
//! receivers over them: port shortlisting followed by MRC, MRC across all
//! ports, and the genie single-port fast-FAMA selector. The [`harness`]
//! module turns these into SER experiments and exports datasets for the
//! learned codec.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod channel;
pub mod chi2;
pub mod error;
pub mod harness;
pub mod phy;
pub mod port_select;
pub mod schemes;
pub mod stream;

pub use error::{FamaError, Result};
