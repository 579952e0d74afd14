//! Fractional size-moment model of evaporating polydisperse sprays.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drag;
pub mod error;
pub mod evaporation;
pub mod io;
pub mod maxent;
pub mod moment_space;
pub mod quadrature;
pub mod simulator;
pub mod transport;

pub use error::{Error, Result};
