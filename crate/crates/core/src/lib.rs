//! Simulation and analysis toolkit for quantum-non-demolition state detection
//! of a single trapped molecular ion through a co-trapped atomic ion.
//!
//! The crate is split along the measurement chain:
//!
//! * [`stark`] evaluates state-dependent ac-Stark shifts from a line catalog.
//! * [`motion`] turns a Stark shift into coherent motion and sideband Rabi signals.
//! * [`inference`] holds the binomial discrimination statistics and trace simulation.
//! * [`specfit`] fits Rabi traces and force spectra back to shifts, line centers
//!   and Einstein-A coefficients.
//! * [`io`] reads and writes the CSV schemas shared with the command-line tool.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
mod error;
pub mod inference;
pub mod io;
pub mod motion;
pub mod specfit;
pub mod stark;

pub use error::{Error, Result};
