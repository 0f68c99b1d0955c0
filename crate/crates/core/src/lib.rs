//! Workbench for (upper) frequently hypercyclic weighted backward shifts.
//!
//! The crate is organised in four layers:
//!
//! - [`sequence`]: weight rules, the conjugating sequence `v`, finitely
//!   supported vectors, shift powers and the `c0`/`lp` sequence-space norms.
//! - [`families`]: index sets, empirical densities, the upper-density
//!   Furstenberg family and generators of separated hitting-set families.
//! - [`criteria`]: finite-horizon checks of the weight conditions in norm
//!   form and in product form, with reproducible violation witnesses.
//! - [`constructor`]: schedules, targets, the explicit hypercyclic vector
//!   and orbit verification against the `2^-q` error bound.
//!
//! Every quantity that can overflow a double (weight products, `v_n`) is
//! carried in the log domain. Small-window identities can be checked in
//! exact rational arithmetic through the [`Scalar`] trait.

pub mod constructor;
pub mod criteria;
mod error;
pub mod families;
pub mod sequence;

pub use error::{Error, Result};
pub use sequence::{LogScalar, Scalar};
