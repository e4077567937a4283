//! Classical dynamics of `N` identical harmonic molecular vibrations
//! collectively coupled to one cavity mode.
//!
//! [`closed_form`] evaluates the exact polariton solutions, [`oracle`]
//! integrates the full equations of motion independently, and [`scenarios`]
//! builds the named initial conditions and observables on top of both.

pub mod closed_form;
pub mod envelope;
pub mod error;
pub mod jacobi;
pub mod oracle;
pub mod params;
pub mod scenarios;
pub mod trajectory;

pub use closed_form::{ClosedFormSolution, InitialConditions, ModeAmplitudes};
pub use error::{Error, Result};
pub use params::{derive, DerivedCoupling, Regime, SystemParams};
pub use trajectory::{Selection, TimeGrid, Trajectory};

#[cfg(feature = "cli")]
pub mod cli;
