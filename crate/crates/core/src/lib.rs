//! Spin-lattice relaxation from one-, two- and three-phonon processes.
//!
//! Transition rates between the eigenstates of a spin (or any few-level)
//! system coupled linearly to a bath of Γ-point phonons are evaluated as a
//! generalized Fermi golden rule at second, fourth and sixth order in the
//! coupling. The rates feed a Markovian population generator from which T1
//! is extracted.
//!
//! Units: energies and frequencies in cm⁻¹ with ħ = 1, temperatures in
//! kelvin, rates and inverse times in s⁻¹.

pub mod amplitudes;
pub mod channel;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lineshape;
pub mod oracle;
pub mod rates;
mod reduce;
pub mod sweeps;
pub mod system;
pub mod thermal;
pub mod units;

pub use channel::{channel_weight, Phonon, SignPattern};
pub use dynamics::{assemble_generator, extract_t1, propagate_populations, RateGenerator, T1};
pub use error::{Error, Result};
pub use lineshape::{Lineshape, LineshapeKind};
pub use rates::{Order, RateBreakdown};
pub use system::{CouplingSet, Model, PhononBath, SpinSystem};
pub use thermal::{bose_occupation, Temperature};
