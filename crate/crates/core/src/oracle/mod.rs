//! Reference implementations and synthetic models.
//!
//! Nothing here shares code with [`crate::rates`] or
//! [`crate::amplitudes`]; only the basic types, occupations and channel
//! weights are common. Everything runs on the calling thread.

mod model_gen;
mod naive;

pub use model_gen::{generate_model, ModelSpec};
pub use naive::{naive_rate_three_phonon, naive_rate_two_phonon, NAIVE_MAX_MODES};
