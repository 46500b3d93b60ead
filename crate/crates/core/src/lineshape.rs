//! Broadened energy-conserving delta and the regularizer used in place of
//! `i0⁺` in intermediate-state denominators.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA: f64 = 10.0;
pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_WINDOW: f64 = 6.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineshapeKind {
    #[default]
    Gaussian,
    Lorentzian,
}

impl std::str::FromStr for LineshapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(Self::Gaussian),
            "lorentzian" | "lorentz" => Ok(Self::Lorentzian),
            other => Err(Error::invalid(format!("unknown lineshape kind '{other}'"))),
        }
    }
}

/// Numerical realization of δ(Δ) and of the `i0⁺` regularizer.
///
/// The weight is unit-normalized on the real line and set to exactly zero
/// for `|Δ| > window·sigma`, which is what allows resonance pruning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lineshape {
    kind: LineshapeKind,
    sigma: f64,
    eta: f64,
    window: f64,
}

impl Default for Lineshape {
    fn default() -> Self {
        Self {
            kind: LineshapeKind::Gaussian,
            sigma: DEFAULT_SIGMA,
            eta: DEFAULT_ETA,
            window: DEFAULT_WINDOW,
        }
    }
}

impl Lineshape {
    pub fn new(kind: LineshapeKind, sigma: f64, eta: f64, window: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(sigma) {
            return Err(Error::invalid(format!(
                "lineshape width must be > 0, got {sigma}"
            )));
        }
        if !positive(eta) {
            return Err(Error::invalid(format!(
                "denominator regularizer must be > 0, got {eta}"
            )));
        }
        if !positive(window) {
            return Err(Error::invalid(format!("window must be > 0, got {window}")));
        }
        Ok(Self {
            kind,
            sigma,
            eta,
            window,
        })
    }

    /// Gaussian of width `sigma` with default regularizer and window.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(LineshapeKind::Gaussian, sigma, DEFAULT_ETA, DEFAULT_WINDOW)
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        Self::new(self.kind, self.sigma, eta, self.window)
    }

    pub fn with_window(self, window: f64) -> Result<Self> {
        Self::new(self.kind, self.sigma, self.eta, window)
    }

    pub fn kind(&self) -> LineshapeKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Half-width (cm⁻¹) beyond which the weight is exactly zero.
    #[inline]
    pub fn cutoff(&self) -> f64 {
        self.window * self.sigma
    }

    /// Spectral weight at detuning `delta` (cm⁻¹), in units of cm.
    #[inline]
    pub fn weight(&self, delta: f64) -> f64 {
        if !(delta.abs() <= self.cutoff()) {
            return 0.0;
        }
        let s = self.sigma;
        match self.kind {
            LineshapeKind::Gaussian => {
                let x = delta / s;
                (-0.5 * x * x).exp() / (s * (2.0 * PI).sqrt())
            }
            LineshapeKind::Lorentzian => (s / PI) / (delta * delta + s * s),
        }
    }
}

/// Free-function form of [`Lineshape::weight`].
pub fn lineshape_weight(delta: f64, shape: &Lineshape) -> f64 {
    shape.weight(delta)
}
