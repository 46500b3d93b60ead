//! Spin system, phonon bath and linear spin-phonon coupling.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance for coupling matrices, in cm⁻¹.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Eigenenergies `E_a` (cm⁻¹) of the static system Hamiltonian, sorted
/// non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    energies: Vec<f64>,
}

impl SpinSystem {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::Shape(format!(
                "a spin system needs at least 2 states, got {}",
                energies.len()
            )));
        }
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::invalid(format!("energy {i} is not finite")));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("energies must be sorted non-decreasing"));
        }
        Ok(Self { energies })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    #[inline]
    pub fn energy(&self, a: usize) -> f64 {
        self.energies[a]
    }

    /// Transition frequency `ω_ba = E_b - E_a`.
    #[inline]
    pub fn omega(&self, b: usize, a: usize) -> f64 {
        self.energies[b] - self.energies[a]
    }

    pub(crate) fn check_index(&self, i: usize, what: &str) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "{what} = {i} but the system has {} states",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Γ-point optical mode frequencies `ω_α` (cm⁻¹), positive and sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhononBath {
    frequencies: Vec<f64>,
}

impl PhononBath {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        for (index, &value) in frequencies.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveFrequency { index, value });
            }
        }
        if frequencies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid(
                "mode frequencies must be sorted non-decreasing",
            ));
        }
        Ok(Self { frequencies })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    #[inline]
    pub fn frequency(&self, alpha: usize) -> f64 {
        self.frequencies[alpha]
    }

    pub fn max_frequency(&self) -> Option<f64> {
        self.frequencies.last().copied()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "mode {i} but the bath has {} modes",
                self.len()
            )));
        }
        Ok(())
    }
}

/// One Hermitian matrix `V^α` per mode (entry `(b, a)` is `V^α_ba`, cm⁻¹ per
/// dimensionless normal coordinate) and a global multiplier λ.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    matrices: Vec<DMatrix<Complex64>>,
    scale: f64,
}

impl CouplingSet {
    pub fn new(matrices: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if let Some(first) = matrices.first() {
            let n = first.nrows();
            for (mode, m) in matrices.iter().enumerate() {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Shape(format!(
                        "coupling matrix {mode} is {}x{}, expected {n}x{n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let deviation = hermitian_deviation(m);
                if !(deviation <= HERMITIAN_TOLERANCE) {
                    return Err(Error::NonHermitian { mode, deviation });
                }
            }
        }
        Ok(Self {
            matrices,
            scale: 1.0,
        })
    }

    /// All-zero couplings for `n_modes` modes on an `n_states`-level system.
    pub fn zeros(n_states: usize, n_modes: usize) -> Self {
        Self {
            matrices: vec![DMatrix::zeros(n_states, n_states); n_modes],
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "coupling scale must be > 0, got {scale}"
            )));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Unscaled matrix of mode `alpha`.
    pub fn matrix(&self, alpha: usize) -> &DMatrix<Complex64> {
        &self.matrices[alpha]
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    /// Scaled element `λ V^α_ba`.
    #[inline]
    pub fn element(&self, alpha: usize, b: usize, a: usize) -> Complex64 {
        self.matrices[alpha][(b, a)] * self.scale
    }

    pub(crate) fn dim(&self) -> Option<usize> {
        self.matrices.first().map(|m| m.nrows())
    }

    pub fn is_zero(&self) -> bool {
        self.matrices
            .iter()
            .all(|m| m.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }
}

/// Largest `|V_ba - conj(V_ab)|` over the matrix.
pub fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for b in 0..n {
        for a in b..n {
            let d = (m[(b, a)] - m[(a, b)].conj()).norm();
            worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
            if worst.is_nan() {
                return worst;
            }
        }
    }
    worst
}

/// A complete, mutually consistent input: system, bath and couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub system: SpinSystem,
    pub bath: PhononBath,
    pub couplings: CouplingSet,
}

impl Model {
    pub fn new(system: SpinSystem, bath: PhononBath, couplings: CouplingSet) -> Result<Self> {
        if couplings.len() != bath.len() {
            return Err(Error::Shape(format!(
                "{} coupling matrices for {} modes",
                couplings.len(),
                bath.len()
            )));
        }
        if let Some(n) = couplings.dim() {
            if n != system.dim() {
                return Err(Error::Shape(format!(
                    "coupling matrices are {n}x{n} but the system has {} states",
                    system.dim()
                )));
            }
        }
        Ok(Self {
            system,
            bath,
            couplings,
        })
    }

    /// Same model with the coupling multiplier set to `scale`.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Ok(Self {
            system: self.system.clone(),
            bath: self.bath.clone(),
            couplings: self.couplings.clone().with_scale(scale)?,
        })
    }

    /// Keep only the modes with `ω_α ≤ cutoff` (and their couplings).
    pub fn restrict_to_cutoff(&self, cutoff: f64) -> Self {
        let keep = self.bath.frequencies().partition_point(|&w| w <= cutoff);
        Self {
            system: self.system.clone(),
            bath: PhononBath {
                frequencies: self.bath.frequencies()[..keep].to_vec(),
            },
            couplings: CouplingSet {
                matrices: self.couplings.matrices[..keep].to_vec(),
                scale: self.couplings.scale,
            },
        }
    }
}
