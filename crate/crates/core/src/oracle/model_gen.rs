use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{CouplingSet, Model, PhononBath, SpinSystem};

/// Recipe for a reproducible synthetic model.
///
/// Energies are `0, gap, gap + offset, gap + 2·offset, …`. Mode frequencies
/// are uniform in `freq_range` and then sorted. Coupling entries are complex
/// with real and imaginary parts uniform in `±coupling_scale·√(3/2)` (so the
/// RMS modulus is `coupling_scale`), drawn row-major mode by mode, then
/// Hermitized as `(M + M†)/2`.
///
/// The random stream is ChaCha8 seeded through `seed_from_u64`; uniforms
/// in `[0, 1)` take the top 53 bits of each `u64` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub seed: u64,
    pub n_states: usize,
    pub n_modes: usize,
    /// Lowest transition frequency, cm⁻¹.
    pub gap: f64,
    /// `[ω_min, ω_max]`, cm⁻¹.
    pub freq_range: [f64; 2],
    /// RMS modulus of the raw coupling entries, cm⁻¹.
    pub coupling_scale: f64,
    /// Spacing of the states above the lowest pair, cm⁻¹.
    pub excited_offset: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_states: 2,
            n_modes: 30,
            gap: 1.0,
            freq_range: [20.0, 200.0],
            coupling_scale: 5.0,
            excited_offset: 500.0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.freq_range;
        if self.n_states < 2 {
            return Err(Error::invalid("model needs at least 2 states"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(Error::invalid(format!("bad frequency range [{lo}, {hi}]")));
        }
        for (name, v) in [
            ("gap", self.gap),
            ("coupling_scale", self.coupling_scale),
            ("excited_offset", self.excited_offset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

struct Uniform(ChaCha8Rng);

impl Uniform {
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

pub fn generate_model(spec: &ModelSpec) -> Result<Model> {
    spec.validate()?;
    let mut rng = Uniform(ChaCha8Rng::seed_from_u64(spec.seed));
    let ns = spec.n_states;

    let energies = (0..ns)
        .map(|k| match k {
            0 => 0.0,
            k => spec.gap + (k - 1) as f64 * spec.excited_offset,
        })
        .collect();

    let [lo, hi] = spec.freq_range;
    let mut freqs: Vec<f64> = (0..spec.n_modes).map(|_| rng.range(lo, hi)).collect();
    freqs.sort_by(f64::total_cmp);

    let amp = spec.coupling_scale * 1.5f64.sqrt();
    let matrices = (0..spec.n_modes)
        .map(|_| {
            let mut raw = DMatrix::<Complex64>::zeros(ns, ns);
            for i in 0..ns {
                for j in 0..ns {
                    let re = rng.range(-amp, amp);
                    let im = rng.range(-amp, amp);
                    raw[(i, j)] = Complex64::new(re, im);
                }
            }
            DMatrix::from_fn(ns, ns, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5)
        })
        .collect();

    Model::new(
        SpinSystem::new(energies)?,
        PhononBath::new(freqs)?,
        CouplingSet::new(matrices)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::hermitian_deviation;

    #[test]
    fn same_seed_same_model() {
        let spec = ModelSpec {
            seed: 42,
            n_states: 3,
            n_modes: 12,
            ..Default::default()
        };
        let a = generate_model(&spec).unwrap();
        let b = generate_model(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_model(&ModelSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_scale_gives_zero_couplings() {
        let spec = ModelSpec {
            coupling_scale: 0.0,
            ..Default::default()
        };
        assert!(generate_model(&spec).unwrap().couplings.is_zero());
    }

    #[test]
    fn matrices_are_hermitian_and_frequencies_sorted() {
        let spec = ModelSpec {
            seed: 9,
            n_states: 5,
            n_modes: 40,
            ..Default::default()
        };
        let m = generate_model(&spec).unwrap();
        for v in m.couplings.matrices() {
            assert!(hermitian_deviation(v) <= 1e-15);
            for i in 0..5 {
                assert_eq!(v[(i, i)].im, 0.0);
            }
        }
        let f = m.bath.frequencies();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert!(f.iter().all(|&w| (20.0..200.0).contains(&w)));
        assert_eq!(m.system.energies(), &[0.0, 1.0, 501.0, 1001.0, 1501.0]);
    }

    #[test]
    fn coupling_rms_matches_scale() {
        let spec = ModelSpec {
            seed: 3,
            n_states: 4,
            n_modes: 400,
            coupling_scale: 2.0,
            ..Default::default()
        };
        let m = generate_model(&spec).unwrap();
        // off-diagonal entries of (M + M†)/2 have RMS scale/√2, diagonal ones scale/√2 (real part only)
        let mut sum = 0.0;
        let mut count = 0;
        for v in m.couplings.matrices() {
            for z in v.iter() {
                sum += z.norm_sqr();
                count += 1;
            }
        }
        let rms = (sum / count as f64).sqrt();
        assert!((rms - 2.0 / 2f64.sqrt()).abs() < 0.05, "{rms}");
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_model(&ModelSpec {
            n_states: 1,
            ..Default::default()
        })
        .is_err());
        assert!(generate_model(&ModelSpec {
            freq_range: [0.0, 10.0],
            ..Default::default()
        })
        .is_err());
        assert!(generate_model(&ModelSpec {
            freq_range: [50.0, 10.0],
            ..Default::default()
        })
        .is_err());
        assert!(generate_model(&ModelSpec {
            gap: -1.0,
            ..Default::default()
        })
        .is_err());
    }
}
