//! Phonon sign patterns and their thermal/energy-conservation weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineshape::Lineshape;
use crate::thermal::{occupation, Temperature};

/// What happens to one participating phonon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phonon {
    /// `+`: the phonon is created, weight `n̄ + 1`.
    Emit,
    /// `-`: the phonon is destroyed, weight `n̄`.
    Absorb,
}

impl Phonon {
    /// Sign with which the mode frequency enters energy balances and
    /// intermediate-state denominators.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Phonon::Emit => 1.0,
            Phonon::Absorb => -1.0,
        }
    }

    /// Thermal factor for a mode with occupation `n`.
    #[inline]
    pub fn thermal_factor(self, n: f64) -> f64 {
        match self {
            Phonon::Emit => n + 1.0,
            Phonon::Absorb => n,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Phonon::Emit => '+',
            Phonon::Absorb => '-',
        }
    }
}

/// Absorb/emit label per participating phonon, in ascending mode order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    len: u8,
    signs: [Phonon; 3],
}

use Phonon::{Absorb as A, Emit as E};

impl SignPattern {
    pub const ONE_PHONON: [SignPattern; 2] = [Self::p1(E), Self::p1(A)];

    pub const TWO_PHONON: [SignPattern; 4] = [
        Self::p2(E, E),
        Self::p2(A, A),
        Self::p2(E, A),
        Self::p2(A, E),
    ];

    /// The eight three-phonon channels in the order `+++ --- +-- -++ -+- +-+ --+ ++-`.
    pub const THREE_PHONON: [SignPattern; 8] = [
        Self::p3(E, E, E),
        Self::p3(A, A, A),
        Self::p3(E, A, A),
        Self::p3(A, E, E),
        Self::p3(A, E, A),
        Self::p3(E, A, E),
        Self::p3(A, A, E),
        Self::p3(E, E, A),
    ];

    const fn p1(a: Phonon) -> Self {
        Self {
            len: 1,
            signs: [a, E, E],
        }
    }

    const fn p2(a: Phonon, b: Phonon) -> Self {
        Self {
            len: 2,
            signs: [a, b, E],
        }
    }

    const fn p3(a: Phonon, b: Phonon, c: Phonon) -> Self {
        Self {
            len: 3,
            signs: [a, b, c],
        }
    }

    pub fn new(signs: &[Phonon]) -> Result<Self> {
        match *signs {
            [a] => Ok(Self::p1(a)),
            [a, b] => Ok(Self::p2(a, b)),
            [a, b, c] => Ok(Self::p3(a, b, c)),
            _ => Err(Error::invalid(format!(
                "sign pattern must hold 1 to 3 phonons, got {}",
                signs.len()
            ))),
        }
    }

    /// All channels of a process with `phonons` participating phonons.
    pub fn channels(phonons: usize) -> &'static [SignPattern] {
        match phonons {
            1 => &Self::ONE_PHONON,
            2 => &Self::TWO_PHONON,
            3 => &Self::THREE_PHONON,
            _ => &[],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn signs(&self) -> &[Phonon] {
        &self.signs[..self.len as usize]
    }

    #[inline]
    pub fn get(&self, i: usize) -> Phonon {
        self.signs()[i]
    }

    /// Energy mismatch `ω_ba + Σ_i s_i ω_i` accumulated left to right.
    ///
    /// Every code path that decides whether a term lies inside the
    /// lineshape window goes through this function, so pruning and weighting
    /// always agree to the last bit.
    #[inline]
    pub fn detuning(&self, omega_ba: f64, freqs: &[f64]) -> f64 {
        let mut d = omega_ba;
        for (s, &w) in self.signs().iter().zip(freqs) {
            d += s.sign() * w;
        }
        d
    }

    /// Product of thermal factors `n̄` / `n̄ + 1` for the given occupations.
    #[inline]
    pub fn thermal_factor(&self, occupations: &[f64]) -> f64 {
        let mut f = 1.0;
        for (s, &n) in self.signs().iter().zip(occupations) {
            f *= s.thermal_factor(n);
        }
        f
    }

    /// Full channel weight from precomputed occupations.
    #[inline]
    pub(crate) fn weight_with(
        &self,
        omega_ba: f64,
        freqs: &[f64],
        occupations: &[f64],
        shape: &Lineshape,
    ) -> f64 {
        let lw = shape.weight(self.detuning(omega_ba, freqs));
        if lw == 0.0 {
            return 0.0;
        }
        self.thermal_factor(occupations) * lw
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.signs() {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(E),
                '-' | '\u{2212}' => Ok(A),
                _ => Err(Error::invalid(format!("bad sign pattern '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&signs)
    }
}

impl Serialize for SignPattern {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignPattern {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Thermal and energy-conservation weight of one channel:
/// `∏_i f_i · L(ω_ba + Σ_i s_i ω_i)` with `f = n̄` (absorbed, `s = -1`) or
/// `f = n̄ + 1` (emitted, `s = +1`).
pub fn channel_weight(
    pattern: SignPattern,
    modes: &[f64],
    omega_ba: f64,
    kelvin: f64,
    shape: &Lineshape,
) -> Result<f64> {
    if pattern.len() != modes.len() {
        return Err(Error::Shape(format!(
            "pattern {pattern} has {} phonons but {} mode frequencies were given",
            pattern.len(),
            modes.len()
        )));
    }
    let t = Temperature::new(kelvin)?;
    let mut occ = [0.0; 3];
    for (o, &w) in occ.iter_mut().zip(modes) {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(format!(
                "mode frequency must be > 0, got {w}"
            )));
        }
        *o = occupation(w, t);
    }
    Ok(pattern.weight_with(omega_ba, modes, &occ[..modes.len()], shape))
}
