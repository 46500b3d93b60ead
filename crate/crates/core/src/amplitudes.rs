//! Complex T-matrix amplitudes for two- and three-phonon processes.
//!
//! A process is built from an ordered product of coupling matrices
//! `V^μ V^ν (V^ξ)`, read right to left: the rightmost phonon acts first.
//! Each phonon already applied shifts the intermediate-state energy by `+ω`
//! when emitted and `-ω` when absorbed; the leftmost (last) phonon never
//! appears in a denominator. The amplitude of a channel is the sum over all
//! orderings of its phonons.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{Phonon, SignPattern};
use crate::error::{Error, Result};
use crate::system::{CouplingSet, PhononBath, SpinSystem};

/// The six orderings of three phonons, as positions into a triple.
pub const PERMUTATIONS_3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// `1 / (x + iη)`, the regularized form of `1 / (x + i0⁺)`.
#[inline]
pub fn regularized_inverse(x: f64, eta: f64) -> Complex64 {
    let d = x * x + eta * eta;
    Complex64::new(x / d, -eta / d)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!(
            "regularizer eta must be > 0, got {eta}"
        )));
    }
    Ok(())
}

fn check_dims(sys: &SpinSystem, bath: &PhononBath, cpl: &CouplingSet) -> Result<()> {
    if cpl.len() != bath.len() {
        return Err(Error::Shape(format!(
            "{} couplings for {} modes",
            cpl.len(),
            bath.len()
        )));
    }
    if let Some(m) = cpl.matrices().first() {
        if m.nrows() != sys.dim() {
            return Err(Error::Shape(format!(
                "coupling dimension {} does not match {} states",
                m.nrows(),
                sys.dim()
            )));
        }
    }
    Ok(())
}

/// `Σ_c V^μ_bc V^ν_ca / (E_c - E_a + shift + iη)` with unscaled matrices.
pub(crate) fn amp2_raw(
    energies: &[f64],
    first: &DMatrix<Complex64>,
    second: &DMatrix<Complex64>,
    b: usize,
    a: usize,
    shift: f64,
    eta: f64,
) -> Complex64 {
    let ea = energies[a];
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, &ec) in energies.iter().enumerate() {
        acc += first[(b, c)] * second[(c, a)] * regularized_inverse(ec - ea + shift, eta);
    }
    acc
}

/// `Σ_cd V^μ_bc V^ν_cd V^ξ_da / [(E_c - E_a + outer + iη)(E_d - E_a + inner + iη)]`
/// with unscaled matrices.
#[allow(clippy::too_many_arguments)]
pub(crate) fn amp3_raw(
    energies: &[f64],
    mats: [&DMatrix<Complex64>; 3],
    b: usize,
    a: usize,
    outer_shift: f64,
    inner_shift: f64,
    eta: f64,
) -> Complex64 {
    let [vm, vn, vx] = mats;
    let ea = energies[a];
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, &ec) in energies.iter().enumerate() {
        let mut inner = Complex64::new(0.0, 0.0);
        for (d, &ed) in energies.iter().enumerate() {
            inner += vn[(c, d)] * vx[(d, a)] * regularized_inverse(ed - ea + inner_shift, eta);
        }
        acc += vm[(b, c)] * inner * regularized_inverse(ec - ea + outer_shift, eta);
    }
    acc
}

/// Two-phonon amplitude `T^{μν,±}_ba = Σ_c V^μ_bc V^ν_ca / (E_c - E_a ± ω_ν + iη)`
/// for the ordering `modes = (μ, ν)`; `sign` is what happens to ν.
#[allow(clippy::too_many_arguments)]
pub fn amp2(
    b: usize,
    a: usize,
    modes: (usize, usize),
    sign: Phonon,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    eta: f64,
) -> Result<Complex64> {
    check_eta(eta)?;
    check_dims(sys, bath, cpl)?;
    sys.check_index(b, "b")?;
    sys.check_index(a, "a")?;
    let (mu, nu) = modes;
    bath.check_index(mu)?;
    bath.check_index(nu)?;
    let shift = sign.sign() * bath.frequency(nu);
    let lam = cpl.scale();
    Ok(amp2_raw(
        sys.energies(),
        cpl.matrix(mu),
        cpl.matrix(nu),
        b,
        a,
        shift,
        eta,
    ) * (lam * lam))
}

/// Three-phonon amplitude `T^{μνξ, s_ν s_ξ}_ba` for the ordering
/// `(μ, ν, ξ)`; `signs` are the labels of ν and ξ.
#[allow(clippy::too_many_arguments)]
pub fn amp3(
    b: usize,
    a: usize,
    ordering: [usize; 3],
    signs: [Phonon; 2],
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    eta: f64,
) -> Result<Complex64> {
    check_eta(eta)?;
    check_dims(sys, bath, cpl)?;
    sys.check_index(b, "b")?;
    sys.check_index(a, "a")?;
    for &m in &ordering {
        bath.check_index(m)?;
    }
    let [mu, nu, xi] = ordering;
    let inner = signs[1].sign() * bath.frequency(xi);
    let outer = signs[0].sign() * bath.frequency(nu) + inner;
    let lam = cpl.scale();
    let mats = [cpl.matrix(mu), cpl.matrix(nu), cpl.matrix(xi)];
    Ok(amp3_raw(sys.energies(), mats, b, a, outer, inner, eta) * (lam * lam * lam))
}

/// Full two-phonon amplitude of `pattern` on the mode pair `(α, β)`:
/// `T^{βα, s_α} + T^{αβ, s_β}`.
#[allow(clippy::too_many_arguments)]
pub fn channel_amplitude2(
    b: usize,
    a: usize,
    pair: [usize; 2],
    pattern: SignPattern,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    eta: f64,
) -> Result<Complex64> {
    if pattern.len() != 2 {
        return Err(Error::Shape(format!(
            "pattern {pattern} is not a two-phonon channel"
        )));
    }
    let [al, be] = pair;
    Ok(amp2(b, a, (be, al), pattern.get(0), sys, bath, cpl, eta)?
        + amp2(b, a, (al, be), pattern.get(1), sys, bath, cpl, eta)?)
}

/// Full three-phonon amplitude of `pattern` on `(α, β, γ)`: the sum of
/// `amp3` over the six orderings of the triple.
#[allow(clippy::too_many_arguments)]
pub fn channel_amplitude3(
    b: usize,
    a: usize,
    triple: [usize; 3],
    pattern: SignPattern,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    eta: f64,
) -> Result<Complex64> {
    if pattern.len() != 3 {
        return Err(Error::Shape(format!(
            "pattern {pattern} is not a three-phonon channel"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for p in PERMUTATIONS_3 {
        let ordering = [triple[p[0]], triple[p[1]], triple[p[2]]];
        acc += amp3(
            b,
            a,
            ordering,
            [pattern.get(p[1]), pattern.get(p[2])],
            sys,
            bath,
            cpl,
            eta,
        )?;
    }
    Ok(acc)
}

/// Number of intermediate-state denominators `E_c - E_a ± ω_ν (± ω_ξ)` whose
/// magnitude falls below `eta / 10`, over single modes and ordered mode
/// pairs. Such near-resonances make the result depend on `eta`.
pub fn count_near_resonances(sys: &SpinSystem, bath: &PhononBath, eta: f64) -> usize {
    let tol = eta / 10.0;
    let w = bath.frequencies();
    let e = sys.energies();
    let mut gaps: Vec<f64> = Vec::with_capacity(e.len() * e.len());
    for &ea in e {
        for &ec in e {
            gaps.push(ec - ea);
        }
    }
    let mut count = 0;
    for &g in &gaps {
        for &x in w {
            count += usize::from((g + x).abs() < tol) + usize::from((g - x).abs() < tol);
        }
        for (i, &x) in w.iter().enumerate() {
            for &y in &w[i + 1..] {
                for s in [x + y, x - y, -x + y, -x - y] {
                    count += usize::from((g + s).abs() < tol);
                }
            }
        }
    }
    count
}
