use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{channel_weight, SignPattern};
use crate::error::{Error, Result};
use crate::lineshape::Lineshape;
use crate::rates::{Order, RateBreakdown};
use crate::system::{CouplingSet, PhononBath, SpinSystem};
use crate::thermal::Temperature;
use crate::units::CM_TO_PER_SECOND;

/// Largest bath the reference implementations accept.
pub const NAIVE_MAX_MODES: usize = 60;

fn guard(b: usize, a: usize, sys: &SpinSystem, bath: &PhononBath, cpl: &CouplingSet) -> Result<()> {
    if bath.len() > NAIVE_MAX_MODES {
        return Err(Error::invalid(format!(
            "reference implementation limited to {NAIVE_MAX_MODES} modes, got {}",
            bath.len()
        )));
    }
    if cpl.len() != bath.len() {
        return Err(Error::Shape(format!(
            "{} couplings for {} modes",
            cpl.len(),
            bath.len()
        )));
    }
    let n = sys.dim();
    if b >= n || a >= n {
        return Err(Error::IndexOutOfRange(format!(
            "transition {a} -> {b} with {n} states"
        )));
    }
    if b == a {
        return Err(Error::invalid("b = a"));
    }
    Ok(())
}

fn breakdown(order: Order, per_channel: BTreeMap<SignPattern, f64>) -> RateBreakdown {
    let mut total = 0.0;
    for p in SignPattern::channels(order.phonons()) {
        total += per_channel[p];
    }
    RateBreakdown {
        order,
        per_channel,
        total,
    }
}

/// Two-phonon rate by direct enumeration of every pair `α < β` and both
/// orderings of the amplitude.
pub fn naive_rate_two_phonon(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    guard(b, a, sys, bath, cpl)?;
    let n = bath.len();
    let ns = sys.dim();
    let e = sys.energies();
    let w = bath.frequencies();
    let omega_ba = e[b] - e[a];
    let eta = shape.eta();

    let mut per_channel = BTreeMap::new();
    for &p in SignPattern::channels(2) {
        let mut acc = 0.0;
        for al in 0..n {
            for be in al + 1..n {
                let weight = channel_weight(p, &[w[al], w[be]], omega_ba, t.kelvin(), shape)?;
                let mut amp = Complex64::new(0.0, 0.0);
                // (outer, first-applied, label of first-applied)
                for (outer, first, s) in [(be, al, p.get(0)), (al, be, p.get(1))] {
                    for c in 0..ns {
                        let num = cpl.element(outer, b, c) * cpl.element(first, c, a);
                        let den = Complex64::new(e[c] - e[a] + s.sign() * w[first], eta);
                        amp += num / den;
                    }
                }
                acc += amp.norm_sqr() * weight;
            }
        }
        per_channel.insert(p, 2.0 * PI * acc * CM_TO_PER_SECOND);
    }
    Ok(breakdown(Order::Four, per_channel))
}

/// Three-phonon rate by direct enumeration of every triple `α < β < γ`,
/// all six orderings and both intermediate states, with no pruning.
pub fn naive_rate_three_phonon(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    guard(b, a, sys, bath, cpl)?;
    let n = bath.len();
    let ns = sys.dim();
    let e = sys.energies();
    let w = bath.frequencies();
    let omega_ba = e[b] - e[a];
    let eta = shape.eta();

    let mut per_channel = BTreeMap::new();
    for &p in SignPattern::channels(3) {
        let mut acc = 0.0;
        for al in 0..n {
            for be in al + 1..n {
                for ga in be + 1..n {
                    let modes = [al, be, ga];
                    let weight =
                        channel_weight(p, &[w[al], w[be], w[ga]], omega_ba, t.kelvin(), shape)?;
                    let mut amp = Complex64::new(0.0, 0.0);
                    for (i, j, k) in [
                        (0, 1, 2),
                        (0, 2, 1),
                        (1, 0, 2),
                        (1, 2, 0),
                        (2, 0, 1),
                        (2, 1, 0),
                    ] {
                        let (mu, nu, xi) = (modes[i], modes[j], modes[k]);
                        let shift_nu = p.get(j).sign() * w[nu];
                        let shift_xi = p.get(k).sign() * w[xi];
                        for c in 0..ns {
                            for d in 0..ns {
                                let num = cpl.element(mu, b, c)
                                    * cpl.element(nu, c, d)
                                    * cpl.element(xi, d, a);
                                let den1 = Complex64::new(e[c] - e[a] + shift_nu + shift_xi, eta);
                                let den2 = Complex64::new(e[d] - e[a] + shift_xi, eta);
                                amp += num / (den1 * den2);
                            }
                        }
                    }
                    acc += amp.norm_sqr() * weight;
                }
            }
        }
        per_channel.insert(p, 2.0 * PI * acc * CM_TO_PER_SECOND);
    }
    Ok(breakdown(Order::Six, per_channel))
}
