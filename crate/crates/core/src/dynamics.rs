//! Markovian population generator and T1.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::amplitudes::count_near_resonances;
use crate::error::{Error, Result};
use crate::lineshape::Lineshape;
use crate::rates::{Kernel, Order, Reduction};
use crate::system::{Model, SpinSystem};
use crate::thermal::Temperature;

/// Population-transfer generator: `dp/dt = G p`, entry `(b, a)` the rate
/// `a → b` in s⁻¹, each column summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGenerator {
    matrix: DMatrix<f64>,
    orders: BTreeSet<Order>,
}

impl RateGenerator {
    /// Build from off-diagonal rates; the diagonal of `rates` is ignored and
    /// replaced by minus the column sums.
    pub fn from_rates(rates: DMatrix<f64>, orders: BTreeSet<Order>) -> Result<Self> {
        let n = rates.nrows();
        if n != rates.ncols() || n == 0 {
            return Err(Error::Shape(format!(
                "generator must be square, got {}x{}",
                n,
                rates.ncols()
            )));
        }
        let mut matrix = rates;
        for a in 0..n {
            let mut out = 0.0;
            for b in 0..n {
                if b == a {
                    continue;
                }
                let r = matrix[(b, a)];
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::invalid(format!("rate {a} -> {b} is {r}")));
                }
                out += r;
            }
            matrix[(a, a)] = -out;
        }
        Ok(Self { matrix, orders })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn orders(&self) -> &BTreeSet<Order> {
        &self.orders
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Rate `a → b`.
    pub fn rate(&self, b: usize, a: usize) -> f64 {
        self.matrix[(b, a)]
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|&x| x == 0.0)
    }

    /// Entrywise sum of two generators over the same states.
    pub fn combine(&self, other: &RateGenerator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("generators of different dimension".into()));
        }
        let off = &self.matrix + &other.matrix;
        Self::from_rates(off, self.orders.union(&other.orders).copied().collect())
    }
}

/// Sum the rates of every requested order into a population generator.
pub fn assemble_generator(
    model: &Model,
    t: Temperature,
    shape: &Lineshape,
    orders: &[Order],
) -> Result<RateGenerator> {
    if orders.is_empty() {
        return Err(Error::invalid("at least one order is required"));
    }
    let orders: BTreeSet<Order> = orders.iter().copied().collect();
    let n = model.system.dim();
    if orders.iter().any(|o| *o != Order::Two) {
        let near = count_near_resonances(&model.system, &model.bath, shape.eta());
        if near > 0 {
            log::warn!(
                "{near} intermediate-state denominators are within eta/10 of zero; results depend on eta"
            );
        }
    }
    let kernel = Kernel::new(
        &model.system,
        &model.bath,
        &model.couplings,
        t,
        shape,
        Reduction::Parallel,
    )?;
    let mut rates = DMatrix::zeros(n, n);
    for &order in &orders {
        for a in 0..n {
            let table =
                (order == Order::Six && model.bath.len() >= 3).then(|| kernel.pair_table(a));
            for b in (0..n).filter(|&b| b != a) {
                let r = match (order, &table) {
                    (Order::Six, Some(tab)) => kernel.three_phonon(b, tab)?,
                    _ => kernel.rate(order, b, a)?,
                };
                rates[(b, a)] += r.total;
            }
        }
    }
    RateGenerator::from_rates(rates, orders)
}

/// Slowest population relaxation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1 {
    /// Seconds; `f64::INFINITY` when nothing relaxes.
    pub seconds: f64,
    /// How many eigenvalues share the slowest decay constant (within 1e-9
    /// relative). Values above 1 flag a degenerate slow mode.
    pub multiplicity: usize,
}

impl T1 {
    pub const NO_RELAXATION: T1 = T1 {
        seconds: f64::INFINITY,
        multiplicity: 0,
    };

    pub fn is_finite(&self) -> bool {
        self.seconds.is_finite()
    }

    /// `1/T1` in s⁻¹ (zero when nothing relaxes).
    pub fn rate(&self) -> f64 {
        1.0 / self.seconds
    }
}

/// `T1 = 1/|Re λ₁|` with `λ₁` the nonzero eigenvalue of the generator of
/// smallest `|Re λ|`. For two states this is exactly `1/(R_ba + R_ab)`.
pub fn extract_t1(gen: &RateGenerator) -> Result<T1> {
    let m = gen.matrix();
    if gen.is_zero() {
        return Ok(T1::NO_RELAXATION);
    }
    if gen.dim() == 2 {
        let k = m[(1, 0)] + m[(0, 1)];
        return Ok(T1 {
            seconds: 1.0 / k,
            multiplicity: 1,
        });
    }
    let norm = m.norm();
    let tol = 1e-9 * norm;
    let eig = m.clone().complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Internal(
            "eigenvalue computation did not converge".into(),
        ));
    }
    let decay: Vec<f64> = eig
        .iter()
        .filter(|z| z.norm() > tol)
        .map(|z| z.re.abs())
        .collect();
    let Some(slowest) = decay.iter().copied().reduce(f64::min) else {
        return Ok(T1::NO_RELAXATION);
    };
    if slowest <= tol {
        return Ok(T1::NO_RELAXATION);
    }
    let multiplicity = decay
        .iter()
        .filter(|&&d| (d - slowest).abs() <= 1e-9 * slowest)
        .count();
    Ok(T1 {
        seconds: 1.0 / slowest,
        multiplicity,
    })
}

/// `exp(t G) p0` by scaling and squaring.
pub fn propagate_populations(gen: &RateGenerator, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = gen.dim();
    if p0.len() != n {
        return Err(Error::Shape(format!(
            "{} populations for {n} states",
            p0.len()
        )));
    }
    if p0.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
        return Err(Error::invalid(
            "populations must be finite and non-negative",
        ));
    }
    let sum: f64 = p0.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "populations sum to {sum}, expected 1"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    let prop = (gen.matrix() * t).exp();
    let p = prop * DVector::from_column_slice(p0);
    let mut out = Vec::with_capacity(n);
    for &x in p.iter() {
        if x < -1e-9 || !x.is_finite() {
            return Err(Error::Internal(format!(
                "propagated population {x} out of range"
            )));
        }
        out.push(x.max(0.0));
    }
    Ok(out)
}

/// Boltzmann populations of the system eigenstates at temperature `t`.
pub fn boltzmann_populations(sys: &SpinSystem, t: Temperature) -> Vec<f64> {
    let e0 = sys.energy(0);
    let w: Vec<f64> = sys
        .energies()
        .iter()
        .map(|&e| (-(e - e0) / t.thermal_energy()).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}
