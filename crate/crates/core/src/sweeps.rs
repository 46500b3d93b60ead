//! Temperature, phonon-cutoff and coupling-scale sweeps of T1, power-law
//! fits and the two-/three-phonon crossover.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::SignPattern;
use crate::dynamics::{assemble_generator, extract_t1};
use crate::error::{Error, Result};
use crate::lineshape::Lineshape;
use crate::rates::{rate, Order};
use crate::reduce::{ordered_map, Reduction};
use crate::system::Model;
use crate::thermal::Temperature;
use crate::units::BOLTZMANN_CM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Temperature,
    Cutoff,
    Lambda,
}

impl Axis {
    /// Column header used in result files.
    pub fn label(self) -> &'static str {
        match self {
            Axis::Temperature => "temperature_K",
            Axis::Cutoff => "cutoff_cm-1",
            Axis::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub lineshape: Lineshape,
    pub orders: Vec<Order>,
    /// Fixed temperature for cutoff and λ sweeps.
    pub temperature: Option<f64>,
    pub model_id: String,
}

/// Per-channel rates of one transition along the sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSeries {
    pub order: Order,
    pub pattern: SignPattern,
    /// `(b, a)` for the transition `a → b`.
    pub transition: (usize, usize),
    pub rates: Vec<f64>,
}

/// T1 per order along one axis. Infinite entries mean no relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub axis_kind: Axis,
    pub axis: Vec<f64>,
    pub t1: BTreeMap<Order, Vec<f64>>,
    #[serde(default)]
    pub channels: Vec<ChannelSeries>,
    pub meta: SweepMeta,
}

fn check_grid(grid: &[f64], positive: bool, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{what} grid is empty")));
    }
    if grid
        .iter()
        .any(|x| !x.is_finite() || (positive && *x <= 0.0))
    {
        return Err(Error::invalid(format!(
            "{what} grid has non-finite or non-positive values"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "{what} grid must be strictly increasing"
        )));
    }
    Ok(())
}

fn check_orders(orders: &[Order]) -> Result<Vec<Order>> {
    if orders.is_empty() {
        return Err(Error::invalid("at least one order is required"));
    }
    let mut o = orders.to_vec();
    o.sort();
    o.dedup();
    Ok(o)
}

fn t1_seconds(model: &Model, t: Temperature, shape: &Lineshape, order: Order) -> Result<f64> {
    if model.bath.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(extract_t1(&assemble_generator(model, t, shape, &[order])?)?.seconds)
}

/// Transpose per-point results into per-order columns.
fn collect_columns(
    orders: &[Order],
    points: Vec<Result<Vec<f64>>>,
) -> Result<BTreeMap<Order, Vec<f64>>> {
    let mut cols: BTreeMap<Order, Vec<f64>> = orders.iter().map(|&o| (o, Vec::new())).collect();
    for point in points {
        for (o, v) in orders.iter().zip(point?) {
            cols.get_mut(o).expect("order column").push(v);
        }
    }
    Ok(cols)
}

/// Temperature at and above which `k_B T ≥ 2·max ω_α`, the regime where the
/// Bose factors are linear in T.
pub fn high_temperature_threshold(model: &Model) -> Option<f64> {
    model.bath.max_frequency().map(|w| 2.0 * w / BOLTZMANN_CM)
}

/// T1(T) for each order separately.
pub fn sweep_temperature(
    model: &Model,
    temperatures: &[f64],
    orders: &[Order],
    shape: &Lineshape,
) -> Result<SweepSeries> {
    check_grid(temperatures, true, "temperature")?;
    let orders = check_orders(orders)?;
    let points = ordered_map(temperatures.len(), Reduction::Parallel, |i| {
        let t = Temperature::new(temperatures[i])?;
        orders
            .iter()
            .map(|&o| t1_seconds(model, t, shape, o))
            .collect()
    });
    Ok(SweepSeries {
        axis_kind: Axis::Temperature,
        axis: temperatures.to_vec(),
        t1: collect_columns(&orders, points)?,
        channels: Vec::new(),
        meta: SweepMeta {
            lineshape: *shape,
            orders,
            temperature: None,
            model_id: String::new(),
        },
    })
}

/// T1 of one order with the bath truncated to `ω_α ≤ Ω_c` for each `Ω_c`.
pub fn sweep_cutoff(
    model: &Model,
    cutoffs: &[f64],
    order: Order,
    t: Temperature,
    shape: &Lineshape,
) -> Result<SweepSeries> {
    check_grid(cutoffs, false, "cutoff")?;
    let points = ordered_map(cutoffs.len(), Reduction::Parallel, |i| {
        let restricted = model.restrict_to_cutoff(cutoffs[i]);
        Ok(vec![t1_seconds(&restricted, t, shape, order)?])
    });
    Ok(SweepSeries {
        axis_kind: Axis::Cutoff,
        axis: cutoffs.to_vec(),
        t1: collect_columns(&[order], points)?,
        channels: Vec::new(),
        meta: SweepMeta {
            lineshape: *shape,
            orders: vec![order],
            temperature: Some(t.kelvin()),
            model_id: String::new(),
        },
    })
}

/// T1 per order with the coupling multiplier set to each λ.
pub fn sweep_lambda(
    model: &Model,
    lambdas: &[f64],
    orders: &[Order],
    t: Temperature,
    shape: &Lineshape,
) -> Result<SweepSeries> {
    check_grid(lambdas, true, "lambda")?;
    let orders = check_orders(orders)?;
    let points = ordered_map(lambdas.len(), Reduction::Parallel, |i| {
        let scaled = model.with_scale(lambdas[i])?;
        orders
            .iter()
            .map(|&o| t1_seconds(&scaled, t, shape, o))
            .collect()
    });
    Ok(SweepSeries {
        axis_kind: Axis::Lambda,
        axis: lambdas.to_vec(),
        t1: collect_columns(&orders, points)?,
        channels: Vec::new(),
        meta: SweepMeta {
            lineshape: *shape,
            orders,
            temperature: Some(t.kelvin()),
            model_id: String::new(),
        },
    })
}

/// Per-channel rates of the transition `a → b` at each temperature.
pub fn channel_rates_vs_temperature(
    model: &Model,
    temperatures: &[f64],
    orders: &[Order],
    shape: &Lineshape,
    (b, a): (usize, usize),
) -> Result<Vec<ChannelSeries>> {
    check_grid(temperatures, true, "temperature")?;
    let orders = check_orders(orders)?;
    let mut out = Vec::new();
    for &order in &orders {
        let rows = ordered_map(temperatures.len(), Reduction::Parallel, |i| {
            rate(
                order,
                b,
                a,
                model,
                Temperature::new(temperatures[i])?,
                shape,
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for &p in SignPattern::channels(order.phonons()) {
            out.push(ChannelSeries {
                order,
                pattern: p,
                transition: (b, a),
                rates: rows.iter().map(|r| r.channel(p)).collect(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossover {
    /// Coupling scale at which the three-phonon relaxation rate equals the
    /// two-phonon one.
    At { lambda: f64, closed_form: f64 },
    /// The bracket contains no sign change.
    NoCrossover,
}

/// Locate the crossover from the λ = 1 relaxation rates of the two- and
/// three-phonon generators. Because they scale as λ⁴ and λ⁶, the log ratio
/// is `ln(λ² r6/r4)`; it is bisected in `ln λ` and checked against
/// `√(r4/r6)`.
pub fn crossover_from_rates(r4: f64, r6: f64, bracket: (f64, f64)) -> Result<Crossover> {
    for (name, r) in [("two-phonon", r4), ("three-phonon", r6)] {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!(
                "{name} rate must be finite and > 0, got {r}"
            )));
        }
    }
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("bad lambda bracket ({lo}, {hi})")));
    }
    let log_ratio = (r6 / r4).ln();
    let f = |u: f64| 2.0 * u + log_ratio;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        b = a;
    } else if fb == 0.0 {
        a = b;
    } else if fa.signum() == fb.signum() {
        return Ok(Crossover::NoCrossover);
    }
    let rising = fa < fb;
    for _ in 0..200 {
        if b - a <= 1e-15 * a.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        if (f(mid) < 0.0) == rising {
            a = mid;
        } else {
            b = mid;
        }
    }
    let lambda = (0.5 * (a + b)).exp();
    let closed_form = (r4 / r6).sqrt();
    if ((lambda - closed_form) / closed_form).abs() > 1e-6 {
        return Err(Error::Internal(format!(
            "bisection gave {lambda}, closed form {closed_form}"
        )));
    }
    Ok(Crossover::At {
        lambda,
        closed_form,
    })
}

/// Crossover of the relaxation rate `1/T1` between the two-phonon and the
/// three-phonon generator, at temperature `t`. For a two-level model the
/// relaxation rate is `R_ba + R_ab`.
pub fn find_crossover(
    model: &Model,
    t: Temperature,
    shape: &Lineshape,
    bracket: (f64, f64),
) -> Result<Crossover> {
    let unit = model.with_scale(1.0)?;
    let r4 = 1.0 / t1_seconds(&unit, t, shape, Order::Four)?;
    let r6 = 1.0 / t1_seconds(&unit, t, shape, Order::Six)?;
    crossover_from_rates(r4, r6, bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Least-squares slope of `ln y` against `ln x`.
    pub exponent: f64,
    /// Intercept `ln y(x = 1)`.
    pub log_prefactor: f64,
    /// RMS of the residuals in `ln y`.
    pub residual: f64,
}

/// Fit `y = A x^k` by least squares in log-log space.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} abscissae for {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 4 {
        return Err(Error::invalid(format!(
            "power-law fit needs at least 4 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid("power-law fit needs finite, positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|u| (u - mx) * (u - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("power-law fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(u, v)| (u - mx) * (v - my)).sum();
    let exponent = sxy / sxx;
    let log_prefactor = my - exponent * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(u, v)| {
            let r = v - (log_prefactor + exponent * u);
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        exponent,
        log_prefactor,
        residual: (ss / n).sqrt(),
    })
}

/// Fit T1 of `order` against the axis, keeping only points with axis value
/// `≥ min_axis`.
pub fn fit_series_tail(series: &SweepSeries, order: Order, min_axis: f64) -> Result<PowerLawFit> {
    let col = series
        .t1
        .get(&order)
        .ok_or_else(|| Error::invalid(format!("series has no order-{order} column")))?;
    let (x, y): (Vec<f64>, Vec<f64>) = series
        .axis
        .iter()
        .zip(col)
        .filter(|(x, _)| **x >= min_axis)
        .map(|(x, y)| (*x, *y))
        .unzip();
    fit_power_law(&x, &y)
}

/// Evenly spaced (`log = false`) or geometric grid of `n` points.
pub fn grid(start: f64, stop: f64, n: usize, log: bool) -> Result<Vec<f64>> {
    if n == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid(
            "grid needs finite bounds and at least one point",
        ));
    }
    if n == 1 {
        return Ok(vec![start]);
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(Error::invalid("logarithmic grid needs positive bounds"));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match (log, i) {
            (_, 0) => start,
            (_, i) if i == n - 1 => stop,
            (true, i) => (start.ln() + (stop.ln() - start.ln()) * step(i)).exp(),
            (false, i) => start + (stop - start) * step(i),
        })
        .collect())
}
