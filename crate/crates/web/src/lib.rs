//! Browser bindings: three operations that take a JSON request and return a
//! JSON response. The `*_json` functions hold the logic and are usable (and
//! tested) natively; the `#[wasm_bindgen]` wrappers only convert errors.
//!
//! Infinite T1 (no relaxation) is reported as `null`.

use serde::{Deserialize, Serialize};
use spinrelax_core::lineshape::DEFAULT_WINDOW;
use spinrelax_core::oracle::{generate_model, ModelSpec};
use spinrelax_core::rates::rate;
use spinrelax_core::sweeps::{
    find_crossover, fit_series_tail, grid, high_temperature_threshold, sweep_lambda,
    sweep_temperature, Crossover,
};
use spinrelax_core::{Lineshape, LineshapeKind, Order, Temperature};
use wasm_bindgen::prelude::*;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Broadening {
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(default)]
    lineshape: LineshapeKind,
}

fn default_sigma() -> f64 {
    10.0
}

fn default_eta() -> f64 {
    1.0
}

impl Default for Broadening {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            eta: default_eta(),
            lineshape: LineshapeKind::default(),
        }
    }
}

impl Broadening {
    fn shape(&self) -> Result<Lineshape, String> {
        Lineshape::new(self.lineshape, self.sigma, self.eta, DEFAULT_WINDOW).map_err(err)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn finite(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

fn parse<'a, T: Deserialize<'a>>(request: &'a str) -> Result<T, String> {
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemperatureRequest {
    #[serde(default)]
    model: ModelSpec,
    #[serde(default)]
    broadening: Broadening,
    orders: Vec<u8>,
    t_min: f64,
    t_max: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct OrderCurve {
    order: u8,
    t1: Vec<Option<f64>>,
    /// Log-log slope over the high-temperature part of the grid.
    high_t_exponent: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TemperatureResponse {
    temperature: Vec<f64>,
    high_t_threshold: Option<f64>,
    curves: Vec<OrderCurve>,
}

/// T1 against temperature on a log grid, per order.
pub fn temperature_sweep_json(request: &str) -> Result<String, String> {
    let req: TemperatureRequest = parse(request)?;
    let model = generate_model(&req.model).map_err(err)?;
    let orders = req
        .orders
        .iter()
        .map(|&o| Order::from_value(o))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let temps = grid(req.t_min, req.t_max, req.points, true).map_err(err)?;
    let series =
        sweep_temperature(&model, &temps, &orders, &req.broadening.shape()?).map_err(err)?;
    let threshold = high_temperature_threshold(&model);
    let curves = series
        .t1
        .iter()
        .map(|(&order, t1)| OrderCurve {
            order: order.value(),
            t1: finite(t1),
            high_t_exponent: threshold
                .and_then(|t0| fit_series_tail(&series, order, t0).ok())
                .map(|f| f.exponent),
        })
        .collect();
    serde_json::to_string(&TemperatureResponse {
        temperature: temps,
        high_t_threshold: threshold,
        curves,
    })
    .map_err(err)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRequest {
    #[serde(default)]
    model: ModelSpec,
    #[serde(default)]
    broadening: Broadening,
    temperature: f64,
    #[serde(default)]
    initial: usize,
    #[serde(default = "default_final")]
    r#final: usize,
}

fn default_final() -> usize {
    1
}

#[derive(Debug, Serialize)]
struct ChannelRate {
    order: u8,
    channel: String,
    rate: f64,
}

#[derive(Debug, Serialize)]
struct ChannelResponse {
    channels: Vec<ChannelRate>,
    totals: Vec<(u8, f64)>,
}

/// Rates of every emission/absorption channel of one transition, s⁻¹.
pub fn channel_breakdown_json(request: &str) -> Result<String, String> {
    let req: ChannelRequest = parse(request)?;
    let model = generate_model(&req.model).map_err(err)?;
    let t = Temperature::new(req.temperature).map_err(err)?;
    let shape = req.broadening.shape()?;
    let mut channels = Vec::new();
    let mut totals = Vec::new();
    for order in Order::ALL {
        let r = rate(order, req.r#final, req.initial, &model, t, &shape).map_err(err)?;
        channels.extend(r.per_channel.iter().map(|(p, v)| ChannelRate {
            order: order.value(),
            channel: p.to_string(),
            rate: *v,
        }));
        totals.push((order.value(), r.total));
    }
    serde_json::to_string(&ChannelResponse { channels, totals }).map_err(err)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaRequest {
    #[serde(default)]
    model: ModelSpec,
    #[serde(default)]
    broadening: Broadening,
    temperature: f64,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct LambdaResponse {
    lambda: Vec<f64>,
    t1_order4: Vec<Option<f64>>,
    t1_order6: Vec<Option<f64>>,
    /// λ at which the two- and three-phonon relaxation rates are equal.
    crossover: Option<f64>,
}

/// Two- and three-phonon T1 against the coupling scale, with the crossover.
pub fn lambda_crossover_json(request: &str) -> Result<String, String> {
    let req: LambdaRequest = parse(request)?;
    let model = generate_model(&req.model).map_err(err)?;
    let t = Temperature::new(req.temperature).map_err(err)?;
    let shape = req.broadening.shape()?;
    let lambdas = grid(req.lambda_min, req.lambda_max, req.points, true).map_err(err)?;
    let series =
        sweep_lambda(&model, &lambdas, &[Order::Four, Order::Six], t, &shape).map_err(err)?;
    let crossover = match find_crossover(&model, t, &shape, (1e-6, 1e6)) {
        Ok(Crossover::At { lambda, .. }) => Some(lambda),
        _ => None,
    };
    serde_json::to_string(&LambdaResponse {
        lambda: lambdas,
        t1_order4: finite(&series.t1[&Order::Four]),
        t1_order6: finite(&series.t1[&Order::Six]),
        crossover,
    })
    .map_err(err)
}

#[wasm_bindgen]
pub fn temperature_sweep(request: &str) -> Result<String, JsError> {
    temperature_sweep_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn channel_breakdown(request: &str) -> Result<String, JsError> {
    channel_breakdown_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lambda_crossover(request: &str) -> Result<String, JsError> {
    lambda_crossover_json(request).map_err(|e| JsError::new(&e))
}
