//! Browser front end for three small runs: a 1D logistic damage front, the
//! deflagration predictor, and lateral spreading in 2D. The plain functions
//! are target-independent; the `js_*` wrappers return JSON to the page.

use failwave::analysis::{predict_tau, predict_width, track_front};
use failwave::config::{DamageBc, Profile};
use failwave::grid::{Grid, Grid1D, Grid2D};
use failwave::params::SourceLaw;
use failwave::{scenarios, solver, Result, ScenarioConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct FrontDemo {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// Damage profiles, downsampled to at most 200 points.
    pub frames: Vec<Vec<f64>>,
    pub v_f: f64,
    pub v_f_pulled: f64,
    pub tau_predicted: f64,
    pub delta1: f64,
}

fn front_config(d1: f64, rate: f64, nx: usize) -> ScenarioConfig {
    let mut cfg = scenarios::kpp_front();
    let length = 100.0;
    let dx = length / nx as f64;
    cfg.grid = Grid::D1(Grid1D { nx, dx, origin: 0.0 });
    cfg.material.d1 = d1;
    cfg.material.source_law = SourceLaw::Logistic { rate, gamma_max: 1.0 };
    cfg.dt = (0.4 * dx).min(0.1 / rate.max(1e-12));
    // Long enough to cross most of the bar at the pulled-front speed.
    cfg.t_end = 0.7 * length / (2.0 * (d1 * rate).sqrt());
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    cfg.output.snapshot_every = (steps / 40).max(1);
    cfg.gauges.clear();
    cfg
}

/// Logistic front entering a 100-long bar from a held boundary value.
pub fn front(d1: f64, rate: f64, nx: usize) -> Result<FrontDemo> {
    let cfg = front_config(d1, rate, nx);
    cfg.validate()?;
    let out = solver::run(&cfg)?;
    let stride = nx.div_ceil(MAX_POINTS);
    let g = cfg.grid;
    let x = (0..nx).step_by(stride).map(|i| g.x(i)).collect();
    let frames = out
        .snapshots
        .iter()
        .map(|s| s.gamma.iter().step_by(stride).copied().collect())
        .collect();
    let v_f = track_front(&g, &out.snapshots, 1.0, 0.5)?.v_f;
    Ok(FrontDemo {
        x,
        times: out.snapshots.iter().map(|s| s.time).collect(),
        frames,
        v_f,
        v_f_pulled: 2.0 * (d1 * rate).sqrt(),
        tau_predicted: predict_tau(d1, v_f)?,
        delta1: predict_width(d1, v_f)?,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Prediction {
    pub tau: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// `τ = d₁/v_f²`, `δ₁ = d₁/v_f`, `δ₂ = d₂/v_f`.
pub fn predict(d1: f64, d2: f64, v_f: f64) -> Result<Prediction> {
    Ok(Prediction {
        tau: predict_tau(d1, v_f)?,
        delta1: predict_width(d1, v_f)?,
        delta2: predict_width(d2, v_f)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadDemo {
    pub nx: usize,
    pub ny: usize,
    /// Final damage, row-major from the bottom row.
    pub gamma: Vec<f64>,
    /// Half-widths of the `Γ ≥ 1/2` region along `X` and along `Y`.
    pub extent_x: f64,
    pub extent_y: f64,
    /// `√(d₂/d₁)`, the expected aspect ratio of a pulled front.
    pub ratio_expected: f64,
}

fn half_width(values: impl Iterator<Item = f64>, h: f64) -> f64 {
    values.filter(|g| *g >= 0.5).count() as f64 * h / 2.0
}

/// Central seed spreading under `d₁` along `X` and `d₂` along `Y`.
pub fn spread(d1: f64, d2: f64, n: usize) -> Result<SpreadDemo> {
    let mut cfg = scenarios::lateral_2d();
    let h = 30.0 / n as f64;
    let origin = -0.5 * n as f64 * h;
    cfg.grid = Grid::D2(Grid2D {
        nx: n,
        ny: n,
        dx: h,
        dy: h,
        origin: [origin, origin],
    });
    cfg.material.d1 = d1;
    cfg.material.d2 = d2;
    cfg.bc.gamma_left = DamageBc::ZeroFlux;
    cfg.bc.gamma_right = DamageBc::ZeroFlux;
    cfg.ic.gamma = Profile::Gaussian {
        amplitude: 1.0,
        center: 0.0,
        width: 1.5,
        center_y: Some(0.0),
    };
    cfg.dt = 0.05_f64.min(0.4 * h);
    cfg.t_end = 5.0;
    cfg.gauges.clear();
    cfg.output.snapshot_every = 0;
    cfg.validate()?;
    let out = solver::run(&cfg)?;
    let gamma = out.state.gamma;
    let mid = n / 2;
    let extent_x = half_width((0..n).map(|i| gamma[mid * n + i]), h);
    let extent_y = half_width((0..n).map(|j| gamma[j * n + mid]), h);
    Ok(SpreadDemo {
        nx: n,
        ny: n,
        gamma,
        extent_x,
        extent_y,
        ratio_expected: (d2 / d1).sqrt(),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())),
        Err(e) => Err(JsValue::from_str(&e.to_string())),
    }
}

#[wasm_bindgen]
pub fn js_front(d1: f64, rate: f64, nx: usize) -> std::result::Result<String, JsValue> {
    to_js(front(d1, rate, nx))
}

#[wasm_bindgen]
pub fn js_predict(d1: f64, d2: f64, v_f: f64) -> std::result::Result<String, JsValue> {
    to_js(predict(d1, d2, v_f))
}

#[wasm_bindgen]
pub fn js_spread(d1: f64, d2: f64, n: usize) -> std::result::Result<String, JsValue> {
    to_js(spread(d1, d2, n))
}
