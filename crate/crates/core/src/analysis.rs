//! Front metrics, deflagration predictors, the material tables and the
//! vanishing-dissipation study.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{self, GaugeTrace, RunOutput, Snapshot};

/// Reaction time `τ = d₁/v_f²` from `v_f ≃ √(d₁/τ)`.
pub fn predict_tau(d1: f64, v_f: f64) -> Result<f64> {
    check_speed(v_f)?;
    check_diffusivity(d1)?;
    Ok(d1 / (v_f * v_f))
}

/// Front width `δ = d/v_f`; `d₁` gives the longitudinal width, `d₂` the
/// transverse (shard-scale) estimate.
pub fn predict_width(d: f64, v_f: f64) -> Result<f64> {
    check_speed(v_f)?;
    check_diffusivity(d)?;
    Ok(d / v_f)
}

/// Lateral damage speed `v_l = √(d₂/τ)`.
pub fn lateral_speed(d2: f64, tau: f64) -> Result<f64> {
    check_diffusivity(d2)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidValue("tau".into(), "must be > 0".into()));
    }
    Ok((d2 / tau).sqrt())
}

fn check_speed(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveSpeed(v))
    }
}

fn check_diffusivity(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidValue("d".into(), "must be >= 0".into()))
    }
}

/// Least-squares line `y = slope·x + intercept` and its `R²`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = y.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Observed convergence orders between successive errors of a sequence
/// refined by `ratio` each time.
pub fn observed_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect()
}

/// Front trajectory extracted from snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrack {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub v_f: f64,
    pub fit_r2: f64,
}

/// Rightmost crossing of `field/gamma_ref = level` along row `row`, by linear
/// interpolation between cell centres.
pub fn front_position(grid: &Grid, field: &[f64], row: usize, gamma_ref: f64, level: f64) -> Option<f64> {
    let nx = grid.nx();
    let r = &field[row * nx..(row + 1) * nx];
    let thr = level * gamma_ref;
    (0..nx - 1).rev().find_map(|i| {
        (r[i] >= thr && r[i + 1] < thr).then(|| {
            let s = (r[i] - thr) / (r[i] - r[i + 1]);
            grid.x(i) + s * grid.dx()
        })
    })
}

/// Tracks the front along the middle row and fits its speed over the last
/// half of the snapshots in which it was found.
pub fn track_front(grid: &Grid, snapshots: &[Snapshot], gamma_ref: f64, level: f64) -> Result<FrontTrack> {
    let row = grid.ny() / 2;
    let (times, positions): (Vec<f64>, Vec<f64>) = snapshots
        .iter()
        .filter_map(|s| front_position(grid, &s.gamma, row, gamma_ref, level).map(|x| (s.time, x)))
        .unzip();
    if times.len() < 5 {
        return Err(Error::NoFrontDetected);
    }
    let h = times.len() / 2;
    let (v_f, _, fit_r2) = linear_fit(&times[h..], &positions[h..]);
    Ok(FrontTrack {
        times,
        positions,
        v_f,
        fit_r2,
    })
}

fn crossing(times: &[f64], signal: &[f64], level: f64) -> Option<f64> {
    if signal.first().is_some_and(|s| *s >= level) {
        return Some(times[0]);
    }
    (1..signal.len()).find_map(|k| {
        (signal[k] >= level).then(|| {
            let (s0, s1) = (signal[k - 1], signal[k]);
            times[k - 1] + (level - s0) / (s1 - s0) * (times[k] - times[k - 1])
        })
    })
}

/// Time from the `lo` to the `hi` fraction of the final plateau, with linear
/// interpolation at the first crossings.
pub fn rise_time(times: &[f64], signal: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::NoPlateau);
    }
    let plateau = signal[n - 1];
    let tail = &signal[n - (n / 10).max(1)..];
    let (mn, mx) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(*s), b.max(*s)));
    if !(plateau > 0.0) || (mx - mn) > 0.05 * plateau {
        return Err(Error::NoPlateau);
    }
    let t_lo = crossing(times, signal, lo * plateau).ok_or(Error::NoPlateau)?;
    let t_hi = crossing(times, signal, hi * plateau).ok_or(Error::NoPlateau)?;
    Ok(t_hi - t_lo)
}

/// Rise time of a gauge's lateral-stress proxy.
pub fn measure_rise_time(trace: &GaugeTrace, lo: f64, hi: f64) -> Result<f64> {
    rise_time(&trace.times(), &trace.proxy(), lo, hi)
}

/// First time the gauge proxy reaches `level`.
pub fn arrival_time(trace: &GaugeTrace, level: f64) -> Option<f64> {
    crossing(&trace.times(), &trace.proxy(), level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMetrics {
    pub v_f: f64,
    /// 10–90 rise time at the first gauge.
    pub tau: f64,
    /// 1–99 rise time, standing in for the full 0–100 rise.
    pub tau_full: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub fit_r2: f64,
    /// `d₁/v_f²`.
    pub tau_predicted: f64,
    /// `√(d₁/τ)` with the measured 10–90 rise time.
    pub v_f_predicted: f64,
    /// `√(d₂/τ)/v₀` when a crack-tip speed is configured.
    pub lateral_ratio: Option<f64>,
}

/// Metrics of a finished run: front speed from snapshots, rise time from the
/// first gauge.
pub fn wave_metrics(cfg: &ScenarioConfig, out: &RunOutput) -> Result<WaveMetrics> {
    let p = &cfg.material;
    let front = track_front(&cfg.grid, &out.snapshots, p.gamma_ref(), cfg.analysis.front_level)?;
    let trace = out.gauges.first().ok_or(Error::NoPlateau)?;
    let tau = measure_rise_time(trace, 0.1, 0.9)?;
    let tau_full = measure_rise_time(trace, 0.01, 0.99)?;
    let lateral_ratio = match cfg.analysis.crack_tip_speed {
        Some(v0) if v0 > 0.0 => Some(lateral_speed(p.d2, tau)? / v0),
        _ => None,
    };
    Ok(WaveMetrics {
        v_f: front.v_f,
        tau,
        tau_full,
        delta1: predict_width(p.d1, front.v_f)?,
        delta2: predict_width(p.d2, front.v_f)?,
        fit_r2: front.fit_r2,
        tau_predicted: predict_tau(p.d1, front.v_f)?,
        v_f_predicted: (p.d1 / tau).sqrt(),
        lateral_ratio,
    })
}

/// Published material data for the comparison tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub v_f: f64,
    pub d1: f64,
    pub tau_exp: f64,
    pub delta1_exp: f64,
}

pub fn k8_preset() -> MaterialPreset {
    MaterialPreset {
        name: "K8".into(),
        v_f: 3320.0,
        d1: 6.6,
        tau_exp: 0.75e-6,
        delta1_exp: 2.49e-3,
    }
}

pub fn soda_lime_preset() -> MaterialPreset {
    MaterialPreset {
        name: "soda-lime".into(),
        v_f: 3090.0,
        d1: 7.4,
        tau_exp: 0.9e-6,
        delta1_exp: 2.8e-3,
    }
}

pub fn builtin_presets() -> Vec<MaterialPreset> {
    vec![k8_preset(), soda_lime_preset()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub preset: MaterialPreset,
    pub tau_pred: f64,
    pub delta1_pred: f64,
    /// `(predicted − experimental)/experimental`.
    pub tau_rel_diff: f64,
    pub delta1_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
}

pub fn table_report(presets: &[MaterialPreset]) -> Result<TableReport> {
    let rows = presets
        .iter()
        .map(|m| {
            let tau_pred = predict_tau(m.d1, m.v_f)?;
            let delta1_pred = predict_width(m.d1, m.v_f)?;
            Ok(TableRow {
                preset: m.clone(),
                tau_pred,
                delta1_pred,
                tau_rel_diff: (tau_pred - m.tau_exp) / m.tau_exp,
                delta1_rel_diff: (delta1_pred - m.delta1_exp) / m.delta1_exp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport { rows })
}

/// Rounds to one significant figure, the precision of the published tables.
fn one_sig(x: f64) -> String {
    let e = x.abs().log10().floor() as i32;
    let m = (x / 10f64.powi(e)).round();
    let (m, e) = if m >= 10.0 { (m / 10.0, e + 1) } else { (m, e) };
    format!("{:.1}e{}", m / 10.0, e + 1)
}

impl TableReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("material,v_f,d1,tau_pred,tau_exp,tau_rel_diff,delta1_pred,delta1_exp,delta1_rel_diff\n");
        for r in &self.rows {
            let m = &r.preset;
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                m.name, m.v_f, m.d1, r.tau_pred, m.tau_exp, r.tau_rel_diff, r.delta1_pred, m.delta1_exp, r.delta1_rel_diff
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("Failure-wave predictions from v_f = sqrt(d1/tau), delta1 = d1/v_f\n");
        for r in &self.rows {
            let m = &r.preset;
            let _ = writeln!(s, "\n{}: v_f = {} m/s, d1 = {} m^2/s", m.name, m.v_f, m.d1);
            let _ = writeln!(
                s,
                "  tau     predicted {:.4e} s ({})  experimental {:.3e} s  difference {:+.1}%",
                r.tau_pred,
                one_sig(r.tau_pred),
                m.tau_exp,
                100.0 * r.tau_rel_diff
            );
            let _ = writeln!(
                s,
                "  delta1  predicted {:.4e} m ({})  experimental {:.3e} m  difference {:+.1}%",
                r.delta1_pred,
                one_sig(r.delta1_pred),
                m.delta1_exp,
                100.0 * r.delta1_rel_diff
            );
        }
        s
    }
}

/// One row of the vanishing-dissipation study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliftonRow {
    pub lambda: f64,
    pub dissipated: f64,
    pub entropy: f64,
    /// Largest `|budget imbalance|` relative to the peak energy.
    pub energy_drift: f64,
    /// Largest `|∂Γ/∂X|` at the end of the run.
    pub front_sharpness: f64,
}

/// Scenario for one `λ` of the study: `d₁`, `d₂` and `c₄ = −c₂/λ` are held,
/// so `K = λD → 0` and the damage kinetics do not change with `λ`.
pub fn clifton_config(base: &ScenarioConfig, lambda: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    let p = &base.material;
    let c4 = if p.lambda > 0.0 { p.c2 / p.lambda } else { 0.0 };
    cfg.material.lambda = lambda;
    cfg.material.c2 = c4 * lambda;
    cfg
}

fn clifton_row(base: &ScenarioConfig, lambda: f64) -> Result<CliftonRow> {
    let cfg = clifton_config(base, lambda);
    let out = if lambda == 0.0 {
        solver::run_clifton(&cfg)?
    } else {
        solver::run(&cfg)?
    };
    let last = out.reports.last().map(|r| r.energy).unwrap_or(out.initial_energy);
    let grad = crate::constitutive::face_gradients_x(
        &cfg.grid,
        &out.state.gamma,
        cfg.bc.gamma_left.into(),
        cfg.bc.gamma_right.into(),
    );
    Ok(CliftonRow {
        lambda,
        dissipated: last.dissipated,
        entropy: last.entropy,
        energy_drift: out.relative_imbalance(),
        front_sharpness: grad.iter().fold(0.0, |m, g| m.max(g.abs())),
    })
}

/// Runs the base scenario at each `λ` (`0` dispatches to the non-dissipative
/// integrator). Runs are independent and execute on separate threads where
/// threads are available; rows keep the input order.
pub fn clifton_limit_study(base: &ScenarioConfig, lambdas: &[f64]) -> Result<Vec<CliftonRow>> {
    #[cfg(not(target_arch = "wasm32"))]
    {
        std::thread::scope(|s| {
            let handles: Vec<_> = lambdas.iter().map(|&l| s.spawn(move || clifton_row(base, l))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("study worker panicked"))
                .collect()
        })
    }
    #[cfg(target_arch = "wasm32")]
    {
        lambdas.iter().map(|&l| clifton_row(base, l)).collect()
    }
}

/// Log-log slope of cumulative dissipation against `λ` over rows with
/// `λ > 0`; `None` with fewer than two such rows.
pub fn dissipation_slope(rows: &[CliftonRow]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.lambda > 0.0 && r.dissipated > 0.0)
        .map(|r| (r.lambda.ln(), r.dissipated.ln()))
        .unzip();
    (x.len() >= 2).then(|| linear_fit(&x, &y).0)
}

pub fn clifton_csv(rows: &[CliftonRow]) -> String {
    let mut s = String::from("lambda,dissipated,entropy,energy_drift,front_sharpness\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.lambda, r.dissipated, r.entropy, r.energy_drift, r.front_sharpness
        );
    }
    s
}
