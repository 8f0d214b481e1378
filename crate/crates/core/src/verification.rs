//! Refinement suites shared by the `convergence` and `verify-variational`
//! commands and by the test suite.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{linear_fit, observed_orders, wave_metrics, WaveMetrics};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scenarios;
use crate::solver::{self, RunOutput};
use crate::variational::{
    generalized_residual, lagrange_residual, reduce_to_generalized, Basis, DiscreteTrajectory, ResidualReport,
};

/// Errors at successively halved mesh sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub suite: String,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log₂(e_k / e_{k+1})`; one shorter than `errors`.
    pub orders: Vec<f64>,
}

impl Refinement {
    fn new(suite: &str, h: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = observed_orders(&errors, 2.0);
        Self {
            suite: suite.into(),
            h,
            errors,
            orders,
        }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("suite,h,error,order\n");
        for (k, (h, e)) in self.h.iter().zip(&self.errors).enumerate() {
            let o = if k == 0 { String::new() } else { format!("{:.16e}", self.orders[k - 1]) };
            let _ = writeln!(s, "{},{h:.16e},{e:.16e},{o}", self.suite);
        }
        s
    }
}

fn l2(grid: &Grid, e: impl Iterator<Item = f64>) -> f64 {
    (e.map(|x| x * x).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// Standing-wave displacement error after one period.
pub fn elastic_convergence(levels: &[usize]) -> Result<Refinement> {
    let mut h = Vec::new();
    let mut errors = Vec::new();
    for &nx in levels {
        let cfg = scenarios::standing_wave(nx);
        let out = solver::run(&cfg)?;
        let g = &cfg.grid;
        let t = out.state.time;
        let exact = |i: usize| (std::f64::consts::PI * g.x(i)).sin() * (std::f64::consts::PI * t).cos();
        errors.push(l2(g, (0..g.nx()).map(|i| out.state.u[i] - exact(i))));
        h.push(g.dx());
    }
    Ok(Refinement::new("elastic", h, errors))
}

/// Heat-kernel damage error at the final time.
pub fn diffusion_convergence(levels: &[usize]) -> Result<Refinement> {
    let mut h = Vec::new();
    let mut errors = Vec::new();
    for &nx in levels {
        let mut cfg = scenarios::heat_kernel(nx);
        cfg.output.snapshot_every = 0;
        let out = solver::run(&cfg)?;
        let g = &cfg.grid;
        let t = out.state.time;
        errors.push(l2(
            g,
            (0..g.nx()).map(|i| out.state.gamma[i] - scenarios::heat_kernel_exact(g.x(i), t)),
        ));
        h.push(g.dx());
    }
    Ok(Refinement::new("diffusion", h, errors))
}

/// Least-squares slope of the spatial variance of `Γ` against time over the
/// snapshots of a 1D run (`2d₁` for pure diffusion).
pub fn variance_growth_slope(cfg: &ScenarioConfig, out: &RunOutput) -> Result<f64> {
    let g = &cfg.grid;
    if out.snapshots.len() < 2 {
        return Err(Error::TooFewLevels(out.snapshots.len(), 2));
    }
    let (t, var): (Vec<f64>, Vec<f64>) = out
        .snapshots
        .iter()
        .map(|s| {
            let m0: f64 = s.gamma[..g.nx()].iter().sum();
            let m1: f64 = (0..g.nx()).map(|i| g.x(i) * s.gamma[i]).sum::<f64>() / m0;
            let m2: f64 = (0..g.nx()).map(|i| (g.x(i) - m1).powi(2) * s.gamma[i]).sum::<f64>() / m0;
            (s.time, m2)
        })
        .unzip();
    Ok(linear_fit(&t, &var).0)
}

/// Residual norms at one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalLevel {
    pub nx: usize,
    pub dt: f64,
    pub report: ResidualReport,
    /// Largest difference between nodal generalized and field residual norms.
    pub nodal_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalStudy {
    pub levels: Vec<VariationalLevel>,
}

impl VariationalStudy {
    /// `max‖r‖` ratios between consecutive levels, for `U` and for `Γ`.
    pub fn ratios(&self) -> Vec<(f64, f64)> {
        self.levels
            .windows(2)
            .map(|w| {
                (
                    w[0].report.max_norm_u() / w[1].report.max_norm_u(),
                    w[0].report.max_norm_gamma() / w[1].report.max_norm_gamma(),
                )
            })
            .collect()
    }

    pub fn max_nodal_mismatch(&self) -> f64 {
        self.levels.iter().map(|l| l.nodal_mismatch).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,nx,dt,max_residU_L2,max_residGamma_L2,ratio_U,ratio_Gamma,nodal_mismatch\n");
        let ratios = self.ratios();
        for (k, l) in self.levels.iter().enumerate() {
            let (ru, rg) = match k {
                0 => (String::new(), String::new()),
                _ => (format!("{:.16e}", ratios[k - 1].0), format!("{:.16e}", ratios[k - 1].1)),
            };
            let _ = writeln!(
                s,
                "{k},{},{:.16e},{:.16e},{:.16e},{ru},{rg},{:.16e}",
                l.nx,
                l.dt,
                l.report.max_norm_u(),
                l.report.max_norm_gamma(),
                l.nodal_mismatch
            );
        }
        s
    }
}

/// Runs `cfg` refined by `1, 2, 4, …` in space and time (snapshots every
/// step) and evaluates the Lagrange residuals of each trajectory.
pub fn variational_refinement(cfg: &ScenarioConfig, levels: usize) -> Result<VariationalStudy> {
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut c = cfg.refined(1 << l)?;
        c.output.snapshot_every = 1;
        let run = solver::run(&c)?;
        let traj = DiscreteTrajectory::from_run(&c, &run)?;
        let report = lagrange_residual(&traj)?;
        let nodal = generalized_residual(&reduce_to_generalized(&traj, &Basis::nodal(&c.grid))?);
        let nodal_mismatch = nodal
            .norm_u
            .iter()
            .zip(&report.norm_u)
            .chain(nodal.norm_gamma.iter().zip(&report.norm_gamma))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(VariationalLevel {
            nx: c.grid.nx(),
            dt: c.dt,
            report,
            nodal_mismatch,
        });
    }
    Ok(VariationalStudy { levels: out })
}

/// Runs the logistic front scenario and measures it.
pub fn kpp_check() -> Result<(ScenarioConfig, WaveMetrics)> {
    let cfg = scenarios::kpp_front();
    let out = solver::run(&cfg)?;
    let m = wave_metrics(&cfg, &out)?;
    Ok((cfg, m))
}
