use serde::{Deserialize, Serialize};

use crate::config::{initialize_state, ScenarioConfig};
use crate::constitutive;
use crate::error::{Error, Result};
use crate::params::Model;
use crate::state::FieldState;

use super::{damage, elastic};

/// Relative tolerance of the per-step admissibility monitor.
pub const ADMISSIBILITY_RTOL: f64 = 1e-12;

/// Energy budget at one time level (J, or J per unit transverse length in 1D).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyRecord {
    /// Leapfrog-consistent kinetic energy.
    pub kinetic: f64,
    /// Strain energy plus damage free energy.
    pub free_energy: f64,
    /// Cumulative `∫ ZΓ̇ dV dt`.
    pub dissipated: f64,
    /// Cumulative work done on the body through its ends and by body forces.
    pub boundary_work: f64,
    /// Cumulative damage energy released through the boundary, `∫H dt`.
    pub boundary_release: f64,
    /// Cumulative internal entropy production (J/K).
    pub entropy: f64,
    /// `ΔE + dissipated + release − work`; zero for an exact budget.
    pub imbalance: f64,
}

impl EnergyRecord {
    pub fn total(&self) -> f64 {
        self.kinetic + self.free_energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub time: f64,
    pub dt_used: f64,
    pub max_cfl: f64,
    pub max_diff: f64,
    pub min_z_gammadot: f64,
    pub peak_z_gammadot: f64,
    pub energy: EnergyRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeSample {
    pub t: f64,
    pub s: f64,
    pub gamma: f64,
    /// `Γ/Γ_ref`: a dimensionless, monotone stand-in for the lateral stress.
    pub sigma_lateral_proxy: f64,
}

/// Time history recorded in the cell containing a material point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeTrace {
    pub x: f64,
    pub y: f64,
    pub cell: usize,
    pub samples: Vec<GaugeSample>,
}

impl GaugeTrace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn proxy(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.sigma_lateral_proxy).collect()
    }
}

/// Full fields at one step, with cell stress and internal force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub active: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub state: FieldState,
    pub initial_energy: EnergyRecord,
    pub reports: Vec<StepReport>,
    pub gauges: Vec<GaugeTrace>,
    pub snapshots: Vec<Snapshot>,
}

impl RunOutput {
    /// Largest `|imbalance|` relative to the peak total energy.
    pub fn relative_imbalance(&self) -> f64 {
        let peak = self
            .reports
            .iter()
            .map(|r| r.energy.total().abs())
            .fold(self.initial_energy.total().abs(), f64::max);
        let worst = self.reports.iter().map(|r| r.energy.imbalance.abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            worst
        } else {
            worst / peak
        }
    }

    /// Worst admissibility ratio `min ZΓ̇ / peak |ZΓ̇|` over the run (0 if
    /// nothing evolved).
    pub fn admissibility_margin(&self) -> (f64, f64) {
        let min = self.reports.iter().map(|r| r.min_z_gammadot).fold(0.0, f64::min);
        let peak = self.reports.iter().map(|r| r.peak_z_gammadot).fold(0.0, f64::max);
        (min, peak)
    }
}

fn snapshot(cfg: &ScenarioConfig, st: &FieldState, step: usize) -> Snapshot {
    let g = &cfg.grid;
    let bc = &cfg.bc;
    let ux = elastic::cell_strain(g, &st.u, bc, st.time);
    let z = constitutive::internal_forces(g, &st.gamma, Some(&ux), bc.gamma_left, bc.gamma_right, &cfg.material).z;
    Snapshot {
        step,
        time: st.time,
        u: st.u.clone(),
        v: st.v.clone(),
        gamma: st.gamma.clone(),
        s: elastic::cell_stress(g, &st.u, bc, &cfg.material, st.time),
        z,
        active: st.active.clone(),
    }
}

fn free_energy(cfg: &ScenarioConfig, st: &FieldState) -> f64 {
    let (g, bc, p) = (&cfg.grid, &cfg.bc, &cfg.material);
    let ux = (p.model == Model::Linear).then(|| elastic::cell_strain(g, &st.u, bc, st.time));
    elastic::strain_energy(g, &st.u, bc, p, st.time)
        + constitutive::damage_energy(g, &st.gamma, ux.as_deref(), bc.gamma_left, bc.gamma_right, p)
}

fn record_gauges(cfg: &ScenarioConfig, st: &FieldState, gauges: &mut [GaugeTrace]) {
    if gauges.is_empty() {
        return;
    }
    let s = elastic::cell_stress(&cfg.grid, &st.u, &cfg.bc, &cfg.material, st.time);
    let gref = cfg.material.gamma_ref();
    for tr in gauges {
        let gamma = st.gamma[tr.cell];
        tr.samples.push(GaugeSample {
            t: st.time,
            s: s[tr.cell],
            gamma,
            sigma_lateral_proxy: gamma / gref,
        });
    }
}

/// Integrates the scenario and returns whatever was produced, plus the error
/// that stopped it early, if any. On failure `state` is the last accepted
/// state.
pub fn run_partial(cfg: &ScenarioConfig) -> (RunOutput, Option<Error>) {
    integrate(cfg, true)
}

/// Alternates an elastic and a damage step (Lie splitting), updating the
/// activation mask in between, and keeps the energy budget and the
/// admissibility monitor.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    match run_partial(cfg) {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

/// Non-dissipative limit: `λ = 0`, `c₂ = 0`, `b = 0`, so `K = 0` and Γ is
/// frozen. Only the momentum balance is integrated.
pub fn run_clifton(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let p = &cfg.material;
    if p.lambda != 0.0 || p.c2 != 0.0 || p.b != 0.0 {
        return Err(Error::ConfigConflict(
            "clifton mode needs lambda = 0, c2 = 0 and b = 0".into(),
        ));
    }
    match integrate(cfg, false) {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

fn empty_output(state: FieldState) -> RunOutput {
    RunOutput {
        state,
        initial_energy: EnergyRecord::default(),
        reports: Vec::new(),
        gauges: Vec::new(),
        snapshots: Vec::new(),
    }
}

fn integrate(cfg: &ScenarioConfig, evolve_damage: bool) -> (RunOutput, Option<Error>) {
    let mut st = match initialize_state(cfg) {
        Ok(s) => s,
        Err(e) => return (empty_output(FieldState::zeros(cfg.grid.len())), Some(e)),
    };
    let body = match cfg.body_force.sample(&cfg.grid, "body_force") {
        Ok(b) => b,
        Err(e) => return (empty_output(st), Some(e)),
    };
    let (g, bc, p, dt) = (&cfg.grid, &cfg.bc, &cfg.material, cfg.dt);
    let dv = g.cell_volume();

    let mut accel = elastic::acceleration(g, &st.u, bc, p, &body, 0.0);
    let e0 = EnergyRecord {
        kinetic: elastic::staggered_kinetic_energy(g, &st.v, &accel, p, dt),
        free_energy: free_energy(cfg, &st),
        ..Default::default()
    };
    let mut out = empty_output(st.clone());
    out.initial_energy = e0;
    out.gauges = cfg
        .gauges
        .iter()
        .map(|gg| GaugeTrace {
            x: gg.x,
            y: gg.y,
            cell: g.locate(gg.x, gg.y).expect("validated gauge"),
            samples: Vec::new(),
        })
        .collect();
    record_gauges(cfg, &st, &mut out.gauges);
    let every = cfg.output.snapshot_every;
    if every > 0 {
        out.snapshots.push(snapshot(cfg, &st, 0));
    }

    let mut acc = e0;
    let steps = cfg.steps();
    for n in 0..steps {
        let t = n as f64 * dt;
        let es = match elastic::step_elastic(g, &mut st.u, &mut st.v, &accel, bc, p, &body, t, dt) {
            Ok(s) => s,
            Err(e) => {
                out.state = st;
                return (out, Some(e));
            }
        };
        let t1 = (n + 1) as f64 * dt;
        accel = es.accel;
        acc.boundary_work += es.boundary_work + es.body_work;

        let mut ds = None;
        if evolve_damage {
            let s_cells = elastic::cell_stress(g, &st.u, bc, p, t1);
            for (a, s) in st.active.iter_mut().zip(&s_cells) {
                *a |= s.abs() >= p.sigma0;
            }
            let ux = elastic::cell_strain(g, &st.u, bc, t1);
            let gamma_before = st.gamma.clone();
            match damage::step_damage(
                g,
                &mut st.gamma,
                &st.active,
                &ux,
                bc.gamma_left,
                bc.gamma_right,
                p,
                cfg.damage_scheme,
                dt,
            ) {
                Ok(d) => ds = Some(d),
                Err(e) => {
                    st.time = t1;
                    st.gamma = gamma_before;
                    out.state = st;
                    return (out, Some(with_time(e, t1)));
                }
            }
        }
        st.time = t1;
        if !(st.is_finite()) {
            out.state = st;
            return (out, Some(Error::NonFinite { time: t1 }));
        }

        let (mut min_zg, mut peak_zg, mut dnum) = (0.0, 0.0, 0.0);
        if let Some(d) = &ds {
            let lam_gd2: f64 = d
                .gamma_dot
                .iter()
                .zip(&st.active)
                .filter(|(_, a)| **a)
                .map(|(gd, _)| p.lambda * gd * gd)
                .sum();
            acc.dissipated += dt * lam_gd2 * dv;
            acc.entropy += dt * lam_gd2 / p.theta0 * dv;
            let (bx, _) = constitutive::damage_fluxes(g, &st.gamma, bc.gamma_left, bc.gamma_right, p);
            acc.boundary_release +=
                dt * constitutive::boundary_energy_release(g, &bx, &d.gamma_dot, bc.gamma_left, bc.gamma_right);
            min_zg = d.min_z_gammadot;
            peak_zg = d.peak_z_gammadot;
            dnum = d.diffusion_number;
        }
        acc.kinetic = elastic::staggered_kinetic_energy(g, &st.v, &accel, p, dt);
        acc.free_energy = free_energy(cfg, &st);
        acc.imbalance = acc.total() - e0.total() + acc.dissipated + acc.boundary_release - acc.boundary_work;

        out.reports.push(StepReport {
            time: t1,
            dt_used: dt,
            max_cfl: es.courant,
            max_diff: dnum,
            min_z_gammadot: min_zg,
            peak_z_gammadot: peak_zg,
            energy: acc,
        });
        record_gauges(cfg, &st, &mut out.gauges);
        if every > 0 && (n + 1) % every == 0 {
            out.snapshots.push(snapshot(cfg, &st, n + 1));
        }
        let tol = ADMISSIBILITY_RTOL * peak_zg;
        if min_zg < -tol {
            out.state = st;
            return (
                out,
                Some(Error::AdmissibilityViolation {
                    time: t1,
                    min_z_gammadot: min_zg,
                    tol,
                }),
            );
        }
    }
    out.state = st;
    (out, None)
}

fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::NonFinite { .. } => Error::NonFinite { time: t },
        other => other,
    }
}
