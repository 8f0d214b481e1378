//! Discrete action with dissipation and the Lagrange-equation residuals of
//! solver trajectories.
//!
//! The Lagrangian follows the convention `ℒ = ψ − 𝒦`. For a trajectory of
//! cell fields the residuals are
//!
//! ```text
//! r_U = ρ₀Ü − ∂S/∂X − ρ₀r        r_Γ = λΓ̇ − Z   (active cells)
//! ```
//!
//! with the same face operators the solver uses in space and five-point
//! fourth-order differences in time. A leapfrog / Crank–Nicolson trajectory
//! satisfies its own second-order stencils exactly, so measuring it with a
//! higher-order stencil exposes its `O(dt²)` truncation error, which is what
//! the refinement test looks at.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::config::{ElasticBc, ScenarioConfig};
use crate::constitutive::{self, xface, yface};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{elastic, RunOutput};
use crate::state::FieldState;

/// Time-difference stencil used for `Ü` and `Γ̇`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeStencil {
    /// Three-point, second order. Exact for the solver's own updates.
    Central2,
    /// Five-point, fourth order.
    Central4,
}

impl TimeStencil {
    fn half_width(self) -> usize {
        match self {
            TimeStencil::Central2 => 1,
            TimeStencil::Central4 => 2,
        }
    }

    fn first(self) -> &'static [f64] {
        match self {
            TimeStencil::Central2 => &[-0.5, 0.0, 0.5],
            TimeStencil::Central4 => &[1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
        }
    }

    fn second(self) -> &'static [f64] {
        match self {
            TimeStencil::Central2 => &[1.0, -2.0, 1.0],
            TimeStencil::Central4 => &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        }
    }
}

/// Uniformly spaced sequence of states of one scenario.
#[derive(Debug, Clone)]
pub struct DiscreteTrajectory {
    pub cfg: ScenarioConfig,
    pub dt: f64,
    pub states: Vec<FieldState>,
}

impl DiscreteTrajectory {
    pub fn new(cfg: &ScenarioConfig, states: Vec<FieldState>) -> Result<Self> {
        if states.len() < 3 {
            return Err(Error::TooFewLevels(states.len(), 3));
        }
        let n = cfg.grid.len();
        for s in &states {
            for (what, f) in [("u", &s.u), ("v", &s.v), ("gamma", &s.gamma)] {
                if f.len() != n {
                    return Err(Error::ShapeMismatch {
                        what: format!("trajectory.{what}"),
                        expected: n,
                        got: f.len(),
                    });
                }
            }
        }
        let dt = states[1].time - states[0].time;
        let uniform = states
            .windows(2)
            .all(|w| ((w[1].time - w[0].time) - dt).abs() <= 1e-9 * dt.abs().max(f64::MIN_POSITIVE));
        if !(dt > 0.0) || !uniform {
            return Err(Error::InvalidValue(
                "trajectory.times".into(),
                "must be strictly increasing with uniform spacing".into(),
            ));
        }
        Ok(Self {
            cfg: cfg.clone(),
            dt,
            states,
        })
    }

    /// Trajectory from a run whose snapshots were taken every step.
    pub fn from_run(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Self> {
        let states = out
            .snapshots
            .iter()
            .map(|s| FieldState {
                time: s.time,
                u: s.u.clone(),
                v: s.v.clone(),
                gamma: s.gamma.clone(),
                active: s.active.clone(),
            })
            .collect();
        Self::new(cfg, states)
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    /// Levels at which a stencil fits entirely inside the trajectory.
    pub fn interior_levels(&self, stencil: TimeStencil) -> std::ops::Range<usize> {
        let h = stencil.half_width();
        let n = self.states.len();
        if n < 2 * h + 1 {
            0..0
        } else {
            h..n - h
        }
    }

    fn combine(&self, n: usize, w: &[f64], field: impl Fn(&FieldState) -> &[f64], scale: f64) -> Vec<f64> {
        let h = w.len() / 2;
        let mut out = vec![0.0; self.cfg.grid.len()];
        for (k, c) in w.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let f = field(&self.states[n + k - h]);
            for (o, x) in out.iter_mut().zip(f) {
                *o += c * x;
            }
        }
        out.iter_mut().for_each(|o| *o *= scale);
        out
    }

    pub fn u_ddot(&self, n: usize, stencil: TimeStencil) -> Vec<f64> {
        self.combine(n, stencil.second(), |s| &s.u, 1.0 / (self.dt * self.dt))
    }

    pub fn gamma_dot(&self, n: usize, stencil: TimeStencil) -> Vec<f64> {
        self.combine(n, stencil.first(), |s| &s.gamma, 1.0 / self.dt)
    }
}

/// Totals of free energy, kinetic energy and dissipation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub psi: f64,
    pub kinetic: f64,
    pub dissipation: f64,
}

/// `ψ = Σ ρ₀Ψ dV` (strain plus damage energy, with the discrete face
/// quadrature), `𝒦 = Σ ρ₀v²/2 dV`, `𝒟 = Σ λΓ̇²/2 dV`.
pub fn total_functionals(cfg: &ScenarioConfig, state: &FieldState, gamma_dot: &[f64]) -> Functionals {
    let (g, bc, p) = (&cfg.grid, &cfg.bc, &cfg.material);
    let ux = elastic::cell_strain(g, &state.u, bc, state.time);
    let psi = elastic::strain_energy(g, &state.u, bc, p, state.time)
        + constitutive::damage_energy(g, &state.gamma, Some(&ux), bc.gamma_left, bc.gamma_right, p);
    let dv = g.cell_volume();
    Functionals {
        psi,
        kinetic: elastic::kinetic_energy(g, &state.v, p),
        dissipation: gamma_dot.iter().map(|gd| constitutive::dissipation(*gd, p)).sum::<f64>() * dv,
    }
}

/// Field residuals at the interior levels of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    pub resid_u: Vec<Vec<f64>>,
    pub resid_gamma: Vec<Vec<f64>>,
    /// `(Σ r_U² dV)^½` per level.
    pub norm_u: Vec<f64>,
    /// `(Σ r_Γ² dV)^½` per level.
    pub norm_gamma: Vec<f64>,
}

impl ResidualReport {
    pub fn max_norm_u(&self) -> f64 {
        self.norm_u.iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn max_norm_gamma(&self) -> f64 {
        self.norm_gamma.iter().fold(0.0, |a, b| a.max(*b))
    }
}

fn l2(grid: &Grid, f: &[f64]) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// `r_U`, `r_Γ` at every level where the five-point stencil fits.
pub fn lagrange_residual(traj: &DiscreteTrajectory) -> Result<ResidualReport> {
    lagrange_residual_with(traj, TimeStencil::Central4)
}

pub fn lagrange_residual_with(traj: &DiscreteTrajectory, stencil: TimeStencil) -> Result<ResidualReport> {
    let need = 2 * stencil.half_width() + 1;
    if traj.states.len() < need {
        return Err(Error::TooFewLevels(traj.states.len(), need));
    }
    let cfg = &traj.cfg;
    let (g, bc, p) = (&cfg.grid, &cfg.bc, &cfg.material);
    let body = cfg.body_force.sample(g, "body_force")?;
    let mut rep = ResidualReport {
        times: Vec::new(),
        resid_u: Vec::new(),
        resid_gamma: Vec::new(),
        norm_u: Vec::new(),
        norm_gamma: Vec::new(),
    };
    for n in traj.interior_levels(stencil) {
        let st = &traj.states[n];
        let udd = traj.u_ddot(n, stencil);
        let a = elastic::acceleration(g, &st.u, bc, p, &body, st.time);
        let ru: Vec<f64> = udd.iter().zip(&a).map(|(x, y)| p.rho0 * (x - y)).collect();
        let gd = traj.gamma_dot(n, stencil);
        let ux = elastic::cell_strain(g, &st.u, bc, st.time);
        let z = constitutive::internal_forces(g, &st.gamma, Some(&ux), bc.gamma_left, bc.gamma_right, p).z;
        let rg: Vec<f64> = (0..g.len())
            .map(|k| if st.active[k] { p.lambda * gd[k] - z[k] } else { 0.0 })
            .collect();
        rep.times.push(st.time);
        rep.norm_u.push(l2(g, &ru));
        rep.norm_gamma.push(l2(g, &rg));
        rep.resid_u.push(ru);
        rep.resid_gamma.push(rg);
    }
    Ok(rep)
}

/// Biot's variation of the dissipation, `Σ λΓ̇ δΓ dV`.
pub fn dissipation_variation_at(cfg: &ScenarioConfig, gamma_dot: &[f64], delta_gamma: &[f64]) -> Result<f64> {
    let n = cfg.grid.len();
    for (what, f) in [("gamma_dot", gamma_dot), ("delta_gamma", delta_gamma)] {
        if f.len() != n {
            return Err(Error::ShapeMismatch {
                what: what.into(),
                expected: n,
                got: f.len(),
            });
        }
    }
    Ok(gamma_dot
        .iter()
        .zip(delta_gamma)
        .map(|(gd, d)| constitutive::dissipation_force(*gd, &cfg.material) * d)
        .sum::<f64>()
        * cfg.grid.cell_volume())
}

/// [`dissipation_variation_at`] at each interior level of the trajectory.
pub fn dissipation_variation(traj: &DiscreteTrajectory, delta_gamma: &[f64]) -> Result<Vec<f64>> {
    let s = TimeStencil::Central4;
    traj.interior_levels(s)
        .map(|n| dissipation_variation_at(&traj.cfg, &traj.gamma_dot(n, s), delta_gamma))
        .collect()
}

/// Modes spanning the displacement and damage fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub u_modes: Vec<Vec<f64>>,
    pub gamma_modes: Vec<Vec<f64>>,
}

impl Basis {
    /// One indicator mode per cell, for both fields.
    pub fn nodal(grid: &Grid) -> Self {
        let n = grid.len();
        let modes: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut m = vec![0.0; n];
                m[k] = 1.0;
                m
            })
            .collect();
        Self {
            u_modes: modes.clone(),
            gamma_modes: modes,
        }
    }

    /// `sin(mπ(X − X₀)/L)`, `m = 1..=k`, for both fields. These are exact
    /// eigenvectors of the fixed-end difference operator.
    pub fn sine(grid: &Grid, k: usize) -> Self {
        let modes: Vec<Vec<f64>> = (1..=k)
            .map(|m| {
                let mut f = Vec::with_capacity(grid.len());
                for _ in 0..grid.ny() {
                    for i in 0..grid.nx() {
                        let s = (grid.x(i) - grid.origin_x()) / grid.length_x();
                        f.push((m as f64 * std::f64::consts::PI * s).sin());
                    }
                }
                f
            })
            .collect();
        Self {
            u_modes: modes.clone(),
            gamma_modes: modes,
        }
    }
}

/// Lagrange's equations with dissipation in generalized coordinates.
///
/// Per interior level and mode `m` the residual is
/// `d/dt ∂𝒦/∂q̇ₘ − ∂𝒦/∂qₘ + ∂𝒟/∂q̇ₘ + ∂ψ/∂qₘ − Qₘ`, where `ψ` collects the
/// energy stored on interior faces and in cells, and `Q` holds the boundary
/// tractions `S·n`, the boundary damage flux `−B·n` and the body force.
#[derive(Debug, Clone)]
pub struct GeneralizedSystem {
    pub k_u: usize,
    pub k_gamma: usize,
    pub basis: Basis,
    pub times: Vec<f64>,
    /// Coordinates at every trajectory level.
    pub q_u: Vec<Vec<f64>>,
    pub q_gamma: Vec<Vec<f64>>,
    /// Generalized forces at the interior levels.
    pub force_u: Vec<Vec<f64>>,
    pub force_gamma: Vec<Vec<f64>>,
    /// `d/dt ∂𝒦/∂q̇` at the interior levels.
    pub inertia: Vec<Vec<f64>>,
    /// `∂𝒟/∂q̇` at the interior levels.
    pub dissipation_grad: Vec<Vec<f64>>,
    /// `∂ψ/∂q` at the interior levels.
    pub psi_grad_u: Vec<Vec<f64>>,
    pub psi_grad_gamma: Vec<Vec<f64>>,
    gram_inv_u: DMatrix<f64>,
    gram_inv_gamma: DMatrix<f64>,
}

fn gram(modes: &[Vec<f64>], dv: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = modes.len();
    let g = DMatrix::from_fn(k, k, |a, b| modes[a].iter().zip(&modes[b]).map(|(x, y)| x * y).sum::<f64>() * dv);
    if k == 0 {
        return Ok((g.clone(), g));
    }
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let (mn, mx) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), e| (a.min(*e), b.max(e.abs())));
    let cond = if mn > 0.0 { mx / mn } else { f64::INFINITY };
    if !(cond <= 1e12) {
        return Err(Error::SingularBasis(cond));
    }
    let inv = g.clone().cholesky().ok_or(Error::SingularBasis(cond))?.inverse();
    Ok((g, inv))
}

fn project(modes: &[Vec<f64>], gram_inv: &DMatrix<f64>, field: &[f64], dv: f64) -> Vec<f64> {
    let rhs = DVector::from_iterator(modes.len(), modes.iter().map(|m| m.iter().zip(field).map(|(a, b)| a * b).sum::<f64>() * dv));
    (gram_inv * rhs).iter().copied().collect()
}

fn reconstruct(modes: &[Vec<f64>], q: &[f64], n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n];
    for (m, c) in modes.iter().zip(q) {
        for (x, y) in f.iter_mut().zip(m) {
            *x += c * y;
        }
    }
    f
}

fn pair(modes: &[Vec<f64>], nodal: &[f64]) -> Vec<f64> {
    modes.iter().map(|m| m.iter().zip(nodal).map(|(a, b)| a * b).sum()).collect()
}

/// Nodal gradients of the interior-face and cell energy, assembled face by
/// face. Returns `(∂ψ/∂U, ∂ψ/∂Γ)`.
fn interior_energy_gradient(cfg: &ScenarioConfig, u: &[f64], gamma: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (g, p) = (&cfg.grid, &cfg.material);
    let (nx, ny, dx, dy) = (g.nx(), g.ny(), g.dx(), g.dy());
    let dv = g.cell_volume();
    let periodic_u = matches!(cfg.bc.left, ElasticBc::Periodic);
    let periodic_g = matches!(cfg.bc.gamma_left, crate::config::DamageBc::Periodic);
    let mut du = vec![0.0; g.len()];
    let mut dg = vec![0.0; g.len()];
    let ux = elastic::cell_strain(g, u, &cfg.bc, 0.0);
    for j in 0..ny {
        let faces = if periodic_u { 0..nx } else { 1..nx };
        for i in faces {
            let (l, r) = (j * nx + (i + nx - 1) % nx, j * nx + i);
            let s = constitutive::elastic_stress((u[r] - u[l]) / dx, p);
            du[r] += s * dy;
            du[l] -= s * dy;
        }
        let faces = if periodic_g { 0..nx } else { 1..nx };
        for i in faces {
            let (l, r) = (j * nx + (i + nx - 1) % nx, j * nx + i);
            let flux = p.k1() * (gamma[r] - gamma[l]) / dx;
            dg[r] += flux * dy;
            dg[l] -= flux * dy;
        }
    }
    if g.is_2d() {
        for j in 1..ny {
            for i in 0..nx {
                let (b, t) = ((j - 1) * nx + i, j * nx + i);
                let flux = p.k2() * (gamma[t] - gamma[b]) / dy;
                dg[t] += flux * dx;
                dg[b] -= flux * dx;
            }
        }
    }
    for k in 0..g.len() {
        dg[k] -= (constitutive::affinity(ux[k], gamma[k], p) + constitutive::reaction_force(gamma[k], p)) * dv;
    }
    (du, dg)
}

/// Nodal generalized forces: boundary tractions and damage fluxes on the `X`
/// ends plus the body force.
fn boundary_forces(cfg: &ScenarioConfig, u: &[f64], gamma: &[f64], t: f64, body: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (g, bc, p) = (&cfg.grid, &cfg.bc, &cfg.material);
    let (nx, ny, dy) = (g.nx(), g.ny(), g.dy());
    let dv = g.cell_volume();
    let mut fu: Vec<f64> = body.iter().map(|r| p.rho0 * r * dv).collect();
    let mut fg = vec![0.0; g.len()];
    let s = elastic::face_stresses(g, u, bc, p, t);
    let (b, _) = constitutive::damage_fluxes(g, gamma, bc.gamma_left, bc.gamma_right, p);
    for j in 0..ny {
        if !matches!(bc.left, ElasticBc::Periodic) {
            fu[j * nx] -= s[xface(g, 0, j)] * dy;
            fu[j * nx + nx - 1] += s[xface(g, nx, j)] * dy;
        }
        if !matches!(bc.gamma_left, crate::config::DamageBc::Periodic) {
            fg[j * nx] += b[xface(g, 0, j)] * dy;
            fg[j * nx + nx - 1] -= b[xface(g, nx, j)] * dy;
        }
    }
    let _ = yface;
    (fu, fg)
}

/// Galerkin projection of the trajectory onto `basis` and assembly of every
/// term of the generalized equations.
pub fn reduce_to_generalized(traj: &DiscreteTrajectory, basis: &Basis) -> Result<GeneralizedSystem> {
    let stencil = TimeStencil::Central4;
    let need = 2 * stencil.half_width() + 1;
    if traj.states.len() < need {
        return Err(Error::TooFewLevels(traj.states.len(), need));
    }
    let cfg = &traj.cfg;
    let g = &cfg.grid;
    let n = g.len();
    for m in basis.u_modes.iter().chain(&basis.gamma_modes) {
        if m.len() != n {
            return Err(Error::ShapeMismatch {
                what: "basis mode".into(),
                expected: n,
                got: m.len(),
            });
        }
    }
    let dv = g.cell_volume();
    let p = &cfg.material;
    let (_, gi_u) = gram(&basis.u_modes, dv)?;
    let (_, gi_g) = gram(&basis.gamma_modes, dv)?;
    let q_u: Vec<Vec<f64>> = traj.states.iter().map(|s| project(&basis.u_modes, &gi_u, &s.u, dv)).collect();
    let q_gamma: Vec<Vec<f64>> = traj.states.iter().map(|s| project(&basis.gamma_modes, &gi_g, &s.gamma, dv)).collect();
    let body = cfg.body_force.sample(g, "body_force")?;

    let mut sys = GeneralizedSystem {
        k_u: basis.u_modes.len(),
        k_gamma: basis.gamma_modes.len(),
        basis: basis.clone(),
        times: Vec::new(),
        q_u,
        q_gamma,
        force_u: Vec::new(),
        force_gamma: Vec::new(),
        inertia: Vec::new(),
        dissipation_grad: Vec::new(),
        psi_grad_u: Vec::new(),
        psi_grad_gamma: Vec::new(),
        gram_inv_u: gi_u,
        gram_inv_gamma: gi_g,
    };
    let h = stencil.half_width();
    for lvl in traj.interior_levels(stencil) {
        let st = &traj.states[lvl];
        let u = reconstruct(&basis.u_modes, &sys.q_u[lvl], n);
        let gamma = reconstruct(&basis.gamma_modes, &sys.q_gamma[lvl], n);
        let mut qdd = vec![0.0; sys.k_u];
        for (k, c) in stencil.second().iter().enumerate() {
            for (a, q) in qdd.iter_mut().zip(&sys.q_u[lvl + k - h]) {
                *a += c * q / (traj.dt * traj.dt);
            }
        }
        let mut qd = vec![0.0; sys.k_gamma];
        for (k, c) in stencil.first().iter().enumerate() {
            for (a, q) in qd.iter_mut().zip(&sys.q_gamma[lvl + k - h]) {
                *a += c * q / traj.dt;
            }
        }
        let mask = |f: Vec<f64>| -> Vec<f64> { f.into_iter().zip(&st.active).map(|(x, a)| if *a { x } else { 0.0 }).collect() };
        let udd = reconstruct(&basis.u_modes, &qdd, n);
        let inertia: Vec<f64> = udd.iter().map(|a| p.rho0 * a * dv).collect();
        let gd = reconstruct(&basis.gamma_modes, &qd, n);
        let diss = mask(gd.iter().map(|x| constitutive::dissipation_force(*x, p) * dv).collect());
        let (du, dg) = interior_energy_gradient(cfg, &u, &gamma);
        let (fu, fg) = boundary_forces(cfg, &u, &gamma, st.time, &body);
        sys.times.push(st.time);
        sys.inertia.push(pair(&basis.u_modes, &inertia));
        sys.psi_grad_u.push(pair(&basis.u_modes, &du));
        sys.force_u.push(pair(&basis.u_modes, &fu));
        sys.dissipation_grad.push(pair(&basis.gamma_modes, &diss));
        sys.psi_grad_gamma.push(pair(&basis.gamma_modes, &mask(dg)));
        sys.force_gamma.push(pair(&basis.gamma_modes, &mask(fg)));
    }
    Ok(sys)
}

/// Generalized residual norms per interior level.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedResidual {
    pub times: Vec<f64>,
    pub r_u: Vec<Vec<f64>>,
    pub r_gamma: Vec<Vec<f64>>,
    /// Dual norm `(Rᵀ G⁻¹ R)^½`; equals the field L2 norm for a nodal basis.
    pub norm_u: Vec<f64>,
    pub norm_gamma: Vec<f64>,
}

impl GeneralizedResidual {
    pub fn max_norm_u(&self) -> f64 {
        self.norm_u.iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn max_norm_gamma(&self) -> f64 {
        self.norm_gamma.iter().fold(0.0, |a, b| a.max(*b))
    }
}

fn dual_norm(r: &[f64], gram_inv: &DMatrix<f64>) -> f64 {
    let v = DVector::from_column_slice(r);
    (v.dot(&(gram_inv * &v))).max(0.0).sqrt()
}

impl GeneralizedSystem {
    /// Residuals with or without the generalized forces `Q`.
    pub fn residual(&self, with_forces: bool) -> GeneralizedResidual {
        let w = if with_forces { 1.0 } else { 0.0 };
        let mut out = GeneralizedResidual {
            times: self.times.clone(),
            r_u: Vec::new(),
            r_gamma: Vec::new(),
            norm_u: Vec::new(),
            norm_gamma: Vec::new(),
        };
        for l in 0..self.times.len() {
            let ru: Vec<f64> = (0..self.k_u)
                .map(|m| self.inertia[l][m] + self.psi_grad_u[l][m] - w * self.force_u[l][m])
                .collect();
            let rg: Vec<f64> = (0..self.k_gamma)
                .map(|m| self.dissipation_grad[l][m] + self.psi_grad_gamma[l][m] - w * self.force_gamma[l][m])
                .collect();
            out.norm_u.push(dual_norm(&ru, &self.gram_inv_u));
            out.norm_gamma.push(dual_norm(&rg, &self.gram_inv_gamma));
            out.r_u.push(ru);
            out.r_gamma.push(rg);
        }
        out
    }
}

pub fn generalized_residual(sys: &GeneralizedSystem) -> GeneralizedResidual {
    sys.residual(true)
}

/// First variation of the discrete action along a perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionVariation {
    /// `d/dε Σ dt[ψ − 𝒦](q + εδq) + Σ dt Σ λΓ̇ δΓ dV`.
    pub variation: f64,
    /// `Σ dt Σ (r_U δU + r_Γ δΓ) dV`.
    pub residual_pairing: f64,
}

/// Compares the variation of `∫(ℒ + 𝒟)dt` (dissipation varied by Biot's rule)
/// with the residuals paired against the perturbation. Kinetic energy lives on
/// the half levels, so the discrete Euler–Lagrange equations of this action use
/// the three-point stencils; both sides are evaluated with them. The
/// perturbation is given at every level, must vanish at the first and last
/// level, and should be supported on active cells.
pub fn action_variation(
    traj: &DiscreteTrajectory,
    delta_u: &[Vec<f64>],
    delta_gamma: &[Vec<f64>],
) -> Result<ActionVariation> {
    let nl = traj.states.len();
    let stencil = TimeStencil::Central2;
    if delta_u.len() != nl || delta_gamma.len() != nl {
        return Err(Error::ShapeMismatch {
            what: "perturbation levels".into(),
            expected: nl,
            got: delta_u.len().min(delta_gamma.len()),
        });
    }
    let cfg = &traj.cfg;
    let (g, p) = (&cfg.grid, &cfg.material);
    let dv = g.cell_volume();
    let dt = traj.dt;
    let body = cfg.body_force.sample(g, "body_force")?;

    // ψ at integer levels, 𝒦 on the half levels between them, body-force
    // potential −ρ₀rU.
    let action = |eps: f64| -> f64 {
        let shifted: Vec<FieldState> = traj
            .states
            .iter()
            .enumerate()
            .map(|(n, s)| {
                let mut s = s.clone();
                s.u.iter_mut().zip(&delta_u[n]).for_each(|(a, d)| *a += eps * d);
                s.gamma.iter_mut().zip(&delta_gamma[n]).for_each(|(a, d)| *a += eps * d);
                s
            })
            .collect();
        let mut a = 0.0;
        for s in &shifted {
            let f = total_functionals(cfg, s, &[]);
            let pot: f64 = s.u.iter().zip(&body).map(|(u, r)| -p.rho0 * r * u).sum::<f64>() * dv;
            a += dt * (f.psi + pot);
        }
        for w in shifted.windows(2) {
            let ke: f64 = w[1].u.iter().zip(&w[0].u).map(|(a, b)| ((a - b) / dt).powi(2)).sum::<f64>() * 0.5 * p.rho0 * dv;
            a -= dt * ke;
        }
        a
    };
    let scale = traj
        .states
        .iter()
        .flat_map(|s| s.u.iter().chain(&s.gamma))
        .fold(1e-12f64, |m, x| m.max(x.abs()));
    let size = delta_u
        .iter()
        .chain(delta_gamma)
        .flatten()
        .fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
    // Central differences at h and h/2 combined by Richardson extrapolation;
    // the quartic stress term makes the plain O(h²) error visible otherwise.
    let h = 1e-4 * scale / size;
    let d = |h: f64| (action(h) - action(-h)) / (2.0 * h);
    let mut variation = (4.0 * d(0.5 * h) - d(h)) / 3.0;

    let rep = lagrange_residual_with(traj, stencil)?;
    let mut pairing = 0.0;
    for (k, n) in traj.interior_levels(stencil).enumerate() {
        let gd = traj.gamma_dot(n, stencil);
        variation += dt * dissipation_variation_at(cfg, &gd, &delta_gamma[n])?;
        let pu: f64 = rep.resid_u[k].iter().zip(&delta_u[n]).map(|(r, d)| r * d).sum();
        let pg: f64 = rep.resid_gamma[k].iter().zip(&delta_gamma[n]).map(|(r, d)| r * d).sum();
        pairing += dt * (pu + pg) * dv;
    }
    Ok(ActionVariation {
        variation,
        residual_pairing: pairing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn static_traj(levels: usize) -> DiscreteTrajectory {
        let cfg = scenarios::quick();
        let n = cfg.grid.len();
        let states = (0..levels)
            .map(|k| FieldState {
                time: k as f64 * cfg.dt,
                ..FieldState::zeros(n)
            })
            .collect();
        DiscreteTrajectory::new(&cfg, states).unwrap()
    }

    #[test]
    fn too_few_levels() {
        let cfg = scenarios::quick();
        let r = DiscreteTrajectory::new(&cfg, vec![FieldState::zeros(cfg.grid.len()); 2]);
        assert_eq!(r.unwrap_err(), Error::TooFewLevels(2, 3));
    }

    #[test]
    fn static_zero_has_zero_residual() {
        let t = static_traj(7);
        let r = lagrange_residual(&t).unwrap();
        assert!(r.norm_u.iter().chain(&r.norm_gamma).all(|x| *x == 0.0));
        let g = generalized_residual(&reduce_to_generalized(&t, &Basis::sine(&t.cfg.grid, 3)).unwrap());
        assert!(g.norm_u.iter().chain(&g.norm_gamma).all(|x| *x == 0.0));
    }

    #[test]
    fn functionals_hand_values() {
        let mut cfg = scenarios::quick();
        cfg.material.lambda = 2.0;
        let n = cfg.grid.len();
        let st = FieldState {
            v: vec![2.0; n],
            ..FieldState::zeros(n)
        };
        let f = total_functionals(&cfg, &st, &vec![3.0; n]);
        assert!((f.kinetic - 2.0).abs() < 1e-12);
        assert!((f.dissipation - 9.0).abs() < 1e-12);
        assert_eq!(f.psi, 0.0);
        cfg.material.lambda = 1.0;
        let dv = dissipation_variation_at(&cfg, &vec![2.0; n], &vec![3.0; n]).unwrap();
        assert!((dv - 6.0).abs() < 1e-12);
        assert!(matches!(
            dissipation_variation_at(&cfg, &[1.0], &[1.0]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn dependent_basis_is_singular() {
        let cfg = scenarios::quick();
        let mut b = Basis::sine(&cfg.grid, 2);
        b.u_modes[1] = b.u_modes[0].clone();
        let t = static_traj(5);
        assert!(matches!(reduce_to_generalized(&t, &b), Err(Error::SingularBasis(_))));
    }
}
