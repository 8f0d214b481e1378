//! Momentum balance `ρ₀Ü = ∂S/∂X + ρ₀r`, row by row along `X`, with `S` taken
//! at `Γ = 0`. Kick-drift-kick leapfrog.

use crate::config::{Boundaries, ElasticBc};
use crate::constitutive::{self, xface, FaceBc};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::MaterialParams;

fn face_bc(bc: ElasticBc, t: f64) -> FaceBc {
    match bc {
        ElasticBc::Fixed => FaceBc::Dirichlet(0.0),
        ElasticBc::Velocity(l) => FaceBc::Dirichlet(l.integral(t)),
        ElasticBc::Free | ElasticBc::Traction(_) => FaceBc::Natural,
        ElasticBc::Periodic => FaceBc::Periodic,
    }
}

/// Prescribed boundary stress, if the end is traction-loaded or free.
fn prescribed_stress(bc: ElasticBc, t: f64) -> Option<f64> {
    match bc {
        ElasticBc::Free => Some(0.0),
        ElasticBc::Traction(l) => Some(l.at(t)),
        _ => None,
    }
}

/// Strain `u_X` on `X` faces.
pub fn face_strains(grid: &Grid, u: &[f64], bc: &Boundaries, t: f64) -> Vec<f64> {
    constitutive::face_gradients_x(grid, u, face_bc(bc.left, t), face_bc(bc.right, t))
}

/// Stress on `X` faces; traction and free ends carry the prescribed value.
pub fn face_stresses(grid: &Grid, u: &[f64], bc: &Boundaries, p: &MaterialParams, t: f64) -> Vec<f64> {
    let mut s: Vec<f64> = face_strains(grid, u, bc, t)
        .iter()
        .map(|e| constitutive::elastic_stress(*e, p))
        .collect();
    let nx = grid.nx();
    for j in 0..grid.ny() {
        if let Some(sb) = prescribed_stress(bc.left, t) {
            s[xface(grid, 0, j)] = sb;
        }
        if let Some(sb) = prescribed_stress(bc.right, t) {
            s[xface(grid, nx, j)] = sb;
        }
    }
    s
}

fn face_average(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(0.5 * (f[xface(grid, i, j)] + f[xface(grid, i + 1, j)]));
        }
    }
    out
}

/// Cell strain: mean of the two face strains.
pub fn cell_strain(grid: &Grid, u: &[f64], bc: &Boundaries, t: f64) -> Vec<f64> {
    face_average(grid, &face_strains(grid, u, bc, t))
}

/// Cell stress: mean of the two face stresses.
pub fn cell_stress(grid: &Grid, u: &[f64], bc: &Boundaries, p: &MaterialParams, t: f64) -> Vec<f64> {
    face_average(grid, &face_stresses(grid, u, bc, p, t))
}

/// `Ü = (S_{i+½} − S_{i−½})/(ρ₀dx) + r`.
pub fn acceleration(
    grid: &Grid,
    u: &[f64],
    bc: &Boundaries,
    p: &MaterialParams,
    body: &[f64],
    t: f64,
) -> Vec<f64> {
    let s = face_stresses(grid, u, bc, p, t);
    let mut a = constitutive::divergence_x(grid, &s);
    for (ak, r) in a.iter_mut().zip(body) {
        *ak = *ak / p.rho0 + r;
    }
    a
}

/// Stored elastic energy `Σ Φ(u_X) w_f dy` over `X` faces.
pub fn strain_energy(grid: &Grid, u: &[f64], bc: &Boundaries, p: &MaterialParams, t: f64) -> f64 {
    let (l, r) = (face_bc(bc.left, t), face_bc(bc.right, t));
    let e = constitutive::face_gradients_x(grid, u, l, r);
    let w = constitutive::face_weights_x(grid, l, r);
    e.iter()
        .zip(&w)
        .map(|(e, w)| constitutive::elastic_energy(*e, p) * w)
        .sum::<f64>()
        * grid.dy()
}

/// `Σ ρ₀v²/2 dV`.
pub fn kinetic_energy(grid: &Grid, v: &[f64], p: &MaterialParams) -> f64 {
    0.5 * p.rho0 * v.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()
}

/// Leapfrog-consistent kinetic energy `Σ ρ₀(v² − dt²a²/4)/2 dV`, exactly
/// conserved together with the strain energy for linear free vibrations.
pub fn staggered_kinetic_energy(grid: &Grid, v: &[f64], a: &[f64], p: &MaterialParams, dt: f64) -> f64 {
    let q = 0.25 * dt * dt;
    0.5 * p.rho0 * v.iter().zip(a).map(|(v, a)| v * v - q * a * a).sum::<f64>() * grid.cell_volume()
}

/// Largest Courant number `c_max dt/dx` with the tangent wave speed at the
/// current strain.
pub fn courant(grid: &Grid, u: &[f64], bc: &Boundaries, p: &MaterialParams, dt: f64, t: f64) -> (f64, f64) {
    let tangent = face_strains(grid, u, bc, t)
        .iter()
        .map(|e| constitutive::elastic_tangent(*e, p))
        .fold(p.c1, f64::max);
    let c_max = (tangent / p.rho0).sqrt();
    (c_max * dt / grid.dx(), c_max)
}

pub fn check_cfl(grid: &Grid, u: &[f64], bc: &Boundaries, p: &MaterialParams, dt: f64, t: f64) -> Result<f64> {
    let (cfl, c_max) = courant(grid, u, bc, p, dt, t);
    if cfl > 1.0 || !cfl.is_finite() {
        return Err(Error::CflViolation {
            dt,
            dx: grid.dx(),
            c_max,
            courant: cfl,
        });
    }
    Ok(cfl)
}

/// Energy delivered through the `X` ends over one step.
#[allow(clippy::too_many_arguments)]
fn boundary_work(
    grid: &Grid,
    bc: &Boundaries,
    u_old: &[f64],
    u_new: &[f64],
    v_half: &[f64],
    p: &MaterialParams,
    t: f64,
    dt: f64,
) -> f64 {
    let (nx, ny) = (grid.nx(), grid.ny());
    let s0 = face_stresses(grid, u_old, bc, p, t);
    let s1 = face_stresses(grid, u_new, bc, p, t + dt);
    let mut w = 0.0;
    for (end, sign, cell) in [(bc.left, -1.0, 0usize), (bc.right, 1.0, nx - 1)] {
        let face = if sign < 0.0 { 0 } else { nx };
        for j in 0..ny {
            let f = xface(grid, face, j);
            let sb = 0.5 * (s0[f] + s1[f]);
            w += match end {
                ElasticBc::Traction(_) => sign * sb * v_half[j * nx + cell] * dt,
                ElasticBc::Velocity(l) => sign * sb * (l.integral(t + dt) - l.integral(t)),
                _ => 0.0,
            };
        }
    }
    w * grid.dy()
}

/// Result of one leapfrog step.
#[derive(Debug, Clone)]
pub struct ElasticStep {
    /// Acceleration at the new time level.
    pub accel: Vec<f64>,
    /// Work done on the body through its ends during the step.
    pub boundary_work: f64,
    /// Work done by the body force during the step.
    pub body_work: f64,
    pub courant: f64,
}

/// Advances `(u, v)` from `t` to `t + dt`. `accel` is the acceleration at `t`
/// (from the previous step or [`acceleration`]).
#[allow(clippy::too_many_arguments)]
pub fn step_elastic(
    grid: &Grid,
    u: &mut [f64],
    v: &mut [f64],
    accel: &[f64],
    bc: &Boundaries,
    p: &MaterialParams,
    body: &[f64],
    t: f64,
    dt: f64,
) -> Result<ElasticStep> {
    let cfl = check_cfl(grid, u, bc, p, dt, t)?;
    let u_old = u.to_vec();
    for k in 0..u.len() {
        v[k] += 0.5 * dt * accel[k];
        u[k] += dt * v[k];
    }
    let dv = grid.cell_volume();
    let body_work = p.rho0 * body.iter().zip(v.iter()).map(|(r, v)| r * v).sum::<f64>() * dt * dv;
    let boundary_work = boundary_work(grid, bc, &u_old, u, v, p, t, dt);
    let a_new = acceleration(grid, u, bc, p, body, t + dt);
    for k in 0..v.len() {
        v[k] += 0.5 * dt * a_new[k];
    }
    Ok(ElasticStep {
        accel: a_new,
        boundary_work,
        body_work,
        courant: cfl,
    })
}
