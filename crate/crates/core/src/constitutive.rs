//! Free energy, dissipation and everything derived from them.
//!
//! Pointwise functions take the strain `u_X`, the damage `Γ` and its gradient.
//! Field operators work on a cell-centred grid with face-centred gradients;
//! `face_gradients_x` and `divergence_x` form a summation-by-parts pair so the
//! discrete `Z` is the exact variational derivative of the discrete free energy.

use serde::{Deserialize, Serialize};

use crate::config::DamageBc;
use crate::grid::Grid;
use crate::params::{MaterialParams, Model, SourceLaw};

/// `ρ₀Ψ` for the Feng model.
pub fn free_energy_feng(ux: f64, gamma: f64, grad: [f64; 2], p: &MaterialParams) -> f64 {
    0.5 * p.c1 * ux * ux
        + 0.5 * p.c2 * gamma * gamma
        + 0.5 * p.k1() * grad[0] * grad[0]
        + 0.5 * p.k2() * grad[1] * grad[1]
        + 0.25 * p.c3 * ux.powi(4)
}

/// `ρ₀Ψ` for the linear quadratic form.
pub fn free_energy_linear(ux: f64, gamma: f64, grad: [f64; 2], p: &MaterialParams) -> f64 {
    0.5 * p.c1 * ux * ux
        + p.b * ux * gamma
        + 0.5 * p.c2 * gamma * gamma
        + 0.5 * p.k1() * grad[0] * grad[0]
        + 0.5 * p.k2() * grad[1] * grad[1]
}

/// Model-dispatched `ρ₀Ψ`, without the reaction potential.
pub fn free_energy(ux: f64, gamma: f64, grad: [f64; 2], p: &MaterialParams) -> f64 {
    match p.model {
        Model::Feng => free_energy_feng(ux, gamma, grad, p),
        Model::Linear => free_energy_linear(ux, gamma, grad, p),
    }
}

/// `S = ρ₀ ∂Ψ/∂u_X`.
pub fn stress(ux: f64, gamma: f64, p: &MaterialParams) -> f64 {
    match p.model {
        Model::Feng => p.c1 * ux + p.c3 * ux.powi(3),
        Model::Linear => p.c1 * ux + p.b * gamma,
    }
}

/// Stress driving the momentum balance: `S` at `Γ = 0`.
pub fn elastic_stress(ux: f64, p: &MaterialParams) -> f64 {
    stress(ux, 0.0, p)
}

/// `dS/du_X` at `Γ = 0`.
pub fn elastic_tangent(ux: f64, p: &MaterialParams) -> f64 {
    match p.model {
        Model::Feng => p.c1 + 3.0 * p.c3 * ux * ux,
        Model::Linear => p.c1,
    }
}

/// Strain energy density at `Γ = 0`, the potential of [`elastic_stress`].
pub fn elastic_energy(ux: f64, p: &MaterialParams) -> f64 {
    match p.model {
        Model::Feng => 0.5 * p.c1 * ux * ux + 0.25 * p.c3 * ux.powi(4),
        Model::Linear => 0.5 * p.c1 * ux * ux,
    }
}

/// `A = −ρ₀ ∂Ψ/∂Γ`, without the reaction force.
pub fn affinity(ux: f64, gamma: f64, p: &MaterialParams) -> f64 {
    match p.model {
        Model::Feng => -p.c2 * gamma,
        Model::Linear => -(p.b * ux + p.c2 * gamma),
    }
}

/// `B = −ρ₀ ∂Ψ/∂∇Γ = −K∇Γ`.
pub fn flux(grad: [f64; 2], p: &MaterialParams) -> [f64; 2] {
    [-p.k1() * grad[0], -p.k2() * grad[1]]
}

/// Logistic driving force `λ r Γ (1 − Γ/Γ_max)`; zero for `LinearDecay`.
pub fn reaction_force(gamma: f64, p: &MaterialParams) -> f64 {
    match p.source_law {
        SourceLaw::LinearDecay => 0.0,
        SourceLaw::Logistic { rate, gamma_max } => {
            p.lambda * rate * gamma * (1.0 - gamma / gamma_max)
        }
    }
}

/// Potential whose negative derivative is [`reaction_force`].
pub fn reaction_potential(gamma: f64, p: &MaterialParams) -> f64 {
    match p.source_law {
        SourceLaw::LinearDecay => 0.0,
        SourceLaw::Logistic { rate, gamma_max } => {
            -p.lambda * rate * (0.5 * gamma * gamma - gamma.powi(3) / (3.0 * gamma_max))
        }
    }
}

/// `ρ₀𝒟 = λΓ̇²/2`.
pub fn dissipation(gamma_dot: f64, p: &MaterialParams) -> f64 {
    0.5 * p.lambda * gamma_dot * gamma_dot
}

/// `ρ₀ ∂𝒟/∂Γ̇ = λΓ̇`.
pub fn dissipation_force(gamma_dot: f64, p: &MaterialParams) -> f64 {
    p.lambda * gamma_dot
}

/// `ρ₀ṡ⁽ⁱ⁾ = λΓ̇²/Θ₀ = 2ρ₀𝒟/Θ₀`.
pub fn entropy_production(gamma_dot: f64, p: &MaterialParams) -> f64 {
    2.0 * dissipation(gamma_dot, p) / p.theta0
}

/// Entropy flux `−B Γ̇/Θ₀`.
pub fn entropy_flux(gamma_dot: f64, b: [f64; 2], p: &MaterialParams) -> [f64; 2] {
    [-b[0] * gamma_dot / p.theta0, -b[1] * gamma_dot / p.theta0]
}

/// Pointwise derived quantities at one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstitutiveEval {
    pub psi: f64,
    pub s: f64,
    pub a: f64,
    pub b: [f64; 2],
    pub z: f64,
    pub d_val: f64,
    pub sdot_i: f64,
}

/// How a field is closed on one `X` end when forming face gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceBc {
    /// Value held on the boundary face; ghost gradient over half a cell.
    Dirichlet(f64),
    /// Boundary face carries no gradient (flux set elsewhere or zero).
    Natural,
    Periodic,
}

impl From<DamageBc> for FaceBc {
    fn from(bc: DamageBc) -> Self {
        match bc {
            DamageBc::Dirichlet(v) => FaceBc::Dirichlet(v),
            DamageBc::ZeroFlux => FaceBc::Natural,
            DamageBc::Periodic => FaceBc::Periodic,
        }
    }
}

/// Face index of the `X` face on the left of cell `(i, j)`; `i = nx` is the
/// right boundary face.
#[inline]
pub fn xface(grid: &Grid, i: usize, j: usize) -> usize {
    j * (grid.nx() + 1) + i
}

/// Face index of the `Y` face below cell `(i, j)`; `j = ny` is the top face.
#[inline]
pub fn yface(grid: &Grid, i: usize, j: usize) -> usize {
    j * grid.nx() + i
}

/// `∂f/∂X` on the `(nx+1)·ny` `X` faces.
pub fn face_gradients_x(grid: &Grid, f: &[f64], left: FaceBc, right: FaceBc) -> Vec<f64> {
    let (nx, ny, dx) = (grid.nx(), grid.ny(), grid.dx());
    let mut g = vec![0.0; (nx + 1) * ny];
    for j in 0..ny {
        let row = &f[j * nx..(j + 1) * nx];
        for i in 1..nx {
            g[xface(grid, i, j)] = (row[i] - row[i - 1]) / dx;
        }
        let (gl, gr) = match (left, right) {
            (FaceBc::Periodic, _) | (_, FaceBc::Periodic) => {
                let w = (row[0] - row[nx - 1]) / dx;
                (w, w)
            }
            _ => {
                let gl = match left {
                    FaceBc::Dirichlet(v) => (row[0] - v) / (0.5 * dx),
                    _ => 0.0,
                };
                let gr = match right {
                    FaceBc::Dirichlet(v) => (v - row[nx - 1]) / (0.5 * dx),
                    _ => 0.0,
                };
                (gl, gr)
            }
        };
        g[xface(grid, 0, j)] = gl;
        g[xface(grid, nx, j)] = gr;
    }
    g
}

/// Quadrature weight (length along `X`) of each `X` face in the discrete
/// energy: `dx` inside, `dx/2` on Dirichlet ends, 0 on natural ends, and
/// `dx/2` on each copy of the shared periodic face.
pub fn face_weights_x(grid: &Grid, left: FaceBc, right: FaceBc) -> Vec<f64> {
    let (nx, ny, dx) = (grid.nx(), grid.ny(), grid.dx());
    let end = |bc: FaceBc| match bc {
        FaceBc::Dirichlet(_) | FaceBc::Periodic => 0.5 * dx,
        FaceBc::Natural => 0.0,
    };
    let mut w = vec![dx; (nx + 1) * ny];
    for j in 0..ny {
        w[xface(grid, 0, j)] = end(left);
        w[xface(grid, nx, j)] = end(right);
    }
    w
}

/// `∂f/∂Y` on the `nx·(ny+1)` `Y` faces; transverse ends are insulated and all
/// entries vanish on 1D grids.
pub fn face_gradients_y(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut g = vec![0.0; nx * (ny + 1)];
    if !grid.is_2d() {
        return g;
    }
    let dy = grid.dy();
    for j in 1..ny {
        for i in 0..nx {
            g[yface(grid, i, j)] = (f[j * nx + i] - f[(j - 1) * nx + i]) / dy;
        }
    }
    g
}

/// Length along `Y` of each `Y` face in the discrete energy.
pub fn face_weights_y(grid: &Grid) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut w = vec![0.0; nx * (ny + 1)];
    if grid.is_2d() {
        for j in 1..ny {
            for i in 0..nx {
                w[yface(grid, i, j)] = grid.dy();
            }
        }
    }
    w
}

/// Cell divergence of an `X`-face field.
pub fn divergence_x(grid: &Grid, fx: &[f64]) -> Vec<f64> {
    let (nx, ny, dx) = (grid.nx(), grid.ny(), grid.dx());
    let mut d = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            d[j * nx + i] = (fx[xface(grid, i + 1, j)] - fx[xface(grid, i, j)]) / dx;
        }
    }
    d
}

/// Cell divergence of a `Y`-face field.
pub fn divergence_y(grid: &Grid, fy: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut d = vec![0.0; nx * ny];
    if !grid.is_2d() {
        return d;
    }
    let dy = grid.dy();
    for j in 0..ny {
        for i in 0..nx {
            d[j * nx + i] = (fy[yface(grid, i, j + 1)] - fy[yface(grid, i, j)]) / dy;
        }
    }
    d
}

/// Discrete `A`, `B` and `Z = A − ∇·B` on a damage field.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalForces {
    /// Cell values of `A`, including the reaction force.
    pub a: Vec<f64>,
    /// `B_X` on `X` faces.
    pub bx: Vec<f64>,
    /// `B_Y` on `Y` faces.
    pub by: Vec<f64>,
    pub z: Vec<f64>,
}

/// Face fluxes `B = −K∇Γ`.
pub fn damage_fluxes(
    grid: &Grid,
    gamma: &[f64],
    left: DamageBc,
    right: DamageBc,
    p: &MaterialParams,
) -> (Vec<f64>, Vec<f64>) {
    let mut bx = face_gradients_x(grid, gamma, left.into(), right.into());
    bx.iter_mut().for_each(|g| *g *= -p.k1());
    let mut by = face_gradients_y(grid, gamma);
    by.iter_mut().for_each(|g| *g *= -p.k2());
    (bx, by)
}

/// `A`, `B`, `Z` for the damage field `gamma`. `ux` holds cell strains and is
/// only read by the linear model.
pub fn internal_forces(
    grid: &Grid,
    gamma: &[f64],
    ux: Option<&[f64]>,
    left: DamageBc,
    right: DamageBc,
    p: &MaterialParams,
) -> InternalForces {
    let (bx, by) = damage_fluxes(grid, gamma, left, right, p);
    let divx = divergence_x(grid, &bx);
    let divy = divergence_y(grid, &by);
    let a: Vec<f64> = gamma
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let e = ux.map_or(0.0, |u| u[k]);
            affinity(e, g, p) + reaction_force(g, p)
        })
        .collect();
    let z = a
        .iter()
        .zip(divx.iter().zip(&divy))
        .map(|(a, (dx, dy))| a - dx - dy)
        .collect();
    InternalForces { a, bx, by, z }
}

/// Discrete damage part of the total free energy: bulk `c₂Γ²/2`, coupling,
/// reaction potential and face-quadrature gradient energy.
pub fn damage_energy(
    grid: &Grid,
    gamma: &[f64],
    ux: Option<&[f64]>,
    left: DamageBc,
    right: DamageBc,
    p: &MaterialParams,
) -> f64 {
    let dv = grid.cell_volume();
    let bulk: f64 = gamma
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let coupling = match (p.model, ux) {
                (Model::Linear, Some(u)) => p.b * u[k] * g,
                _ => 0.0,
            };
            0.5 * p.c2 * g * g + coupling + reaction_potential(g, p)
        })
        .sum::<f64>()
        * dv;
    let gx = face_gradients_x(grid, gamma, left.into(), right.into());
    let wx = face_weights_x(grid, left.into(), right.into());
    let ex: f64 = gx.iter().zip(&wx).map(|(g, w)| 0.5 * p.k1() * g * g * w).sum::<f64>() * grid.dy();
    let gy = face_gradients_y(grid, gamma);
    let wy = face_weights_y(grid);
    let ey: f64 = gy.iter().zip(&wy).map(|(g, w)| 0.5 * p.k2() * g * g * w).sum::<f64>() * grid.dx();
    bulk + ex + ey
}

/// `H = ∮ (B·Γ̇)·n dA` over the two `X` ends. `Γ̇` on a boundary face is taken
/// from the adjacent cell unless that end holds Γ fixed (Dirichlet). Periodic
/// ends have no boundary. Positive `H` is energy leaving the body.
pub fn boundary_energy_release(
    grid: &Grid,
    bx: &[f64],
    gamma_dot: &[f64],
    left: DamageBc,
    right: DamageBc,
) -> f64 {
    let (nx, ny) = (grid.nx(), grid.ny());
    let rate = |bc: DamageBc, cell: f64| match bc {
        DamageBc::Dirichlet(_) | DamageBc::Periodic => 0.0,
        DamageBc::ZeroFlux => cell,
    };
    let mut h = 0.0;
    for j in 0..ny {
        h -= bx[xface(grid, 0, j)] * rate(left, gamma_dot[j * nx]);
        h += bx[xface(grid, nx, j)] * rate(right, gamma_dot[j * nx + nx - 1]);
    }
    h * grid.dy()
}

/// Cell-wise [`ConstitutiveEval`] for a state. `ux` are cell strains, `z` the
/// discrete internal force and `gamma_dot` the damage rate.
pub fn evaluate_cells(
    grid: &Grid,
    ux: &[f64],
    gamma: &[f64],
    gamma_dot: &[f64],
    left: DamageBc,
    right: DamageBc,
    p: &MaterialParams,
) -> Vec<ConstitutiveEval> {
    let f = internal_forces(grid, gamma, Some(ux), left, right, p);
    let gx = face_gradients_x(grid, gamma, left.into(), right.into());
    let gy = face_gradients_y(grid, gamma);
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let grad = [
                0.5 * (gx[xface(grid, i, j)] + gx[xface(grid, i + 1, j)]),
                0.5 * (gy[yface(grid, i, j)] + gy[yface(grid, i, j + 1)]),
            ];
            out.push(ConstitutiveEval {
                psi: free_energy(ux[k], gamma[k], grad, p) + reaction_potential(gamma[k], p),
                s: stress(ux[k], gamma[k], p),
                a: f.a[k],
                b: flux(grad, p),
                z: f.z[k],
                d_val: dissipation(gamma_dot[k], p),
                sdot_i: entropy_production(gamma_dot[k], p),
            });
        }
    }
    out
}
