//! Failure waves in brittle solids as a coupled elastic / damage-diffusion
//! system.
//!
//! The model is fixed by two functions: a free energy `ρ₀Ψ(u_X, Γ, ∇Γ)` and a
//! quadratic dissipation `ρ₀𝒟(Γ̇) = λΓ̇²/2`. The longitudinal displacement `U`
//! obeys a (possibly cubic) wave equation, and the scalar damage `Γ` obeys an
//! anisotropic diffusion / reaction law driven by the internal force
//! `Z = −ρ₀ δΨ/δΓ`.
//!
//! Module map:
//!
//! * [`grid`], [`params`], [`state`], [`config`]: grids, material constants,
//!   field state and scenario configuration.
//! * [`constitutive`]: free energies, stress, internal forces, dissipation,
//!   entropy production and fluxes.
//! * [`solver`]: leapfrog elastodynamics, Crank–Nicolson / ADI damage
//!   diffusion, the coupled run loop and the conservative (`λ = 0`) limit.
//! * [`analysis`]: front tracking, rise times, deflagration predictors, the
//!   material tables and the vanishing-dissipation study.
//! * [`variational`]: discrete action functionals and Lagrange residuals with
//!   dissipation, in field form and in generalized coordinates.
//! * [`verification`]: refinement suites.
//! * [`io`]: CSV artifacts and run manifests.

// `!(x > 0.0)` is used on purpose to reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod constitutive;
pub mod error;
pub mod grid;
pub mod io;
pub mod params;
pub mod scenarios;
pub mod solver;
pub mod state;
pub mod tridiag;
pub mod variational;
pub mod verification;

#[cfg(feature = "cli")]
pub mod cli;

pub use config::{build_scenario, initialize_state, ScenarioConfig};
pub use error::{Error, Result};
pub use grid::{Grid, Grid1D, Grid2D};
pub use params::{MaterialParams, Model, SourceLaw};
pub use state::FieldState;
