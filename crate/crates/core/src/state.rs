use serde::{Deserialize, Serialize};

/// Discrete fields at one time level.
///
/// Single writer: the run that owns a state mutates it; clones may be shared
/// read-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub time: f64,
    /// Longitudinal displacement (m).
    pub u: Vec<f64>,
    /// Velocity ∂U/∂t (m/s).
    pub v: Vec<f64>,
    /// Damage Γ (dimensionless).
    pub gamma: Vec<f64>,
    /// Cells where damage evolution is enabled. Activation is irreversible.
    pub active: Vec<bool>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self {
            time: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
            gamma: vec![0.0; n],
            active: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.gamma)
            .all(|x| x.is_finite())
    }
}
