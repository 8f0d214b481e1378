//! Material constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which free energy closes the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// `c₁u_X²/2 + c₂Γ²/2 + K∇Γ·∇Γ/2 + c₃u_X⁴/4`; no elastic/damage coupling.
    Feng,
    /// Quadratic form `a u_X²/2 + b u_X Γ + c Γ²/2 + K∇Γ·∇Γ/2` with `a = c₁`,
    /// `c = c₂`.
    Linear,
}

/// Extra bulk driving force on the damage field.
///
/// `LinearDecay` adds nothing beyond the `−c₂Γ` restoring force. `Logistic`
/// adds `λ r Γ (1 − Γ/Γ_max)`, which is accounted for as the force of a
/// reaction potential `−λ r (Γ²/2 − Γ³/(3Γ_max))` in the free energy so that
/// the internal force `Z` and the evolution law stay consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceLaw {
    LinearDecay,
    Logistic { rate: f64, gamma_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub model: Model,
    /// Reference mass density ρ₀ (kg/m³).
    pub rho0: f64,
    /// Temperature Θ₀ (K).
    pub theta0: f64,
    /// Linear elastic modulus (Pa).
    pub c1: f64,
    /// Damage stiffness (Pa); Γ is dimensionless.
    pub c2: f64,
    /// Cubic elastic coefficient (Pa).
    pub c3: f64,
    /// Dissipation coefficient (Pa·s).
    pub lambda: f64,
    /// Longitudinal damage diffusivity (m²/s).
    pub d1: f64,
    /// Transverse damage diffusivity (m²/s).
    pub d2: f64,
    /// Elastic/damage coupling (Pa), linear model only.
    pub b: f64,
    /// Activation stress threshold (Pa).
    pub sigma0: f64,
    pub source_law: SourceLaw,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            model: Model::Feng,
            rho0: 1.0,
            theta0: 300.0,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            lambda: 1.0,
            d1: 0.0,
            d2: 0.0,
            b: 0.0,
            sigma0: 0.0,
            source_law: SourceLaw::LinearDecay,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, why: &str| Err(Error::InvalidValue(format!("material.{k}"), why.into()));
        let all = [
            ("rho0", self.rho0),
            ("theta0", self.theta0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("lambda", self.lambda),
            ("d1", self.d1),
            ("d2", self.d2),
            ("b", self.b),
            ("sigma0", self.sigma0),
        ];
        for (k, v) in all {
            if !v.is_finite() {
                return bad(k, "must be finite");
            }
        }
        if self.rho0 <= 0.0 {
            return bad("rho0", "must be > 0");
        }
        if self.theta0 <= 0.0 {
            return bad("theta0", "must be > 0");
        }
        if self.c1 <= 0.0 {
            return bad("c1", "must be > 0");
        }
        if self.lambda < 0.0 {
            return bad("lambda", "must be >= 0");
        }
        if self.c2 < 0.0 {
            return bad("c2", "must be >= 0");
        }
        if self.d1 < 0.0 {
            return bad("d1", "must be >= 0");
        }
        if self.d2 < 0.0 {
            return bad("d2", "must be >= 0");
        }
        if self.sigma0 < 0.0 {
            return bad("sigma0", "must be >= 0");
        }
        if self.model == Model::Feng && self.b != 0.0 {
            return bad("b", "coupling is only defined for the linear model");
        }
        if let SourceLaw::Logistic { rate, gamma_max } = self.source_law {
            if !(rate >= 0.0) || !rate.is_finite() {
                return bad("source_rate", "must be >= 0");
            }
            if !(gamma_max > 0.0) || !gamma_max.is_finite() {
                return bad("gamma_max", "must be > 0");
            }
        }
        Ok(())
    }

    /// Longitudinal entry of `K = λ·D`.
    pub fn k1(&self) -> f64 {
        self.lambda * self.d1
    }

    /// Transverse entry of `K = λ·D`.
    pub fn k2(&self) -> f64 {
        self.lambda * self.d2
    }

    /// `c₄ = −c₂/λ`, the linear decay rate of the normalized damage law.
    pub fn c4(&self) -> f64 {
        -self.c2 / self.lambda
    }

    /// Reference level used to normalize Γ for front detection and gauges.
    pub fn gamma_ref(&self) -> f64 {
        match self.source_law {
            SourceLaw::Logistic { gamma_max, .. } => gamma_max,
            SourceLaw::LinearDecay => 1.0,
        }
    }

    /// Elastic wave speed at zero strain.
    pub fn wave_speed(&self) -> f64 {
        (self.c1 / self.rho0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_lambda() {
        let p = MaterialParams {
            lambda: -1.0,
            ..Default::default()
        };
        assert_eq!(
            p.validate(),
            Err(Error::InvalidValue("material.lambda".into(), "must be >= 0".into()))
        );
    }

    #[test]
    fn diffusion_matrix_from_dissipation() {
        let p = MaterialParams {
            lambda: 2.0,
            d1: 6.6,
            d2: 13.2,
            c2: 4.0,
            ..Default::default()
        };
        assert_eq!(p.k1(), 13.2);
        assert_eq!(p.k2(), 26.4);
        assert_eq!(p.c4(), -2.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn coupling_requires_linear_model() {
        let p = MaterialParams {
            b: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = MaterialParams {
            model: Model::Linear,
            ..p
        };
        assert!(p.validate().is_ok());
    }
}
