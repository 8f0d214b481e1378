//! Time integration of the coupled elastic / damage system.

pub mod damage;
pub mod elastic;
mod run;

pub use damage::{step_damage, DamageStep};
pub use elastic::{step_elastic, ElasticStep};
pub use run::{
    run, run_clifton, run_partial, EnergyRecord, GaugeSample, GaugeTrace, RunOutput, Snapshot,
    StepReport, ADMISSIBILITY_RTOL,
};
