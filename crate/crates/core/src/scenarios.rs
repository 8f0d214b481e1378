//! Built-in scenarios. Each matches a file under `scenarios/` at the
//! repository root; the constructors taking a cell count build the refinement
//! levels used by the convergence suites.

use crate::config::{
    AnalysisSpec, Boundaries, DamageBc, DamageScheme, ElasticBc, Gauge, InitialData, Loading, OutputSpec, Profile,
    ScenarioConfig,
};
use crate::grid::{Grid, Grid1D, Grid2D};
use crate::params::{MaterialParams, Model, SourceLaw};

fn line(nx: usize, length: f64, origin: f64) -> Grid {
    Grid::D1(Grid1D {
        nx,
        dx: length / nx as f64,
        origin,
    })
}

fn unit_material() -> MaterialParams {
    MaterialParams::default()
}

fn base(name: &str, grid: Grid, material: MaterialParams, dt: f64, t_end: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        grid,
        material,
        dt,
        t_end,
        damage_scheme: DamageScheme::CrankNicolson,
        ic: InitialData::default(),
        bc: Boundaries::default(),
        body_force: Profile::Zero,
        gauges: Vec::new(),
        output: OutputSpec::default(),
        analysis: AnalysisSpec::default(),
    }
}

fn gaussian(amplitude: f64, center: f64, width: f64) -> Profile {
    Profile::Gaussian {
        amplitude,
        center,
        width,
        center_y: None,
    }
}

/// `U = sin(πX)` on `[0, 1]` with fixed ends and unit wave speed, one period.
pub fn standing_wave(nx: usize) -> ScenarioConfig {
    let g = line(nx, 1.0, 0.0);
    let mut c = base("standing_wave", g, unit_material(), 0.5 / nx as f64, 2.0);
    c.ic.u = Profile::Sine {
        amplitude: 1.0,
        modes: 1.0,
    };
    c.bc.left = ElasticBc::Fixed;
    c.bc.right = ElasticBc::Fixed;
    c
}

/// Gaussian release (`σ = 0.5`) diffusing with `d₁ = 1`, `c₂ = 0` on
/// `[−8, 8]` until `t = 0.5`.
pub fn heat_kernel(nx: usize) -> ScenarioConfig {
    let g = line(nx, 16.0, -8.0);
    let m = MaterialParams {
        d1: 1.0,
        ..unit_material()
    };
    let mut c = base("heat_kernel", g, m, 4.0 / nx as f64, 0.5);
    c.ic.gamma = gaussian(1.0, 0.0, 0.5);
    c.output.snapshot_every = 1;
    c
}

/// Exact heat-kernel solution of [`heat_kernel`] at time `t`.
pub fn heat_kernel_exact(x: f64, t: f64) -> f64 {
    let s0 = 0.25;
    let s2 = s0 + 2.0 * t;
    (s0 / s2).sqrt() * (-x * x / (2.0 * s2)).exp()
}

/// Logistic front with `d₁ = 1`, `r = 1` entering a 200-long bar from a held
/// boundary value.
pub fn kpp_front() -> ScenarioConfig {
    let g = line(2000, 200.0, 0.0);
    let m = MaterialParams {
        d1: 1.0,
        source_law: SourceLaw::Logistic {
            rate: 1.0,
            gamma_max: 1.0,
        },
        ..unit_material()
    };
    let mut c = base("kpp_front", g, m, 0.005, 75.0);
    c.ic.gamma = Profile::Step {
        left: 1.0,
        right: 0.0,
        at: 2.0,
    };
    c.bc.gamma_left = DamageBc::Dirichlet(1.0);
    c.gauges = vec![Gauge { x: 100.0, y: 0.0 }];
    c.output.snapshot_every = 200;
    c
}

/// Rate making the pulled-front speed `2√(d₁r)` equal to `v_f`.
pub fn logistic_rate_for_speed(d1: f64, v_f: f64) -> f64 {
    v_f * v_f / (4.0 * d1)
}

/// Logistic rate (1/s) at which the measured front in [`impact_k8`] runs at
/// 3320 m/s. The asymptotic value `v_f²/(4d₁)` is about 20% lower because the
/// pulled front is still accelerating over the run.
pub const K8_RATE: f64 = 5.13e5;

fn glass() -> MaterialParams {
    MaterialParams {
        model: Model::Feng,
        rho0: 2500.0,
        theta0: 293.0,
        c1: 7.0e10,
        c2: 0.0,
        c3: 0.0,
        lambda: 1.0,
        d1: 6.6,
        d2: 13.2,
        b: 0.0,
        sigma0: 1.0e9,
        source_law: SourceLaw::Logistic {
            rate: K8_RATE,
            gamma_max: 1.0,
        },
    }
}

/// K8-like plate impact: a 2 GPa compressive traction on the left face of a
/// 12 cm bar, damage held at 1 on the impact face, front speed tuned to
/// 3320 m/s.
pub fn impact_k8() -> ScenarioConfig {
    let mut c = base("impact_k8", line(1200, 0.12, 0.0), glass(), 1e-9, 3e-5);
    c.bc.left = ElasticBc::Traction(Loading {
        value: -2.0e9,
        ramp: 5e-8,
        duration: None,
    });
    c.bc.gamma_left = DamageBc::Dirichlet(1.0);
    c.gauges = vec![Gauge { x: 0.02, y: 0.0 }];
    c.output.snapshot_every = 500;
    c.analysis.crack_tip_speed = Some(1500.0);
    c
}

/// [`impact_k8`] loaded below the activation threshold.
pub fn subthreshold() -> ScenarioConfig {
    let mut c = impact_k8();
    c.name = "subthreshold".into();
    c.t_end = 1e-5;
    c.bc.left = ElasticBc::Traction(Loading {
        value: -0.5e9,
        ramp: 5e-8,
        duration: None,
    });
    c.analysis.crack_tip_speed = None;
    c
}

/// Periodic smooth pulse with no dissipation (`λ = 0`), ten crossing times.
/// `d₁` only matters once `λ > 0` in the vanishing-dissipation study.
pub fn clifton_pulse(nx: usize) -> ScenarioConfig {
    let m = MaterialParams {
        lambda: 0.0,
        d1: 1e-3,
        ..unit_material()
    };
    let mut c = base("clifton_pulse", line(nx, 1.0, 0.0), m, 0.5 / nx as f64, 10.0);
    c.ic.u = gaussian(1e-3, 0.5, 0.05);
    c.ic.gamma = gaussian(1.0, 0.5, 0.05);
    c.bc = Boundaries {
        left: ElasticBc::Periodic,
        right: ElasticBc::Periodic,
        gamma_left: DamageBc::Periodic,
        gamma_right: DamageBc::Periodic,
    };
    c
}

/// Logistic damage spreading from a central seed with `d₂ = 4d₁`.
pub fn lateral_2d() -> ScenarioConfig {
    let g = Grid::D2(Grid2D {
        nx: 121,
        ny: 121,
        dx: 0.25,
        dy: 0.25,
        origin: [-15.125, -15.125],
    });
    let m = MaterialParams {
        d1: 1.0,
        d2: 4.0,
        source_law: SourceLaw::Logistic {
            rate: 1.0,
            gamma_max: 1.0,
        },
        ..unit_material()
    };
    let mut c = base("lateral_2d", g, m, 0.01, 6.0);
    c.ic.gamma = Profile::Gaussian {
        amplitude: 1.0,
        center: 0.0,
        width: 1.5,
        center_y: Some(0.0),
    };
    c.gauges = vec![Gauge { x: 6.0, y: 0.0 }, Gauge { x: 0.0, y: 6.0 }];
    c.output.snapshot_every = 50;
    c
}

/// Small smooth coupled problem for the variational verifier.
pub fn quick_with(nx: usize) -> ScenarioConfig {
    let m = MaterialParams {
        c2: 1.0,
        c3: 0.5,
        d1: 0.005,
        ..unit_material()
    };
    let mut c = base("quick", line(nx, 1.0, 0.0), m, 0.25 / nx as f64, 0.25);
    c.ic.u = Profile::Sine {
        amplitude: 0.01,
        modes: 1.0,
    };
    c.ic.gamma = gaussian(1.0, 0.5, 0.08);
    c.bc.left = ElasticBc::Fixed;
    c.bc.right = ElasticBc::Fixed;
    c.output.snapshot_every = 1;
    c
}

pub fn quick() -> ScenarioConfig {
    quick_with(64)
}

/// Every shipped scenario with its file name.
pub fn shipped() -> Vec<(&'static str, ScenarioConfig)> {
    vec![
        ("standing_wave.toml", standing_wave(64)),
        ("heat_kernel.toml", heat_kernel(320)),
        ("kpp_front.toml", kpp_front()),
        ("impact_k8.toml", impact_k8()),
        ("subthreshold.toml", subthreshold()),
        ("clifton_pulse.toml", clifton_pulse(1024)),
        ("lateral_2d.toml", lateral_2d()),
        ("quick.toml", quick()),
    ]
}
