use std::path::PathBuf;

use failwave::config::*;
use failwave::grid::{Grid, Grid1D, Grid2D};
use failwave::params::{MaterialParams, Model, SourceLaw};
use failwave::{build_scenario, initialize_state, io, scenarios, Error};
use proptest::prelude::*;

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Equal up to the last bits of the spacing, which the files write as
/// round decimals.
fn assert_same(file: &ScenarioConfig, built: &ScenarioConfig) {
    let (a, b) = (file.grid, built.grid);
    assert_eq!(a.nx(), b.nx());
    assert_eq!(a.ny(), b.ny());
    assert!(((a.dx() - b.dx()) / b.dx()).abs() < 1e-12);
    assert!(((a.dy() - b.dy()) / b.dy()).abs() < 1e-12);
    let mut f = file.clone();
    f.grid = built.grid;
    assert_eq!(&f, built);
}

#[test]
fn shipped_files_match_builtin_scenarios() {
    for (name, built) in scenarios::shipped() {
        let file = io::load_scenario(scenario_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_same(&file, &built);
    }
}

#[test]
fn shipped_scenarios_are_valid_and_round_trip() {
    for (name, cfg) in scenarios::shipped() {
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(build_scenario(&cfg.to_toml()).unwrap(), cfg, "{name}");
    }
}

#[test]
fn missing_section_key_is_named() {
    let raw = "[grid]\nnx = 4\ndx = 1.0\n[material]\nrho0 = 1.0\nc1 = 1.0\n";
    assert_eq!(build_scenario(raw), Err(Error::MissingKey("material.lambda".into())));
    let raw = "[grid]\nnx = 4\ndx = 1.0\n[material]\nrho0 = 1.0\nc1 = 1.0\nlambda = 1.0\n";
    assert_eq!(build_scenario(raw), Err(Error::MissingKey("time".into())));
}

#[test]
fn unknown_kinds_are_rejected() {
    let mut cfg = scenarios::quick().to_toml();
    cfg = cfg.replace("kind = \"sine\"", "kind = \"square\"");
    assert!(matches!(build_scenario(&cfg), Err(Error::InvalidValue(..))));
}

#[test]
fn tabulated_initial_data() {
    let mut cfg = scenarios::quick_with(4);
    cfg.ic.gamma = Profile::Table {
        values: vec![0.0, 0.5, 0.0, 0.0],
    };
    let st = initialize_state(&cfg).unwrap();
    assert_eq!(st.gamma, vec![0.0, 0.5, 0.0, 0.0]);
    assert_eq!(build_scenario(&cfg.to_toml()).unwrap(), cfg);
    assert!(cfg.refined(2).is_err());
    cfg.ic.u = Profile::Table { values: vec![0.0; 3] };
    assert!(matches!(initialize_state(&cfg), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn activation_mask_from_initial_stress() {
    let mut cfg = scenarios::quick_with(16);
    cfg.material.sigma0 = 0.02;
    cfg.ic.gamma = Profile::Zero;
    let st = initialize_state(&cfg).unwrap();
    let s = failwave::solver::elastic::cell_stress(&cfg.grid, &st.u, &cfg.bc, &cfg.material, 0.0);
    for (a, s) in st.active.iter().zip(&s) {
        assert_eq!(*a, s.abs() >= 0.02);
    }
    assert!(st.active.iter().any(|a| *a) && st.active.iter().any(|a| !*a));
}

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        Just(Profile::Zero),
        finite(-2.0, 2.0).prop_map(|value| Profile::Constant { value }),
        (finite(-1.0, 1.0), 1u32..4).prop_map(|(amplitude, m)| Profile::Sine {
            amplitude,
            modes: m as f64
        }),
        (finite(0.0, 2.0), finite(0.0, 1.0), finite(0.05, 0.5), proptest::option::of(finite(0.0, 1.0))).prop_map(
            |(amplitude, center, width, center_y)| Profile::Gaussian {
                amplitude,
                center,
                width,
                center_y
            }
        ),
        (finite(0.0, 1.0), finite(0.0, 1.0), finite(0.0, 1.0)).prop_map(|(left, right, at)| Profile::Step {
            left,
            right,
            at
        }),
    ]
}

fn loading() -> impl Strategy<Value = Loading> {
    (finite(-1e9, 1e9), finite(0.0, 1e-3), proptest::option::of(finite(1e-3, 1.0))).prop_map(
        |(value, ramp, duration)| Loading {
            value,
            ramp,
            duration,
        },
    )
}

fn elastic_bc() -> impl Strategy<Value = ElasticBc> {
    prop_oneof![
        Just(ElasticBc::Fixed),
        Just(ElasticBc::Free),
        loading().prop_map(ElasticBc::Traction),
        loading().prop_map(ElasticBc::Velocity),
    ]
}

fn damage_bc() -> impl Strategy<Value = DamageBc> {
    prop_oneof![Just(DamageBc::ZeroFlux), finite(0.0, 1.0).prop_map(DamageBc::Dirichlet)]
}

fn material() -> impl Strategy<Value = MaterialParams> {
    (
        (any::<bool>(), finite(1.0, 3000.0), finite(1.0, 400.0), finite(1e-3, 1e11)),
        (finite(0.0, 10.0), finite(0.0, 10.0), finite(0.0, 5.0), finite(0.0, 10.0)),
        (finite(0.0, 10.0), finite(-1.0, 1.0), finite(0.0, 1e9)),
        proptest::option::of((finite(1e-3, 1e6), finite(0.1, 2.0))),
    )
        .prop_map(|((linear, rho0, theta0, c1), (c2, c3, lambda, d1), (d2, b, sigma0), logistic)| {
            let model = if linear { Model::Linear } else { Model::Feng };
            MaterialParams {
                model,
                rho0,
                theta0,
                c1,
                c2,
                c3: if linear { 0.0 } else { c3 },
                lambda,
                d1,
                d2,
                b: if linear { b } else { 0.0 },
                sigma0,
                source_law: match logistic {
                    Some((rate, gamma_max)) => SourceLaw::Logistic { rate, gamma_max },
                    None => SourceLaw::LinearDecay,
                },
            }
        })
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    let grid = prop_oneof![
        (2usize..64, finite(1e-3, 1.0), finite(-1.0, 1.0)).prop_map(|(nx, dx, origin)| Grid::D1(Grid1D {
            nx,
            dx,
            origin
        })),
        (2usize..16, 2usize..16, finite(1e-3, 1.0), finite(1e-3, 1.0)).prop_map(|(nx, ny, dx, dy)| {
            Grid::D2(Grid2D {
                nx,
                ny,
                dx,
                dy,
                origin: [0.0, -0.5],
            })
        }),
    ];
    (
        grid,
        material(),
        (finite(1e-6, 1e-2), 1usize..50, any::<bool>()),
        (profile(), profile(), profile(), profile()),
        (elastic_bc(), elastic_bc(), damage_bc(), damage_bc()),
        (0usize..10, proptest::option::of(finite(1.0, 1e4)), finite(0.1, 0.9), proptest::option::of("[a-z]{1,8}")),
        proptest::collection::vec((finite(0.0, 1.0), finite(0.0, 1.0)), 0..3),
    )
        .prop_map(|(grid, material, (dt, n, explicit), (u, v, gamma, body), (l, r, gl, gr), misc, gauges)| {
            let (snapshot_every, v0, front_level, dir) = misc;
            // Gauges at fractions of the extent so they always fall inside.
            let gauges = gauges
                .into_iter()
                .map(|(fx, fy)| Gauge {
                    x: grid.origin_x() + fx * grid.length_x() * 0.999,
                    y: if grid.is_2d() { -0.5 + fy * grid.ny() as f64 * grid.dy() * 0.999 } else { 0.0 },
                })
                .collect();
            ScenarioConfig {
                name: "prop".into(),
                grid,
                material,
                dt,
                t_end: dt * n as f64,
                damage_scheme: if explicit { DamageScheme::Explicit } else { DamageScheme::CrankNicolson },
                ic: InitialData { u, v, gamma },
                bc: Boundaries {
                    left: l,
                    right: r,
                    gamma_left: gl,
                    gamma_right: gr,
                },
                body_force: body,
                gauges,
                output: OutputSpec { snapshot_every, dir },
                analysis: AnalysisSpec {
                    front_level,
                    crack_tip_speed: v0,
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emitted_config_round_trips(cfg in scenario()) {
        prop_assume!(cfg.validate().is_ok());
        let back = build_scenario(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(io::config_hash(&back), io::config_hash(&cfg));
    }

    #[test]
    fn initialization_is_deterministic(cfg in scenario()) {
        prop_assume!(cfg.validate().is_ok());
        let a = initialize_state(&cfg).unwrap();
        let b = initialize_state(&cfg).unwrap();
        prop_assert_eq!(a.u.len(), cfg.grid.len());
        prop_assert_eq!(a.time, 0.0);
        let bits = |s: &failwave::FieldState| -> Vec<u64> {
            s.u.iter().chain(&s.v).chain(&s.gamma).map(|x| x.to_bits()).collect()
        };
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a.active, b.active);
    }
}
