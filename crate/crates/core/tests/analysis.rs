use failwave::analysis::*;
use failwave::grid::{Grid, Grid1D};
use failwave::solver::{self, GaugeSample, GaugeTrace, Snapshot};
use failwave::verification::kpp_check;
use failwave::{scenarios, Error};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn predictor_examples() {
    assert!((predict_width(6.6, 3320.0).unwrap() - 1.99e-3).abs() < 5e-6);
    assert!((predict_width(7.4, 3090.0).unwrap() - 2.39e-3).abs() < 5e-6);
    assert!((predict_width(13.2, 3320.0).unwrap() - 3.98e-3).abs() < 5e-6);
    assert_eq!(predict_width(6.6, 0.0), Err(Error::NonpositiveSpeed(0.0)));
    assert!(matches!(predict_tau(-1.0, 3320.0), Err(Error::InvalidValue(..))));
    assert!((lateral_speed(4.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn table_report_carries_published_values() {
    let rep = table_report(&builtin_presets()).unwrap();
    let k8 = &rep.rows[0];
    assert_eq!(k8.preset.name, "K8");
    assert!(rel(k8.tau_pred, 6.6 / 3320f64.powi(2)) < 1e-15);
    assert!((k8.tau_rel_diff - (k8.tau_pred - 0.75e-6) / 0.75e-6).abs() < 1e-15);
    let text = rep.to_text();
    assert!(text.contains("0.6e-6") && text.contains("0.2e-2"), "{text}");
    assert_eq!(rep.to_csv().lines().count(), 3);

    let mut bad = builtin_presets();
    bad[1].v_f = -3090.0;
    assert_eq!(table_report(&bad), Err(Error::NonpositiveSpeed(-3090.0)));
}

fn heaviside_snapshots(v: f64, dt_snap: f64) -> (Grid, Vec<Snapshot>) {
    let g = Grid::D1(Grid1D {
        nx: 800,
        dx: 0.05,
        origin: 0.0,
    });
    let snaps = (0..20)
        .map(|k| {
            let t = 1.0 + k as f64 * dt_snap;
            let gamma: Vec<f64> = (0..g.nx()).map(|i| if g.x(i) < v * t { 1.0 } else { 0.0 }).collect();
            Snapshot {
                step: k,
                time: t,
                u: vec![0.0; g.len()],
                v: vec![0.0; g.len()],
                s: vec![0.0; g.len()],
                z: vec![0.0; g.len()],
                active: vec![true; g.len()],
                gamma,
            }
        })
        .collect();
    (g, snaps)
}

#[test]
fn manufactured_front_speed() {
    let (g, snaps) = heaviside_snapshots(2.0, 0.5);
    let f = track_front(&g, &snaps, 1.0, 0.5).unwrap();
    assert!((f.v_f - 2.0).abs() <= g.dx() / 0.5, "{}", f.v_f);
    assert_eq!(f.positions.len(), 20);
}

#[test]
fn quiescent_run_has_no_front() {
    let mut cfg = scenarios::subthreshold();
    cfg.t_end = 2e-6;
    let out = solver::run(&cfg).unwrap();
    assert_eq!(track_front(&cfg.grid, &out.snapshots, 1.0, 0.5).unwrap_err(), Error::NoFrontDetected);
}

fn trace(times: &[f64], signal: &[f64]) -> GaugeTrace {
    GaugeTrace {
        x: 0.0,
        y: 0.0,
        cell: 0,
        samples: times
            .iter()
            .zip(signal)
            .map(|(t, s)| GaugeSample {
                t: *t,
                s: 0.0,
                gamma: 0.0,
                sigma_lateral_proxy: *s,
            })
            .collect(),
    }
}

#[test]
fn rise_times() {
    let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
    let sig: Vec<f64> = times.iter().map(|t| 1.0 - (-t).exp()).collect();
    let exact = 10f64.ln() - (10.0f64 / 9.0).ln();
    assert!((measure_rise_time(&trace(&times, &sig), 0.1, 0.9).unwrap() - exact).abs() < 1e-3);

    let step: Vec<f64> = times.iter().map(|t| if *t > 5.0 { 3.0 } else { 0.0 }).collect();
    assert!(measure_rise_time(&trace(&times, &step), 0.1, 0.9).unwrap() <= 0.01 + 1e-15);

    let ramp: Vec<f64> = times.clone();
    assert_eq!(measure_rise_time(&trace(&times, &ramp), 0.1, 0.9), Err(Error::NoPlateau));
}

#[test]
fn kpp_front_speed() {
    let (_, m) = kpp_check().unwrap();
    assert!(rel(m.v_f, 2.0) < 0.1, "v_f {}", m.v_f);
    assert!(m.fit_r2 > 0.999);
}

#[test]
fn clifton_study() {
    let mut base = scenarios::clifton_pulse(256);
    base.t_end = 1.0;
    let rows = clifton_limit_study(&base, &[1e-2, 1e-3, 1e-4, 0.0]).unwrap();
    assert_eq!(rows.iter().map(|r| r.lambda).collect::<Vec<_>>(), vec![1e-2, 1e-3, 1e-4, 0.0]);
    let s = dissipation_slope(&rows).unwrap();
    assert!((s - 1.0).abs() < 0.1, "slope {s}");
    let zero = rows[3];
    assert_eq!(zero.entropy, 0.0);
    assert_eq!(zero.dissipated, 0.0);
    assert!(rows.windows(2).all(|w| w[1].dissipated < w[0].dissipated));
    assert!(clifton_limit_study(&base, &[]).unwrap().is_empty());
    assert_eq!(clifton_csv(&rows).lines().count(), 5);
}

#[test]
#[ignore = "the logistic front's 10-90 rise is set by r, not d1/v_f^2; about 14x off, see README"]
fn k8_rise_time_matches_table() {
    let cfg = scenarios::impact_k8();
    let out = solver::run(&cfg).unwrap();
    let m = wave_metrics(&cfg, &out).unwrap();
    assert!(rel(m.tau, 0.6e-6) < 0.35, "tau {:e}", m.tau);
}

proptest! {
    #[test]
    fn predictor_round_trip(d1 in 1e-3f64..1e2, v in 1e-1f64..1e4) {
        let tau = predict_tau(d1, v).unwrap();
        prop_assert!(rel((d1 / tau).sqrt(), v) < 1e-12);
        prop_assert!(rel(predict_width(d1, v).unwrap(), v * tau) < 1e-12);
    }

    #[test]
    fn fit_recovers_lines(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| a * x + b).collect();
        let (s, i, _) = linear_fit(&x, &y);
        prop_assert!((s - a).abs() < 1e-9 * (1.0 + a.abs()));
        prop_assert!((i - b).abs() < 1e-8 * (1.0 + b.abs() + a.abs()));
    }
}
