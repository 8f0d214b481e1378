//! Acceptance criteria. Prints one PASS/FAIL line per criterion with the
//! measured values, the tolerance and the wall time, then exits non-zero if
//! any criterion failed.

use std::time::{Duration, Instant};

use failwave::analysis::{clifton_limit_study, dissipation_slope, table_report, k8_preset, soda_lime_preset};
use failwave::config::{DamageScheme, Profile};
use failwave::constitutive::{affinity, flux, free_energy, stress};
use failwave::params::{MaterialParams, Model, SourceLaw};
use failwave::solver::{self, ADMISSIBILITY_RTOL};
use failwave::verification::{
    diffusion_convergence, elastic_convergence, kpp_check, variance_growth_slope, variational_refinement,
};
use failwave::{scenarios, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn tables() -> Result<Outcome> {
    const TOL: f64 = 0.02;
    let rep = table_report(&[k8_preset(), soda_lime_preset()])?;
    // Theoretical rows of the published tables.
    let expected = [(0.6e-6, 2.0e-3), (0.8e-6, 2.4e-3)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (row, (tau, delta)) in rep.rows.iter().zip(expected) {
        let (et, ed) = (rel(row.tau_pred, tau), rel(row.delta1_pred, delta));
        pass &= et <= TOL && ed <= TOL;
        parts.push(format!(
            "{}: tau {:.4e} vs {tau:e} ({:.2}%), delta1 {:.4e} vs {delta:e} ({:.2}%)",
            row.preset.name,
            row.tau_pred,
            100.0 * et,
            row.delta1_pred,
            100.0 * ed
        ));
    }
    outcome(pass, format!("{}; tolerance {}%", parts.join("; "), 100.0 * TOL))
}

fn front_speed() -> Result<Outcome> {
    const SPEED_TOL: f64 = 0.10;
    const PREDICTOR_TOL: f64 = 0.35;
    let (cfg, m) = kpp_check()?;
    let exact = match cfg.material.source_law {
        SourceLaw::Logistic { rate, .. } => 2.0 * (cfg.material.d1 * rate).sqrt(),
        SourceLaw::LinearDecay => f64::NAN,
    };
    let e_speed = rel(m.v_f, exact);
    let e_pred = rel(m.v_f_predicted, m.v_f);
    outcome(
        e_speed <= SPEED_TOL && e_pred <= PREDICTOR_TOL,
        format!(
            "v_f {:.4} vs {exact} ({:.2}%, tol {}%); sqrt(d1/tau) {:.4} with tau_10-90 {:.4} vs v_f ({:.1}%, tol {}%)",
            m.v_f,
            100.0 * e_speed,
            100.0 * SPEED_TOL,
            m.v_f_predicted,
            m.tau,
            100.0 * e_pred,
            100.0 * PREDICTOR_TOL
        ),
    )
}

fn elastic() -> Result<Outcome> {
    const ORDER: f64 = 1.9;
    let r = elastic_convergence(&[64, 128, 256])?;
    outcome(r.min_order() >= ORDER, format!("orders {:?} (min {ORDER})", r.orders))
}

fn diffusion() -> Result<Outcome> {
    const ORDER: f64 = 1.9;
    const SLOPE_TOL: f64 = 0.01;
    let r = diffusion_convergence(&[80, 160, 320])?;
    let cfg = scenarios::heat_kernel(320);
    let out = solver::run(&cfg)?;
    let slope = variance_growth_slope(&cfg, &out)?;
    let target = 2.0 * cfg.material.d1;
    let e = rel(slope, target);
    outcome(
        r.min_order() >= ORDER && e <= SLOPE_TOL && cfg.damage_scheme == DamageScheme::CrankNicolson,
        format!(
            "CN orders {:?} (min {ORDER}); variance slope {slope:.6} vs {target} ({:.3}%, tol {}%)",
            r.orders,
            100.0 * e,
            100.0 * SLOPE_TOL
        ),
    )
}

fn admissibility() -> Result<Outcome> {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for (name, cfg) in scenarios::shipped() {
        let out = if cfg.material.lambda == 0.0 {
            solver::run_clifton(&cfg)?
        } else {
            solver::run(&cfg)?
        };
        let (min, peak) = out.admissibility_margin();
        let monotone = out.reports.windows(2).all(|w| w[1].energy.entropy >= w[0].energy.entropy);
        let ok = min >= -ADMISSIBILITY_RTOL * peak && monotone;
        if peak > 0.0 {
            worst = worst.min(min / peak);
        }
        if !ok {
            failed.push(name);
        }
        pass &= ok;
    }
    outcome(
        pass,
        format!(
            "{} scenarios; worst min(Z*dG/dt)/peak {worst:.3e} (floor -{ADMISSIBILITY_RTOL:e}); entropy nondecreasing; failing {failed:?}",
            scenarios::shipped().len()
        ),
    )
}

fn clifton() -> Result<Outcome> {
    const SLOPE_TOL: f64 = 0.1;
    const DRIFT: f64 = 1e-6;
    let base = scenarios::clifton_pulse(1024);
    let rows = clifton_limit_study(&base, &[1e-2, 1e-3, 1e-4])?;
    let slope = dissipation_slope(&rows).unwrap_or(f64::NAN);
    let cons = solver::run_clifton(&base)?;
    let drift = cons.relative_imbalance();
    let crossings = base.t_end / base.grid.length_x();
    outcome(
        (slope - 1.0).abs() <= SLOPE_TOL && drift < DRIFT && crossings >= 10.0 && base.grid.dx() <= 1.0 / 1024.0,
        format!(
            "dissipation slope {slope:.4} (1 ± {SLOPE_TOL}); lambda = 0 drift {drift:.3e} over {crossings} crossings at dx = 1/{} (< {DRIFT:e})",
            base.grid.nx()
        ),
    )
}

fn variational() -> Result<Outcome> {
    const RATIO: f64 = 3.5;
    const NODAL: f64 = 1e-10;
    let s = variational_refinement(&scenarios::quick(), 3)?;
    let ratios = s.ratios();
    let ok = ratios.iter().all(|(u, g)| *u >= RATIO && *g >= RATIO) && s.max_nodal_mismatch() < NODAL;
    outcome(
        ok && s.levels.len() == 3,
        format!(
            "ratios (U, Gamma) {ratios:.3?} (min {RATIO}); nodal mismatch {:.2e} (< {NODAL:e})",
            s.max_nodal_mismatch()
        ),
    )
}

fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn gradients() -> Result<Outcome> {
    const TOL: f64 = 1e-6;
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = [0.0f64; 2];
    for (k, model) in [Model::Feng, Model::Linear].into_iter().enumerate() {
        for _ in 0..100 {
            let p = MaterialParams {
                model,
                rho0: rng.gen_range(0.5..3.0),
                c1: rng.gen_range(0.5..3.0),
                c2: rng.gen_range(0.0..3.0),
                c3: if model == Model::Feng { rng.gen_range(0.0..3.0) } else { 0.0 },
                lambda: rng.gen_range(0.1..3.0),
                d1: rng.gen_range(0.0..2.0),
                d2: rng.gen_range(0.0..2.0),
                b: if model == Model::Linear { rng.gen_range(-2.0..2.0) } else { 0.0 },
                ..Default::default()
            };
            let ux = rng.gen_range(-0.8..0.8);
            let g = rng.gen_range(-1.5..1.5);
            let grad = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let b = flux(grad, &p);
            let pairs = [
                (fd(|e| free_energy(e, g, grad, &p), ux), stress(ux, g, &p)),
                (-fd(|x| free_energy(ux, x, grad, &p), g), affinity(ux, g, &p)),
                (-fd(|x| free_energy(ux, g, [x, grad[1]], &p), grad[0]), b[0]),
                (-fd(|x| free_energy(ux, g, [grad[0], x], &p), grad[1]), b[1]),
            ];
            for (num, exact) in pairs {
                worst[k] = worst[k].max((num - exact).abs() / exact.abs().max(1e-3));
            }
        }
    }
    outcome(
        worst.iter().all(|w| *w < TOL),
        format!("worst relative error Feng {:.2e}, Linear {:.2e} (< {TOL:e})", worst[0], worst[1]),
    )
}

fn bits(f: &[f64]) -> Vec<u64> {
    f.iter().map(|x| x.to_bits()).collect()
}

fn decoupling() -> Result<Outcome> {
    let feng = |gamma: Profile| {
        let mut cfg = scenarios::quick_with(32);
        cfg.ic.gamma = gamma;
        solver::run(&cfg)
    };
    let (a, b) = (
        feng(Profile::Zero)?,
        feng(Profile::Constant { value: 0.7 })?,
    );
    let feng_ok = a.snapshots.len() == b.snapshots.len()
        && a.snapshots
            .iter()
            .zip(&b.snapshots)
            .all(|(x, y)| bits(&x.u) == bits(&y.u) && bits(&x.v) == bits(&y.v))
        && bits(&a.state.gamma) != bits(&b.state.gamma);

    let linear = |amp: f64| {
        let mut cfg = scenarios::quick_with(32);
        cfg.material.model = Model::Linear;
        cfg.material.c3 = 0.0;
        cfg.material.b = 0.0;
        cfg.ic.u = Profile::Sine {
            amplitude: amp,
            modes: 2.0,
        };
        solver::run(&cfg)
    };
    let (c, d) = (linear(0.0)?, linear(0.05)?);
    let linear_ok = c.snapshots.iter().zip(&d.snapshots).all(|(x, y)| bits(&x.gamma) == bits(&y.gamma))
        && bits(&c.state.u) != bits(&d.state.u);
    outcome(
        feng_ok && linear_ok,
        format!("Feng (U, v) independent of Gamma0: {feng_ok}; Linear b = 0 Gamma independent of U0: {linear_ok} (bitwise)"),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 table reproduction", Some(Duration::from_secs(1)), tables),
        ("2 front-speed relation", Some(Duration::from_secs(60)), front_speed),
        ("3 elastic convergence", Some(Duration::from_secs(30)), elastic),
        ("4 diffusion convergence", Some(Duration::from_secs(30)), diffusion),
        ("5 thermodynamic admissibility", None, admissibility),
        ("6 Clifton limit", Some(Duration::from_secs(120)), clifton),
        ("7 variational verification", Some(Duration::from_secs(120)), variational),
        ("8 gradient checks", None, gradients),
        ("9 decoupling", None, decoupling),
    ];
    let mut failed = Vec::new();
    for (name, limit, check) in criteria {
        let t0 = Instant::now();
        let res = check();
        let dt = t0.elapsed();
        let in_time = limit.is_none_or(|l| dt < l);
        let (pass, detail) = match res {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
        println!(
            "{} criterion {name}: {detail}; runtime {:.2?}{budget}",
            if pass { "PASS" } else { "FAIL" },
            dt
        );
        if !pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: {} failing: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
