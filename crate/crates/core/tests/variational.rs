use failwave::config::*;
use failwave::params::Model;
use failwave::solver;
use failwave::state::FieldState;
use failwave::variational::*;
use failwave::verification::variational_refinement;
use failwave::{scenarios, Error, ScenarioConfig};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn trajectory(cfg: &ScenarioConfig) -> DiscreteTrajectory {
    let out = solver::run(cfg).unwrap();
    DiscreteTrajectory::from_run(cfg, &out).unwrap()
}

#[test]
fn residuals_shrink_under_space_time_refinement() {
    let study = variational_refinement(&scenarios::quick(), 3).unwrap();
    for (ru, rg) in study.ratios() {
        assert!(ru >= 3.5 && rg >= 3.5, "ratios {ru} {rg}");
    }
    assert!(study.max_nodal_mismatch() < 1e-10, "{:e}", study.max_nodal_mismatch());
}

#[test]
fn nodal_reduction_reproduces_field_residuals() {
    let mut cfg = scenarios::quick_with(24);
    cfg.t_end = 0.05;
    let traj = trajectory(&cfg);
    let field = lagrange_residual(&traj).unwrap();
    let sys = reduce_to_generalized(&traj, &Basis::nodal(&cfg.grid)).unwrap();
    let gen = generalized_residual(&sys);
    assert_eq!(gen.times, field.times);
    for (a, b) in gen.norm_u.iter().zip(&field.norm_u).chain(gen.norm_gamma.iter().zip(&field.norm_gamma)) {
        assert!((a - b).abs() < 1e-10, "{a:e} vs {b:e}");
    }
}

fn modal_residual(refine: usize) -> f64 {
    let mut cfg = scenarios::quick_with(32);
    cfg.material.model = Model::Linear;
    cfg.material.c3 = 0.0;
    cfg.material.b = 0.0;
    cfg.bc.gamma_left = DamageBc::Dirichlet(0.0);
    cfg.bc.gamma_right = DamageBc::Dirichlet(0.0);
    cfg.ic.gamma = Profile::Sine {
        amplitude: 0.5,
        modes: 1.0,
    };
    cfg.dt /= refine as f64;
    let traj = trajectory(&cfg);
    let r = generalized_residual(&reduce_to_generalized(&traj, &Basis::sine(&cfg.grid, 1)).unwrap());
    r.max_norm_u().max(r.max_norm_gamma())
}

#[test]
fn first_mode_is_second_order_in_time() {
    let r: Vec<f64> = [1, 2, 4].iter().map(|&k| modal_residual(k)).collect();
    for w in r.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "{r:?}");
    }
}

#[test]
fn perturbed_trajectory_is_not_a_solution() {
    let cfg = scenarios::quick_with(64);
    let mut traj = trajectory(&cfg);
    let eps = 1e-3;
    let g = cfg.grid;
    for s in &mut traj.states {
        for i in 0..g.nx() {
            s.u[i] += eps * (std::f64::consts::PI * g.x(i)).sin();
        }
    }
    let p = &cfg.material;
    let c2 = p.c1 / p.rho0;
    let floor = eps * p.rho0 * std::f64::consts::PI.powi(2) * c2 / 2.0;
    let r = lagrange_residual(&traj).unwrap();
    assert!(r.norm_u.iter().all(|n| *n >= floor), "{:e} < {floor:e}", r.norm_u.iter().fold(f64::INFINITY, |a, b| a.min(*b)));
}

#[test]
fn generalized_forces_account_for_boundary_loads() {
    let mut cfg = scenarios::quick_with(64);
    cfg.bc.right = ElasticBc::Traction(Loading {
        value: 0.02,
        ramp: 0.0,
        duration: None,
    });
    cfg.bc.gamma_left = DamageBc::Dirichlet(0.3);
    cfg.bc.gamma_right = DamageBc::Dirichlet(0.6);
    cfg.body_force = Profile::Constant { value: 0.1 };
    let traj = trajectory(&cfg);
    let sys = reduce_to_generalized(&traj, &Basis::nodal(&cfg.grid)).unwrap();
    let (with, without) = (sys.residual(true), sys.residual(false));
    assert!(without.max_norm_u() >= 100.0 * with.max_norm_u(), "{:e} {:e}", without.max_norm_u(), with.max_norm_u());
    assert!(
        without.max_norm_gamma() >= 100.0 * with.max_norm_gamma(),
        "{:e} {:e}",
        without.max_norm_gamma(),
        with.max_norm_gamma()
    );
}

/// Smooth perturbation vanishing at both ends of the trajectory.
fn perturbation(traj: &DiscreteTrajectory, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = traj.cfg.grid.len();
    let au: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ag: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let last = (traj.states.len() - 1) as f64;
    let mut du = Vec::new();
    let mut dg = Vec::new();
    for (l, s) in traj.states.iter().enumerate() {
        let w = (std::f64::consts::PI * l as f64 / last).sin();
        du.push(au.iter().map(|a| w * a).collect());
        dg.push(ag.iter().zip(&s.active).map(|(a, act)| if *act { w * a } else { 0.0 }).collect());
    }
    (du, dg)
}

#[test]
fn action_is_stationary_along_solver_trajectories() {
    let mut cfg = scenarios::quick_with(32);
    cfg.t_end = 0.08;
    let traj = trajectory(&cfg);
    let (du, dg) = perturbation(&traj, 1);
    let v = action_variation(&traj, &du, &dg).unwrap();
    assert!((v.variation - v.residual_pairing).abs() < 1e-10, "{v:?}");

    // Off the solution the variation is large and still equals the pairing.
    let mut off = traj.clone();
    for s in &mut off.states {
        for (k, u) in s.u.iter_mut().enumerate() {
            *u += 1e-3 * (k as f64).cos();
        }
        for g in &mut s.gamma {
            *g *= 1.01;
        }
    }
    let v = action_variation(&off, &du, &dg).unwrap();
    assert!(v.residual_pairing.abs() > 1e-6, "{v:?}");
    assert!((v.variation - v.residual_pairing).abs() < 1e-8 * v.residual_pairing.abs(), "{v:?}");
}

#[test]
fn biot_variation_matches_generalized_dissipation() {
    let mut cfg = scenarios::quick_with(32);
    cfg.t_end = 0.03;
    let traj = trajectory(&cfg);
    let n = cfg.grid.len();
    let mut rng = StdRng::seed_from_u64(9);
    let modes: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let basis = Basis {
        u_modes: modes.clone(),
        gamma_modes: modes.clone(),
    };
    let sys = reduce_to_generalized(&traj, &basis).unwrap();
    let w = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
    for (l, lvl) in (2..traj.states.len() - 2).enumerate() {
        let qd: Vec<f64> = (0..4)
            .map(|m| (0..5).map(|k| w[k] * sys.q_gamma[lvl + k - 2][m]).sum::<f64>() / traj.dt)
            .collect();
        let gd: Vec<f64> = (0..n).map(|i| (0..4).map(|m| qd[m] * modes[m][i]).sum()).collect();
        let dq: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dgamma: Vec<f64> = (0..n).map(|i| (0..4).map(|m| dq[m] * modes[m][i]).sum()).collect();
        let lhs = dissipation_variation_at(&cfg, &gd, &dgamma).unwrap();
        let rhs: f64 = sys.dissipation_grad[l].iter().zip(&dq).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn dissipation_variation_examples() {
    let mut cfg = scenarios::quick();
    cfg.t_end = 0.02;
    let traj = trajectory(&cfg);
    let n = cfg.grid.len();
    assert!(dissipation_variation(&traj, &vec![0.0; n]).unwrap().iter().all(|v| *v == 0.0));
    assert!(matches!(dissipation_variation(&traj, &[1.0; 3]), Err(Error::ShapeMismatch { .. })));
    cfg.material.lambda = 1.0;
    let v = dissipation_variation_at(&cfg, &vec![2.0; n], &vec![3.0; n]).unwrap();
    assert!((v - 6.0).abs() < 1e-12);
}

#[test]
fn malformed_trajectories_are_rejected() {
    let cfg = scenarios::quick_with(8);
    let n = cfg.grid.len();
    let level = |k: usize| FieldState {
        time: k as f64 * cfg.dt,
        ..FieldState::zeros(n)
    };
    assert_eq!(DiscreteTrajectory::new(&cfg, vec![level(0)]).unwrap_err(), Error::TooFewLevels(1, 3));
    let mut bad = vec![level(0), level(1), level(2)];
    bad[1].gamma.pop();
    assert!(matches!(DiscreteTrajectory::new(&cfg, bad), Err(Error::ShapeMismatch { .. })));
    let uneven = vec![level(0), level(1), level(3)];
    assert!(matches!(DiscreteTrajectory::new(&cfg, uneven), Err(Error::InvalidValue(..))));
    let three = DiscreteTrajectory::new(&cfg, vec![level(0), level(1), level(2)]).unwrap();
    assert_eq!(lagrange_residual(&three).unwrap_err(), Error::TooFewLevels(3, 5));
    let basis = Basis {
        u_modes: vec![vec![1.0; n], vec![2.0; n]],
        gamma_modes: vec![vec![1.0; n]],
    };
    let five = DiscreteTrajectory::new(&cfg, (0..5).map(level).collect()).unwrap();
    assert!(matches!(reduce_to_generalized(&five, &basis), Err(Error::SingularBasis(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dissipation_is_relabel_invariant_and_linear_in_lambda(
        gd in proptest::collection::vec(-5.0f64..5.0, 16),
        lambda in 0.01f64..10.0,
        seed in any::<u64>(),
    ) {
        let mut cfg = scenarios::quick_with(16);
        cfg.material.lambda = lambda;
        let st = FieldState::zeros(16);
        let d = total_functionals(&cfg, &st, &gd).dissipation;
        let mut perm = gd.clone();
        let mut rng = StdRng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let dp = total_functionals(&cfg, &st, &perm).dissipation;
        prop_assert!((d - dp).abs() <= 1e-12 * d.abs().max(1e-300));
        cfg.material.lambda = 2.0 * lambda;
        let d2 = total_functionals(&cfg, &st, &gd).dissipation;
        prop_assert!((d2 - 2.0 * d).abs() <= 1e-12 * d.abs().max(1e-300));
    }
}
