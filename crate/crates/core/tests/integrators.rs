use nalgebra::DVector;

use lrmech::batch::{par_map, seq_map};
use lrmech::error::{Error, Result};
use lrmech::integrators::{integrate, integrate_reparametrized, resample, retime_trajectory, IntegratorConfig, Method};
use lrmech::liecore::{orthogonality_defect, wedge};
use lrmech::phase::{PhasePoint, PhaseVelocity, StateLayout, System, SystemKind};
use lrmech::sampling::Sampler;
use lrmech::scenarios::{random_cotangent_state, random_scenario, random_special};
use lrmech::systems::{CotangentSystem, LStarSystem, LrSystem, RubberChaplyginSystem};

mod common;
use common::omega_of;

fn free_top(seed: u64) -> (LrSystem, PhasePoint) {
    let mut s = Sampler::new(seed);
    let sys = LrSystem::free_top(s.rigid_body_inertia(3, 0.5, 2.0));
    let x0 = sys.state(s.rotation(3).into_matrix(), &s.skew(3, 1.0));
    (sys, x0)
}

#[test]
fn zero_steps_give_single_state() {
    let (sys, x0) = free_top(1);
    let traj = integrate(&sys, &x0, &IntegratorConfig::new(Method::LieRk4, 1e-3, 0)).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.states[0], x0);
}

#[test]
fn free_top_momentum_norm_over_long_run() {
    let (sys, x0) = free_top(2);
    for method in [Method::Rk4Projected, Method::LieRk4] {
        let traj = integrate(&sys, &x0, &IntegratorConfig::for_duration(method, 1e-3, 10.0)).unwrap();
        let mm = |y: &PhasePoint| {
            let m = sys.inertia().apply(&omega_of(y, 3)).unwrap();
            m.dot(&m)
        };
        let m0 = mm(&x0);
        let drift = traj.states.iter().map(|y| (mm(y) - m0).abs() / m0).fold(0.0, f64::max);
        assert!(drift < 1e-9, "{}: {drift:e}", method.name());
    }
}

#[test]
fn rubber_chaplygin_stays_orthogonal() {
    let mut s = Sampler::new(3);
    let sys = RubberChaplyginSystem::new(s.spd_inertia(3, 1.0, 3.0), 1.2, 0.8).unwrap();
    let g = s.rotation(3).into_matrix();
    let gamma = sys.gamma(&g);
    let w = wedge(&gamma, &s.tangent(&gamma, 1.0)).unwrap();
    let traj =
        integrate(&sys, &sys.state(g, &w), &IntegratorConfig::for_duration(Method::Rk4Projected, 1e-3, 10.0)).unwrap();
    let worst = traj.states.iter().map(|y| orthogonality_defect(&y.groups[0])).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn methods_agree_to_fourth_order() {
    let (sys, x0) = free_top(4);
    for h in [0.05, 0.025, 0.0125] {
        let a = integrate(&sys, &x0, &IntegratorConfig::for_duration(Method::Rk4Projected, h, 1.0)).unwrap();
        let b = integrate(&sys, &x0, &IntegratorConfig::for_duration(Method::LieRk4, h, 1.0)).unwrap();
        let dev = a.sup_distance(&b);
        assert!(dev < 10.0 * h.powi(4), "h={h}: {dev:e}");
    }
}

#[test]
fn runs_are_bit_identical() {
    let jobs: Vec<u64> = (0..4).collect();
    let run = |seed: &u64| {
        let sc = random_scenario(SystemKind::RubberSupport, 4, *seed).unwrap();
        integrate(sc.system.as_ref(), &sc.x0, &IntegratorConfig::new(Method::LieRk4, 1e-3, 500)).unwrap()
    };
    let a = par_map(&jobs, run);
    let b = seq_map(&jobs, run);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x, y);
    }
    assert_eq!(run(&7), run(&7));
}

#[test]
fn resample_reproduces_grid_states() {
    let (sys, x0) = free_top(5);
    let traj = integrate(&sys, &x0, &IntegratorConfig::new(Method::Rk4Projected, 1e-2, 50)).unwrap();
    let times: Vec<f64> = traj.times.iter().step_by(7).cloned().collect();
    let r = resample(&sys, &traj, &times).unwrap();
    for (t, y) in r.times.iter().zip(&r.states) {
        let i = (t / 1e-2).round() as usize;
        assert!(y.distance(&traj.states[i]) < 1e-13);
    }
}

#[test]
fn identity_weights_leave_time_unchanged() {
    let mut s = Sampler::new(6);
    let cot = CotangentSystem::new(s.spd_inertia(3, 1.0, 3.0), 1.0, 0.7).unwrap();
    let x0 = random_cotangent_state(&mut s, &cot, 1.0).unwrap();
    let cfg = IntegratorConfig::new(Method::Rk4Projected, 1e-3, 200);
    let r = integrate_reparametrized(&cot, &x0, &[1.0; 3], &cfg).unwrap();
    for (tau, t) in r.tau.iter().zip(&r.t) {
        assert!((tau - t).abs() < 1e-12);
    }
    let traj = integrate(&cot, &x0, &cfg).unwrap();
    let q = retime_trajectory(&cot, &traj, &[1.0; 3], 1e-3).unwrap();
    for (tau, t) in q.tau.iter().zip(&q.t) {
        assert!((tau - t).abs() < 1e-12);
    }
}

#[test]
fn reparametrization_paths_agree() {
    for seed in 0..3 {
        let mut s = Sampler::new(70 + seed);
        let n = 3;
        let (a, m, rho) = random_special(&mut s, n);
        let cot = CotangentSystem::special(&a, m, rho).unwrap();
        let x0 = random_cotangent_state(&mut s, &cot, 1.0).unwrap();
        let h = 1e-3;
        let direct =
            integrate_reparametrized(&cot, &x0, &a, &IntegratorConfig::for_duration(Method::Rk4Projected, h, 1.0))
                .unwrap();
        let in_t = integrate(&cot, &x0, &IntegratorConfig::for_duration(Method::Rk4Projected, h, 3.0)).unwrap();
        let retimed = retime_trajectory(&cot, &in_t, &a, h).unwrap();
        assert!(retimed.tau.len() >= direct.tau.len());
        let mut worst: f64 = 0.0;
        for i in 0..direct.tau.len() {
            assert!((direct.tau[i] - retimed.tau[i]).abs() < 1e-12);
            worst = worst.max((direct.t[i] - retimed.t[i]).abs());
            worst = worst.max((&direct.states[i].flat - &retimed.states[i].flat).amax());
        }
        assert!(worst < 1e-7, "seed {seed}: {worst:e}");
        // L* along the τ-trajectory
        let lstar = LStarSystem::new(&a).unwrap();
        let value = |x: &PhasePoint| {
            let gamma = x.flat.rows(0, n).into_owned();
            let xi = cot.velocity(&gamma, &x.flat.rows(n, n).into_owned()).unwrap();
            lstar.lagrangian(&gamma, &(xi * lstar.s(&gamma).sqrt()))
        };
        let l0 = value(&direct.states[0]);
        for x in &direct.states {
            assert!((value(x) - l0).abs() < 1e-8 * l0);
        }
    }
}

/// `ẋ = x²`, which blows up at `t = 1/x₀`.
struct Blowup;

impl System for Blowup {
    fn kind(&self) -> SystemKind {
        SystemKind::Lr
    }

    fn layout(&self) -> StateLayout {
        StateLayout { n: 1, groups: Vec::new(), flat: vec!["x".into()] }
    }

    fn eval(&self, x: &PhasePoint) -> Result<PhaseVelocity> {
        if x.flat[0] > 1e6 {
            return Err(Error::InvalidParameter("too large".into()));
        }
        Ok(PhaseVelocity { body: Vec::new(), flat: x.flat.map(|v| v * v) })
    }

    fn energy(&self, _x: &PhasePoint) -> Result<f64> {
        Ok(0.0)
    }
}

#[test]
fn failure_reports_step_and_partial_trajectory() {
    let x0 = PhasePoint::flat_only(DVector::from_element(1, 1.0));
    let err = integrate(&Blowup, &x0, &IntegratorConfig::new(Method::Rk4Projected, 1e-2, 500)).unwrap_err();
    assert!(err.step > 90 && err.step < 110, "step {}", err.step);
    assert_eq!(err.partial.len(), err.step);
    assert!(matches!(Error::from(err), Error::InvalidParameter(_)));
    let bad = integrate(&Blowup, &x0, &IntegratorConfig::new(Method::Rk4Projected, -1.0, 5)).unwrap_err();
    assert_eq!(bad.step, 0);
}

#[test]
fn method_names_round_trip() {
    for m in [Method::Rk4Projected, Method::LieRk4] {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("euler".parse::<Method>().is_err());
}
