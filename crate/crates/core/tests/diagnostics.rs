use nalgebra::DVector;
use proptest::prelude::*;

use lrmech::diagnostics::{
    chaplygin_measure_check, conservation_report, density_exponent_fit, epsilon_limit_study, euler_top_chart,
    lplusr_chart, lplusr_density, measure_divergence, reconstruct_contact, reconstruct_w, sym_to_coords,
    DEFAULT_FD_STEP,
};
use lrmech::integrators::{integrate, IntegratorConfig, Method, Trajectory};
use lrmech::liecore::{bivector_dim, wedge, SkewMatrix};
use lrmech::operators::{DensityChart, InertiaOperator, MeasureDensity};
use lrmech::phase::{Quantity, System, SystemKind};
use lrmech::sampling::Sampler;
use lrmech::scenarios::{random_coupled_params, random_scenario, random_special};
use lrmech::systems::multipliers::body_covectors;
use lrmech::systems::{CotangentSystem, CoupledReducedSystem, CoupledSystem, RubberChaplyginSystem};

fn cfg(h: f64, t: f64) -> IntegratorConfig {
    IntegratorConfig::for_duration(Method::Rk4Projected, h, t)
}

#[test]
fn single_state_has_no_drift() {
    let sc = random_scenario(SystemKind::Lplusr, 3, 1).unwrap();
    let traj = Trajectory::single(0.0, sc.x0.clone());
    let rep = conservation_report(sc.system.as_ref(), &traj, &[Quantity::Energy, Quantity::MomentumNorm]).unwrap();
    for e in &rep.entries {
        assert_eq!(e.max_abs_drift, 0.0);
        assert_eq!(e.max_rel_drift, 0.0);
    }
}

#[test]
fn first_trace_integral_counts_contacts() {
    let sc = random_scenario(SystemKind::Support, 4, 2).unwrap();
    let traj = integrate(sc.system.as_ref(), &sc.x0, &cfg(1e-3, 0.2)).unwrap();
    let q = Quantity::TraceIntegral { k: 1, mu: vec![1.0, 1.0] };
    for x in &traj.states {
        assert!((sc.system.quantity(&q, x).unwrap()[0] - 2.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reports_are_pure_and_monotone_in_prefix(seed in any::<u64>(), cut in 1usize..200) {
        let sc = random_scenario(SystemKind::Support, 3, seed).unwrap();
        let sys = sc.system.as_ref();
        let traj = integrate(sys, &sc.x0, &cfg(1e-2, 2.0)).unwrap();
        let qs = [Quantity::Energy, Quantity::TraceCoefficients { k: 3 }];
        let full = conservation_report(sys, &traj, &qs).unwrap();
        prop_assert_eq!(&full, &conservation_report(sys, &traj, &qs).unwrap());
        let prefix = Trajectory { times: traj.times[..cut].to_vec(), states: traj.states[..cut].to_vec() };
        let part = conservation_report(sys, &prefix, &qs).unwrap();
        for (a, b) in part.entries.iter().zip(&full.entries) {
            prop_assert!(a.max_abs_drift <= b.max_abs_drift);
        }
    }
}

#[test]
fn free_top_is_divergence_free() {
    let mut s = Sampler::new(3);
    for n in [3, 4] {
        let inertia = s.spd_inertia(n, 1.0, 3.0);
        let y = s.normal_vector(bivector_dim(n));
        let one = MeasureDensity::constant(DensityChart::EulerTop, 1.0);
        let est = measure_divergence(&euler_top_chart(&inertia), &one, &y, DEFAULT_FD_STEP).unwrap();
        assert!(est.value.abs() < 1e-6);
        assert!(est.warning.is_none());
    }
}

#[test]
fn divergence_is_linear_in_density() {
    let mut s = Sampler::new(4);
    let inertia = s.spd_inertia(3, 1.0, 3.0);
    let field = lplusr_chart(&inertia);
    let mu = lplusr_density(&inertia);
    let mut y = DVector::zeros(3 + 6);
    y.rows_mut(0, 3).copy_from(&s.normal_vector(3));
    y.rows_mut(3, 6).copy_from(&sym_to_coords(s.spd_inertia(3, 0.2, 2.0).matrix()));
    let a = measure_divergence(&field, &mu, &y, DEFAULT_FD_STEP).unwrap();
    assert!(a.value.abs() < 1e-5);
    // Against a density that is not invariant, scaling is visible.
    let wrong = MeasureDensity::constant(DensityChart::LplusR, 1.0);
    let b = measure_divergence(&field, &wrong, &y, DEFAULT_FD_STEP).unwrap();
    let c = measure_divergence(&field, &wrong.scaled(3.0), &y, DEFAULT_FD_STEP).unwrap();
    assert!(b.value.abs() > 1e-3);
    assert!((c.value - 3.0 * b.value).abs() < 1e-9 * b.value.abs().max(1.0));
}

#[test]
fn mismatched_chart_is_rejected() {
    let inertia = InertiaOperator::identity(3);
    let mu = MeasureDensity::constant(DensityChart::Lr, 1.0);
    assert!(measure_divergence(&euler_top_chart(&inertia), &mu, &DVector::zeros(3), 1e-5).is_err());
}

#[test]
fn isotropic_densities_are_constant() {
    let mut s = Sampler::new(5);
    let cot = CotangentSystem::special(&[1.0; 3], 0.8, 0.5).unwrap();
    let first = chaplygin_measure_check(&cot, &s.unit_vector(3).into_vector()).unwrap();
    for _ in 0..20 {
        let p = chaplygin_measure_check(&cot, &s.unit_vector(3).into_vector()).unwrap();
        assert!((p.general - first.general).abs() < 1e-13);
        assert!((p.special.unwrap() - first.special.unwrap()).abs() < 1e-13);
    }
}

#[test]
fn density_ratio_is_constant_for_special_inertia() {
    let mut s = Sampler::new(6);
    for n in [3, 4, 5] {
        let (a, m, rho) = random_special(&mut s, n);
        let cot = CotangentSystem::special(&a, m, rho).unwrap();
        let ratios: Vec<f64> = (0..100)
            .map(|_| {
                let p = chaplygin_measure_check(&cot, &s.unit_vector(n).into_vector()).unwrap();
                p.general / p.special.unwrap()
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(*r), h.max(*r)));
        assert!((hi - lo) / lo < 1e-8, "n={n} spread {:e}", (hi - lo) / lo);
        if n == 4 {
            let gammas: Vec<DVector<f64>> = (0..50).map(|_| s.unit_vector(n).into_vector()).collect();
            assert!((density_exponent_fit(&cot, &gammas).unwrap() + 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn epsilon_study_isotropic_is_exact() {
    let mut s = Sampler::new(7);
    let constraints = s.subspace(3, 1);
    let g0 = s.rotation(3).into_matrix();
    let w0 = s.skew_orthogonal_to(3, &body_covectors(&g0, &constraints), 1.0);
    let study =
        epsilon_limit_study(&InertiaOperator::identity(3), &constraints, &g0, &w0, &[1e2, 1e4], &cfg(1e-3, 1.0))
            .unwrap();
    for r in &study.rows {
        assert!(r.error < 1e-12, "{:e}", r.error);
    }
}

#[test]
fn epsilon_rate_is_close_to_one() {
    let mut s = Sampler::new(8);
    let inertia = s.spd_inertia(3, 1.0, 3.0);
    let constraints = s.subspace(3, 1);
    let g0 = s.rotation(3).into_matrix();
    let w0 = s.skew_orthogonal_to(3, &body_covectors(&g0, &constraints), 1.0);
    let study = epsilon_limit_study(&inertia, &constraints, &g0, &w0, &[1e2, 1e4, 1e6], &cfg(1e-3, 1.0)).unwrap();
    assert!(study.strictly_decreasing());
    assert!((study.slope + 1.0).abs() < 0.2, "slope {}", study.slope);
}

#[test]
fn contact_is_fixed_without_rotation() {
    let mut s = Sampler::new(9);
    let sys = RubberChaplyginSystem::new(s.spd_inertia(4, 1.0, 3.0), 1.0, 0.7).unwrap();
    let traj =
        integrate(&sys, &sys.state(s.rotation(4).into_matrix(), &SkewMatrix::zeros(4)), &cfg(1e-2, 1.0)).unwrap();
    for r in reconstruct_contact(&traj, 0.7).unwrap() {
        assert_eq!(r.amax(), 0.0);
    }
}

#[test]
fn contact_quadrature_converges_at_second_order() {
    let mut s = Sampler::new(10);
    let sys = RubberChaplyginSystem::new(s.spd_inertia(3, 1.0, 3.0), 1.0, 0.7).unwrap();
    let g = s.rotation(3).into_matrix();
    let gamma = sys.gamma(&g);
    let w = wedge(&gamma, &s.tangent(&gamma, 1.0)).unwrap();
    let x0 = sys.state(g, &w);
    let end = |h: f64| {
        let traj = integrate(&sys, &x0, &cfg(h, 2.0)).unwrap();
        reconstruct_contact(&traj, 0.7).unwrap().last().unwrap().clone()
    };
    let (r1, r2, r3) = (end(0.04), end(0.02), end(0.01));
    let reference = (&r3 * 4.0 - &r2) / 3.0;
    let e1 = (&r1 - &reference).norm();
    let e2 = (&r2 - &reference).norm();
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn reconstructed_w_matches_full_system() {
    let mut s = Sampler::new(11);
    for n in [3, 4] {
        let p = random_coupled_params(&mut s, n).unwrap();
        let full = CoupledSystem::new(p.clone()).unwrap();
        let reduced = CoupledReducedSystem::new(p.clone()).unwrap();
        let g = s.rotation(n).into_matrix();
        let w = s.skew_orthogonal_to(n, &body_covectors(&g, &p.h0), 1.0);
        let w0 = full.consistent_w(&g, &w, &s.skew(n, 1.0));
        let tf = integrate(&full, &full.state(g.clone(), &w, &w0), &cfg(1e-3, 1.0)).unwrap();
        let tr = integrate(&reduced, &reduced.state(g.clone(), &w), &cfg(1e-3, 1.0)).unwrap();
        let ws = reconstruct_w(&full, &tr, &w0).unwrap();
        let nb = bivector_dim(n);
        for ((xf, xr), wr) in tf.states.iter().zip(&tr.states).zip(&ws) {
            assert!((xf.flat.rows(nb, nb) - wr.coords()).amax() < 1e-7);
            // constraints hold algebraically for the rebuilt W
            let state = full.state(xr.groups[0].clone(), &SkewMatrix::from_coord_vector(n, &xr.flat).unwrap(), wr);
            let worst = full
                .constraint_residuals(&state)
                .unwrap()
                .iter()
                .filter(|r| r.0.starts_with("c-constr"))
                .map(|r| r.1.abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-12);
        }
        // With no kernel component the kernel part stays zero.
        let w0 = full.consistent_w(&g, &w, &SkewMatrix::zeros(n));
        let kernel = full.kernel();
        for wr in reconstruct_w(&full, &tr, &w0).unwrap() {
            assert!(kernel.project(&wr).max_abs() < 1e-14);
        }
    }
}
