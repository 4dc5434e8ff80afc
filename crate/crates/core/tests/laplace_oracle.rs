use halfwalk::closed_form::{laplace_amplitude, limiting_amplitude, InvariantState};
use halfwalk::laplace::{final_value_estimate, numeric_laplace, tail_average_probability};
use halfwalk::lattice::{build_hamiltonian, HoppingPair, LatticeTopology};
use halfwalk::propagator::{evolve, Trajectory, WalkConfig};
use halfwalk::WalkError;
use num_complex::Complex64;

fn pair(a: f64, b: f64) -> HoppingPair {
    HoppingPair::new(a, b).unwrap()
}

fn trajectory(c: HoppingPair, n: usize, t_max: f64, stride: Option<usize>) -> Trajectory {
    let mut cfg = WalkConfig::new(c, LatticeTopology::half_line(n).unwrap())
        .with_t_max(t_max)
        .with_dt(1e-3);
    cfg.record_stride = stride;
    evolve(&cfg).unwrap()
}

#[test]
fn final_value_theorem_in_closed_form() {
    for c in [pair(1.0 / 3.0, 0.5), pair(-0.2, 0.9), pair(0.5, 1.0 / 3.0), pair(0.6, -0.6)] {
        for x in [0, 1, 2, 4] {
            let limit = limiting_amplitude(x, c);
            let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&s| (laplace_amplitude(x, s, c).unwrap() * s - limit).norm())
                .collect();
            assert!(errs[2] < 1e-3, "{c:?} x={x} {errs:?}");
            assert!(errs[2] <= errs[1] && errs[1] <= errs[0] + 1e-15, "{c:?} x={x} {errs:?}");
        }
    }
}

#[test]
fn invariant_state_is_annihilated_inside() {
    let c = pair(1.0 / 3.0, 0.5);
    let n = 60;
    let phi = InvariantState::normalized(c).unwrap().field(n);
    let h = build_hamiltonian(c, LatticeTopology::half_line(n).unwrap());
    let r = h.apply(&phi).unwrap();
    assert!(r.values()[..n - 1].iter().all(|v| v.norm() <= 1e-15));
    assert!(r.values()[n - 1].norm() > 0.0);
    assert!((phi.values()[0].norm() - 5f64.sqrt() / 3.0).abs() < 1e-15);
}

#[test]
fn numeric_transform_matches_closed_form() {
    let t_max = 50.0;
    for c in [pair(1.0 / 3.0, 0.5), pair(0.5, 1.0 / 3.0)] {
        let traj = trajectory(c, 200, t_max, None);
        for s in [0.5, 1.0, 2.0, 5.0] {
            for x in 0..4 {
                let got = numeric_laplace(&traj, s, x).unwrap();
                let want = laplace_amplitude(x, s, c).unwrap();
                let tol = 1e-3 + (-s * t_max).exp() / s;
                assert!((got.value - want).norm() < tol, "{c:?} s={s} x={x}");
                assert!((got.tail_bound - (-s * t_max).exp() / s).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn quadrature_error_shrinks_with_sampling() {
    let c = pair(1.0 / 3.0, 0.5);
    let want = laplace_amplitude(0, 1.0, c).unwrap();
    let errs: Vec<f64> = [400, 200, 100]
        .iter()
        .map(|&k| {
            let traj = trajectory(c, 100, 40.0, Some(k));
            (numeric_laplace(&traj, 1.0, 0).unwrap().value - want).norm()
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // Simpson: halving the step cuts the error about sixteenfold once the tail is negligible.
    assert!(errs[0] / errs[1] > 8.0, "{errs:?}");
}

#[test]
fn final_value_estimates_follow_the_phase() {
    let loc = trajectory(pair(1.0 / 3.0, 0.5), 500, 500.0, None);
    let est = final_value_estimate(&loc, 0, None).unwrap();
    assert!((est.value - Complex64::new(5.0 / 9.0, 0.0)).norm() < 0.05, "{est:?}");

    let deloc = trajectory(pair(0.5, 1.0 / 3.0), 500, 500.0, None);
    let est = final_value_estimate(&deloc, 0, None).unwrap();
    assert!(est.value.norm() < 0.05, "{est:?}");
}

#[test]
fn small_s_without_enough_time_is_refused() {
    let traj = trajectory(pair(1.0 / 3.0, 0.5), 100, 20.0, None);
    let err = final_value_estimate(&traj, 0, Some(&[0.05, 0.01])).unwrap_err();
    assert!(matches!(err, WalkError::TailDominates { .. }), "{err:?}");
    assert!(matches!(numeric_laplace(&traj, 0.0, 0), Err(WalkError::NonPositiveS(_))));
    assert!(matches!(numeric_laplace(&traj, 1.0, 100), Err(WalkError::SiteOutOfRange { .. })));
}

#[test]
fn tail_average_of_a_stationary_state() {
    let c = pair(0.25, -0.75);
    let n = 80;
    let phi = InvariantState::normalized(c).unwrap().field(n);
    let cfg = WalkConfig::new(c, LatticeTopology::half_line(n).unwrap())
        .with_t_max(10.0)
        .with_initial(halfwalk::propagator::InitialState::Custom(phi.clone()));
    let traj = evolve(&cfg).unwrap();
    let avg = tail_average_probability(&traj, 2, (5.0, 10.0)).unwrap();
    assert!((avg - phi.probability(2)).abs() < 1e-10);
}
