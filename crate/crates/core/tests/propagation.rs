use halfwalk::lattice::{build_hamiltonian, HoppingPair, LatticeTopology};
use halfwalk::propagator::{evolve, propagate, AmplitudeField, Integrator, Trajectory, WalkConfig};
use num_complex::Complex64;

fn pair(a: f64, b: f64) -> HoppingPair {
    HoppingPair::new(a, b).unwrap()
}

fn run(c: HoppingPair, n: usize, integrator: Integrator, dt: f64, t_max: f64) -> Trajectory {
    let cfg = WalkConfig::new(c, LatticeTopology::half_line(n).unwrap())
        .with_integrator(integrator)
        .with_dt(dt)
        .with_t_max(t_max);
    evolve(&cfg).unwrap()
}

fn max_diff(a: &AmplitudeField, b: &AmplitudeField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn time_reversal_returns_to_start() {
    let c = pair(1.0 / 3.0, 0.5);
    let h = build_hamiltonian(c, LatticeTopology::half_line(200).unwrap());
    let start = AmplitudeField::delta_at_origin(200);
    let there = propagate(&h, &start, 60.0).unwrap();
    let back = propagate(&h, &there, -60.0).unwrap();
    assert!(max_diff(&start, &back) < 1e-8, "{}", max_diff(&start, &back));
    assert!((back.time() - 0.0).abs() < 1e-12);
}

#[test]
fn composition_of_steps() {
    let c = pair(-0.7, 0.4);
    let h = build_hamiltonian(c, LatticeTopology::half_line(120).unwrap());
    let start = AmplitudeField::delta_at_origin(120);
    let once = propagate(&h, &start, 7.5).unwrap();
    let mut twice = propagate(&h, &start, 2.5).unwrap();
    twice = propagate(&h, &twice, 5.0).unwrap();
    assert!(max_diff(&once, &twice) < 1e-12);
}

#[test]
fn euler_norm_never_decreases() {
    let traj = run(pair(1.0 / 3.0, 0.5), 100, Integrator::Euler, 1e-3, 10.0);
    let log = traj.norm_log();
    assert!(log.len() > 100);
    assert!(log.windows(2).all(|w| w[1] >= w[0]));
    assert!(log.last().unwrap() > &1.0);
}

#[test]
fn euler_tracks_reference_at_unit_time() {
    let c = pair(0.5, 0.5);
    let euler = run(c, 60, Integrator::Euler, 1e-4, 1.0);
    let reference = run(c, 60, Integrator::Reference, 1e-4, 1.0);
    let err = max_diff(euler.last(), reference.last());
    assert!(err < 1e-3, "{err}");
}

#[test]
fn euler_is_first_order() {
    let c = pair(1.0 / 3.0, 0.5);
    let reference = run(c, 60, Integrator::Reference, 1e-3, 2.0);
    let coarse = max_diff(run(c, 60, Integrator::Euler, 1e-3, 2.0).last(), reference.last());
    let fine = max_diff(run(c, 60, Integrator::Euler, 5e-4, 2.0).last(), reference.last());
    let ratio = coarse / fine;
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn sample_times_increase_and_start_at_initial_state() {
    let cfg = WalkConfig::new(pair(0.2, -0.9), LatticeTopology::half_line(40).unwrap())
        .with_t_max(3.0)
        .with_dt(0.01)
        .with_record_stride(7);
    let traj = evolve(&cfg).unwrap();
    let times = traj.times();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(times[0], 0.0);
    assert!((times.last().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(traj.samples()[0], AmplitudeField::delta_at_origin(40));
}

#[test]
fn finite_line_is_unitary() {
    let c = pair(0.3, 0.8);
    let topo = LatticeTopology::finite_line(50).unwrap();
    let cfg = WalkConfig::new(c, topo).with_t_max(40.0);
    let traj = evolve(&cfg).unwrap();
    assert!(traj.norm_drift() < 1e-10);
}

#[test]
fn stationary_amplitude_at_zero_time() {
    let traj = run(pair(0.3, 0.5), 20, Integrator::Reference, 1e-3, 0.0);
    assert_eq!(traj.samples().len(), 1);
    assert_eq!(traj.last().values()[0], Complex64::new(1.0, 0.0));
}
