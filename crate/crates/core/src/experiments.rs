//! Phase-diagram sweeps, front tracking and convergence studies.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{classify_phase, limit_measure, Phase};
use crate::error::{Result, WalkError};
use crate::laplace::{default_window, tail_average_probability};
use crate::lattice::{build_hamiltonian, HoppingPair, LatticeTopology};
use crate::propagator::{
    evolve, AmplitudeField, Integrator, ReferencePropagator, Trajectory, WalkConfig, Workspace,
    LEAK_THRESHOLD,
};

/// Tail-averaged `P(X_t = 0)` above this reads as localized.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Below `epsilon / DELOCALIZED_DIVISOR` reads as delocalized; in between is inconclusive.
pub const DELOCALIZED_DIVISOR: f64 = 20.0;
pub const DEFAULT_FRONT_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_SWEEP_T_MAX: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Localized,
    Delocalized,
    Inconclusive,
}

impl Observed {
    pub fn as_str(self) -> &'static str {
        match self {
            Observed::Localized => "localized",
            Observed::Delocalized => "delocalized",
            Observed::Inconclusive => "inconclusive",
        }
    }

    /// True when a definite reading disagrees with `predicted`.
    pub fn contradicts(self, predicted: Phase) -> bool {
        matches!(
            (self, predicted),
            (Observed::Localized, Phase::Delocalized) | (Observed::Delocalized, Phase::Localized)
        )
    }
}

/// One grid point of the phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub couplings: HoppingPair,
    pub predicted: Phase,
    pub observed: Observed,
    /// Tail-averaged `P(X_t = 0)`.
    pub indicator_value: f64,
    pub boundary_leak: f64,
    /// Definite observation contradicting the prediction.
    pub flagged: bool,
}

/// Simulation budget and thresholds for [`sweep_phase_diagram`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub n_sites: usize,
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    pub record_stride: Option<usize>,
    pub epsilon: f64,
    pub delocalized_below: f64,
    /// Averaging window; defaults to the last 20% of the run.
    pub window: Option<(f64, f64)>,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            n_sites: crate::propagator::DEFAULT_N_SITES,
            dt: crate::propagator::DEFAULT_DT,
            t_max: DEFAULT_SWEEP_T_MAX,
            integrator: Integrator::Reference,
            record_stride: None,
            epsilon: DEFAULT_EPSILON,
            delocalized_below: DEFAULT_EPSILON / DELOCALIZED_DIVISOR,
            window: None,
            workers: None,
        }
    }
}

impl SweepSettings {
    pub fn walk_config(&self, couplings: HoppingPair) -> Result<WalkConfig> {
        let topology = LatticeTopology::half_line(self.n_sites)?;
        let mut cfg = WalkConfig::new(couplings, topology)
            .with_dt(self.dt)
            .with_t_max(self.t_max)
            .with_integrator(self.integrator);
        cfg.record_stride = self.record_stride;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a tail-averaged `P(0)` against the two thresholds.
    pub fn observe(&self, indicator: f64) -> Observed {
        if indicator > self.epsilon {
            Observed::Localized
        } else if indicator < self.delocalized_below {
            Observed::Delocalized
        } else {
            Observed::Inconclusive
        }
    }
}

/// `points x points` couplings evenly spaced over `[lo, hi]^2`, minus the axes.
pub fn default_grid(points: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let axis: Vec<f64> = (0..points)
        .map(|k| {
            if points == 1 {
                lo
            } else {
                // Mirror-exact when lo = -hi, so |g0| = |g1| points stay on the boundary.
                (lo * (points - 1 - k) as f64 + hi * k as f64) / (points - 1) as f64
            }
        })
        .filter(|v| v.abs() > 1e-12)
        .collect();
    axis.iter()
        .flat_map(|&g0| axis.iter().map(move |&g1| (g0, g1)))
        .collect()
}

/// Simulates one coupling pair and classifies it.
pub fn phase_point(couplings: HoppingPair, settings: &SweepSettings) -> Result<PhasePoint> {
    let cfg = settings.walk_config(couplings)?;
    let traj = evolve(&cfg)?;
    let window = settings.window.unwrap_or_else(|| default_window(&traj));
    let indicator_value = tail_average_probability(&traj, 0, window)?;
    let predicted = classify_phase(couplings);
    let boundary_leak = traj.boundary_leak();
    let observed = if boundary_leak > LEAK_THRESHOLD {
        Observed::Inconclusive
    } else {
        settings.observe(indicator_value)
    };
    Ok(PhasePoint {
        couplings,
        predicted,
        observed,
        indicator_value,
        boundary_leak,
        flagged: observed.contradicts(predicted),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub index: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub outcome: std::result::Result<PhasePoint, WalkError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// One entry per input grid point, in input order.
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn points(&self) -> impl Iterator<Item = &PhasePoint> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().ok())
    }

    pub fn rejected(&self) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(|e| e.outcome.is_err())
    }

    pub fn flagged(&self) -> impl Iterator<Item = &PhasePoint> {
        self.points().filter(|p| p.flagged)
    }

    pub fn count(&self, observed: Observed) -> usize {
        self.points().filter(|p| p.observed == observed).count()
    }
}

/// Runs [`phase_point`] for every grid pair on a worker pool. Pairs with a zero
/// coupling come back as [`WalkError::ZeroCouplingInGrid`]; output order
/// follows the input regardless of completion order.
pub fn sweep_phase_diagram(grid: &[(f64, f64)], settings: &SweepSettings) -> Result<SweepReport> {
    let run = |(index, &(gamma0, gamma1)): (usize, &(f64, f64))| {
        let outcome = match HoppingPair::new(gamma0, gamma1) {
            Ok(c) => phase_point(c, settings),
            Err(_) => Err(WalkError::ZeroCouplingInGrid { gamma0, gamma1 }),
        };
        SweepEntry {
            index,
            gamma0,
            gamma1,
            outcome,
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = settings.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| WalkError::InvalidConfig(format!("worker pool: {e}")))?;
    let entries = pool.install(|| grid.par_iter().enumerate().map(run).collect());
    Ok(SweepReport { entries })
}

/// Position of the probability front over time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadProfile {
    pub times: Vec<f64>,
    /// Rightmost site with `P > front_threshold` at each time.
    pub front_position: Vec<usize>,
    /// Least-squares slope of front position against time (sites per unit time).
    pub fitted_speed: f64,
    pub fitted_intercept: f64,
    /// Coefficient of determination; 1 when the front never moves.
    pub fit_r2: f64,
}

/// Tracks the front over the samples recorded before the boundary-leak
/// monitor trips and fits a straight line through it.
pub fn spread_profile(traj: &Trajectory, front_threshold: f64) -> Result<SpreadProfile> {
    let clean = traj.first_leak_index().unwrap_or(traj.samples().len());
    if clean < 10 {
        return Err(WalkError::FrontReachedBoundary {
            clean_samples: clean,
        });
    }
    let samples = &traj.samples()[..clean];
    let times: Vec<f64> = samples.iter().map(AmplitudeField::time).collect();
    let front_position: Vec<usize> = samples
        .iter()
        .map(|f| {
            f.values()
                .iter()
                .rposition(|v| v.norm_sqr() > front_threshold)
                .unwrap_or(0)
        })
        .collect();
    let ys: Vec<f64> = front_position.iter().map(|&p| p as f64).collect();
    let (fitted_speed, fitted_intercept, fit_r2) = linear_fit(&times, &ys);
    Ok(SpreadProfile {
        times,
        front_position,
        fitted_speed,
        fitted_intercept,
        fit_r2,
    })
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub t: f64,
    pub p_sim: f64,
    pub p_limit: f64,
}

/// Simulated `P(X_t = 0)` next to its long-time limit at each checkpoint.
/// Uses the reference propagator on a half line of `n_sites` sites.
pub fn convergence_study(
    couplings: HoppingPair,
    checkpoints: &[f64],
    n_sites: usize,
) -> Result<Vec<ConvergencePoint>> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WalkError::InvalidConfig("checkpoints must be increasing".into()));
    }
    if checkpoints.first().is_some_and(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(WalkError::InvalidConfig("checkpoints must be non-negative".into()));
    }
    let h = build_hamiltonian(couplings, LatticeTopology::half_line(n_sites)?);
    let p_limit = limit_measure(0, couplings);
    let mut psi = AmplitudeField::delta_at_origin(n_sites).into_values();
    let mut work = Workspace::new();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        ReferencePropagator::new(&h, t - now).apply(&mut psi, &mut work);
        now = t;
        out.push(ConvergencePoint {
            t,
            p_sim: psi[0].norm_sqr(),
            p_limit,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::InvariantState;
    use crate::propagator::InitialState;

    fn pair(a: f64, b: f64) -> HoppingPair {
        HoppingPair::new(a, b).unwrap()
    }

    #[test]
    fn default_grid_drops_axes() {
        let g = default_grid(41, -1.0, 1.0);
        assert_eq!(g.len(), 40 * 40);
        assert!(g.iter().all(|&(a, b)| a != 0.0 && b != 0.0));
        let axis: Vec<f64> = g.iter().take(40).map(|p| p.1).collect();
        for (a, b) in axis.iter().zip(axis.iter().rev()) {
            assert_eq!(*a, -*b);
        }
        assert!(g.contains(&(-1.0, 1.0)));
        let g = default_grid(5, -1.0, 1.0);
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn observation_thresholds() {
        let s = SweepSettings::default();
        assert_eq!(s.observe(0.3), Observed::Localized);
        assert_eq!(s.observe(0.001), Observed::Delocalized);
        assert_eq!(s.observe(0.0095), Observed::Inconclusive);
        assert!(Observed::Localized.contradicts(Phase::Delocalized));
        assert!(!Observed::Inconclusive.contradicts(Phase::Localized));
    }

    #[test]
    fn zero_couplings_reported_not_dropped() {
        let settings = SweepSettings {
            n_sites: 40,
            dt: 0.01,
            t_max: 5.0,
            workers: Some(1),
            ..SweepSettings::default()
        };
        let grid = [(0.0, 0.5), (0.3, 0.6), (0.6, 0.0)];
        let report = sweep_phase_diagram(&grid, &settings).unwrap();
        assert_eq!(report.entries.len(), 3);
        assert_eq!(report.rejected().count(), 2);
        assert_eq!(
            report.entries[0].outcome,
            Err(WalkError::ZeroCouplingInGrid { gamma0: 0.0, gamma1: 0.5 })
        );
        assert_eq!(report.entries[1].index, 1);
        assert!(report.entries[1].outcome.is_ok());
    }

    #[test]
    fn stationary_front_for_invariant_state() {
        let g = pair(1.0 / 3.0, 0.5);
        let phi = InvariantState::normalized(g).unwrap().field(60);
        let cfg = WalkConfig::new(g, LatticeTopology::half_line(60).unwrap())
            .with_dt(0.01)
            .with_t_max(5.0)
            .with_record_stride(10)
            .with_initial(InitialState::Custom(phi));
        let prof = spread_profile(&evolve(&cfg).unwrap(), 1e-6).unwrap();
        assert!(prof.front_position.windows(2).all(|w| w[0] == w[1]));
        assert!(prof.fitted_speed.abs() < 1e-12);
        assert_eq!(prof.fit_r2, 1.0);
    }

    #[test]
    fn front_hits_boundary_early() {
        let g = pair(1.0, 1.0);
        let cfg = WalkConfig::new(g, LatticeTopology::half_line(12).unwrap())
            .with_dt(0.1)
            .with_t_max(20.0)
            .with_record_stride(10);
        assert!(matches!(
            spread_profile(&evolve(&cfg).unwrap(), 1e-6),
            Err(WalkError::FrontReachedBoundary { .. })
        ));
    }

    #[test]
    fn convergence_at_time_zero() {
        let pts = convergence_study(pair(1.0 / 3.0, 0.5), &[0.0, 1.0], 40).unwrap();
        assert_eq!(pts[0].p_sim, 1.0);
        assert!((pts[0].p_limit - 25.0 / 81.0).abs() < 1e-15);
        assert!((pts[0].p_sim - pts[0].p_limit - 56.0 / 81.0).abs() < 1e-15);
        assert!(convergence_study(pair(0.3, 0.5), &[2.0, 1.0], 40).is_err());
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (m, c, r2) = linear_fit(&xs, &ys);
        assert!((m - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
    }
}
