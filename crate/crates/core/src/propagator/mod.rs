//! Time evolution of the walk state.
//!
//! Two integrators are provided. [`Integrator::Euler`] is the explicit
//! forward-Euler scheme `psi <- psi - i dt H psi`; its norm grows by a factor
//! `sqrt(1 + dt^2 lambda^2)` per eigencomponent per step. [`Integrator::Reference`]
//! applies a Chebyshev expansion of `exp(-i H t)` between recorded times and
//! conserves the norm to round-off.

mod chebyshev;

pub use chebyshev::{bessel_j_sequence, ReferencePropagator, Workspace, TERM_TOLERANCE};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{build_hamiltonian, HamiltonianOperator, HoppingPair, LatticeTopology};

/// Time step of the forward-Euler scheme used for the published figures.
pub const DEFAULT_DT: f64 = 1e-4;
/// Default lattice size.
pub const DEFAULT_N_SITES: usize = 500;
/// Default horizon.
pub const DEFAULT_T_MAX: f64 = 500.0;
/// The automatic record stride keeps at most this many samples.
pub const MAX_AUTO_SAMPLES: usize = 5001;
/// Sites at the far edge watched by the boundary-leak monitor.
pub const LEAK_WINDOW: usize = 10;
/// Probability on the far edge above which a run counts as contaminated.
pub const LEAK_THRESHOLD: f64 = 1e-6;

/// Complex amplitude per site at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeField {
    values: Vec<Complex64>,
    time: f64,
}

impl AmplitudeField {
    pub fn new(values: Vec<Complex64>, time: f64) -> Self {
        Self { values, time }
    }

    /// The walker sitting on site 0 at `t = 0`.
    pub fn delta_at_origin(n_sites: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); n_sites];
        if n_sites > 0 {
            values[0] = Complex64::new(1.0, 0.0);
        }
        Self::new(values, 0.0)
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum_x |psi(x)|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn probability(&self, x: usize) -> f64 {
        self.values[x].norm_sqr()
    }

    fn first_non_finite(&self) -> Option<usize> {
        self.values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    }

    /// Probability held by the last `window` sites.
    pub fn edge_mass(&self, window: usize) -> f64 {
        let start = self.values.len().saturating_sub(window);
        self.values[start..].iter().map(|v| v.norm_sqr()).sum()
    }
}

/// `P(x) = |psi(x)|^2` for every site.
pub fn probability_distribution(psi: &AmplitudeField) -> Vec<f64> {
    psi.values.iter().map(|v| v.norm_sqr()).collect()
}

/// One forward-Euler step: `psi - i dt H psi`, time advanced by `dt`.
pub fn euler_step(psi: &AmplitudeField, h: &HamiltonianOperator, dt: f64) -> Result<AmplitudeField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(WalkError::NonPositiveStep(dt));
    }
    let hpsi = h.apply(psi)?;
    let minus_i_dt = Complex64::new(0.0, -dt);
    let values = psi
        .values
        .iter()
        .zip(hpsi.values())
        .map(|(p, hp)| p + minus_i_dt * hp)
        .collect();
    Ok(AmplitudeField::new(values, psi.time + dt))
}

/// `exp(-i H t) psi`, with `t` of either sign.
pub fn propagate(h: &HamiltonianOperator, psi: &AmplitudeField, t: f64) -> Result<AmplitudeField> {
    h.check_len(psi.len())?;
    let mut values = psi.values.clone();
    ReferencePropagator::new(h, t).apply(&mut values, &mut Workspace::new());
    Ok(AmplitudeField::new(values, psi.time + t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    DeltaAtOrigin,
    Custom(AmplitudeField),
}

/// Everything needed to run one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub couplings: HoppingPair,
    pub topology: LatticeTopology,
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    /// Record every k-th step; `None` picks the smallest stride that keeps
    /// at most [`MAX_AUTO_SAMPLES`] samples.
    pub record_stride: Option<usize>,
    pub initial: InitialState,
}

impl WalkConfig {
    /// Defaults: `dt = 1e-4`, `t_max = 500`, reference integrator, automatic
    /// stride, walker launched at the origin.
    pub fn new(couplings: HoppingPair, topology: LatticeTopology) -> Self {
        Self {
            couplings,
            topology,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            integrator: Integrator::Reference,
            record_stride: None,
            initial: InitialState::DeltaAtOrigin,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = Some(stride);
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(WalkError::NonPositiveStep(self.dt));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(WalkError::InvalidConfig(format!(
                "t_max must be non-negative and finite, got {}",
                self.t_max
            )));
        }
        if self.t_max > 0.0 && self.dt > self.t_max {
            return Err(WalkError::InvalidConfig(format!(
                "dt = {} exceeds t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.record_stride == Some(0) {
            return Err(WalkError::InvalidConfig("record_stride must be at least 1".into()));
        }
        if let InitialState::Custom(field) = &self.initial {
            if field.len() != self.topology.n_sites() {
                return Err(WalkError::SizeMismatch {
                    expected: self.topology.n_sites(),
                    actual: field.len(),
                });
            }
        }
        Ok(())
    }

    /// Number of `dt` steps covering `[0, t_max]`.
    pub fn step_count(&self) -> usize {
        step_count(self.t_max, self.dt)
    }

    pub fn effective_stride(&self) -> usize {
        self.record_stride
            .unwrap_or_else(|| default_stride(self.step_count()))
    }

    pub fn hamiltonian(&self) -> HamiltonianOperator {
        build_hamiltonian(self.couplings, self.topology)
    }

    pub fn initial_field(&self) -> AmplitudeField {
        match &self.initial {
            InitialState::DeltaAtOrigin => AmplitudeField::delta_at_origin(self.topology.n_sites()),
            InitialState::Custom(field) => field.clone().with_time(0.0),
        }
    }
}

/// `ceil(t_max / dt)`, treating ratios within 1e-9 of an integer as exact.
pub fn step_count(t_max: f64, dt: f64) -> usize {
    let ratio = t_max / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Smallest stride giving at most [`MAX_AUTO_SAMPLES`] samples for `steps` steps.
pub fn default_stride(steps: usize) -> usize {
    steps.div_ceil(MAX_AUTO_SAMPLES - 1).max(1)
}

/// Recorded states of one run plus the monitors taken alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    config: WalkConfig,
    samples: Vec<AmplitudeField>,
    norm_log: Vec<f64>,
    leak_log: Vec<f64>,
}

impl Trajectory {
    fn start(config: WalkConfig, initial: AmplitudeField) -> Self {
        let mut traj = Self {
            config,
            samples: Vec::new(),
            norm_log: Vec::new(),
            leak_log: Vec::new(),
        };
        traj.push(initial);
        traj
    }

    fn push(&mut self, field: AmplitudeField) {
        self.norm_log.push(field.norm_sqr());
        self.leak_log.push(field.edge_mass(LEAK_WINDOW));
        self.samples.push(field);
    }

    /// Builds a trajectory from precomputed samples; mainly for tests and
    /// for feeding externally produced data into the Laplace tools.
    pub fn from_samples(config: WalkConfig, samples: Vec<AmplitudeField>) -> Result<Self> {
        let mut it = samples.into_iter();
        let first = it
            .next()
            .ok_or_else(|| WalkError::InvalidConfig("trajectory needs at least one sample".into()))?;
        let mut traj = Self::start(config, first);
        for s in it {
            if s.time() <= traj.samples.last().map_or(f64::NEG_INFINITY, |p| p.time()) {
                return Err(WalkError::InvalidConfig(
                    "sample times must be strictly increasing".into(),
                ));
            }
            traj.push(s);
        }
        Ok(traj)
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn samples(&self) -> &[AmplitudeField] {
        &self.samples
    }

    pub fn last(&self) -> &AmplitudeField {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time()).collect()
    }

    /// Amplitude at site `x` for every sample.
    pub fn site_series(&self, x: usize) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.values()[x]).collect()
    }

    pub fn norm_log(&self) -> &[f64] {
        &self.norm_log
    }

    /// Probability on the last [`LEAK_WINDOW`] sites at each sample.
    pub fn leak_log(&self) -> &[f64] {
        &self.leak_log
    }

    /// Largest `|norm(t) - norm(0)|` over the recorded samples.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norm_log[0];
        self.norm_log
            .iter()
            .map(|n| (n - n0).abs())
            .fold(0.0, f64::max)
    }

    pub fn boundary_leak(&self) -> f64 {
        self.leak_log.iter().copied().fold(0.0, f64::max)
    }

    /// True once the ballistic front has put more than [`LEAK_THRESHOLD`]
    /// probability on the far edge.
    pub fn is_contaminated(&self) -> bool {
        self.boundary_leak() > LEAK_THRESHOLD
    }

    /// Index of the first sample whose edge mass exceeds the threshold.
    pub fn first_leak_index(&self) -> Option<usize> {
        self.leak_log.iter().position(|&m| m > LEAK_THRESHOLD)
    }
}

/// Runs the configured integrator and records every `stride`-th step, plus
/// the final step when it does not land on the stride.
pub fn evolve(config: &WalkConfig) -> Result<Trajectory> {
    config.validate()?;
    let h = config.hamiltonian();
    let initial = config.initial_field();
    if let Some(site) = initial.first_non_finite() {
        return Err(WalkError::NonFiniteDetected { site, time: 0.0 });
    }
    let steps = config.step_count();
    let stride = config.effective_stride();
    let mut traj = Trajectory::start(config.clone(), initial.clone());
    if steps == 0 {
        return Ok(traj);
    }
    match config.integrator {
        Integrator::Euler => run_euler(&h, initial, config.dt, steps, stride, &mut traj)?,
        Integrator::Reference => run_reference(&h, initial, config.dt, steps, stride, &mut traj)?,
    }
    Ok(traj)
}

fn record(traj: &mut Trajectory, values: &[Complex64], time: f64) -> Result<()> {
    let field = AmplitudeField::new(values.to_vec(), time);
    if let Some(site) = field.first_non_finite() {
        return Err(WalkError::NonFiniteDetected { site, time });
    }
    traj.push(field);
    Ok(())
}

fn run_euler(
    h: &HamiltonianOperator,
    initial: AmplitudeField,
    dt: f64,
    steps: usize,
    stride: usize,
    traj: &mut Trajectory,
) -> Result<()> {
    let mut psi = initial.into_values();
    let mut hpsi = vec![Complex64::new(0.0, 0.0); psi.len()];
    let minus_i_dt = Complex64::new(0.0, -dt);
    for step in 1..=steps {
        h.apply_unchecked(&psi, &mut hpsi);
        for (p, hp) in psi.iter_mut().zip(&hpsi) {
            *p += minus_i_dt * hp;
        }
        if step % stride == 0 || step == steps {
            record(traj, &psi, step as f64 * dt)?;
        }
    }
    Ok(())
}

fn run_reference(
    h: &HamiltonianOperator,
    initial: AmplitudeField,
    dt: f64,
    steps: usize,
    stride: usize,
    traj: &mut Trajectory,
) -> Result<()> {
    let mut psi = initial.into_values();
    let mut work = Workspace::new();
    let full = ReferencePropagator::new(h, stride as f64 * dt);
    let mut done = 0;
    while done + stride <= steps {
        full.apply(&mut psi, &mut work);
        done += stride;
        record(traj, &psi, done as f64 * dt)?;
    }
    if done < steps {
        ReferencePropagator::new(h, (steps - done) as f64 * dt).apply(&mut psi, &mut work);
        record(traj, &psi, steps as f64 * dt)?;
    }
    Ok(())
}
