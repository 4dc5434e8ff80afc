use halfwalk::closed_form::{classify_phase, limit_measure, InvariantState, LimitMeasure};
use halfwalk::experiments::{
    convergence_study, default_grid, sweep_phase_diagram, SweepSettings, DEFAULT_EPSILON,
    DEFAULT_SWEEP_T_MAX, DELOCALIZED_DIVISOR,
};
use halfwalk::export::{
    write_convergence_csv, write_field_csv, write_limit_csv, write_oracle_csv,
    write_sweep_csv, write_trajectory_csv, OracleRow, SweepSummary, TrajectoryMetadata,
};
use halfwalk::lattice::{build_hamiltonian, HoppingPair, LatticeTopology, TopologyKind};
use halfwalk::propagator::{
    evolve, InitialState, Integrator, WalkConfig, DEFAULT_DT, DEFAULT_N_SITES, DEFAULT_T_MAX,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Settings;
use crate::error::CliError;
use crate::manifest::OutputSet;

const DEFAULT_CUTOFF: usize = 40;
const DEFAULT_MAX_SITE: usize = 100;
const DEFAULT_ARCHIVE_MAX_SITE: usize = 20;
const DEFAULT_ORACLE_T_MAX: f64 = 50.0;
const DEFAULT_ORACLE_S: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const DEFAULT_ORACLE_SITES: [usize; 4] = [0, 1, 2, 3];
const DEFAULT_CHECKPOINTS: [f64; 6] = [0.0, 25.0, 50.0, 100.0, 150.0, 200.0];
const DEFAULT_GRID_POINTS: usize = 41;
/// An oracle row is inconclusive when the truncated tail could account for
/// more than this fraction of the closed-form value.
const ORACLE_TAIL_FRACTION: f64 = 1e-3;

/// The merged settings plus a record of every value actually used.
pub(crate) struct Context {
    given: Settings,
    resolved: Settings,
    strict: bool,
}

impl Context {
    pub(crate) fn new(given: Settings, strict: bool) -> Self {
        Self {
            given,
            resolved: Settings::default(),
            strict,
        }
    }

    pub(crate) fn resolved_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.resolved).expect("settings serialize");
        if let Some(map) = v.as_object_mut() {
            map.retain(|_, x| !x.is_null());
        }
        v
    }

    fn couplings(&mut self) -> Result<HoppingPair, CliError> {
        let g0 = self.given.gamma0.ok_or_else(|| CliError::config("gamma0", "required"))?;
        let g1 = self.given.gamma1.ok_or_else(|| CliError::config("gamma1", "required"))?;
        for (name, v) in [("gamma0", g0), ("gamma1", g1)] {
            if !v.is_finite() {
                return Err(CliError::config(name, format!("must be finite, got {v}")));
            }
        }
        let pair = HoppingPair::new(g0, g1)?;
        self.resolved.gamma0 = Some(g0);
        self.resolved.gamma1 = Some(g1);
        Ok(pair)
    }

    fn n_sites(&mut self) -> Result<usize, CliError> {
        let n = self.given.n_sites.unwrap_or(DEFAULT_N_SITES);
        if n < 4 || n % 2 != 0 {
            return Err(CliError::config("n_sites", format!("{n} must be an even integer >= 4")));
        }
        self.resolved.n_sites = Some(n);
        Ok(n)
    }

    fn topology(&mut self) -> Result<LatticeTopology, CliError> {
        let n = self.n_sites()?;
        let name = self.given.topology.clone().unwrap_or_else(|| "half_line".into());
        let kind = match name.replace('-', "_").as_str() {
            "half_line" => TopologyKind::HalfLineTruncated,
            "finite_line" => TopologyKind::FiniteLine,
            _ => {
                return Err(CliError::config(
                    "topology",
                    format!("unknown topology {name:?}; expected half_line or finite_line"),
                ))
            }
        };
        self.resolved.topology = Some(name);
        Ok(LatticeTopology::new(kind, n)?)
    }

    fn positive(&mut self, field: &str, value: f64) -> Result<f64, CliError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::config(field, format!("must be positive and finite, got {value}")));
        }
        Ok(value)
    }

    fn walk_config(&mut self, couplings: HoppingPair, t_max_default: f64) -> Result<WalkConfig, CliError> {
        let topology = self.topology()?;
        let dt = self.given.dt.unwrap_or(DEFAULT_DT);
        let dt = self.positive("dt", dt)?;
        self.resolved.dt = Some(dt);
        let t_max = self.given.t_max.unwrap_or(t_max_default);
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(CliError::config("t_max", format!("must be non-negative and finite, got {t_max}")));
        }
        self.resolved.t_max = Some(t_max);
        let integrator = self.integrator()?;
        let mut cfg = WalkConfig::new(couplings, topology)
            .with_dt(dt)
            .with_t_max(t_max)
            .with_integrator(integrator);
        if let Some(k) = self.given.stride {
            if k == 0 {
                return Err(CliError::config("stride", "must be at least 1"));
            }
            cfg = cfg.with_record_stride(k);
        }
        self.resolved.stride = Some(cfg.effective_stride());
        Ok(cfg)
    }

    fn integrator(&mut self) -> Result<Integrator, CliError> {
        let name = self.given.integrator.clone().unwrap_or_else(|| "reference".into());
        let integrator = match name.as_str() {
            "reference" => Integrator::Reference,
            "euler" => Integrator::Euler,
            _ => {
                return Err(CliError::config(
                    "integrator",
                    format!("unknown integrator {name:?}; expected reference or euler"),
                ))
            }
        };
        self.resolved.integrator = Some(name);
        Ok(integrator)
    }

    fn workers(&mut self, default: usize) -> Result<usize, CliError> {
        let w = self.given.workers.unwrap_or(default);
        if w == 0 {
            return Err(CliError::config("workers", "must be at least 1"));
        }
        self.resolved.workers = Some(w);
        Ok(w)
    }

    fn inconclusive(&self, what: String) -> Result<(), CliError> {
        if self.strict {
            Err(CliError::Inconclusive(what))
        } else {
            eprintln!("halfwalk: warning: {what}");
            Ok(())
        }
    }
}

fn csv<F>(write: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s.into_bytes()
}

pub(crate) fn simulate(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    ctx.workers(1)?;
    let couplings = ctx.couplings()?;
    let mut cfg = ctx.walk_config(couplings, DEFAULT_T_MAX)?;
    let initial = ctx.given.initial.clone().unwrap_or_else(|| "delta".into());
    match initial.as_str() {
        "delta" => {}
        "invariant" => {
            let state = InvariantState::normalized(couplings)?;
            let field = state.field(cfg.topology.n_sites());
            cfg = cfg.with_initial(InitialState::Custom(field));
        }
        _ => {
            return Err(CliError::config(
                "initial",
                format!("unknown initial state {initial:?}; expected delta or invariant"),
            ))
        }
    }
    ctx.resolved.initial = Some(initial);
    let max_site = ctx.given.max_site.unwrap_or(DEFAULT_MAX_SITE);
    ctx.resolved.max_site = Some(max_site);

    let traj = evolve(&cfg)?;
    out.write("trajectory.csv", &csv(|w| write_trajectory_csv(w, &traj, Some(max_site))))?;
    let meta = TrajectoryMetadata::from_trajectory(&traj);
    out.write("trajectory.json", &json(&meta))?;
    println!(
        "simulated {} samples to t = {}; norm drift {:.3e}, boundary leak {:.3e}",
        traj.samples().len(),
        traj.last().time(),
        meta.norm_drift,
        meta.boundary_leak
    );
    if meta.truncation_contaminated {
        ctx.inconclusive(format!(
            "probability reached the truncation edge (leak {:.3e}); enlarge n_sites",
            meta.boundary_leak
        ))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LimitSummary {
    phase: &'static str,
    total_mass: f64,
}

pub(crate) fn limit(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    ctx.workers(1)?;
    let couplings = ctx.couplings()?;
    let cutoff = ctx.given.cutoff.unwrap_or(DEFAULT_CUTOFF);
    if cutoff == 0 {
        return Err(CliError::config("cutoff", "must be at least 1"));
    }
    ctx.resolved.cutoff = Some(cutoff);
    out.write("limit.csv", &csv(|w| write_limit_csv(w, couplings, cutoff)))?;
    let summary = LimitSummary {
        phase: classify_phase(couplings).as_str(),
        total_mass: LimitMeasure::new(couplings).total_mass,
    };
    out.write("limit.json", &json(&summary))?;
    println!(
        "{}; P(X = 0) -> {:.6}, total limit mass {:.6}",
        summary.phase,
        limit_measure(0, couplings),
        summary.total_mass
    );
    Ok(())
}

pub(crate) fn oracle(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    ctx.workers(1)?;
    let couplings = ctx.couplings()?;
    let cfg = ctx.walk_config(couplings, DEFAULT_ORACLE_T_MAX)?;
    let s_list = ctx.given.s.clone().unwrap_or_else(|| DEFAULT_ORACLE_S.to_vec());
    if s_list.is_empty() {
        return Err(CliError::config("s", "needs at least one value"));
    }
    for (i, &s) in s_list.iter().enumerate() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CliError::config(&format!("s[{i}]"), format!("must be positive, got {s}")));
        }
    }
    let sites = ctx.given.sites.clone().unwrap_or_else(|| DEFAULT_ORACLE_SITES.to_vec());
    let n = cfg.topology.n_sites();
    for (i, &x) in sites.iter().enumerate() {
        if x >= n {
            return Err(CliError::config(&format!("sites[{i}]"), format!("{x} is outside 0..{n}")));
        }
    }
    ctx.resolved.s = Some(s_list.clone());
    ctx.resolved.sites = Some(sites.clone());

    let traj = evolve(&cfg)?;
    let mut rows = Vec::with_capacity(s_list.len() * sites.len());
    for &s in &s_list {
        for &x in &sites {
            rows.push(OracleRow::compute(&traj, s, x)?);
        }
    }
    out.write("oracle.csv", &csv(|w| write_oracle_csv(w, &rows)))?;
    let worst = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    println!("{} comparisons, largest |numeric - closed| = {worst:.3e}", rows.len());

    let loose: Vec<_> = rows
        .iter()
        .filter(|r| r.tail_bound > ORACLE_TAIL_FRACTION * r.closed.norm())
        .map(|r| format!("(s = {}, x = {})", r.s, r.x))
        .collect();
    if !loose.is_empty() {
        ctx.inconclusive(format!(
            "truncation tail not negligible at {}; raise t_max",
            loose.join(", ")
        ))?;
    }
    if traj.is_contaminated() {
        ctx.inconclusive("probability reached the truncation edge; enlarge n_sites".into())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GridSpec {
    points: usize,
    min: f64,
    max: f64,
    /// Grid values equal to zero, removed from both axes.
    excluded_axis_values: usize,
    evaluated: usize,
}

#[derive(Serialize)]
struct SweepFile {
    grid: GridSpec,
    budget: SweepSettings,
    summary: SweepSummary,
    archived: Vec<String>,
}

pub(crate) fn sweep(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let workers = ctx.workers(cores)?;
    let n_sites = ctx.n_sites()?;
    if let Some(t) = ctx.given.topology.as_deref() {
        if t.replace('-', "_") != "half_line" {
            return Err(CliError::config("topology", "sweeps run on the half line only"));
        }
    }
    let dt = ctx.given.dt.unwrap_or(DEFAULT_DT);
    let dt = ctx.positive("dt", dt)?;
    ctx.resolved.dt = Some(dt);
    let t_max = ctx.given.t_max.unwrap_or(DEFAULT_SWEEP_T_MAX);
    let t_max = ctx.positive("t_max", t_max)?;
    ctx.resolved.t_max = Some(t_max);
    let integrator = ctx.integrator()?;
    if ctx.given.stride == Some(0) {
        return Err(CliError::config("stride", "must be at least 1"));
    }
    ctx.resolved.stride = ctx.given.stride;

    let epsilon = ctx.given.epsilon.unwrap_or(DEFAULT_EPSILON);
    let epsilon = ctx.positive("epsilon", epsilon)?;
    let below = ctx.given.delocalized_below.unwrap_or(epsilon / DELOCALIZED_DIVISOR);
    let below = ctx.positive("delocalized_below", below)?;
    if below > epsilon {
        return Err(CliError::config("delocalized_below", "must not exceed epsilon"));
    }
    ctx.resolved.epsilon = Some(epsilon);
    ctx.resolved.delocalized_below = Some(below);

    let points = ctx.given.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if points == 0 {
        return Err(CliError::config("grid_points", "must be at least 1"));
    }
    let lo = ctx.given.grid_min.unwrap_or(-1.0);
    let hi = ctx.given.grid_max.unwrap_or(1.0);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::config("grid_max", format!("need grid_min <= grid_max, got [{lo}, {hi}]")));
    }
    ctx.resolved.grid_points = Some(points);
    ctx.resolved.grid_min = Some(lo);
    ctx.resolved.grid_max = Some(hi);
    let max_site = ctx.given.max_site.unwrap_or(DEFAULT_ARCHIVE_MAX_SITE);
    ctx.resolved.max_site = Some(max_site);

    let settings = SweepSettings {
        n_sites,
        dt,
        t_max,
        integrator,
        record_stride: ctx.given.stride,
        epsilon,
        delocalized_below: below,
        window: None,
        workers: Some(workers),
    };
    let grid = default_grid(points, lo, hi);
    let axis_len = (grid.len() as f64).sqrt().round() as usize;
    let report = sweep_phase_diagram(&grid, &settings)?;

    out.write("sweep.csv", &csv(|w| write_sweep_csv(w, &report)))?;

    let mut archived = Vec::new();
    for p in report.flagged() {
        let cfg = settings.walk_config(p.couplings)?;
        let traj = evolve(&cfg)?;
        let name = format!(
            "flagged/gamma0_{:+.6}_gamma1_{:+.6}.csv",
            p.couplings.gamma0(),
            p.couplings.gamma1()
        );
        out.write(&name, &csv(|w| write_trajectory_csv(w, &traj, Some(max_site))))?;
        archived.push(name);
    }

    let summary = SweepSummary::from_report(&report);
    let file = SweepFile {
        grid: GridSpec {
            points,
            min: lo,
            max: hi,
            excluded_axis_values: points - axis_len,
            evaluated: grid.len(),
        },
        budget: settings,
        archived,
        summary,
    };
    out.write("sweep_summary.json", &json(&file))?;
    let s = &file.summary;
    println!(
        "{} points: {} localized, {} delocalized, {} inconclusive observed; {} contradictions, {} rejected",
        s.total,
        s.observed_localized,
        s.observed_delocalized,
        s.observed_inconclusive,
        s.contradictions,
        s.rejected.len()
    );
    if s.contradictions > 0 {
        ctx.inconclusive(format!("{} grid points contradict the predicted phase", s.contradictions))?;
    }
    if s.observed_inconclusive > 0 {
        ctx.inconclusive(format!("{} grid points are inconclusive", s.observed_inconclusive))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct InvariantSummary {
    phi0_re: f64,
    phi0_im: f64,
    total_mass: Option<f64>,
    /// Largest |(H phi)(x)| over sites below the truncation edge.
    interior_residual: f64,
    /// |(H phi)(N-1)|, nonzero only because of truncation.
    edge_residual: f64,
}

pub(crate) fn invariant(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    ctx.workers(1)?;
    let couplings = ctx.couplings()?;
    let n = ctx.n_sites()?;
    let normalized = ctx.given.normalized.unwrap_or(false);
    let state = if normalized {
        if ctx.given.phi0_re.is_some() || ctx.given.phi0_im.is_some() {
            return Err(CliError::config("normalized", "cannot be combined with phi0_re or phi0_im"));
        }
        InvariantState::normalized(couplings)?
    } else {
        let phi0 = Complex64::new(ctx.given.phi0_re.unwrap_or(1.0), ctx.given.phi0_im.unwrap_or(0.0));
        if !(phi0.re.is_finite() && phi0.im.is_finite()) {
            return Err(CliError::config("phi0_re", "must be finite"));
        }
        InvariantState::new(couplings, phi0)?
    };
    ctx.resolved.normalized = Some(normalized);
    ctx.resolved.phi0_re = Some(state.phi0().re);
    ctx.resolved.phi0_im = Some(state.phi0().im);

    let field = state.field(n);
    let h = build_hamiltonian(couplings, LatticeTopology::half_line(n)?);
    let residual = h.apply(&field)?;
    let r = residual.values();
    let summary = InvariantSummary {
        phi0_re: state.phi0().re,
        phi0_im: state.phi0().im,
        total_mass: state.total_mass(),
        interior_residual: r[..n - 1].iter().map(|v| v.norm()).fold(0.0, f64::max),
        edge_residual: r[n - 1].norm(),
    };
    out.write("invariant.csv", &csv(|w| write_field_csv(w, &field)))?;
    out.write("invariant.json", &json(&summary))?;
    println!(
        "interior residual {:.3e}, edge residual {:.3e}",
        summary.interior_residual, summary.edge_residual
    );
    Ok(())
}

pub(crate) fn convergence(ctx: &mut Context, out: &mut OutputSet) -> Result<(), CliError> {
    ctx.workers(1)?;
    let couplings = ctx.couplings()?;
    let n = ctx.n_sites()?;
    let checkpoints = ctx
        .given
        .checkpoints
        .clone()
        .unwrap_or_else(|| DEFAULT_CHECKPOINTS.to_vec());
    for (i, &t) in checkpoints.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::config(&format!("checkpoints[{i}]"), format!("must be non-negative, got {t}")));
        }
        if i > 0 && t <= checkpoints[i - 1] {
            return Err(CliError::config(&format!("checkpoints[{i}]"), "checkpoints must be increasing"));
        }
    }
    ctx.resolved.checkpoints = Some(checkpoints.clone());
    let points = convergence_study(couplings, &checkpoints, n)?;
    out.write("convergence.csv", &csv(|w| write_convergence_csv(w, &points)))?;
    for p in &points {
        println!("t = {:>8.2}  P(0) = {:.6}  limit = {:.6}", p.t, p.p_sim, p.p_limit);
    }
    // The light cone reaches the edge after about n / (2 max|gamma|).
    let reach = 2.0 * couplings.gamma0().abs().max(couplings.gamma1().abs());
    if let Some(&last) = checkpoints.last() {
        if reach * last > n as f64 {
            ctx.inconclusive(format!(
                "t = {last} lets the front reach the truncation edge; enlarge n_sites"
            ))?;
        }
    }
    Ok(())
}
