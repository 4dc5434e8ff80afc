//! CSV and JSON output.
//!
//! Every float is written as `{:.16e}` (17 significant digits, `.` separator)
//! and every line ends in `\n`, so identical inputs give byte-identical files.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::closed_form::{laplace_amplitude, limit_measure, limiting_amplitude, Phase};
use crate::experiments::{ConvergencePoint, SweepReport};
use crate::lattice::HoppingPair;
use crate::propagator::{AmplitudeField, Integrator, Trajectory, LEAK_THRESHOLD};

/// Fixed scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x,re,im,prob` for sites `0..=max_site` (all sites when `None`).
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    max_site: Option<usize>,
) -> io::Result<()> {
    writeln!(w, "t,x,re,im,prob")?;
    for field in traj.samples() {
        let end = max_site.map_or(field.len(), |m| (m + 1).min(field.len()));
        let t = fmt_f64(field.time());
        for (x, v) in field.values()[..end].iter().enumerate() {
            writeln!(
                w,
                "{t},{x},{},{},{}",
                fmt_f64(v.re),
                fmt_f64(v.im),
                fmt_f64(v.norm_sqr())
            )?;
        }
    }
    Ok(())
}

/// `x,re,im,prob` for a single field.
pub fn write_field_csv<W: Write>(mut w: W, field: &AmplitudeField) -> io::Result<()> {
    writeln!(w, "x,re,im,prob")?;
    for (x, v) in field.values().iter().enumerate() {
        writeln!(
            w,
            "{x},{},{},{}",
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(v.norm_sqr())
        )?;
    }
    Ok(())
}

/// Run metadata stored next to a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMetadata {
    pub gamma0: f64,
    pub gamma1: f64,
    pub n_sites: usize,
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    pub record_stride: usize,
    pub samples: usize,
    pub norm_drift: f64,
    pub boundary_leak: f64,
    pub truncation_contaminated: bool,
}

impl TrajectoryMetadata {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let cfg = traj.config();
        Self {
            gamma0: cfg.couplings.gamma0(),
            gamma1: cfg.couplings.gamma1(),
            n_sites: cfg.topology.n_sites(),
            dt: cfg.dt,
            t_max: cfg.t_max,
            integrator: cfg.integrator,
            record_stride: cfg.effective_stride(),
            samples: traj.samples().len(),
            norm_drift: traj.norm_drift(),
            boundary_leak: traj.boundary_leak(),
            truncation_contaminated: traj.boundary_leak() > LEAK_THRESHOLD,
        }
    }
}

/// `x,limit_amplitude_re,limit_amplitude_im,limit_measure` for `x < cutoff`.
pub fn write_limit_csv<W: Write>(mut w: W, couplings: HoppingPair, cutoff: usize) -> io::Result<()> {
    writeln!(w, "x,limit_amplitude_re,limit_amplitude_im,limit_measure")?;
    for x in 0..cutoff {
        let a = limiting_amplitude(x, couplings);
        writeln!(
            w,
            "{x},{},{},{}",
            fmt_f64(a.re),
            fmt_f64(a.im),
            fmt_f64(limit_measure(x, couplings))
        )?;
    }
    Ok(())
}

/// One row of the simulation-versus-closed-form comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub s: f64,
    pub x: usize,
    pub numeric: Complex64,
    pub closed: Complex64,
    pub abs_error: f64,
    pub tail_bound: f64,
}

impl OracleRow {
    /// Compares the numerical transform of `traj` against the closed form.
    pub fn compute(traj: &Trajectory, s: f64, x: usize) -> crate::Result<Self> {
        let sample = crate::laplace::numeric_laplace(traj, s, x)?;
        let closed = laplace_amplitude(x, s, traj.config().couplings)?;
        Ok(Self {
            s,
            x,
            numeric: sample.value,
            closed,
            abs_error: (sample.value - closed).norm(),
            tail_bound: sample.tail_bound,
        })
    }
}

/// `s,x,numeric_re,numeric_im,closed_re,closed_im,abs_error,tail_bound`.
pub fn write_oracle_csv<W: Write>(mut w: W, rows: &[OracleRow]) -> io::Result<()> {
    writeln!(w, "s,x,numeric_re,numeric_im,closed_re,closed_im,abs_error,tail_bound")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.s),
            r.x,
            fmt_f64(r.numeric.re),
            fmt_f64(r.numeric.im),
            fmt_f64(r.closed.re),
            fmt_f64(r.closed.im),
            fmt_f64(r.abs_error),
            fmt_f64(r.tail_bound)
        )?;
    }
    Ok(())
}

/// `gamma0,gamma1,predicted,observed,indicator_value`; rejected points are
/// left out here and listed in the JSON summary instead.
pub fn write_sweep_csv<W: Write>(mut w: W, report: &SweepReport) -> io::Result<()> {
    writeln!(w, "gamma0,gamma1,predicted,observed,indicator_value")?;
    for p in report.points() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(p.couplings.gamma0()),
            fmt_f64(p.couplings.gamma1()),
            p.predicted.as_str(),
            p.observed.as_str(),
            fmt_f64(p.indicator_value)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedPoint {
    pub index: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    pub localized_predicted: usize,
    pub delocalized_predicted: usize,
    pub observed_localized: usize,
    pub observed_delocalized: usize,
    pub observed_inconclusive: usize,
    pub contradictions: usize,
    pub flagged: Vec<(f64, f64)>,
    pub rejected: Vec<RejectedPoint>,
}

impl SweepSummary {
    pub fn from_report(report: &SweepReport) -> Self {
        use crate::experiments::Observed;
        let predicted = |ph| report.points().filter(|p| p.predicted == ph).count();
        let flagged: Vec<_> = report
            .flagged()
            .map(|p| (p.couplings.gamma0(), p.couplings.gamma1()))
            .collect();
        Self {
            total: report.entries.len(),
            localized_predicted: predicted(Phase::Localized),
            delocalized_predicted: predicted(Phase::Delocalized),
            observed_localized: report.count(Observed::Localized),
            observed_delocalized: report.count(Observed::Delocalized),
            observed_inconclusive: report.count(Observed::Inconclusive),
            contradictions: flagged.len(),
            flagged,
            rejected: report
                .rejected()
                .map(|e| RejectedPoint {
                    index: e.index,
                    gamma0: e.gamma0,
                    gamma1: e.gamma1,
                    reason: e.outcome.as_ref().err().map(ToString::to_string).unwrap_or_default(),
                })
                .collect(),
        }
    }
}

/// `t,p_sim,p_limit`.
pub fn write_convergence_csv<W: Write>(mut w: W, points: &[ConvergencePoint]) -> io::Result<()> {
    writeln!(w, "t,p_sim,p_limit")?;
    for p in points {
        writeln!(w, "{},{},{}", fmt_f64(p.t), fmt_f64(p.p_sim), fmt_f64(p.p_limit))?;
    }
    Ok(())
}
