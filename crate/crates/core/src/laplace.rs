//! Numerical Laplace transforms of simulated trajectories and long-time
//! estimators built on them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::propagator::Trajectory;

/// Relative slack allowed when checking that sample spacings agree.
const GRID_TOLERANCE: f64 = 1e-9;

/// Smallest `s T` accepted by [`default_s_grid`]; `e^{-12} ~ 6e-6`.
pub const MIN_S_TIMES_T: f64 = 12.0;

/// `int_0^T e^{-st} psi_t(x) dt` with the bound on what was cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceSample {
    pub s: f64,
    pub x: usize,
    pub value: Complex64,
    pub truncation_t: f64,
    /// `e^{-sT}/s`: bound on `|int_T^inf e^{-st} psi_t(x) dt|` given `|psi| <= 1`.
    pub tail_bound: f64,
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(WalkError::NonPositiveS(s))
    }
}

fn check_site(traj: &Trajectory, x: usize) -> Result<()> {
    let n_sites = traj.samples()[0].len();
    if x >= n_sites {
        return Err(WalkError::SiteOutOfRange { site: x, n_sites });
    }
    Ok(())
}

/// Returns the uniform spacing and the number of full intervals; a shorter
/// final interval is allowed.
fn uniform_spacing(times: &[f64]) -> Result<(f64, usize)> {
    if times.len() < 2 {
        return Ok((0.0, 0));
    }
    let h = times[1] - times[0];
    let intervals = times.len() - 1;
    for k in 1..intervals {
        let d = times[k + 1] - times[k];
        let last = k + 1 == intervals;
        let ok = (d - h).abs() <= GRID_TOLERANCE * h || (last && d > 0.0 && d < h);
        if !ok {
            return Err(WalkError::NonUniformGrid { index: k + 1 });
        }
    }
    let last = times[intervals] - times[intervals - 1];
    let full = if (last - h).abs() <= GRID_TOLERANCE * h {
        intervals
    } else {
        intervals - 1
    };
    Ok((h, full))
}

/// Composite Simpson on `values[0..=m]` with spacing `h`; an odd `m >= 3` closes
/// with the 3/8 rule, `m = 1` falls back to the trapezoid.
fn simpson(values: &[Complex64], h: f64) -> Complex64 {
    let m = values.len() - 1;
    match m {
        0 => Complex64::new(0.0, 0.0),
        1 => (values[0] + values[1]) * (h / 2.0),
        _ => {
            let even_end = if m % 2 == 0 { m } else { m - 3 };
            let mut acc = Complex64::new(0.0, 0.0);
            if even_end > 0 {
                acc += values[0] + values[even_end];
                for k in 1..even_end {
                    acc += values[k] * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                acc *= h / 3.0;
            }
            if even_end < m {
                let v = &values[even_end..=m];
                acc += (v[0] + v[1] * 3.0 + v[2] * 3.0 + v[3]) * (3.0 * h / 8.0);
            }
            acc
        }
    }
}

/// Quadrature of `e^{-st} psi_t(x)` over the recorded span `[0, T]`.
pub fn numeric_laplace(traj: &Trajectory, s: f64, x: usize) -> Result<LaplaceSample> {
    check_s(s)?;
    check_site(traj, x)?;
    let times = traj.times();
    let (h, full) = uniform_spacing(&times)?;
    let integrand: Vec<Complex64> = traj
        .samples()
        .iter()
        .map(|f| f.values()[x] * (-s * f.time()).exp())
        .collect();
    let mut value = simpson(&integrand[..=full], h);
    if full + 1 < times.len() {
        let d = times[full + 1] - times[full];
        value += (integrand[full] + integrand[full + 1]) * (d / 2.0);
    }
    let t_end = *times.last().unwrap();
    Ok(LaplaceSample {
        s,
        x,
        value,
        truncation_t: t_end,
        tail_bound: (-s * t_end).exp() / s,
    })
}

/// `s` values for [`final_value_estimate`] given a run of length `t_span`:
/// `4 s_min, 2 s_min, s_min` with `s_min = max(12 / T, 0.025)`.
pub fn default_s_grid(t_span: f64) -> Vec<f64> {
    let s_min = (MIN_S_TIMES_T / t_span).max(0.025);
    vec![4.0 * s_min, 2.0 * s_min, s_min]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalValueEstimate {
    pub x: usize,
    /// Extrapolation of `s F(s)` to `s = 0`.
    pub value: Complex64,
    /// Change in the extrapolant when the smallest `s` is dropped, plus the
    /// tail bound at that `s`.
    pub uncertainty: f64,
    /// `(s, s F_numeric(s))` for each grid point.
    pub points: Vec<(f64, Complex64)>,
}

/// Neville's algorithm evaluated at 0 for points `(s_k, y_k)`.
fn extrapolate_to_zero(points: &[(f64, Complex64)]) -> Complex64 {
    let mut p: Vec<Complex64> = points.iter().map(|&(_, y)| y).collect();
    let s: Vec<f64> = points.iter().map(|&(s, _)| s).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (a, b) = (s[i], s[i + level]);
            p[i] = (p[i + 1] * a - p[i] * b) / (a - b);
        }
    }
    p[0]
}

/// `lim_{t -> inf} psi_t(x)` via `lim_{s -> 0+} s F_x(s)`, using a polynomial
/// extrapolation in `s` through the numerically transformed trajectory.
///
/// `s_grid` defaults to [`default_s_grid`] for the trajectory's span.
pub fn final_value_estimate(
    traj: &Trajectory,
    x: usize,
    s_grid: Option<&[f64]>,
) -> Result<FinalValueEstimate> {
    let span = traj.last().time() - traj.samples()[0].time();
    let grid = match s_grid {
        Some(g) => g.to_vec(),
        None => default_s_grid(span),
    };
    if grid.is_empty() {
        return Err(WalkError::InvalidConfig("empty s grid".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut smallest: Option<LaplaceSample> = None;
    for &s in &grid {
        let sample = numeric_laplace(traj, s, x)?;
        points.push((s, sample.value * s));
        if smallest.is_none_or(|m| s < m.s) {
            smallest = Some(sample);
        }
    }
    let smallest = smallest.unwrap();
    if smallest.tail_bound > 0.1 * smallest.value.norm() {
        return Err(WalkError::TailDominates {
            s: smallest.s,
            tail_bound: smallest.tail_bound,
            value: smallest.value.norm(),
        });
    }
    let value = extrapolate_to_zero(&points);
    let without_smallest: Vec<_> = points
        .iter()
        .copied()
        .filter(|&(s, _)| s != smallest.s)
        .collect();
    let spread = if without_smallest.is_empty() {
        f64::INFINITY
    } else {
        (extrapolate_to_zero(&without_smallest) - value).norm()
    };
    Ok(FinalValueEstimate {
        x,
        value,
        uncertainty: spread + smallest.s * smallest.tail_bound,
        points,
    })
}

/// Mean of `|psi_t(x)|^2` over the samples with `t` in `[lo, hi]`.
pub fn tail_average_probability(traj: &Trajectory, x: usize, window: (f64, f64)) -> Result<f64> {
    check_site(traj, x)?;
    let (lo, hi) = window;
    let slack = 1e-9 * hi.abs().max(1.0);
    let (sum, count) = traj
        .samples()
        .iter()
        .filter(|f| f.time() >= lo - slack && f.time() <= hi + slack)
        .fold((0.0, 0usize), |(s, c), f| (s + f.probability(x), c + 1));
    if count == 0 {
        return Err(WalkError::EmptyWindow { lo, hi });
    }
    Ok(sum / count as f64)
}

/// The last 20% of the recorded span.
pub fn default_window(traj: &Trajectory) -> (f64, f64) {
    let t_end = traj.last().time();
    let t0 = traj.samples()[0].time();
    (t_end - 0.2 * (t_end - t0), t_end)
}
