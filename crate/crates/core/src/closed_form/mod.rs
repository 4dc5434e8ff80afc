//! Exact Laplace-domain solution for the walker launched at the origin.
//!
//! With `F_x(s) = int_0^inf e^{-st} psi_t(x) dt` the equations of motion turn
//! into a two-step recurrence in `x`. Its transfer matrix `M1 M0` has
//! eigenvalues `q+(s) q-(s) = 1`; boundedness `|F_x(s)| <= 1/s` kills the
//! growing `q+` branch and leaves
//!
//! ```text
//! F_{2n}(s)   = (gamma1 + gamma0 q-) / (s gamma1) * q-^n
//! F_{2n+1}(s) = i / gamma1 * q-^{n+1}
//! ```

mod limit;
mod transfer;

pub use limit::{
    classify_phase, invariant_state, limit_measure, limiting_amplitude, InvariantState,
    LimitMeasure, Phase,
};
pub use transfer::{transfer_power_closed_form, transfer_power_iterated, Mat2, TransferMatrices};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::HoppingPair;

/// Eigenvalues of `M1 M0` and the discriminant `p(s)` at one real `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPair {
    pub s: f64,
    pub q_plus: f64,
    pub q_minus: f64,
    pub p: f64,
    /// `sqrt(s^2 + (gamma0 + gamma1)^2)`
    radical_sum: f64,
    /// `sqrt(s^2 + (gamma0 - gamma1)^2)`
    radical_diff: f64,
}

impl SpectralPair {
    /// Positive square root of `p(s)`.
    pub fn sqrt_p(&self) -> f64 {
        self.radical_sum * self.radical_diff
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(WalkError::NonPositiveS(s))
    }
}

/// `q+-(s) = -(A +- B)^2 / (4 gamma0 gamma1)` with `A`, `B` the two radicals.
///
/// `q-` uses `A - B = 4 gamma0 gamma1 / (A + B)`, which has no subtractive
/// cancellation for any sign of the couplings.
pub fn spectral_pair(s: f64, couplings: HoppingPair) -> Result<SpectralPair> {
    check_s(s)?;
    let (g0, g1) = (couplings.gamma0(), couplings.gamma1());
    let s2 = s * s;
    let sum2 = s2 + (g0 + g1).powi(2);
    let diff2 = s2 + (g0 - g1).powi(2);
    let a = sum2.sqrt();
    let b = diff2.sqrt();
    let four_g = 4.0 * g0 * g1;
    let apb2 = (a + b).powi(2);
    Ok(SpectralPair {
        s,
        q_plus: -apb2 / four_g,
        q_minus: -four_g / apb2,
        p: sum2 * diff2,
        radical_sum: a,
        radical_diff: b,
    })
}

/// `F_0(s)`, written so that neither phase suffers cancellation as `s -> 0`.
///
/// `gamma1 + gamma0 q- = gamma1 ((A+B)^2 - 4 gamma0^2) / (A+B)^2` and
/// `A + B - 2|gamma0| = s^2/(A+a) + s^2/(B+b) + 2(max(|gamma0|,|gamma1|) - |gamma0|)`
/// with `a = |gamma0 + gamma1|`, `b = |gamma0 - gamma1|`; every term is non-negative.
fn origin_transform(sp: &SpectralPair, couplings: HoppingPair) -> f64 {
    let s = sp.s;
    let (g0, g1) = (couplings.gamma0().abs(), couplings.gamma1().abs());
    let (a, b) = (sp.radical_sum, sp.radical_diff);
    let a0 = (couplings.gamma0() + couplings.gamma1()).abs();
    let b0 = (couplings.gamma0() - couplings.gamma1()).abs();
    let s2 = s * s;
    let gap = s2 / (a + a0) + s2 / (b + b0) + 2.0 * (g0.max(g1) - g0);
    let apb = a + b;
    gap * (apb + 2.0 * g0) / (s * apb * apb)
}

/// Closed-form Laplace transform `F_x(s)` of the amplitude at site `x`.
pub fn laplace_amplitude(x: usize, s: f64, couplings: HoppingPair) -> Result<Complex64> {
    let sp = spectral_pair(s, couplings)?;
    Ok(laplace_from_pair(x, &sp, couplings))
}

fn laplace_from_pair(x: usize, sp: &SpectralPair, couplings: HoppingPair) -> Complex64 {
    let q = sp.q_minus;
    let n = x / 2;
    if x % 2 == 0 {
        Complex64::new(origin_transform(sp, couplings) * powu(q, n), 0.0)
    } else {
        Complex64::new(0.0, powu(q, n + 1) / couplings.gamma1())
    }
}

fn powu(base: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

/// Outcome of [`verify_laplace_recurrences`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub s: f64,
    pub n_max: usize,
    /// Number of relations checked.
    pub checked: usize,
    /// Largest relative residual `|lhs - rhs| / max(|terms|)`.
    pub max_residual: f64,
    /// Label of the worst relation, e.g. `"even n=3"`.
    pub worst: String,
}

/// Substitutes the closed forms back into the transformed equations of motion:
///
/// * `i s F_0 = i + gamma0 F_1`
/// * `i s F_{2n} = gamma1 F_{2n-1} + gamma0 F_{2n+1}` for `1 <= n <= n_max`
/// * `i s F_{2n+1} = gamma0 F_{2n} + gamma1 F_{2n+2}` for `0 <= n < n_max`
pub fn verify_laplace_recurrences(
    s: f64,
    couplings: HoppingPair,
    n_max: usize,
) -> Result<RecurrenceReport> {
    let sp = spectral_pair(s, couplings)?;
    let (g0, g1) = (couplings.gamma0(), couplings.gamma1());
    let f: Vec<Complex64> = (0..=2 * n_max + 2)
        .map(|x| laplace_from_pair(x, &sp, couplings))
        .collect();
    let i = Complex64::new(0.0, 1.0);

    let mut report = RecurrenceReport {
        s,
        n_max,
        checked: 0,
        max_residual: 0.0,
        worst: String::new(),
    };
    let mut check = |label: String, lhs: Complex64, terms: &[Complex64]| {
        let rhs: Complex64 = terms.iter().sum();
        let scale = terms
            .iter()
            .map(|t| t.norm())
            .fold(lhs.norm(), f64::max)
            .max(f64::MIN_POSITIVE);
        let r = (lhs - rhs).norm() / scale;
        report.checked += 1;
        if r >= report.max_residual {
            report.max_residual = r;
            report.worst = label;
        }
    };

    check("origin".into(), i * s * f[0], &[i, f[1] * g0]);
    for n in 1..=n_max {
        check(
            format!("even n={n}"),
            i * s * f[2 * n],
            &[f[2 * n - 1] * g1, f[2 * n + 1] * g0],
        );
        check(
            format!("odd n={}", n - 1),
            i * s * f[2 * n - 1],
            &[f[2 * n - 2] * g0, f[2 * n] * g1],
        );
    }
    Ok(report)
}
