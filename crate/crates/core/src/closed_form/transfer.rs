//! Transfer matrices propagating consecutive Laplace-domain amplitudes two
//! sites at a time: `(F_{2n+1}, F_{2n}) = (M1 M0)^n (F_1, F_0)`.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::spectral_pair;
use crate::error::Result;
use crate::lattice::HoppingPair;

pub type Mat2 = Matrix2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrices {
    /// `[[i s / g1, -g0 / g1], [1, 0]]`
    pub m0: Mat2,
    /// `[[i s / g0, -g1 / g0], [1, 0]]`
    pub m1: Mat2,
}

impl TransferMatrices {
    pub fn new(s: f64, couplings: HoppingPair) -> Self {
        let (g0, g1) = (couplings.gamma0(), couplings.gamma1());
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m0 = Mat2::new(c(0.0, s / g1), c(-g0 / g1, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let m1 = Mat2::new(c(0.0, s / g0), c(-g1 / g0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        Self { m0, m1 }
    }

    /// `M1 M0`, the two-site transfer matrix.
    pub fn product(&self) -> Mat2 {
        self.m1 * self.m0
    }
}

/// `(M1 M0)^n` from the eigen-expansion in `q+(s)`, `q-(s)` and `sqrt(p(s))`.
pub fn transfer_power_closed_form(s: f64, couplings: HoppingPair, n: u32) -> Result<Mat2> {
    let sp = spectral_pair(s, couplings)?;
    let (g0, g1) = (couplings.gamma0(), couplings.gamma1());
    let root_p = sp.sqrt_p();
    let plus = sp.q_plus.powi(n as i32);
    let minus = sp.q_minus.powi(n as i32);
    let sum = plus + minus;
    let diff = plus - minus;
    let skew = (s * s - g0 * g0 + g1 * g1) / root_p * diff;
    let off = s * g0 / root_p * diff;
    Ok(Mat2::new(
        Complex64::new(0.5 * (sum + skew), 0.0),
        Complex64::new(0.0, off),
        Complex64::new(0.0, -off),
        Complex64::new(0.5 * (sum - skew), 0.0),
    ))
}

/// `(M1 M0)^n` by repeated multiplication.
pub fn transfer_power_iterated(s: f64, couplings: HoppingPair, n: u32) -> Mat2 {
    let step = TransferMatrices::new(s, couplings).product();
    (0..n).fold(Mat2::identity(), |acc, _| step * acc)
}
