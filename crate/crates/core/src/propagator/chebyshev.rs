//! Chebyshev expansion of `exp(-i H tau)`.
//!
//! With `R` bounding the spectrum of `H`, the Jacobi-Anger identity gives
//!
//! ```text
//! exp(-i H tau) = J_0(R tau) + 2 sum_{k>=1} (-i)^k J_k(R tau) T_k(H / R)
//! ```
//!
//! `|T_k(H/R)| <= 1`, so dropping every term past `K` costs at most
//! `2 sum_{k>K} |J_k(R tau)|`, which we keep below [`TERM_TOLERANCE`].

use num_complex::Complex64;

use crate::lattice::HamiltonianOperator;

/// Terms with `2|J_k| <` this value (and `k` past the turning point) are dropped.
pub const TERM_TOLERANCE: f64 = 1e-17;

/// Largest `R tau` handled in a single expansion; longer steps are split.
pub const MAX_ARGUMENT: f64 = 40.0;

/// Bessel functions `J_0(z) ..= J_{n}(z)` for real `z`, by Miller's backward
/// recurrence normalized with `J_0 + 2 sum J_{2k} = 1`.
pub fn bessel_j_sequence(z: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let az = z.abs();
    let mut start = n.max(az.ceil() as usize) + 30 + (4.0 * az.sqrt()).ceil() as usize;
    start += start % 2;

    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-300_f64; // J_k
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        if k <= n {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = (2.0 * k as f64 / az) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            next *= scale;
            norm *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for (k, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if z < 0.0 && k % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// Expansion coefficients `c_k (-i)^k J_k(z)`, truncated at [`TERM_TOLERANCE`].
fn coefficients(z: f64) -> Vec<Complex64> {
    let az = z.abs();
    let cap = (1.5 * az).ceil() as usize + 60;
    let j = bessel_j_sequence(z, cap);
    let mut last = j.len() - 1;
    for k in (az.ceil() as usize + 1)..j.len() {
        if 2.0 * j[k].abs() < TERM_TOLERANCE {
            last = k;
            break;
        }
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let mut phase = Complex64::new(1.0, 0.0);
    (0..=last)
        .map(|k| {
            let c = if k == 0 { 1.0 } else { 2.0 };
            let a = phase * (c * j[k]);
            phase *= minus_i;
            a
        })
        .collect()
}

/// Precomputed `exp(-i H tau)` for one fixed `tau`, applied in place.
#[derive(Debug, Clone)]
pub struct ReferencePropagator<'h> {
    h: &'h HamiltonianOperator,
    radius: f64,
    substeps: usize,
    coeffs: Vec<Complex64>,
    tau: f64,
}

impl<'h> ReferencePropagator<'h> {
    pub fn new(h: &'h HamiltonianOperator, tau: f64) -> Self {
        let radius = h.spectral_bound();
        let total = radius * tau;
        let substeps = ((total.abs() / MAX_ARGUMENT).ceil() as usize).max(1);
        let coeffs = coefficients(total / substeps as f64);
        Self {
            h,
            radius,
            substeps,
            coeffs,
            tau,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of Chebyshev terms per substep.
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Replaces `psi` with `exp(-i H tau) psi`. `work` holds three scratch
    /// vectors and is resized as needed.
    pub fn apply(&self, psi: &mut [Complex64], work: &mut Workspace) {
        let n = self.h.n_sites();
        assert_eq!(psi.len(), n, "state length does not match the operator");
        if self.tau == 0.0 {
            return;
        }
        work.resize(n);
        for _ in 0..self.substeps {
            self.apply_once(psi, work);
        }
    }

    fn apply_once(&self, psi: &mut [Complex64], work: &mut Workspace) {
        let inv_r = 1.0 / self.radius;
        let Workspace { prev, cur, next } = work;
        // T_0 psi
        prev.copy_from_slice(psi);
        for v in psi.iter_mut() {
            *v *= self.coeffs[0];
        }
        if self.coeffs.len() == 1 {
            return;
        }
        // T_1 psi
        self.h.apply_unchecked(prev, cur);
        for x in 0..cur.len() {
            cur[x] *= inv_r;
            psi[x] += self.coeffs[1] * cur[x];
        }
        for a in &self.coeffs[2..] {
            self.h.apply_unchecked(cur, next);
            for x in 0..next.len() {
                next[x] = next[x] * (2.0 * inv_r) - prev[x];
                psi[x] += a * next[x];
            }
            std::mem::swap(prev, cur);
            std::mem::swap(cur, next);
        }
    }
}

/// Scratch buffers for [`ReferencePropagator::apply`].
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn resize(&mut self, n: usize) {
        let zero = Complex64::new(0.0, 0.0);
        self.prev.resize(n, zero);
        self.cur.resize(n, zero);
        self.next.resize(n, zero);
    }
}
