//! The 2-periodic tridiagonal Hamiltonian.
//!
//! Bond `k` joins sites `k` and `k + 1` and carries `gamma0` for even `k`,
//! `gamma1` for odd `k`. The diagonal is zero. Only the bond array is stored.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::propagator::AmplitudeField;

/// The two real hopping amplitudes of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingPair {
    gamma0: f64,
    gamma1: f64,
}

impl HoppingPair {
    pub fn new(gamma0: f64, gamma1: f64) -> Result<Self> {
        if gamma0 == 0.0 || !gamma0.is_finite() {
            return Err(WalkError::ZeroCoupling { name: "gamma0" });
        }
        if gamma1 == 0.0 || !gamma1.is_finite() {
            return Err(WalkError::ZeroCoupling { name: "gamma1" });
        }
        Ok(Self { gamma0, gamma1 })
    }

    #[inline]
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    #[inline]
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    /// `gamma0 / gamma1`; the ratio that controls localization.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.gamma0 / self.gamma1
    }

    /// Coupling carried by bond `k`.
    #[inline]
    pub fn bond(&self, k: usize) -> f64 {
        if k % 2 == 0 {
            self.gamma0
        } else {
            self.gamma1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Finite chain standing in for the half line; the far end is an artifact.
    HalfLineTruncated,
    /// The finite line itself is the object of study.
    FiniteLine,
}

/// Site count plus the intent behind it. Both kinds build the same operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeTopology {
    kind: TopologyKind,
    n_sites: usize,
}

impl LatticeTopology {
    pub fn new(kind: TopologyKind, n_sites: usize) -> Result<Self> {
        if n_sites < 4 || n_sites % 2 != 0 {
            return Err(WalkError::BadSize(n_sites));
        }
        Ok(Self { kind, n_sites })
    }

    pub fn half_line(n_sites: usize) -> Result<Self> {
        Self::new(TopologyKind::HalfLineTruncated, n_sites)
    }

    pub fn finite_line(n_sites: usize) -> Result<Self> {
        Self::new(TopologyKind::FiniteLine, n_sites)
    }

    #[inline]
    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
}

/// Real symmetric tridiagonal operator with zero diagonal.
///
/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianOperator {
    couplings: HoppingPair,
    topology: LatticeTopology,
    bonds: Vec<f64>,
}

impl HamiltonianOperator {
    pub fn new(couplings: HoppingPair, topology: LatticeTopology) -> Self {
        let bonds = (0..topology.n_sites() - 1).map(|k| couplings.bond(k)).collect();
        Self {
            couplings,
            topology,
            bonds,
        }
    }

    #[inline]
    pub fn couplings(&self) -> HoppingPair {
        self.couplings
    }

    #[inline]
    pub fn topology(&self) -> LatticeTopology {
        self.topology
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.topology.n_sites()
    }

    /// Off-diagonal entries; `bonds()[k] = H[k][k+1] = H[k+1][k]`.
    #[inline]
    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    /// Gershgorin bound on the spectrum: every eigenvalue lies in `[-r, r]`.
    pub fn spectral_bound(&self) -> f64 {
        self.couplings.gamma0.abs() + self.couplings.gamma1.abs()
    }

    /// `H psi` as a new field at the same time stamp.
    pub fn apply(&self, psi: &AmplitudeField) -> Result<AmplitudeField> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_sites()];
        self.apply_into(psi.values(), &mut out)?;
        Ok(AmplitudeField::new(out, psi.time()))
    }

    /// Writes `H src` into `dst`.
    pub fn apply_into(&self, src: &[Complex64], dst: &mut [Complex64]) -> Result<()> {
        self.check_len(src.len())?;
        self.check_len(dst.len())?;
        self.apply_unchecked(src, dst);
        Ok(())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_sites() {
            return Err(WalkError::SizeMismatch {
                expected: self.n_sites(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Hot path; callers guarantee both slices have `n_sites` entries.
    #[inline]
    pub(crate) fn apply_unchecked(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let n = self.bonds.len() + 1;
        let b = &self.bonds[..];
        let src = &src[..n];
        let dst = &mut dst[..n];
        dst[0] = src[1] * b[0];
        for x in 1..n - 1 {
            dst[x] = src[x - 1] * b[x - 1] + src[x + 1] * b[x];
        }
        dst[n - 1] = src[n - 2] * b[n - 2];
    }
}

/// Builds the operator; both inputs were validated on construction.
pub fn build_hamiltonian(couplings: HoppingPair, topology: LatticeTopology) -> HamiltonianOperator {
    HamiltonianOperator::new(couplings, topology)
}
