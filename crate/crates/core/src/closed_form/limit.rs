//! Long-time limits, phase classification and the stationary states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::HoppingPair;
use crate::propagator::AmplitudeField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Localized,
    Delocalized,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Localized => "localized",
            Phase::Delocalized => "delocalized",
        }
    }
}

/// Localized iff `|gamma0| < |gamma1|`; the line `|gamma0| = |gamma1|` is delocalized.
pub fn classify_phase(couplings: HoppingPair) -> Phase {
    if couplings.gamma0().abs() < couplings.gamma1().abs() {
        Phase::Localized
    } else {
        Phase::Delocalized
    }
}

/// `lim_{t -> inf} psi_t(x)` for the walker launched at the origin.
///
/// Even sites `2n` carry `(1 - r^2) (-r)^n` with `r = gamma0 / gamma1` in the
/// localized phase; everything else vanishes.
pub fn limiting_amplitude(x: usize, couplings: HoppingPair) -> Complex64 {
    if x % 2 == 1 || classify_phase(couplings) == Phase::Delocalized {
        return Complex64::new(0.0, 0.0);
    }
    let r = couplings.ratio();
    Complex64::new((1.0 - r * r) * pow(-r, x / 2), 0.0)
}

/// `lim_{t -> inf} P(X_t = x)`.
pub fn limit_measure(x: usize, couplings: HoppingPair) -> f64 {
    if x % 2 == 1 || classify_phase(couplings) == Phase::Delocalized {
        return 0.0;
    }
    let r2 = couplings.ratio().powi(2);
    (1.0 - r2).powi(2) * pow(r2, x / 2)
}

fn pow(base: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

/// The per-site limit values together with their (sub-unit) total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitMeasure {
    pub couplings: HoppingPair,
    pub total_mass: f64,
}

impl LimitMeasure {
    pub fn new(couplings: HoppingPair) -> Self {
        let total_mass = match classify_phase(couplings) {
            Phase::Localized => 1.0 - couplings.ratio().powi(2),
            Phase::Delocalized => 0.0,
        };
        Self {
            couplings,
            total_mass,
        }
    }

    pub fn at(&self, x: usize) -> f64 {
        limit_measure(x, self.couplings)
    }

    /// Sum over sites until a term drops below `floor` (or hits zero).
    pub fn truncated_sum(&self, floor: f64) -> f64 {
        let mut sum = 0.0;
        let mut x = 0;
        loop {
            let v = self.at(x);
            sum += v;
            if v < floor {
                break;
            }
            x += 2;
        }
        sum
    }
}

/// A zero-energy eigenvector of the half-line Hamiltonian:
/// `phi(2n) = phi0 (-gamma0 / gamma1)^n`, `phi(2n + 1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantState {
    phi0: Complex64,
    couplings: HoppingPair,
}

impl InvariantState {
    pub fn new(couplings: HoppingPair, phi0: Complex64) -> Result<Self> {
        if phi0 == Complex64::new(0.0, 0.0) {
            return Err(WalkError::ZeroPhi0);
        }
        Ok(Self { phi0, couplings })
    }

    /// The member with unit total probability on the half line, `phi0` real
    /// and positive. Only exists in the localized phase.
    pub fn normalized(couplings: HoppingPair) -> Result<Self> {
        if classify_phase(couplings) == Phase::Delocalized {
            return Err(WalkError::NotNormalizable);
        }
        let phi0 = (1.0 - couplings.ratio().powi(2)).sqrt();
        Self::new(couplings, Complex64::new(phi0, 0.0))
    }

    pub fn phi0(&self) -> Complex64 {
        self.phi0
    }

    pub fn amplitude(&self, x: usize) -> Complex64 {
        if x % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            self.phi0 * pow(-self.couplings.ratio(), x / 2)
        }
    }

    /// `sum_x |phi(x)|^2` over the half line, or `None` if it diverges.
    pub fn total_mass(&self) -> Option<f64> {
        match classify_phase(self.couplings) {
            Phase::Localized => Some(self.phi0.norm_sqr() / (1.0 - self.couplings.ratio().powi(2))),
            Phase::Delocalized => None,
        }
    }

    pub fn field(&self, n_sites: usize) -> AmplitudeField {
        AmplitudeField::new((0..n_sites).map(|x| self.amplitude(x)).collect(), 0.0)
    }
}

/// The invariant state truncated to `n_sites` sites.
pub fn invariant_state(
    couplings: HoppingPair,
    phi0: Complex64,
    n_sites: usize,
) -> Result<AmplitudeField> {
    Ok(InvariantState::new(couplings, phi0)?.field(n_sites))
}
