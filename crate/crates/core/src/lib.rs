//! Continuous-time quantum walk on the half line `{0, 1, 2, ...}` with
//! hopping amplitudes alternating `gamma0, gamma1, gamma0, ...`.
//!
//! The crate has two halves that check each other:
//!
//! * [`lattice`] and [`propagator`] simulate `i dpsi/dt = H psi` on a finite
//!   chain, either with the forward-Euler scheme or with a norm-preserving
//!   Chebyshev propagator.
//! * [`closed_form`] holds the exact Laplace-domain amplitudes, the long-time
//!   limit measure and the localization criterion `|gamma0| < |gamma1|`.
//!
//! [`laplace`] transforms simulated trajectories numerically so the two can be
//! compared, and [`experiments`] runs phase-diagram sweeps, front tracking and
//! convergence studies on top of both.
//!
//! ```
//! use halfwalk::closed_form::{classify_phase, limit_measure, Phase};
//! use halfwalk::lattice::HoppingPair;
//!
//! let g = HoppingPair::new(1.0 / 3.0, 0.5)?;
//! assert_eq!(classify_phase(g), Phase::Localized);
//! assert!((limit_measure(0, g) - 25.0 / 81.0).abs() < 1e-15);
//! # Ok::<(), halfwalk::WalkError>(())
//! ```

pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod export;
pub mod laplace;
pub mod lattice;
pub mod propagator;

pub use error::{Result, WalkError};
