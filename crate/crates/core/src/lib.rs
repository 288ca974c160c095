//! # divkit
//!
//! Exact computation of statistical divergences over finite probability
//! distributions, together with the machinery needed to read them as
//! hypothesis tests:
//!
//! - [`dist`]: distributions, channels, pushforward, composition and the
//!   weak Birkhoff-von Neumann decomposition of a channel into
//!   deterministic rules.
//! - [`divergences`]: closed forms for the ε-divergence, Rényi, KL, max
//!   divergence, total variation, Hellinger, generic f-divergences and
//!   suprema of quasi-convex functions over partitions.
//! - [`kcut`]: the k-cut of a divergence (its supremum over k-outcome
//!   decision rules), generatedness gaps and the three-point Rényi
//!   counterexample.
//! - [`regions`]: privacy regions in the (Type I, Type II) error plane,
//!   boundary tabulation, containment and the hypothesis-testing check.
//! - [`convert`]: conversion laws from Rényi and Hellinger bounds to
//!   (ε, δ)-differential privacy.
//! - [`mechanisms`]: randomized response and checkers for DP, RDP, zCDP
//!   and tCDP claims.
//! - [`sample`]: seeded random distributions and channels.
//! - [`table`]: CSV and SVG renderings of point sets.
//!
//! Everything is computed exactly by enumeration over finite supports, so
//! sizes are kept small and enumeration limits fail fast with
//! [`Error::Capacity`].
//!
//! ```
//! use divkit::dist::Dist;
//! use divkit::kcut::{counterexample_pair, k_cut};
//! use divkit::divergences::DivergenceSpec;
//!
//! let (mu1, mu2) = counterexample_pair(2.0, 4.0).unwrap();
//! let cut = k_cut(&DivergenceSpec::Renyi { alpha: 2.0 }, 2, &mu1, &mu2).unwrap();
//! assert!(cut.gap > 0.04);
//! # let _ = Dist::from_probs(&[0.5, 0.5]).unwrap();
//! ```

pub mod convert;
pub mod dist;
pub mod divergences;
mod enumerate;
mod error;
pub mod kcut;
pub mod mechanisms;
pub mod normal;
pub mod regions;
pub mod sample;
pub mod table;

pub use error::{Error, Result};

/// Tolerance for validating that probabilities sum to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Tolerance for internal float comparisons.
pub const EPS_COMPARE: f64 = 1e-12;
