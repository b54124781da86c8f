//! Limit laws of large two-colour balanced Pólya urns.
//!
//! The crate computes the law of the second-order term `W` of a large urn in
//! three independent ways and lets them check one another:
//!
//! - [`simulate`]: exact simulation of the discrete urn and of its
//!   continuous-time branching embedding, with martingale estimators;
//! - [`moments`]: the exact moment recursion for `E[Xⁿ]`, `E[Yⁿ]`;
//! - [`abelian`] and [`charfun`]: the closed-form characteristic functions
//!   `𝓕`, `𝓖` built from the inverse `J` of an Abelian integral on the Fermat
//!   curve, and densities by Fourier inversion or by a Gamma scale mixture.
//!
//! [`validate`] bundles the cross-checks into a report used by the CLI.

pub mod abelian;
pub mod charfun;
pub mod error;
pub mod io;
pub mod moments;
pub mod numeric;
pub mod params;
pub mod simulate;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{validate_params, SpectralConstants, UrnParams, ValidityClass};
