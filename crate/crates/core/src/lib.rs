//! Reconstruction of positive atomic measures on compact boxes and
//! semialgebraic sets from exact or noisy polynomial moments.
//!
//! The crate is organized around a small set of building blocks:
//!
//! - [`basis`]: multivariate polynomial bases (monomial, orthonormal
//!   tensor-Legendre, Chebyshev products), exact box moments and
//!   Chebyshev polynomials.
//! - [`points`]: exact linear algebra on ideals of finite point sets
//!   (Hilbert functions, interpolation and generator degrees, degree
//!   bounds for unique recovery).
//! - [`conic`]: an embedded first-order primal-dual solver for cone
//!   programs with free, nonnegative, second-order and PSD blocks.
//! - [`recovery`]: the exact two-step pipeline (trace-normalized SOS
//!   moment SDP, support extraction, nonnegative weight fitting).
//! - [`blasso`]: total-variation minimization under an l2 moment
//!   mismatch ball, via a finite SOS hierarchy and dual-certificate
//!   measure extraction.
//! - [`certify`]: quadratic-isolation witnesses and the quantitative
//!   diagnostics that bound how far a recovered measure can stray.
//! - [`summarize`]: compression of general measures into k-atom
//!   quadrature-like summaries.
//! - [`harness`]: reproducible randomized experiment sweeps.

pub mod basis;
pub mod blasso;
pub mod certify;
pub mod cli;
pub mod conic;
pub mod formats;
pub mod harness;
pub mod linalg;
pub mod points;
pub mod poly;
pub mod recovery;
pub mod summarize;

pub use basis::{BasisKind, MultiIndex, PolyBasis, Polynomial, Weight};
pub use points::{IdealProfile, PointSet};
pub use poly::MonoPoly;
