//! Numerical laboratory for the beta-Jacobi corners process.
//!
//! The crate evaluates, samples, and cross-validates the computable objects
//! attached to the process: exact finite-size joint moments (nested contour
//! integrals), their large-L limits (first-moment differences, the limit
//! density and its support, CLT covariances, Gaussian-free-field pullback
//! covariances), Monte Carlo draws from the exact level densities, Kerov
//! diagrams of interlacing pairs, and the roots of Jacobi orthogonal
//! polynomials that arise in the theta -> infinity degeneration.
//!
//! Modules roughly mirror those layers:
//!
//! - [`contour`]: circle quadrature, nested families, contour planning
//! - [`formulas`]: asymptotic closed forms and covariances
//! - [`finite_moments`]: exact finite-size moments and dimension reduction
//! - [`sampler`]: MCMC for the level marginals and the interlacing chain
//! - [`diagrams`]: Kerov diagrams, signed measures, the limit shape
//! - [`jacobi_roots`]: orthogonal-polynomial roots and their interlacing
//! - [`stats`]: Monte Carlo estimates, joint cumulants, CLT comparisons
//! - [`verify`]: the end-to-end verification suite used by tests and the CLI

pub mod contour;
pub mod diagrams;
pub mod error;
pub mod finite_moments;
pub mod formulas;
pub mod jacobi_roots;
pub mod laurent;
pub mod parallel;
pub mod quad1d;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
