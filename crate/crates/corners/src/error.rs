use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A doubling ladder hit its node budget without meeting the tolerance.
    /// Carries the last two estimates so the caller can judge how far off it was.
    #[error("quadrature did not converge within {nodes} nodes (last {last}, previous {prev})")]
    NonConvergence {
        nodes: usize,
        last: Complex64,
        prev: Complex64,
    },

    /// A contour family violated its nesting or separation invariants.
    #[error("invalid contour family: {0}")]
    InvalidFamily(String),

    /// No circle family satisfies the requested enclosure/exclusion geometry.
    /// The message names the violated constraint.
    #[error("contour plan infeasible: {0}")]
    Infeasible(String),

    /// An integrand denominator came within 1e-13 of zero, which signals a
    /// contour plan that runs through a pole.
    #[error("integrand pole hit: |{factor}| = {magnitude:.3e} at a quadrature node")]
    PoleHit {
        factor: &'static str,
        magnitude: f64,
    },

    /// Argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity that must be real came out with a large imaginary part.
    #[error("imaginary residue {imag:.3e} exceeds tolerance {tol:.3e}")]
    ImaginaryResidue { imag: f64, tol: f64 },

    /// An interlacing slot collapsed below resolvable width; the caller
    /// should resample the parent configuration.
    #[error("interlacing slot {index} has width {width:.3e} below 1e-12")]
    SlotDegenerate { index: usize, width: f64 },

    /// Root refinement left a residual above 1e-10.
    #[error("ill-conditioned root computation: residual {residual:.3e}")]
    IllConditioned { residual: f64 },

    /// Parameter or specification validation failure.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
