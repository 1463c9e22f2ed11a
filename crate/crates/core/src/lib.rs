//! Forward solvers and pointwise modulus reconstruction for heterogeneous
//! isotropic linear elasticity.
//!
//! The crate has two halves. The forward half computes strain fields in a
//! heterogeneous medium under a prescribed mean strain: a periodic spectral
//! solver built on the Green operator of a homogeneous reference medium
//! ([`spectral`]), and a bounded-domain finite-element solver with affine
//! Dirichlet data ([`fem`]). The inverse half ([`reconstruct`]) turns full
//! strain-field maps back into pointwise bulk and shear modulus maps through
//! first-order closed-form formulas, exact to leading order in the modulus
//! contrast.
//!
//! Everything is dimension-generic over 2D and 3D through the orthonormal
//! Mandel vector representation of symmetric tensors ([`tensor`]), in which
//! the double contraction is the ordinary dot product.
//!
//! Analytic references live in [`oracles`]: the dilute spherical-inclusion
//! interior strain and two-phase variational effective moduli with their
//! phase-wise second strain moments. They validate the solvers; nothing in
//! them calls the numerics.
//!
//! ```
//! use elastimap::green::{green_coeffs, ReferenceMedium};
//! use elastimap::tensor::Dim;
//!
//! // Unit 2D reference medium: the spherical and deviatoric eigenvalues of
//! // the angular average of the Green operator.
//! let medium = ReferenceMedium::new(Dim::Two, 1.0, 1.0)?;
//! let coeffs = green_coeffs(&medium);
//! assert_eq!((coeffs.lambda_j, coeffs.lambda_k), (0.25, 0.75));
//! # Ok::<(), elastimap::Error>(())
//! ```
//!
//! The `elastimap` binary in the companion crate drives the full pipeline
//! (generate, solve, reconstruct, report) over the on-disk field format
//! defined in [`io`].

// Index loops in the numerical kernels tie several arrays to one index;
// iterator rewrites hide that coupling.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod fem;
pub mod fft;
pub mod field;
pub mod green;
pub mod io;
pub mod microstructure;
pub mod oracles;
pub mod pipeline;
pub mod reconstruct;
pub mod spectral;
pub mod tensor;
pub mod validate;

pub use error::{Error, Result};

/// Mirrors of the guide chapters; their code fences run as doc-tests so the
/// book cannot drift from the library.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/notation.md")]
    pub mod notation {}
    #[doc = include_str!("../../../book/src/green-operator.md")]
    pub mod green_operator {}
    #[doc = include_str!("../../../book/src/forward-solvers.md")]
    pub mod forward_solvers {}
    #[doc = include_str!("../../../book/src/microstructures.md")]
    pub mod microstructures {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    pub mod reconstruction {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    pub mod oracles {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    pub mod pipeline {}
}
