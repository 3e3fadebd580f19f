//! Jacobi operators along harmonic maps between model manifolds.
//!
//! The crate evaluates the tension field, the Jacobi operator and the second
//! variation of energy for maps between spheres, flat tori and Euclidean
//! spaces, checks how these quantities behave under composition with harmonic
//! morphisms, computes exact spectra for maps with circle domain, and tests
//! harmonic variations of maps into spheres for rigidity.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod jacobi;
pub mod maps;
pub mod rigidity;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use geometry::{Manifold, Point, TangentVector};
