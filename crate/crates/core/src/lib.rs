//! Rotating vortex-patch equilibria for the generalized surface
//! quasi-geostrophic equation: dispersion relations at the disc and the
//! annulus, pseudo-spectral Newton solves for the boundary, and fold
//! continuation along solution branches.

pub mod error;
pub mod specfun;
pub mod spectrum;
pub mod contour;
pub mod solver;
pub mod continuation;
pub mod io;

pub use error::{Result, VstateError};
