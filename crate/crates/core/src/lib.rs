//! Spectral theory on the S-spectrum and slice functional calculi for
//! operators on finite-dimensional Clifford modules.

// `!(x > tol)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod clifford;
pub mod contour;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod random;
pub mod slice;
pub mod spectrum;
pub mod verify;

pub use clifford::{paravector_on_plane, CliffordNumber, EigenSphere, ImaginaryUnit, Paravector};
pub use contour::{ContourPath, QuadratureConfig};
pub use error::{Error, Result};
pub use linalg::{CliffordMatrix, ModuleVector};
pub use slice::{LeftSliceFunction, StemFunction};
