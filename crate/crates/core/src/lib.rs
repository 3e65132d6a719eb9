//! Executable Tukia-type conjugation machinery.
//!
//! The crate represents groups of quasisimilarities acting on parabolic
//! boundary metric spaces, checks the cocycle identities attached to them, and
//! computes a conjugating shear by Følner (Cesàro) averaging of the orbit of
//! `0` under the associated affine action. The result is certified a posteriori
//! through fixed-point residuals and similarity defects measured on finite
//! samples.
//!
//! Modules:
//! - [`spaces`]: boundary metrics (power-Euclidean, parabolic `d_A`, m-adic,
//!   max-products), sampled point clouds and base-space similarities.
//! - [`filiform`]: exact rational arithmetic in the model filiform group,
//!   quasiconformal normal forms and their traces on the first layer.
//! - [`lipspace`]: the space of basepoint-normalized Lipschitz maps and the
//!   module action of the opposite group.
//! - [`cohomology`]: words, cocycles, affine actions and coboundary solving.
//! - [`conjugator`]: averaging, conjugation, similarity certification and the
//!   block induction on triangular almost-similarities.
//! - [`cli`]: scenario files, reports and the `tukia` command line.

pub mod cli;
pub mod cohomology;
pub mod conjugator;
pub mod error;
pub mod filiform;
pub mod lipspace;
pub mod rational;
pub mod spaces;

pub use error::{Error, Result};
