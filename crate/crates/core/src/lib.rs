//! Exact exterior calculus on ℝⁿ together with the potential operators,
//! harmonic expansions and cohomology representatives of the de Rham complex
//! over weighted Hölder spaces.

pub mod bump;
pub mod cohomology;
pub mod error;
pub mod exterior;
pub mod field;
pub mod harmonics;
pub mod kernels;
pub mod poly;
pub mod potentials;
pub mod quadrature;
pub mod spaces;
pub mod theta;

pub use error::{Error, Result};
pub use exterior::{Form, MultiIndex};
pub use field::{ScalarField, SymField};
pub use poly::{Poly, Q};
pub use quadrature::QuadratureSpec;
