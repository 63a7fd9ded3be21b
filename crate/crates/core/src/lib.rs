//! Operator-valued boolean, free and c-free cumulants over a pair of matrix
//! algebras `B = M_k(ℂ) ⊆ D = M_d(ℂ)`.

pub mod algebra;
pub mod certify;
pub mod convolution;
pub mod cumulants;
pub mod distribution;
pub mod error;
pub mod fock;
pub mod json;
pub mod lattice;
pub mod linear;
pub mod ncfun;
pub mod rng;
pub mod weights;

pub use algebra::{AlgebraPair, CMatrix};
pub use distribution::{Functional, MomentFunctional, PolynomialWord};
pub use error::{Error, Result};
pub use linear::LinearFunctional;
