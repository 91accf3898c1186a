//! Value distribution of Artin L-functions attached to non-Galois cubic fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`local_arithmetic`]: splitting types, local factors, series coefficients, local weights;
//! * [`euler_products`]: the four characteristic-function Euler products;
//! * [`density`]: densities and distribution functions by Fourier inversion;
//! * [`cubic_fields`]: enumeration, discriminants, splitting types and field tables;
//! * [`lvalues`]: L-values per field from Euler products and smoothed Dirichlet series;
//! * [`experiments`]: empirical-versus-predicted reports.

pub mod cubic_fields;
pub mod density;
pub mod error;
pub mod euler_products;
pub mod experiments;
pub mod local_arithmetic;
pub mod lvalues;
pub mod primes;
pub mod special;

pub use error::{Error, Result};
