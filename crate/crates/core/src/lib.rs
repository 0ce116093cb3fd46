//! Explicit descent obstructions for Jacobians of hyperelliptic curves
//! `y^2 = x^(2g+2) - a` over a real quadratic field `Q(sqrt p)`.
//!
//! The pipeline is:
//!
//! 1. [`pell`] finds elements `v` of norm `-1`;
//! 2. [`construct`] turns `v` into a parameter `a` whose curve is isomorphic
//!    to its Galois conjugate, together with the integer reduction `c`;
//! 3. [`padic`] extracts the root `alpha` of `alpha^(2g+2) = a/c` in the
//!    ramified extension `Q_p(sqrt p)`;
//! 4. [`periods`] computes the minimal period `alpha^(g(g+1)/2)`;
//! 5. [`obstruction`] certifies that its double-coset class is non-trivial and
//!    assembles a self-contained JSON report that [`cli`] can re-verify.

pub mod cli;
pub mod construct;
pub mod error;
pub mod obstruction;
pub mod padic;
pub mod pell;
pub mod periods;
pub mod quadfield;

pub use error::{Error, Result};
