//! Combinatorics, symbolic models and high-precision diagnostics for the
//! Fibonacci unimodal map x -> x^2 + c and its class-A renormalizations.

pub mod class_a;
pub mod error;
pub mod fib_arith;
pub mod kneading;
pub mod model_map;
pub mod mp_dynamics;
pub mod quad_fibonacci;
pub mod search;
pub mod sign;

pub use error::{Error, Result};
pub use sign::Sign;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
