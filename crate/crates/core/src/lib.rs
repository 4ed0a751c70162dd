//! Decision procedures for primitive integer solutions of x^2 + B y^2 = C z^n
//! with n odd: local tests at every prime, a class-group criterion over
//! quadratic orders, a reduction cascade, brute-force search, and counting
//! statistics.

pub mod arith;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod global;
pub mod local;
pub mod oracle;
pub mod qforms;
pub mod stats;
pub mod verdict;

pub use arith::{FactoredInt, Instance, SquarefreeSplit};
pub use error::{Error, Result};
