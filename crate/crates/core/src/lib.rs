//! Invariant connections and holomorphic structures on homogeneous spaces,
//! computed from Lie algebra data `(a, h₀, k)`.

pub mod cli;
pub mod error;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod moduli;
pub mod presets;
pub mod quotient;
pub mod reductive;

pub use error::{Error, Result};
