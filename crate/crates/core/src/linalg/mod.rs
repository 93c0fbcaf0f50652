pub mod exact;
pub mod float;

pub use exact::{q, q_frac, rationalize, to_f64, QMatrix, Rational, Solution};
