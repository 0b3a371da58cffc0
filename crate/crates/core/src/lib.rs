//! Exact computations around invariant 2-cocycles on the duals of quantum
//! groups `U_q(g)` at generic `q`, and the resulting classification of
//! monoidal autoequivalences of `Rep U_q(g)`.

pub mod circle;
pub mod classification;
pub mod cohomology;
pub mod error;
pub mod invariant;
pub mod lattice;
pub mod linalg;
pub mod monoid;
pub mod scalar;
pub mod uqg;

pub use circle::CircleValue;
pub use error::{Error, Result};
pub use scalar::Scalar;
