//! Root data: Cartan matrices, weights, `P/Q`, and characters.

pub mod dynkin;
pub mod group;
pub mod roots;
pub mod weight;

pub use dynkin::{cartan_matrix, CartanMatrix, DynkinType, Family};
pub use group::{fundamental_group, FiniteAbelianGroup, GroupElement, PqProjection};
pub use roots::{
    klimyk_decompose, positive_roots, weight_multiplicities, weyl_dim, Root, RootSystem,
};
pub use weight::{dominant_weights_up_to, Weight};
