pub mod integer;
pub mod rational;

pub use integer::{
    big_mat_mul, determinant, identity, mat_mul, smith_normal_form, solve_mod_one, to_big,
    BigMatrix, IntMatrix, Snf,
};
pub use rational::{rat, rat_int, QMatrix, Rref, Q};
