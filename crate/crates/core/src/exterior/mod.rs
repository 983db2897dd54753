//! Exterior algebra on `R^N` and the comass of k-covectors.

pub mod basis;
mod comass;
mod field;
mod tensor;

pub use comass::{comass, comass_oracle, comass_oracle_refined, ComassOptions, ComassResult};
pub use field::{finite_difference_exterior_derivative, ConstantField, FnField, FormField, SumField};
pub use tensor::{compound_matrix, AlternatingTensor, OneFormWedge, SimpleKVector};
