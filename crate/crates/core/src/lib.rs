//! Assurance cases with machine-checked formal evidence.

pub mod argdsl;
pub mod checker;
pub mod depgraph;
pub mod sacm;
pub mod tokeneer;
