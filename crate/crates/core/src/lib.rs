//! Intuitionistic logic with its computability-logic game semantics.

pub mod affine;
pub mod completeness;
pub mod game_core;
pub mod int_calculus;
pub mod kripke;
pub mod machines;
pub mod soundness;
pub mod syntax;
