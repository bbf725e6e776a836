//! Model checking the modal mu-calculus over Kelly and DAG decompositions of
//! directed graphs by composing types across directed separations.

pub mod formula;
pub mod structures;
pub mod games;
pub mod profiles;
pub mod types;
pub mod decomp;
pub mod cli;

pub mod error;
pub mod gen;
pub mod par;

pub use error::{Error, Result};
