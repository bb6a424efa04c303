//! Parameterized algorithms for default and autoepistemic logic.
//!
//! Formulas, the relational structures that encode logical inputs, an MSO
//! model checker with builders for the encoding formulas, tree
//! decompositions, treewidth dynamic programming, and the semantics of
//! default and autoepistemic logic with pluggable entailment back-ends.

pub mod ael;
pub mod dl;
pub mod error;
pub mod families;
pub mod formula;
pub mod io;
pub mod limits;
pub mod mso;
pub mod random;
pub mod structures;
pub mod treewidth;
pub mod twdp;
pub mod verify;

pub use error::{Error, Result};
pub use limits::Limits;
