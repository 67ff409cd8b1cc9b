//! Exact computations with nilpotent Novikov algebras given by structure
//! constants: cohomology, central extensions, isomorphism search and a
//! catalog of five-dimensional algebras built from orbit representatives.

pub mod algebra;
pub mod catalog;
pub mod cohomology;
pub mod expr;
pub mod extensions;
pub mod field;
pub mod fplab;
pub mod invariants;
pub mod linalg;
pub mod morphisms;

pub use algebra::Algebra;
pub use cohomology::Cocycle;
pub use field::{Elem, Field};
pub use linalg::{Matrix, Subspace};
