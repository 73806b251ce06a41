//! Finite relational structures, homomorphism search, partial semilattices,
//! free structures of finite algebras, and semilattice-interpretability tests
//! on identity systems and algebras.

pub mod error;
pub mod freecons;
pub mod gadget;
pub mod homsearch;
pub mod identlang;
pub mod io;
pub mod semilat;
pub mod structures;

pub use error::{Error, Result};
pub use freecons::{FiniteAlgebra, FreeBundle};
pub use homsearch::{HomFailure, OperationTable, SearchOptions};
pub use structures::{
    ComponentDecomposition, Homomorphism, Limits, ProductIndex, RelationalStructure, Signature, Substructure,
};
