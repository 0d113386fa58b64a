//! Coherent parity check (CPC) codes over a Pauli-frame simulator.
//!
//! [`pauli`], [`gate`] and [`circuit`] form the Clifford engine used as the
//! oracle for everything else. [`cpc`] holds the adjacency-matrix model,
//! [`search`] the exhaustive discovery, [`route`] the linear-architecture
//! SWAP insertion, [`native`] lowering to the SP gate and peephole
//! simplification, and [`noisesim`] the noise and fault studies.

pub mod bitmatrix;
pub mod circuit;
pub mod cpc;
pub mod error;
pub mod gate;
pub mod native;
pub mod noisesim;
pub mod pauli;
pub mod route;
pub mod search;

pub use bitmatrix::BitMatrix;
pub use circuit::{conjugate_pauli, oracle_syndrome, propagate, Circuit, Role, Syndrome};
pub use cpc::{AdjacencyTriple, ErrorSet, ErrorVector, ValidityMode};
pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use pauli::{Letter, PauliString};
