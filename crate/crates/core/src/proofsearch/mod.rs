//! Parity proofs: verification, GF(2) kernels, colorability, criticality,
//! rank-2 refinement and family censuses.

pub mod census;
pub mod gf2;
pub mod proof;
pub mod refine;
pub mod solver;

pub use census::{
    enumerate_family_proofs, Census, CensusConfig, FoundProof, SubsetMask, SymbolCount,
};
pub use gf2::{kernel, Gf2Vec, IncidenceMatrix, Kernel};
pub use proof::{
    is_critical, is_parity_proof, noncontextuality_gap, proof_symbol, CriticalStatus, Criticality,
    NoncontextualityGap, ParityProof,
};
pub use refine::{rank2_refine, RefinedSymbol, Refinement};
pub use solver::{
    brute_force_colorable, colorable, Assignment, Colorability, SolverConfig, ValidityRule,
};
