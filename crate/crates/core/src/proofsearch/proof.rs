use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orthostruct::{system_symbol, Basis, OrthogonalityGraph, SystemSymbol};
use crate::rayset::{RayId, RaySet};

use super::solver::{colorable, Assignment, Colorability, SolverConfig};

/// Odd context count and every ray even. Returns the verdict and ray multiplicities.
pub fn is_parity_proof(contexts: &[RaySet]) -> (bool, BTreeMap<RayId, u32>) {
    let mut mult: BTreeMap<RayId, u32> = BTreeMap::new();
    for ctx in contexts {
        for r in *ctx {
            *mult.entry(r).or_default() += 1;
        }
    }
    let ok = contexts.len() % 2 == 1 && mult.values().all(|m| m % 2 == 0);
    (ok, mult)
}

#[derive(Debug, Clone)]
pub struct ParityProof {
    pub bases: Vec<Basis>,
    pub multiplicities: BTreeMap<RayId, u32>,
    pub symbol: SystemSymbol,
}

impl ParityProof {
    pub fn new(bases: Vec<Basis>) -> Result<ParityProof> {
        let masks: Vec<RaySet> = bases.iter().map(Basis::mask).collect();
        let (ok, multiplicities) = is_parity_proof(&masks);
        if !ok {
            return Err(Error::Mismatch(format!(
                "{} bases do not form a parity proof",
                bases.len()
            )));
        }
        let rays: RaySet = multiplicities.keys().collect();
        let symbol = system_symbol(rays, &masks)?;
        Ok(ParityProof {
            bases,
            multiplicities,
            symbol,
        })
    }

    pub fn masks(&self) -> Vec<RaySet> {
        self.bases.iter().map(Basis::mask).collect()
    }

    pub fn rays(&self) -> RaySet {
        self.multiplicities.keys().collect()
    }

    /// Same bases regardless of listing order.
    pub fn same_bases(&self, other: &ParityProof) -> bool {
        let mut a = self.bases.clone();
        let mut b = other.bases.clone();
        a.sort();
        b.sort();
        a == b
    }
}

pub fn proof_symbol(proof: &ParityProof) -> SystemSymbol {
    proof.symbol.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CriticalStatus {
    Critical,
    /// Dropping basis `dropped` (index into the proof) still leaves an uncolorable set.
    NotCritical {
        dropped: usize,
    },
    /// The solver ran out of budget on the reduction dropping `dropped`.
    Unresolved {
        dropped: usize,
        nodes: u64,
    },
}

#[derive(Debug, Clone)]
pub struct Criticality {
    pub status: CriticalStatus,
    /// Dropped basis index → a valid assignment of the remaining bases.
    pub witnesses: BTreeMap<usize, Assignment>,
}

impl Criticality {
    pub fn is_critical(&self) -> bool {
        self.status == CriticalStatus::Critical
    }
}

/// Drops each basis in turn and asks the solver for an assignment of the rest.
pub fn is_critical(
    contexts: &[RaySet],
    graph: &OrthogonalityGraph,
    cfg: SolverConfig,
) -> Criticality {
    let mut witnesses = BTreeMap::new();
    let mut rest = Vec::with_capacity(contexts.len());
    for dropped in 0..contexts.len() {
        rest.clear();
        rest.extend(
            contexts
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != dropped)
                .map(|(_, &c)| c),
        );
        match colorable(&rest, graph, cfg) {
            Ok(Colorability::Colorable(a)) => {
                witnesses.insert(dropped, a);
            }
            Ok(Colorability::Uncolorable) => {
                return Criticality {
                    status: CriticalStatus::NotCritical { dropped },
                    witnesses,
                }
            }
            Err(Error::TimeoutExceeded { nodes }) => {
                return Criticality {
                    status: CriticalStatus::Unresolved { dropped, nodes },
                    witnesses,
                }
            }
            Err(e) => unreachable!("solver only fails by timeout: {e}"),
        }
    }
    Criticality {
        status: CriticalStatus::Critical,
        witnesses,
    }
}

/// Faster yes/no criticality used by the census; no witnesses retained.
pub(crate) fn critical_status(
    contexts: &[RaySet],
    graph: &OrthogonalityGraph,
    cfg: SolverConfig,
) -> CriticalStatus {
    let mut rest = Vec::with_capacity(contexts.len());
    for dropped in 0..contexts.len() {
        rest.clear();
        rest.extend_from_slice(&contexts[..dropped]);
        rest.extend_from_slice(&contexts[dropped + 1..]);
        match colorable(&rest, graph, cfg) {
            Ok(Colorability::Colorable(_)) => {}
            Ok(Colorability::Uncolorable) => return CriticalStatus::NotCritical { dropped },
            Err(Error::TimeoutExceeded { nodes }) => {
                return CriticalStatus::Unresolved { dropped, nodes }
            }
            Err(e) => unreachable!("solver only fails by timeout: {e}"),
        }
    }
    CriticalStatus::Critical
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NoncontextualityGap {
    /// Largest value any noncontextual model reaches: `B - 2`.
    pub classical_bound: u32,
    /// Quantum value: `B`.
    pub quantum_value: u32,
}

pub fn noncontextuality_gap(
    proof: &ParityProof,
    criticality: &Criticality,
) -> Result<NoncontextualityGap> {
    if !criticality.is_critical() {
        return Err(Error::NotCritical);
    }
    let b = proof.bases.len() as u32;
    Ok(NoncontextualityGap {
        classical_bound: b - 2,
        quantum_value: b,
    })
}
