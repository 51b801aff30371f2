//! Parity-proof census of a basis family through its GF(2) kernel.
//!
//! Every parity proof of a family is an odd-weight kernel vector of the
//! family's incidence matrix. A critical proof has no proper sub-proof, so its
//! columns have nullity exactly one; only those survivors go to the solver.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::families::Family;
use crate::orthostruct::{system_symbol, Basis, BasisTable, OrthogonalityGraph, SystemSymbol};
use crate::rayset::RaySet;

use super::gf2::{kernel, nullity_is_one, Gf2Vec, IncidenceMatrix};
use super::proof::{critical_status, CriticalStatus};
use super::solver::SolverConfig;

/// Subset of a family's bases (family index `k` at bit `k`); families have at most 256 bases.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SubsetMask(pub [u64; 4]);

impl SubsetMask {
    fn from_gf2(v: &Gf2Vec) -> SubsetMask {
        let mut m = SubsetMask::default();
        for (slot, w) in m.0.iter_mut().zip(v.words()) {
            *slot = *w;
        }
        m
    }

    #[inline]
    fn xor(&mut self, other: &SubsetMask) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    #[inline]
    pub fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    k * 64 + tz
                })
            })
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CensusConfig {
    /// Full enumeration when the kernel dimension is at most this.
    pub enumeration_cap: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    /// Random kernel samples drawn when the kernel is too large to enumerate.
    pub samples: u64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            enumeration_cap: 26,
            solver: SolverConfig::default(),
            seed: 0,
            samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoundProof {
    pub members: SubsetMask,
    pub symbol_id: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolCount {
    pub symbol: SystemSymbol,
    pub bases: u32,
    pub count: u64,
}

#[derive(Debug, Clone)]
pub struct Census {
    pub family: String,
    pub family_size: usize,
    pub kernel_dimension: usize,
    pub exhaustive: bool,
    pub seed: u64,
    /// Odd-weight kernel vectors looked at (sampled ones in the randomized mode).
    pub candidates: u64,
    /// Candidates (or reductions) without a proper sub-proof.
    pub circuits: u64,
    pub unresolved: u64,
    /// Critical proofs, ordered by member mask.
    pub proofs: Vec<FoundProof>,
    pub symbols: Vec<SystemSymbol>,
    /// Fraction of the odd-weight kernel vectors examined.
    pub coverage: f64,
}

impl Census {
    pub fn symbol(&self, p: &FoundProof) -> &SystemSymbol {
        &self.symbols[p.symbol_id as usize]
    }

    pub fn by_symbol(&self) -> Vec<SymbolCount> {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for p in &self.proofs {
            *counts.entry(p.symbol_id).or_default() += 1;
        }
        let mut out: Vec<SymbolCount> = counts
            .into_iter()
            .map(|(id, count)| {
                let symbol = self.symbols[id as usize].clone();
                SymbolCount {
                    bases: symbol.basis_count(),
                    symbol,
                    count,
                }
            })
            .collect();
        out.sort_by(|a, b| a.bases.cmp(&b.bases).then(a.symbol.cmp(&b.symbol)));
        out
    }

    pub fn max_bases(&self) -> u32 {
        self.proofs
            .iter()
            .map(|p| p.members.count())
            .max()
            .unwrap_or(0)
    }

    pub fn bases_of(&self, table: &BasisTable, family: &Family, p: &FoundProof) -> Vec<Basis> {
        p.members
            .members()
            .map(|k| *table.basis(family.bases[k]))
            .collect()
    }

    /// `symbol,count,exhaustive` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "symbol,count,exhaustive")?;
        for row in self.by_symbol() {
            writeln!(out, "{},{},{}", row.symbol, row.count, self.exhaustive)?;
        }
        Ok(())
    }
}

enum Outcome {
    NotCircuit,
    Circuit(CriticalStatus, Option<SystemSymbol>),
}

fn examine(
    x: &SubsetMask,
    cols: &[RaySet],
    graph: &OrthogonalityGraph,
    cfg: SolverConfig,
    buf: &mut Vec<RaySet>,
) -> Outcome {
    buf.clear();
    buf.extend(x.members().map(|k| cols[k]));
    if !nullity_is_one(buf.iter().copied()) {
        return Outcome::NotCircuit;
    }
    let status = critical_status(buf, graph, cfg);
    let symbol = (status == CriticalStatus::Critical).then(|| {
        let rays = buf.iter().fold(RaySet::EMPTY, |a, &c| a.union(c));
        system_symbol(rays, buf).expect("contexts drawn from their own union")
    });
    Outcome::Circuit(status, symbol)
}

#[derive(Default)]
struct Partial {
    candidates: u64,
    circuits: u64,
    unresolved: u64,
    found: Vec<(SubsetMask, SystemSymbol)>,
}

impl Partial {
    fn record(&mut self, x: SubsetMask, outcome: Outcome) {
        self.candidates += 1;
        if let Outcome::Circuit(status, symbol) = outcome {
            self.circuits += 1;
            match status {
                CriticalStatus::Critical => {
                    self.found.push((x, symbol.expect("critical has symbol")))
                }
                CriticalStatus::Unresolved { .. } => self.unresolved += 1,
                CriticalStatus::NotCritical { .. } => {}
            }
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.candidates += other.candidates;
        self.circuits += other.circuits;
        self.unresolved += other.unresolved;
        self.found.extend(other.found);
        self
    }
}

/// Kernel basis rearranged so that the first vector is odd and the rest even.
/// Odd kernel vectors are then exactly `odd ^ (any combination of evens)`.
fn split_kernel(basis: &[Gf2Vec]) -> Option<(SubsetMask, Vec<SubsetMask>)> {
    let masks: Vec<SubsetMask> = basis.iter().map(SubsetMask::from_gf2).collect();
    let pos = masks.iter().position(|m| m.count() % 2 == 1)?;
    let odd = masks[pos];
    let evens = masks
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != pos)
        .map(|(_, m)| {
            let mut m = *m;
            if m.count() % 2 == 1 {
                m.xor(&odd);
            }
            m
        })
        .collect();
    Some((odd, evens))
}

pub fn enumerate_family_proofs(
    table: &BasisTable,
    graph: &OrthogonalityGraph,
    family: &Family,
    cfg: &CensusConfig,
) -> Result<Census> {
    assert!(family.len() <= 256, "families are limited to 256 bases");
    let cols: Vec<RaySet> = family.bases.iter().map(|&k| table.masks()[k]).collect();
    let ker = kernel(&IncidenceMatrix::new(cols.clone()));
    let dim = ker.dimension();
    let mut census = Census {
        family: family.name.clone(),
        family_size: family.len(),
        kernel_dimension: dim,
        exhaustive: dim <= cfg.enumeration_cap,
        seed: cfg.seed,
        candidates: 0,
        circuits: 0,
        unresolved: 0,
        proofs: Vec::new(),
        symbols: Vec::new(),
        coverage: 1.0,
    };
    let Some((odd, evens)) = split_kernel(&ker.basis) else {
        return Ok(census);
    };
    let partial = if census.exhaustive {
        sweep(&cols, graph, cfg.solver, odd, &evens)
    } else {
        sample(&cols, graph, cfg, odd, &evens)
    };
    let total_odd = 2f64.powi(evens.len() as i32);
    census.coverage = if census.exhaustive {
        1.0
    } else {
        (partial.candidates as f64 / total_odd).min(1.0)
    };
    census.candidates = partial.candidates;
    census.circuits = partial.circuits;
    census.unresolved = partial.unresolved;
    let mut found = partial.found;
    found.sort_by_key(|f| f.0);
    let mut ids: HashMap<SystemSymbol, u32> = HashMap::new();
    for (members, symbol) in found {
        let next = ids.len() as u32;
        let symbol_id = *ids.entry(symbol.clone()).or_insert_with(|| {
            census.symbols.push(symbol);
            next
        });
        census.proofs.push(FoundProof { members, symbol_id });
    }
    Ok(census)
}

/// Gray-code walk over every odd kernel vector, split into chunks by the top evens.
fn sweep(
    cols: &[RaySet],
    graph: &OrthogonalityGraph,
    solver: SolverConfig,
    odd: SubsetMask,
    evens: &[SubsetMask],
) -> Partial {
    let e = evens.len();
    let chunk_bits = e.min(8);
    let low = e - chunk_bits;
    (0u64..1 << chunk_bits)
        .into_par_iter()
        .map(|chunk| {
            let mut x = odd;
            for b in 0..chunk_bits {
                if chunk >> b & 1 == 1 {
                    x.xor(&evens[low + b]);
                }
            }
            let mut part = Partial::default();
            let mut buf = Vec::new();
            part.record(x, examine(&x, cols, graph, solver, &mut buf));
            for i in 1u64..1 << low {
                x.xor(&evens[i.trailing_zeros() as usize]);
                part.record(x, examine(&x, cols, graph, solver, &mut buf));
            }
            part
        })
        .reduce(Partial::default, Partial::merge)
}

/// Shrinks an odd kernel vector until its columns have nullity one.
fn reduce_to_circuit(mut x: SubsetMask, cols: &[RaySet], rng: &mut ChaCha8Rng) -> SubsetMask {
    loop {
        let members: Vec<usize> = x.members().collect();
        let sub = kernel(&IncidenceMatrix::new(
            members.iter().map(|&k| cols[k]).collect(),
        ));
        if sub.dimension() <= 1 {
            return x;
        }
        let options: Vec<SubsetMask> = sub
            .basis
            .iter()
            .map(|v| {
                let mut m = SubsetMask::default();
                for local in v.ones() {
                    let k = members[local];
                    m.0[k / 64] |= 1 << (k % 64);
                }
                if m.count() % 2 == 0 {
                    let mut y = x;
                    y.xor(&m);
                    y
                } else {
                    m
                }
            })
            .filter(|m| *m != x)
            .collect();
        x = options[rng.gen_range(0..options.len())];
    }
}

fn sample(
    cols: &[RaySet],
    graph: &OrthogonalityGraph,
    cfg: &CensusConfig,
    odd: SubsetMask,
    evens: &[SubsetMask],
) -> Partial {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen = HashSet::new();
    let mut starts = Vec::with_capacity(cfg.samples as usize);
    for _ in 0..cfg.samples {
        let mut x = odd;
        for ev in evens {
            if rng.gen::<bool>() {
                x.xor(ev);
            }
        }
        let c = reduce_to_circuit(x, cols, &mut rng);
        if seen.insert(c) {
            starts.push(c);
        }
    }
    let mut part = starts
        .par_iter()
        .map(|c| {
            let mut p = Partial::default();
            let mut buf = Vec::new();
            p.record(*c, examine(c, cols, graph, cfg.solver, &mut buf));
            p
        })
        .reduce(Partial::default, Partial::merge);
    part.candidates = cfg.samples;
    part
}
