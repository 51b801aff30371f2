//! Subsystems of E8: E7, E6, and the Kernaghan-Peres style 40-ray sets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::orthostruct::{
    check_saturation, system_symbol, Basis, BasisTable, OrthogonalityGraph, SystemSymbol,
};
use crate::proofsearch::ParityProof;
use crate::raygen::RaySystem;
use crate::rayset::{check_ray, RayId, RaySet, RAY_COUNT};
use crate::symmetry::count_orderings;

/// A ray subset with the contexts it carries. Contexts may be shorter than 8.
#[derive(Debug, Clone)]
pub struct SubSystem {
    pub rays: RaySet,
    pub contexts: Vec<RaySet>,
    pub symbol: SystemSymbol,
    pub context_size: usize,
}

impl SubSystem {
    /// The orthogonality graph induced on `rays`.
    pub fn induced_graph(&self, graph: &OrthogonalityGraph) -> OrthogonalityGraph {
        induced(graph, self.rays)
    }

    pub fn is_saturated(&self, graph: &OrthogonalityGraph) -> bool {
        check_saturation(&self.contexts, &self.induced_graph(graph)).is_saturated()
    }
}

fn induced(graph: &OrthogonalityGraph, rays: RaySet) -> OrthogonalityGraph {
    let neighbours = (1..=RAY_COUNT as RayId)
        .map(|r| {
            if rays.contains(r) {
                graph.neighbours(r).intersection(rays)
            } else {
                RaySet::EMPTY
            }
        })
        .collect();
    OrthogonalityGraph::from_neighbours(neighbours)
}

/// The rays orthogonal to `anchor`, with each basis through the anchor cut down to 7 rays.
pub fn extract_e7(
    table: &BasisTable,
    graph: &OrthogonalityGraph,
    anchor: RayId,
) -> Result<SubSystem> {
    check_ray(anchor as u32)?;
    let rays = graph.neighbours(anchor);
    let contexts: Vec<RaySet> = table
        .containing(anchor)
        .iter()
        .map(|&k| table.masks()[k].difference(RaySet::single(anchor)))
        .collect();
    let symbol = system_symbol(rays, &contexts)?;
    Ok(SubSystem {
        rays,
        contexts,
        symbol,
        context_size: 7,
    })
}

/// Orderings of a 7-ray E7 context that extend, with `anchor` fixed, to a
/// symmetry of the 63 rays. Times 135 contexts and 2^7 signs this is |W(E7)|.
pub fn e7_ordering_count(rays: &RaySystem, e7: &SubSystem, anchor: RayId, context: RaySet) -> u64 {
    let ids: Vec<RayId> = context.iter().collect();
    count_orderings(rays, &ids, &ids, e7.rays, Some(anchor))
}

/// The rays orthogonal to both `i` and `j`, which must not be orthogonal to each other.
pub fn extract_e6(graph: &OrthogonalityGraph, i: RayId, j: RayId) -> Result<RaySet> {
    check_ray(i as u32)?;
    check_ray(j as u32)?;
    if i == j {
        return Err(Error::Mismatch(format!("ray {i} given twice")));
    }
    if graph.adjacent(i, j) {
        return Err(Error::NonOrthogonalRequired(i, j));
    }
    Ok(graph.neighbours(i).intersection(graph.neighbours(j)))
}

/// Number of `k`-cliques inside `rays`.
pub fn count_cliques(graph: &OrthogonalityGraph, rays: RaySet, k: usize) -> u64 {
    fn go(graph: &OrthogonalityGraph, candidates: RaySet, k: usize) -> u64 {
        if k == 0 {
            return 1;
        }
        let mut total = 0;
        let mut rest = candidates;
        for v in candidates {
            rest.remove(v);
            if rest.len() + 1 < k as u32 {
                break;
            }
            total += go(graph, rest.intersection(graph.neighbours(v)), k - 1);
        }
        total
    }
    go(graph, rays, k)
}

/// Five seed bases, the ten complementary pairs they induce, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct KpSet {
    pub seeds: Vec<Basis>,
    pub pairs: Vec<(Basis, Basis)>,
    #[serde(rename = "isKP")]
    pub is_kp: bool,
    #[serde(rename = "pseudoReason", skip_serializing_if = "Option::is_none")]
    pub pseudo_reason: Option<String>,
}

impl KpSet {
    pub fn bases(&self) -> Vec<Basis> {
        let mut all = self.seeds.clone();
        for (a, b) in &self.pairs {
            all.push(*a);
            all.push(*b);
        }
        all
    }

    pub fn masks(&self) -> Vec<RaySet> {
        self.bases().iter().map(Basis::mask).collect()
    }

    pub fn rays(&self) -> RaySet {
        self.seeds
            .iter()
            .fold(RaySet::EMPTY, |a, b| a.union(b.mask()))
    }

    pub fn symbol(&self) -> Result<SystemSymbol> {
        system_symbol(self.rays(), &self.masks())
    }

    /// Same 25 bases, regardless of order.
    pub fn same_bases(&self, other: &KpSet) -> bool {
        let mut a = self.masks();
        let mut b = other.masks();
        a.sort();
        b.sort();
        a == b
    }
}

/// Companion multiplicities: a KP set has every ray meeting 17 rays once and
/// 6 rays three times; a ray meeting some companion four times marks a pseudo set.
pub fn classify_companions(contexts: &[RaySet], rays: RaySet) -> (bool, Option<String>) {
    for r in rays {
        let mut counts: BTreeMap<RayId, u32> = BTreeMap::new();
        for ctx in contexts.iter().filter(|c| c.contains(r)) {
            for s in ctx.iter().filter(|&s| s != r) {
                *counts.entry(s).or_default() += 1;
            }
        }
        if let Some((&s, _)) = counts.iter().find(|(_, &n)| n >= 4) {
            return (
                false,
                Some(format!("ray {r} occurs four times with companion {s}")),
            );
        }
        let once = counts.values().filter(|&&n| n == 1).count();
        let thrice = counts.values().filter(|&&n| n == 3).count();
        if once != 17 || thrice != 6 || counts.len() != 23 {
            return (
                false,
                Some(format!(
                    "ray {r} meets {once} companions once and {thrice} three times"
                )),
            );
        }
    }
    (true, None)
}

/// Table bases that take four rays from each of two disjoint seeds.
fn complementary_pairs(table: &BasisTable, a: RaySet, b: RaySet) -> Vec<(Basis, Basis)> {
    let both = a.union(b);
    let mut halves: Vec<RaySet> = table
        .masks()
        .iter()
        .copied()
        .filter(|m| m.is_subset(both) && m.intersection(a).len() == 4)
        .collect();
    halves.sort();
    let mut out = Vec::new();
    for &h in &halves {
        let other = both.difference(h);
        if h < other && halves.binary_search(&other).is_ok() {
            out.push((
                Basis::from_mask(h).expect("8 rays"),
                Basis::from_mask(other).expect("8 rays"),
            ));
        }
    }
    out
}

/// The KP-style set built on `seeds` (five disjoint bases).
pub fn kp_set_from_seeds(table: &BasisTable, seeds: &[Basis]) -> Result<KpSet> {
    let mut pairs = Vec::new();
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            pairs.extend(complementary_pairs(table, seeds[i].mask(), seeds[j].mask()));
        }
    }
    finish_kp(seeds.to_vec(), pairs)
}

fn finish_kp(seeds: Vec<Basis>, pairs: Vec<(Basis, Basis)>) -> Result<KpSet> {
    if pairs.len() < 10 {
        return Err(Error::InsufficientPairs { found: pairs.len() });
    }
    if pairs.len() > 10 {
        return Err(Error::Mismatch(format!(
            "{} complementary pairs, expected 10",
            pairs.len()
        )));
    }
    let mut set = KpSet {
        seeds,
        pairs,
        is_kp: false,
        pseudo_reason: None,
    };
    let (is_kp, reason) = classify_companions(&set.masks(), set.rays());
    set.is_kp = is_kp;
    set.pseudo_reason = reason;
    Ok(set)
}

/// Tries all C(15,5) seed choices from a block of 15 disjoint bases.
pub fn build_kp_sets(table: &BasisTable, block: &[Basis]) -> Result<Vec<KpSet>> {
    if block.len() != 15 {
        return Err(Error::Mismatch(format!(
            "seed block has {} bases, expected 15",
            block.len()
        )));
    }
    let mut by_pair = vec![vec![Vec::new(); 15]; 15];
    for i in 0..15 {
        for j in i + 1..15 {
            by_pair[i][j] = complementary_pairs(table, block[i].mask(), block[j].mask());
        }
    }
    let subsets: Vec<[usize; 5]> = (0..1u32 << 15)
        .filter(|s| s.count_ones() == 5)
        .map(|s| {
            let mut idx = [0; 5];
            for (slot, k) in idx.iter_mut().zip((0..15).filter(|k| s >> k & 1 == 1)) {
                *slot = k;
            }
            idx
        })
        .collect();
    let mut sets: Vec<(u32, KpSet)> = subsets
        .par_iter()
        .map(|idx| {
            let seeds: Vec<Basis> = idx.iter().map(|&k| block[k]).collect();
            let mut pairs = Vec::new();
            for a in 0..5 {
                for b in a + 1..5 {
                    pairs.extend(by_pair[idx[a]][idx[b]].iter().copied());
                }
            }
            let key = idx.iter().fold(0u32, |acc, &k| acc | 1 << k);
            finish_kp(seeds, pairs).map(|s| (key, s))
        })
        .collect::<Result<_>>()?;
    sets.sort_by_key(|s| s.0);
    Ok(sets.into_iter().map(|s| s.1).collect())
}

/// One member from each complementary pair, repaired to even ray counts by
/// the unique subset of seeds that does it. Bit `p` of the selection picks the
/// second member of pair `p`.
pub fn kp_parity_proofs(kp: &KpSet) -> Result<Vec<ParityProof>> {
    let seed_masks: Vec<RaySet> = kp.seeds.iter().map(Basis::mask).collect();
    (0..1u32 << kp.pairs.len())
        .map(|selection| {
            let mut bases: Vec<Basis> = kp
                .pairs
                .iter()
                .enumerate()
                .map(|(p, (a, b))| if selection >> p & 1 == 1 { *b } else { *a })
                .collect();
            let odd = bases.iter().fold(RaySet::EMPTY, |acc, b| {
                let m = b.mask();
                acc.union(m).difference(acc.intersection(m))
            });
            let mut repair = Vec::new();
            let mut covered = RaySet::EMPTY;
            for (s, m) in kp.seeds.iter().zip(&seed_masks) {
                let hit = m.intersection(odd);
                if hit == *m {
                    repair.push(*s);
                    covered = covered.union(*m);
                } else if !hit.is_empty() {
                    return Err(Error::ExtensionFailure { selection });
                }
            }
            if covered != odd || repair.len() % 2 == 0 {
                return Err(Error::ExtensionFailure { selection });
            }
            bases.extend(repair);
            ParityProof::new(bases)
        })
        .collect()
}

/// Proof counts keyed by basis count.
pub fn proof_counts(proofs: &[ParityProof]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for p in proofs {
        *out.entry(p.bases.len()).or_default() += 1;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct KpReport {
    #[serde(flatten)]
    pub set: KpSet,
    #[serde(rename = "proofCounts")]
    pub proof_counts: BTreeMap<usize, usize>,
}

/// KP sets get their proof counts; pseudo sets report none.
pub fn kp_report(kp: &KpSet) -> Result<KpReport> {
    let proof_counts = if kp.is_kp {
        proof_counts(&kp_parity_proofs(kp)?)
    } else {
        BTreeMap::new()
    };
    Ok(KpReport {
        set: kp.clone(),
        proof_counts,
    })
}
