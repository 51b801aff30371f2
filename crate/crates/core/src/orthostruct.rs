//! Orthogonality graph, basis enumeration and the system symbol.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::raygen::RaySystem;
use crate::rayset::{check_ray, RayId, RaySet, RAY_COUNT};

pub const E8_DEGREE: u32 = 63;

/// `adjacent(i, j)` iff `|<i|j>| < threshold` and `i != j`.
#[derive(Debug, Clone)]
pub struct OrthogonalityGraph {
    neighbours: Vec<RaySet>,
    pub threshold: f64,
}

impl OrthogonalityGraph {
    /// Builds the graph without checking degrees.
    pub fn from_gram(sys: &RaySystem, threshold: f64) -> OrthogonalityGraph {
        let mut neighbours = vec![RaySet::EMPTY; RAY_COUNT];
        for i in 1..=RAY_COUNT as RayId {
            for j in 1..=RAY_COUNT as RayId {
                if i != j && sys.gram(i, j).abs() < threshold {
                    neighbours[i as usize - 1].insert(j);
                }
            }
        }
        OrthogonalityGraph {
            neighbours,
            threshold,
        }
    }

    /// Builds a graph directly from adjacency sets; used for subsystems and tests.
    pub fn from_neighbours(neighbours: Vec<RaySet>) -> OrthogonalityGraph {
        assert_eq!(neighbours.len(), RAY_COUNT);
        OrthogonalityGraph {
            neighbours,
            threshold: f64::NAN,
        }
    }

    #[inline]
    pub fn neighbours(&self, id: RayId) -> RaySet {
        self.neighbours[id as usize - 1]
    }

    #[inline]
    pub fn adjacent(&self, i: RayId, j: RayId) -> bool {
        self.neighbours(i).contains(j)
    }

    pub fn degree(&self, id: RayId) -> u32 {
        self.neighbours(id).len()
    }

    /// True iff the rays of `set` are pairwise adjacent.
    pub fn is_clique(&self, set: RaySet) -> bool {
        set.iter().all(|r| {
            set.difference(RaySet::single(r))
                .is_subset(self.neighbours(r))
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (RayId, RayId)> + '_ {
        (1..=RAY_COUNT as RayId).flat_map(move |i| {
            self.neighbours(i)
                .iter()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }
}

pub fn build_graph(sys: &RaySystem, threshold: f64) -> Result<OrthogonalityGraph> {
    let graph = OrthogonalityGraph::from_gram(sys, threshold);
    for id in 1..=RAY_COUNT as RayId {
        let degree = graph.degree(id);
        if degree != E8_DEGREE {
            return Err(Error::DegreeAnomaly {
                ray: id,
                degree,
                expected: E8_DEGREE,
            });
        }
    }
    Ok(graph)
}

/// Eight mutually orthogonal rays in ascending order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Basis([RayId; 8]);

impl Basis {
    pub fn new(ids: [RayId; 8]) -> Result<Basis> {
        let mut rays = ids;
        rays.sort_unstable();
        for &r in &rays {
            check_ray(r as u32)?;
        }
        if rays.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Mismatch(format!("repeated ray in basis {ids:?}")));
        }
        Ok(Basis(rays))
    }

    pub fn from_slice(ids: &[RayId]) -> Result<Basis> {
        let arr: [RayId; 8] = ids
            .try_into()
            .map_err(|_| Error::Mismatch(format!("a basis needs 8 rays, got {}", ids.len())))?;
        Basis::new(arr)
    }

    pub fn from_mask(mask: RaySet) -> Option<Basis> {
        if mask.len() != 8 {
            return None;
        }
        let mut arr = [0; 8];
        for (slot, r) in arr.iter_mut().zip(mask.iter()) {
            *slot = r;
        }
        Some(Basis(arr))
    }

    pub fn rays(&self) -> &[RayId; 8] {
        &self.0
    }

    pub fn mask(&self) -> RaySet {
        self.0.iter().collect()
    }

    pub fn contains(&self, id: RayId) -> bool {
        self.0.binary_search(&id).is_ok()
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// All bases of the system with a per-ray index.
#[derive(Debug, Clone)]
pub struct BasisTable {
    bases: Vec<Basis>,
    masks: Vec<RaySet>,
    by_ray: Vec<Vec<usize>>,
    index: HashMap<RaySet, usize>,
}

impl BasisTable {
    /// Canonicalizes: sorted, deduplicated.
    pub fn from_bases(mut bases: Vec<Basis>) -> BasisTable {
        bases.sort_unstable();
        bases.dedup();
        let masks: Vec<RaySet> = bases.iter().map(Basis::mask).collect();
        let mut by_ray = vec![Vec::new(); RAY_COUNT];
        for (k, b) in bases.iter().enumerate() {
            for &r in b.rays() {
                by_ray[r as usize - 1].push(k);
            }
        }
        let index = masks.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        BasisTable {
            bases,
            masks,
            by_ray,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn masks(&self) -> &[RaySet] {
        &self.masks
    }

    pub fn basis(&self, k: usize) -> &Basis {
        &self.bases[k]
    }

    /// Indices of the bases containing `id`.
    pub fn containing(&self, id: RayId) -> &[usize] {
        &self.by_ray[id as usize - 1]
    }

    pub fn position(&self, mask: RaySet) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn contains(&self, basis: &Basis) -> bool {
        self.index.contains_key(&basis.mask())
    }

    /// Companions of `id`: every ray sharing a basis with it.
    pub fn companions(&self, id: RayId) -> RaySet {
        let mut s = RaySet::EMPTY;
        for &k in self.containing(id) {
            s = s.union(self.masks[k]);
        }
        s.difference(RaySet::single(id))
    }
}

/// Enumerates all 8-cliques with pivoted Bron-Kerbosch, keeping maximal cliques of size 8.
pub fn enumerate_bases(graph: &OrthogonalityGraph) -> BasisTable {
    let mut found = Vec::new();
    bron_kerbosch(
        graph,
        RaySet::EMPTY,
        RaySet::all(),
        RaySet::EMPTY,
        &mut found,
    );
    let bases = found.into_iter().filter_map(Basis::from_mask).collect();
    BasisTable::from_bases(bases)
}

fn bron_kerbosch(
    graph: &OrthogonalityGraph,
    clique: RaySet,
    mut candidates: RaySet,
    mut excluded: RaySet,
    out: &mut Vec<RaySet>,
) {
    if candidates.is_empty() {
        if excluded.is_empty() {
            out.push(clique);
        }
        return;
    }
    // A basis has 8 rays; no maximal clique here can reach that size.
    if clique.len() + candidates.len() < 8 {
        return;
    }
    let pivot = candidates
        .union(excluded)
        .iter()
        .max_by_key(|&u| candidates.intersection(graph.neighbours(u)).len())
        .expect("candidates nonempty");
    for v in candidates.difference(graph.neighbours(pivot)) {
        let nv = graph.neighbours(v);
        let mut next = clique;
        next.insert(v);
        bron_kerbosch(
            graph,
            next,
            candidates.intersection(nv),
            excluded.intersection(nv),
            out,
        );
        candidates.remove(v);
        excluded.insert(v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub uncovered: Vec<(RayId, RayId)>,
}

impl SaturationReport {
    pub fn is_saturated(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Every graph edge must lie inside at least one listed context.
pub fn check_saturation(contexts: &[RaySet], graph: &OrthogonalityGraph) -> SaturationReport {
    let mut covered = vec![RaySet::EMPTY; RAY_COUNT];
    for &ctx in contexts {
        for r in ctx {
            covered[r as usize - 1] = covered[r as usize - 1].union(ctx);
        }
    }
    let uncovered = graph
        .edges()
        .filter(|&(i, j)| !covered[i as usize - 1].contains(j))
        .collect();
    SaturationReport { uncovered }
}

/// Left side counts rays by multiplicity, right side counts bases by size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemSymbol {
    /// `(count, multiplicity)`, multiplicity descending.
    pub ray_classes: Vec<(u32, u32)>,
    /// `(count, size)`, count descending.
    pub basis_classes: Vec<(u32, u32)>,
}

impl SystemSymbol {
    pub fn new(mut ray_classes: Vec<(u32, u32)>, mut basis_classes: Vec<(u32, u32)>) -> Self {
        ray_classes.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
        basis_classes.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        SystemSymbol {
            ray_classes,
            basis_classes,
        }
    }

    pub fn ray_slots(&self) -> u64 {
        self.ray_classes
            .iter()
            .map(|&(c, m)| c as u64 * m as u64)
            .sum()
    }

    pub fn basis_slots(&self) -> u64 {
        self.basis_classes
            .iter()
            .map(|&(c, s)| c as u64 * s as u64)
            .sum()
    }

    pub fn ray_count(&self) -> u32 {
        self.ray_classes.iter().map(|c| c.0).sum()
    }

    pub fn basis_count(&self) -> u32 {
        self.basis_classes.iter().map(|c| c.0).sum()
    }

    pub fn check(&self) -> Result<()> {
        let (ray_slots, basis_slots) = (self.ray_slots(), self.basis_slots());
        if ray_slots == basis_slots {
            Ok(())
        } else {
            Err(Error::InconsistentCount {
                ray_slots,
                basis_slots,
            })
        }
    }
}

pub fn system_symbol(rays: RaySet, contexts: &[RaySet]) -> Result<SystemSymbol> {
    let mut mult: BTreeMap<RayId, u32> = rays.iter().map(|r| (r, 0)).collect();
    let mut sizes: BTreeMap<u32, u32> = BTreeMap::new();
    for &ctx in contexts {
        if !ctx.is_subset(rays) {
            return Err(Error::Mismatch(format!(
                "context {ctx:?} uses rays outside the system"
            )));
        }
        *sizes.entry(ctx.len()).or_default() += 1;
        for r in ctx {
            *mult.get_mut(&r).expect("subset checked") += 1;
        }
    }
    let mut by_mult: BTreeMap<u32, u32> = BTreeMap::new();
    for m in mult.values() {
        *by_mult.entry(*m).or_default() += 1;
    }
    let sym = SystemSymbol::new(
        by_mult.into_iter().map(|(m, c)| (c, m)).collect(),
        sizes.into_iter().map(|(s, c)| (c, s)).collect(),
    );
    sym.check()?;
    Ok(sym)
}

fn write_classes(f: &mut fmt::Formatter<'_>, classes: &[(u32, u32)]) -> fmt::Result {
    for (k, (c, s)) in classes.iter().enumerate() {
        if k > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{c}_{s}")?;
    }
    Ok(())
}

impl fmt::Display for SystemSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_classes(f, &self.ray_classes)?;
        f.write_str("-")?;
        write_classes(f, &self.basis_classes)
    }
}

fn parse_classes(s: &str) -> std::result::Result<Vec<(u32, u32)>, String> {
    s.split_whitespace()
        .map(|tok| {
            let (c, m) = tok
                .split_once('_')
                .ok_or_else(|| format!("expected count_sub, got `{tok}`"))?;
            let c = c.parse().map_err(|_| format!("bad count in `{tok}`"))?;
            let m = m.parse().map_err(|_| format!("bad subscript in `{tok}`"))?;
            Ok((c, m))
        })
        .collect()
}

impl FromStr for SystemSymbol {
    type Err = Error;

    /// Accepts `15_4 30_2-15_8`; braces as in `15_{4}30_{2}` are tolerated.
    fn from_str(s: &str) -> Result<SystemSymbol> {
        let cleaned = s.replace('{', "").replace('}', " ");
        let (left, right) = cleaned.split_once('-').ok_or_else(|| Error::Parse {
            line: 1,
            reason: format!("symbol `{s}` lacks '-'"),
        })?;
        let err = |reason| Error::Parse { line: 1, reason };
        Ok(SystemSymbol::new(
            parse_classes(left).map_err(err)?,
            parse_classes(right).map_err(err)?,
        ))
    }
}

impl Serialize for SystemSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SystemSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// SHA-256 over the threshold and all ray coordinates.
pub fn gram_checksum(sys: &RaySystem, threshold: f64) -> String {
    let mut h = Sha256::new();
    h.update(threshold.to_le_bytes());
    for ray in sys.rays() {
        for c in ray.coords {
            h.update(c.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

const CACHE_MAGIC: &str = "e8ks-basis-table";

/// Header line then one basis per line, ascending ids.
pub fn write_table_cache<W: Write>(table: &BasisTable, checksum: &str, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{CACHE_MAGIC} rays={RAY_COUNT} bases={} checksum={checksum}",
        table.len()
    )?;
    for b in table.bases() {
        writeln!(out, "{b}")?;
    }
    Ok(())
}

/// Returns `None` when the header does not match `checksum`.
pub fn read_table_cache<R: BufRead>(input: R, checksum: &str) -> Result<Option<BasisTable>> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Ok(None),
    };
    let fields: HashMap<&str, &str> = header
        .split_whitespace()
        .skip(1)
        .filter_map(|f| f.split_once('='))
        .collect();
    if !header.starts_with(CACHE_MAGIC)
        || fields.get("checksum") != Some(&checksum)
        || fields.get("rays") != Some(&RAY_COUNT.to_string().as_str())
    {
        return Ok(None);
    }
    let expected: usize = fields
        .get("bases")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            reason: "missing basis count".into(),
        })?;
    let mut bases = Vec::with_capacity(expected);
    for (k, line) in lines.enumerate() {
        let line = line?;
        let ids = parse_ids(&line, k + 2)?;
        bases.push(Basis::from_slice(&ids).map_err(|e| Error::Parse {
            line: k + 2,
            reason: e.to_string(),
        })?);
    }
    if bases.len() != expected {
        return Ok(None);
    }
    Ok(Some(BasisTable::from_bases(bases)))
}

pub(crate) fn parse_ids(line: &str, lineno: usize) -> Result<Vec<RayId>> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: u32 = t.parse().map_err(|_| Error::Parse {
                line: lineno,
                reason: format!("`{t}` is not an integer"),
            })?;
            check_ray(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raygen::DEFAULT_THRESHOLD;

    fn setup() -> (RaySystem, OrthogonalityGraph, BasisTable) {
        let sys = RaySystem::standard();
        let g = build_graph(&sys, DEFAULT_THRESHOLD).unwrap();
        let t = enumerate_bases(&g);
        (sys, g, t)
    }

    #[test]
    fn graph_is_63_regular_and_irreflexive() {
        let sys = RaySystem::standard();
        let g = build_graph(&sys, DEFAULT_THRESHOLD).unwrap();
        for i in 1..=120u8 {
            assert!(!g.adjacent(i, i));
            assert_eq!(g.degree(i), 63);
            for j in g.neighbours(i) {
                assert!(g.adjacent(j, i));
            }
        }
        assert!(g.adjacent(1, 7));
    }

    #[test]
    fn bad_threshold_is_a_degree_anomaly() {
        let sys = RaySystem::standard();
        let err = build_graph(&sys, 0.6).unwrap_err();
        assert!(matches!(err, Error::DegreeAnomaly { ray: 1, .. }));
    }

    #[test]
    fn table_counts() {
        let (sys, g, t) = setup();
        assert_eq!(t.len(), 2025);
        for r in 1..=120u8 {
            assert_eq!(t.containing(r).len(), 135);
        }
        assert_eq!(t.companions(1), g.neighbours(1));
        let first = Basis::new([1, 7, 62, 66, 70, 73, 107, 111]).unwrap();
        assert!(t.contains(&first));
        // Independent check through the Gram matrix rather than the graph.
        for b in t.bases() {
            for (k, &i) in b.rays().iter().enumerate() {
                for &j in &b.rays()[k + 1..] {
                    assert!(sys.gram(i, j).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn index_is_consistent() {
        let (_, _, t) = setup();
        let rebuilt = BasisTable::from_bases(t.bases().iter().rev().copied().collect());
        for r in 1..=120u8 {
            assert_eq!(rebuilt.containing(r), t.containing(r));
            for &k in t.containing(r) {
                assert!(t.basis(k).contains(r));
            }
        }
    }

    #[test]
    fn re_enumeration_from_subgraph_emits_each_basis_once() {
        let (_, g, t) = setup();
        // Restrict to the neighbourhood of ray 5 plus ray 5 itself.
        let keep = g.neighbours(5).union(RaySet::single(5));
        let mut found = Vec::new();
        let sub = OrthogonalityGraph::from_neighbours(
            (1..=120u8)
                .map(|r| {
                    if keep.contains(r) {
                        g.neighbours(r).intersection(keep)
                    } else {
                        RaySet::EMPTY
                    }
                })
                .collect(),
        );
        bron_kerbosch(&sub, RaySet::EMPTY, keep, RaySet::EMPTY, &mut found);
        let mut eights: Vec<RaySet> = found.into_iter().filter(|c| c.len() == 8).collect();
        let n = eights.len();
        eights.sort();
        eights.dedup();
        assert_eq!(n, eights.len());
        let with5: Vec<RaySet> = eights.into_iter().filter(|c| c.contains(5)).collect();
        assert_eq!(with5.len(), t.containing(5).len());
    }

    #[test]
    fn saturation() {
        let (_, g, t) = setup();
        assert!(check_saturation(t.masks(), &g).is_saturated());
        assert!(!check_saturation(&[], &g).is_saturated());
        let report = check_saturation(&t.masks()[1..], &g);
        // Every edge of the dropped basis is still covered by another basis.
        assert!(report.is_saturated());
    }

    #[test]
    fn symbols() {
        let (_, _, t) = setup();
        let full = system_symbol(RaySet::all(), t.masks()).unwrap();
        assert_eq!(full.to_string(), "120_135-2025_8");
        let parsed: SystemSymbol = "15_4 30_2-15_8".parse().unwrap();
        assert_eq!(parsed, "30_{2}15_{4}-15_{8}".parse().unwrap());
        assert_eq!(parsed.to_string(), "15_4 30_2-15_8");
        assert!(parsed.check().is_ok());
        let bad: SystemSymbol = "8_2 52_2-17_8".parse().unwrap();
        assert!(matches!(bad.check(), Err(Error::InconsistentCount { .. })));
    }

    #[test]
    fn cache_round_trip() {
        let (sys, _, t) = setup();
        let sum = gram_checksum(&sys, DEFAULT_THRESHOLD);
        let mut buf = Vec::new();
        write_table_cache(&t, &sum, &mut buf).unwrap();
        let back = read_table_cache(&buf[..], &sum).unwrap().unwrap();
        assert_eq!(back.bases(), t.bases());
        assert!(read_table_cache(&buf[..], "stale").unwrap().is_none());
        assert_ne!(sum, gram_checksum(&sys, 1e-8));
    }
}
