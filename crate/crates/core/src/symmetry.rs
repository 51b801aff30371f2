//! The generators U, V, W and what they generate.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::orthostruct::{Basis, BasisTable, OrthogonalityGraph};
use crate::raygen::{dot, RaySystem};
use crate::rayset::{check_ray, RayId, RaySet, RAY_COUNT};

/// Accept a transformed vector as a ray when it is this close to `±ray`.
pub const MATCH_TOLERANCE: f64 = 1e-6;

/// A bijection of the ray ids 1..=120.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RayPermutation {
    image: Vec<RayId>,
}

impl RayPermutation {
    pub fn identity() -> Self {
        RayPermutation {
            image: (1..=RAY_COUNT as RayId).collect(),
        }
    }

    pub fn from_images(image: Vec<RayId>) -> Result<Self> {
        if image.len() != RAY_COUNT {
            return Err(Error::Mismatch(format!(
                "permutation needs 120 images, got {}",
                image.len()
            )));
        }
        let mut seen = RaySet::EMPTY;
        for &r in &image {
            check_ray(r as u32)?;
            if seen.contains(r) {
                return Err(Error::Mismatch(format!(
                    "ray {r} appears twice as an image"
                )));
            }
            seen.insert(r);
        }
        Ok(RayPermutation { image })
    }

    /// Parses cycle notation such as `(1 5 9)(26 43 39)`; unlisted rays are fixed.
    pub fn from_cycles(text: &str) -> Result<Self> {
        let mut image: Vec<RayId> = (1..=RAY_COUNT as RayId).collect();
        let mut touched = RaySet::EMPTY;
        let body: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ");
        for chunk in body.split('(').skip(1) {
            let inner = chunk.split(')').next().unwrap_or("");
            let cycle = crate::orthostruct::parse_ids(inner, 1)?;
            for (k, &r) in cycle.iter().enumerate() {
                if touched.contains(r) {
                    return Err(Error::Mismatch(format!("ray {r} occurs in two cycles")));
                }
                touched.insert(r);
                image[r as usize - 1] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(RayPermutation { image })
    }

    /// Builds the permutation whose cycles are the columns of `rows`.
    #[allow(clippy::needless_range_loop)]
    pub fn from_columns(rows: &[[RayId; 8]]) -> Result<Self> {
        let n = rows.len();
        let mut image: Vec<RayId> = (1..=RAY_COUNT as RayId).collect();
        let mut touched = RaySet::EMPTY;
        for col in 0..8 {
            for row in 0..n {
                let r = rows[row][col];
                if touched.contains(r) {
                    return Err(Error::FixtureCorrupt {
                        name: "seed_block".into(),
                        reason: format!("ray {r} occurs twice among the columns"),
                    });
                }
                touched.insert(r);
                image[r as usize - 1] = rows[(row + 1) % n][col];
            }
        }
        Ok(RayPermutation { image })
    }

    #[inline]
    pub fn apply(&self, id: RayId) -> RayId {
        self.image[id as usize - 1]
    }

    pub fn apply_set(&self, set: RaySet) -> RaySet {
        set.iter().map(|r| self.apply(r)).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RayPermutation) -> RayPermutation {
        RayPermutation {
            image: other.image.iter().map(|&r| self.apply(r)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> RayPermutation {
        let mut out = RayPermutation::identity();
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(i, &r)| r as usize == i + 1)
    }

    pub fn cycles(&self) -> Vec<Vec<RayId>> {
        let mut seen = RaySet::EMPTY;
        let mut out = Vec::new();
        for start in 1..=RAY_COUNT as RayId {
            if seen.contains(start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut r = self.apply(start);
            while r != start {
                seen.insert(r);
                cycle.push(r);
                r = self.apply(r);
            }
            out.push(cycle);
        }
        out
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .map(|c| c.len() as u64)
            .fold(1, |acc, n| acc / gcd(acc, n) * n)
    }

    pub fn is_automorphism(&self, graph: &OrthogonalityGraph) -> bool {
        (1..=RAY_COUNT as RayId)
            .all(|i| self.apply_set(graph.neighbours(i)) == graph.neighbours(self.apply(i)))
    }
}

impl fmt::Debug for RayPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles().iter().filter(|c| c.len() > 1) {
            let parts: Vec<String> = c.iter().map(|r| r.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

fn checked_generator(
    name: &str,
    perm: RayPermutation,
    order: u64,
    graph: &OrthogonalityGraph,
) -> Result<RayPermutation> {
    let got = perm.order();
    if got != order {
        return Err(Error::FixtureCorrupt {
            name: name.into(),
            reason: format!("order {got}, expected {order}"),
        });
    }
    if !perm.is_automorphism(graph) {
        return Err(Error::FixtureCorrupt {
            name: name.into(),
            reason: "not an automorphism of the orthogonality graph".into(),
        });
    }
    Ok(perm)
}

/// V (order 9) and W (order 15) from the shipped cycle fixtures.
pub fn fixture_permutations(
    graph: &OrthogonalityGraph,
) -> Result<(RayPermutation, RayPermutation)> {
    permutations_from_text(fixtures::V_CYCLES, fixtures::W_CYCLES, graph)
}

pub fn permutations_from_text(
    v: &str,
    w: &str,
    graph: &OrthogonalityGraph,
) -> Result<(RayPermutation, RayPermutation)> {
    let v = checked_generator("v_cycles", RayPermutation::from_cycles(v)?, 9, graph)?;
    let w = checked_generator("w_cycles", RayPermutation::from_cycles(w)?, 15, graph)?;
    Ok((v, w))
}

/// U reads the 15-row seed block column by column.
pub fn derive_u(seed_block: &[[RayId; 8]]) -> Result<RayPermutation> {
    let corrupt = |reason: String| Error::FixtureCorrupt {
        name: "seed_block".into(),
        reason,
    };
    if seed_block.len() != 15 {
        return Err(corrupt(format!(
            "expected 15 rows, got {}",
            seed_block.len()
        )));
    }
    let u = RayPermutation::from_columns(seed_block)?;
    let cycles = u.cycles();
    if cycles.len() != 8 || cycles.iter().any(|c| c.len() != 15) {
        return Err(corrupt("columns do not close into eight 15-cycles".into()));
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub n: u8,
    pub m: u8,
    pub l: u8,
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.l)
    }
}

#[derive(Debug, Clone)]
pub struct LabeledTable {
    pub entries: Vec<(BasisLabel, Basis)>,
    by_mask: HashMap<RaySet, BasisLabel>,
}

impl LabeledTable {
    pub fn label_of(&self, mask: RaySet) -> Option<BasisLabel> {
        self.by_mask.get(&mask).copied()
    }

    pub fn basis(&self, label: BasisLabel) -> Option<Basis> {
        let idx = (label.n as usize * 9 + label.m as usize) * 15 + label.l as usize;
        self.entries
            .get(idx)
            .filter(|(l, _)| *l == label)
            .map(|e| e.1)
    }

    pub fn to_table(&self) -> BasisTable {
        BasisTable::from_bases(self.entries.iter().map(|e| e.1).collect())
    }

    /// CSV with columns `n,m,l,r1..r8`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,m,l,r1,r2,r3,r4,r5,r6,r7,r8")?;
        for (lab, b) in &self.entries {
            let ids: Vec<String> = b.rays().iter().map(|r| r.to_string()).collect();
            writeln!(out, "{},{},{},{}", lab.n, lab.m, lab.l, ids.join(","))?;
        }
        Ok(())
    }
}

/// `(n,m,l) = W^n V^m U^l (seed)` for all 15·9·15 labels.
pub fn generate_table(
    seed: &Basis,
    u: &RayPermutation,
    v: &RayPermutation,
    w: &RayPermutation,
) -> Result<LabeledTable> {
    let mut entries = Vec::with_capacity(2025);
    let mut by_mask = HashMap::with_capacity(2025);
    let mut u_l = seed.mask();
    for l in 0..15u8 {
        let mut vu = u_l;
        for m in 0..9u8 {
            let mut wvu = vu;
            for n in 0..15u8 {
                let label = BasisLabel { n, m, l };
                if let Some(prev) = by_mask.insert(wvu, label) {
                    return Err(Error::Collision {
                        first: prev.to_string(),
                        second: label.to_string(),
                    });
                }
                entries.push((
                    label,
                    Basis::from_mask(wvu).expect("permutations keep 8 rays"),
                ));
                wvu = w.apply_set(wvu);
            }
            vu = v.apply_set(vu);
        }
        u_l = u.apply_set(u_l);
    }
    entries.sort_by_key(|e| (e.0.n, e.0.m, e.0.l));
    Ok(LabeledTable { entries, by_mask })
}

/// Closure of `seed` under the given permutations. Unlike the labelled product
/// this reaches the whole table from any seed basis.
pub fn orbit_table(seed: &Basis, generators: &[&RayPermutation]) -> BasisTable {
    let mut seen = std::collections::HashSet::from([seed.mask()]);
    let mut frontier = vec![seed.mask()];
    while let Some(b) = frontier.pop() {
        for g in generators {
            let next = g.apply_set(b);
            if seen.insert(next) {
                frontier.push(next);
            }
        }
    }
    BasisTable::from_bases(seen.into_iter().filter_map(Basis::from_mask).collect())
}

/// An 8×8 real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMap {
    pub matrix: [[f64; 8]; 8],
}

impl OrthogonalMap {
    /// `Σ sign |target><source|`.
    pub fn from_terms(sys: &RaySystem, terms: &[(f64, RayId, RayId)]) -> OrthogonalMap {
        let mut matrix = [[0.0; 8]; 8];
        for &(sign, target, source) in terms {
            let (t, s) = (sys.coords(target), sys.coords(source));
            for (row, ti) in matrix.iter_mut().zip(t) {
                for (cell, sj) in row.iter_mut().zip(s) {
                    *cell += sign * ti * sj;
                }
            }
        }
        OrthogonalMap { matrix }
    }

    pub fn apply(&self, v: &[f64; 8]) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = dot(row, v);
        }
        out
    }

    /// Largest entry of `|MᵀM - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let s: f64 = (0..8).map(|k| self.matrix[k][i] * self.matrix[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// The ray permutation this matrix induces, with the sign picked up by each ray.
    pub fn induced_permutation(
        &self,
        sys: &RaySystem,
        name: &str,
    ) -> Result<(RayPermutation, Vec<f64>)> {
        let mut image = Vec::with_capacity(RAY_COUNT);
        let mut signs = Vec::with_capacity(RAY_COUNT);
        for ray in sys.rays() {
            let (target, sign, distance) = sys.nearest_ray(&self.apply(&ray.coords));
            if distance > MATCH_TOLERANCE {
                return Err(Error::RealizationMismatch {
                    generator: name.into(),
                    ray: ray.id,
                    distance,
                });
            }
            image.push(target);
            signs.push(sign);
        }
        Ok((RayPermutation::from_images(image)?, signs))
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorMatrices {
    pub u: OrthogonalMap,
    pub v: OrthogonalMap,
    pub w: OrthogonalMap,
}

pub fn matrix_fixtures(sys: &RaySystem) -> Result<GeneratorMatrices> {
    let terms = fixtures::generator_terms()?;
    let pick = |g: char| -> Vec<(f64, RayId, RayId)> {
        terms
            .iter()
            .filter(|t| t.0 == g)
            .map(|&(_, s, t, src)| (s, t, src))
            .collect()
    };
    Ok(GeneratorMatrices {
        u: OrthogonalMap::from_terms(sys, &pick('U')),
        v: OrthogonalMap::from_terms(sys, &pick('V')),
        w: OrthogonalMap::from_terms(sys, &pick('W')),
    })
}

/// Decodes `index < 8!` into a permutation of 0..8 (Lehmer code).
fn nth_ordering(mut index: usize) -> [usize; 8] {
    let mut pool: Vec<usize> = (0..8).collect();
    let mut out = [0; 8];
    let mut fact = 5040;
    for (k, slot) in out.iter_mut().enumerate() {
        let q = index / fact;
        index %= fact;
        *slot = pool.remove(q);
        if k < 7 {
            fact /= 7 - k;
        }
    }
    out
}

/// True iff `Σ |y_k><x_k|` maps every ray in `rays` onto `±` a ray of `rays`.
fn preserves_lines(
    sys: &RaySystem,
    x_proj: &[[f64; 8]],
    y: &[[f64; 8]],
    rays: RaySet,
    skip: RaySet,
) -> bool {
    for r in rays.difference(skip) {
        let a = &x_proj[r as usize - 1];
        let mut v = [0.0; 8];
        for (ak, yk) in a.iter().zip(y) {
            if *ak != 0.0 {
                for (vi, yi) in v.iter_mut().zip(yk) {
                    *vi += ak * yi;
                }
            }
        }
        let hit = rays.iter().any(|k| {
            let p = dot(&v, sys.coords(k)).abs();
            // |v ∓ k|² = 2 - 2|<v|k>| for unit vectors.
            (2.0 - 2.0 * p).max(0.0).sqrt() < MATCH_TOLERANCE
        });
        if !hit {
            return false;
        }
    }
    true
}

/// Projections `<x_k|r>` for every ray, rounded to the exact values 0, ±1/2, ±1.
fn projections(sys: &RaySystem, fixed: &[RayId]) -> Vec<[f64; 8]> {
    sys.rays()
        .iter()
        .map(|ray| {
            let mut a = [0.0; 8];
            for (slot, &x) in a.iter_mut().zip(fixed) {
                let p = sys.gram(x, ray.id);
                *slot = if p.abs() < 1e-9 { 0.0 } else { p };
            }
            a
        })
        .collect()
}

/// Number of orderings `y'` of `target` for which `Σ |y'_k><x_k|` maps the
/// ray set onto itself (as lines).
pub fn count_basis_symmetries(sys: &RaySystem, fixed: &Basis, target: &Basis) -> u64 {
    count_orderings(sys, fixed.rays(), target.rays(), RaySet::all(), None)
}

/// Shared 8!-sweep. With `extra = Some(a)` the map also sends `a` to itself and
/// only the first seven entries of `fixed`/`target` are permuted.
pub(crate) fn count_orderings(
    sys: &RaySystem,
    fixed: &[RayId],
    target: &[RayId],
    rays: RaySet,
    extra: Option<RayId>,
) -> u64 {
    let k = fixed.len();
    let mut xs: Vec<RayId> = fixed.to_vec();
    if let Some(a) = extra {
        xs.push(a);
    }
    let x_proj = projections(sys, &xs);
    let skip: RaySet = xs.iter().collect();
    let total: usize = (1..=k).product();
    (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let ord = nth_ordering_k(idx, k);
            let mut y: Vec<[f64; 8]> = ord.iter().map(|&o| *sys.coords(target[o])).collect();
            if let Some(a) = extra {
                y.push(*sys.coords(a));
            }
            preserves_lines(sys, &x_proj, &y, rays, skip)
        })
        .count() as u64
}

fn nth_ordering_k(index: usize, k: usize) -> Vec<usize> {
    if k == 8 {
        return nth_ordering(index).to_vec();
    }
    let mut pool: Vec<usize> = (0..k).collect();
    let mut index = index;
    let mut out = Vec::with_capacity(k);
    for j in (0..k).rev() {
        let fact: usize = (1..=j).product();
        let q = index / fact;
        index %= fact;
        out.push(pool.remove(q));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupOrder {
    pub bases: u64,
    pub orderings_per_target: u64,
    pub sign_choices: u64,
    pub targets_checked: usize,
    pub order: u64,
}

/// Coxeter's figure for the order of the symmetry group of 4_21.
pub fn coxeter_order() -> u64 {
    192 * (1..=10u64).product::<u64>()
}

/// Assembles `|table| · (orderings per target) · 2^8` from measured counts.
/// Every target in `targets` must give the same ordering count.
pub fn group_order(
    sys: &RaySystem,
    table: &BasisTable,
    fixed: &Basis,
    targets: &[Basis],
) -> Result<GroupOrder> {
    let mut per_target = None;
    for t in targets {
        let c = count_basis_symmetries(sys, fixed, t);
        match per_target {
            None => per_target = Some(c),
            Some(p) if p != c => {
                return Err(Error::Mismatch(format!(
                    "target {t} admits {c} orderings, an earlier target admitted {p}"
                )))
            }
            _ => {}
        }
    }
    let per_target = per_target.ok_or_else(|| Error::Mismatch("no target bases".into()))?;
    let bases = table.len() as u64;
    Ok(GroupOrder {
        bases,
        orderings_per_target: per_target,
        sign_choices: 256,
        targets_checked: targets.len(),
        order: bases * per_target * 256,
    })
}
