//! Dense GF(2) linear algebra on ray-incidence columns.

use std::fmt;

use crate::rayset::{RayId, RaySet};

/// A GF(2) vector indexed by column, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vec {
    words: Vec<u64>,
    len: usize,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Gf2Vec {
        Gf2Vec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn unit(len: usize, i: usize) -> Gf2Vec {
        let mut v = Gf2Vec::zeros(len);
        v.set(i, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        let w = &mut self.words[i / 64];
        if bit {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
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

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// Rays × contexts over GF(2); entry is 1 when the ray lies in the context.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    pub rows: Vec<RayId>,
    pub columns: Vec<RaySet>,
}

impl IncidenceMatrix {
    pub fn new(columns: Vec<RaySet>) -> IncidenceMatrix {
        let rows = columns
            .iter()
            .fold(RaySet::EMPTY, |acc, &c| acc.union(c))
            .iter()
            .collect();
        IncidenceMatrix { rows, columns }
    }

    pub fn column_weight(&self, j: usize) -> u32 {
        self.columns[j].len()
    }

    pub fn row_weight(&self, ray: RayId) -> u32 {
        self.columns.iter().filter(|c| c.contains(ray)).count() as u32
    }

    /// `Mx` as a ray set; zero iff `x` is in the kernel.
    pub fn apply(&self, x: &Gf2Vec) -> RaySet {
        x.ones()
            .fold(RaySet::EMPTY, |acc, j| RaySet(acc.0 ^ self.columns[j].0))
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub columns: usize,
    pub rank: usize,
    pub basis: Vec<Gf2Vec>,
}

impl Kernel {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Column-by-column elimination. Each column that reduces to zero against the
/// earlier pivots yields one kernel basis vector.
pub fn kernel(m: &IncidenceMatrix) -> Kernel {
    let n = m.columns.len();
    // Pivot rows keyed by highest set bit: (reduced column, combination).
    let mut pivots: Vec<Option<(u128, Gf2Vec)>> = vec![None; 128];
    let mut basis = Vec::new();
    let mut rank = 0;
    for (j, col) in m.columns.iter().enumerate() {
        let mut c = col.0;
        let mut combo = Gf2Vec::unit(n, j);
        while c != 0 {
            let top = 127 - c.leading_zeros() as usize;
            match &pivots[top] {
                Some((pc, pcombo)) => {
                    c ^= pc;
                    combo.xor_assign(pcombo);
                }
                None => break,
            }
        }
        if c == 0 {
            basis.push(combo);
        } else {
            let top = 127 - c.leading_zeros() as usize;
            pivots[top] = Some((c, combo));
            rank += 1;
        }
    }
    Kernel {
        columns: n,
        rank,
        basis,
    }
}

/// Rank of a set of columns.
pub fn rank(columns: impl IntoIterator<Item = RaySet>) -> usize {
    let mut pivots = [0u128; 128];
    let mut r = 0;
    for col in columns {
        if insert(&mut pivots, col.0) {
            r += 1;
        }
    }
    r
}

#[inline]
fn insert(pivots: &mut [u128; 128], mut c: u128) -> bool {
    while c != 0 {
        let top = 127 - c.leading_zeros() as usize;
        if pivots[top] == 0 {
            pivots[top] = c;
            return true;
        }
        c ^= pivots[top];
    }
    false
}

/// True iff the columns have exactly one linear dependency (nullity 1).
/// For the support of a kernel vector this means no proper nonempty subset
/// of it is also in the kernel.
pub fn nullity_is_one(columns: impl IntoIterator<Item = RaySet>) -> bool {
    let mut pivots = [0u128; 128];
    let mut deps = 0;
    for col in columns {
        if !insert(&mut pivots, col.0) {
            deps += 1;
            if deps > 1 {
                return false;
            }
        }
    }
    deps == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_columns_give_full_kernel() {
        let m = IncidenceMatrix::new(vec![RaySet::EMPTY; 5]);
        let k = kernel(&m);
        assert_eq!(k.dimension(), 5);
        assert_eq!(k.rank, 0);
    }

    #[test]
    fn small_dependency() {
        let a: RaySet = [1u8, 2].iter().collect();
        let b: RaySet = [2u8, 3].iter().collect();
        let c: RaySet = [1u8, 3].iter().collect();
        let k = kernel(&IncidenceMatrix::new(vec![a, b, c]));
        assert_eq!(k.dimension(), 1);
        assert_eq!(k.basis[0].ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(nullity_is_one([a, b, c]));
        assert!(!nullity_is_one([a, b]));
        assert!(!nullity_is_one([a, b, c, a, b, c]));
        assert_eq!(rank([a, b, c]), 2);
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate(cols in prop::collection::vec(any::<u128>(), 1..40)) {
            let cols: Vec<RaySet> = cols.into_iter().map(|c| RaySet(c & ((1u128 << 12) - 1))).collect();
            let m = IncidenceMatrix::new(cols.clone());
            let k = kernel(&m);
            prop_assert_eq!(k.rank + k.dimension(), cols.len());
            prop_assert_eq!(k.rank, rank(cols.iter().copied()));
            for v in &k.basis {
                prop_assert!(m.apply(v).is_empty());
                prop_assert!(!v.is_zero());
            }
        }
    }
}
