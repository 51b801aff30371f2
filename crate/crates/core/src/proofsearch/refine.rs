//! Grouping always-together ray pairs into rank-2 projectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rayset::RayId;

use super::proof::ParityProof;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RefinedSymbol {
    /// `(count, rank, multiplicity)`: rank descending, then multiplicity descending.
    pub projector_classes: Vec<(u32, u32, u32)>,
    /// `(count, projectors per basis)`: count descending.
    pub basis_compositions: Vec<(u32, u32)>,
}

impl RefinedSymbol {
    pub fn new(
        mut projector_classes: Vec<(u32, u32, u32)>,
        mut basis_compositions: Vec<(u32, u32)>,
    ) -> Self {
        projector_classes.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(b.0.cmp(&a.0)));
        basis_compositions.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        RefinedSymbol {
            projector_classes,
            basis_compositions,
        }
    }

    /// `Σ count · rank · multiplicity`, which must equal `8 · |bases|`.
    pub fn rank_slots(&self) -> u64 {
        self.projector_classes
            .iter()
            .map(|&(c, r, m)| c as u64 * r as u64 * m as u64)
            .sum()
    }
}

impl fmt::Display for RefinedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: Vec<String> = self
            .projector_classes
            .iter()
            .map(|(c, r, m)| format!("{c}^{r}_{m}"))
            .collect();
        let right: Vec<String> = self
            .basis_compositions
            .iter()
            .map(|(c, p)| format!("{c}_{p}"))
            .collect();
        write!(f, "{}-{}", left.join(" "), right.join(" "))
    }
}

impl FromStr for RefinedSymbol {
    type Err = Error;

    /// Accepts `4^2_2 2^1_4 24^1_2-8_7 1_8`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::Parse { line: 1, reason };
        let cleaned = s.replace(['{', '}'], "");
        let (left, right) = cleaned
            .split_once('-')
            .ok_or_else(|| bad(format!("refined symbol `{s}` lacks '-'")))?;
        let mut projector_classes = Vec::new();
        for tok in left.split_whitespace() {
            let (c, rest) = tok
                .split_once('^')
                .ok_or_else(|| bad(format!("`{tok}` lacks '^'")))?;
            let (r, m) = rest
                .split_once('_')
                .ok_or_else(|| bad(format!("`{tok}` lacks '_'")))?;
            let num = |x: &str| {
                x.parse::<u32>()
                    .map_err(|_| bad(format!("bad number in `{tok}`")))
            };
            projector_classes.push((num(c)?, num(r)?, num(m)?));
        }
        let mut basis_compositions = Vec::new();
        for tok in right.split_whitespace() {
            let (c, p) = tok
                .split_once('_')
                .ok_or_else(|| bad(format!("`{tok}` lacks '_'")))?;
            let num = |x: &str| {
                x.parse::<u32>()
                    .map_err(|_| bad(format!("bad number in `{tok}`")))
            };
            basis_compositions.push((num(c)?, num(p)?));
        }
        Ok(RefinedSymbol::new(projector_classes, basis_compositions))
    }
}

impl Serialize for RefinedSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RefinedSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub symbol: RefinedSymbol,
    /// Rank-2 projectors, each pair ascending, pairs sorted.
    pub pairs: Vec<(RayId, RayId)>,
}

/// Pairs rays that occur in exactly the same proof bases. Two such rays share
/// a basis and so are orthogonal; they span a rank-2 projector.
pub fn rank2_refine(proof: &ParityProof) -> Result<Refinement> {
    assert!(
        proof.bases.len() <= 128,
        "occurrence signature holds 128 bases"
    );
    let mut signature: BTreeMap<RayId, u128> = BTreeMap::new();
    for (k, b) in proof.bases.iter().enumerate() {
        for &r in b.rays() {
            *signature.entry(r).or_default() |= 1u128 << k;
        }
    }
    let mut classes: BTreeMap<u128, Vec<RayId>> = BTreeMap::new();
    for (&r, &sig) in &signature {
        classes.entry(sig).or_default().push(r);
    }
    if let Some(big) = classes.values().find(|c| c.len() > 2) {
        return Err(Error::AmbiguousPairing {
            ray: big[0],
            classes: classes.values().filter(|c| c.len() > 1).cloned().collect(),
        });
    }
    let mut pairs: Vec<(RayId, RayId)> = classes
        .values()
        .filter(|c| c.len() == 2)
        .map(|c| (c[0], c[1]))
        .collect();
    pairs.sort_unstable();

    let mut by_class: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for (&sig, members) in &classes {
        let rank = members.len() as u32;
        *by_class.entry((rank, sig.count_ones())).or_default() += 1;
    }
    let mut compositions: BTreeMap<u32, u32> = BTreeMap::new();
    for k in 0..proof.bases.len() {
        let projectors = classes.keys().filter(|&&sig| sig >> k & 1 == 1).count() as u32;
        *compositions.entry(projectors).or_default() += 1;
    }
    let symbol = RefinedSymbol::new(
        by_class.into_iter().map(|((r, m), c)| (c, r, m)).collect(),
        compositions.into_iter().map(|(p, c)| (c, p)).collect(),
    );
    debug_assert_eq!(symbol.rank_slots(), 8 * proof.bases.len() as u64);
    Ok(Refinement { symbol, pairs })
}
