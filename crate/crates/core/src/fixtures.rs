//! Published tables shipped with the crate.

use crate::error::{Error, Result};
use crate::orthostruct::parse_ids;
use crate::rayset::RayId;

pub const SEED_BLOCK: &str = include_str!("../fixtures/seed_block.txt");
pub const V_BLOCKS: &str = include_str!("../fixtures/v_blocks.txt");
pub const V_CYCLES: &str = include_str!("../fixtures/v_cycles.txt");
pub const W_CYCLES: &str = include_str!("../fixtures/w_cycles.txt");
pub const GENERATOR_MATRICES: &str = include_str!("../fixtures/generator_matrices.txt");
pub const KP_SET: &str = include_str!("../fixtures/kp_set.txt");
pub const PSEUDO_KP_SET: &str = include_str!("../fixtures/pseudo_kp_set.txt");
pub const KP_PROOFS: &str = include_str!("../fixtures/kp_proofs.txt");

/// A published parity proof with its captioned symbols.
#[derive(Debug, Clone, Copy)]
pub struct PublishedProof {
    pub name: &'static str,
    pub text: &'static str,
    pub symbol: &'static str,
    pub refined: Option<&'static str>,
}

/// The generator fixtures, overridable from files for testing damaged inputs.
#[derive(Debug, Clone)]
pub struct GeneratorTexts {
    pub seed_block: String,
    pub v_cycles: String,
    pub w_cycles: String,
}

impl Default for GeneratorTexts {
    fn default() -> Self {
        GeneratorTexts {
            seed_block: SEED_BLOCK.into(),
            v_cycles: V_CYCLES.into(),
            w_cycles: W_CYCLES.into(),
        }
    }
}

impl GeneratorTexts {
    /// Built-in texts, replaced by `seed_block.txt`, `v_cycles.txt` or
    /// `w_cycles.txt` where `dir` has them.
    pub fn with_overrides(dir: &std::path::Path) -> Result<Self> {
        let mut t = GeneratorTexts::default();
        for (name, slot) in [
            ("seed_block.txt", &mut t.seed_block),
            ("v_cycles.txt", &mut t.v_cycles),
            ("w_cycles.txt", &mut t.w_cycles),
        ] {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(path)?;
            }
        }
        Ok(t)
    }
}

pub const PUBLISHED_PROOFS: [PublishedProof; 7] = [
    PublishedProof {
        name: "aaeeeehh",
        text: include_str!("../fixtures/proof_aaeeeehh.txt"),
        symbol: "15_4 30_2-15_8",
        refined: None,
    },
    PublishedProof {
        name: "type2-rank2",
        text: include_str!("../fixtures/proof_type2_rank2.txt"),
        symbol: "36_2-9_8",
        refined: Some("18^2_2-9_4"),
    },
    PublishedProof {
        name: "type2-mixed",
        text: include_str!("../fixtures/proof_type2_mixed.txt"),
        symbol: "36_2-9_8",
        refined: Some("9^2_2 18^1_2-9_6"),
    },
    PublishedProof {
        name: "type3",
        text: include_str!("../fixtures/proof_type3.txt"),
        symbol: "6_6 12_4 42_2-21_8",
        refined: None,
    },
    PublishedProof {
        name: "type4-36",
        text: include_str!("../fixtures/proof_type4_9.txt"),
        symbol: "36_2-9_8",
        refined: Some("10^2_2 16^1_2-8_6 1_4"),
    },
    PublishedProof {
        name: "type4-rank2",
        text: include_str!("../fixtures/proof_type4_rank2.txt"),
        symbol: "44_2-11_8",
        refined: Some("22^2_2-11_4"),
    },
    PublishedProof {
        name: "type4-34",
        text: include_str!("../fixtures/proof_type4_34rays.txt"),
        symbol: "2_4 32_2-9_8",
        refined: Some("4^2_2 2^1_4 24^1_2-8_7 1_8"),
    },
];

pub fn published(name: &str) -> Option<&'static PublishedProof> {
    PUBLISHED_PROOFS.iter().find(|p| p.name == name)
}

/// Splits a fixture into blocks of rows. Blank lines end a block, `#` starts a comment.
pub fn parse_blocks(text: &str) -> Result<Vec<Vec<Vec<RayId>>>> {
    let mut blocks = Vec::new();
    let mut current: Vec<Vec<RayId>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if raw.trim().is_empty() && !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(parse_ids(&line.replace('|', " "), k + 1)?);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

pub fn parse_rows(text: &str) -> Result<Vec<Vec<RayId>>> {
    Ok(parse_blocks(text)?.into_iter().flatten().collect())
}

fn as_eight(name: &str, row: &[RayId]) -> Result<[RayId; 8]> {
    row.try_into().map_err(|_| Error::FixtureCorrupt {
        name: name.into(),
        reason: format!("row {row:?} does not have 8 entries"),
    })
}

/// Rows in printed order; column alignment matters for deriving U.
pub fn seed_block() -> Result<Vec<[RayId; 8]>> {
    seed_block_from(SEED_BLOCK)
}

pub fn seed_block_from(text: &str) -> Result<Vec<[RayId; 8]>> {
    parse_rows(text)?
        .iter()
        .map(|r| as_eight("seed_block", r))
        .collect()
}

pub fn v_blocks() -> Result<Vec<Vec<[RayId; 8]>>> {
    parse_blocks(V_BLOCKS)?
        .iter()
        .map(|b| b.iter().map(|r| as_eight("v_blocks", r)).collect())
        .collect()
}

/// A KP-style set as printed: seeds, then complementary pairs.
#[derive(Debug, Clone)]
pub struct PrintedKpSet {
    pub seeds: Vec<[RayId; 8]>,
    pub pairs: Vec<([RayId; 8], [RayId; 8])>,
}

pub fn parse_kp_set(name: &str, text: &str) -> Result<PrintedKpSet> {
    let blocks = parse_blocks(text)?;
    if blocks.len() != 2 {
        return Err(Error::FixtureCorrupt {
            name: name.into(),
            reason: format!("expected 2 blocks, found {}", blocks.len()),
        });
    }
    let seeds = blocks[0]
        .iter()
        .map(|r| as_eight(name, r))
        .collect::<Result<_>>()?;
    let pairs = blocks[1]
        .iter()
        .map(|r| {
            if r.len() != 16 {
                return Err(Error::FixtureCorrupt {
                    name: name.into(),
                    reason: "pair line needs 16 ids".into(),
                });
            }
            Ok((as_eight(name, &r[..8])?, as_eight(name, &r[8..])?))
        })
        .collect::<Result<_>>()?;
    Ok(PrintedKpSet { seeds, pairs })
}

/// `(generator, sign, target, source)` terms.
pub fn generator_terms() -> Result<Vec<(char, f64, RayId, RayId)>> {
    let mut out = Vec::new();
    for (k, raw) in GENERATOR_MATRICES.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::FixtureCorrupt {
            name: "generator_matrices".into(),
            reason: format!("line {}: `{raw}`", k + 1),
        };
        if parts.len() != 4 {
            return Err(bad());
        }
        let g = parts[0].chars().next().ok_or_else(bad)?;
        let sign = match parts[1] {
            "+" => 1.0,
            "-" => -1.0,
            _ => return Err(bad()),
        };
        let t = parse_ids(parts[2], k + 1)?[0];
        let s = parse_ids(parts[3], k + 1)?[0];
        out.push((g, sign, t, s));
    }
    Ok(out)
}
