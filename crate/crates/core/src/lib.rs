//! Kochen-Specker parity proofs in the 120-ray E8 system.
//!
//! The pipeline runs rays → orthogonality graph → basis table → families →
//! GF(2) kernels → critical proofs. [`E8`] bundles the first stages.

pub mod config;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod orthostruct;
pub mod proofsearch;
pub mod raygen;
pub mod rayset;
pub mod report;
pub mod substructures;
pub mod symmetry;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use sha2::{Digest, Sha256};

pub use error::{Error, Result};
pub use orthostruct::{Basis, BasisTable, OrthogonalityGraph, SystemSymbol};
pub use proofsearch::{ParityProof, RefinedSymbol, SolverConfig, ValidityRule};
pub use raygen::RaySystem;
pub use rayset::{RayId, RaySet};

use fixtures::GeneratorTexts;
use symmetry::{LabeledTable, RayPermutation};

/// Rays, graph, basis table and the three generating permutations.
#[derive(Debug, Clone)]
pub struct E8 {
    pub rays: RaySystem,
    pub graph: OrthogonalityGraph,
    pub table: BasisTable,
    pub labeled: LabeledTable,
    pub u: RayPermutation,
    pub v: RayPermutation,
    pub w: RayPermutation,
}

impl E8 {
    pub fn build(threshold: f64) -> Result<E8> {
        Self::build_with(threshold, None, &GeneratorTexts::default())
    }

    /// Like [`E8::build`], reusing a clique-enumeration cache under `cache_dir`
    /// when its key matches.
    pub fn build_with(
        threshold: f64,
        cache_dir: Option<&Path>,
        texts: &GeneratorTexts,
    ) -> Result<E8> {
        let rays = RaySystem::standard();
        let graph = orthostruct::build_graph(&rays, threshold)?;
        let table = cached_table(&rays, &graph, threshold, cache_dir, texts)?;
        let (v, w) = symmetry::permutations_from_text(&texts.v_cycles, &texts.w_cycles, &graph)?;
        let block = fixtures::seed_block_from(&texts.seed_block)?;
        let u = symmetry::derive_u(&block)?;
        let seed = Basis::new(block[0])?;
        let labeled = symmetry::generate_table(&seed, &u, &v, &w)?;
        Ok(E8 {
            rays,
            graph,
            table,
            labeled,
            u,
            v,
            w,
        })
    }
}

/// Clique enumeration, read from or written to `cache_dir` when given.
pub fn cached_table(
    rays: &RaySystem,
    graph: &OrthogonalityGraph,
    threshold: f64,
    cache_dir: Option<&Path>,
    texts: &GeneratorTexts,
) -> Result<BasisTable> {
    let key = cache_key(rays, threshold, texts);
    let cached = match cache_dir {
        Some(dir) => {
            let path = dir.join(format!("bases-{}.txt", &key[..16]));
            match File::open(&path) {
                Ok(f) => orthostruct::read_table_cache(BufReader::new(f), &key)?,
                Err(_) => None,
            }
        }
        None => None,
    };
    let table = match cached {
        Some(t) => t,
        None => {
            let t = orthostruct::enumerate_bases(graph);
            if let Some(dir) = cache_dir {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("bases-{}.txt", &key[..16]));
                orthostruct::write_table_cache(&t, &key, BufWriter::new(File::create(path)?))?;
            }
            t
        }
    };
    Ok(table)
}

/// Hash of the threshold, the ray coordinates and the permutation fixtures.
pub fn cache_key(rays: &RaySystem, threshold: f64, texts: &GeneratorTexts) -> String {
    let mut h = Sha256::new();
    h.update(orthostruct::gram_checksum(rays, threshold));
    for text in [&texts.seed_block, &texts.v_cycles, &texts.w_cycles] {
        h.update(text.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
