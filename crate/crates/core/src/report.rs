//! Verification reports, proof certificates and input parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::families::{
    classify_table, resolve_type1_profiles, Profile, TYPE2_PROFILES, TYPE3_PROFILES, TYPE4_PROFILES,
};
use crate::fixtures::{self, GeneratorTexts};
use crate::orthostruct::{
    build_graph, check_saturation, system_symbol, Basis, BasisTable, OrthogonalityGraph,
    SystemSymbol, E8_DEGREE,
};
use crate::proofsearch::{
    is_critical, is_parity_proof, noncontextuality_gap, rank2_refine, Census, CriticalStatus,
    NoncontextualityGap, ParityProof, RefinedSymbol, SolverConfig, SymbolCount,
};
use crate::raygen::RaySystem;
use crate::rayset::{RayId, RaySet};
use crate::symmetry::{self, BasisLabel, LabeledTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub ok: bool,
}

impl Check {
    fn new(name: &str, value: impl ToString, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: value.to_string(),
            ok,
        }
    }

    fn failed(name: &str, err: &Error) -> Check {
        Check::new(name, err, false)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok { "OK" } else { "FAIL" };
        if self.value.is_empty() {
            write!(f, "{}: {verdict}", self.name)
        } else {
            write!(f, "{}: {} {verdict}", self.name, self.value)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.checks.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Rebuilds everything from scratch and records one check per invariant.
/// Later checks that depend on a failed stage are reported as failed too.
pub fn verify(cfg: &RunConfig, texts: &GeneratorTexts) -> VerifyReport {
    let mut checks = Vec::new();
    let sys = RaySystem::standard();
    let worst = sys
        .rays()
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "rays",
        sys.rays().len(),
        sys.rays().len() == 120 && worst <= 1e-12,
    ));
    let graph = match build_graph(&sys, cfg.threshold) {
        Ok(g) => {
            checks.push(Check::new("degree", E8_DEGREE, true));
            g
        }
        Err(e) => {
            checks.push(Check::failed("degree", &e));
            return VerifyReport {
                seed: cfg.seed,
                checks,
            };
        }
    };
    let table =
        match crate::cached_table(&sys, &graph, cfg.threshold, cfg.cache_dir.as_deref(), texts) {
            Ok(t) => t,
            Err(e) => {
                checks.push(Check::failed("bases", &e));
                return VerifyReport {
                    seed: cfg.seed,
                    checks,
                };
            }
        };
    checks.push(Check::new("bases", table.len(), table.len() == 2025));
    let per_ray: Vec<usize> = (1..=120u8).map(|r| table.containing(r).len()).collect();
    let uniform = per_ray.iter().all(|&n| n == per_ray[0]);
    checks.push(Check::new(
        "perRay",
        per_ray[0],
        uniform && per_ray[0] == 135,
    ));
    let sat = check_saturation(table.masks(), &graph);
    checks.push(Check::new(
        "saturation",
        if sat.is_saturated() {
            String::new()
        } else {
            format!("{} uncovered edges", sat.uncovered.len())
        },
        sat.is_saturated(),
    ));
    let symbol = system_symbol(RaySet::all(), table.masks());
    checks.push(match symbol {
        Ok(s) => Check::new("symbol", &s, s.to_string() == "120_135-2025_8"),
        Err(e) => Check::failed("symbol", &e),
    });
    match generated_table(&graph, texts) {
        Ok(labeled) => {
            let same = labeled.to_table().bases() == table.bases();
            checks.push(Check::new("generation", "", same));
            checks.push(match printed_blocks_match(&labeled) {
                Ok(()) => Check::new("printedBlocks", "", true),
                Err(e) => Check::failed("printedBlocks", &e),
            });
            checks.push(match matrices_match(&sys, &graph, texts) {
                Ok(()) => Check::new("matrices", "", true),
                Err(e) => Check::failed("matrices", &e),
            });
        }
        Err(e) => checks.push(Check::failed("generation", &e)),
    }
    checks.push(match measured_group_order(&sys, &table, cfg.seed) {
        Ok(order) => Check::new("groupOrder", order, order == symmetry::coxeter_order()),
        Err(e) => Check::failed("groupOrder", &e),
    });
    VerifyReport {
        seed: cfg.seed,
        checks,
    }
}

fn generated_table(graph: &OrthogonalityGraph, texts: &GeneratorTexts) -> Result<LabeledTable> {
    let (v, w) = symmetry::permutations_from_text(&texts.v_cycles, &texts.w_cycles, graph)?;
    let block = fixtures::seed_block_from(&texts.seed_block)?;
    let u = symmetry::derive_u(&block)?;
    symmetry::generate_table(&Basis::new(block[0])?, &u, &v, &w)
}

/// The printed seed block and its V images sit at labels `(0, m, l)`.
fn printed_blocks_match(labeled: &LabeledTable) -> Result<()> {
    for (m, block) in fixtures::v_blocks()?.iter().enumerate() {
        for (l, row) in block.iter().enumerate() {
            let label = BasisLabel {
                n: 0,
                m: m as u8,
                l: l as u8,
            };
            let printed = Basis::new(*row)?;
            if labeled.basis(label) != Some(printed) {
                return Err(Error::Mismatch(format!(
                    "label {label} is not the printed basis {printed}"
                )));
            }
        }
    }
    Ok(())
}

fn matrices_match(
    sys: &RaySystem,
    graph: &OrthogonalityGraph,
    texts: &GeneratorTexts,
) -> Result<()> {
    let (v, w) = symmetry::permutations_from_text(&texts.v_cycles, &texts.w_cycles, graph)?;
    let u = symmetry::derive_u(&fixtures::seed_block_from(&texts.seed_block)?)?;
    let mats = symmetry::matrix_fixtures(sys)?;
    for (name, m, p) in [("U", &mats.u, &u), ("V", &mats.v, &v), ("W", &mats.w, &w)] {
        let (induced, _) = m.induced_permutation(sys, name)?;
        if &induced != p {
            return Err(Error::Mismatch(format!(
                "matrix {name} induces a different permutation"
            )));
        }
    }
    Ok(())
}

/// Group order from the seed basis against itself and four seeded random targets.
pub fn measured_group_order(sys: &RaySystem, table: &BasisTable, seed: u64) -> Result<u64> {
    let fixed = Basis::new(fixtures::seed_block()?[0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = vec![fixed];
    targets.extend(table.bases().choose_multiple(&mut rng, 4).copied());
    Ok(symmetry::group_order(sys, table, &fixed, &targets)?.order)
}

/// Which of the four named classes a profile belongs to.
pub fn profile_type(profile: &Profile, type1: &[Profile]) -> Option<u8> {
    let s = profile.to_string();
    if type1.contains(profile) {
        Some(1)
    } else if TYPE2_PROFILES.contains(&s.as_str()) {
        Some(2)
    } else if TYPE3_PROFILES.contains(&s.as_str()) {
        Some(3)
    } else if TYPE4_PROFILES.contains(&s.as_str()) {
        Some(4)
    } else {
        None
    }
}

/// `profile,bases,type` rows for every profile present in the table.
pub fn write_profile_census<W: Write>(table: &BasisTable, mut out: W) -> Result<()> {
    let type1 = resolve_type1_profiles(table);
    writeln!(out, "profile,bases,type")?;
    for (p, members) in classify_table(table) {
        let ty = profile_type(&p, &type1)
            .map(|t| t.to_string())
            .unwrap_or_default();
        writeln!(out, "{p},{},{ty}", members.len())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    pub basis_labels: Vec<Option<BasisLabel>>,
    pub bases: Vec<Vec<RayId>>,
    pub parity: bool,
    pub symbol: SystemSymbol,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refined_symbol: Option<RefinedSymbol>,
    pub critical: bool,
    /// Index of the dropped basis → rays valued 1 in a valid assignment of the rest.
    pub witnesses: BTreeMap<usize, Vec<RayId>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<Gap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gap {
    pub classical_bound: u32,
    pub quantum_value: u32,
}

impl From<NoncontextualityGap> for Gap {
    fn from(g: NoncontextualityGap) -> Gap {
        Gap {
            classical_bound: g.classical_bound,
            quantum_value: g.quantum_value,
        }
    }
}

/// Parity, symbols, criticality with witnesses, and the gap for critical proofs.
/// Fails only if the solver runs out of budget.
pub fn certify(
    bases: &[Basis],
    graph: &OrthogonalityGraph,
    labeled: Option<&LabeledTable>,
    family: Option<&str>,
    solver: SolverConfig,
) -> Result<Certificate> {
    let masks: Vec<RaySet> = bases.iter().map(Basis::mask).collect();
    let (parity, mult) = is_parity_proof(&masks);
    let rays: RaySet = mult.keys().collect();
    let symbol = system_symbol(rays, &masks)?;
    let basis_labels = bases
        .iter()
        .map(|b| labeled.and_then(|l| l.label_of(b.mask())))
        .collect();
    let mut cert = Certificate {
        family: family.map(str::to_string),
        basis_labels,
        bases: bases.iter().map(|b| b.rays().to_vec()).collect(),
        parity,
        symbol,
        refined_symbol: None,
        critical: false,
        witnesses: BTreeMap::new(),
        gap: None,
    };
    if !parity {
        return Ok(cert);
    }
    let proof = ParityProof::new(bases.to_vec())?;
    cert.refined_symbol = rank2_refine(&proof).ok().map(|r| r.symbol);
    let crit = is_critical(&masks, graph, solver);
    if let CriticalStatus::Unresolved { nodes, .. } = crit.status {
        return Err(Error::TimeoutExceeded { nodes });
    }
    cert.critical = crit.is_critical();
    cert.witnesses = crit
        .witnesses
        .iter()
        .map(|(&k, a)| (k, a.ones_list()))
        .collect();
    cert.gap = noncontextuality_gap(&proof, &crit).ok().map(Gap::from);
    Ok(cert)
}

/// Whitespace tables (one basis of 8 ids per line, `#` comments allowed), a
/// JSON list of id lists, or a JSON object with a `bases` field.
pub fn parse_proof_input(text: &str, graph: &OrthogonalityGraph) -> Result<Vec<Basis>> {
    let trimmed = text.trim_start();
    let rows: Vec<(usize, Vec<u32>)> = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Input {
            List(Vec<Vec<u32>>),
            Object { bases: Vec<Vec<u32>> },
        }
        let rows = match serde_json::from_str::<Input>(trimmed)? {
            Input::List(r) | Input::Object { bases: r } => r,
        };
        rows.into_iter()
            .enumerate()
            .map(|(k, r)| (k + 1, r))
            .collect()
    } else {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            let mut ids = Vec::new();
            for tok in body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
            {
                ids.push(tok.parse::<u32>().map_err(|_| Error::Parse {
                    line: k + 1,
                    reason: format!("`{tok}` is not a ray id"),
                })?);
            }
            if !ids.is_empty() {
                rows.push((k + 1, ids));
            }
        }
        rows
    };
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            reason: "no bases given".into(),
        });
    }
    rows.into_iter()
        .map(|(line, ids)| {
            let ids: Vec<RayId> = ids
                .into_iter()
                .map(crate::rayset::check_ray)
                .collect::<Result<_>>()?;
            if ids.len() != 8 {
                return Err(Error::Parse {
                    line,
                    reason: format!("{} ids, a basis has 8", ids.len()),
                });
            }
            let set: RaySet = ids.iter().collect();
            if set.len() != 8 || !graph.is_clique(set) {
                return Err(Error::NotABasis { line, rays: ids });
            }
            Basis::from_slice(&ids)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CensusSummary {
    pub family: String,
    pub family_size: usize,
    pub kernel_dimension: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub candidates: u64,
    pub circuits: u64,
    pub unresolved: u64,
    pub critical: usize,
    pub coverage: f64,
    pub max_bases: u32,
    pub symbols: Vec<SymbolCount>,
}

impl From<&Census> for CensusSummary {
    fn from(c: &Census) -> Self {
        CensusSummary {
            family: c.family.clone(),
            family_size: c.family_size,
            kernel_dimension: c.kernel_dimension,
            exhaustive: c.exhaustive,
            seed: c.seed,
            candidates: c.candidates,
            circuits: c.circuits,
            unresolved: c.unresolved,
            critical: c.proofs.len(),
            coverage: c.coverage,
            max_bases: c.max_bases(),
            symbols: c.by_symbol(),
        }
    }
}

/// Writes `census.csv`, `census.json` and up to `per_symbol` certificates per
/// symbol under `dir/certificates`.
pub fn write_census_outputs(
    dir: &Path,
    census: &Census,
    e8: &crate::E8,
    family: &crate::families::Family,
    solver: SolverConfig,
    per_symbol: usize,
) -> Result<usize> {
    std::fs::create_dir_all(dir.join("certificates"))?;
    census.write_csv(std::fs::File::create(dir.join("census.csv"))?)?;
    let summary = CensusSummary::from(census);
    std::fs::write(
        dir.join("census.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    let mut taken: BTreeMap<u32, usize> = BTreeMap::new();
    let mut written = 0;
    for p in &census.proofs {
        let n = taken.entry(p.symbol_id).or_default();
        if *n >= per_symbol {
            continue;
        }
        let bases = census.bases_of(&e8.table, family, p);
        let cert = certify(
            &bases,
            &e8.graph,
            Some(&e8.labeled),
            Some(&census.family),
            solver,
        )?;
        let name = format!(
            "{}-{:03}.json",
            census.symbol(p).to_string().replace(' ', "_"),
            *n
        );
        std::fs::write(
            dir.join("certificates").join(name),
            serde_json::to_string_pretty(&cert)? + "\n",
        )?;
        *n += 1;
        written += 1;
    }
    Ok(written)
}
