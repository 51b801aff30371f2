//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//! Runs as a plain binary (`harness = false`) so the lines come out in order.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use e8ks::families::{
    classify_table, select_family, FamilySelector, TYPE2_PROFILES, TYPE3_PROFILES, TYPE4_PROFILES,
};
use e8ks::fixtures::{self, PUBLISHED_PROOFS};
use e8ks::orthostruct::{build_graph, check_saturation, enumerate_bases, E8_DEGREE};
use e8ks::proofsearch::{
    brute_force_colorable, colorable, enumerate_family_proofs, is_critical, kernel, rank2_refine,
    CensusConfig, IncidenceMatrix,
};
use e8ks::raygen::{RaySystem, DEFAULT_THRESHOLD};
use e8ks::substructures::{
    build_kp_sets, count_cliques, extract_e6, extract_e7, kp_parity_proofs, kp_set_from_seeds,
};
use e8ks::symmetry::{self, BasisLabel};
use e8ks::{Basis, ParityProof, RaySet, SolverConfig, SystemSymbol, ValidityRule, E8};

const TYPE1_SYMBOLS: [(&str, u64); 3] = [
    ("15_4 30_2-15_8", 4),
    ("15_4 70_2-25_8", 12),
    ("45_4 50_2-35_8", 12),
];
const TYPE2_SYMBOLS: [(&str, u64); 2] = [("36_2-9_8", 20), ("60_2-15_8", 24)];
/// The printed "52_2 8_2-17_8" does not balance; 8_4 52_2-17_8 does.
const TYPE3_SYMBOLS: [&str; 20] = [
    "60_2-15_8",
    "8_4 52_2-17_8",
    "16_4 44_2-19_8",
    "1_6 14_4 45_2-19_8",
    "2_6 12_4 46_2-19_8",
    "24_4 36_2-21_8",
    "1_6 22_4 37_2-21_8",
    "2_6 20_4 38_2-21_8",
    "3_6 18_4 39_2-21_8",
    "4_6 16_4 40_2-21_8",
    "6_6 12_4 42_2-21_8",
    "32_4 28_2-23_8",
    "1_6 30_4 29_2-23_8",
    "2_6 28_4 30_2-23_8",
    "3_6 26_4 31_2-23_8",
    "4_6 24_4 32_2-23_8",
    "5_6 22_4 33_2-23_8",
    "6_6 20_4 34_2-23_8",
    "7_6 18_4 35_2-23_8",
    "8_6 16_4 36_2-23_8",
];
const TYPE3_TOTAL: u64 = 700_326;
const TYPE4_SYMBOLS: [&str; 9] = [
    "2_4 32_2-9_8",
    "36_2-9_8",
    "8_4 28_2-11_8",
    "7_4 30_2-11_8",
    "13_4 26_2-13_8",
    "2_6 15_4 24_2-15_8",
    "1_8 2_6 9_4 32_2-15_8",
    "1_8 3_6 11_4 33_2-17_8",
    "12_6 24_4 24_2-27_8",
];
const TYPE4_MAX_BASES: u32 = 27;
const TYPE4_SAMPLES: u64 = 1_000_000;
const KP_SYMBOLS: [&str; 3] = ["28_2 8_4-11_8", "24_2 14_4-13_8", "20_2 20_4-15_8"];
const PSEUDO_ASSIGNMENT: [u8; 5] = [1, 85, 17, 93, 68];

type Check = fn(&E8) -> Verdict;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn sym(s: &str) -> SystemSymbol {
    s.parse().expect("symbol constant parses")
}

fn structure(e8: &E8) -> Verdict {
    let started = Instant::now();
    let sys = RaySystem::standard();
    let worst = sys
        .rays()
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let graph = match build_graph(&sys, DEFAULT_THRESHOLD) {
        Ok(g) => g,
        Err(e) => return verdict(false, e.to_string()),
    };
    let degrees_ok = (1..=120u8).all(|r| graph.degree(r) == E8_DEGREE);
    let table = enumerate_bases(&graph);
    let per_ray_ok = (1..=120u8).all(|r| table.containing(r).len() == 135);
    let saturated = check_saturation(table.masks(), &graph).is_saturated();
    let fast = started.elapsed() < Duration::from_secs(60);
    let ok = sys.rays().len() == 120
        && worst <= 1e-12
        && degrees_ok
        && table.len() == 2025
        && per_ray_ok
        && saturated
        && fast
        && table.bases() == e8.table.bases();
    verdict(
        ok,
        format!(
            "120 rays (max norm error {worst:.1e}), degree 63: {degrees_ok}, {} bases, 135 per ray: {per_ray_ok}, saturated: {saturated}",
            table.len()
        ),
    )
}

fn oracle_equivalence(e8: &E8) -> Verdict {
    let same = e8.labeled.to_table().bases() == e8.table.bases();
    let mut mismatches = 0;
    let blocks = fixtures::v_blocks().expect("printed blocks");
    for (m, block) in blocks.iter().enumerate() {
        for (l, row) in block.iter().enumerate() {
            let label = BasisLabel {
                n: 0,
                m: m as u8,
                l: l as u8,
            };
            if e8.labeled.basis(label) != Some(Basis::new(*row).unwrap()) {
                mismatches += 1;
            }
        }
    }
    let seed_rows = fixtures::seed_block().unwrap();
    let seed_ok = seed_rows.iter().enumerate().all(|(l, row)| {
        e8.labeled.basis(BasisLabel {
            n: 0,
            m: 0,
            l: l as u8,
        }) == Some(Basis::new(*row).unwrap())
    });
    verdict(
        same && mismatches == 0 && seed_ok && blocks.len() == 9,
        format!("generated = enumerated: {same}; seed block matches: {seed_ok}; {} printed blocks, {mismatches} mismatched rows", blocks.len()),
    )
}

fn symmetry_group(e8: &E8) -> Verdict {
    let mats = match symmetry::matrix_fixtures(&e8.rays) {
        Ok(m) => m,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut worst = 0.0f64;
    let mut realized = true;
    for (m, p) in [(&mats.u, &e8.u), (&mats.v, &e8.v), (&mats.w, &e8.w)] {
        for ray in e8.rays.rays() {
            let (target, _, dist) = e8.rays.nearest_ray(&m.apply(&ray.coords));
            worst = worst.max(dist);
            realized &= target == p.apply(ray.id);
        }
    }
    let seed = *e8
        .labeled
        .basis(BasisLabel { n: 0, m: 0, l: 0 })
        .as_ref()
        .unwrap();
    let started = Instant::now();
    let per_basis = symmetry::count_basis_symmetries(&e8.rays, &seed, &seed);
    let sweep = started.elapsed();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut targets = vec![seed];
    targets.extend((0..4).map(|_| *e8.table.basis(rng.gen_range(0..e8.table.len()))));
    let order = symmetry::group_order(&e8.rays, &e8.table, &seed, &targets);
    let (order_ok, order_text) = match order {
        Ok(g) => (
            g.order == 696_729_600 && g.order == symmetry::coxeter_order(),
            g.order.to_string(),
        ),
        Err(e) => (false, e.to_string()),
    };
    verdict(
        realized && worst <= 1e-8 && per_basis == 1344 && order_ok && sweep < Duration::from_secs(60),
        format!("matrices realize U, V, W (max miss {worst:.1e}): {realized}; orderings {per_basis} in {sweep:.1?}; group order {order_text}"),
    )
}

fn full_kernel(e8: &E8) -> Verdict {
    let k = kernel(&IncidenceMatrix::new(e8.table.masks().to_vec()));
    verdict(
        k.dimension() == 1941 && k.rank == 84,
        format!(
            "kernel dimension {}, rank {}, so 2^{} parity proofs",
            k.dimension(),
            k.rank,
            k.dimension() - 1
        ),
    )
}

fn profiles(e8: &E8) -> Verdict {
    let classes = classify_table(&e8.table);
    let size = |sel: FamilySelector| select_family(&e8.table, &sel).map(|f| f.len()).unwrap_or(0);
    let type1 = e8ks::families::resolve_type1_profiles(&e8.table);
    let t1_ok = type1.len() == 4 && type1.iter().all(|p| classes[p].len() == 15);
    let t2_ok = TYPE2_PROFILES
        .iter()
        .all(|p| classes.get(&p.parse().unwrap()).map(Vec::len) == Some(30));
    let t3 = classes
        .get(&TYPE3_PROFILES[0].parse().unwrap())
        .map(Vec::len);
    let t4 = classes
        .get(&TYPE4_PROFILES[0].parse().unwrap())
        .map(Vec::len);
    let type1_names: Vec<String> = type1.iter().map(|p| p.to_string()).collect();
    verdict(
        classes.len() == 33 && t1_ok && t2_ok && t3 == Some(45) && t4 == Some(75) && size(FamilySelector::Type(2)) == 60,
        format!("{} profiles; Type 1 {:?} at 15 each: {t1_ok}; Type 2 at 30 each: {t2_ok}; EEFFGGHH {t3:?}; AABBCCDD {t4:?}", classes.len(), type1_names),
    )
}

fn published_proofs(e8: &E8) -> Verdict {
    let mut failures = Vec::new();
    for p in PUBLISHED_PROOFS.iter() {
        let bases: Vec<Basis> = fixtures::parse_rows(p.text)
            .unwrap()
            .iter()
            .map(|r| Basis::from_slice(r).unwrap())
            .collect();
        let Ok(proof) = ParityProof::new(bases) else {
            failures.push(format!("{}: not a parity proof", p.name));
            continue;
        };
        if proof.symbol != sym(p.symbol) {
            failures.push(format!("{}: symbol {}", p.name, proof.symbol));
        }
        if let Some(want) = p.refined {
            match rank2_refine(&proof) {
                Ok(r) if r.symbol == want.parse().unwrap() => {}
                Ok(r) => failures.push(format!("{}: refined {}", p.name, r.symbol)),
                Err(e) => failures.push(format!("{}: {e}", p.name)),
            }
        }
        if !is_critical(&proof.masks(), &e8.graph, SolverConfig::default()).is_critical() {
            failures.push(format!("{}: not critical", p.name));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} printed proofs: symbols, refined symbols and criticality match",
                PUBLISHED_PROOFS.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

fn counts_by_symbol(
    e8: &E8,
    ty: u8,
    cfg: &CensusConfig,
) -> (BTreeMap<SystemSymbol, u64>, e8ks::proofsearch::Census) {
    let family = select_family(&e8.table, &FamilySelector::Type(ty)).unwrap();
    let census = enumerate_family_proofs(&e8.table, &e8.graph, &family, cfg).unwrap();
    let counts = census
        .by_symbol()
        .into_iter()
        .map(|s| (s.symbol, s.count))
        .collect();
    (counts, census)
}

fn family_censuses(e8: &E8) -> Verdict {
    let cfg = CensusConfig::default();
    let (t1, c1) = counts_by_symbol(e8, 1, &cfg);
    let want1: BTreeMap<SystemSymbol, u64> =
        TYPE1_SYMBOLS.iter().map(|&(s, n)| (sym(s), n)).collect();
    let (t2, c2) = counts_by_symbol(e8, 2, &cfg);
    let want2: BTreeMap<SystemSymbol, u64> =
        TYPE2_SYMBOLS.iter().map(|&(s, n)| (sym(s), n)).collect();
    let started = Instant::now();
    let (t3, c3) = counts_by_symbol(e8, 3, &cfg);
    let elapsed = started.elapsed();
    let want3: BTreeSet<SystemSymbol> = TYPE3_SYMBOLS.iter().map(|s| sym(s)).collect();
    let got3: BTreeSet<SystemSymbol> = t3.keys().cloned().collect();
    let total3: u64 = t3.values().sum();
    let exhaustive = c1.exhaustive && c2.exhaustive && c3.exhaustive;
    let ok = exhaustive
        && t1 == want1
        && t2 == want2
        && got3 == want3
        && total3 == TYPE3_TOTAL
        && c3.unresolved == 0;
    verdict(
        ok,
        format!(
            "Type 1 {:?}; Type 2 {:?}; Type 3 {total3} proofs over {} symbols (kernel dimension {}, exhaustive {}, {elapsed:.1?})",
            t1.values().collect::<Vec<_>>(),
            t2.values().collect::<Vec<_>>(),
            got3.len(),
            c3.kernel_dimension,
            c3.exhaustive
        ),
    )
}

fn type4(e8: &E8) -> Verdict {
    let cfg = CensusConfig {
        samples: TYPE4_SAMPLES,
        ..CensusConfig::default()
    };
    let (counts, census) = counts_by_symbol(e8, 4, &cfg);
    let missing: Vec<&str> = TYPE4_SYMBOLS
        .iter()
        .copied()
        .filter(|s| !counts.contains_key(&sym(s)))
        .collect();
    let oversized = census
        .proofs
        .iter()
        .filter(|p| p.members.count() > TYPE4_MAX_BASES)
        .count();
    verdict(
        missing.is_empty() && oversized == 0,
        format!(
            "kernel dimension {}, {} samples (seed {}, coverage {:.2e}), {} critical proofs over {} symbols; published symbols missing: {:?}; largest {} bases, {oversized} critical proofs above {TYPE4_MAX_BASES} bases",
            census.kernel_dimension,
            census.candidates,
            census.seed,
            census.coverage,
            census.proofs.len(),
            counts.len(),
            missing,
            census.max_bases()
        ),
    )
}

fn substructures(e8: &E8) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let e7 = extract_e7(&e8.table, &e8.graph, 1).unwrap();
    let e7_colorable = colorable(&e7.contexts, &e8.graph, SolverConfig::default())
        .unwrap()
        .is_colorable();
    ok &= e7.symbol == sym("63_15-135_7") && !e7_colorable;
    notes.push(format!("E7 {} colorable: {e7_colorable}", e7.symbol));

    let j = (2..=120u8).find(|&j| !e8.graph.adjacent(1, j)).unwrap();
    let e6 = extract_e6(&e8.graph, 1, j).unwrap();
    let six = count_cliques(&e8.graph, e6, 6);
    ok &= e6.len() == 36 && six == 0;
    notes.push(format!("E6 {} rays, {six} bases", e6.len()));

    let printed = fixtures::parse_kp_set("kp_set", fixtures::KP_SET).unwrap();
    let seeds: Vec<Basis> = printed
        .seeds
        .iter()
        .map(|r| Basis::new(*r).unwrap())
        .collect();
    let kp = kp_set_from_seeds(&e8.table, &seeds).unwrap();
    let mut want: Vec<RaySet> = seeds.iter().map(Basis::mask).collect();
    for (a, b) in &printed.pairs {
        want.push(Basis::new(*a).unwrap().mask());
        want.push(Basis::new(*b).unwrap().mask());
    }
    want.sort();
    let mut got = kp.masks();
    got.sort();
    let reconstructed =
        got == want && kp.is_kp && kp.symbol().map(|s| s == sym("40_5-25_8")).unwrap_or(false);
    ok &= reconstructed;
    notes.push(format!("KP set reconstructed: {reconstructed}"));

    let proofs = kp_parity_proofs(&kp).unwrap();
    let mut by_symbol: BTreeMap<SystemSymbol, usize> = BTreeMap::new();
    for p in &proofs {
        *by_symbol.entry(p.symbol.clone()).or_default() += 1;
    }
    let want_syms: BTreeSet<SystemSymbol> = KP_SYMBOLS.iter().map(|s| sym(s)).collect();
    let got_syms: BTreeSet<SystemSymbol> = by_symbol.keys().cloned().collect();
    ok &= proofs.len() == 1024 && got_syms == want_syms;
    let dist: Vec<String> = by_symbol.iter().map(|(s, n)| format!("{n}x {s}")).collect();
    notes.push(format!("{} KP proofs ({})", proofs.len(), dist.join(", ")));

    let printed = fixtures::parse_kp_set("pseudo_kp_set", fixtures::PSEUDO_KP_SET).unwrap();
    let seeds: Vec<Basis> = printed
        .seeds
        .iter()
        .map(|r| Basis::new(*r).unwrap())
        .collect();
    let pseudo = kp_set_from_seeds(&e8.table, &seeds).unwrap();
    let assignment = e8ks::proofsearch::Assignment {
        scope: pseudo.rays(),
        ones: PSEUDO_ASSIGNMENT.iter().collect(),
    };
    let valid = assignment
        .validate(&pseudo.masks(), Some(&e8.graph))
        .is_ok();
    ok &= !pseudo.is_kp && valid;
    notes.push(format!(
        "pseudo set flagged: {}, printed assignment valid: {valid}",
        !pseudo.is_kp
    ));

    let block: Vec<Basis> = fixtures::seed_block()
        .unwrap()
        .iter()
        .map(|r| Basis::new(*r).unwrap())
        .collect();
    let all = build_kp_sets(&e8.table, &block).unwrap();
    notes.push(format!(
        "{} of {} seed choices are KP sets",
        all.iter().filter(|s| s.is_kp).count(),
        all.len()
    ));
    verdict(ok, notes.join("; "))
}

/// Random sub-collections whose rays stay within `max_rays`.
fn small_collection(e8: &E8, rng: &mut ChaCha8Rng, max_bases: usize, max_rays: u32) -> Vec<RaySet> {
    let target = rng.gen_range(1..=max_bases);
    let first = e8.table.masks()[rng.gen_range(0..e8.table.len())];
    let mut chosen = vec![first];
    let mut union = first;
    while chosen.len() < target {
        let options: Vec<RaySet> = e8
            .table
            .masks()
            .iter()
            .copied()
            .filter(|m| !chosen.contains(m) && union.union(*m).len() <= max_rays)
            .collect();
        if options.is_empty() {
            break;
        }
        let pick = options[rng.gen_range(0..options.len())];
        union = union.union(pick);
        chosen.push(pick);
    }
    chosen
}

fn solver_soundness(e8: &E8) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut agree = 0;
    let mut uncolorable = 0;
    let mut invalid = 0;
    for _ in 0..100 {
        let contexts = small_collection(e8, &mut rng, 12, 20);
        let mut same = true;
        for rule in [ValidityRule::Orthogonality, ValidityRule::PerBasis] {
            let cfg = SolverConfig {
                rule,
                ..SolverConfig::default()
            };
            let fast = colorable(&contexts, &e8.graph, cfg).unwrap();
            let slow = brute_force_colorable(&contexts, &e8.graph, rule);
            same &= fast.is_colorable() == slow.is_some();
            if let Some(a) = fast.assignment() {
                let graph = (rule == ValidityRule::Orthogonality).then_some(&e8.graph);
                if a.validate(&contexts, graph).is_err() {
                    invalid += 1;
                }
            } else if rule == ValidityRule::Orthogonality {
                uncolorable += 1;
            }
        }
        agree += same as usize;
    }
    verdict(
        agree == 100 && invalid == 0,
        format!("{agree}/100 verdicts agree with brute force under both rules ({uncolorable} uncolorable); {invalid} invalid assignments"),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let e8 = E8::build(DEFAULT_THRESHOLD).expect("system builds");
    let criteria: [(&str, Check); 10] = [
        ("structure census", structure),
        ("oracle equivalence", oracle_equivalence),
        ("symmetry group", symmetry_group),
        ("incidence kernel", full_kernel),
        ("profile census", profiles),
        ("published proofs", published_proofs),
        ("family censuses", family_censuses),
        ("type 4 sampling", type4),
        ("substructures", substructures),
        ("solver soundness", solver_soundness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run(&e8);
        let status = if v.ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {name}: {status} ({}) [{:.1?}]",
            k + 1,
            v.detail,
            t.elapsed()
        );
        failed += !v.ok as usize;
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        criteria.len() - failed,
        started.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
