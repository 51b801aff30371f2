use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use e8ks::config::{OutputFormat, RunConfig};
use e8ks::families::{classify_table, select_family, FamilySelector};
use e8ks::fixtures::{self, GeneratorTexts};
use e8ks::proofsearch::{enumerate_family_proofs, ValidityRule};
use e8ks::report::{self, CensusSummary};
use e8ks::substructures::{self, kp_report};
use e8ks::{Basis, Error, E8};

#[derive(Parser)]
#[command(
    name = "e8ks",
    version,
    about = "Kochen-Specker parity proofs in the 120-ray E8 system"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Inner products below this count as orthogonal.
    #[arg(long, global = true, default_value_t = 1e-9)]
    threshold: f64,
    /// Enumerate every kernel vector up to this kernel dimension.
    #[arg(long, global = true, default_value_t = 26)]
    enumeration_cap: usize,
    /// Solver nodes allowed per colorability question.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    node_budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Kernel samples drawn when the kernel is too large to enumerate.
    #[arg(long, global = true, default_value_t = 200_000)]
    samples: u64,
    /// Directory for the basis-table cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, value_enum, default_value_t = Rule::PerBasis)]
    validity_rule: Rule,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    PerBasis,
    Orthogonality,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            threshold: self.threshold,
            enumeration_cap: self.enumeration_cap,
            node_budget: self.node_budget,
            seed: self.seed,
            samples: self.samples,
            cache_dir: self.cache_dir.clone(),
            format: match self.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
                Format::Text => OutputFormat::Text,
            },
            rule: match self.validity_rule {
                Rule::PerBasis => ValidityRule::PerBasis,
                Rule::Orthogonality => ValidityRule::Orthogonality,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rebuild the system and check its structural invariants.
    Verify {
        /// Also list the basis profiles and their sizes.
        #[arg(long)]
        profile_census: bool,
        /// Read seed_block.txt, v_cycles.txt or w_cycles.txt from here instead of the built-in copies.
        #[arg(long)]
        fixture_dir: Option<PathBuf>,
    },
    /// Census of the critical parity proofs of a family (type1..type4 or a profile such as AAEEEEHH).
    Search {
        selector: String,
        /// Write census.csv, census.json and certificates here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certificates written per symbol.
        #[arg(long, default_value_t = 3)]
        certificates: usize,
    },
    /// Certify a proof given as a table of bases (8 ids per line) or JSON; `-` reads stdin.
    Check { file: PathBuf },
    /// E7, E6 and Kernaghan-Peres style subsystems.
    Substructures {
        #[command(subcommand)]
        which: Sub,
    },
    /// Dump rays, the labelled basis table, or the Gram matrix as CSV.
    Export {
        #[arg(value_enum)]
        what: Export,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Sub {
    E7 {
        #[arg(long, default_value_t = 1)]
        anchor: u8,
    },
    E6 {
        #[arg(long, default_value_t = 1)]
        i: u8,
        #[arg(long, default_value_t = 2)]
        j: u8,
    },
    /// KP-style sets over the printed seed block; all 3003 seed choices unless --seeds is given.
    Kp {
        /// Five row indices (0-14) of the seed block, comma separated.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Rays,
    Bases,
    Gram,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    let kind = match err.downcast_ref::<Error>() {
        Some(Error::Io(e)) => Some(e.kind()),
        _ => err.downcast_ref::<io::Error>().map(io::Error::kind),
    };
    kind == Some(io::ErrorKind::BrokenPipe)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::TimeoutExceeded { .. } | Error::BudgetExceeded { .. }) => 3,
        Some(
            Error::Parse { .. }
            | Error::NotABasis { .. }
            | Error::RayOutOfRange(_)
            | Error::UnknownSelector(_)
            | Error::NonOrthogonalRequired(..)
            | Error::Json(_)
            | Error::Io(_),
        ) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<io::Error>().is_some() => 2,
        None => 1,
    }
}

/// Ok(false) means the command ran and its verdict was negative.
fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.run.config()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Verify {
            profile_census,
            fixture_dir,
        } => {
            let texts = match &fixture_dir {
                Some(dir) => GeneratorTexts::with_overrides(dir)?,
                None => GeneratorTexts::default(),
            };
            let rep = report::verify(&cfg, &texts);
            match cfg.format {
                OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?,
                OutputFormat::Csv => {
                    writeln!(out, "check,value,ok")?;
                    for c in &rep.checks {
                        writeln!(out, "{},{},{}", c.name, c.value.replace(',', ";"), c.ok)?;
                    }
                }
                OutputFormat::Text => writeln!(out, "{rep}")?,
            }
            if profile_census && rep.passed() {
                let e8 = E8::build_with(cfg.threshold, cfg.cache_dir.as_deref(), &texts)?;
                let profiles = classify_table(&e8.table);
                if cfg.format == OutputFormat::Text {
                    writeln!(out, "profiles: {}", profiles.len())?;
                }
                report::write_profile_census(&e8.table, &mut out)?;
            }
            for c in rep.failures() {
                eprintln!("failed check `{}`: {}", c.name, c.value);
            }
            Ok(rep.passed())
        }
        Command::Search {
            selector,
            out: dir,
            certificates,
        } => {
            let e8 = build(&cfg)?;
            let sel: FamilySelector = selector.parse()?;
            let family = select_family(&e8.table, &sel)?;
            let census = enumerate_family_proofs(&e8.table, &e8.graph, &family, &cfg.census())?;
            let summary = CensusSummary::from(&census);
            match cfg.format {
                OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?,
                OutputFormat::Csv => census.write_csv(&mut out)?,
                OutputFormat::Text => {
                    writeln!(
                        out,
                        "family {} ({} bases): kernel dimension {}, {} critical proofs, {}",
                        summary.family,
                        summary.family_size,
                        summary.kernel_dimension,
                        summary.critical,
                        if summary.exhaustive {
                            "exhaustive".to_string()
                        } else {
                            format!(
                                "sampled (coverage {:.3e}, seed {})",
                                summary.coverage, summary.seed
                            )
                        }
                    )?;
                    for s in &summary.symbols {
                        writeln!(out, "{:>8}  {}", s.count, s.symbol)?;
                    }
                }
            }
            if let Some(dir) = dir {
                report::write_census_outputs(
                    &dir,
                    &census,
                    &e8,
                    &family,
                    cfg.solver(),
                    certificates,
                )?;
            }
            if census.unresolved > 0 {
                eprintln!(
                    "{} candidates exceeded the solver budget",
                    census.unresolved
                );
            }
            if !census.exhaustive || census.unresolved > 0 {
                return Err(Error::BudgetExceeded {
                    dimension: census.kernel_dimension,
                    cap: cfg.enumeration_cap,
                })
                .context("partial census written, flagged non-exhaustive");
            }
            Ok(true)
        }
        Command::Check { file } => {
            let text = if file.as_os_str() == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(&file)
                    .with_context(|| format!("reading {}", file.display()))?
            };
            let e8 = build(&cfg)?;
            let bases = report::parse_proof_input(&text, &e8.graph)?;
            let cert = report::certify(&bases, &e8.graph, Some(&e8.labeled), None, cfg.solver())?;
            match cfg.format {
                OutputFormat::Json | OutputFormat::Csv => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&cert)?)?
                }
                OutputFormat::Text => {
                    if !cert.parity {
                        writeln!(
                            out,
                            "not a parity proof ({} bases, symbol {})",
                            cert.bases.len(),
                            cert.symbol
                        )?;
                    } else {
                        writeln!(out, "parity proof: {} bases", cert.bases.len())?;
                        writeln!(out, "symbol: {}", cert.symbol)?;
                        if let Some(r) = &cert.refined_symbol {
                            writeln!(out, "refined symbol: {r}")?;
                        }
                        writeln!(
                            out,
                            "critical: {}",
                            if cert.critical { "yes" } else { "no" }
                        )?;
                        if let Some(g) = cert.gap {
                            writeln!(
                                out,
                                "noncontextual bound: {} of {}",
                                g.classical_bound, g.quantum_value
                            )?;
                        }
                    }
                }
            }
            Ok(cert.parity)
        }
        Command::Substructures { which } => {
            let e8 = build(&cfg)?;
            substructure(&cfg, &e8, which, &mut out)
        }
        Command::Export { what, out: path } => {
            let e8 = build(&cfg)?;
            let mut sink: Box<dyn Write> = match path {
                Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
                None => Box::new(out),
            };
            match what {
                Export::Rays => e8.rays.write_rays_csv(&mut sink)?,
                Export::Bases => e8.labeled.write_csv(&mut sink)?,
                Export::Gram => e8.rays.write_gram_csv(&mut sink)?,
            }
            sink.flush()?;
            Ok(true)
        }
    }
}

fn build(cfg: &RunConfig) -> Result<E8> {
    Ok(E8::build_with(
        cfg.threshold,
        cfg.cache_dir.as_deref(),
        &GeneratorTexts::default(),
    )?)
}

fn substructure(cfg: &RunConfig, e8: &E8, which: Sub, out: &mut impl Write) -> Result<bool> {
    match which {
        Sub::E7 { anchor } => {
            let e7 = substructures::extract_e7(&e8.table, &e8.graph, anchor)?;
            let verdict = e8ks::proofsearch::colorable(&e7.contexts, &e8.graph, cfg.solver())?;
            let saturated = e7.is_saturated(&e8.graph);
            let summary = serde_json::json!({
                "anchor": anchor,
                "rays": e7.rays.len(),
                "contexts": e7.contexts.len(),
                "symbol": e7.symbol,
                "saturated": saturated,
                "colorable": verdict.is_colorable(),
            });
            match cfg.format {
                OutputFormat::Text => writeln!(
                    out,
                    "E7 at ray {anchor}: {} ({}saturated, {})",
                    e7.symbol,
                    if saturated { "" } else { "not " },
                    if verdict.is_colorable() {
                        "COLORABLE"
                    } else {
                        "UNCOLORABLE"
                    }
                )?,
                _ => writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?,
            }
            Ok(!verdict.is_colorable() && saturated)
        }
        Sub::E6 { i, j } => {
            let rays = substructures::extract_e6(&e8.graph, i, j)?;
            let six = substructures::count_cliques(&e8.graph, rays, 6);
            match cfg.format {
                OutputFormat::Text => writeln!(
                    out,
                    "E6 for rays {i},{j}: {} rays, {six} six-ray orthogonal sets",
                    rays.len()
                )?,
                _ => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "i": i, "j": j, "rays": rays.iter().collect::<Vec<_>>(), "sixCliques": six
                    }))?
                )?,
            }
            Ok(rays.len() == 36 && six == 0)
        }
        Sub::Kp { seeds } => {
            let block: Vec<Basis> = fixtures::seed_block()?
                .iter()
                .map(|r| Basis::new(*r))
                .collect::<e8ks::Result<_>>()?;
            let sets = match seeds {
                Some(idx) => {
                    if idx.len() != 5 || idx.iter().any(|&k| k >= 15) {
                        return Err(Error::Parse {
                            line: 0,
                            reason: "--seeds needs five row indices in 0..15".into(),
                        }
                        .into());
                    }
                    let chosen: Vec<Basis> = idx.iter().map(|&k| block[k]).collect();
                    vec![substructures::kp_set_from_seeds(&e8.table, &chosen)?]
                }
                None => substructures::build_kp_sets(&e8.table, &block)?,
            };
            let reports = sets
                .iter()
                .map(kp_report)
                .collect::<e8ks::Result<Vec<_>>>()?;
            match cfg.format {
                OutputFormat::Text => {
                    let kp = reports.iter().filter(|r| r.set.is_kp).count();
                    writeln!(
                        out,
                        "{} seed choices: {kp} KP sets, {} pseudo-KP sets",
                        reports.len(),
                        reports.len() - kp
                    )?;
                    for r in reports.iter().take(20) {
                        let seeds: Vec<String> =
                            r.set.seeds.iter().map(|b| format!("[{b}]")).collect();
                        let counts: Vec<String> = r
                            .proof_counts
                            .iter()
                            .map(|(k, v)| format!("{v}x{k}"))
                            .collect();
                        writeln!(
                            out,
                            "{} {}  {}",
                            if r.set.is_kp { "KP    " } else { "pseudo" },
                            seeds.join(" "),
                            if r.set.is_kp {
                                counts.join(" ")
                            } else {
                                r.set.pseudo_reason.clone().unwrap_or_default()
                            }
                        )?;
                    }
                }
                _ => writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?,
            }
            Ok(true)
        }
    }
}
