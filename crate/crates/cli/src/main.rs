//! `lefschetz`: doubling calculus and positive-factorization tools for
//! Lefschetz pencils.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 cap exhaustion with a partial result.

mod files;
mod reports;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use files::{FactorizationFile, FamilyFile, Nat, PencilSpecFile};
use lefschetz_core::search::{
    family_final_data, search_matching, three_step_family, verify_family,
};
use lefschetz_core::{
    calculus::closed_forms, equiv, invariants, ConjugationPolicy, DoublingSequence,
    ExceptionalData, Factorization, HomologyClass, Mode, MoveDirection, PencilState, Verdict,
};
use num_bigint::{BigInt, BigUint};
use reports::{
    emit, ApplyReport, ClosedForms, EquivReport, FamilyReport, FingerprintReport,
    OrbitCommandReport, ProductReport, RunContext, SearchParams, SearchReport, ValueReport,
    VerificationReport, VerifyReport,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_OK: u8 = 0;
const EXIT_VERIFICATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lefschetz",
    version,
    about = "Doubling calculus and positive Dehn-twist factorization tools for Lefschetz pencils",
    propagate_version = true
)]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Strict validity regime (default): per-step doubling hypotheses and
    /// stabilizer requirements are enforced, unknown JSON fields rejected.
    #[arg(long, global = true, conflicts_with = "no_strict")]
    strict: bool,
    /// Relax the strict regime: only syntactic sequence constraints are
    /// checked, partial conjugations skip the stabilizer requirement, and
    /// unknown JSON fields are ignored.
    #[arg(long, global = true)]
    no_strict: bool,
    /// Recorded in JSON reports for provenance; every command is
    /// deterministic, so equal seeds and inputs give byte-identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Upper bound on worker parallelism. The current implementation
    /// evaluates everything on one thread; the flag is validated and
    /// recorded only.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn strict(&self) -> bool {
        !self.no_strict
    }

    fn mode(&self) -> Mode {
        if self.strict() {
            Mode::Strict
        } else {
            Mode::Syntactic
        }
    }

    fn context(&self) -> RunContext {
        RunContext {
            seed: self.seed,
            strict: self.strict(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// The doubling calculus: apply sequences, the explicit family, search,
    /// and verification.
    #[command(subcommand)]
    Pencil(PencilCommand),
    /// Positive Dehn-twist words over the homological representation.
    #[command(subcommand)]
    Mcg(McgCommand),
    /// Bounded breadth-first closure of a word under Hurwitz moves and
    /// optional untwisted partial conjugations.
    Orbit {
        factorization: PathBuf,
        /// Maximum number of move layers to explore.
        #[arg(long)]
        depth: usize,
        /// Maximum number of words to visit.
        #[arg(long)]
        size: usize,
        /// JSON file with an array of conjugator class vectors.
        #[arg(long)]
        conjugators: Option<PathBuf>,
    },
    /// Bounded equivalence test between two words: yes / no / unknown.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        conjugators: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PencilCommand {
    /// Run a doubling sequence on a pencil and cross-check the closed forms.
    Apply {
        pencil: PathBuf,
        /// Comma-separated doubling sizes, e.g. "9,13,8" ("[]" is the empty
        /// sequence).
        sequence: String,
    },
    /// The three-step family D(n) = [m0-n, m0+3n, m0-2n] and its final data.
    Family {
        #[arg(long, value_parser = parse_nat)]
        m0: BigUint,
        #[arg(long, value_parser = parse_nat)]
        n: BigUint,
        /// Start genus; when given, the run is cross-checked by simulation.
        #[arg(long, value_parser = parse_nat)]
        g0: Option<BigUint>,
    },
    /// Search for doubling sequences with equal invariants but distinct
    /// exceptional data.
    Search {
        #[arg(long, value_parser = parse_nat)]
        g0: BigUint,
        #[arg(long, value_parser = parse_nat)]
        m0: BigUint,
        /// Number of sequences requested.
        #[arg(long)]
        count: usize,
        /// Maximum sequence length.
        #[arg(long = "max-d")]
        max_d: usize,
        /// Largest doubling size tried per step [default: 4*m0].
        #[arg(long = "k-bound", value_parser = parse_nat)]
        k_bound: Option<BigUint>,
    },
    /// Re-derive every claim of a family file by stepwise simulation.
    Verify { family: PathBuf },
}

#[derive(Subcommand)]
enum McgCommand {
    /// Product of the letter transvections, in word order.
    Product { factorization: PathBuf },
    /// Euler characteristic of the total space.
    Euler {
        factorization: PathBuf,
        /// Pencil mode: subtract the base points recorded as boundary
        /// components.
        #[arg(long)]
        pencil: bool,
    },
    /// Signature via the Meyer cocycle.
    Signature {
        factorization: PathBuf,
        /// Pencil mode: add the base points recorded as boundary components.
        #[arg(long)]
        pencil: bool,
    },
    /// Elementary Hurwitz move on the adjacent pair at --index.
    Hurwitz {
        factorization: PathBuf,
        /// 1-based position of the left letter of the pair.
        #[arg(long)]
        index: usize,
        #[arg(long)]
        dir: Direction,
    },
    /// Partial conjugation of a contiguous subword by a power of the twist
    /// along --alpha.
    Conjugate {
        factorization: PathBuf,
        /// Inclusive 1-based letter range, e.g. "1..12".
        #[arg(long)]
        range: String,
        /// Comma-separated class vector of length 2g.
        #[arg(long)]
        alpha: String,
        /// Conjugation power (nonzero).
        #[arg(long, default_value = "1", value_parser = parse_int, allow_hyphen_values = true)]
        q: BigInt,
        /// Accept a subword that reverses alpha (twisted conjugation).
        #[arg(long)]
        allow_twisted: bool,
    },
    /// Rank, letter classes up to sign, and capped orbit of the classes
    /// under the generated subgroup.
    Fingerprint {
        factorization: PathBuf,
        #[arg(long)]
        cap: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Left,
    Right,
}

fn parse_nat(s: &str) -> Result<BigUint, String> {
    BigUint::from_str(s).map_err(|_| format!("{s:?} is not a non-negative integer"))
}

fn parse_int(s: &str) -> Result<BigInt, String> {
    BigInt::from_str(s).map_err(|_| format!("{s:?} is not an integer"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Pencil(cmd) => run_pencil(cli, cmd),
        Command::Mcg(cmd) => run_mcg(cli, cmd),
        Command::Orbit {
            factorization,
            depth,
            size,
            conjugators,
        } => run_orbit(cli, factorization, *depth, *size, conjugators.as_deref()),
        Command::Equiv {
            first,
            second,
            depth,
            size,
            conjugators,
        } => run_equiv(cli, first, second, *depth, *size, conjugators.as_deref()),
    }
}

fn run_pencil(cli: &Cli, cmd: &PencilCommand) -> Result<u8> {
    match cmd {
        PencilCommand::Apply { pencil, sequence } => {
            let (start, label) = files::load_pencil(pencil, cli.strict())?;
            let seq = DoublingSequence::from_str(sequence).map_err(|e| anyhow!(e))?;
            let outcome = start.apply_sequence(&seq, cli.mode())?;
            let (blowups, genus) = closed_forms(start.genus(), &start.base_points(), &seq)?;
            let cross_check =
                outcome.blowup_count == blowups && *outcome.final_state.genus() == genus;
            let report = ApplyReport {
                command: "pencil apply",
                context: cli.context(),
                start: PencilSpecFile::from_state(&start, label),
                sequence: seq.steps().iter().cloned().map(Nat).collect(),
                trace: outcome
                    .trace
                    .iter()
                    .map(|s| PencilSpecFile::from_state(s, None))
                    .collect(),
                final_state: PencilSpecFile::from_state(&outcome.final_state, None),
                blowup_count: Nat(outcome.blowup_count.clone()),
                closed_forms: ClosedForms {
                    blowups: Nat(blowups),
                    genus: Nat(genus),
                },
                cross_check: if cross_check { "pass" } else { "fail" },
            };
            if cli.json {
                emit(&report);
            } else {
                println!("start: {start}");
                println!("sequence: {seq}");
                for (i, state) in outcome.trace.iter().enumerate().skip(1) {
                    let step = i.div_ceil(2);
                    let what = if i % 2 == 1 { "blow-up" } else { "double" };
                    println!("  step {step} {what}: {state}");
                }
                println!("final: {}", outcome.final_state);
                println!("blow-ups to the fibration: {}", outcome.blowup_count);
                println!(
                    "closed-form cross-check ({}, {}): {}",
                    report.closed_forms.blowups.0, report.closed_forms.genus.0, report.cross_check
                );
            }
            Ok(if cross_check {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            })
        }
        PencilCommand::Family { m0, n, g0 } => {
            let seq = three_step_family(m0, n)?;
            let data = family_final_data(m0, n)?;
            let blowups = m0 + seq.sum() * 3u32;
            let mut report = FamilyReport {
                command: "pencil family",
                context: cli.context(),
                m0: Nat(m0.clone()),
                n: Nat(n.clone()),
                sequence: seq.steps().iter().cloned().map(Nat).collect(),
                final_data: data.entries().iter().cloned().map(Nat).collect(),
                blowups: Nat(blowups.clone()),
                start_genus: None,
                genus: None,
                simulation_check: None,
            };
            let mut check_failed = false;
            if let Some(g0) = g0 {
                let start = PencilState::new(g0.clone(), ExceptionalData::new(vec![m0.clone()]));
                let outcome = start.apply_sequence(&seq, cli.mode())?;
                let matches =
                    *outcome.final_state.data() == data && outcome.blowup_count == blowups;
                report.start_genus = Some(Nat(g0.clone()));
                report.genus = Some(Nat(outcome.final_state.genus().clone()));
                report.simulation_check = Some(if matches { "pass" } else { "fail" });
                check_failed = !matches;
            }
            if cli.json {
                emit(&report);
            } else {
                println!("D({}) = {seq}", report.n.0);
                println!("final exceptional data: {data}");
                println!("blow-ups to the fibration: {}", report.blowups.0);
                if let (Some(genus), Some(check)) = (&report.genus, report.simulation_check) {
                    println!("final genus: {}", genus.0);
                    println!("simulation cross-check: {check}");
                }
            }
            Ok(if check_failed {
                EXIT_VERIFICATION
            } else {
                EXIT_OK
            })
        }
        PencilCommand::Search {
            g0,
            m0,
            count,
            max_d,
            k_bound,
        } => {
            let k_bound = k_bound.clone().unwrap_or_else(|| m0 * 4u32);
            let outcome = search_matching(g0, m0, *count, *max_d, &k_bound)?;
            let verification = verify_family(&outcome.family);
            let report = SearchReport {
                command: "pencil search",
                context: cli.context(),
                params: SearchParams {
                    g0: Nat(g0.clone()),
                    m0: Nat(m0.clone()),
                    count: *count,
                    max_d: *max_d,
                    k_bound: Nat(k_bound),
                },
                family: FamilyFile::from_family(&outcome.family),
                found: outcome.family.sequences.len(),
                complete: outcome.complete,
                verification: VerificationReport::from_verification(&verification),
            };
            if cli.json {
                emit(&report);
            } else {
                println!(
                    "start: genus {} with {} base points",
                    report.params.g0.0, report.params.m0.0
                );
                println!(
                    "shared invariants: {} blow-ups, genus {}",
                    outcome.family.shared_blowups, outcome.family.shared_genus
                );
                for (seq, data) in outcome
                    .family
                    .sequences
                    .iter()
                    .zip(&outcome.family.datasets)
                {
                    println!("  {seq} -> {data}");
                }
                println!(
                    "found {} of {} requested ({})",
                    report.found,
                    count,
                    if outcome.complete {
                        "complete"
                    } else {
                        "bounds exhausted"
                    }
                );
                print!("{verification}");
            }
            if !verification.passed() {
                Ok(EXIT_VERIFICATION)
            } else if outcome.complete {
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_PARTIAL)
            }
        }
        PencilCommand::Verify { family } => {
            let family = files::load_family(family, cli.strict())?;
            let verification = verify_family(&family);
            let report = VerifyReport {
                command: "pencil verify",
                context: cli.context(),
                verification: VerificationReport::from_verification(&verification),
            };
            if cli.json {
                emit(&report);
            } else {
                print!("{verification}");
            }
            Ok(if verification.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            })
        }
    }
}

fn run_mcg(cli: &Cli, cmd: &McgCommand) -> Result<u8> {
    match cmd {
        McgCommand::Product { factorization } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let product = word.word_product();
            let report = ProductReport {
                command: "mcg product",
                context: cli.context(),
                genus: word.genus(),
                boundary_count: word.boundary_count(),
                matrix: ProductReport::matrix_rows(&product),
                is_identity: product.is_identity(),
            };
            if cli.json {
                emit(&report);
            } else {
                print!("{product}");
                println!("is identity: {}", report.is_identity);
            }
            Ok(EXIT_OK)
        }
        McgCommand::Euler {
            factorization,
            pencil,
        } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let value = invariants::euler_characteristic(&word, *pencil);
            let report = ValueReport {
                command: "mcg euler",
                context: cli.context(),
                mode: if *pencil { "pencil" } else { "fibration" },
                value,
                boundary_relation_holds: None,
            };
            if cli.json {
                emit(&report);
            } else {
                println!("euler characteristic ({}): {value}", report.mode);
            }
            Ok(EXIT_OK)
        }
        McgCommand::Signature {
            factorization,
            pencil,
        } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let outcome = invariants::signature(&word, *pencil);
            let report = ValueReport {
                command: "mcg signature",
                context: cli.context(),
                mode: if *pencil { "pencil" } else { "fibration" },
                value: outcome.value,
                boundary_relation_holds: Some(outcome.boundary_relation_holds),
            };
            if cli.json {
                emit(&report);
            } else {
                println!("signature ({}): {}", report.mode, outcome.value);
                if !outcome.boundary_relation_holds {
                    println!(
                        "warning: word product is not the identity; the Meyer sum assumes a fibration word"
                    );
                }
            }
            Ok(EXIT_OK)
        }
        McgCommand::Hurwitz {
            factorization,
            index,
            dir,
        } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let zero_based = index
                .checked_sub(1)
                .filter(|_| *index >= 1)
                .ok_or_else(|| anyhow!("--index counts letters from 1"))?;
            let direction = match dir {
                Direction::Left => MoveDirection::Left,
                Direction::Right => MoveDirection::Right,
            };
            let moved = word.hurwitz_move(zero_based, direction)?;
            emit_factorization(cli, &moved);
            Ok(EXIT_OK)
        }
        McgCommand::Conjugate {
            factorization,
            range,
            alpha,
            q,
            allow_twisted,
        } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let range = parse_range(range, word.len())?;
            let alpha = parse_class(alpha, word.genus())?;
            let policy = if !cli.strict() {
                ConjugationPolicy::Unchecked
            } else if *allow_twisted {
                ConjugationPolicy::AllowTwisted
            } else {
                ConjugationPolicy::Untwisted
            };
            let conjugated = word.partial_conjugate(range, &alpha, q, policy)?;
            emit_factorization(cli, &conjugated);
            Ok(EXIT_OK)
        }
        McgCommand::Fingerprint { factorization, cap } => {
            let word = files::load_factorization(factorization, cli.strict())?;
            let fp = word.monodromy_fingerprint(*cap)?;
            let report = FingerprintReport::new("mcg fingerprint", cli.context(), &fp);
            if cli.json {
                emit(&report);
            } else {
                println!("span rank: {}", fp.span_rank);
                for (class, multiplicity) in &fp.classes_up_to_sign {
                    println!("  {class} x{multiplicity}");
                }
                println!(
                    "orbit size: {}{}",
                    fp.orbit_size,
                    if fp.orbit_truncated {
                        " (truncated)"
                    } else {
                        ""
                    }
                );
            }
            Ok(EXIT_OK)
        }
    }
}

fn emit_factorization(cli: &Cli, word: &Factorization) {
    let file = FactorizationFile::from_factorization(word);
    if cli.json {
        emit(&file);
    } else {
        println!("{word}");
        for (i, letter) in word.letters().iter().enumerate() {
            let name = letter
                .label()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default();
            println!("  {}: {}{}", i + 1, letter.class(), name);
        }
    }
}

fn run_orbit(
    cli: &Cli,
    factorization: &Path,
    depth: usize,
    size: usize,
    conjugators: Option<&std::path::Path>,
) -> Result<u8> {
    let word = files::load_factorization(factorization, cli.strict())?;
    let conjugator_classes = conjugators
        .map(|path| files::load_conjugators(path, word.genus()))
        .transpose()?;
    let report = equiv::hurwitz_orbit(&word, depth, size, conjugator_classes.as_deref())?;
    let command_report = OrbitCommandReport::new(cli.context(), depth, size, &report);
    if cli.json {
        emit(&command_report);
    } else {
        println!("move set: {}", report.move_set);
        println!(
            "visited {} words{}",
            report.visited,
            if report.truncated { " (truncated)" } else { "" }
        );
        if let Some(representative) = report.canonical_representative() {
            println!("canonical representative:");
            for letter in representative.letters() {
                println!("  {}", letter.class());
            }
        }
    }
    Ok(if report.truncated {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    })
}

fn run_equiv(
    cli: &Cli,
    first: &Path,
    second: &Path,
    depth: usize,
    size: usize,
    conjugators: Option<&std::path::Path>,
) -> Result<u8> {
    let f1 = files::load_factorization(first, cli.strict())?;
    let f2 = files::load_factorization(second, cli.strict())?;
    let conjugator_classes = conjugators
        .map(|path| files::load_conjugators(path, f1.genus()))
        .transpose()?;
    let report = equiv::equivalent(&f1, &f2, depth, size, conjugator_classes.as_deref())?;
    let command_report = EquivReport {
        command: "equiv",
        context: cli.context(),
        verdict: report.verdict.to_string(),
        reason: report.reason.clone(),
        caveat: report.caveat.clone(),
    };
    if cli.json {
        emit(&command_report);
    } else {
        println!("verdict: {}", report.verdict);
        println!("reason: {}", report.reason);
        if let Some(caveat) = &report.caveat {
            println!("caveat: {caveat}");
        }
    }
    Ok(match report.verdict {
        Verdict::Yes | Verdict::No => EXIT_OK,
        Verdict::Unknown => EXIT_PARTIAL,
    })
}

/// Parses an inclusive 1-based letter range "a..b" into a 0-based half-open
/// range.
fn parse_range(s: &str, len: usize) -> Result<std::ops::Range<usize>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("range must look like \"a..b\" (inclusive, counting from 1)"))?;
    let a: usize = a.trim().parse().context("range start")?;
    let b: usize = b.trim().parse().context("range end")?;
    if a < 1 || b < a {
        bail!("range must satisfy 1 <= a <= b");
    }
    if b > len {
        bail!("range end {b} exceeds the word length {len}");
    }
    Ok(a - 1..b)
}

fn parse_class(s: &str, genus: usize) -> Result<HomologyClass> {
    let coords: Vec<BigInt> = s
        .split(',')
        .map(|t| parse_int(t.trim()).map_err(|e| anyhow!(e)))
        .collect::<Result<_>>()?;
    if coords.len() != 2 * genus {
        bail!(
            "class vector has {} coordinates, expected {} for genus {}",
            coords.len(),
            2 * genus,
            genus
        );
    }
    HomologyClass::new(coords).map_err(|e| anyhow!(e.to_string()))
}
