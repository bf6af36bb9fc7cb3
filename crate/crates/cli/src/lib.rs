//! The `pstab` command line.
//!
//! Every subcommand prints one canonical JSON record (or CSV for
//! `experiment`). Exit status 0 means success, 1 a domain error such as a
//! failed precondition, 2 malformed input or usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pstab::cosets::{catalog_presentation, todd_coxeter, GroupId, DEFAULT_MAX_COSETS};
use pstab::formats::{resolve_presentation, CosetTableRecord, FormatError, IrsFile, PresentationFile};
use pstab::hyperfinite::{decompose, Strategy};
use pstab::irs::{amplify, build_cosofic_action, irs_of_action, weakstar_dist_trunc, EmpiricalIRS};
use pstab::lab::{family_action, make_challenge, repair, run_experiment, Challenge, ExperimentSpec, RepairStrategy, DEFAULT_BUDGET};
use pstab::metrics::{d_gen_exact, d_gen_upper, d_stat_trunc, TraceProfile, DEFAULT_EXACT_LIMIT};
use pstab::{format_rational, parse_rational, to_canonical_json, FiniteAction, Rational, Word};

pub const DEFAULT_RADIUS: usize = 3;
pub const DEFAULT_RESTARTS: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Malformed(_) => 2,
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn malformed<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Malformed(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "pstab", version, about = "Permutation stability laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summed relator defect of an action.
    Defect {
        #[arg(long)]
        action: PathBuf,
        /// Relator words, comma or space separated; repeatable.
        #[arg(long, required = true, num_args = 1..)]
        relators: Vec<String>,
    },
    /// Generator-metric distance between two actions.
    Dgen(DgenArgs),
    /// Truncated statistical distance between two actions.
    Dstat {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
    },
    /// Todd-Coxeter enumeration of a subgroup's cosets.
    Cosets(CosetArgs),
    /// Invariant random subgroups.
    Irs {
        #[command(subcommand)]
        command: IrsCommand,
    },
    /// Finite action approximating an IRS (same as `irs build`).
    Build(BuildArgs),
    /// Pads copies of an action up to a target size.
    Amplify {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        target: usize,
    },
    /// Removes few points so every Schreier component is small.
    Hyperfinite {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value = "bfs-tiling")]
        strategy: String,
    },
    /// Perturbs a genuine action of a catalog group.
    Challenge {
        #[arg(long)]
        group: String,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        swaps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Searches for an exact solution near a challenge.
    Repair {
        #[arg(long)]
        challenge: PathBuf,
        #[arg(long, default_value = "descent")]
        strategy: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Runs a grid of challenges and repairs, writing CSV.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct DgenArgs {
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    #[arg(long)]
    heuristic: bool,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest size the exact search accepts.
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    limit: usize,
    /// Also print the bijection.
    #[arg(long)]
    witness: bool,
}

#[derive(Args, Debug)]
struct CosetArgs {
    #[arg(long, conflicts_with = "group")]
    presentation: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    /// Subgroup generators, comma or space separated; repeatable.
    #[arg(long, num_args = 0..)]
    subgroup: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
    max_cosets: usize,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    irs: PathBuf,
    #[arg(long, default_value_t = 1)]
    precision: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
    max_cosets: usize,
}

#[derive(Subcommand, Debug)]
enum IrsCommand {
    /// Trace profile of an action.
    OfAction {
        #[arg(value_name = "ACTION", required_unless_present = "action")]
        path: Option<PathBuf>,
        #[arg(long)]
        action: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
    },
    /// Finite action approximating an IRS file.
    Build(BuildArgs),
    /// Truncated distance between two IRSs, profiles or actions.
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
        max_cosets: usize,
    },
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

/// Accepts a bare action record or any object with an `action` field.
fn read_action(path: &Path) -> Result<FiniteAction, CliError> {
    let mut v = read_json(path)?;
    if let Some(inner) = v.get_mut("action") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn split_words(raw: &[String]) -> Vec<&str> {
    raw.iter()
        .flat_map(|s| s.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_standard_words(raw: &[String]) -> Result<Vec<Word>, CliError> {
    split_words(raw)
        .into_iter()
        .map(|w| w.parse::<Word>().map_err(malformed))
        .collect()
}

fn parse_epsilon(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(malformed)
}

fn load_presentation_file(path: &Path) -> Result<PresentationFile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Reference {
        reference: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn format_err(e: FormatError) -> CliError {
    match e {
        FormatError::Json(_) | FormatError::Presentation(_) | FormatError::Reference { .. } => malformed(e),
        FormatError::Coset(pstab::CosetError::Word(_)) => malformed(e),
        FormatError::Coset(_) | FormatError::Irs(_) => domain(e),
    }
}

fn read_irs(path: &Path, max_cosets: usize) -> Result<pstab::AtomicIRS, CliError> {
    let file: IrsFile = serde_json::from_value(read_json(path)?).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    file.resolve(|r| load_presentation_file(&base.join(r)), max_cosets)
        .map_err(format_err)
}

enum ShadowSource {
    Atomic(pstab::AtomicIRS),
    Profile(TraceProfile),
}

fn read_shadow(path: &Path, radius: usize, max_cosets: usize) -> Result<ShadowSource, CliError> {
    let v = read_json(path)?;
    let bad = |e: serde_json::Error| malformed(format!("{}: {e}", path.display()));
    if v.get("classes").is_some() {
        return Ok(ShadowSource::Atomic(read_irs(path, max_cosets)?));
    }
    if v.get("profile").is_some() {
        let e: EmpiricalIRS = serde_json::from_value(v).map_err(bad)?;
        return Ok(ShadowSource::Profile(e.profile));
    }
    let x = read_action(path)?;
    Ok(ShadowSource::Profile(irs_of_action(&x, radius).map_err(domain)?.profile))
}

fn emit<W: Write + ?Sized>(out: &mut W, v: &impl serde::Serialize) -> Result<(), CliError> {
    let s = to_canonical_json(v).map_err(domain)?;
    writeln!(out, "{s}").map_err(domain)
}

fn build(args: &BuildArgs) -> Result<Value, CliError> {
    let mu = read_irs(&args.irs, args.max_cosets)?;
    let built = build_cosofic_action(&mu, args.precision).map_err(domain)?;
    Ok(json!({
        "action": serde_json::to_value(&built.action).map_err(domain)?,
        "copies": built.copies,
    }))
}

fn run<W: Write + ?Sized>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Defect { action, relators } => {
            let x = read_action(&action)?;
            let words = parse_standard_words(&relators)?;
            for w in &words {
                x.check_word(w).map_err(domain)?;
            }
            emit(out, &json!({ "defect": format_rational(&x.defect(&words)) }))
        }
        Command::Dgen(args) => {
            if !args.exact && !args.heuristic {
                return Err(malformed("dgen needs --exact or --heuristic"));
            }
            let (x, y) = (read_action(&args.a)?, read_action(&args.b)?);
            let m = if args.exact {
                d_gen_exact(&x, &y, args.limit)
            } else {
                d_gen_upper(&x, &y, args.restarts, args.seed)
            }
            .map_err(domain)?;
            let mut v = json!({ "dgen": format_rational(&m.value) });
            if args.witness {
                v["witness"] = json!(m.witness.images());
            }
            emit(out, &v)
        }
        Command::Dstat { a, b, radius } => {
            let (x, y) = (read_action(&a)?, read_action(&b)?);
            let d = d_stat_trunc(&x, &y, radius).map_err(domain)?;
            emit(out, &json!({ "dstat": format_rational(&d) }))
        }
        Command::Cosets(args) => {
            let p = match (&args.presentation, &args.group) {
                (Some(path), None) => resolve_presentation(&path.to_string_lossy(), |r| load_presentation_file(Path::new(r)))
                    .map_err(format_err)?,
                (None, Some(g)) => {
                    let id: GroupId = g.parse().map_err(malformed)?;
                    catalog_presentation(id).map_err(domain)?
                }
                _ => return Err(malformed("cosets needs --presentation or --group")),
            };
            let gens = split_words(&args.subgroup)
                .into_iter()
                .map(|w| p.parse_word(w).map_err(malformed))
                .collect::<Result<Vec<_>, _>>()?;
            let t = todd_coxeter(&p, &gens, args.max_cosets).map_err(domain)?;
            emit(out, &CosetTableRecord::new(&t))
        }
        Command::Irs { command } => match command {
            IrsCommand::OfAction { path, action, radius } => {
                let path = action.or(path).ok_or_else(|| malformed("missing action file"))?;
                let x = read_action(&path)?;
                emit(out, &irs_of_action(&x, radius).map_err(domain)?)
            }
            IrsCommand::Build(args) => emit(out, &build(&args)?),
            IrsCommand::Dist { a, b, radius, max_cosets } => {
                let (sa, sb) = (read_shadow(&a, radius, max_cosets)?, read_shadow(&b, radius, max_cosets)?);
                let d = match (&sa, &sb) {
                    (ShadowSource::Atomic(p), ShadowSource::Atomic(q)) => weakstar_dist_trunc(p, q, radius),
                    (ShadowSource::Atomic(p), ShadowSource::Profile(q)) => weakstar_dist_trunc(p, q, radius),
                    (ShadowSource::Profile(p), ShadowSource::Atomic(q)) => weakstar_dist_trunc(p, q, radius),
                    (ShadowSource::Profile(p), ShadowSource::Profile(q)) => weakstar_dist_trunc(p, q, radius),
                }
                .map_err(domain)?;
                emit(out, &json!({ "distance": format_rational(&d) }))
            }
        },
        Command::Build(args) => emit(out, &build(&args)?),
        Command::Amplify { action, target } => {
            let x = read_action(&action)?;
            emit(out, &amplify(&x, target).map_err(domain)?)
        }
        Command::Hyperfinite { action, epsilon, strategy } => {
            let x = read_action(&action)?;
            let eps = parse_epsilon(&epsilon)?;
            let strategy: Strategy = strategy.parse().map_err(malformed)?;
            emit(out, &decompose(&x, eps, strategy).map_err(domain)?)
        }
        Command::Challenge { group, size, swaps, seed, out: path } => {
            let id: GroupId = group.parse().map_err(malformed)?;
            let relators = catalog_presentation(id).map_err(domain)?.relators().to_vec();
            let planted = family_action(&id, size, seed).map_err(domain)?;
            let c = make_challenge(&planted, relators, swaps, seed).map_err(domain)?;
            match path {
                Some(p) => {
                    let text = to_canonical_json(&c).map_err(domain)?;
                    fs::write(&p, text + "\n").map_err(|e| malformed(format!("cannot write {}: {e}", p.display())))?;
                    emit(out, &json!({ "defect": format_rational(&c.defect()), "n": c.action.n() }))
                }
                None => emit(out, &c),
            }
        }
        Command::Repair { challenge, strategy, budget } => {
            let c: Challenge = serde_json::from_value(read_json(&challenge)?)
                .map_err(|e| malformed(format!("{}: {e}", challenge.display())))?;
            let strategy: RepairStrategy = strategy.parse().map_err(malformed)?;
            emit(out, &repair(&c, strategy, budget).map_err(domain)?)
        }
        Command::Experiment { spec, out: path } => {
            let s: ExperimentSpec = serde_json::from_value(read_json(&spec)?)
                .map_err(|e| malformed(format!("{}: {e}", spec.display())))?;
            if s.group.parse::<GroupId>().is_err() {
                return Err(malformed(format!("unknown group {:?}", s.group)));
            }
            let rows = run_experiment(&s).map_err(domain)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(domain)?;
            }
            let bytes = w.into_inner().map_err(domain)?;
            match path {
                Some(p) => {
                    fs::write(&p, bytes).map_err(|e| malformed(format!("cannot write {}: {e}", p.display())))?;
                    emit(out, &json!({ "rows": rows.len() }))
                }
                None => out.write_all(&bytes).map_err(domain),
            }
        }
    }
}

/// Parses `argv` (including the program name), runs it, and returns the
/// exit status.
pub fn dispatch<I, T, W, E>(argv: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write + ?Sized,
    E: Write + ?Sized,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
