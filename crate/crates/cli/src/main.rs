//! Command-line front end: parsing, checking, constructing, Petri-net
//! analysis, gadget generation and cross-validation, with stable exit codes.
//!
//! Exit codes: 0 = holds / success, 1 = fails / disagreement, 2 = unknown or
//! budget exhausted, 3 = input or usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use detkit::constructions;
use detkit::detect;
use detkit::observer;
use detkit::petri;
use detkit::{parse_lsts, serialize_lsts, Lsts, Outcome, RandomLimits, Verdict};

#[derive(Parser)]
#[command(name = "detkit", version, about = "Detectability analysis for labeled transition systems and Petri nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a detectability property of an automaton document.
    Check(CheckArgs),
    /// Write a derived automaton.
    Construct(ConstructArgs),
    /// Petri-net analyses and constructions.
    Petri(PetriArgs),
    /// Generate a reduction gadget.
    Gen(GenArgs),
    /// Cross-validate the polynomial checkers against the observer oracle.
    Crosscheck(CrosscheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FaProperty {
    Determinism,
    Isd,
    Sd,
    Esd,
    Wd,
    Wad,
}

#[derive(Args)]
struct CheckArgs {
    /// Automaton document.
    model: PathBuf,
    #[arg(long, value_enum)]
    property: FaProperty,
    /// Partition document (required for wad).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Include the witness in the report.
    #[arg(long)]
    witness: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Suppress the timing line, making the report byte-deterministic.
    #[arg(long)]
    no_timing: bool,
    /// Observer node budget for the wd/wad/determinism checks.
    #[arg(long, default_value_t = 1_000_000)]
    max_observer_nodes: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructWhat {
    Obs,
    Bifur,
    Cc,
    Detector,
    Quotient,
}

#[derive(Args)]
struct ConstructArgs {
    model: PathBuf,
    #[arg(long, value_enum)]
    what: ConstructWhat,
    /// Partition document (required for quotient).
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PetriAction {
    Unfold,
    Compose,
    ComposeExtended,
    Check,
    EmitYen,
    Bifurcation,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetProperty {
    Isd,
    Esd,
    Prompt,
    OmegaNonempty,
}

#[derive(Clone, Copy, ValueEnum)]
enum YenFormula {
    Isd,
    EsdItem1,
    EsdItem2,
}

#[derive(Args)]
struct PetriArgs {
    /// Net document.
    net: PathBuf,
    #[arg(value_enum)]
    action: PetriAction,
    #[arg(long, value_enum)]
    property: Option<NetProperty>,
    #[arg(long, value_enum)]
    formula: Option<YenFormula>,
    /// Firing sequence for the bifurcation action, space-separated.
    #[arg(long)]
    sequence: Option<String>,
    /// Start marking for the bifurcation action, e.g. "p1=1 p2=0";
    /// defaults to the initial marking.
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    max_markings: usize,
    #[arg(long, default_value_t = 14)]
    max_depth: usize,
    #[arg(long)]
    witness: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetKind {
    Coverability,
    Langeq,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GadgetKind,
    /// Base net (coverability) or first net (langeq).
    first: PathBuf,
    /// Target marking document (coverability) or second net (langeq).
    second: PathBuf,
    /// Number of partition cells for langeq.
    #[arg(long, default_value_t = 2)]
    cells: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the realized partition of the unfolded gadget here (langeq).
    #[arg(long)]
    partition_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    max_markings: usize,
}

#[derive(Args)]
struct CrosscheckArgs {
    /// One automaton document; omit to sweep seeds.
    model: Option<PathBuf>,
    /// Seed range, e.g. `1..1000`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, default_value_t = 6)]
    max_states: usize,
    #[arg(long, default_value_t = 6)]
    max_events: usize,
    #[arg(long, default_value_t = 3)]
    max_labels: usize,
    #[arg(long)]
    no_timing: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Failure {
        Failure {
            code: 3,
            message: msg.into(),
        }
    }

    fn budget(msg: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_lsts(path: &Path) -> Result<Lsts, Failure> {
    parse_lsts(&read_file(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<petri::LabeledPetriNet, Failure> {
    petri::parse_net(&read_file(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_partition(path: &Path) -> Result<detect::Partition, Failure> {
    detect::parse_partition(&read_file(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_exit(v: &Verdict) -> u8 {
    match v.outcome {
        Outcome::Holds => 0,
        Outcome::Fails => 1,
        Outcome::Unknown => 2,
    }
}

fn report(v: &Verdict, witness: bool, no_timing: bool, started: Instant) -> String {
    let mut text = detkit::verdict::render_report(v, witness);
    if !no_timing {
        let _ = writeln!(text, "timing_ms: {}", started.elapsed().as_millis());
    }
    text
}

fn run_check(args: &CheckArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let m = load_lsts(&args.model)?;
    let limits = observer::ObserverLimits {
        max_nodes: args.max_observer_nodes,
    };
    let verdict = match args.property {
        FaProperty::Determinism => detect::check_determinism_with(&m, &limits),
        FaProperty::Isd => detect::check_isd(&m),
        FaProperty::Sd => detect::check_sd(&m),
        FaProperty::Esd => detect::check_esd(&m),
        FaProperty::Wd => detect::check_wd_with(&m, &limits),
        FaProperty::Wad => {
            let path = args
                .partition
                .as_ref()
                .ok_or_else(|| Failure::input("--property wad needs --partition"))?;
            let partition = load_partition(path)?;
            detect::check_wad_with(&m, &partition, &limits)
                .map_err(|e| Failure::input(e.to_string()))?
        }
    };
    let text = report(&verdict, args.witness, args.no_timing, started);
    emit(args.output.as_deref(), &text)?;
    Ok(verdict_exit(&verdict))
}

fn run_construct(args: &ConstructArgs) -> Result<u8, Failure> {
    let m = load_lsts(&args.model)?;
    let doc = match args.what {
        ConstructWhat::Obs => serialize_lsts(&constructions::observation_automaton(&m)),
        ConstructWhat::Bifur => {
            serialize_lsts(constructions::bifurcation_automaton(&m).as_lsts())
        }
        ConstructWhat::Cc => {
            serialize_lsts(constructions::concurrent_composition(&m).accessible().as_lsts())
        }
        ConstructWhat::Detector => {
            let d = detect::detector(&m).map_err(|e| Failure::input(e.to_string()))?;
            serialize_lsts(&d)
        }
        ConstructWhat::Quotient => {
            let path = args
                .partition
                .as_ref()
                .ok_or_else(|| Failure::input("--what quotient needs --partition"))?;
            let partition = load_partition(path)?;
            let q = detect::quotient_automaton(&m, &partition)
                .map_err(|e| Failure::input(e.to_string()))?;
            serialize_lsts(&q)
        }
    };
    emit(args.output.as_deref(), &doc)?;
    Ok(0)
}

fn parse_marking_arg(
    net: &petri::LabeledPetriNet,
    text: &str,
) -> Result<petri::Marking, Failure> {
    let mut pairs = Vec::new();
    for part in text.split_whitespace() {
        let (p, n) = part
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("expected <place>=<count>, got {part:?}")))?;
        let c: u64 = n
            .parse()
            .map_err(|_| Failure::input(format!("bad token count {n:?}")))?;
        pairs.push((p, c));
    }
    net.marking(pairs)
        .map_err(|e| Failure::input(e.to_string()))
}

fn run_petri(args: &PetriArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let net = load_net(&args.net)?;
    let budget = petri::SearchBudget {
        max_markings: args.max_markings,
        max_depth: args.max_depth,
    };
    match args.action {
        PetriAction::Unfold => match petri::reachability_lsts(&net, &budget) {
            Ok(lsts) => {
                emit(args.output.as_deref(), &serialize_lsts(&lsts))?;
                Ok(0)
            }
            Err(e @ petri::PetriError::BoundExceeded { .. }) => Err(Failure::budget(e.to_string())),
            Err(e) => Err(Failure::input(e.to_string())),
        },
        PetriAction::Compose => {
            let doc = petri::serialize_net(&petri::concurrent_composition_net(&net));
            emit(args.output.as_deref(), &doc)?;
            Ok(0)
        }
        PetriAction::ComposeExtended => {
            let doc = petri::serialize_net(&petri::extended_concurrent_composition(&net));
            emit(args.output.as_deref(), &doc)?;
            Ok(0)
        }
        PetriAction::Check => {
            let property = args
                .property
                .ok_or_else(|| Failure::input("`petri check` needs --property"))?;
            let verdict = match property {
                NetProperty::Isd => petri::check_isd_net(&net, &budget),
                NetProperty::Esd => petri::check_esd_net(&net, &budget),
                NetProperty::Prompt => petri::is_prompt(&net, &budget),
                NetProperty::OmegaNonempty => petri::omega_nonempty_net(&net, &budget),
            };
            let text = report(&verdict, args.witness, args.no_timing, started);
            emit(args.output.as_deref(), &text)?;
            Ok(verdict_exit(&verdict))
        }
        PetriAction::EmitYen => {
            let formula = args
                .formula
                .ok_or_else(|| Failure::input("`petri emit-yen` needs --formula"))?;
            let inst = match formula {
                YenFormula::Isd => petri::emit_yen_isd(&net),
                YenFormula::EsdItem1 => petri::emit_yen_esd_item1(&net),
                YenFormula::EsdItem2 => petri::emit_yen_esd_item2(&net),
            };
            inst.validate().map_err(|e| Failure::input(e.to_string()))?;
            emit(args.output.as_deref(), &petri::serialize_yen(&inst))?;
            Ok(0)
        }
        PetriAction::Bifurcation => {
            let seq_text = args
                .sequence
                .as_ref()
                .ok_or_else(|| Failure::input("`petri bifurcation` needs --sequence"))?;
            let seq: Vec<String> = seq_text.split_whitespace().map(str::to_owned).collect();
            let start = match &args.at {
                None => net.initial_marking(),
                Some(text) => parse_marking_arg(&net, text)?,
            };
            match petri::has_bifurcation(&net, &start, &seq, &budget) {
                Ok(answer) => {
                    let mut text = format!("bifurcation: {answer}\n");
                    if !args.no_timing {
                        let _ = writeln!(text, "timing_ms: {}", started.elapsed().as_millis());
                    }
                    emit(args.output.as_deref(), &text)?;
                    Ok(if answer { 0 } else { 1 })
                }
                Err(petri::PetriError::SearchBudget) => {
                    Err(Failure::budget("bifurcation search budget exhausted"))
                }
                Err(e) => Err(Failure::input(e.to_string())),
            }
        }
    }
}

fn run_gen(args: &GenArgs) -> Result<u8, Failure> {
    match args.kind {
        GadgetKind::Coverability => {
            let base = load_net(&args.first)?;
            let target_doc = read_file(&args.second)?;
            let target = parse_marking_doc(&base, &target_doc)?;
            let gadget = petri::gadget_coverability(&base, &target)
                .map_err(|e| Failure::input(e.to_string()))?;
            emit(args.output.as_deref(), &petri::serialize_net(&gadget))?;
            Ok(0)
        }
        GadgetKind::Langeq => {
            let g1 = load_net(&args.first)?;
            let g2 = load_net(&args.second)?;
            let (gadget, descriptor) = petri::gadget_langeq(&g1, &g2, args.cells)
                .map_err(|e| Failure::input(e.to_string()))?;
            emit(args.output.as_deref(), &petri::serialize_net(&gadget))?;
            if let Some(part_path) = &args.partition_out {
                let budget = petri::SearchBudget {
                    max_markings: args.max_markings,
                    max_depth: 14,
                };
                let (_, partition) = petri::realize_partition(&gadget, &descriptor, &budget)
                    .map_err(|e| match e {
                        petri::PetriError::BoundExceeded { .. } => Failure::budget(e.to_string()),
                        other => Failure::input(other.to_string()),
                    })?;
                std::fs::write(part_path, detect::serialize_partition(&partition)).map_err(
                    |e| Failure::input(format!("cannot write {}: {e}", part_path.display())),
                )?;
            }
            Ok(0)
        }
    }
}

/// A marking document: a single `marking:` line over the base net's places.
fn parse_marking_doc(
    net: &petri::LabeledPetriNet,
    text: &str,
) -> Result<petri::Marking, Failure> {
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("marking:") {
            return parse_marking_arg(net, rest);
        }
        return Err(Failure::input(format!(
            "expected a `marking:` line, got {line:?}"
        )));
    }
    Err(Failure::input("empty marking document"))
}

fn parse_seed_range(text: &str) -> Result<(u64, u64), Failure> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| Failure::input(format!("expected <from>..<to>, got {text:?}")))?;
    let from: u64 = a
        .parse()
        .map_err(|_| Failure::input(format!("bad seed {a:?}")))?;
    let to: u64 = b
        .parse()
        .map_err(|_| Failure::input(format!("bad seed {b:?}")))?;
    if from > to {
        return Err(Failure::input("empty seed range"));
    }
    Ok((from, to))
}

fn crosscheck_one(
    m: &Lsts,
    label: &str,
    out: &mut String,
    disagreements: &mut usize,
    skipped: &mut usize,
) {
    let partition = detect::Partition::singletons(m);
    let limits = observer::ObserverLimits::default();
    let _ = writeln!(out, "instance: {label}");
    match observer::agreement_table(m, &partition, &limits) {
        Ok(rows) => {
            for (prop, fa, oracle) in rows {
                let ok = if fa == oracle { "ok" } else { "MISMATCH" };
                if fa != oracle {
                    *disagreements += 1;
                }
                let _ = writeln!(out, "{prop}: {fa}/{oracle} {ok}");
            }
        }
        Err(e) => {
            *skipped += 1;
            let _ = writeln!(out, "skipped: {e}");
        }
    }
}

fn run_crosscheck(args: &CrosscheckArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let mut out = String::new();
    let mut disagreements = 0usize;
    let mut skipped = 0usize;
    let mut instances = 0usize;
    if let Some(path) = &args.model {
        let m = load_lsts(path)?;
        instances += 1;
        crosscheck_one(&m, &path.display().to_string(), &mut out, &mut disagreements, &mut skipped);
    } else {
        let range = args
            .seeds
            .as_ref()
            .ok_or_else(|| Failure::input("crosscheck needs a model or --seeds"))?;
        let (from, to) = parse_seed_range(range)?;
        let limits = RandomLimits {
            max_states: args.max_states,
            max_events: args.max_events,
            max_labels: args.max_labels,
            ..RandomLimits::default()
        };
        for seed in from..=to {
            let m = detkit::random_lsts(seed, &limits)
                .map_err(|e| Failure::input(e.to_string()))?;
            instances += 1;
            crosscheck_one(&m, &format!("seed={seed}"), &mut out, &mut disagreements, &mut skipped);
        }
    }
    let _ = writeln!(
        out,
        "summary: {instances} instances, {disagreements} disagreements, {skipped} skipped"
    );
    if !args.no_timing {
        let _ = writeln!(out, "timing_ms: {}", started.elapsed().as_millis());
    }
    print!("{out}");
    Ok(if disagreements == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    // Usage errors are input errors (exit 3); help and version print normally.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Check(args) => run_check(args),
        Command::Construct(args) => run_construct(args),
        Command::Petri(args) => run_petri(args),
        Command::Gen(args) => run_gen(args),
        Command::Crosscheck(args) => run_crosscheck(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
