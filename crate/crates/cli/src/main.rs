use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multiexec::bench::{blowup_row, MAX_BLOWUP_N};
use multiexec::blackbox::{attack, mechanism_by_name};
use multiexec::dsl::{catalog, parse_named, Evaluator, Outcome, Program};
use multiexec::enforce::{me, mef, mef_exact_selection, Mechanism};
use multiexec::lattice::PrincipalUniverse;
use multiexec::oracle::{classify, InputSpace, UniverseSpec};
use serde_json::{json, Value};

mod config;

use config::{config_hash, load_input, load_program, spec_json, UniverseArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] multiexec::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(multiexec::Error::Inconclusive { .. }) => 3,
            _ => 2,
        }
    }
}

/// Multi-execution enforcement workbench.
#[derive(Debug, Parser)]
#[command(name = "multiexec", version)]
struct Cli {
    #[command(flatten)]
    universe: UniverseArgs,
    /// Include per-level sub-runs in enforcement reports.
    #[arg(long, global = true)]
    trace: bool,
    /// Seed for randomised mechanisms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report to this file, or to stdout for `-`.
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a program under an enforcement mechanism.
    Enforce {
        /// `me`, `mef`, `mest` or `mel:<assignment>`.
        #[arg(long)]
        mech: String,
        /// Program file or catalog name.
        #[arg(long)]
        program: String,
        /// Input literal, JSON array, or a file holding either.
        #[arg(long)]
        input: String,
    },
    /// Classify programs for noninterference and termination.
    Classify {
        #[arg(long, required_unless_present = "all_catalog")]
        program: Vec<String>,
        /// Classify every program of the example table.
        #[arg(long, conflicts_with = "program")]
        all_catalog: bool,
    },
    /// Compare ME and MEF exhaustively.
    Equiv {
        #[arg(long)]
        program: Vec<String>,
        /// Directory of `.dsl` programs.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Use MEF with exact (`@ℓ`) selection instead of neighbourhoods.
        #[arg(long)]
        inject_faulty_mef: bool,
    },
    /// Run the black-box attack against a budgeted mechanism.
    Attack {
        /// `me`, `mef`, `prefix-me`, `prefix-mef` or `random-mef`.
        #[arg(long, default_value = "mef")]
        mech: String,
        #[arg(long)]
        budget: Option<usize>,
        /// Number of principals.
        #[arg(long)]
        n: usize,
    },
    /// Measure `MEF[combineAll]` on inputs with n distinct labels.
    BenchBlowup {
        #[arg(long, default_value_t = 0)]
        min_n: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
}

struct Report {
    json: Value,
    text: String,
    exit: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => match emit(&cli, report) {
            Ok(code) => ExitCode::from(code),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(cli: &Cli, report: Report) -> Result<u8, CliError> {
    let pretty = serde_json::to_string_pretty(&report.json).expect("reports are plain JSON");
    match cli.json.as_deref() {
        Some(p) if p.as_os_str() == "-" => println!("{pretty}"),
        Some(p) => {
            fs::write(p, pretty + "\n")
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            print!("{}", report.text);
        }
        None => print!("{}", report.text),
    }
    Ok(report.exit)
}

/// Adds `config` and its hash to `body`.
fn with_config(mut body: Value, config: Value) -> Value {
    body["config_hash"] = json!(config_hash(&config));
    body["config"] = config;
    body
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Enforce {
            mech,
            program,
            input,
        } => enforce(cli, mech, program, input),
        Command::Classify {
            program,
            all_catalog,
        } => classify_cmd(cli, program, *all_catalog),
        Command::Equiv {
            program,
            corpus,
            inject_faulty_mef,
        } => equiv(cli, program, corpus.as_ref(), *inject_faulty_mef),
        Command::Attack { mech, budget, n } => attack_cmd(cli, mech, *budget, *n),
        Command::BenchBlowup { min_n, max_n } => bench(cli, *min_n, *max_n),
    }
}

fn enforce(cli: &Cli, mech: &str, program: &str, input: &str) -> Result<Report, CliError> {
    let spec = cli.universe.for_program(program)?;
    let u = &spec.principals;
    let mechanism = Mechanism::parse(mech, &spec)?;
    let (p, source) = load_program(program, u)?;
    let x = load_input(input, u)?;
    let run = mechanism.enforce(&p, &x, &spec)?;

    let config = json!({
        "command": "enforce",
        "universe": spec_json(&spec),
        "mechanism": mechanism.name(),
        "program": source,
        "input": x.to_json(u),
        "trace": cli.trace,
    });
    let mut body = run.to_json(u, cli.trace);
    body["mechanism"] = json!(mechanism.name());
    body["program"] = json!(p.name);
    body["input"] = x.to_json(u);

    let mut text = format!(
        "{}[{}]({}) = {}\n",
        match &mechanism {
            Mechanism::Base(b) => b.name().to_uppercase(),
            other => other.name(),
        },
        p.name,
        x.display(u),
        run.outcome.display(u)
    );
    if cli.trace {
        for r in &run.sub_runs {
            let _ = writeln!(
                text,
                "  {:<12} p({}) = {}",
                u.display(r.level),
                r.input.display(u),
                r.outcome.display(u)
            );
        }
    }
    let exit = if run.outcome == Outcome::FuelExhausted {
        3
    } else {
        0
    };
    Ok(Report {
        json: with_config(body, config),
        text,
        exit,
    })
}

fn classify_cmd(cli: &Cli, programs: &[String], all_catalog: bool) -> Result<Report, CliError> {
    let names: Vec<String> = if all_catalog {
        catalog::TABLE_PROGRAMS
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        programs.to_vec()
    };
    let mut rows = Vec::new();
    let mut configs = Vec::new();
    let mut text = format!(
        "{:<20} {:<4} {:<12} {}\n",
        "program", "NI", "termination", "security"
    );
    for name in &names {
        let spec = cli.universe.for_program(name)?;
        let (p, source) = load_program(name, &spec.principals)?;
        let r = classify(&p.name, &Evaluator::new(&p, spec.fuel), &spec)?;
        let _ = writeln!(
            text,
            "{:<20} {:<4} {:<12} {}",
            r.program,
            if r.ni { "yes" } else { "no" },
            r.termination.as_str(),
            r.security
        );
        let mut row = r.to_json(&spec.principals);
        row["universe"] = spec_json(&spec);
        rows.push(row);
        configs.push(json!({ "program": source, "universe": spec_json(&spec) }));
    }
    let config = json!({ "command": "classify", "programs": configs });
    Ok(Report {
        json: with_config(json!({ "rows": rows }), config),
        text,
        exit: 0,
    })
}

/// The programs an equivalence sweep runs over, each with its universe.
fn equiv_corpus(
    cli: &Cli,
    programs: &[String],
    corpus: Option<&PathBuf>,
) -> Result<Vec<(Program, UniverseSpec)>, CliError> {
    let mut out = Vec::new();
    for name in programs {
        let spec = cli.universe.for_program(name)?;
        out.push((load_program(name, &spec.principals)?.0, spec));
    }
    if let Some(dir) = corpus {
        let spec = cli.universe.resolve(PrincipalUniverse::two_point())?;
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "dsl"))
            .collect();
        paths.sort();
        for path in paths {
            let source = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("main");
            out.push((parse_named(name, &source, &spec.principals)?, spec.clone()));
        }
    }
    if programs.is_empty() && corpus.is_none() {
        if cli.universe.explicit() {
            let spec = cli.universe.resolve(PrincipalUniverse::two_point())?;
            out.extend(
                catalog::programs_for(&spec.principals)
                    .into_iter()
                    .map(|p| (p, spec.clone())),
            );
        } else {
            for e in catalog::entries() {
                let spec = cli.universe.resolve(e.universe())?;
                out.push((e.program(&spec.principals)?, spec));
            }
        }
    }
    Ok(out)
}

fn equiv(
    cli: &Cli,
    programs: &[String],
    corpus: Option<&PathBuf>,
    faulty: bool,
) -> Result<Report, CliError> {
    let entries = equiv_corpus(cli, programs, corpus)?;
    let variant = if faulty { "mef-exact-selection" } else { "mef" };
    let mut compared = 0usize;
    let mut mismatches = Vec::new();
    let mut configs = Vec::new();
    for (p, spec) in &entries {
        let u = &spec.principals;
        let ev = Evaluator::new(p, spec.fuel);
        for x in InputSpace::new(spec)?.inputs() {
            let a = me(&ev, &x, u).outcome;
            let b = if faulty {
                mef_exact_selection(&ev, &x)
            } else {
                mef(&ev, &x)
            }
            .outcome;
            compared += 1;
            if a != b {
                mismatches.push(json!({
                    "program": p.name,
                    "input": x.to_json(u),
                    "me": a.to_json(u),
                    variant: b.to_json(u),
                }));
            }
        }
        configs.push(json!({ "program": p.to_source(u), "universe": spec_json(spec) }));
    }

    let mut text = format!(
        "ME vs {variant}: {} programs, {compared} runs, {} mismatches\n",
        entries.len(),
        mismatches.len()
    );
    for m in mismatches.iter().take(10) {
        let _ = writeln!(
            text,
            "  {} on {}: me {} / {variant} {}",
            m["program"], m["input"], m["me"]["output"], m[variant]["output"]
        );
    }
    let body = json!({
        "variant": variant,
        "programs": entries.iter().map(|(p, _)| p.name.clone()).collect::<Vec<_>>(),
        "compared": compared,
        "mismatches": mismatches,
    });
    let config = json!({ "command": "equiv", "variant": variant, "programs": configs });
    let exit = if mismatches.is_empty() { 0 } else { 1 };
    Ok(Report {
        json: with_config(body, config),
        text,
        exit,
    })
}

fn attack_cmd(cli: &Cli, mech: &str, budget: Option<usize>, n: usize) -> Result<Report, CliError> {
    let universe = PrincipalUniverse::numbered(n)?;
    let fuel = cli.universe.fuel.unwrap_or(multiexec::dsl::DEFAULT_FUEL);
    let mechanism = mechanism_by_name(mech, budget, cli.seed, &universe)?;
    let report = attack(&mechanism, n, fuel)?;

    let mut text = format!(
        "{} (budget {}) over n = {n}: {}\n",
        report.mechanism,
        report.budget,
        report.verdict.as_str()
    );
    if let (Some(s), Some(e)) = (report.s_prime, &report.evidence) {
        let _ = writeln!(text, "  S' = {}", universe.display(s));
        let _ = writeln!(
            text,
            "  E[equal](toInput(S))  = {}",
            e.equal_s.outcome.display(&universe)
        );
        let _ = writeln!(
            text,
            "  E[equal](toInput(S')) = {}",
            e.equal_s_prime.outcome.display(&universe)
        );
    }
    let config = json!({
        "command": "attack",
        "mechanism": mech,
        "budget": budget,
        "n": n,
        "seed": cli.seed,
        "fuel": fuel,
    });
    Ok(Report {
        json: with_config(report.to_json(), config),
        text,
        exit: 0,
    })
}

fn bench(cli: &Cli, min_n: usize, max_n: usize) -> Result<Report, CliError> {
    if min_n > max_n {
        return Err(CliError::Config(format!(
            "--min-n {min_n} exceeds --max-n {max_n}"
        )));
    }
    if max_n > MAX_BLOWUP_N {
        return Err(multiexec::Error::UniverseTooLarge {
            elements: max_n,
            limit: MAX_BLOWUP_N,
        }
        .into());
    }
    let fuel = cli.universe.fuel.unwrap_or(multiexec::dsl::DEFAULT_FUEL);
    let mut rows = Vec::new();
    let mut exact = true;
    let mut text = format!(
        "{:>3} {:>8} {:>9} {:>12}\n",
        "n", "|output|", "sub-runs", "wall time"
    );
    for n in min_n..=max_n {
        let row = blowup_row(n, fuel)?;
        exact &= row.output_size == 1 << n && row.sub_runs == 1 << n;
        let _ = writeln!(
            text,
            "{:>3} {:>8} {:>9} {:>12.2?}",
            row.n, row.output_size, row.sub_runs, row.elapsed
        );
        rows.push(row.to_json());
    }
    if !exact {
        text.push_str("output size differs from 2^n\n");
    }
    let config = json!({ "command": "bench-blowup", "min_n": min_n, "max_n": max_n, "fuel": fuel });
    let body = json!({ "rows": rows, "exact": exact });
    Ok(Report {
        json: with_config(body, config),
        text,
        exit: if exact { 0 } else { 1 },
    })
}
