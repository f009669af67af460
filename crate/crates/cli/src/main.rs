use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lhv_cli::commands::{self, Outcome, ScanArgs, WernerArgs, EXIT_MALFORMED};
use lhv_cli::input::{apply_options, parse_json, BuilderCall, InputError, ScenarioFile};
use lhv_core::assembly::{ConstraintSet, MixtureMode};

#[derive(Parser)]
#[command(name = "lhv", version, about = "Local incomplete model checks for steered qubit ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a scenario admits a local model.
    ///
    /// Exit status: 0 feasible, 2 infeasible, 3 ambiguous, 4 malformed input.
    Check(CheckCmd),
    /// Compare solver verdicts with the tetrahedron test over a grid of
    /// overlap triples.
    Scan {
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Hull boundary exclusion band.
        #[arg(long, default_value_t = 1e-6)]
        margin: f64,
        /// Write one CSV row per grid point here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Include wall-clock runtime in the summary.
        #[arg(long)]
        timing: bool,
    },
    /// Bisect the Werner visibility at which steering between 3 or 4 bases
    /// first defeats every local model.
    Werner {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=4))]
        ensembles: u8,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Grid step over overlap triples (3 bases).
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
        /// Angles per planar/tetrahedral family (4 bases).
        #[arg(long, default_value_t = 12)]
        angles: usize,
        /// Additional random direction tuples (4 bases).
        #[arg(long, default_value_t = 20)]
        random: usize,
        /// Seed for the random tuples.
        #[arg(long, default_value_t = 17)]
        seed: u64,
    },
    /// Construct the measurement on A that steers B into an ensemble.
    Steer {
        /// JSON bipartite state, {"coeffs": [[[re,im],[re,im]], ...]}.
        state: PathBuf,
        /// JSON list of {"p": .., "state": {"bloch": [..]}} members.
        ensemble: PathBuf,
    },
}

#[derive(clap::Args)]
struct CheckCmd {
    /// Scenario JSON file, or `-` for stdin.
    #[arg(required_unless_present = "builder", conflicts_with = "builder")]
    file: Option<PathBuf>,
    /// two_orthogonal, nonorthogonal_pair, three_orthogonal, gpr or werner.
    #[arg(long)]
    builder: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Radians.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Werner visibility for the werner builder.
    #[arg(long)]
    w: Option<f64>,
    /// Werner directions as a JSON list, e.g. '[[0,0,1],[1,0,0]]'.
    #[arg(long)]
    directions: Option<String>,
    /// Let preparations assign zero mass to outcomes they are not orthogonal to.
    #[arg(long)]
    deficiency: bool,
    /// Drop mixture rows, keeping only support constraints.
    #[arg(long)]
    support_only: bool,
    /// Impose Born rows for every ordered pair of states.
    #[arg(long)]
    all_pairs: bool,
    /// Mix the shared state with white noise at this visibility.
    #[arg(long)]
    werner_w: Option<f64>,
    /// Include the assembled system in the report.
    #[arg(long)]
    emit_system: bool,
}

fn read_source(path: &PathBuf) -> Result<(String, String), InputError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| InputError(format!("<stdin>: {e}")))?;
        return Ok(("<stdin>".into(), text));
    }
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{name}: {e}")))?;
    Ok((name, text))
}

fn run_check(cmd: CheckCmd) -> Result<Outcome, InputError> {
    let scenario = match (&cmd.file, &cmd.builder) {
        (Some(path), _) => {
            let (name, text) = read_source(path)?;
            let file: ScenarioFile = parse_json(&name, &text)?;
            file.into_scenario().map_err(|e| InputError(format!("{name}: {e}")))?
        }
        (None, Some(name)) => {
            let mut params = std::collections::BTreeMap::new();
            for (key, v) in [
                ("alpha", cmd.alpha),
                ("beta", cmd.beta),
                ("gamma", cmd.gamma),
                ("theta", cmd.theta),
                ("q", cmd.q),
                ("w", cmd.w),
            ] {
                if let Some(v) = v {
                    params.insert(key.to_string(), serde_json::json!(v));
                }
            }
            if let Some(d) = &cmd.directions {
                let dirs: serde_json::Value = parse_json("--directions", d)?;
                params.insert("directions".into(), dirs);
            }
            BuilderCall { name: name.clone(), params }
                .build()
                .map_err(|e| InputError(format!("--builder {name}: {e}")))?
        }
        (None, None) => unreachable!("clap requires a file or --builder"),
    };
    let mut options = scenario.options;
    options.deficiency |= cmd.deficiency;
    if cmd.support_only {
        options.mixture_mode = MixtureMode::SupportOnly;
    }
    if cmd.all_pairs {
        options.constraint_set = ConstraintSet::AllPairs;
    }
    if let Some(w) = cmd.werner_w {
        options.werner_w = w;
    }
    let scenario = apply_options(scenario, options)?;
    Ok(commands::check(&scenario, cmd.emit_system))
}

fn run(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::Check(cmd) => run_check(cmd),
        Command::Scan { step, margin, out, jobs, timing } => {
            commands::scan(&ScanArgs { step, margin, out: out.as_deref(), jobs, timing })
        }
        Command::Werner { ensembles, tol, grid_step, angles, random, seed } => commands::werner(&WernerArgs {
            ensembles: ensembles as usize,
            tol,
            grid_step,
            angles,
            random,
            seed,
        }),
        Command::Steer { state, ensemble } => {
            let (sn, st) = read_source(&state)?;
            let (en, et) = read_source(&ensemble)?;
            commands::steer((&sn, &st), (&en, &et))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage errors share the malformed-input status; clap's own
            // default (2) would read as "infeasible".
            let code = if e.use_stderr() { EXIT_MALFORMED as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_MALFORMED as u8)
        }
    }
}
