use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gabic::scenario::{self, Diagnostic, Output, RunError, Scenario, Severity};
use gabic::spectral;

const EXIT_IO: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gabic",
    version,
    about = "Giant-atom emission dynamics, bound states and field maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Run directory; defaults to runs/<scenario name>.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for independent outputs.
    #[arg(long, value_name = "N", default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run every output listed in the scenario.
    Simulate(RunArgs),
    /// Locate bound states in the continuum for each subspace.
    Poles(RunArgs),
    /// Design a resonant double bound state.
    DesignBic {
        /// Target ω_e; accepts expressions such as 202*pi.
        #[arg(long)]
        target: String,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        q_plus: i64,
        #[arg(long)]
        q_minus: i64,
        /// Subspace whose g_n is designed.
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Emitted intensity on a spacetime grid.
    FieldMap(RunArgs),
    /// Compare the delay equation against the discretized waveguide.
    OracleCompare(RunArgs),
    /// Check a scenario and report every problem found.
    Validate {
        #[command(flatten)]
        source: Source,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("gabic: {msg}");
    ExitCode::from(code)
}

fn read_source(source: &Source) -> Result<String, ExitCode> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            std::fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
        }
        (None, Some(name)) => scenario::preset(name).map(str::to_owned).ok_or_else(|| {
            let known: Vec<_> = scenario::preset_names().collect();
            fail(
                EXIT_SCHEMA,
                format!("unknown preset `{name}`; available: {}", known.join(", ")),
            )
        }),
        (None, None) => Err(fail(EXIT_SCHEMA, "give --config PATH or --preset NAME")),
    }
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

fn load(source: &Source) -> Result<Scenario, ExitCode> {
    let text = read_source(source)?;
    let (s, diags) = scenario::parse_scenario(&text);
    print_diagnostics(&diags);
    s.ok_or_else(|| {
        let first = diags.iter().find(|d| d.severity == Severity::Error);
        let key = first.map_or("", |d| d.key.as_str());
        fail(EXIT_SCHEMA, format!("invalid scenario (first offending key: `{key}`)"))
    })
}

fn run(args: &RunArgs, only: Option<Output>) -> ExitCode {
    let mut s = match load(&args.source) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(o) = only {
        s.outputs = vec![o];
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(&s.name));
    match scenario::run_scenario(&s, &out, args.workers) {
        Ok(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for f in &manifest.files {
                println!("{}  {}", f.sha256, out.join(&f.path).display());
            }
            println!("manifest: {}", out.join(scenario::MANIFEST).display());
            if only == Some(Output::Poles) {
                for f in manifest.files.iter().filter(|f| f.path.starts_with("poles_")) {
                    if let Ok(text) = std::fs::read_to_string(out.join(&f.path)) {
                        print!("{text}");
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Numerical { .. }) => fail(EXIT_NUMERICAL, e),
        Err(e) => fail(EXIT_IO, e),
    }
}

fn design(target: &str, tau: &str, q_plus: i64, q_minus: i64, n: u32) -> ExitCode {
    let Some(target) = scenario::parse_expr(target) else {
        return fail(EXIT_SCHEMA, format!("`target`: cannot evaluate {target:?}"));
    };
    let Some(tau) = scenario::parse_expr(tau) else {
        return fail(EXIT_SCHEMA, format!("`tau`: cannot evaluate {tau:?}"));
    };
    let d = match spectral::design_double_bic(target, tau, q_plus, q_minus) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_SCHEMA, e),
    };
    // Check with Γ = γ = 1, v = 1.
    let check = d
        .to_params(n, 1.0, 1.0, 0.0)
        .and_then(|p| spectral::find_bics(&p, n, spectral::DEFAULT_TOL).map(|s| (p, s)));
    let (p, search) = match check {
        Ok(x) => x,
        Err(e) => return fail(EXIT_NUMERICAL, format!("spectral: {e}")),
    };
    let poles: Vec<scenario::PoleRecord> = search.solutions.iter().map(Into::into).collect();
    let out = json!({
        "omega_e": d.omega_e,
        "g_n": d.g_n,
        "g": p.g,
        "n": n,
        "tau": d.tau,
        "q_plus": d.q_plus,
        "q_minus": d.q_minus,
        "poles": poles,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(a) => run(a, None),
        Command::Poles(a) => run(a, Some(Output::Poles)),
        Command::FieldMap(a) => run(a, Some(Output::FieldMap)),
        Command::OracleCompare(a) => run(a, Some(Output::OracleCompare)),
        Command::DesignBic {
            target,
            tau,
            q_plus,
            q_minus,
            n,
        } => design(target, tau, *q_plus, *q_minus, *n),
        Command::Validate { source } => {
            let text = match read_source(source) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let (s, diags) = scenario::parse_scenario(&text);
            print_diagnostics(&diags);
            match s {
                Some(s) => {
                    println!("{}: ok ({} warning(s))", s.name, diags.len());
                    ExitCode::SUCCESS
                }
                None => ExitCode::from(EXIT_SCHEMA),
            }
        }
    }
}
