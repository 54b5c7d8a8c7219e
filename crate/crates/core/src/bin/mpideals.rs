use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use mpideals::algebra::DimensionTable;
use mpideals::instance::{run_query, QueryError};
use mpideals::suites::{run_suite, SuiteConfig, SuiteError};
use mpideals::tol::Tolerances;

#[derive(Parser)]
#[command(name = "mpideals", version, about = "Moore-Penrose ideals: verification suites and single-instance queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed of the trial generator.
    #[arg(long, global = true, env = "MPIDEALS_SEED", default_value_t = 0)]
    seed: u64,
    /// Trials per check (default: each check's own count).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Tolerance override, e.g. `--tol rank_tol=1e-10`; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Block profile as `index:dim` pairs, e.g. `0:1,1:2,2:3`.
    #[arg(long, global = true, value_parser = parse_blocks)]
    blocks: Option<DimensionTable>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: t31-2, lifting, mp-ideal, projections,
    /// mp-sum, minimal-projections, counterexamples or all.
    Verify { suite: String },
    /// Run one operation on an instance file.
    Query { op: String, file: std::path::PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value `{value}`: {e}"))?;
    let mut probe = Tolerances::default();
    probe.set(name.trim(), value).map_err(|e| e.to_string())?;
    Ok((name.trim().to_string(), value))
}

fn parse_blocks(s: &str) -> Result<DimensionTable, String> {
    let mut dims = BTreeMap::new();
    for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (t, n) = pair.split_once(':').ok_or_else(|| format!("expected index:dim, got `{pair}`"))?;
        let t: usize = t.trim().parse().map_err(|e| format!("bad index `{t}`: {e}"))?;
        let n: usize = n.trim().parse().map_err(|e| format!("bad dimension `{n}`: {e}"))?;
        if dims.insert(t, n).is_some() {
            return Err(format!("index {t} listed twice"));
        }
    }
    if dims.is_empty() {
        return Err("empty block profile".into());
    }
    DimensionTable::new(dims).ok_or_else(|| "block dimensions must be at least 1".into())
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::default();
    for (name, value) in &cli.common.tol {
        tol.set(name, *value).expect("validated by the argument parser");
    }
    let dims = cli.common.blocks.clone().unwrap_or_else(DimensionTable::default_profile);
    let code = match &cli.command {
        Command::Verify { suite } => verify(suite, &cli.common, tol, dims),
        Command::Query { op, file } => query(op, file, &cli.common, &tol, &dims),
    };
    ExitCode::from(code)
}

fn verify(suite: &str, common: &Common, tol: Tolerances, dims: DimensionTable) -> u8 {
    let config = SuiteConfig { seed: common.seed, trials: common.trials, tol, dims };
    match run_suite(suite, &config) {
        Ok(report) => {
            match common.format {
                Format::Json => {
                    let doc = report.to_json(&config, timestamp());
                    println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
                }
                Format::Text => print!("{}", report.to_text()),
            }
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(e @ (SuiteError::UnknownSuite(_) | SuiteError::ConfigInvalid(_))) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn query(op: &str, file: &std::path::Path, common: &Common, tol: &Tolerances, dims: &DimensionTable) -> u8 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return 2;
        }
    };
    match run_query(op, &text, tol, dims) {
        Ok(out) => {
            match common.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "schema": mpideals::suites::SCHEMA_VERSION,
                        "timestamp": timestamp(),
                        "op": out.op,
                        "success": out.success,
                        "report": out.report,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
                }
                Format::Text => {
                    println!("{}: {}", out.op, if out.success { "ok" } else { "certificate FAILED" });
                    println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
                }
            }
            if out.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let code = e.exit_code();
            match e {
                QueryError::Math(msg) => eprintln!("{op}: {msg}"),
                other => eprintln!("error: {other}"),
            }
            code as u8
        }
    }
}
