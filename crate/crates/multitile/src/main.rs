use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multitile::config::parse_config;
use multitile::detcond::profile_csv;
use multitile::error::Error;
use multitile::frame::{bound_convergence_scan, FourierPath};
use multitile::scenario::{
    apply_overrides, builtin_config, run_pipeline, write_outputs, Overrides,
};
use multitile::spectrum::structured_spectrum;

#[derive(Parser)]
#[command(
    name = "multitile",
    about = "Structured exponential-basis certificates for multi-tiling measures"
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Globals {
    /// Override the discretization resolution (segment nodes / region per-axis).
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Seed for the certified-vector search.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report and CSV artifacts.
    #[arg(long, global = true)]
    out_dir: Option<String>,
    /// Run the sufficiency search even when the separation test fails.
    #[arg(long, global = true)]
    force_all: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario end to end.
    Scenario {
        name: String,
        /// Scenario parameter as key=value (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Parse a config file and run the full pipeline on it.
    Check { config: PathBuf },
    /// Emit the determinant profile CSV for explicit translations.
    Profile {
        config: PathBuf,
        /// Translations as semicolon-separated comma vectors, e.g. "0,0;0,0.5".
        #[arg(long)]
        t: String,
    },
    /// Emit the bound-scan CSV at the given truncation radii.
    Scan {
        config: PathBuf,
        /// Comma-separated ascending truncation radii.
        #[arg(long = "K")]
        k: String,
    },
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::BadParams(format!("expected key=value, got `{p}`")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_vec_list(raw: &str) -> Result<Vec<Vec<f64>>, Error> {
    raw.split(';')
        .map(|v| {
            v.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::BadParams(format!("bad vector component `{p}`")))
                })
                .collect()
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    let ov = Overrides {
        nodes: cli.globals.nodes,
        seed: cli.globals.seed,
        out_dir: cli.globals.out_dir,
        force_all: cli.globals.force_all,
    };
    match cli.command {
        Command::Scenario { name, params } => {
            let params = parse_params(&params)?;
            let mut cfg = builtin_config(&name, &params)?;
            apply_overrides(&mut cfg, &ov);
            let out = run_pipeline(&cfg)?;
            write_outputs(&cfg, &out)?;
            print!("{}", out.report_text);
        }
        Command::Check { config } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = parse_config(&text)?;
            apply_overrides(&mut cfg, &ov);
            let out = run_pipeline(&cfg)?;
            write_outputs(&cfg, &out)?;
            print!("{}", out.report_text);
        }
        Command::Profile { config, t } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = parse_config(&text)?;
            apply_overrides(&mut cfg, &ov);
            cfg.task.t = Some(parse_vec_list(&t)?);
            let out = run_pipeline(&cfg)?;
            write_outputs(&cfg, &out)?;
            let ts: Vec<nalgebra::DVector<f64>> = cfg
                .task
                .t
                .as_ref()
                .unwrap()
                .iter()
                .map(|v| nalgebra::DVector::from_vec(v.clone()))
                .collect();
            let (_, m) = multitile::scenario::assemble_from_config(&cfg)?;
            print!("{}", profile_csv(&m, &ts)?);
        }
        Command::Scan { config, k } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = parse_config(&text)?;
            apply_overrides(&mut cfg, &ov);
            let k_list: Vec<i64> = k
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::BadParams(format!("bad truncation `{p}`")))
                })
                .collect::<Result<_, _>>()?;
            let (group, m) = multitile::scenario::assemble_from_config(&cfg)?;
            let ts: Vec<nalgebra::DVector<f64>> = cfg
                .task
                .t
                .clone()
                .ok_or_else(|| Error::BadParams("config has no `t` for the scan".into()))?
                .iter()
                .map(|v| nalgebra::DVector::from_vec(v.clone()))
                .collect();
            let dual = group.dual_group()?;
            let trunc = k_list.iter().copied().max().unwrap_or(0);
            let plan = structured_spectrum(&group, &dual, &ts, trunc)?;
            let scan =
                bound_convergence_scan(&m, &plan, &k_list, FourierPath::Quadrature, None)?;
            print!("{}", scan.csv());
        }
    }
    Ok(())
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::ParseError { .. }
        | Error::BadParams(_)
        | Error::UnknownScenario(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
