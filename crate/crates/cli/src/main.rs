use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wpcrelay::config::{MultiCellSettings, DEFAULT_TRUNCATION_FACTOR};
use wpcrelay::engine::{evaluate, simulate_steady_state};
use wpcrelay::report::{self, Format, OutageRow, SteadyStateRow};
use wpcrelay::{load, run_sweep, validate, Scenario, SweepSpec, ValidateOptions};
use wpcrelay_core::steady_state::steady_state_with;
use wpcrelay_core::{EstimateMode, SchemeId};

#[derive(Parser)]
#[command(
    name = "wpcrelay",
    version,
    about = "Relay selection with two-state batteries: closed forms and simulation"
)]
struct Cli {
    /// Scenario file (TOML); missing keys take the reference values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set network.lambda=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Switch to the multi-cell model with this AP density.
    #[arg(long, value_name = "MU", global = true)]
    multicell: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", global = true)]
    format: Format,
    /// Run on one thread (results are identical either way).
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Selection {
    /// Scheme(s): rrs, rcs, rrsb, rcsb, db. Defaults to all applicable.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<SchemeId>,
    /// Mode(s): analytic, simulated, asymptotic.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<EstimateMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Battery steady state per scheme.
    SteadyState(Selection),
    /// Outage probability at the configured operating point.
    Outage(Selection),
    /// Outage over a one-parameter sweep.
    Sweep {
        /// name=from:to:step with name one of power_db, d0, psi, rho, rate, lambda, mu.
        #[arg(long)]
        sweep: String,
        #[command(flatten)]
        selection: Selection,
    },
    /// Outage in the multi-cell model (needs --multicell or a [multicell] section).
    Multicell(Selection),
    /// Run the acceptance checks and print a JSON report.
    Validate {
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, hide = true)]
        corrupt_eta1: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        s.sim.seed = seed;
    }
    if let Some(mu) = cli.multicell {
        let truncation_factor = s.multicell.map_or(DEFAULT_TRUNCATION_FACTOR, |m| m.truncation_factor);
        s.multicell = Some(MultiCellSettings { mu, truncation_factor });
        s.multicell_config()?;
    }
    if cli.serial {
        s.parallel = false;
    }
    Ok(s)
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn schemes(sel: &Selection, s: &Scenario) -> Vec<SchemeId> {
    if !sel.scheme.is_empty() {
        sel.scheme.clone()
    } else if s.multicell.is_some() {
        SchemeId::SINGLE_RELAY.to_vec()
    } else {
        SchemeId::ALL.to_vec()
    }
}

fn modes(sel: &Selection) -> Vec<EstimateMode> {
    if sel.mode.is_empty() {
        vec![EstimateMode::Analytic]
    } else {
        sel.mode.clone()
    }
}

/// Returns whether every row came out without an error.
fn run(cli: Cli) -> Result<bool> {
    let s = scenario(&cli)?;
    let mut out = output(&cli)?;
    let ok = match &cli.command {
        Command::SteadyState(sel) => {
            let mut rows = Vec::new();
            for scheme in schemes(sel, &s) {
                for mode in modes(sel) {
                    rows.push(match mode {
                        EstimateMode::Analytic => {
                            SteadyStateRow::analytic(scheme, steady_state_with(scheme, &s.network, s.analytic.approx))
                        }
                        EstimateMode::Simulated => SteadyStateRow::simulated(
                            scheme,
                            simulate_steady_state(scheme, &s.network, &s.sim, s.parallel),
                        ),
                        EstimateMode::Asymptotic => bail!("steady-state has no asymptotic mode"),
                    });
                }
            }
            report::write(&mut out, cli.format, &report::header("steady-state", &[], &s), &rows)?;
            rows.iter().all(|r| r.error.is_none())
        }
        Command::Outage(sel) | Command::Multicell(sel) => {
            if matches!(cli.command, Command::Multicell(_)) && s.multicell.is_none() {
                bail!("multicell needs --multicell <mu> or a [multicell] section in the config");
            }
            let name = if s.multicell.is_some() { "multicell" } else { "outage" };
            let rows: Vec<OutageRow> = schemes(sel, &s)
                .into_iter()
                .flat_map(|k| modes(sel).into_iter().map(move |m| (k, m)))
                .map(|(k, m)| OutageRow::from_result(None, k, m, evaluate(k, m, &s)))
                .collect();
            report::write(
                &mut out,
                cli.format,
                &report::header(name, &["parameter: none".into()], &s),
                &rows,
            )?;
            rows.iter().all(|r| r.error.is_none())
        }
        Command::Sweep { sweep, selection } => {
            let spec = SweepSpec::parse_range(sweep, schemes(selection, &s), modes(selection))?;
            let rows = run_sweep(&spec, &s)?;
            let extra = [format!(
                "parameter: {} from {} to {} step {}",
                spec.parameter, spec.from, spec.to, spec.step
            )];
            report::write(&mut out, cli.format, &report::header("sweep", &extra, &s), &rows)?;
            rows.iter().all(|r| r.error.is_none())
        }
        Command::Validate { criteria, corrupt_eta1 } => {
            let opts = ValidateOptions {
                criteria: criteria.clone(),
                corrupt_eta1: *corrupt_eta1,
            };
            let r = validate(&s, &opts);
            for c in &r.criteria {
                eprintln!("{}", c.summary_line());
            }
            serde_json::to_writer_pretty(&mut out, &r)?;
            writeln!(out)?;
            r.passed
        }
    };
    out.flush()?;
    Ok(ok)
}
