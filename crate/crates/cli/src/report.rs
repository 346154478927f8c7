//! CSV and JSON-lines output.

use std::fmt::Display;
use std::io::Write;

use serde::Serialize;
use wpcrelay_core::outage::OutageEstimate;
use wpcrelay_core::sim::SteadyStateEstimate;
use wpcrelay_core::{EstimateMode, SchemeId, SteadyState};

use crate::config::Scenario;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            _ => anyhow::bail!("unknown format {s:?} (expected csv or jsonl)"),
        }
    }
}

/// One outage value. `error` is set, and the numbers left empty, when the point failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageRow {
    pub parameter: Option<f64>,
    pub scheme: String,
    pub mode: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub error: Option<String>,
}

impl OutageRow {
    pub fn from_result<E: Display>(
        parameter: Option<f64>,
        scheme: SchemeId,
        mode: EstimateMode,
        result: Result<OutageEstimate, E>,
    ) -> Self {
        let (value, stderr, trials, error) = match result {
            Ok(e) => (Some(e.value), e.stderr, e.trials, None),
            Err(e) => (None, None, None, Some(format!("{e:#}"))),
        };
        Self {
            parameter,
            scheme: scheme.to_string(),
            mode: mode.to_string(),
            value,
            stderr,
            trials,
            error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateRow {
    pub scheme: String,
    pub mode: String,
    pub pi0: Option<f64>,
    pub pi1: Option<f64>,
    pub eta0: Option<f64>,
    pub eta1: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub error: Option<String>,
}

impl SteadyStateRow {
    pub fn analytic<E: Display>(scheme: SchemeId, r: Result<SteadyState, E>) -> Self {
        let mut row = Self::blank(scheme, EstimateMode::Analytic);
        match r {
            Ok(s) => {
                row.pi0 = Some(s.pi0);
                row.pi1 = Some(s.pi1);
                row.eta0 = Some(s.eta0);
                row.eta1 = Some(s.eta1);
            }
            Err(e) => row.error = Some(format!("{e:#}")),
        }
        row
    }

    pub fn simulated<E: Display>(scheme: SchemeId, r: Result<SteadyStateEstimate, E>) -> Self {
        let mut row = Self::blank(scheme, EstimateMode::Simulated);
        match r {
            Ok(s) => {
                row.pi0 = Some(s.pi0);
                row.pi1 = Some(s.pi1);
                row.eta0 = Some(1.0 - s.eta1);
                row.eta1 = Some(s.eta1);
                row.stderr = Some(s.eta1_stderr);
                row.trials = Some(s.relay_slots);
            }
            Err(e) => row.error = Some(format!("{e:#}")),
        }
        row
    }

    fn blank(scheme: SchemeId, mode: EstimateMode) -> Self {
        Self {
            scheme: scheme.to_string(),
            mode: mode.to_string(),
            pi0: None,
            pi1: None,
            eta0: None,
            eta1: None,
            stderr: None,
            trials: None,
            error: None,
        }
    }
}

/// Comment lines placed above the data: tool version, command, units and the resolved config.
pub fn header(command: &str, extra: &[String], scenario: &Scenario) -> Vec<String> {
    let mut lines = vec![
        format!("wpcrelay {VERSION}"),
        format!("command: {command}"),
        "units: power_db converts as P = 10^(power_db/10) * noise".to_string(),
    ];
    lines.extend(extra.iter().cloned());
    lines.push("config:".to_string());
    lines.extend(scenario.to_toml().lines().map(|l| format!("  {l}")));
    lines
}

pub fn write<W: Write, R: Serialize>(mut out: W, format: Format, header: &[String], rows: &[R]) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            for line in header {
                writeln!(out, "{}", format!("# {line}").trim_end())?;
            }
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            serde_json::to_writer(&mut out, &serde_json::json!({ "header": header }))?;
            writeln!(out)?;
            for r in rows {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}
