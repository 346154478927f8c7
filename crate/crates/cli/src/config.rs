//! TOML scenario files and `--set` overrides.
//!
//! Power may be given in dB (`power_db`) or linear (`power`); dB converts as
//! P = 10^(dB/10)·σ². Everything past this module works in linear units.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wpcrelay_core::model::cell_radius;
use wpcrelay_core::outage::AnalyticOptions;
use wpcrelay_core::sim::{Ensemble, SimConfig};
use wpcrelay_core::{MultiCellConfig, NetworkConfig, SelectionApprox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub network: NetworkSection,
    pub simulation: SimulationSection,
    pub analytic: AnalyticSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multicell: Option<MultiCellSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda: f64,
    pub rho: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    pub psi: f64,
    pub noise: f64,
    pub rate: f64,
    pub d0: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub seed: u64,
    pub burn_in_slots: u64,
    pub measure_slots: u64,
    pub topology_draws: u64,
    pub exact_relay_dest_distance: bool,
    /// "mobile" or "static".
    pub ensemble: String,
    /// Scheduling only; left out of output headers so serial and parallel runs print the same bytes.
    #[serde(skip_serializing)]
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSection {
    /// "jensen" or "exact".
    pub selection: String,
    pub db_k_max: usize,
    pub db_term_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiCellSection {
    pub mu: f64,
    /// Interferers are sampled out to this multiple of the cell radius.
    pub truncation_factor: f64,
}

impl Default for FileConfig {
    fn default() -> Self {
        Scenario::default().to_file()
    }
}

impl Default for NetworkSection {
    fn default() -> Self {
        // no power key, so a file may set either power_db or power
        let mut n = Scenario::default().to_file().network;
        n.power_db = None;
        n
    }
}

impl Default for SimulationSection {
    fn default() -> Self {
        Scenario::default().to_file().simulation
    }
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Scenario::default().to_file().analytic
    }
}

impl Default for MultiCellSection {
    fn default() -> Self {
        Self {
            mu: 0.005,
            truncation_factor: DEFAULT_TRUNCATION_FACTOR,
        }
    }
}

pub const DEFAULT_TRUNCATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiCellSettings {
    pub mu: f64,
    pub truncation_factor: f64,
}

/// A fully resolved run description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub sim: SimConfig,
    pub analytic: AnalyticOptions,
    pub multicell: Option<MultiCellSettings>,
    pub parallel: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            sim: SimConfig::default(),
            analytic: AnalyticOptions::default(),
            multicell: None,
            parallel: true,
        }
    }
}

pub fn power_from_db(db: f64, noise: f64) -> f64 {
    10f64.powf(db / 10.0) * noise
}

pub fn power_to_db(power: f64, noise: f64) -> f64 {
    10.0 * (power / noise).log10()
}

impl Scenario {
    /// Multi-cell geometry, if the scenario enables it.
    pub fn multicell_config(&self) -> Result<Option<MultiCellConfig>> {
        self.multicell
            .map(|m| {
                let radius = m.truncation_factor * cell_radius(m.mu);
                MultiCellConfig::with_truncation(self.network, m.mu, radius).context("invalid multi-cell setting")
            })
            .transpose()
    }

    pub fn to_file(&self) -> FileConfig {
        let n = &self.network;
        FileConfig {
            network: NetworkSection {
                lambda: n.lambda,
                rho: n.rho,
                alpha: n.alpha,
                power_db: Some(power_to_db(n.power, n.noise)),
                power: None,
                psi: n.psi,
                noise: n.noise,
                rate: n.rate,
                d0: n.d0,
                zeta: n.zeta,
            },
            simulation: SimulationSection {
                seed: self.sim.seed,
                burn_in_slots: self.sim.burn_in_slots,
                measure_slots: self.sim.measure_slots,
                topology_draws: self.sim.topology_draws,
                exact_relay_dest_distance: self.sim.exact_relay_dest_distance,
                ensemble: match self.sim.ensemble {
                    Ensemble::Mobile => "mobile",
                    Ensemble::Static => "static",
                }
                .into(),
                parallel: self.parallel,
            },
            analytic: AnalyticSection {
                selection: match self.analytic.approx {
                    SelectionApprox::Jensen => "jensen",
                    SelectionApprox::ExactPoisson => "exact",
                }
                .into(),
                db_k_max: self.analytic.db_k_max,
                db_term_tol: self.analytic.db_term_tol,
            },
            multicell: self.multicell.map(|m| MultiCellSection {
                mu: m.mu,
                truncation_factor: m.truncation_factor,
            }),
        }
    }

    /// The resolved configuration as TOML, for output headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).unwrap_or_default()
    }
}

impl FileConfig {
    pub fn resolve(&self) -> Result<Scenario> {
        let n = &self.network;
        let power = match (n.power_db, n.power) {
            (Some(_), Some(_)) => bail!("set only one of network.power_db and network.power"),
            (Some(db), None) => power_from_db(db, n.noise),
            (None, Some(p)) => p,
            (None, None) => NetworkConfig::default().power,
        };
        let network = NetworkConfig {
            lambda: n.lambda,
            rho: n.rho,
            alpha: n.alpha,
            power,
            psi: n.psi,
            noise: n.noise,
            rate: n.rate,
            d0: n.d0,
            zeta: n.zeta,
        };
        network.validate().context("invalid [network] section")?;

        let s = &self.simulation;
        let ensemble = match s.ensemble.to_ascii_lowercase().as_str() {
            "mobile" => Ensemble::Mobile,
            "static" => Ensemble::Static,
            other => bail!("unknown ensemble {other:?} (expected mobile or static)"),
        };
        let sim = SimConfig {
            seed: s.seed,
            burn_in_slots: s.burn_in_slots,
            measure_slots: s.measure_slots,
            topology_draws: s.topology_draws,
            exact_relay_dest_distance: s.exact_relay_dest_distance,
            ensemble,
        };
        sim.validate().context("invalid [simulation] section")?;

        let a = &self.analytic;
        let approx = match a.selection.to_ascii_lowercase().as_str() {
            "jensen" => SelectionApprox::Jensen,
            "exact" => SelectionApprox::ExactPoisson,
            other => bail!("unknown selection approximation {other:?} (expected jensen or exact)"),
        };
        if a.db_k_max == 0 || !a.db_term_tol.is_finite() || a.db_term_tol <= 0.0 {
            bail!("analytic.db_k_max and analytic.db_term_tol must be positive");
        }
        let analytic = AnalyticOptions {
            approx,
            db_k_max: a.db_k_max,
            db_term_tol: a.db_term_tol,
            ..AnalyticOptions::default()
        };

        let scenario = Scenario {
            network,
            sim,
            analytic,
            multicell: self.multicell.as_ref().map(|m| MultiCellSettings {
                mu: m.mu,
                truncation_factor: m.truncation_factor,
            }),
            parallel: s.parallel,
        };
        scenario.multicell_config()?;
        Ok(scenario)
    }
}

/// Parses TOML text, applies `key.path=value` overrides, and resolves it.
pub fn load_str(text: &str, overrides: &[String]) -> Result<Scenario> {
    let mut value: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let file: FileConfig = toml::Value::Table(value)
        .try_into()
        .context("config does not match the schema")?;
    file.resolve()
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Scenario> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    load_str(&text, overrides)
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("override {spec:?} is not key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().context("empty override key")?;
    let raw = raw.trim();
    // bare words such as `static` are taken as strings
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("override {key:?}: {p} is not a table"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
