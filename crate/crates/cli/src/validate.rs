//! Cross-engine and limit checks, reported per acceptance criterion.

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use wpcrelay_core::model::cell_radius;
use wpcrelay_core::multicell::{laplace_interference, outage_multicell, outage_multicell_floor, InterferenceSpec};
use wpcrelay_core::numerics::{bessel_i0, gauss_2f1, integrate_1d, lower_incomplete_gamma, QuadratureSpec};
use wpcrelay_core::outage::{outage_db_with, outage_floor, outage_with};
use wpcrelay_core::sim::SimConfig;
use wpcrelay_core::steady_state::steady_state_with;
use wpcrelay_core::{EstimateMode, MultiCellConfig, NetworkConfig, SchemeId, SelectionApprox};

use crate::config::{power_from_db, Scenario};
use crate::engine::{simulate_outage, simulate_outage_multicell, simulate_steady_state};
use crate::report::VERSION;
use crate::sweep::{run_sweep, SweepSpec};

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// Relative band allowed between the DB series and the exact-distance simulator.
pub const DB_EXACT_DISTANCE_BAND: f64 = 0.30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn within(label: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            expected,
            tolerance,
            passed: (measured - expected).abs() <= tolerance,
        }
    }

    /// A check whose verdict is not a plain distance, e.g. an ordering.
    pub fn holds(label: impl Into<String>, measured: f64, expected: f64, passed: bool) -> Self {
        Self {
            label: label.into(),
            measured,
            expected,
            tolerance: 0.0,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl CriterionResult {
    fn from_checks(id: u8, checks: Result<Vec<Check>>) -> Self {
        let title = title(id);
        match checks {
            Ok(checks) => Self {
                id,
                title,
                passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
                checks,
                error: None,
            },
            Err(e) => Self {
                id,
                title,
                passed: false,
                checks: Vec::new(),
                error: Some(format!("{e:#}")),
            },
        }
    }

    /// `PASS`/`FAIL`, the criterion, and its worst check.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let detail = match (&self.error, self.checks.iter().find(|c| !c.passed)) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => format!(
                "{failed}/{} checks failed, first: {} measured {:.6e} expected {:.6e}",
                self.checks.len(),
                c.label,
                c.measured,
                c.expected
            ),
            (None, None) => format!("{} checks", self.checks.len()),
        };
        format!("[{verdict}] criterion {}: {} ({detail})", self.id, self.title)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub version: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidateOptions {
    /// Criteria to run; empty means all.
    pub criteria: Vec<u8>,
    /// Test hook: replaces η₁ of RRS/RCS in the floor-ordering check.
    pub corrupt_eta1: Option<f64>,
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "single-cell analytic outage agrees with simulation",
        2 => "DB series agrees with clamped and exact-distance simulation",
        3 => "high-power outage reaches the floors, floors are ordered",
        4 => "battery steady state",
        5 => "floors do not depend on the rate",
        6 => "multi-cell analytic outage agrees with simulation",
        7 => "special functions and quadrature",
        8 => "determinism across runs and scheduling",
        _ => "unknown criterion",
    }
}

pub fn validate(scenario: &Scenario, options: &ValidateOptions) -> ValidationReport {
    let ids: Vec<u8> = if options.criteria.is_empty() {
        CRITERIA.to_vec()
    } else {
        options.criteria.clone()
    };
    let criteria: Vec<CriterionResult> = ids.iter().map(|&id| run_criterion(id, scenario, options)).collect();
    ValidationReport {
        version: VERSION,
        seed: scenario.sim.seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

pub fn run_criterion(id: u8, scenario: &Scenario, options: &ValidateOptions) -> CriterionResult {
    let checks = match id {
        1 => single_cell_agreement(scenario),
        2 => db_agreement(scenario),
        3 => floors(scenario, options.corrupt_eta1),
        4 => steady_state_checks(scenario),
        5 => rate_invariance(scenario),
        6 => multicell_agreement(scenario),
        7 => numerics(),
        8 => determinism(scenario),
        _ => Err(anyhow::anyhow!("no criterion {id}")),
    };
    CriterionResult::from_checks(id, checks)
}

const POWERS_DB: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];

fn at(base: &NetworkConfig, lambda: f64, db: f64) -> NetworkConfig {
    NetworkConfig {
        lambda,
        power: power_from_db(db, base.noise),
        ..*base
    }
}

fn map_points<T, F>(points: &[T], parallel: bool, f: F) -> Result<Vec<Check>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Check>> + Sync,
{
    let nested: Vec<Vec<Check>> = if parallel {
        points.par_iter().map(&f).collect::<Result<_>>()?
    } else {
        points.iter().map(&f).collect::<Result<_>>()?
    };
    Ok(nested.into_iter().flatten().collect())
}

fn single_cell_agreement(s: &Scenario) -> Result<Vec<Check>> {
    let points: Vec<(f64, f64, SchemeId)> = [0.5, 1.0]
        .into_iter()
        .flat_map(|l| {
            POWERS_DB
                .into_iter()
                .flat_map(move |db| SchemeId::SINGLE_RELAY.into_iter().map(move |k| (l, db, k)))
        })
        .collect();
    map_points(&points, s.parallel, |&(lambda, db, scheme)| {
        let net = at(&s.network, lambda, db);
        let ana = outage_with(scheme, &net, &s.analytic)?.value;
        let sim = simulate_outage(scheme, &net, &s.sim, s.parallel)?;
        let se = sim.stderr.unwrap_or(0.0);
        Ok(vec![Check::within(
            format!("{scheme} lambda={lambda} P={db}dB"),
            sim.value,
            ana,
            3.0 * se,
        )])
    })
}

fn db_agreement(s: &Scenario) -> Result<Vec<Check>> {
    let points: Vec<(f64, f64)> = [0.5, 1.0]
        .into_iter()
        .flat_map(|l| POWERS_DB.map(|db| (l, db)))
        .collect();
    map_points(&points, s.parallel, |&(lambda, db)| {
        let net = at(&s.network, lambda, db);
        let ana = outage_db_with(&net, &s.analytic)?.estimate.value;
        let clamped = SimConfig {
            exact_relay_dest_distance: false,
            ..s.sim
        };
        let exact = SimConfig {
            exact_relay_dest_distance: true,
            ..s.sim
        };
        let c = simulate_outage(SchemeId::Db, &net, &clamped, s.parallel)?;
        let e = simulate_outage(SchemeId::Db, &net, &exact, s.parallel)?;
        Ok(vec![
            Check::within(
                format!("DB clamped lambda={lambda} P={db}dB"),
                c.value,
                ana,
                3.0 * c.stderr.unwrap_or(0.0),
            ),
            Check::within(
                format!("DB exact distance lambda={lambda} P={db}dB"),
                e.value,
                ana,
                3.0 * e.stderr.unwrap_or(0.0) + DB_EXACT_DISTANCE_BAND * ana,
            ),
        ])
    })
}

fn floors(s: &Scenario, corrupt_eta1: Option<f64>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let net = at(&s.network, s.network.lambda, 60.0);
    for scheme in [SchemeId::Rrs, SchemeId::Rcs, SchemeId::Db] {
        let v = outage_with(scheme, &net, &s.analytic)?.value;
        let f = outage_floor(scheme, &net)?.value;
        checks.push(Check::within(
            format!("{scheme} at 60dB vs floor"),
            v,
            f,
            0.02 * f + 1e-4,
        ));
    }
    let area = std::f64::consts::PI * net.rho * net.rho;
    for mean in [10.0, 20.0, 50.0, 100.0] {
        let c = NetworkConfig {
            lambda: mean / area,
            ..net
        };
        let floor = |k| outage_floor(k, &c).map(|e| e.value);
        let (mut rrs, mut rcs) = (floor(SchemeId::Rrs)?, floor(SchemeId::Rcs)?);
        if let Some(eta1) = corrupt_eta1 {
            rrs = 1.0 - eta1;
            rcs = 1.0 - eta1;
        }
        let (rrsb, rcsb, db) = (floor(SchemeId::Rrsb)?, floor(SchemeId::Rcsb)?, floor(SchemeId::Db)?);
        let tag = format!("mean count {mean}");
        checks.push(Check::within(
            format!("{tag}: RCSB floor = RRSB floor"),
            rcsb,
            rrsb,
            1e-12,
        ));
        checks.push(Check::within(format!("{tag}: RCS floor = RRS floor"), rcs, rrs, 1e-12));
        checks.push(Check::holds(
            format!("{tag}: RRSB floor < DB floor"),
            rrsb,
            db,
            rrsb < db,
        ));
        checks.push(Check::holds(format!("{tag}: DB floor < RRS floor"), db, rrs, db < rrs));
    }
    Ok(checks)
}

fn jensen_gap(scheme: SchemeId, c: &NetworkConfig) -> Result<f64> {
    let j = steady_state_with(scheme, c, SelectionApprox::Jensen)?.eta1;
    let e = steady_state_with(scheme, c, SelectionApprox::ExactPoisson)?.eta1;
    Ok((j - e).abs())
}

fn steady_state_checks(s: &Scenario) -> Result<Vec<Check>> {
    let points: Vec<(f64, SchemeId)> = [0.5, 1.0]
        .into_iter()
        .flat_map(|l| SchemeId::ALL.map(|k| (l, k)))
        .collect();
    let mut checks = map_points(&points, s.parallel, |&(lambda, scheme)| {
        let c = NetworkConfig { lambda, ..s.network };
        let ana = steady_state_with(scheme, &c, SelectionApprox::Jensen)?.eta1;
        let gap = jensen_gap(scheme, &c)?;
        let sim = simulate_steady_state(scheme, &c, &s.sim, s.parallel)?;
        let mut v = vec![Check::within(
            format!("{scheme} eta1 lambda={lambda}"),
            sim.eta1,
            ana,
            3.0 * sim.eta1_stderr + gap,
        )];
        if scheme == SchemeId::Db {
            v.push(Check::within(
                format!("DB discharge probability lambda={lambda}"),
                sim.pi1,
                1.0,
                0.0,
            ));
        }
        Ok(v)
    })?;

    let lambdas = [0.25, 0.5, 1.0, 2.0, 5.0];
    for psi in [0.05, 0.1, 0.3] {
        let mut db = Vec::new();
        for lambda in lambdas {
            let c = NetworkConfig {
                lambda,
                psi,
                ..s.network
            };
            let rrs = steady_state_with(SchemeId::Rrs, &c, SelectionApprox::Jensen)?.eta1;
            let rrsb = steady_state_with(SchemeId::Rrsb, &c, SelectionApprox::Jensen)?.eta1;
            checks.push(Check::within(
                format!("eta1 RRS = 1/(2 - eta1 RRSB) psi={psi} lambda={lambda}"),
                rrs,
                1.0 / (2.0 - rrsb),
                1e-12,
            ));
            db.push(steady_state_with(SchemeId::Db, &c, SelectionApprox::Jensen)?.eta1);
        }
        let max = db.iter().copied().fold(f64::MIN, f64::max);
        let min = db.iter().copied().fold(f64::MAX, f64::min);
        checks.push(Check::holds(format!("eta1 DB <= 0.5 psi={psi}"), max, 0.5, max <= 0.5));
        checks.push(Check::within(
            format!("eta1 DB lambda spread psi={psi}"),
            max - min,
            0.0,
            1e-12,
        ));
    }
    for scheme in [SchemeId::Rrs, SchemeId::Rrsb] {
        let gaps = lambdas
            .iter()
            .map(|&lambda| jensen_gap(scheme, &NetworkConfig { lambda, ..s.network }))
            .collect::<Result<Vec<f64>>>()?;
        let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::holds(
            format!("{scheme} Jensen gap shrinks with lambda"),
            *gaps.last().unwrap_or(&0.0),
            gaps[0],
            shrinking,
        ));
    }
    Ok(checks)
}

fn rate_invariance(s: &Scenario) -> Result<Vec<Check>> {
    let base = NetworkConfig {
        lambda: 1.0,
        d0: s.network.rho,
        ..s.network
    };
    SchemeId::ALL
        .into_iter()
        .map(|scheme| {
            let a = outage_floor(scheme, &NetworkConfig { rate: 0.1, ..base })?.value;
            let b = outage_floor(scheme, &NetworkConfig { rate: 1.5, ..base })?.value;
            Ok(Check::within(format!("{scheme} floor at r0=0.1 vs 1.5"), b, a, 1e-12))
        })
        .collect()
}

fn multicell_agreement(s: &Scenario) -> Result<Vec<Check>> {
    let base = NetworkConfig {
        lambda: 0.5,
        rate: 0.001,
        ..s.network
    };
    let factor = s
        .multicell
        .map_or(crate::config::DEFAULT_TRUNCATION_FACTOR, |m| m.truncation_factor);
    let cell =
        |mu: f64, db: f64| MultiCellConfig::with_truncation(at(&base, base.lambda, db), mu, factor * cell_radius(mu));
    let points: Vec<(f64, f64, SchemeId)> = [0.001, 0.005]
        .into_iter()
        .flat_map(|mu| {
            POWERS_DB
                .into_iter()
                .flat_map(move |db| SchemeId::SINGLE_RELAY.map(|k| (mu, db, k)))
        })
        .collect();
    let mut checks = map_points(&points, s.parallel, |&(mu, db, scheme)| {
        let mc = cell(mu, db)?;
        let ana = outage_multicell(scheme, &mc)?.value;
        let sim = simulate_outage_multicell(scheme, &mc, &s.sim, s.parallel)?;
        Ok(vec![Check::within(
            format!("{scheme} mu={mu} P={db}dB"),
            sim.value,
            ana,
            3.0 * sim.stderr.unwrap_or(0.0),
        )])
    })?;
    for mu in [0.001, 0.005] {
        let mc = cell(mu, 30.0)?;
        let rrs = outage_multicell_floor(SchemeId::Rrs, &mc)?.value;
        let rcs = outage_multicell_floor(SchemeId::Rcs, &mc)?.value;
        let single = outage_floor(SchemeId::Rrs, mc.base())?.value;
        checks.push(Check::holds(
            format!("mu={mu}: multi-cell RRS floor > single-cell floor"),
            rrs,
            single,
            rrs > single,
        ));
        checks.push(Check::holds(
            format!("mu={mu}: RCS floor <= RRS floor"),
            rcs,
            rrs,
            rcs <= rrs,
        ));
    }
    Ok(checks)
}

fn numerics() -> Result<Vec<Check>> {
    let mut checks = vec![
        Check::within(
            "gamma(1, 1)",
            lower_incomplete_gamma(1.0, 1.0)?,
            1.0 - (-1.0f64).exp(),
            1e-10,
        ),
        Check::within(
            "gamma(1/2, 1)",
            lower_incomplete_gamma(0.5, 1.0)?,
            1.493_648_265_624_854,
            1e-10,
        ),
        Check::within("I0(0)", bessel_i0(0.0)?, 1.0, 1e-10),
    ];
    for (a, b, x) in [(0.5, 1.5, 0.3), (1.0, 2.0, 0.05), (2.5, 0.7, 0.9), (1.0, 2.0, 0.5)] {
        checks.push(Check::within(
            format!("2F1({a}, {b}; {b}; {x})"),
            gauss_2f1(a, b, b, x)?,
            (1.0 - x).powf(-a),
            1e-10,
        ));
    }
    for mu in [0.001, 0.005] {
        let spec = InterferenceSpec::new(mu, cell_radius(mu), 3.0)?;
        checks.push(Check::within(
            format!("L(0) mu={mu}"),
            laplace_interference(0.0, &spec)?,
            1.0,
            1e-10,
        ));
    }
    let quad = QuadratureSpec::new(1e-13, 1e-15, 64)?;
    let polys: [&[f64]; 3] = [
        &[1.0, 1.0, -3.0, 2.0, -1.0, 0.5],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        &[-2.0, 0.0, 4.0],
    ];
    for (i, c) in polys.iter().enumerate() {
        let (lo, hi) = (-0.5f64, 2.0f64);
        let exact: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k + 1) as f64)
            .sum();
        let got = integrate_1d(|x| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck), lo, hi, &quad)?;
        checks.push(Check::within(
            format!("polynomial {i} degree {}", c.len() - 1),
            got,
            exact,
            1e-12,
        ));
    }
    Ok(checks)
}

fn determinism(s: &Scenario) -> Result<Vec<Check>> {
    let small = Scenario {
        sim: SimConfig {
            burn_in_slots: 100,
            measure_slots: 500,
            topology_draws: 4,
            ..s.sim
        },
        ..*s
    };
    let spec = SweepSpec::parse_range(
        "power_db=10:30:10",
        SchemeId::ALL.to_vec(),
        vec![EstimateMode::Analytic, EstimateMode::Simulated],
    )?;
    let parallel = Scenario {
        parallel: true,
        ..small
    };
    let serial = Scenario {
        parallel: false,
        ..small
    };
    let a = run_sweep(&spec, &parallel)?;
    let b = run_sweep(&spec, &parallel)?;
    let c = run_sweep(&spec, &serial)?;
    let bits = |rows: &[crate::report::OutageRow]| -> Vec<Option<u64>> {
        rows.iter().map(|r| r.value.map(f64::to_bits)).collect()
    };
    let differ = |x: &[crate::report::OutageRow], y: &[crate::report::OutageRow]| {
        bits(x).iter().zip(bits(y).iter()).filter(|(p, q)| p != q).count() as f64
            + (x.len() as f64 - y.len() as f64).abs()
    };
    Ok(vec![
        Check::within("rows differing between two parallel runs", differ(&a, &b), 0.0, 0.0),
        Check::within(
            "rows differing between parallel and serial runs",
            differ(&a, &c),
            0.0,
            0.0,
        ),
        Check::holds(
            "rows produced",
            a.len() as f64,
            30.0,
            a.len() == 30 && a.iter().all(|r| r.error.is_none()),
        ),
    ])
}
