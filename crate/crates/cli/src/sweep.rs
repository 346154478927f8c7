//! One-parameter sweeps over schemes and estimation modes.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use wpcrelay_core::{EstimateMode, SchemeId};

use crate::config::{power_from_db, Scenario};
use crate::engine::evaluate;
use crate::report::OutageRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    PowerDb,
    D0,
    Psi,
    Rho,
    Rate,
    Lambda,
    Mu,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 7] = [
        Self::PowerDb,
        Self::D0,
        Self::Psi,
        Self::Rho,
        Self::Rate,
        Self::Lambda,
        Self::Mu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PowerDb => "power_db",
            Self::D0 => "d0",
            Self::Psi => "psi",
            Self::Rho => "rho",
            Self::Rate => "rate",
            Self::Lambda => "lambda",
            Self::Mu => "mu",
        }
    }

    /// `scenario` with this parameter set to `value`.
    pub fn apply(self, value: f64, scenario: &Scenario) -> Result<Scenario> {
        let mut s = *scenario;
        let n = &mut s.network;
        match self {
            Self::PowerDb => n.power = power_from_db(value, n.noise),
            Self::Psi => n.psi = value,
            Self::Rate => n.rate = value,
            Self::Lambda => n.lambda = value,
            Self::D0 | Self::Rho => {
                ensure!(s.multicell.is_none(), "{self} is fixed by mu in the multi-cell model");
                if self == Self::D0 {
                    n.d0 = value;
                } else {
                    n.rho = value;
                }
            }
            Self::Mu => {
                let m = s
                    .multicell
                    .as_mut()
                    .context("sweeping mu needs the multi-cell model (--multicell)")?;
                m.mu = value;
            }
        }
        s.network.validate()?;
        s.multicell_config()?;
        Ok(s)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == t)
            .with_context(|| format!("unknown sweep parameter {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub schemes: Vec<SchemeId>,
    pub modes: Vec<EstimateMode>,
}

impl SweepSpec {
    /// Parses the range part `name=from:to:step`.
    pub fn parse_range(text: &str, schemes: Vec<SchemeId>, modes: Vec<EstimateMode>) -> Result<Self> {
        let (name, range) = text.split_once('=').context("sweep must look like name=from:to:step")?;
        let parts: Vec<f64> = range
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number {p:?} in sweep"))
            })
            .collect::<Result<_>>()?;
        let [from, to, step] = parts[..] else {
            bail!("sweep range needs exactly from:to:step");
        };
        let spec = Self {
            parameter: name.parse()?,
            from,
            to,
            step,
            schemes,
            modes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.from.is_finite() && self.to.is_finite(),
            "sweep bounds must be finite"
        );
        ensure!(self.from <= self.to, "sweep needs from <= to");
        ensure!(self.step > 0.0, "sweep step must be positive");
        ensure!(
            !self.schemes.is_empty() && !self.modes.is_empty(),
            "sweep needs at least one scheme and one mode"
        );
        Ok(())
    }

    /// from, from + step, … up to `to` (with a small allowance for rounding).
    /// Values are snapped to 1e-12 so 0.1-style steps print cleanly.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| ((self.from + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// One row per (value, scheme, mode), in that nesting order. Point failures become
/// rows with `error` set; only an invalid spec fails the whole sweep.
pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario) -> Result<Vec<OutageRow>> {
    spec.validate()?;
    let jobs: Vec<(f64, SchemeId, EstimateMode)> = spec
        .values()
        .into_iter()
        .flat_map(|v| {
            spec.schemes
                .iter()
                .flat_map(move |&s| spec.modes.iter().map(move |&m| (v, s, m)))
        })
        .collect();
    let eval = |&(v, scheme, mode): &(f64, SchemeId, EstimateMode)| {
        let r = spec
            .parameter
            .apply(v, scenario)
            .and_then(|s| evaluate(scheme, mode, &s));
        OutageRow::from_result(Some(v), scheme, mode, r)
    };
    Ok(if scenario.parallel {
        jobs.par_iter().map(eval).collect()
    } else {
        jobs.iter().map(eval).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_counts_values() {
        let s =
            SweepSpec::parse_range("power_db=0:60:5", SchemeId::ALL.to_vec(), vec![EstimateMode::Analytic]).unwrap();
        assert_eq!(s.parameter, SweepParameter::PowerDb);
        assert_eq!(s.values().len(), 13);
        assert_eq!(*s.values().last().unwrap(), 60.0);
        let t = SweepSpec::parse_range("psi=0.01:0.1:0.03", vec![SchemeId::Rrs], vec![EstimateMode::Analytic]).unwrap();
        assert_eq!(t.values().len(), 4);
    }

    #[test]
    fn rejects_bad_specs() {
        let s = || SchemeId::ALL.to_vec();
        let m = || vec![EstimateMode::Analytic];
        assert!(SweepSpec::parse_range("power_db=10:0:5", s(), m()).is_err());
        assert!(SweepSpec::parse_range("power_db=0:10:0", s(), m()).is_err());
        assert!(SweepSpec::parse_range("power_db=0:10", s(), m()).is_err());
        assert!(SweepSpec::parse_range("volume=0:10:1", s(), m()).is_err());
        assert!(SweepSpec::parse_range("power_db=0:10:1", vec![], m()).is_err());
    }

    #[test]
    fn errors_stay_in_row() {
        let spec =
            SweepSpec::parse_range("lambda=0.5:1:0.5", vec![SchemeId::Rcs], vec![EstimateMode::Asymptotic]).unwrap();
        let rows = run_sweep(&spec, &Scenario::default()).unwrap();
        assert_eq!(rows.len(), 2);
        // the RCS moderate asymptote is only defined for alpha = 2
        assert!(rows.iter().all(|r| r.error.is_some() && r.value.is_none()));
    }

    #[test]
    fn mu_sweep_needs_multicell() {
        let spec = SweepSpec::parse_range(
            "mu=0.001:0.002:0.001",
            vec![SchemeId::Rrs],
            vec![EstimateMode::Analytic],
        )
        .unwrap();
        let rows = run_sweep(&spec, &Scenario::default()).unwrap();
        assert!(rows[0].error.as_deref().unwrap().contains("multi-cell"));
    }
}
