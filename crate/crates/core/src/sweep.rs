//! Paired parameter sweeps.
//!
//! For every (axis value, seed) both methods run on the same deployment and
//! the same target trajectory. Runs are independent and execute in parallel;
//! output order is always (axis value, seed, method).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bench::throughput_bench;
use crate::config::{Method, ScenarioConfig};
use crate::error::{Result, SimError};
use crate::field::NodeField;
use crate::report::RunReport;
use crate::sim::paired;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    CommRadius,
    NodeCount,
    DataRate,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::CommRadius => "comm-radius",
            Axis::NodeCount => "node-count",
            Axis::DataRate => "data-rate",
        }
    }

    /// `base` with this axis set to `value`, validated.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            Axis::CommRadius => cfg.field.r_c = value,
            Axis::NodeCount => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(SimError::config(format!("node count must be a positive integer, got {value}")));
                }
                cfg.field.n_nodes = value as usize;
            }
            Axis::DataRate => {
                cfg.slots.data_rate = value;
                cfg.refit();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comm-radius" => Ok(Axis::CommRadius),
            "node-count" => Ok(Axis::NodeCount),
            "data-rate" => Ok(Axis::DataRate),
            other => Err(SimError::config(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub reports: Vec<RunReport>,
    /// Axis values that were skipped, with the reason.
    pub warnings: Vec<String>,
}

fn valid_configs(base: &ScenarioConfig, axis: Axis, values: &[f64], warnings: &mut Vec<String>) -> Vec<(f64, ScenarioConfig)> {
    let mut out = Vec::new();
    for v in values {
        match axis.apply(base, *v) {
            Ok(cfg) => out.push((*v, cfg)),
            Err(SimError::Config(msg)) => warnings.push(format!("skipping {axis} = {v}: {msg}")),
            Err(e) => warnings.push(format!("skipping {axis} = {v}: {e}")),
        }
    }
    out
}

/// One paired run per (axis value, seed).
pub fn sweep(base: &ScenarioConfig, axis: Axis, values: &[f64], seeds: &[u64]) -> Result<SweepOutput> {
    let mut out = SweepOutput::default();
    let jobs: Vec<(f64, ScenarioConfig)> = valid_configs(base, axis, values, &mut out.warnings)
        .into_iter()
        .flat_map(|(v, cfg)| seeds.iter().map(move |s| (v, cfg.clone().with_seed(*s))))
        .collect();
    let results: Vec<Result<[RunReport; 2]>> = jobs
        .par_iter()
        .map(|(v, cfg)| {
            let (p, b) = paired(cfg)?;
            Ok([
                p.report.with_axis(axis.as_str(), *v),
                b.report.with_axis(axis.as_str(), *v),
            ])
        })
        .collect();
    for r in results {
        out.reports.extend(r?);
    }
    Ok(out)
}

/// The throughput benchmark at each rate and seed, with ACK and CRC on and
/// then both off.
pub fn throughput_sweep(base: &ScenarioConfig, rates: &[f64], seeds: &[u64]) -> Result<SweepOutput> {
    let mut out = SweepOutput::default();
    let valid = valid_configs(base, Axis::DataRate, rates, &mut out.warnings);
    let mut jobs = Vec::new();
    for ack_crc in [true, false] {
        for (rate, _) in &valid {
            for seed in seeds {
                jobs.push((ack_crc, *rate, *seed));
            }
        }
    }
    let results: Vec<Result<[RunReport; 2]>> = jobs
        .par_iter()
        .map(|(ack_crc, rate, seed)| {
            let cfg = base.clone().with_seed(*seed);
            let field = NodeField::deploy(&cfg.field, cfg.mode_costs.initial_energy)?;
            Ok([
                throughput_bench(&cfg, &field, Method::Proposed, *rate, *ack_crc)?,
                throughput_bench(&cfg, &field, Method::Baseline, *rate, *ack_crc)?,
            ])
        })
        .collect();
    for r in results {
        out.reports.extend(r?);
    }
    Ok(out)
}

/// Parses `a..b` (inclusive) or a comma list of seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| SimError::config(format!("bad seed range {s:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| SimError::config(format!("bad seed range {s:?}")))?;
        if b < a {
            return Err(SimError::config(format!("empty seed range {s:?}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| SimError::config(format!("bad seed {t:?}"))))
        .collect()
}

/// Parses a comma list of axis values.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| SimError::config(format!("bad axis value {t:?}"))))
        .collect()
}
