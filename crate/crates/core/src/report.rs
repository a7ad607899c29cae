//! Run reports and CSV output.
//!
//! Report columns:
//!
//! | column | meaning |
//! |---|---|
//! | `method` | `proposed` or `baseline` |
//! | `seed` | run seed |
//! | `axis_name`, `axis_value` | sweep axis, `none` and empty for single runs |
//! | `n_nodes`, `r_s_m`, `r_c_m` | deployment |
//! | `slots` | slots simulated (MAC slots for the throughput bench) |
//! | `total_energy_j` | energy drawn from all nodes |
//! | `mean_active_nodes` | mean awake nodes over tracked slots |
//! | `max_active_nodes` | peak awake nodes over tracked slots |
//! | `pdr` | delivered / sent frames, empty when nothing was sent |
//! | `throughput_bps` | payload bits received per second, averaged over deployed nodes |
//! | `mean_delay_s` | mean enqueue-to-delivery time |
//! | `lost_episodes` | times the tracker lost the target |
//! | `detection_fraction` | slots with a detector over slots the target was detectable |
//! | `config_digest` | generator name and hash of the resolved config |
//!
//! A "step" in the per-step energy series is one tracking slot.

use std::io::Write;
use std::path::Path;

use crate::config::Method;
use crate::energy::EnergyLedger;
use crate::error::{Result, SimError};
use crate::field::NodeId;
use crate::mac::SlotOutcome;
use crate::protocol::ProtocolEvent;

pub const REPORT_HEADER: [&str; 17] = [
    "method",
    "seed",
    "axis_name",
    "axis_value",
    "n_nodes",
    "r_s_m",
    "r_c_m",
    "slots",
    "total_energy_j",
    "mean_active_nodes",
    "max_active_nodes",
    "pdr",
    "throughput_bps",
    "mean_delay_s",
    "lost_episodes",
    "detection_fraction",
    "config_digest",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub method: Method,
    pub seed: u64,
    pub axis_name: String,
    pub axis_value: Option<f64>,
    pub n_nodes: usize,
    pub r_s_m: f64,
    pub r_c_m: f64,
    pub slots: u64,
    pub total_energy_j: f64,
    /// Energy drawn in each slot; not written to the report CSV.
    pub per_step_energy: Vec<f64>,
    pub mean_active_nodes: f64,
    pub max_active_nodes: usize,
    pub pdr: Option<f64>,
    pub throughput_bps: f64,
    pub mean_delay_s: f64,
    pub lost_episodes: u64,
    /// Slots in which the method was tracking; not written to the report CSV.
    pub tracked_slots: u64,
    pub detection_fraction: f64,
    pub config_digest: String,
}

impl RunReport {
    pub fn with_axis(mut self, name: &str, value: f64) -> Self {
        self.axis_name = name.to_string();
        self.axis_value = Some(value);
        self
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.seed.to_string(),
            self.axis_name.clone(),
            self.axis_value.map(sig9).unwrap_or_default(),
            self.n_nodes.to_string(),
            sig9(self.r_s_m),
            sig9(self.r_c_m),
            self.slots.to_string(),
            sig9(self.total_energy_j),
            sig9(self.mean_active_nodes),
            self.max_active_nodes.to_string(),
            self.pdr.map(sig9).unwrap_or_default(),
            sig9(self.throughput_bps),
            sig9(self.mean_delay_s),
            self.lost_episodes.to_string(),
            sig9(self.detection_fraction),
            self.config_digest.clone(),
        ]
    }
}

/// Formats `v` with nine significant digits.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    // Take the exponent after rounding so 9.9999999996 counts as 10.
    let sci = format!("{v:.8e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if !(-6..=15).contains(&exp) {
        return format!("{v:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Writes the report CSV to any writer. Returns the number of data rows.
pub fn write_reports<W: Write>(reports: &[RunReport], out: W) -> std::result::Result<usize, csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(reports.len())
}

/// Writes a header plus one row per report to `path`.
pub fn emit_csv(reports: &[RunReport], path: &Path) -> Result<usize> {
    if reports.is_empty() {
        return Err(SimError::Argument("no reports to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    write_reports(reports, file).map_err(|e| SimError::csv(path, e))
}

/// Reads a report CSV back. Per-step energy and tracked slots are not stored
/// and come back empty.
pub fn parse_csv(path: &Path) -> Result<Vec<RunReport>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| SimError::csv(path, e))?;
    let header = r.headers().map_err(|e| SimError::csv(path, e))?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(SimError::Argument(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| SimError::csv(path, e))?;
        let bad = |col: &str| SimError::Argument(format!("{}: bad {col} value", path.display()));
        let num = |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| bad(REPORT_HEADER[i])) };
        let int = |i: usize| -> Result<u64> { rec[i].parse().map_err(|_| bad(REPORT_HEADER[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(RunReport {
            method: rec[0].parse()?,
            seed: int(1)?,
            axis_name: rec[2].to_string(),
            axis_value: opt(3)?,
            n_nodes: int(4)? as usize,
            r_s_m: num(5)?,
            r_c_m: num(6)?,
            slots: int(7)?,
            total_energy_j: num(8)?,
            per_step_energy: Vec::new(),
            mean_active_nodes: num(9)?,
            max_active_nodes: int(10)? as usize,
            pdr: opt(11)?,
            throughput_bps: num(12)?,
            mean_delay_s: num(13)?,
            lost_episodes: int(14)?,
            tracked_slots: 0,
            detection_fraction: num(15)?,
            config_digest: rec[16].to_string(),
        });
    }
    Ok(out)
}

fn ids(list: &[NodeId]) -> String {
    list.iter().map(|id| id.0.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SimError::csv(path, e))?;
    w.write_record(header).map_err(|e| SimError::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| SimError::csv(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// `slot,kind,ids` with space-separated node ids.
pub fn write_events_csv(events: &[ProtocolEvent], path: &Path) -> Result<()> {
    write_rows(
        path,
        &["slot", "kind", "ids"],
        events
            .iter()
            .map(|e| vec![e.slot.to_string(), e.kind.as_str().to_string(), ids(&e.ids)]),
    )
}

/// `slot,winner,collided,delivered,acked`, one row per non-idle MAC slot.
pub fn write_mac_csv(outcomes: &[SlotOutcome], path: &Path) -> Result<()> {
    write_rows(
        path,
        &["slot", "winner", "collided", "delivered", "acked"],
        outcomes.iter().filter(|o| !o.is_idle()).map(|o| {
            let collided: Vec<NodeId> = o.collided.iter().copied().collect();
            vec![
                o.slot.to_string(),
                o.winner.map(|w| w.0.to_string()).unwrap_or_default(),
                ids(&collided),
                o.delivered.len().to_string(),
                o.acked.to_string(),
            ]
        }),
    )
}

/// `slot,node,mode,debit_j,remaining_j`, one row per ledger debit; `mode` is
/// the mode paid for or the radio/activation reason.
pub fn write_energy_csv(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    let mut remaining = ledger.initial().to_vec();
    write_rows(
        path,
        &["slot", "node", "mode", "debit_j", "remaining_j"],
        ledger.debits().iter().map(move |d| {
            remaining[d.node.0] -= d.applied;
            if remaining[d.node.0] < 0.0 {
                remaining[d.node.0] = 0.0;
            }
            vec![
                d.slot.to_string(),
                d.node.0.to_string(),
                d.reason.as_str().to_string(),
                format!("{:e}", d.applied),
                format!("{:e}", remaining[d.node.0]),
            ]
        }),
    )
}
