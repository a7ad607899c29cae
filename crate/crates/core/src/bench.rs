//! Fixed-load throughput benchmark.
//!
//! An origin node sends a fixed batch of equal-size packets to one neighbour.
//! Under the proposed method the rest of the neighbourhood is asleep, so the
//! origin has the channel to itself. Under the baseline every neighbour of the
//! origin is awake and keeps the channel busy with its own reports. Throughput
//! is the origin's delivered payload over the time the batch took.

use std::collections::BTreeSet;

use crate::config::{Method, ScenarioConfig};
use crate::energy::{EnergyLedger, ModeCosts};
use crate::error::{Result, SimError};
use crate::field::{distance, NodeField, NodeId, NodeMode, Point};
use crate::mac::{drain_queue, Frame, FrameKind, RangeDomains, TrafficSource};
use crate::metrics::{self, MetricCounters};
use crate::report::RunReport;
use crate::rng::SlotDraws;

pub const BENCH_FRAMES: usize = 3000;
/// Hard cap on MAC slots per batch.
pub const BENCH_SLOT_BUDGET: u64 = 10_000_000;

pub const AXIS_ACK_CRC: &str = "data-rate";
pub const AXIS_NO_ACK_CRC: &str = "data-rate-no-ack-crc";

/// The node nearest the area centre that has a neighbour, and its nearest
/// neighbour.
pub fn pick_pair(field: &NodeField) -> Result<(NodeId, NodeId)> {
    let fc = field.config();
    let centre = Point::new(fc.area_width / 2.0, fc.area_height / 2.0);
    let mut ranked: Vec<NodeId> = field.nodes().iter().filter(|n| n.alive()).map(|n| n.id).collect();
    ranked.sort_by(|a, b| {
        let da = distance(field.nodes()[a.0].pos, centre);
        let db = distance(field.nodes()[b.0].pos, centre);
        da.total_cmp(&db).then(a.cmp(b))
    });
    for origin in ranked {
        let neighbours = field.neighbors_of(origin)?;
        let pos = field.position(origin)?;
        if let Some(dest) = field.k_closest(pos, 1, &neighbours).first() {
            return Ok((origin, *dest));
        }
    }
    Err(SimError::config("no node has a neighbour within communication range"))
}

/// One batch at `data_rate` bits/s with ACK and CRC both on or both off.
pub fn throughput_bench(
    base: &ScenarioConfig,
    field: &NodeField,
    method: Method,
    data_rate: f64,
    ack_crc: bool,
) -> Result<RunReport> {
    let mut cfg = base.clone().with_method(method);
    cfg.slots.data_rate = data_rate;
    cfg.slots.ack_enabled = ack_crc;
    cfg.slots.crc_enabled = ack_crc;
    cfg.refit();
    cfg.slots.validate()?;

    let (origin, dest) = pick_pair(field)?;
    let bits = cfg.slots.data_packet_bits;
    let batch = (0..BENCH_FRAMES)
        .map(|_| Frame::new(origin, dest, FrameKind::DataPayload, bits, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut sources = vec![TrafficSource::Finite(batch)];
    let mut background = BTreeSet::new();
    if method == Method::Baseline {
        for n in field.neighbors_of(origin)? {
            if n != dest {
                background.insert(n);
                sources.push(TrafficSource::Saturated(Frame::new(n, dest, FrameKind::DataPayload, bits, 0)?));
            }
        }
    }
    let draws = SlotDraws::new(cfg.seed);
    let report = drain_queue(sources, 0, BENCH_SLOT_BUDGET, &cfg.slots, &draws, &RangeDomains { field })?;

    let mac_slot = cfg.slots.slot_duration;
    let mut counters = MetricCounters {
        elapsed: report.slots_used as f64 * mac_slot,
        ..MetricCounters::default()
    };
    counters.record_sent(report.enqueued as u64);
    for (f, at) in &report.delivered {
        counters.record_received(f.bits, f.enqueued_slot as f64 * mac_slot, *at as f64 * mac_slot)?;
    }

    // Radio energy only: the bench has no tracking slots to charge modes for.
    let radio_only = ModeCosts {
        sleep_per_slot: 0.0,
        sense_per_slot: 0.0,
        comm_per_slot: 0.0,
        e_ix: 0.0,
        ..cfg.mode_costs.clone()
    };
    let mut ledger = EnergyLedger::new(field, 0.0);
    let modes = vec![NodeMode::Sleep; field.len()];
    let energy = ledger.settle_slot(0, field, &modes, &report.outcomes, &cfg.radio, &radio_only)?;

    let active = 2 + background.len();
    let throughput = if counters.elapsed > 0.0 {
        metrics::throughput(&counters)?
    } else {
        0.0
    };
    let axis = if ack_crc { AXIS_ACK_CRC } else { AXIS_NO_ACK_CRC };
    Ok(RunReport {
        method,
        seed: cfg.seed,
        axis_name: axis.to_string(),
        axis_value: Some(data_rate),
        n_nodes: field.len(),
        r_s_m: cfg.field.r_s,
        r_c_m: cfg.field.r_c,
        slots: report.slots_used,
        total_energy_j: energy,
        per_step_energy: vec![energy],
        mean_active_nodes: active as f64,
        max_active_nodes: active,
        pdr: metrics::pdr(&counters),
        throughput_bps: throughput,
        mean_delay_s: counters.mean_delay().unwrap_or(0.0),
        lost_episodes: 0,
        tracked_slots: 0,
        detection_fraction: 0.0,
        config_digest: cfg.digest(),
    })
}
