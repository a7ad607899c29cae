//! The slot loop.
//!
//! Each slot: read the target position from the trajectory, let the method
//! decide who is awake and what gets sent, run the MAC over the slot, settle
//! energy, and accumulate metrics. Both methods consume the same deployment
//! and trajectory when run from the same seed.

use crate::config::{Method, ScenarioConfig};
use crate::energy::{EnergyLedger, KahanSum};
use crate::error::Result;
use crate::field::{NodeField, NodeMode, Point};
use crate::mac::{DrainReport, Frame, FrameKind, MacService, SlotOutcome};
use crate::metrics::{self, MetricCounters};
use crate::mobility::Trajectory;
use crate::protocol::{Episode, EventKind, ProtocolEvent, TrackerState, TrackingProtocol};
use crate::report::RunReport;

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    /// True target position, if inside the area.
    pub target: Option<Point>,
    /// Tracker episode during the slot (proposed method only).
    pub episode: Option<Episode>,
    /// The method was tracking the target in this slot.
    pub tracked: bool,
    pub alive: usize,
    /// Nodes awake during the slot.
    pub awake: usize,
    /// Nodes left awake for the next slot.
    pub awake_after: usize,
    pub detectors: usize,
    /// The target was within sensing range of at least one alive node.
    pub detectable: bool,
    pub energy: f64,
}

/// A finished run with everything needed to audit it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub records: Vec<SlotRecord>,
    pub events: Vec<ProtocolEvent>,
    pub mac: Vec<SlotOutcome>,
    pub ledger: EnergyLedger,
    pub field: NodeField,
}

/// Deploys the field and generates the trajectory for `cfg`.
pub fn prepare(cfg: &ScenarioConfig) -> Result<(NodeField, Trajectory)> {
    cfg.validate()?;
    let field = NodeField::deploy(&cfg.field, cfg.mode_costs.initial_energy)?;
    let trajectory = Trajectory::generate(&cfg.mobility, &cfg.field, cfg.max_slots as usize)?;
    Ok((field, trajectory))
}

pub fn run(cfg: &ScenarioConfig) -> Result<RunReport> {
    let (field, trajectory) = prepare(cfg)?;
    Ok(simulate(cfg, field, &trajectory)?.report)
}

/// Runs `cfg` with every node sensing all the time.
pub fn run_baseline(cfg: &ScenarioConfig) -> Result<RunReport> {
    run(&cfg.clone().with_method(Method::Baseline))
}

struct Accumulator {
    counters: MetricCounters,
    bits_per_node: Vec<u64>,
    mac_slot: f64,
    outcomes: Vec<SlotOutcome>,
}

impl Accumulator {
    fn absorb(&mut self, report: DrainReport) -> Result<()> {
        self.counters.record_sent(report.enqueued as u64);
        for (f, at) in &report.delivered {
            self.bits_per_node[f.dst.0] += f.bits;
            self.counters
                .record_received(f.bits, f.enqueued_slot as f64 * self.mac_slot, *at as f64 * self.mac_slot)?;
        }
        self.outcomes.extend(report.outcomes);
        Ok(())
    }
}

/// Runs `cfg.method` over an explicit field and trajectory.
pub fn simulate(cfg: &ScenarioConfig, mut field: NodeField, trajectory: &Trajectory) -> Result<RunOutput> {
    cfg.validate()?;
    let t = cfg.mobility.slot_duration;
    let mut mac = MacService::new(&cfg.slots, cfg.seed, t)?;
    if cfg.method == Method::Baseline {
        field.set_all_modes(NodeMode::Detect);
    }
    let mut ledger = EnergyLedger::new(&field, cfg.mode_costs.e_ix);
    let protocol = TrackingProtocol {
        config: cfg.protocol.clone(),
        slot_duration: t,
        speed_prior: cfg.mobility.v_max,
        notice_bits: cfg.slots.data_packet_bits,
        wake_bits: cfg.slots.control_packet_bits,
    };
    let mut tracker = TrackerState::default();
    let mut acc = Accumulator {
        counters: MetricCounters::default(),
        bits_per_node: vec![0; field.len()],
        mac_slot: cfg.slots.slot_duration,
        outcomes: Vec::new(),
    };
    let mut records = Vec::with_capacity(cfg.max_slots as usize);
    let mut events = Vec::new();
    let mut outcomes_start;

    for slot in 0..cfg.max_slots {
        let target = trajectory
            .position(slot as usize)
            .filter(|p| field.config().contains(*p));
        let alive = field.alive_count();
        let detectable = target.is_some_and(|p| !field.detectors_of(p).is_empty());
        outcomes_start = acc.outcomes.len();

        let (modes, awake, detectors, episode, tracked) = match cfg.method {
            Method::Proposed => {
                let step = protocol.tracking_step(&tracker, &mut field, target, &mut mac, slot)?;
                for r in step.mac {
                    acc.absorb(r)?;
                }
                events.extend(step.events);
                tracker = step.tracker;
                (
                    step.modes_during,
                    step.awake_during.len(),
                    step.detectors.len(),
                    Some(step.episode_during),
                    step.episode_during == Episode::Tracking,
                )
            }
            Method::Baseline => {
                mac.begin_step(slot);
                field.set_all_modes(NodeMode::Detect);
                let modes = field.modes();
                let awake = field.awake().len();
                let detectors = target.map(|p| field.awake_detectors_of(p)).unwrap_or_default();
                if let Some(sink) = detectors.first().copied() {
                    let frames = detectors
                        .iter()
                        .filter(|id| **id != sink)
                        .map(|id| Frame::new(*id, sink, FrameKind::DataPayload, cfg.slots.data_packet_bits, 0))
                        .collect::<Result<Vec<_>>>()?;
                    acc.absorb(mac.exchange(&field, frames)?)?;
                }
                (modes, awake, detectors.len(), None, target.is_some() && alive > 0)
            }
        };

        let energy = ledger.settle_slot(
            slot,
            &field,
            &modes,
            &acc.outcomes[outcomes_start..],
            &cfg.radio,
            &cfg.mode_costs,
        )?;
        ledger.sync_field(&mut field)?;
        records.push(SlotRecord {
            slot,
            target,
            episode,
            tracked,
            alive,
            awake,
            awake_after: field.awake().len(),
            detectors,
            detectable,
            energy,
        });
    }

    let report = summarize(cfg, &field, &records, &events, &acc)?;
    Ok(RunOutput {
        report,
        records,
        events,
        mac: acc.outcomes,
        ledger,
        field,
    })
}

fn summarize(
    cfg: &ScenarioConfig,
    field: &NodeField,
    records: &[SlotRecord],
    events: &[ProtocolEvent],
    acc: &Accumulator,
) -> Result<RunReport> {
    let per_step_energy: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let total: KahanSum = per_step_energy.iter().copied().collect();
    let tracked: Vec<&SlotRecord> = records.iter().filter(|r| r.tracked).collect();
    let awake_sum: usize = tracked.iter().map(|r| r.awake).sum();
    let mean_active = if tracked.is_empty() {
        0.0
    } else {
        awake_sum as f64 / tracked.len() as f64
    };
    let detectable = records.iter().filter(|r| r.detectable).count();
    let detected = records.iter().filter(|r| r.detectable && r.detectors > 0).count();
    let elapsed = records.len() as f64 * cfg.mobility.slot_duration;
    Ok(RunReport {
        method: cfg.method,
        seed: cfg.seed,
        axis_name: "none".to_string(),
        axis_value: None,
        n_nodes: field.len(),
        r_s_m: cfg.field.r_s,
        r_c_m: cfg.field.r_c,
        slots: records.len() as u64,
        total_energy_j: total.value(),
        per_step_energy,
        mean_active_nodes: mean_active,
        max_active_nodes: tracked.iter().map(|r| r.awake).max().unwrap_or(0),
        pdr: metrics::pdr(&acc.counters),
        throughput_bps: metrics::mean_node_throughput(&acc.bits_per_node, elapsed)?,
        mean_delay_s: acc.counters.mean_delay().unwrap_or(0.0),
        lost_episodes: events.iter().filter(|e| e.kind == EventKind::TargetLost).count() as u64,
        tracked_slots: tracked.len() as u64,
        detection_fraction: if detectable == 0 {
            0.0
        } else {
            detected as f64 / detectable as f64
        },
        config_digest: cfg.digest(),
    })
}

/// Runs both methods on one shared deployment and trajectory.
pub fn paired(cfg: &ScenarioConfig) -> Result<(RunOutput, RunOutput)> {
    let (field, trajectory) = prepare(cfg)?;
    let proposed = simulate(&cfg.clone().with_method(Method::Proposed), field.clone(), &trajectory)?;
    let baseline = simulate(&cfg.clone().with_method(Method::Baseline), field, &trajectory)?;
    Ok((proposed, baseline))
}

