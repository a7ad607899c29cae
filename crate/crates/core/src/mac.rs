//! Slotted p-persistent channel access.
//!
//! A MAC slot opens with a short channel-sensing window, then a data window
//! sized for one frame at the configured data rate, then an ACK window in
//! which the receiver confirms delivery. Every backlogged node transmits with
//! probability `p_persist` in each slot. A lone transmitter wins the slot; two
//! or more collide and, with ACKs enabled, retry until `max_retries` further
//! collisions have been spent. Without ACKs a sender cannot see a collision,
//! so a collided frame is simply lost.
//!
//! Transmit decisions come from [`SlotDraws`], keyed by `(slot, node)`, so the
//! same node makes the same choice in the same slot of any paired run.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Result, SimError};
use crate::field::{distance, NodeField, NodeId};
use crate::rng::SlotDraws;

#[derive(Debug, Clone, PartialEq)]
pub struct SlotConfig {
    /// MAC slot length in seconds.
    pub slot_duration: f64,
    pub data_packet_bits: u64,
    pub control_packet_bits: u64,
    /// Channel bit rate, bits per second.
    pub data_rate: f64,
    pub p_persist: f64,
    pub max_retries: u32,
    pub ack_enabled: bool,
    pub crc_enabled: bool,
    /// Frame check sequence appended when CRC is on.
    pub crc_bits: u64,
    /// Share of the slot spent sensing the channel.
    pub sense_fraction: f64,
}

impl Default for SlotConfig {
    fn default() -> Self {
        let mut cfg = Self {
            slot_duration: 0.0,
            data_packet_bits: 512,
            control_packet_bits: 32,
            data_rate: 1e6,
            p_persist: 0.5,
            max_retries: 5,
            ack_enabled: true,
            crc_enabled: true,
            crc_bits: 32,
            sense_fraction: 0.05,
        };
        cfg.fit_slot_duration();
        cfg
    }
}

impl SlotConfig {
    fn airtime(&self, bits: u64) -> f64 {
        bits as f64 / self.data_rate
    }

    /// Bits a frame with `payload_bits` occupies on air.
    pub fn air_bits(&self, payload_bits: u64) -> u64 {
        payload_bits + if self.crc_enabled { self.crc_bits } else { 0 }
    }

    pub fn data_airtime(&self) -> f64 {
        self.airtime(self.air_bits(self.data_packet_bits.max(self.control_packet_bits)))
    }

    pub fn ack_airtime(&self) -> f64 {
        if self.ack_enabled {
            self.airtime(self.control_packet_bits)
        } else {
            0.0
        }
    }

    pub fn sense_time(&self) -> f64 {
        self.sense_fraction * self.slot_duration
    }

    /// Shortest slot that holds the sensing, data and ACK windows.
    pub fn fit_slot_duration(&mut self) {
        self.slot_duration = (self.data_airtime() + self.ack_airtime()) / (1.0 - self.sense_fraction);
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.data_rate.is_finite() && self.data_rate > 0.0) {
            return Err(SimError::config(format!("data rate must be positive, got {}", self.data_rate)));
        }
        if !(self.p_persist > 0.0 && self.p_persist <= 1.0) {
            return Err(SimError::config(format!("p_persist must lie in (0, 1], got {}", self.p_persist)));
        }
        if self.data_packet_bits == 0 || self.control_packet_bits == 0 {
            return Err(SimError::config("packet sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.sense_fraction) {
            return Err(SimError::config(format!(
                "sense fraction must lie in [0, 1), got {}",
                self.sense_fraction
            )));
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return Err(SimError::config(format!(
                "MAC slot duration must be positive, got {}",
                self.slot_duration
            )));
        }
        let needed = self.data_airtime() + self.ack_airtime() + self.sense_time();
        if needed > self.slot_duration * (1.0 + 1e-12) {
            return Err(SimError::config(format!(
                "slot of {} s cannot hold sense + data + ACK windows ({} s)",
                self.slot_duration, needed
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameKind {
    ObservationNotice,
    WakeMessage,
    DataPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: FrameKind,
    /// Payload bits, excluding CRC.
    pub bits: u64,
    pub enqueued_slot: u64,
}

impl Frame {
    pub fn new(src: NodeId, dst: NodeId, kind: FrameKind, bits: u64, enqueued_slot: u64) -> Result<Self> {
        if bits == 0 {
            return Err(SimError::Argument("frame must carry at least one bit".into()));
        }
        if src == dst {
            return Err(SimError::Argument(format!("frame from node {src} to itself")));
        }
        Ok(Self {
            src,
            dst,
            kind,
            bits,
            enqueued_slot,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadioDirection {
    Tx,
    Rx,
}

/// One frame sent or heard by one node; the unit the energy ledger charges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioEvent {
    pub node: NodeId,
    /// The other end of the link (used for the transmit distance).
    pub peer: NodeId,
    pub direction: RadioDirection,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotOutcome {
    pub slot: u64,
    pub winner: Option<NodeId>,
    pub collided: BTreeSet<NodeId>,
    /// Frames delivered in this slot with their delivery slot.
    pub delivered: Vec<(Frame, u64)>,
    pub acked: bool,
    pub radio: Vec<RadioEvent>,
    pub tx_counts: BTreeMap<NodeId, u64>,
    pub rx_counts: BTreeMap<NodeId, u64>,
}

impl SlotOutcome {
    fn record(&mut self, node: NodeId, peer: NodeId, direction: RadioDirection, bits: u64) {
        let counts = match direction {
            RadioDirection::Tx => &mut self.tx_counts,
            RadioDirection::Rx => &mut self.rx_counts,
        };
        *counts.entry(node).or_insert(0) += 1;
        self.radio.push(RadioEvent {
            node,
            peer,
            direction,
            bits,
        });
    }

    /// Charges the colliding transmitters for their wasted frames.
    pub fn record_collision<'a>(&mut self, frames: impl IntoIterator<Item = &'a Frame>, cfg: &SlotConfig) {
        for f in frames {
            self.record(f.src, f.dst, RadioDirection::Tx, cfg.air_bits(f.bits));
        }
    }

    pub fn is_idle(&self) -> bool {
        self.winner.is_none() && self.collided.is_empty()
    }
}

/// Resolves channel access among `contenders` for one slot. Draws are taken
/// in ascending id order.
pub fn contend(contenders: &BTreeSet<NodeId>, slot: u64, cfg: &SlotConfig, draws: &SlotDraws) -> SlotOutcome {
    let transmitters: Vec<NodeId> = contenders
        .iter()
        .copied()
        .filter(|id| draws.uniform(slot, id.0) < cfg.p_persist)
        .collect();
    let mut out = SlotOutcome {
        slot,
        ..SlotOutcome::default()
    };
    match transmitters.as_slice() {
        [] => {}
        [only] => out.winner = Some(*only),
        many => out.collided = many.iter().copied().collect(),
    }
    out
}

/// Sends `frame` in a slot its source has won.
pub fn transmit(frame: Frame, mut outcome: SlotOutcome, cfg: &SlotConfig, slot: u64) -> Result<SlotOutcome> {
    if outcome.winner != Some(frame.src) {
        return Err(SimError::Protocol(format!(
            "node {} transmitted in slot {} won by {:?}",
            frame.src, slot, outcome.winner
        )));
    }
    let air = cfg.air_bits(frame.bits);
    let window = cfg.slot_duration - cfg.sense_time() - cfg.ack_airtime();
    if air as f64 / cfg.data_rate > window * (1.0 + 1e-12) {
        return Err(SimError::config(format!(
            "{air}-bit frame does not fit the {window} s data window"
        )));
    }
    outcome.slot = slot;
    outcome.record(frame.src, frame.dst, RadioDirection::Tx, air);
    outcome.record(frame.dst, frame.src, RadioDirection::Rx, air);
    if cfg.ack_enabled {
        outcome.record(frame.dst, frame.src, RadioDirection::Tx, cfg.control_packet_bits);
        outcome.record(frame.src, frame.dst, RadioDirection::Rx, cfg.control_packet_bits);
        outcome.acked = true;
    }
    outcome.delivered.push((frame, slot + 1));
    Ok(outcome)
}

/// Frames offered to the channel by one node.
#[derive(Debug, Clone)]
pub enum TrafficSource {
    /// A fixed batch, counted in delivery statistics.
    Finite(Vec<Frame>),
    /// Background load: the node always has a copy of this frame to send.
    /// Occupies the channel but is excluded from delivery statistics.
    Saturated(Frame),
}

impl TrafficSource {
    fn node(&self) -> Option<NodeId> {
        match self {
            TrafficSource::Finite(fs) => fs.first().map(|f| f.src),
            TrafficSource::Saturated(f) => Some(f.src),
        }
    }
}

/// How contenders are split into independent collision domains.
pub trait ContentionDomains {
    fn partition(&self, contenders: &BTreeSet<NodeId>) -> Vec<BTreeSet<NodeId>>;
}

/// Everyone hears everyone.
#[derive(Debug, Clone, Copy, Default)]
pub struct SharedChannel;

impl ContentionDomains for SharedChannel {
    fn partition(&self, contenders: &BTreeSet<NodeId>) -> Vec<BTreeSet<NodeId>> {
        if contenders.is_empty() {
            Vec::new()
        } else {
            vec![contenders.clone()]
        }
    }
}

/// Contenders interfere when linked by a chain of nodes within `r_c` of each
/// other; disjoint groups share the slot.
#[derive(Debug, Clone, Copy)]
pub struct RangeDomains<'a> {
    pub field: &'a NodeField,
}

impl ContentionDomains for RangeDomains<'_> {
    fn partition(&self, contenders: &BTreeSet<NodeId>) -> Vec<BTreeSet<NodeId>> {
        let ids: Vec<NodeId> = contenders.iter().copied().collect();
        let r_c = self.field.config().r_c;
        let pos = |id: NodeId| self.field.nodes().get(id.0).map(|n| n.pos);
        let mut group: Vec<usize> = (0..ids.len()).collect();
        fn root(g: &mut [usize], mut i: usize) -> usize {
            while g[i] != i {
                g[i] = g[g[i]];
                i = g[i];
            }
            i
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                if let (Some(pa), Some(pb)) = (pos(ids[a]), pos(ids[b])) {
                    if distance(pa, pb) <= r_c {
                        let (ra, rb) = (root(&mut group, a), root(&mut group, b));
                        group[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut domains: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let r = root(&mut group, i);
            domains.entry(r).or_default().insert(*id);
        }
        domains.into_values().collect()
    }
}

/// Result of running the channel over a batch of queued frames.
#[derive(Debug, Clone, Default)]
pub struct DrainReport {
    pub outcomes: Vec<SlotOutcome>,
    /// Finite frames that reached their destination, with delivery slot.
    pub delivered: Vec<(Frame, u64)>,
    /// Finite frames lost to collisions, retry exhaustion or the slot budget.
    pub dropped: Vec<Frame>,
    pub enqueued: usize,
    pub slots_used: u64,
}

impl DrainReport {
    pub fn delivered_to(&self, dst: NodeId) -> impl Iterator<Item = &(Frame, u64)> {
        self.delivered.iter().filter(move |(f, _)| f.dst == dst)
    }
}

struct NodeQueue {
    frames: VecDeque<Frame>,
    background: Option<Frame>,
    retries: u32,
}

impl NodeQueue {
    fn head(&self, slot: u64) -> Option<(Frame, bool)> {
        match self.frames.front() {
            Some(f) => Some((f.clone(), true)),
            None => self.background.clone().map(|mut f| {
                f.enqueued_slot = slot;
                (f, false)
            }),
        }
    }
}

/// Runs slots from `start_slot` until every finite queue is empty or `budget`
/// slots have elapsed. Frames still queued at the end are dropped.
pub fn drain_queue(
    sources: Vec<TrafficSource>,
    start_slot: u64,
    budget: u64,
    cfg: &SlotConfig,
    draws: &SlotDraws,
    domains: &dyn ContentionDomains,
) -> Result<DrainReport> {
    let mut queues: BTreeMap<NodeId, NodeQueue> = BTreeMap::new();
    let mut report = DrainReport::default();
    for src in sources {
        let Some(node) = src.node() else { continue };
        let q = queues.entry(node).or_insert_with(|| NodeQueue {
            frames: VecDeque::new(),
            background: None,
            retries: 0,
        });
        match src {
            TrafficSource::Finite(fs) => {
                if let Some(bad) = fs.iter().find(|f| f.src != node) {
                    return Err(SimError::Argument(format!(
                        "queue of node {node} holds a frame from node {}",
                        bad.src
                    )));
                }
                report.enqueued += fs.len();
                q.frames.extend(fs);
            }
            TrafficSource::Saturated(f) => q.background = Some(f),
        }
    }

    let mut pending: usize = report.enqueued;
    let mut slot = start_slot;
    while pending > 0 && slot - start_slot < budget {
        let contenders: BTreeSet<NodeId> = queues
            .iter()
            .filter(|(_, q)| !q.frames.is_empty() || q.background.is_some())
            .map(|(id, _)| *id)
            .collect();
        for domain in domains.partition(&contenders) {
            let skeleton = contend(&domain, slot, cfg, draws);
            if let Some(w) = skeleton.winner {
                let q = queues.get_mut(&w).expect("winner has a queue");
                let (frame, counted) = q.head(slot).expect("winner has a frame");
                let out = transmit(frame, skeleton, cfg, slot)?;
                if counted {
                    q.frames.pop_front();
                    q.retries = 0;
                    pending -= 1;
                    report.delivered.extend(out.delivered.iter().cloned());
                }
                report.outcomes.push(out);
            } else if !skeleton.collided.is_empty() {
                let mut out = skeleton;
                let heads: Vec<(NodeId, Frame, bool)> = out
                    .collided
                    .iter()
                    .map(|id| {
                        let (f, counted) = queues[id].head(slot).expect("collider has a frame");
                        (*id, f, counted)
                    })
                    .collect();
                out.record_collision(heads.iter().map(|(_, f, _)| f), cfg);
                for (id, frame, counted) in heads {
                    if !counted {
                        continue;
                    }
                    let q = queues.get_mut(&id).expect("collider has a queue");
                    q.retries += 1;
                    if !cfg.ack_enabled || q.retries > cfg.max_retries {
                        q.frames.pop_front();
                        q.retries = 0;
                        pending -= 1;
                        report.dropped.push(frame);
                    }
                }
                report.outcomes.push(out);
            } else {
                report.outcomes.push(skeleton);
            }
        }
        slot += 1;
    }
    report.slots_used = slot - start_slot;
    for q in queues.into_values() {
        report.dropped.extend(q.frames);
    }
    Ok(report)
}

/// Channel access for the tracking simulation: each tracking step of length
/// `T` contains `floor(T / slot_duration)` MAC slots, numbered globally.
#[derive(Debug, Clone)]
pub struct MacService {
    cfg: SlotConfig,
    draws: SlotDraws,
    slots_per_step: u64,
    cursor: u64,
    step_end: u64,
}

impl MacService {
    pub fn new(cfg: &SlotConfig, seed: u64, step_duration: f64) -> Result<Self> {
        cfg.validate()?;
        let per_step = (step_duration / cfg.slot_duration).floor();
        if per_step.is_nan() || per_step < 1.0 {
            return Err(SimError::config(format!(
                "MAC slot of {} s does not fit a {} s tracking step",
                cfg.slot_duration, step_duration
            )));
        }
        Ok(Self {
            cfg: cfg.clone(),
            draws: SlotDraws::new(seed),
            slots_per_step: per_step as u64,
            cursor: 0,
            step_end: per_step as u64,
        })
    }

    pub fn config(&self) -> &SlotConfig {
        &self.cfg
    }

    pub fn slots_per_step(&self) -> u64 {
        self.slots_per_step
    }

    /// Positions the service at the first MAC slot of tracking step `step`.
    pub fn begin_step(&mut self, step: u64) {
        self.cursor = step * self.slots_per_step;
        self.step_end = self.cursor + self.slots_per_step;
    }

    /// Global index of the next unused MAC slot.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Sends `frames` in the remainder of the current step. Each frame is
    /// stamped as enqueued at the current cursor.
    pub fn exchange(&mut self, field: &NodeField, frames: Vec<Frame>) -> Result<DrainReport> {
        let start = self.cursor;
        let mut by_src: BTreeMap<NodeId, Vec<Frame>> = BTreeMap::new();
        for mut f in frames {
            f.enqueued_slot = start;
            by_src.entry(f.src).or_default().push(f);
        }
        let sources = by_src.into_values().map(TrafficSource::Finite).collect();
        let budget = self.step_end.saturating_sub(start);
        let report = drain_queue(sources, start, budget, &self.cfg, &self.draws, &RangeDomains { field })?;
        self.cursor = start + report.slots_used;
        Ok(report)
    }
}
