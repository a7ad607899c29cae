//! Node energy accounting.
//!
//! Each slot a node pays the cost of the mode it spent the slot in, plus a
//! one-off activation charge the first time it wakes during a tracking
//! episode, plus first-order radio costs for every frame it puts on air or
//! receives:
//!
//! ```text
//! remaining -= E_tx * N_t + E_rx * N_r + E_ix
//! E_tx(L, d) = E_elect * L + E_amp * L * d^2 (+ fixed per-packet part)
//! E_rx(L)    = E_elect * L (+ fixed per-packet part)
//! ```
//!
//! The network-wide cumulative consumption is tracked as a ledger total rather
//! than debited from any single node.

use std::collections::BTreeMap;

use crate::error::{Result, SimError};
use crate::field::{distance, NodeField, NodeId, NodeMode};
use crate::mac::{RadioDirection, SlotOutcome};

/// First-order radio constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModel {
    /// Electronics energy per bit, J/bit.
    pub e_elect: f64,
    /// Amplifier energy, J/bit/m^2.
    pub e_amp: f64,
    pub e_tx_fixed: f64,
    pub e_rx_fixed: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            e_elect: 50e-9,
            e_amp: 0.0013e-12,
            e_tx_fixed: 0.0,
            e_rx_fixed: 0.0,
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<()> {
        let all = [self.e_elect, self.e_amp, self.e_tx_fixed, self.e_rx_fixed];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SimError::config("radio constants must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Per-slot cost of each operating mode, and the battery budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCosts {
    pub sleep_per_slot: f64,
    pub sense_per_slot: f64,
    pub comm_per_slot: f64,
    pub initial_energy: f64,
    /// Activation charge on a node's first wake-up within an episode.
    pub e_ix: f64,
}

impl Default for ModeCosts {
    fn default() -> Self {
        Self {
            sleep_per_slot: 0.00027,
            sense_per_slot: 0.012,
            comm_per_slot: 0.0378,
            initial_energy: 5.0,
            e_ix: 0.001,
        }
    }
}

impl ModeCosts {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sleep_per_slot,
            self.sense_per_slot,
            self.comm_per_slot,
            self.initial_energy,
            self.e_ix,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SimError::config("energy costs must be finite and non-negative"));
        }
        if !(self.sleep_per_slot <= self.sense_per_slot && self.sense_per_slot <= self.comm_per_slot) {
            return Err(SimError::config(
                "mode costs must satisfy sleep <= sense <= comm",
            ));
        }
        if self.initial_energy <= 0.0 {
            return Err(SimError::config("initial energy must be positive"));
        }
        Ok(())
    }

    /// Cost of spending one slot in `mode`. Detect senses, Monitor communicates.
    pub fn per_slot(&self, mode: NodeMode) -> f64 {
        match mode {
            NodeMode::Sleep => self.sleep_per_slot,
            NodeMode::Detect => self.sense_per_slot,
            NodeMode::Monitor => self.comm_per_slot,
        }
    }
}

pub fn tx_energy(bits: u64, dist: f64, rm: &RadioModel) -> Result<f64> {
    if bits == 0 {
        return Err(SimError::Argument("cannot transmit a zero-bit frame".into()));
    }
    if dist.is_nan() || dist < 0.0 {
        return Err(SimError::Argument(format!("distance must be non-negative, got {dist}")));
    }
    let l = bits as f64;
    Ok(rm.e_elect * l + rm.e_amp * l * dist * dist + rm.e_tx_fixed)
}

pub fn rx_energy(bits: u64, rm: &RadioModel) -> Result<f64> {
    if bits == 0 {
        return Err(SimError::Argument("cannot receive a zero-bit frame".into()));
    }
    Ok(rm.e_elect * bits as f64 + rm.e_rx_fixed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DebitReason {
    Mode(NodeMode),
    Activation,
    Tx,
    Rx,
}

impl DebitReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DebitReason::Mode(m) => m.as_str(),
            DebitReason::Activation => "activation",
            DebitReason::Tx => "tx",
            DebitReason::Rx => "rx",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Debit {
    pub slot: u64,
    pub node: NodeId,
    pub reason: DebitReason,
    /// Joules actually removed (less than requested when the battery ran out).
    pub applied: f64,
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Append-only record of every joule drawn from every node.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    initial: Vec<f64>,
    per_node: Vec<f64>,
    debits: Vec<Debit>,
    e_ix: f64,
    e_sx_total: KahanSum,
    activated: Vec<bool>,
}

impl EnergyLedger {
    /// Nodes already awake in `field` count as activated: the charge applies
    /// to waking up, not to staying awake.
    pub fn new(field: &NodeField, e_ix: f64) -> Self {
        let initial: Vec<f64> = field.nodes().iter().map(|n| n.remaining_energy()).collect();
        Self {
            per_node: initial.clone(),
            activated: field.nodes().iter().map(|n| n.is_awake()).collect(),
            initial,
            debits: Vec::new(),
            e_ix,
            e_sx_total: KahanSum::default(),
        }
    }

    pub fn remaining(&self, id: NodeId) -> Result<f64> {
        self.per_node.get(id.0).copied().ok_or(SimError::UnknownNode(id))
    }

    pub fn per_node(&self) -> &[f64] {
        &self.per_node
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn debits(&self) -> &[Debit] {
        &self.debits
    }

    /// Cumulative energy drawn from the whole network.
    pub fn e_sx_total(&self) -> f64 {
        self.e_sx_total.value()
    }

    pub fn e_ix(&self) -> f64 {
        self.e_ix
    }

    /// Draws `amount` from node `id`, clamping at zero. Returns the joules
    /// actually removed.
    pub fn debit(&mut self, id: NodeId, amount: f64, reason: DebitReason, slot: u64) -> Result<f64> {
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(SimError::Argument(format!("debit must be non-negative, got {amount}")));
        }
        let before = *self.per_node.get(id.0).ok_or(SimError::UnknownNode(id))?;
        let after = if amount >= before { 0.0 } else { before - amount };
        let applied = before - after;
        self.per_node[id.0] = after;
        self.e_sx_total.add(applied);
        self.debits.push(Debit {
            slot,
            node: id,
            reason,
            applied,
        });
        Ok(applied)
    }

    /// Starts a new tracking episode: every node becomes eligible for the
    /// activation charge again.
    pub fn new_episode(&mut self) {
        self.activated.iter_mut().for_each(|a| *a = false);
    }

    /// Charges one slot: mode costs for every node alive at slot start,
    /// activation for first wake-ups, then radio costs for every frame in
    /// `outcomes`. Returns the joules applied in this slot.
    pub fn settle_slot(
        &mut self,
        slot: u64,
        field: &NodeField,
        modes: &[NodeMode],
        outcomes: &[SlotOutcome],
        rm: &RadioModel,
        costs: &ModeCosts,
    ) -> Result<f64> {
        if modes.len() != self.per_node.len() {
            return Err(SimError::Argument(format!(
                "mode vector has {} entries for {} nodes",
                modes.len(),
                self.per_node.len()
            )));
        }
        let mut total = KahanSum::default();
        for (i, mode) in modes.iter().enumerate() {
            if self.per_node[i] <= 0.0 {
                continue;
            }
            let id = NodeId(i);
            total.add(self.debit(id, costs.per_slot(*mode), DebitReason::Mode(*mode), slot)?);
            if mode.is_awake() && !self.activated[i] {
                self.activated[i] = true;
                total.add(self.debit(id, self.e_ix, DebitReason::Activation, slot)?);
            }
        }
        for outcome in outcomes {
            for ev in &outcome.radio {
                let cost = match ev.direction {
                    RadioDirection::Tx => {
                        let d = distance(field.position(ev.node)?, field.position(ev.peer)?);
                        tx_energy(ev.bits, d, rm)?
                    }
                    RadioDirection::Rx => rx_energy(ev.bits, rm)?,
                };
                let reason = match ev.direction {
                    RadioDirection::Tx => DebitReason::Tx,
                    RadioDirection::Rx => DebitReason::Rx,
                };
                total.add(self.debit(ev.node, cost, reason, slot)?);
            }
        }
        Ok(total.value())
    }

    /// Number of transmit and receive debits per node.
    pub fn radio_counts(&self) -> (BTreeMap<NodeId, u64>, BTreeMap<NodeId, u64>) {
        let mut tx = BTreeMap::new();
        let mut rx = BTreeMap::new();
        for d in &self.debits {
            match d.reason {
                DebitReason::Tx => *tx.entry(d.node).or_insert(0) += 1,
                DebitReason::Rx => *rx.entry(d.node).or_insert(0) += 1,
                _ => {}
            }
        }
        (tx, rx)
    }

    /// Total energy drawn: initial minus remaining, summed over nodes.
    pub fn consumed(&self) -> f64 {
        let init: KahanSum = self.initial.iter().copied().collect();
        let rem: KahanSum = self.per_node.iter().copied().collect();
        init.value() - rem.value()
    }

    /// Copies battery levels back onto the field, killing depleted nodes.
    pub fn sync_field(&self, field: &mut NodeField) -> Result<()> {
        for (i, e) in self.per_node.iter().enumerate() {
            field.set_remaining_energy(NodeId(i), *e)?;
        }
        Ok(())
    }
}
