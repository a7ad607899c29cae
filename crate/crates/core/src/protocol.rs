//! Prediction-based node activation for single-target tracking.
//!
//! Each slot the awake nodes that sense the target elect the lowest id among
//! them as representative and pick the two detectors nearest the target. From
//! those two the target position is interpolated, its speed estimated from the
//! previous estimate (or taken as the speed prior when there is no usable
//! previous estimate), and a circular region predicted for the next slot:
//! centred on the estimate, radius proportional to speed and capped at the
//! sensing radius (the target cannot cover more than `r_s` in one slot). The
//! representative notifies the two closest nodes, which then wake every
//! sleeping neighbour whose sensing disk touches the predicted region. All
//! other nodes go to sleep.
//!
//! When no awake node senses the target the episode ends as lost and every
//! node sleeps. There is no re-acquisition.

use std::collections::BTreeSet;

use crate::error::{Result, SimError};
use crate::field::{distance, NodeField, NodeId, NodeMode, Point};
use crate::mac::{DrainReport, Frame, FrameKind, MacService};
use crate::mobility::observed_speed;

/// Slack allowed when testing whether a point lies in a predicted region.
pub const CONTAINMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Radius gain over `speed * T`.
    pub alpha: f64,
    /// Minimum radius as a fraction of `r_s`.
    pub radius_floor_fraction: f64,
    /// Maximum radius as a fraction of `r_s`.
    pub radius_cap_fraction: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            radius_floor_fraction: 0.1,
            radius_cap_fraction: 1.0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(SimError::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(0.0 <= self.radius_floor_fraction && self.radius_floor_fraction <= self.radius_cap_fraction) {
            return Err(SimError::config("radius floor must lie in [0, cap]"));
        }
        if !(self.radius_cap_fraction > 0.0 && self.radius_cap_fraction <= 1.0) {
            return Err(SimError::config("radius cap must lie in (0, 1] times r_s"));
        }
        Ok(())
    }
}

/// Where the target can be one slot from now.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedRegion {
    pub center: Point,
    pub radius: f64,
}

impl PredictedRegion {
    pub fn contains(&self, p: Point) -> bool {
        distance(self.center, p) <= self.radius + CONTAINMENT_EPS
    }
}

/// The one or two detectors nearest the target, `d_i <= d_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPair {
    pub i: NodeId,
    pub d_i: f64,
    /// Absent when only one node detects the target.
    pub j: Option<(NodeId, f64)>,
}

impl ClosestPair {
    pub fn ids(&self) -> Vec<NodeId> {
        let mut v = vec![self.i];
        v.extend(self.j.map(|(j, _)| j));
        v
    }
}

/// Lowest id wins.
pub fn elect_representative(detectors: &BTreeSet<NodeId>) -> Result<NodeId> {
    detectors.first().copied().ok_or(SimError::EmptyElection)
}

/// Locates the target from its closest detectors.
pub trait PositionEstimator {
    fn estimate(&self, field: &NodeField, pair: &ClosestPair) -> Result<Point>;
}

/// Distance-weighted interpolation between the two closest detectors: the
/// estimate sits on segment `ij`, nearer to whichever node is nearer the target.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoAnchorInterpolation;

impl PositionEstimator for TwoAnchorInterpolation {
    fn estimate(&self, field: &NodeField, pair: &ClosestPair) -> Result<Point> {
        estimate_position(field, pair)
    }
}

pub fn estimate_position(field: &NodeField, pair: &ClosestPair) -> Result<Point> {
    let pi = field.position(pair.i)?;
    let Some((j, d_j)) = pair.j else {
        return Ok(pi);
    };
    let pj = field.position(j)?;
    let sum = pair.d_i + d_j;
    if sum == 0.0 {
        return Ok(pi);
    }
    let wi = d_j / sum;
    let wj = pair.d_i / sum;
    Ok(Point::new(pi.x * wi + pj.x * wj, pi.y * wi + pj.y * wj))
}

/// Region with radius `min(alpha * speed * T, r_s)`, floored at `0.1 * r_s`.
pub fn predicted_region(est_pos: Point, est_speed: f64, slot_duration: f64, r_s: f64, alpha: f64) -> PredictedRegion {
    let cfg = ProtocolConfig {
        alpha,
        ..ProtocolConfig::default()
    };
    predicted_region_with(est_pos, est_speed, slot_duration, r_s, &cfg)
}

pub fn predicted_region_with(
    est_pos: Point,
    est_speed: f64,
    slot_duration: f64,
    r_s: f64,
    cfg: &ProtocolConfig,
) -> PredictedRegion {
    let cap = cfg.radius_cap_fraction * r_s;
    let floor = cfg.radius_floor_fraction * r_s;
    let radius = (cfg.alpha * est_speed.max(0.0) * slot_duration).min(cap).max(floor);
    PredictedRegion {
        center: est_pos,
        radius,
    }
}

/// Alive nodes whose sensing disk meets the region.
pub fn wake_set(field: &NodeField, region: &PredictedRegion) -> BTreeSet<NodeId> {
    field.alive_within(region.center, region.radius + field.config().r_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Episode {
    /// Waiting for the target to be first sensed.
    Idle,
    Tracking,
    Lost,
    Exited,
}

impl Episode {
    pub fn as_str(self) -> &'static str {
        match self {
            Episode::Idle => "idle",
            Episode::Tracking => "tracking",
            Episode::Lost => "lost",
            Episode::Exited => "exited",
        }
    }
}

/// Protocol memory carried from one slot to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub episode: Episode,
    pub detectors: BTreeSet<NodeId>,
    pub representative: Option<NodeId>,
    pub closest: Option<ClosestPair>,
    pub predicted: Option<PredictedRegion>,
    pub est_pos: Option<Point>,
    pub est_speed: f64,
    /// The last observation notice did not get through.
    pub notice_failed: bool,
}

impl Default for TrackerState {
    fn default() -> Self {
        Self {
            episode: Episode::Idle,
            detectors: BTreeSet::new(),
            representative: None,
            closest: None,
            predicted: None,
            est_pos: None,
            est_speed: 0.0,
            notice_failed: false,
        }
    }
}

impl TrackerState {
    /// Checks the state invariants.
    pub fn check(&self) -> Result<()> {
        if self.episode == Episode::Tracking {
            let rep = self
                .representative
                .ok_or_else(|| SimError::State("tracking without a representative".into()))?;
            if self.detectors.first() != Some(&rep) {
                return Err(SimError::State(format!("representative {rep} is not the lowest detector")));
            }
        }
        if self.episode == Episode::Lost && !self.detectors.is_empty() {
            return Err(SimError::State("lost episode with detectors".into()));
        }
        if let Some(pair) = self.closest {
            if let Some((j, d_j)) = pair.j {
                if j == pair.i || pair.d_i > d_j {
                    return Err(SimError::State("closest pair out of order".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    WakeSent,
    ObservationNotice,
    NodesSlept,
    TargetLost,
    TargetExited,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::WakeSent => "wake_sent",
            EventKind::ObservationNotice => "observation_notice",
            EventKind::NodesSlept => "nodes_slept",
            EventKind::TargetLost => "target_lost",
            EventKind::TargetExited => "target_exited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolEvent {
    pub kind: EventKind,
    pub slot: u64,
    pub ids: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeTransition {
    pub node: NodeId,
    pub from: NodeMode,
    pub to: NodeMode,
}

/// Everything one slot of the protocol produced.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub tracker: TrackerState,
    pub events: Vec<ProtocolEvent>,
    pub transitions: Vec<ModeTransition>,
    /// Episode at the start of the slot.
    pub episode_during: Episode,
    /// Node modes while the slot ran; these are what the slot is charged for.
    pub modes_during: Vec<NodeMode>,
    pub awake_during: BTreeSet<NodeId>,
    pub detectors: BTreeSet<NodeId>,
    pub wake_set: BTreeSet<NodeId>,
    pub mac: Vec<DrainReport>,
}

/// Slot-level parameters of the tracking protocol.
#[derive(Debug, Clone)]
pub struct TrackingProtocol {
    pub config: ProtocolConfig,
    /// Tracking slot `T`, seconds.
    pub slot_duration: f64,
    /// Speed assumed on the first tracking slot.
    pub speed_prior: f64,
    pub notice_bits: u64,
    pub wake_bits: u64,
}

impl TrackingProtocol {
    /// Runs one slot. `target` is the true target position, or `None` once it
    /// has left the area. Node modes in `field` are updated for the next slot.
    pub fn tracking_step(
        &self,
        tracker: &TrackerState,
        field: &mut NodeField,
        target: Option<Point>,
        mac: &mut MacService,
        slot: u64,
    ) -> Result<StepResult> {
        mac.begin_step(slot);
        let episode_during = tracker.episode;
        let mut next = tracker.clone();
        let mut events = Vec::new();
        let mut reports = Vec::new();
        let mut detectors = BTreeSet::new();
        let mut wake = BTreeSet::new();

        if matches!(tracker.episode, Episode::Idle) && target.is_some() {
            field.set_all_modes(NodeMode::Detect);
        }
        let modes_during = field.modes();
        let awake_during = field.awake();

        match (tracker.episode, target) {
            (Episode::Lost | Episode::Exited, _) => {
                field.set_all_modes(NodeMode::Sleep);
            }
            (_, None) => {
                field.set_all_modes(NodeMode::Sleep);
                next = TrackerState {
                    episode: Episode::Exited,
                    ..TrackerState::default()
                };
                events.push(ProtocolEvent {
                    kind: EventKind::TargetExited,
                    slot,
                    ids: Vec::new(),
                });
            }
            (episode, Some(target)) => {
                detectors = field.awake_detectors_of(target);
                if detectors.is_empty() || tracker.notice_failed {
                    field.set_all_modes(NodeMode::Sleep);
                    if episode == Episode::Tracking {
                        events.push(ProtocolEvent {
                            kind: EventKind::TargetLost,
                            slot,
                            ids: tracker.closest.map(|p| p.ids()).unwrap_or_default(),
                        });
                        next = TrackerState {
                            episode: Episode::Lost,
                            ..TrackerState::default()
                        };
                        detectors.clear();
                    }
                } else {
                    let (state, wake_ids, notice_report, wake_report) =
                        self.track(tracker, field, target, &detectors, mac)?;
                    wake = wake_ids;
                    let pair_ids = state.closest.map(|p| p.ids()).unwrap_or_default();
                    if !state.notice_failed {
                        events.push(ProtocolEvent {
                            kind: EventKind::ObservationNotice,
                            slot,
                            ids: pair_ids,
                        });
                    }
                    let woken: Vec<NodeId> = wake_report.delivered.iter().map(|(f, _)| f.dst).collect();
                    if !woken.is_empty() {
                        let mut ids = woken.clone();
                        ids.sort();
                        ids.dedup();
                        events.push(ProtocolEvent {
                            kind: EventKind::WakeSent,
                            slot,
                            ids,
                        });
                    }
                    let staying: Vec<NodeId> = awake_during.intersection(&wake).copied().collect();
                    field.set_all_modes(NodeMode::Sleep);
                    for id in woken.iter().chain(&staying) {
                        field.set_mode(*id, NodeMode::Detect)?;
                    }
                    for id in &detectors {
                        field.set_mode(*id, NodeMode::Monitor)?;
                    }
                    reports.push(notice_report);
                    reports.push(wake_report);
                    next = state;
                }
            }
        }

        let after = field.awake();
        let slept: Vec<NodeId> = awake_during.difference(&after).copied().collect();
        if !slept.is_empty() && next.episode != Episode::Idle {
            events.push(ProtocolEvent {
                kind: EventKind::NodesSlept,
                slot,
                ids: slept,
            });
        }
        events.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.ids.cmp(&b.ids)));

        let transitions = field
            .nodes()
            .iter()
            .zip(&modes_during)
            .filter(|(n, m)| n.mode != **m)
            .map(|(n, m)| ModeTransition {
                node: n.id,
                from: *m,
                to: n.mode,
            })
            .collect();

        Ok(StepResult {
            tracker: next,
            events,
            transitions,
            episode_during,
            modes_during,
            awake_during,
            detectors,
            wake_set: wake,
            mac: reports,
        })
    }

    /// A slot with at least one detector: elect, estimate, predict, notify, wake.
    fn track(
        &self,
        tracker: &TrackerState,
        field: &NodeField,
        target: Point,
        detectors: &BTreeSet<NodeId>,
        mac: &mut MacService,
    ) -> Result<(TrackerState, BTreeSet<NodeId>, DrainReport, DrainReport)> {
        let rep = elect_representative(detectors)?;
        let nearest = field.k_closest(target, 2, detectors);
        let ranged = |id: NodeId| -> Result<(NodeId, f64)> { Ok((id, distance(field.position(id)?, target))) };
        let (i, d_i) = ranged(nearest[0])?;
        let j = nearest.get(1).map(|id| ranged(*id)).transpose()?;
        let pair = ClosestPair { i, d_i, j };

        let est_pos = TwoAnchorInterpolation.estimate(field, &pair)?;
        // A single-anchor estimate is pinned to the node, so the change between
        // two estimates says nothing about motion when either one is pinned.
        let pinned = pair.j.is_none() || tracker.closest.is_some_and(|p| p.j.is_none());
        let est_speed = match (tracker.episode, tracker.est_pos) {
            (Episode::Tracking, Some(prev)) if !pinned => observed_speed(prev, est_pos, self.slot_duration)?,
            _ => self.speed_prior,
        };
        let r_s = field.config().r_s;
        let region = predicted_region_with(est_pos, est_speed, self.slot_duration, r_s, &self.config);
        let wake = wake_set(field, &region);

        let notices: Vec<Frame> = pair
            .ids()
            .into_iter()
            .filter(|id| *id != rep)
            .map(|dst| Frame::new(rep, dst, FrameKind::ObservationNotice, self.notice_bits, 0))
            .collect::<Result<_>>()?;
        let expected = notices.len();
        let notice_report = mac.exchange(field, notices)?;
        let notice_failed = notice_report.delivered.len() < expected;

        let reach_i = field.neighbors_of(i)?;
        let reach_j = match j {
            Some((j, _)) => field.neighbors_of(j)?,
            None => BTreeSet::new(),
        };
        let mut wake_frames = Vec::new();
        for w in wake.difference(detectors) {
            let sender = if reach_i.contains(w) {
                i
            } else if let (Some((j, _)), true) = (j, reach_j.contains(w)) {
                j
            } else {
                continue;
            };
            wake_frames.push(Frame::new(sender, *w, FrameKind::WakeMessage, self.wake_bits, 0)?);
        }
        let wake_report = mac.exchange(field, wake_frames)?;

        let state = TrackerState {
            episode: Episode::Tracking,
            detectors: detectors.clone(),
            representative: Some(rep),
            closest: Some(pair),
            predicted: Some(region),
            est_pos: Some(est_pos),
            est_speed,
            notice_failed,
        };
        Ok((state, wake, notice_report, wake_report))
    }
}
