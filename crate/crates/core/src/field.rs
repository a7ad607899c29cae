//! Sensor field geometry: points, nodes, random deployment and the range
//! queries the tracking protocol runs over the field.
//!
//! All radius tests are inclusive (`distance <= radius`). Queries are linear
//! scans; fields hold a few hundred nodes.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::{Result, SimError};
use crate::rng::{substream, Stream};

/// A position in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(*self, *other)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Identity of a sensor node; equal to its index in the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Operating mode of a node during one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeMode {
    /// No sensing, no data traffic; the radio still hears wake messages.
    Sleep,
    /// Sensing for the target.
    Detect,
    /// Sensing and exchanging tracking messages after a detection.
    Monitor,
}

impl NodeMode {
    pub fn is_awake(self) -> bool {
        !matches!(self, NodeMode::Sleep)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeMode::Sleep => "sleep",
            NodeMode::Detect => "detect",
            NodeMode::Monitor => "monitor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: NodeId,
    pub pos: Point,
    pub mode: NodeMode,
    remaining_energy: f64,
    alive: bool,
}

impl SensorNode {
    pub fn new(id: NodeId, pos: Point, energy: f64) -> Self {
        let energy = energy.max(0.0);
        Self {
            id,
            pos,
            mode: NodeMode::Sleep,
            remaining_energy: energy,
            alive: energy > 0.0,
        }
    }

    pub fn remaining_energy(&self) -> f64 {
        self.remaining_energy
    }

    pub fn alive(&self) -> bool {
        self.alive
    }

    pub fn is_awake(&self) -> bool {
        self.alive && self.mode.is_awake()
    }

    /// Sets the battery level. A depleted node dies and is forced to sleep.
    pub fn set_remaining_energy(&mut self, joules: f64) {
        self.remaining_energy = joules.max(0.0);
        self.alive = self.remaining_energy > 0.0;
        if !self.alive {
            self.mode = NodeMode::Sleep;
        }
    }
}

/// Geometry and population of a deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub n_nodes: usize,
    /// Sensing radius.
    pub r_s: f64,
    /// Communication radius; must be at least twice the sensing radius.
    pub r_c: f64,
    pub seed: u64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            area_width: 500.0,
            area_height: 500.0,
            n_nodes: 250,
            r_s: 25.0,
            r_c: 50.0,
            seed: 0,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_width.is_finite() && self.area_width > 0.0)
            || !(self.area_height.is_finite() && self.area_height > 0.0)
        {
            return Err(SimError::config(format!(
                "area must be positive, got {} x {}",
                self.area_width, self.area_height
            )));
        }
        if self.n_nodes == 0 {
            return Err(SimError::config("n_nodes must be at least 1"));
        }
        if !(self.r_s.is_finite() && self.r_s > 0.0) {
            return Err(SimError::config(format!("r_s must be positive, got {}", self.r_s)));
        }
        if !self.r_c.is_finite() || self.r_c < 2.0 * self.r_s {
            return Err(SimError::config(format!(
                "r_c = {} violates r_c >= 2 * r_s = {}",
                self.r_c,
                2.0 * self.r_s
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        p.is_finite() && (0.0..=self.area_width).contains(&p.x) && (0.0..=self.area_height).contains(&p.y)
    }
}

/// The deployed sensors, indexed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    config: FieldConfig,
    nodes: Vec<SensorNode>,
}

impl NodeField {
    /// Scatters `n_nodes` sensors uniformly over the area. Ids follow draw order.
    pub fn deploy(config: &FieldConfig, initial_energy: f64) -> Result<Self> {
        config.validate()?;
        let mut rng = substream(config.seed, Stream::Deploy);
        let nodes = (0..config.n_nodes)
            .map(|i| {
                let x = rng.random_range(0.0..=config.area_width);
                let y = rng.random_range(0.0..=config.area_height);
                SensorNode::new(NodeId(i), Point::new(x, y), initial_energy)
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            nodes,
        })
    }

    /// Builds a field from explicit positions (hand-made scenarios and fixtures).
    pub fn from_positions(config: &FieldConfig, positions: &[Point], initial_energy: f64) -> Result<Self> {
        let config = FieldConfig {
            n_nodes: positions.len(),
            ..config.clone()
        };
        config.validate()?;
        if let Some(p) = positions.iter().find(|p| !config.contains(**p)) {
            return Err(SimError::config(format!("node position {p} lies outside the area")));
        }
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(i, p)| SensorNode::new(NodeId(i), *p, initial_energy))
            .collect();
        Ok(Self { config, nodes })
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&SensorNode> {
        self.nodes.get(id.0).ok_or(SimError::UnknownNode(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut SensorNode> {
        self.nodes.get_mut(id.0).ok_or(SimError::UnknownNode(id))
    }

    pub fn position(&self, id: NodeId) -> Result<Point> {
        self.node(id).map(|n| n.pos)
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive()).count()
    }

    pub fn awake(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().filter(|n| n.is_awake()).map(|n| n.id).collect()
    }

    pub fn modes(&self) -> Vec<NodeMode> {
        self.nodes.iter().map(|n| n.mode).collect()
    }

    /// Alive nodes within `radius` of `center`, boundary inclusive.
    pub fn alive_within(&self, center: Point, radius: f64) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.alive() && distance(n.pos, center) <= radius)
            .map(|n| n.id)
            .collect()
    }

    /// Alive nodes that sense a target at `target`.
    pub fn detectors_of(&self, target: Point) -> BTreeSet<NodeId> {
        self.alive_within(target, self.config.r_s)
    }

    /// Like [`detectors_of`](Self::detectors_of) but only over nodes that are
    /// currently awake.
    pub fn awake_detectors_of(&self, target: Point) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.is_awake() && distance(n.pos, target) <= self.config.r_s)
            .map(|n| n.id)
            .collect()
    }

    /// Alive nodes other than `id` within communication range of it.
    pub fn neighbors_of(&self, id: NodeId) -> Result<BTreeSet<NodeId>> {
        let pos = self.position(id)?;
        let mut set = self.alive_within(pos, self.config.r_c);
        set.remove(&id);
        Ok(set)
    }

    /// The `k` candidates nearest to `p`, ascending by distance, ties by id.
    /// Unknown ids are ignored.
    pub fn k_closest(&self, p: Point, k: usize, candidates: &BTreeSet<NodeId>) -> Vec<NodeId> {
        let mut ranked: Vec<(f64, NodeId)> = candidates
            .iter()
            .filter_map(|id| self.nodes.get(id.0).map(|n| (distance(n.pos, p), *id)))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ranked.into_iter().take(k).map(|(_, id)| id).collect()
    }

    pub fn set_mode(&mut self, id: NodeId, mode: NodeMode) -> Result<()> {
        let node = self.node_mut(id)?;
        if node.alive() {
            node.mode = mode;
        }
        Ok(())
    }

    /// Puts every alive node into `mode`.
    pub fn set_all_modes(&mut self, mode: NodeMode) {
        for n in self.nodes.iter_mut().filter(|n| n.alive()) {
            n.mode = mode;
        }
    }

    pub fn set_remaining_energy(&mut self, id: NodeId, joules: f64) -> Result<()> {
        self.node_mut(id)?.set_remaining_energy(joules);
        Ok(())
    }
}
