//! Brute-force reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsn_track_sim::field::{FieldConfig, NodeField, NodeId, Point};

/// A random field with some nodes dead, built from explicit positions.
pub fn random_field(rng: &mut ChaCha8Rng, max_nodes: usize) -> NodeField {
    let n = rng.random_range(1..=max_nodes);
    let r_s = rng.random_range(5.0..40.0);
    let cfg = FieldConfig {
        area_width: rng.random_range(50.0..300.0),
        area_height: rng.random_range(50.0..300.0),
        n_nodes: n,
        r_s,
        r_c: r_s * rng.random_range(2.0..3.0),
        seed: 0,
    };
    let pts: Vec<Point> = (0..n)
        .map(|_| {
            Point::new(
                rng.random_range(0.0..=cfg.area_width),
                rng.random_range(0.0..=cfg.area_height),
            )
        })
        .collect();
    let mut field = NodeField::from_positions(&cfg, &pts, 1.0).unwrap();
    for i in 0..n {
        if rng.random_bool(0.1) {
            field.set_remaining_energy(NodeId(i), 0.0).unwrap();
        }
    }
    field
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, field: &NodeField) -> Point {
    let c = field.config();
    Point::new(
        rng.random_range(-10.0..c.area_width + 10.0),
        rng.random_range(-10.0..c.area_height + 10.0),
    )
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Every alive node within `radius` of `p`, by linear scan.
pub fn scan_within(field: &NodeField, p: Point, radius: f64) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    for i in 0..field.len() {
        let n = &field.nodes()[i];
        if n.alive() && dist(n.pos, p) <= radius {
            out.insert(NodeId(i));
        }
    }
    out
}

pub fn scan_detectors(field: &NodeField, target: Point) -> BTreeSet<NodeId> {
    scan_within(field, target, field.config().r_s)
}

pub fn scan_neighbors(field: &NodeField, id: NodeId) -> BTreeSet<NodeId> {
    let mut s = scan_within(field, field.nodes()[id.0].pos, field.config().r_c);
    s.remove(&id);
    s
}

pub fn scan_wake_set(field: &NodeField, center: Point, radius: f64) -> BTreeSet<NodeId> {
    scan_within(field, center, radius + field.config().r_s)
}

/// The two nearest candidates by repeated minimum search (distance, then id).
pub fn scan_two_closest(field: &NodeField, p: Point, candidates: &BTreeSet<NodeId>) -> Vec<NodeId> {
    let mut picked: Vec<NodeId> = Vec::new();
    for _ in 0..2 {
        let mut best: Option<(f64, NodeId)> = None;
        for id in candidates {
            if picked.contains(id) {
                continue;
            }
            let d = dist(field.nodes()[id.0].pos, p);
            let better = match best {
                None => true,
                Some((bd, bid)) => d < bd || (d == bd && *id < bid),
            };
            if better {
                best = Some((d, *id));
            }
        }
        if let Some((_, id)) = best {
            picked.push(id);
        }
    }
    picked
}

pub fn scan_min(ids: &[NodeId]) -> Option<NodeId> {
    let mut best: Option<NodeId> = None;
    for id in ids {
        if best.is_none_or(|b| id.0 < b.0) {
            best = Some(*id);
        }
    }
    best
}
