//! Random-waypoint motion of the tracked target.
//!
//! The target enters on the area boundary, then repeatedly walks in a straight
//! line to a uniformly drawn interior waypoint at a uniformly drawn speed, with
//! no pause on arrival. Speeds never exceed `r_s / T`, so the target cannot
//! move farther than one sensing radius per slot.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::field::{distance, FieldConfig, Point};
use crate::rng::{substream, Stream};

/// Where the target enters the area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryPolicy {
    RandomEdge,
    FixedPoint(Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityConfig {
    pub v_min: f64,
    pub v_max: f64,
    /// Slot duration `T` in seconds.
    pub slot_duration: f64,
    pub seed: u64,
    pub entry: EntryPolicy,
    /// When set, after this many interior waypoints the target heads for a
    /// boundary point and stops there.
    pub exit_after_waypoints: Option<u32>,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            v_min: 5.0,
            v_max: 20.0,
            slot_duration: 1.0,
            seed: 0,
            entry: EntryPolicy::RandomEdge,
            exit_after_waypoints: None,
        }
    }
}

impl MobilityConfig {
    /// Largest speed the tracker's sensing geometry allows.
    pub fn speed_bound(&self, fc: &FieldConfig) -> f64 {
        fc.r_s / self.slot_duration
    }

    pub fn validate(&self, fc: &FieldConfig) -> Result<()> {
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return Err(SimError::config(format!(
                "slot duration must be positive, got {}",
                self.slot_duration
            )));
        }
        if !(self.v_min > 0.0 && self.v_min <= self.v_max) {
            return Err(SimError::config(format!(
                "need 0 < v_min <= v_max, got v_min = {}, v_max = {}",
                self.v_min, self.v_max
            )));
        }
        let bound = self.speed_bound(fc);
        if self.v_max > bound {
            return Err(SimError::config(format!(
                "v_max = {} exceeds r_s / T = {}",
                self.v_max, bound
            )));
        }
        if let EntryPolicy::FixedPoint(p) = self.entry {
            if !fc.contains(p) {
                return Err(SimError::config(format!("entry point {p} lies outside the area")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub pos: Point,
    pub waypoint: Point,
    /// Current speed `V_k`, used for the move out of this slot.
    pub speed: f64,
    pub slot_index: u64,
    /// False once the target has reached its exit point.
    pub inside: bool,
    pub waypoints_reached: u32,
    heading_out: bool,
}

/// Distance per slot divided by slot length.
pub fn observed_speed(prev: Point, curr: Point, slot_duration: f64) -> Result<f64> {
    if slot_duration.is_nan() || slot_duration <= 0.0 {
        return Err(SimError::Argument(format!(
            "slot duration must be positive, got {slot_duration}"
        )));
    }
    Ok(distance(prev, curr) / slot_duration)
}

/// A seeded random-waypoint generator for one target.
#[derive(Debug, Clone)]
pub struct RandomWaypoint {
    mc: MobilityConfig,
    fc: FieldConfig,
    rng: ChaCha8Rng,
}

impl RandomWaypoint {
    pub fn new(mc: &MobilityConfig, fc: &FieldConfig) -> Result<Self> {
        mc.validate(fc)?;
        Ok(Self {
            mc: mc.clone(),
            fc: fc.clone(),
            rng: substream(mc.seed, Stream::Mobility),
        })
    }

    pub fn spawn(&mut self) -> TargetState {
        let pos = match self.mc.entry {
            EntryPolicy::FixedPoint(p) => p,
            EntryPolicy::RandomEdge => self.edge_point(),
        };
        let waypoint = self.interior_point();
        let speed = self.draw_speed();
        TargetState {
            pos,
            waypoint,
            speed,
            slot_index: 0,
            inside: true,
            waypoints_reached: 0,
            heading_out: false,
        }
    }

    /// Advances the target by one slot.
    pub fn step(&mut self, ts: &TargetState) -> Result<TargetState> {
        if !ts.inside {
            return Err(SimError::State(format!(
                "target already exited at slot {}",
                ts.slot_index
            )));
        }
        let mut next = ts.clone();
        next.slot_index += 1;
        let reach = ts.speed * self.mc.slot_duration;
        let remaining = distance(ts.pos, ts.waypoint);
        if remaining <= reach {
            next.pos = ts.waypoint;
            if ts.heading_out {
                next.inside = false;
                return Ok(next);
            }
            next.waypoints_reached += 1;
            if self.mc.exit_after_waypoints == Some(next.waypoints_reached) {
                next.waypoint = self.edge_point();
                next.heading_out = true;
            } else {
                next.waypoint = self.interior_point();
            }
            next.speed = self.draw_speed();
        } else {
            let f = reach / remaining;
            next.pos = Point::new(
                ts.pos.x + (ts.waypoint.x - ts.pos.x) * f,
                ts.pos.y + (ts.waypoint.y - ts.pos.y) * f,
            );
        }
        Ok(next)
    }

    fn draw_speed(&mut self) -> f64 {
        if self.mc.v_min == self.mc.v_max {
            self.mc.v_min
        } else {
            self.rng.random_range(self.mc.v_min..=self.mc.v_max)
        }
    }

    fn interior_point(&mut self) -> Point {
        Point::new(
            self.rng.random_range(0.0..self.fc.area_width),
            self.rng.random_range(0.0..self.fc.area_height),
        )
    }

    /// Uniform point on the perimeter.
    fn edge_point(&mut self) -> Point {
        let (w, h) = (self.fc.area_width, self.fc.area_height);
        let t = self.rng.random_range(0.0..2.0 * (w + h));
        if t < w {
            Point::new(t, 0.0)
        } else if t < w + h {
            Point::new(w, t - w)
        } else if t < 2.0 * w + h {
            Point::new(2.0 * w + h - t, h)
        } else {
            Point::new(0.0, 2.0 * (w + h) - t)
        }
    }
}

/// One row of an exported target trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    pub pos: Point,
    pub speed: f64,
}

/// A recorded target path, replayed identically by every method in a
/// paired comparison.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub rows: Vec<TraceRow>,
}

impl Trajectory {
    /// Records up to `slots` positions. Stops early if the target exits.
    pub fn generate(mc: &MobilityConfig, fc: &FieldConfig, slots: usize) -> Result<Self> {
        let mut walker = RandomWaypoint::new(mc, fc)?;
        let mut ts = walker.spawn();
        let mut rows = Vec::with_capacity(slots);
        while rows.len() < slots {
            rows.push(TraceRow {
                slot: ts.slot_index,
                pos: ts.pos,
                speed: ts.speed,
            });
            if !ts.inside {
                break;
            }
            ts = walker.step(&ts)?;
        }
        Ok(Self { rows })
    }

    /// Builds a trajectory from explicit positions, one per slot.
    pub fn from_points(points: &[Point], slot_duration: f64) -> Result<Self> {
        let mut rows = Vec::with_capacity(points.len());
        for (k, p) in points.iter().enumerate() {
            let speed = match points.get(k + 1) {
                Some(n) => observed_speed(*p, *n, slot_duration)?,
                None if k > 0 => rows.last().map(|r: &TraceRow| r.speed).unwrap_or(0.0),
                None => 0.0,
            };
            rows.push(TraceRow {
                slot: k as u64,
                pos: *p,
                speed,
            });
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Target position in `slot`, if the target is still present.
    pub fn position(&self, slot: usize) -> Option<Point> {
        self.rows.get(slot).map(|r| r.pos)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| SimError::csv(path, e))?;
        w.write_record(["slot", "x", "y", "speed"])
            .map_err(|e| SimError::csv(path, e))?;
        for r in &self.rows {
            w.write_record([
                r.slot.to_string(),
                r.pos.x.to_string(),
                r.pos.y.to_string(),
                r.speed.to_string(),
            ])
            .map_err(|e| SimError::csv(path, e))?;
        }
        w.flush().map_err(|e| SimError::io(path, e))
    }

    /// Reads a `slot,x,y,speed` file. Rows must be in slot order starting at 0.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| SimError::csv(path, e))?;
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| SimError::csv(path, e))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| SimError::config(format!("{}: bad value in row {}", path.display(), k + 1)))
            };
            let slot = field(0)? as u64;
            if slot != k as u64 {
                return Err(SimError::config(format!(
                    "{}: expected slot {k}, found {slot}",
                    path.display()
                )));
            }
            rows.push(TraceRow {
                slot,
                pos: Point::new(field(1)?, field(2)?),
                speed: field(3)?,
            });
        }
        Ok(Self { rows })
    }
}
