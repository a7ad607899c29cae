//! Scenario configuration and its text format.
//!
//! A config file is flat UTF-8 text, one `key = value` per line, `#` starts a
//! comment, keys are dotted by subsystem:
//!
//! ```text
//! seed = 3
//! method = proposed
//! field.r_c = 55
//! mac.slot_duration = auto
//! ```
//!
//! Unset keys keep their defaults. The resolved configuration is rendered in a
//! canonical form and hashed; the hash tags every report produced from it.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::energy::{ModeCosts, RadioModel};
use crate::error::{Result, SimError};
use crate::field::{FieldConfig, Point};
use crate::mac::SlotConfig;
use crate::mobility::{EntryPolicy, MobilityConfig};
use crate::protocol::ProtocolConfig;
use crate::rng::PRNG_NAME;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Proposed,
    Baseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Method::Proposed),
            "baseline" => Ok(Method::Baseline),
            other => Err(SimError::config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub field: FieldConfig,
    pub mobility: MobilityConfig,
    pub slots: SlotConfig,
    /// Refit the MAC slot to the frame airtimes whenever rate or sizes change.
    pub auto_mac_slot: bool,
    pub radio: RadioModel,
    pub mode_costs: ModeCosts,
    pub protocol: ProtocolConfig,
    pub method: Method,
    pub max_slots: u64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            mobility: MobilityConfig::default(),
            slots: SlotConfig::default(),
            auto_mac_slot: true,
            radio: RadioModel::default(),
            mode_costs: ModeCosts::default(),
            protocol: ProtocolConfig::default(),
            method: Method::Proposed,
            max_slots: 500,
            seed: 0,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| SimError::config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(SimError::config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl ScenarioConfig {
    /// Sets the run seed and the deployment and mobility seeds with it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.field.seed = seed;
        self.mobility.seed = seed;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Refits the MAC slot if it is automatic.
    pub fn refit(&mut self) {
        if self.auto_mac_slot {
            self.slots.fit_slot_duration();
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.mobility.validate(&self.field)?;
        self.slots.validate()?;
        self.radio.validate()?;
        self.mode_costs.validate()?;
        self.protocol.validate()?;
        if self.max_slots == 0 {
            return Err(SimError::config("max_slots must be at least 1"));
        }
        if self.slots.slot_duration > self.mobility.slot_duration {
            return Err(SimError::config(format!(
                "MAC slot of {} s is longer than the {} s tracking slot",
                self.slots.slot_duration, self.mobility.slot_duration
            )));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => {
                let seed = parse_num(key, v)?;
                *self = self.clone().with_seed(seed);
            }
            "method" => self.method = v.parse()?,
            "max_slots" => self.max_slots = parse_num(key, v)?,
            "field.area_width" => self.field.area_width = parse_num(key, v)?,
            "field.area_height" => self.field.area_height = parse_num(key, v)?,
            "field.n_nodes" => self.field.n_nodes = parse_num(key, v)?,
            "field.r_s" => self.field.r_s = parse_num(key, v)?,
            "field.r_c" => self.field.r_c = parse_num(key, v)?,
            "mobility.v_min" => self.mobility.v_min = parse_num(key, v)?,
            "mobility.v_max" => self.mobility.v_max = parse_num(key, v)?,
            "mobility.slot_duration" => self.mobility.slot_duration = parse_num(key, v)?,
            "mobility.entry" => {
                self.mobility.entry = if v == "random-edge" {
                    EntryPolicy::RandomEdge
                } else {
                    let (x, y) = v
                        .split_once(',')
                        .ok_or_else(|| SimError::config(format!("{key}: expected random-edge or x,y")))?;
                    EntryPolicy::FixedPoint(Point::new(parse_num(key, x.trim())?, parse_num(key, y.trim())?))
                }
            }
            "mobility.exit_after_waypoints" => {
                self.mobility.exit_after_waypoints = if v == "none" { None } else { Some(parse_num(key, v)?) }
            }
            "mac.slot_duration" => {
                if v == "auto" {
                    self.auto_mac_slot = true;
                } else {
                    self.auto_mac_slot = false;
                    self.slots.slot_duration = parse_num(key, v)?;
                }
            }
            "mac.data_packet_bits" => self.slots.data_packet_bits = parse_num(key, v)?,
            "mac.control_packet_bits" => self.slots.control_packet_bits = parse_num(key, v)?,
            "mac.data_rate" => self.slots.data_rate = parse_num(key, v)?,
            "mac.p_persist" => self.slots.p_persist = parse_num(key, v)?,
            "mac.max_retries" => self.slots.max_retries = parse_num(key, v)?,
            "mac.ack" => self.slots.ack_enabled = parse_bool(key, v)?,
            "mac.crc" => self.slots.crc_enabled = parse_bool(key, v)?,
            "mac.crc_bits" => self.slots.crc_bits = parse_num(key, v)?,
            "mac.sense_fraction" => self.slots.sense_fraction = parse_num(key, v)?,
            "radio.e_elect" => self.radio.e_elect = parse_num(key, v)?,
            "radio.e_amp" => self.radio.e_amp = parse_num(key, v)?,
            "radio.e_tx_fixed" => self.radio.e_tx_fixed = parse_num(key, v)?,
            "radio.e_rx_fixed" => self.radio.e_rx_fixed = parse_num(key, v)?,
            "energy.sleep" => self.mode_costs.sleep_per_slot = parse_num(key, v)?,
            "energy.sense" => self.mode_costs.sense_per_slot = parse_num(key, v)?,
            "energy.comm" => self.mode_costs.comm_per_slot = parse_num(key, v)?,
            "energy.initial" => self.mode_costs.initial_energy = parse_num(key, v)?,
            "energy.e_ix" => self.mode_costs.e_ix = parse_num(key, v)?,
            "protocol.alpha" | "alpha" => self.protocol.alpha = parse_num(key, v)?,
            "protocol.radius_floor" => self.protocol.radius_floor_fraction = parse_num(key, v)?,
            "protocol.radius_cap" => self.protocol.radius_cap_fraction = parse_num(key, v)?,
            other => return Err(SimError::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. Does not validate.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SimError::config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key, value)
                .map_err(|e| SimError::config(format!("line {}: {}", n + 1, e.to_string().trim_start_matches("configuration error: "))))?;
        }
        cfg.refit();
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text)
    }

    /// Every resolved setting as sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        let entry = match self.mobility.entry {
            EntryPolicy::RandomEdge => "random-edge".to_string(),
            EntryPolicy::FixedPoint(p) => format!("{:?},{:?}", p.x, p.y),
        };
        let exit = self
            .mobility
            .exit_after_waypoints
            .map_or("none".to_string(), |n| n.to_string());
        let mut lines = vec![
            format!("seed = {}", self.seed),
            format!("method = {}", self.method),
            format!("max_slots = {}", self.max_slots),
            format!("prng = {PRNG_NAME}"),
            format!("field.area_width = {:?}", self.field.area_width),
            format!("field.area_height = {:?}", self.field.area_height),
            format!("field.n_nodes = {}", self.field.n_nodes),
            format!("field.r_s = {:?}", self.field.r_s),
            format!("field.r_c = {:?}", self.field.r_c),
            format!("field.seed = {}", self.field.seed),
            format!("mobility.v_min = {:?}", self.mobility.v_min),
            format!("mobility.v_max = {:?}", self.mobility.v_max),
            format!("mobility.slot_duration = {:?}", self.mobility.slot_duration),
            format!("mobility.seed = {}", self.mobility.seed),
            format!("mobility.entry = {entry}"),
            format!("mobility.exit_after_waypoints = {exit}"),
            format!("mac.slot_duration = {:?}", self.slots.slot_duration),
            format!("mac.data_packet_bits = {}", self.slots.data_packet_bits),
            format!("mac.control_packet_bits = {}", self.slots.control_packet_bits),
            format!("mac.data_rate = {:?}", self.slots.data_rate),
            format!("mac.p_persist = {:?}", self.slots.p_persist),
            format!("mac.max_retries = {}", self.slots.max_retries),
            format!("mac.ack = {}", self.slots.ack_enabled),
            format!("mac.crc = {}", self.slots.crc_enabled),
            format!("mac.crc_bits = {}", self.slots.crc_bits),
            format!("mac.sense_fraction = {:?}", self.slots.sense_fraction),
            format!("radio.e_elect = {:?}", self.radio.e_elect),
            format!("radio.e_amp = {:?}", self.radio.e_amp),
            format!("radio.e_tx_fixed = {:?}", self.radio.e_tx_fixed),
            format!("radio.e_rx_fixed = {:?}", self.radio.e_rx_fixed),
            format!("energy.sleep = {:?}", self.mode_costs.sleep_per_slot),
            format!("energy.sense = {:?}", self.mode_costs.sense_per_slot),
            format!("energy.comm = {:?}", self.mode_costs.comm_per_slot),
            format!("energy.initial = {:?}", self.mode_costs.initial_energy),
            format!("energy.e_ix = {:?}", self.mode_costs.e_ix),
            format!("protocol.alpha = {:?}", self.protocol.alpha),
            format!("protocol.radius_floor = {:?}", self.protocol.radius_floor_fraction),
            format!("protocol.radius_cap = {:?}", self.protocol.radius_cap_fraction),
        ];
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Short tag naming the generator and hashing the canonical config.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical().as_bytes());
        let hex: String = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("{PRNG_NAME}-{hex}")
    }
}
