//! Throughput, end-to-end delay and packet delivery ratio.

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricCounters {
    /// Payload bits received.
    pub bits_received: u64,
    /// Observation time in seconds.
    pub elapsed: f64,
    pub sent_pckt: u64,
    pub recv_pckt: u64,
    /// Per-packet delays `T_d - T_s`, seconds.
    pub delays: Vec<f64>,
}

impl MetricCounters {
    pub fn record_sent(&mut self, n: u64) {
        self.sent_pckt += n;
    }

    /// Records one received packet sent at `t_s` and received at `t_d`.
    pub fn record_received(&mut self, bits: u64, t_s: f64, t_d: f64) -> Result<()> {
        let d = delay(t_s, t_d)?;
        self.bits_received += bits;
        self.recv_pckt += 1;
        self.delays.push(d);
        Ok(())
    }

    pub fn mean_delay(&self) -> Option<f64> {
        if self.delays.is_empty() {
            None
        } else {
            Some(self.delays.iter().sum::<f64>() / self.delays.len() as f64)
        }
    }
}

/// Received bits per second of observation time.
pub fn throughput(mc: &MetricCounters) -> Result<f64> {
    if mc.elapsed.is_nan() || mc.elapsed <= 0.0 {
        return Err(SimError::Argument(format!(
            "throughput needs positive elapsed time, got {}",
            mc.elapsed
        )));
    }
    Ok(mc.bits_received as f64 / mc.elapsed)
}

/// Network throughput as the mean of per-node throughputs.
pub fn mean_node_throughput(bits_per_node: &[u64], elapsed: f64) -> Result<f64> {
    if elapsed.is_nan() || elapsed <= 0.0 {
        return Err(SimError::Argument(format!(
            "throughput needs positive elapsed time, got {elapsed}"
        )));
    }
    if bits_per_node.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = bits_per_node.iter().map(|b| *b as f64 / elapsed).sum();
    Ok(sum / bits_per_node.len() as f64)
}

/// End-to-end delay of one packet.
pub fn delay(t_s: f64, t_d: f64) -> Result<f64> {
    if t_d < t_s {
        return Err(SimError::Argument(format!(
            "packet received at {t_d} before it was sent at {t_s}"
        )));
    }
    Ok(t_d - t_s)
}

/// Delivery ratio; `None` when nothing was sent.
pub fn pdr(mc: &MetricCounters) -> Option<f64> {
    if mc.sent_pckt == 0 {
        None
    } else {
        Some(mc.recv_pckt as f64 / mc.sent_pckt as f64)
    }
}
