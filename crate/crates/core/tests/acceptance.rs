//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use wsn_track_sim::config::{Method, ScenarioConfig};
use wsn_track_sim::energy::KahanSum;
use wsn_track_sim::field::{FieldConfig, NodeField, NodeId, Point};
use wsn_track_sim::mac::{drain_queue, Frame, FrameKind, SharedChannel, SlotConfig, TrafficSource};
use wsn_track_sim::metrics::{self, MetricCounters};
use wsn_track_sim::mobility::{observed_speed, MobilityConfig, RandomWaypoint, Trajectory};
use wsn_track_sim::protocol::{elect_representative, predicted_region, wake_set, Episode, PredictedRegion};
use wsn_track_sim::report::{self, RunReport};
use wsn_track_sim::rng::SlotDraws;
use wsn_track_sim::sim::{self, RunOutput};
use wsn_track_sim::sweep::throughput_sweep;

use common::*;

type Verdict = Result<String, String>;

const SEEDS: std::ops::RangeInclusive<u64> = 0..=9;
const MAX_PAIRED_RUN: Duration = Duration::from_secs(10);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn defaults(seed: u64) -> ScenarioConfig {
    ScenarioConfig::default().with_seed(seed)
}

/// Paired runs on the defaults for every seed and communication radius.
struct EnergyRuns {
    runs: Vec<(f64, u64, RunOutput, RunOutput)>,
    slowest: Duration,
}

fn energy_runs() -> Result<EnergyRuns, String> {
    let mut runs = Vec::new();
    let mut slowest = Duration::ZERO;
    for r_c in [50.0, 55.0, 60.0] {
        for seed in SEEDS {
            let mut cfg = defaults(seed);
            cfg.field.r_c = r_c;
            let start = Instant::now();
            let (p, b) = sim::paired(&cfg).map_err(|e| e.to_string())?;
            slowest = slowest.max(start.elapsed());
            runs.push((r_c, seed, p, b));
        }
    }
    Ok(EnergyRuns { runs, slowest })
}

fn c1_energy(er: &EnergyRuns) -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    for (r_c, seed, p, b) in &er.runs {
        let (ep, eb) = (p.report.total_energy_j, b.report.total_energy_j);
        check(ep < eb, || format!("r_c={r_c} seed={seed}: proposed {ep} J >= baseline {eb} J"))?;
        worst_ratio = worst_ratio.max(ep / eb);
    }
    check(er.slowest < MAX_PAIRED_RUN, || format!("slowest paired run took {:?}", er.slowest))?;
    Ok(format!(
        "{} pairs, proposed/baseline energy <= {:.4}, slowest paired run {:.2?}",
        er.runs.len(),
        worst_ratio,
        er.slowest
    ))
}

fn c2_node_count() -> Verdict {
    let mut lines = Vec::new();
    for seed in 0..=4 {
        let mut energy = BTreeMap::new();
        for n in [100usize, 150, 200, 250] {
            let mut cfg = defaults(seed);
            cfg.field.n_nodes = n;
            let (p, b) = sim::paired(&cfg).map_err(|e| e.to_string())?;
            energy.insert(n, (p.report.total_energy_j, b.report.total_energy_j));
        }
        let dp = energy[&250].0 - energy[&100].0;
        let db = energy[&250].1 - energy[&100].1;
        check(dp < db, || format!("seed {seed}: proposed growth {dp} J >= baseline growth {db} J"))?;
        lines.push(format!("{dp:.1}<{db:.1}"));
    }
    Ok(format!("energy growth 100->250 nodes (proposed<baseline): {}", lines.join(", ")))
}

fn c3_involved(er: &EnergyRuns) -> Verdict {
    let mut compared = 0usize;
    let mut worst_mean: f64 = 0.0;
    for (r_c, seed, p, b) in er.runs.iter().filter(|r| r.0 == 50.0) {
        for (rp, rb) in p.records.iter().zip(&b.records) {
            if rp.episode == Some(Episode::Tracking) && rb.tracked {
                compared += 1;
                check(rp.awake <= rb.awake, || {
                    format!(
                        "r_c={r_c} seed={seed} slot {}: proposed awake {} > baseline {}",
                        rp.slot, rp.awake, rb.awake
                    )
                })?;
            }
        }
        let n = p.report.n_nodes as f64;
        let mean = p.report.mean_active_nodes;
        check(mean < 0.25 * n, || format!("seed {seed}: mean active {mean} >= {}", 0.25 * n))?;
        worst_mean = worst_mean.max(mean);
    }
    check(compared > 0, || "no tracking slots to compare".into())?;
    Ok(format!(
        "{compared} tracking slots compared, max mean_active_nodes {worst_mean:.2} < 62.5"
    ))
}

fn c4_throughput() -> Verdict {
    let rates = [1e6, 2e6, 3e6, 4e6];
    let seeds: Vec<u64> = SEEDS.collect();
    let out = throughput_sweep(&ScenarioConfig::default(), &rates, &seeds).map_err(|e| e.to_string())?;
    let key = |r: &RunReport| (r.axis_name.clone(), r.axis_value.unwrap().to_bits(), r.seed, r.method);
    let by: BTreeMap<_, f64> = out.reports.iter().map(|r| (key(r), r.throughput_bps)).collect();
    let get = |axis: &str, rate: f64, seed: u64, m: Method| by[&(axis.to_string(), rate.to_bits(), seed, m)];
    let mut baseline_ack_violations = 0;
    for rate in rates {
        for seed in &seeds {
            for axis in ["data-rate", "data-rate-no-ack-crc"] {
                let (p, b) = (get(axis, rate, *seed, Method::Proposed), get(axis, rate, *seed, Method::Baseline));
                check(p >= b, || format!("{axis} {rate} seed {seed}: proposed {p} < baseline {b}"))?;
            }
            let (on, off) = (
                get("data-rate", rate, *seed, Method::Proposed),
                get("data-rate-no-ack-crc", rate, *seed, Method::Proposed),
            );
            check(off >= on, || format!("rate {rate} seed {seed}: no ACK/CRC {off} < ACK/CRC {on}"))?;
            if get("data-rate-no-ack-crc", rate, *seed, Method::Baseline) < get("data-rate", rate, *seed, Method::Baseline) {
                baseline_ack_violations += 1;
            }
        }
    }
    Ok(format!(
        "{} bench runs; proposed >= baseline everywhere; proposed no-ACK/CRC >= ACK/CRC everywhere \
         (baseline: {baseline_ack_violations}/{} cells lower without ACK/CRC, informational)",
        out.reports.len(),
        rates.len() * seeds.len()
    ))
}

fn c5_containment() -> Verdict {
    let fc = FieldConfig::default();
    let mut segment_slots = 0usize;
    let mut all_slots = 0usize;
    let mut seed = 0u64;
    while segment_slots < 5000 {
        let mc = MobilityConfig {
            v_min: 1.0,
            v_max: fc.r_s,
            seed,
            ..MobilityConfig::default()
        };
        let mut walker = RandomWaypoint::new(&mc, &fc).map_err(|e| e.to_string())?;
        let mut states = vec![walker.spawn()];
        for _ in 0..400 {
            let next = walker.step(states.last().unwrap()).map_err(|e| e.to_string())?;
            states.push(next);
        }
        for w in states.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            all_slots += 1;
            let step = a.pos.distance(&b.pos);
            check(step <= fc.r_s / mc.slot_duration * mc.slot_duration + 1e-9, || {
                format!("seed {seed} slot {}: displacement {step} > r_s", b.slot_index)
            })?;
            if a.waypoints_reached != b.waypoints_reached || b.waypoints_reached != c.waypoints_reached {
                continue;
            }
            segment_slots += 1;
            let speed = observed_speed(a.pos, b.pos, mc.slot_duration).map_err(|e| e.to_string())?;
            let region = predicted_region(b.pos, speed, mc.slot_duration, fc.r_s, 1.0);
            check(region.contains(c.pos), || {
                format!(
                    "seed {seed} slot {}: next position {} outside region of radius {}",
                    b.slot_index,
                    region.center.distance(&c.pos),
                    region.radius
                )
            })?;
        }
        seed += 1;
    }
    Ok(format!(
        "{segment_slots} constant-velocity slots all contained; {all_slots} slots with displacement <= r_s"
    ))
}

fn c6_oracles() -> Verdict {
    const INSTANCES: usize = 1000;
    let mut rng = rng(0xacce);
    for k in 0..INSTANCES {
        let field = random_field(&mut rng, 60);
        let target = random_point(&mut rng, &field);
        let det = field.detectors_of(target);
        check(det == scan_detectors(&field, target), || format!("detectors_of differs on instance {k}"))?;

        let id = NodeId(rng.random_range(0..field.len()));
        let nb = field.neighbors_of(id).map_err(|e| e.to_string())?;
        check(nb == scan_neighbors(&field, id), || format!("neighbors_of differs on instance {k}"))?;

        let region = PredictedRegion {
            center: random_point(&mut rng, &field),
            radius: rng.random_range(0.0..=field.config().r_s),
        };
        check(wake_set(&field, &region) == scan_wake_set(&field, region.center, region.radius), || {
            format!("wake_set differs on instance {k}")
        })?;

        let all: std::collections::BTreeSet<NodeId> = (0..field.len()).map(NodeId).collect();
        check(field.k_closest(target, 2, &all) == scan_two_closest(&field, target, &all), || {
            format!("k_closest differs on instance {k}")
        })?;

        let ids: Vec<NodeId> = (0..rng.random_range(1..40)).map(|_| NodeId(rng.random_range(0..1000))).collect();
        let set = ids.iter().copied().collect();
        check(elect_representative(&set).ok() == scan_min(&ids), || format!("election differs on instance {k}"))?;
    }
    Ok(format!("5 operations x {INSTANCES} random instances match linear scans"))
}

fn conservation(out: &RunOutput) -> Result<(), String> {
    let ledger = &out.ledger;
    let initial: KahanSum = ledger.initial().iter().copied().collect();
    let fin: KahanSum = ledger.per_node().iter().copied().collect();
    let applied: KahanSum = ledger.debits().iter().map(|d| d.applied).collect();
    let drop = initial.value() - fin.value();
    let rel = (drop - applied.value()).abs() / applied.value().max(f64::MIN_POSITIVE);
    check(rel <= 1e-12, || format!("ledger drift {rel:e}"))?;
    check((ledger.e_sx_total() - applied.value()).abs() <= 1e-12 * applied.value(), || {
        "E_sx total differs from applied debits".into()
    })?;
    let (tx, rx) = ledger.radio_counts();
    let mut mac_tx: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut mac_rx: BTreeMap<NodeId, u64> = BTreeMap::new();
    for o in &out.mac {
        for (n, c) in &o.tx_counts {
            *mac_tx.entry(*n).or_default() += c;
        }
        for (n, c) in &o.rx_counts {
            *mac_rx.entry(*n).or_default() += c;
        }
    }
    check(tx == mac_tx && rx == mac_rx, || "radio counts disagree with the MAC".into())?;
    let per_step: KahanSum = out.report.per_step_energy.iter().copied().collect();
    check(
        (per_step.value() - out.report.total_energy_j).abs() <= 1e-9 * out.report.total_energy_j.max(1.0),
        || "per-step energy does not sum to the total".into(),
    )?;
    Ok(())
}

fn c7_ledger(er: &EnergyRuns) -> Verdict {
    let mut frames = 0usize;
    for (r_c, seed, p, b) in &er.runs {
        for out in [p, b] {
            conservation(out).map_err(|e| format!("r_c={r_c} seed={seed} {}: {e}", out.report.method))?;
            frames += out.mac.iter().map(|o| o.radio.len()).sum::<usize>();
        }
    }
    Ok(format!("{} runs conserve energy to 1e-12; {frames} radio events reconciled", er.runs.len() * 2))
}

fn c8_metrics() -> Verdict {
    let mc = MetricCounters {
        bits_received: 1_536_000,
        elapsed: 1.536,
        ..MetricCounters::default()
    };
    let t = metrics::throughput(&mc).map_err(|e| e.to_string())?;
    check(t == 1_000_000.0, || format!("throughput {t}"))?;
    let pdr = metrics::pdr(&MetricCounters {
        sent_pckt: 3000,
        recv_pckt: 2900,
        ..MetricCounters::default()
    })
    .unwrap();
    check(pdr == 2900.0 / 3000.0 && format!("{pdr:.4}") == "0.9667", || format!("pdr {pdr}"))?;
    let d = metrics::delay(2.3, 2.5).map_err(|e| e.to_string())?;
    check((d - 0.2).abs() <= f64::EPSILON, || format!("delay {d}"))?;
    check(metrics::delay(4.0, 4.0).unwrap() == 0.0, || "zero delay".into())?;
    check(metrics::delay(3.0, 2.0).is_err(), || "causality violation accepted".into())?;

    // One collision, then success: delivered at the end of the second slot.
    let cfg = SlotConfig {
        slot_duration: 1.0,
        ..SlotConfig::default()
    };
    let pair: std::collections::BTreeSet<NodeId> = [NodeId(0), NodeId(1)].into();
    let seed = (0..10_000u64)
        .find(|s| {
            let d = SlotDraws::new(*s);
            !wsn_track_sim::mac::contend(&pair, 0, &cfg, &d).collided.is_empty()
                && wsn_track_sim::mac::contend(&pair, 1, &cfg, &d).winner == Some(NodeId(0))
        })
        .ok_or("no seed with a collision followed by a win")?;
    let frame = |src| Frame::new(NodeId(src), NodeId(2), FrameKind::DataPayload, 512, 0).unwrap();
    let r = drain_queue(
        vec![TrafficSource::Finite(vec![frame(0)]), TrafficSource::Finite(vec![frame(1)])],
        0,
        100,
        &cfg,
        &SlotDraws::new(seed),
        &SharedChannel,
    )
    .map_err(|e| e.to_string())?;
    let (f, at) = r.delivered.iter().find(|(f, _)| f.src == NodeId(0)).ok_or("frame lost")?;
    let retry_delay = metrics::delay(f.enqueued_slot as f64 * cfg.slot_duration, *at as f64 * cfg.slot_duration)
        .map_err(|e| e.to_string())?;
    check(retry_delay == 2.0, || format!("delay after one retry {retry_delay}"))?;
    Ok("throughput 1e6 b/s, pdr 0.9667, delays 0.2/0/2 s exact".into())
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_wsn-track-sim");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.csv"));
        let status = Command::new(exe)
            .args(["run", "--seed", "3", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), || format!("invocation {k} exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    check(outputs[0] == outputs[1], || "CLI reports differ".into())?;

    let mut lib = Vec::new();
    for _ in 0..2 {
        let r = sim::run(&defaults(3)).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        report::write_reports(&[r], &mut buf).map_err(|e| e.to_string())?;
        lib.push(buf);
    }
    check(lib[0] == lib[1], || "library reports differ".into())?;
    check(lib[0] == outputs[0], || "library and CLI reports differ".into())?;
    Ok(format!("two CLI invocations and two library runs give identical {}-byte CSV", outputs[0].len()))
}

fn c10_loss() -> Verdict {
    // Nodes along y = 100 with a gap between x = 100 and x = 200.
    let xs = [20.0, 40.0, 60.0, 80.0, 100.0, 200.0, 220.0, 240.0];
    let pts: Vec<Point> = xs.iter().map(|x| Point::new(*x, 100.0)).collect();
    let cfg = ScenarioConfig {
        max_slots: 40,
        ..ScenarioConfig::default()
    };
    let field = NodeField::from_positions(&cfg.field, &pts, cfg.mode_costs.initial_energy).map_err(|e| e.to_string())?;
    let path: Vec<Point> = (0..40).map(|k| Point::new(10.0 + 8.0 * k as f64, 100.0)).collect();
    let trajectory = Trajectory::from_points(&path, 1.0).map_err(|e| e.to_string())?;
    let out = sim::simulate(&cfg, field, &trajectory).map_err(|e| e.to_string())?;
    check(out.report.lost_episodes >= 1, || "no loss recorded".into())?;
    let loss = out
        .events
        .iter()
        .find(|e| e.kind == wsn_track_sim::protocol::EventKind::TargetLost)
        .ok_or("no loss event")?;
    let rec = &out.records[loss.slot as usize];
    check(rec.awake_after == 0, || format!("{} nodes awake after the loss slot", rec.awake_after))?;
    check(out.field.awake().is_empty(), || "nodes awake at the end of the run".into())?;
    let x = trajectory.position(loss.slot as usize).unwrap().x;
    Ok(format!(
        "lost at slot {} (target x = {x}), {} lost episode(s), 0 nodes awake afterwards",
        loss.slot, out.report.lost_episodes
    ))
}

fn main() -> ExitCode {
    let er = energy_runs();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    match &er {
        Ok(er) => {
            results.push((1, "energy superiority", c1_energy(er)));
            results.push((2, "node-count scaling", c2_node_count()));
            results.push((3, "involved-node count", c3_involved(er)));
        }
        Err(e) => {
            for (n, name) in [(1, "energy superiority"), (2, "node-count scaling"), (3, "involved-node count")] {
                results.push((n, name, Err(e.clone())));
            }
        }
    }
    results.push((4, "throughput direction", c4_throughput()));
    results.push((5, "prediction containment", c5_containment()));
    results.push((6, "oracle equivalence", c6_oracles()));
    results.push((
        7,
        "energy-ledger conservation",
        er.as_ref().map_err(|e| e.clone()).and_then(c7_ledger),
    ));
    results.push((8, "metric fixtures", c8_metrics()));
    results.push((9, "determinism", c9_determinism()));
    results.push((10, "loss handling", c10_loss()));

    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
