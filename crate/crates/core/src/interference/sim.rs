//! Pairwise traffic simulation and delay regression.
//!
//! Each directed link is a FIFO queue with deterministic unit service time.
//! Packets arrive on each tunnel of the measured pair as independent Poisson
//! processes. For every packet entering a tunnel we record its end-to-end
//! delay and the number of packets in flight on both tunnels at that instant,
//! then fit `d - h_own = alpha * h_other + c` by least squares.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{enumerate_tunnels, NetworkGraph, NodeId};

use super::{InterferenceError, InterferenceMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    /// Poisson arrival rate per tunnel, in packets per service time.
    pub rate: f64,
    /// Arrivals are generated on `[0, horizon)`.
    pub horizon: f64,
    pub min_samples: usize,
    pub threshold: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            rate: 0.3,
            horizon: 1e4,
            min_samples: 1000,
            threshold: 0.15,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<(), InterferenceError> {
        let bad = |m: &str| Err(InterferenceError::InvalidConfig(m.into()));
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return bad("rate must be a non-negative number");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if !self.threshold.is_finite() {
            return bad("threshold must be finite");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Launch time of the packet.
    pub time: f64,
    pub delay: f64,
    /// Packets in flight on the packet's own tunnel, excluding itself.
    pub h_own: u32,
    /// Packets in flight on the other tunnel of the pair.
    pub h_other: u32,
}

/// Samples for both tunnels of a measured pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficTrace {
    pub samples: [Vec<Sample>; 2],
}

impl TrafficTrace {
    /// Cross coefficient of tunnel `which` (0 or 1) on the other tunnel.
    pub fn alpha(&self, which: usize) -> Result<f64, InterferenceError> {
        regress_alpha(&self.samples[which])
    }
}

/// Least-squares slope of `delay - h_own` against `h_other`, with intercept.
///
/// The intercept absorbs the constant propagation/service delay of the
/// path, which otherwise leaks into the slope whenever `h_other` has a
/// non-zero mean.
pub fn regress_alpha(samples: &[Sample]) -> Result<f64, InterferenceError> {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return Err(InterferenceError::DegenerateRegressor);
    }
    let mx = samples.iter().map(|s| s.h_other as f64).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.delay - s.h_own as f64).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in samples {
        let x = s.h_other as f64 - mx;
        let y = s.delay - s.h_own as f64 - my;
        sxy += x * y;
        sxx += x * x;
    }
    if sxx <= 0.0 {
        return Err(InterferenceError::DegenerateRegressor);
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Launch,
    /// Packet reaches the tail of hop `hop` (or is delivered past the last).
    Arrive { hop: usize },
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    tunnel: usize,
    packet: usize,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Simulates two tunnels given as explicit node paths, with independent
/// arrival rates.
pub fn simulate_paths(
    paths: [&[NodeId]; 2],
    rates: [f64; 2],
    cfg: &TrafficConfig,
    seed: u64,
    stream: u64,
) -> Result<TrafficTrace, InterferenceError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // directed link -> queue slot
    let mut link_ids: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let hops: [Vec<usize>; 2] = paths.map(|p| {
        p.windows(2)
            .map(|w| {
                let next = link_ids.len();
                *link_ids.entry((w[0], w[1])).or_insert(next)
            })
            .collect()
    });
    let mut free_at = vec![0.0f64; link_ids.len()];

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Event>, time, tunnel, packet, kind| {
        heap.push(Event { time, seq, tunnel, packet, kind });
        seq += 1;
    };

    // Arrival times are drawn up front, tunnel by tunnel, so the stream
    // consumption does not depend on event interleaving.
    for (t, &rate) in rates.iter().enumerate() {
        if rate <= 0.0 {
            continue;
        }
        let exp = Exp::new(rate).map_err(|e| InterferenceError::InvalidConfig(e.to_string()))?;
        let mut now = exp.sample(&mut rng);
        let mut packet = 0;
        while now < cfg.horizon {
            push(&mut heap, now, t, packet, Kind::Launch);
            packet += 1;
            now += exp.sample(&mut rng);
        }
    }

    let mut in_flight = [0u32; 2];
    let mut samples: [Vec<Sample>; 2] = [Vec::new(), Vec::new()];
    // packet index -> sample slot
    let mut launched: [Vec<f64>; 2] = [Vec::new(), Vec::new()];

    while let Some(ev) = heap.pop() {
        let t = ev.tunnel;
        let hop = match ev.kind {
            Kind::Launch => {
                debug_assert_eq!(ev.packet, launched[t].len());
                launched[t].push(ev.time);
                samples[t].push(Sample {
                    time: ev.time,
                    delay: f64::NAN,
                    h_own: in_flight[t],
                    h_other: in_flight[1 - t],
                });
                in_flight[t] += 1;
                0
            }
            Kind::Arrive { hop } => hop,
        };
        if hop == hops[t].len() {
            in_flight[t] -= 1;
            samples[t][ev.packet].delay = ev.time - launched[t][ev.packet];
            continue;
        }
        let link = hops[t][hop];
        let start = free_at[link].max(ev.time);
        free_at[link] = start + 1.0;
        push(&mut heap, start + 1.0, t, ev.packet, Kind::Arrive { hop: hop + 1 });
    }

    for (t, &rate) in rates.iter().enumerate() {
        if rate > 0.0 && samples[t].len() < cfg.min_samples {
            return Err(InterferenceError::SimulationHorizonTooShort {
                collected: samples[t].len(),
                required: cfg.min_samples,
            });
        }
    }
    Ok(TrafficTrace { samples })
}

/// Routes the two tunnels on `g` and simulates them at `cfg.rate` each.
pub fn simulate_traffic(
    g: &NetworkGraph,
    pair: (usize, usize),
    cfg: &TrafficConfig,
    seed: u64,
) -> Result<TrafficTrace, InterferenceError> {
    let (k, l) = pair;
    if k == l {
        return Err(InterferenceError::SameTunnel);
    }
    let ts = enumerate_tunnels(g)?;
    let stream = (k * ts.len() + l) as u64;
    simulate_paths(
        [&ts.tunnels()[k].path, &ts.tunnels()[l].path],
        [cfg.rate, cfg.rate],
        cfg,
        seed,
        stream,
    )
}

/// Measures every unordered tunnel pair in isolation and thresholds the
/// larger of the two fitted cross coefficients.
pub fn infer_interference_matrix(
    g: &NetworkGraph,
    cfg: &TrafficConfig,
    seed: u64,
) -> Result<InterferenceMatrix, InterferenceError> {
    cfg.validate()?;
    let ts = enumerate_tunnels(g)?;
    let n = ts.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (k + 1..n).map(move |l| (k, l)))
        .collect();
    let decisions = pairs
        .par_iter()
        .map(|&(k, l)| {
            let trace = simulate_paths(
                [&ts.tunnels()[k].path, &ts.tunnels()[l].path],
                [cfg.rate, cfg.rate],
                cfg,
                seed,
                (k * n + l) as u64,
            )?;
            let a = trace.alpha(0)?.max(trace.alpha(1)?);
            Ok(a >= cfg.threshold)
        })
        .collect::<Result<Vec<bool>, InterferenceError>>()?;
    let mut f = InterferenceMatrix::identity(ts.index().clone());
    for (&(k, l), d) in pairs.iter().zip(decisions) {
        f.set(k, l, d);
    }
    Ok(f)
}
