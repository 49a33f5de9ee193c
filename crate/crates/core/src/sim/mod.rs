//! Packet-level discrete-event simulation.
//!
//! [`Model::Original`] runs the discarding queues as specified. The
//! [`Model::Equivalent`] run keeps every packet and serves all packets
//! captured by a service period together; it produces the same AoI path
//! and additionally exposes the per-packet products `X_i T_i`.
//!
//! Arrivals and service times come from two ChaCha streams derived from
//! the seed, and exactly one service time is drawn per service period, so
//! runs of the two models with the same seed are coupled.

mod engine;
mod stats;

use std::io::Write;

use crate::dist::ServiceDistribution;
use crate::error::{non_negative, positive, Error, Result};
use crate::{Scheme, SysState};

pub use engine::{Event, EventKind, EventSink, NoSink, TrajectoryCsv};
pub use stats::batch_ci;
pub(crate) use stats::{Compensated, RatioBatches};

pub const MIN_PACKETS: u64 = 10_000;
pub const MIN_BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Original,
    Equivalent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub model: Model,
    pub lambda: f64,
    pub eps_i: f64,
    /// Ignored for [`Scheme::Mg11`].
    pub eps_b: f64,
    pub dist: ServiceDistribution,
    /// Number of arrivals to generate.
    pub n_packets: u64,
    pub seed: u64,
    pub n_batches: usize,
}

impl SimConfig {
    pub fn new(
        scheme: Scheme,
        dist: ServiceDistribution,
        lambda: f64,
        eps_i: f64,
        eps_b: f64,
    ) -> Self {
        Self {
            scheme,
            model: Model::Original,
            lambda,
            eps_i,
            eps_b,
            dist,
            n_packets: 1_000_000,
            seed: 1,
            n_batches: 20,
        }
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn with_packets(mut self, n: u64) -> Self {
        self.n_packets = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_batches(mut self, n: usize) -> Self {
        self.n_batches = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        non_negative("eps_i", self.eps_i)?;
        if self.scheme == Scheme::Mg12Star {
            non_negative("eps_b", self.eps_b)?;
        }
        if self.n_packets < MIN_PACKETS {
            return Err(Error::Config(format!(
                "n_packets = {} is below the minimum of {MIN_PACKETS}",
                self.n_packets
            )));
        }
        if self.n_batches < MIN_BATCHES {
            return Err(Error::Config(format!(
                "n_batches = {} is below the minimum of {MIN_BATCHES}",
                self.n_batches
            )));
        }
        if self.n_batches as u64 * 100 > self.n_packets {
            return Err(Error::Config(format!(
                "{} batches leave fewer than 100 packets per batch",
                self.n_batches
            )));
        }
        Ok(())
    }

    pub(crate) fn effective_eps_b(&self) -> f64 {
        match self.scheme {
            Scheme::Mg11 => 0.0,
            Scheme::Mg12Star => self.eps_b,
        }
    }
}

/// Time spent in one state against the fraction of arrivals finding it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyEntry {
    pub state: SysState,
    pub time_fraction: f64,
    pub arrival_fraction: f64,
    /// Batch-means standard error of `time_fraction`.
    pub se_time: f64,
    /// Batch-means standard error of `time_fraction - arrival_fraction`.
    pub se_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy {
    pub entries: Vec<OccupancyEntry>,
}

impl Occupancy {
    pub fn get(&self, state: SysState) -> Option<&OccupancyEntry> {
        self.entries.iter().find(|e| e.state == state)
    }
}

/// Sample mean and batch-means standard error of `E[X_i T_i]` restricted
/// to packets whose predecessor found the server in `state`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEstimate {
    pub state: SysState,
    pub mean: f64,
    pub se: f64,
    pub count: u64,
}

/// Per-packet quantities only available from the equivalent model.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketStats {
    pub mean_xt: f64,
    pub se_xt: f64,
    /// `λ̂ (mean X T + mean X²/2)`, the area-partition estimate of `E[Δ]`.
    pub partition_aoi: f64,
    pub conditional_xt: Vec<ConditionalEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub avg_aoi: f64,
    pub avg_peak_aoi: f64,
    pub se_aoi: f64,
    pub se_peak: f64,
    pub arrivals: u64,
    /// Service completions, each one an AoI update.
    pub deliveries: u64,
    /// Packets that left the system with a service completion.
    pub delivered_packets: u64,
    pub discarded: u64,
    pub in_flight: u64,
    pub occupancy: Occupancy,
    pub horizon: f64,
    pub packet_stats: Option<PacketStats>,
}

/// Delivery instants and the generation time of the freshest packet
/// delivered at each of them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoiTrajectory {
    pub points: Vec<(f64, f64)>,
}

impl AoiTrajectory {
    /// `Δ(t) = t - u(t)` with `u(t) = 0` before the first delivery.
    pub fn delta_at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(d, _)| d <= t);
        let u = if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        };
        t - u
    }

    /// Δ just before each delivery after the first.
    pub fn peaks(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1].0 - w[0].1).collect()
    }
}

impl EventSink for AoiTrajectory {
    fn record(&mut self, ev: &Event) {
        if let EventKind::Delivery { generation } = ev.kind {
            self.points.push((ev.t, generation));
        }
    }
}

/// Runs `cfg` with the model it names.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    engine::run(cfg, &mut NoSink)
}

/// Runs the discarding queue regardless of `cfg.model`.
pub fn simulate_run(cfg: &SimConfig) -> Result<SimResult> {
    simulate(&cfg.with_model(Model::Original))
}

/// Runs the equivalent no-discard model regardless of `cfg.model`.
pub fn simulate_equivalent(cfg: &SimConfig) -> Result<SimResult> {
    simulate(&cfg.with_model(Model::Equivalent))
}

/// Runs `cfg` and keeps the delivery trajectory.
pub fn simulate_trajectory(cfg: &SimConfig) -> Result<(SimResult, AoiTrajectory)> {
    cfg.validate()?;
    let mut traj = AoiTrajectory::default();
    let res = engine::run(cfg, &mut traj)?;
    Ok((res, traj))
}

/// Runs `cfg` and writes every event as a CSV row
/// `t_event,event_type,delta_before,delta_after`.
pub fn simulate_with_dump<W: Write>(cfg: &SimConfig, out: W) -> std::io::Result<Result<SimResult>> {
    if let Err(e) = cfg.validate() {
        return Ok(Err(e));
    }
    let mut sink = TrajectoryCsv::new(out)?;
    let res = engine::run(cfg, &mut sink);
    sink.finish()?;
    Ok(res)
}

/// Fractions of time and of arrivals per state; see [`SimResult::occupancy`].
pub fn empirical_occupancy(cfg: &SimConfig) -> Result<Occupancy> {
    simulate(cfg).map(|r| r.occupancy)
}
