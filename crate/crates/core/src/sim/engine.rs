use std::io::{self, BufWriter, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{
    batch_ci, Compensated, ConditionalEstimate, Model, Occupancy, OccupancyEntry, PacketStats,
    RatioBatches, SimConfig, SimResult,
};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::{Scheme, SysState};

const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Arrival { seen: SysState },
    ServiceStart,
    Delivery { generation: f64 },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Arrival { .. } => "arrival",
            EventKind::ServiceStart => "service_start",
            EventKind::Delivery { .. } => "delivery",
        }
    }
}

/// One simulation event with the AoI just before and just after it.
/// Before the first delivery `Δ(t) = t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub delta_before: f64,
    pub delta_after: f64,
}

pub trait EventSink {
    fn record(&mut self, ev: &Event);
}

pub struct NoSink;

impl EventSink for NoSink {
    #[inline]
    fn record(&mut self, _: &Event) {}
}

/// Writes events as CSV rows. The first I/O error is kept and returned by
/// [`TrajectoryCsv::finish`]; later rows are dropped.
pub struct TrajectoryCsv<W: Write> {
    out: BufWriter<W>,
    err: Option<io::Error>,
}

impl<W: Write> TrajectoryCsv<W> {
    pub fn new(out: W) -> io::Result<Self> {
        let mut out = BufWriter::new(out);
        writeln!(out, "t_event,event_type,delta_before,delta_after")?;
        Ok(Self { out, err: None })
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.out.flush()
    }
}

impl<W: Write> EventSink for TrajectoryCsv<W> {
    fn record(&mut self, ev: &Event) {
        if self.err.is_some() {
            return;
        }
        let r = writeln!(
            self.out,
            "{},{},{},{}",
            sig12(ev.t),
            ev.kind.label(),
            sig12(ev.delta_before),
            sig12(ev.delta_after)
        );
        if let Err(e) = r {
            self.err = Some(e);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    idx: u64,
    arrival: f64,
    /// Inter-arrival time before this packet.
    x: f64,
    /// State found by the previous packet.
    prev_seen: SysState,
}

enum Store {
    /// Discarding queue: at most one packet held for service, one in the
    /// buffer (M/GI/1/2* only) and one in service.
    Original {
        held: Option<Packet>,
        buffer: Option<Packet>,
        in_service: Option<Packet>,
    },
    /// No discarding: every packet waits and all waiting packets enter
    /// service together.
    Equivalent {
        pending: Vec<Packet>,
        in_service: Vec<Packet>,
    },
}

struct Run<'a, S: EventSink> {
    cfg: &'a SimConfig,
    eps_b: f64,
    sink: &'a mut S,
    store: Store,
    service_rng: ChaCha8Rng,

    t: f64,
    state: SysState,
    hold_end: f64,
    service_end: f64,
    /// Generation time of the freshest delivered packet, 0 before any delivery.
    u: f64,
    delivered_once: bool,
    batch: usize,

    arrivals: u64,
    deliveries: u64,
    delivered_packets: u64,
    discarded: u64,

    aoi: RatioBatches,
    peak: RatioBatches,
    occ_time: Vec<[Compensated; 4]>,
    occ_seen: Vec<[u64; 4]>,

    xt: RatioBatches,
    x_sum: Compensated,
    x2_sum: Compensated,
    cond_xt: [RatioBatches; 4],
}

pub(crate) fn run<S: EventSink>(cfg: &SimConfig, sink: &mut S) -> Result<SimResult> {
    let nb = cfg.n_batches;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    arrival_rng.set_stream(ARRIVAL_STREAM);
    let mut service_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    service_rng.set_stream(SERVICE_STREAM);

    let store = match cfg.model {
        Model::Original => Store::Original {
            held: None,
            buffer: None,
            in_service: None,
        },
        Model::Equivalent => Store::Equivalent {
            pending: Vec::new(),
            in_service: Vec::new(),
        },
    };

    let mut r = Run {
        cfg,
        eps_b: cfg.effective_eps_b(),
        sink,
        store,
        service_rng,
        t: 0.0,
        state: SysState::Idle,
        hold_end: f64::INFINITY,
        service_end: f64::INFINITY,
        u: 0.0,
        delivered_once: false,
        batch: 0,
        arrivals: 0,
        deliveries: 0,
        delivered_packets: 0,
        discarded: 0,
        aoi: RatioBatches::new(nb),
        peak: RatioBatches::new(nb),
        occ_time: vec![[Compensated::default(); 4]; nb],
        occ_seen: vec![[0; 4]; nb],
        xt: RatioBatches::new(nb),
        x_sum: Compensated::default(),
        x2_sum: Compensated::default(),
        cond_xt: std::array::from_fn(|_| RatioBatches::new(nb)),
    };

    let inter = |rng: &mut ChaCha8Rng| -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / cfg.lambda
    };

    let mut last_arrival = 0.0;
    let mut last_seen = SysState::Idle;
    let mut next_arrival = inter(&mut arrival_rng);
    loop {
        // Ties are resolved service end, then hold end, then arrival.
        if r.service_end <= r.hold_end && r.service_end <= next_arrival {
            let te = r.service_end;
            r.advance(te);
            r.complete_service();
        } else if r.hold_end <= next_arrival {
            let te = r.hold_end;
            r.advance(te);
            r.start_service();
        } else {
            let te = next_arrival;
            r.advance(te);
            let idx = r.arrivals;
            r.batch = batch_of(idx, cfg.n_packets, nb);
            let pkt = Packet {
                idx,
                arrival: te,
                x: te - last_arrival,
                prev_seen: last_seen,
            };
            last_seen = r.state;
            last_arrival = te;
            r.arrive(pkt);
            r.arrivals += 1;
            if r.arrivals == cfg.n_packets {
                break;
            }
            next_arrival = te + inter(&mut arrival_rng);
        }
    }
    r.finish()
}

fn batch_of(idx: u64, n: u64, nb: usize) -> usize {
    ((idx as u128 * nb as u128) / n as u128) as usize
}

impl<S: EventSink> Run<'_, S> {
    fn advance(&mut self, te: f64) {
        let dt = te - self.t;
        self.occ_time[self.batch][self.state.index()].add(dt);
        if self.delivered_once {
            let area = 0.5 * dt * ((self.t - self.u) + (te - self.u));
            self.aoi.add(self.batch, area, dt);
        }
        self.t = te;
    }

    fn emit(&mut self, kind: EventKind, delta_after: f64) {
        let ev = Event {
            t: self.t,
            kind,
            delta_before: self.t - self.u,
            delta_after,
        };
        self.sink.record(&ev);
    }

    fn arrive(&mut self, pkt: Packet) {
        let seen = self.state;
        self.occ_seen[self.batch][seen.index()] += 1;
        let delta = self.t - self.u;
        self.emit(EventKind::Arrival { seen }, delta);

        let mg11 = self.cfg.scheme == Scheme::Mg11;
        match &mut self.store {
            Store::Original { held, buffer, .. } => match seen {
                SysState::Idle => *held = Some(pkt),
                SysState::WaitIdle | SysState::WaitBusy => {
                    if held.replace(pkt).is_some() {
                        self.discarded += 1;
                    }
                }
                SysState::Busy => {
                    if mg11 || buffer.replace(pkt).is_some() {
                        self.discarded += 1;
                    }
                }
            },
            Store::Equivalent { pending, .. } => pending.push(pkt),
        }
        if seen == SysState::Idle {
            self.start_hold(self.cfg.eps_i, SysState::WaitIdle);
        }
    }

    fn start_hold(&mut self, eps: f64, state: SysState) {
        if eps == 0.0 {
            self.start_service();
        } else {
            self.state = state;
            self.hold_end = self.t + eps;
        }
    }

    fn start_service(&mut self) {
        match &mut self.store {
            Store::Original {
                held, in_service, ..
            } => {
                *in_service = held.take();
                debug_assert!(in_service.is_some());
            }
            Store::Equivalent {
                pending,
                in_service,
            } => {
                debug_assert!(in_service.is_empty() && !pending.is_empty());
                std::mem::swap(pending, in_service);
            }
        }
        self.state = SysState::Busy;
        self.hold_end = f64::INFINITY;
        let s = self.cfg.dist.sample(&mut self.service_rng);
        self.service_end = self.t + s;
        let delta = self.t - self.u;
        self.emit(EventKind::ServiceStart, delta);
    }

    fn complete_service(&mut self) {
        let t = self.t;
        let generation = match &mut self.store {
            Store::Original { in_service, .. } => {
                let p = in_service.take().expect("a packet is in service");
                self.delivered_packets += 1;
                p.arrival
            }
            Store::Equivalent { in_service, .. } => {
                let freshest = in_service.last().expect("a batch is in service").arrival;
                for p in in_service.drain(..) {
                    self.delivered_packets += 1;
                    if p.idx == 0 {
                        continue;
                    }
                    let b = batch_of(p.idx, self.cfg.n_packets, self.cfg.n_batches);
                    let xt = p.x * (t - p.arrival);
                    self.xt.add(b, xt, 1.0);
                    self.cond_xt[p.prev_seen.index()].add(b, xt, 1.0);
                    self.x_sum.add(p.x);
                    self.x2_sum.add(0.5 * p.x * p.x);
                }
                freshest
            }
        };
        let before = t - self.u;
        if self.delivered_once {
            self.peak.add(self.batch, before, 1.0);
        }
        self.deliveries += 1;
        self.delivered_once = true;
        self.u = generation;
        self.sink.record(&Event {
            t,
            kind: EventKind::Delivery { generation },
            delta_before: before,
            delta_after: t - generation,
        });

        self.service_end = f64::INFINITY;
        let waiting = match &mut self.store {
            Store::Original { held, buffer, .. } => {
                *held = buffer.take();
                held.is_some()
            }
            Store::Equivalent { pending, .. } => !pending.is_empty(),
        };
        if self.cfg.scheme == Scheme::Mg12Star && waiting {
            self.start_hold(self.eps_b, SysState::WaitBusy);
        } else {
            self.state = SysState::Idle;
        }
    }

    fn finish(self) -> Result<SimResult> {
        let (avg_aoi, se_aoi) = self.aoi.estimate().map_err(too_few_deliveries)?;
        let (avg_peak_aoi, se_peak) = self.peak.estimate().map_err(too_few_deliveries)?;

        let states = self.cfg.scheme.states();
        let mut total_time = [Compensated::default(); 4];
        let mut total_seen = [0u64; 4];
        for b in 0..self.cfg.n_batches {
            for s in 0..4 {
                total_time[s].add(self.occ_time[b][s].value());
                total_seen[s] += self.occ_seen[b][s];
            }
        }
        let horizon: f64 = total_time.iter().map(|c| c.value()).sum();
        let seen_all: u64 = total_seen.iter().sum();
        let mut entries = Vec::with_capacity(states.len());
        for &st in states {
            let s = st.index();
            let mut fracs = Vec::with_capacity(self.cfg.n_batches);
            let mut diffs = Vec::with_capacity(self.cfg.n_batches);
            for b in 0..self.cfg.n_batches {
                let time: f64 = self.occ_time[b].iter().map(|c| c.value()).sum();
                let seen: u64 = self.occ_seen[b].iter().sum();
                let frac = self.occ_time[b][s].value() / time;
                fracs.push(frac);
                diffs.push(frac - self.occ_seen[b][s] as f64 / seen as f64);
            }
            let (_, se_time) = batch_ci(&fracs)?;
            let (_, se_diff) = batch_ci(&diffs)?;
            entries.push(OccupancyEntry {
                state: st,
                time_fraction: total_time[s].value() / horizon,
                arrival_fraction: total_seen[s] as f64 / seen_all as f64,
                se_time,
                se_diff,
            });
        }

        let in_flight = match &self.store {
            Store::Original {
                held,
                buffer,
                in_service,
            } => [held, buffer, in_service]
                .iter()
                .filter(|p| p.is_some())
                .count() as u64,
            Store::Equivalent {
                pending,
                in_service,
            } => (pending.len() + in_service.len()) as u64,
        };

        let packet_stats = match self.cfg.model {
            Model::Original => None,
            Model::Equivalent => {
                let (mean_xt, se_xt) = self.xt.estimate()?;
                let n = self.xt.total_den();
                let lambda_hat = n / self.x_sum.value();
                let partition_aoi = lambda_hat * (mean_xt + self.x2_sum.value() / n);
                let mut conditional_xt = Vec::new();
                for &st in states {
                    let acc = &self.cond_xt[st.index()];
                    let count = acc.total_den();
                    if count == 0.0 {
                        continue;
                    }
                    let (mean, se) = acc.estimate().unwrap_or((f64::NAN, f64::NAN));
                    conditional_xt.push(ConditionalEstimate {
                        state: st,
                        mean,
                        se,
                        count: count as u64,
                    });
                }
                Some(PacketStats {
                    mean_xt,
                    se_xt,
                    partition_aoi,
                    conditional_xt,
                })
            }
        };

        Ok(SimResult {
            avg_aoi,
            avg_peak_aoi,
            se_aoi,
            se_peak,
            arrivals: self.arrivals,
            deliveries: self.deliveries,
            delivered_packets: self.delivered_packets,
            discarded: self.discarded,
            in_flight,
            occupancy: Occupancy { entries },
            horizon,
            packet_stats,
        })
    }
}

fn too_few_deliveries(_: Error) -> Error {
    Error::Config("too few deliveries per batch; increase n_packets or reduce n_batches".into())
}
