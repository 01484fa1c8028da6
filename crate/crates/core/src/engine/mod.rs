//! Discrete-event simulation of scale-to-zero services sharing a warm pool.
//!
//! Each service holds at most one instance, which is either absent,
//! starting, or ready. A request that finds no instance triggers an
//! acquisition: the shared pool is checked first and only the shortfall is
//! cold-started. Requests arriving while the instance starts wait in a FIFO
//! and are all served when it becomes ready. A ready instance that sees no
//! request for `cooldown` is destroyed.
//!
//! Events at the same instant run in insertion order. All arrivals are
//! queued before the first event runs, so at any instant arrivals precede
//! readiness, idle checks, and pool refills.

mod config;
mod pool;
mod queue;

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

pub use config::{SimConfig, Timing};
pub use pool::{scale_up_split, Claim, ColdOnly, PodSource, PoolState, SharedPool};
pub use queue::{Event, EventKind, EventQueue, Origin};

use crate::error::ConfigError;
use crate::time::SimTime;
use crate::workload::{derive_seed, gen_trace, ArrivalTrace, Prng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("simulation invariant violated: {0}")]
    Invariant(String),

    #[error("simulation clock overflow")]
    ClockOverflow,
}

/// How a request was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Warm,
    PoolHit,
    ColdStart,
    /// Arrived while an instance was already starting.
    PendingOnStarting,
}

impl StartKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StartKind::Warm => "warm",
            StartKind::PoolHit => "pool_hit",
            StartKind::ColdStart => "cold_start",
            StartKind::PendingOnStarting => "pending_on_starting",
        }
    }
}

impl From<Origin> for StartKind {
    fn from(origin: Origin) -> Self {
        match origin {
            Origin::Cold => StartKind::ColdStart,
            Origin::Pool => StartKind::PoolHit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RequestRecord {
    pub service_id: usize,
    pub req_index: usize,
    pub arrival: SimTime,
    pub response: SimTime,
    pub start_kind: StartKind,
}

impl RequestRecord {
    pub fn response_s(&self) -> f64 {
        self.response.as_secs_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instance {
    None,
    Starting { ready_at: SimTime, origin: Origin },
    Ready,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Waiting {
    req_index: usize,
    arrival: SimTime,
    kind: StartKind,
}

/// Lifecycle of one service's instance slot.
#[derive(Debug, Clone)]
pub struct ServiceState {
    pub instance: Instance,
    pending: VecDeque<Waiting>,
    pub last_activity: SimTime,
    /// Bumped on every activity; idle checks carrying an older epoch are stale.
    pub idle_epoch: u64,
    generation: u64,
}

impl ServiceState {
    fn new() -> Self {
        ServiceState {
            instance: Instance::None,
            pending: VecDeque::new(),
            last_activity: SimTime::ZERO,
            idle_epoch: 0,
            generation: 0,
        }
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }
}

/// One trial in progress. Drive it with [`Simulation::step`] or [`Simulation::run`].
pub struct Simulation<P: PodSource> {
    timing: Timing,
    pods: P,
    services: Vec<ServiceState>,
    queue: EventQueue,
    record_base: Vec<usize>,
    records: Vec<Option<RequestRecord>>,
}

fn invariant(msg: impl Into<String>) -> SimError {
    SimError::Invariant(msg.into())
}

impl<P: PodSource> Simulation<P> {
    /// Queues every arrival of `traces`; `traces[i]` must belong to service `i`.
    pub fn new(timing: Timing, pods: P, traces: &[ArrivalTrace]) -> Result<Self, SimError> {
        if traces.is_empty() {
            return Err(ConfigError::invalid("n_services", "must be >= 1").into());
        }
        let total: usize = traces.iter().map(ArrivalTrace::len).sum();
        let mut queue = EventQueue::with_capacity(total + 2 * traces.len());
        let mut record_base = Vec::with_capacity(traces.len());
        let mut base = 0;
        for (service, trace) in traces.iter().enumerate() {
            if trace.service_id != service {
                return Err(invariant(format!(
                    "trace for service {} supplied at position {service}",
                    trace.service_id
                )));
            }
            record_base.push(base);
            base += trace.len();
            for (req_index, &at) in trace.arrivals.iter().enumerate() {
                queue.schedule(at, EventKind::Arrival { service, req_index });
            }
        }
        Ok(Simulation {
            timing,
            pods,
            services: vec![ServiceState::new(); traces.len()],
            queue,
            record_base,
            records: vec![None; total],
        })
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn pool(&self) -> Option<PoolState> {
        self.pods.state()
    }

    pub fn service(&self, id: usize) -> &ServiceState {
        &self.services[id]
    }

    /// Processes one event. Returns `false` once the queue is drained.
    pub fn step(&mut self) -> Result<bool, SimError> {
        let Some(event) = self.queue.pop() else {
            return Ok(false);
        };
        match event.kind {
            EventKind::Arrival { service, req_index } => self.on_arrival(service, req_index)?,
            EventKind::InstanceReady {
                service,
                origin,
                generation,
            } => self.on_instance_ready(service, origin, generation)?,
            EventKind::IdleCheck { service, epoch } => self.on_idle_check(service, epoch),
            EventKind::PoolPodReady => self.on_pool_pod_ready()?,
        }
        Ok(true)
    }

    /// Drains the queue and returns records ordered by `(service_id, req_index)`.
    pub fn run(mut self) -> Result<Vec<RequestRecord>, SimError> {
        while self.step()? {}
        self.into_records()
    }

    fn into_records(self) -> Result<Vec<RequestRecord>, SimError> {
        self.records
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| invariant(format!("request slot {i} never completed"))))
            .collect()
    }

    fn schedule(&mut self, at: SimTime, kind: EventKind) -> Result<(), SimError> {
        self.queue
            .schedule(at, kind)
            .map(|_| ())
            .ok_or_else(|| invariant(format!("event {kind:?} scheduled in the past at {at}")))
    }

    fn after(&self, delay: SimTime) -> Result<SimTime, SimError> {
        self.now().checked_add(delay).ok_or(SimError::ClockOverflow)
    }

    fn complete(
        &mut self,
        service: usize,
        waiting: Waiting,
        response: SimTime,
    ) -> Result<(), SimError> {
        let slot = self.record_base[service] + waiting.req_index;
        let record = RequestRecord {
            service_id: service,
            req_index: waiting.req_index,
            arrival: waiting.arrival,
            response,
            start_kind: waiting.kind,
        };
        match self.records.get_mut(slot) {
            Some(s @ None) => {
                *s = Some(record);
                Ok(())
            }
            _ => Err(invariant(format!(
                "request {}/{} completed twice",
                service, waiting.req_index
            ))),
        }
    }

    fn arm_idle_timer(&mut self, service: usize) -> Result<(), SimError> {
        let now = self.now();
        let state = &mut self.services[service];
        state.last_activity = now;
        state.idle_epoch += 1;
        let epoch = state.idle_epoch;
        let at = self.after(self.timing.cooldown)?;
        self.schedule(at, EventKind::IdleCheck { service, epoch })
    }

    pub(crate) fn on_arrival(&mut self, service: usize, req_index: usize) -> Result<(), SimError> {
        let now = self.now();
        match self.services[service].instance {
            Instance::Ready => {
                let waiting = Waiting {
                    req_index,
                    arrival: now,
                    kind: StartKind::Warm,
                };
                self.complete(service, waiting, self.timing.service_time)?;
                self.arm_idle_timer(service)
            }
            Instance::Starting { .. } => {
                self.services[service].pending.push_back(Waiting {
                    req_index,
                    arrival: now,
                    kind: StartKind::PendingOnStarting,
                });
                Ok(())
            }
            Instance::None => {
                let origin = self.acquire_instance(service)?;
                self.services[service].pending.push_back(Waiting {
                    req_index,
                    arrival: now,
                    kind: origin.into(),
                });
                Ok(())
            }
        }
    }

    /// Starts an instance for a service that has none, pool first.
    pub(crate) fn acquire_instance(&mut self, service: usize) -> Result<Origin, SimError> {
        if self.services[service].instance != Instance::None {
            return Err(invariant(format!(
                "service {service} acquiring while it already has an instance"
            )));
        }
        let now = self.now();
        let (origin, ready_at) = match self.pods.claim(now)? {
            Claim::Pool { replenish_at } => {
                if let Some(at) = replenish_at {
                    self.schedule(at, EventKind::PoolPodReady)?;
                }
                (Origin::Pool, self.after(self.timing.migration)?)
            }
            Claim::Cold => (Origin::Cold, self.after(self.timing.cold_init)?),
        };
        let state = &mut self.services[service];
        state.generation += 1;
        state.instance = Instance::Starting { ready_at, origin };
        let generation = state.generation;
        self.schedule(
            ready_at,
            EventKind::InstanceReady {
                service,
                origin,
                generation,
            },
        )?;
        Ok(origin)
    }

    pub(crate) fn on_instance_ready(
        &mut self,
        service: usize,
        origin: Origin,
        generation: u64,
    ) -> Result<(), SimError> {
        let now = self.now();
        let state = &mut self.services[service];
        match state.instance {
            Instance::Starting {
                ready_at,
                origin: o,
            } if state.generation == generation && ready_at == now && o == origin => {}
            _ => return Ok(()),
        }
        state.instance = Instance::Ready;
        let drained: Vec<Waiting> = state.pending.drain(..).collect();
        for waiting in drained {
            let response = (now - waiting.arrival) + self.timing.service_time;
            self.complete(service, waiting, response)?;
        }
        self.arm_idle_timer(service)
    }

    pub(crate) fn on_idle_check(&mut self, service: usize, epoch: u64) {
        let now = self.now();
        let cooldown = self.timing.cooldown;
        let state = &mut self.services[service];
        if epoch != state.idle_epoch {
            return;
        }
        if state.instance == Instance::Ready
            && state.pending.is_empty()
            && now.saturating_sub(state.last_activity) >= cooldown
        {
            state.instance = Instance::None;
        }
    }

    pub(crate) fn on_pool_pod_ready(&mut self) -> Result<(), SimError> {
        self.pods.pod_ready()
    }
}

/// Simulates explicit traces with the shared pool described by `config`.
pub fn simulate(
    config: &SimConfig,
    traces: &[ArrivalTrace],
) -> Result<Vec<RequestRecord>, SimError> {
    let timing = config.timing()?;
    let pool = SharedPool::new(config.pool_size, timing.replenish_latency);
    Simulation::new(timing, pool, traces)?.run()
}

/// Same traces with the original cold-only scale-up path; no pool exists.
pub fn simulate_without_pool(
    config: &SimConfig,
    traces: &[ArrivalTrace],
) -> Result<Vec<RequestRecord>, SimError> {
    let timing = config.timing()?;
    Simulation::new(timing, ColdOnly, traces)?.run()
}

/// Arrival traces for every service of one trial.
pub fn trial_traces(
    config: &SimConfig,
    trial_index: u64,
) -> Result<Vec<ArrivalTrace>, ConfigError> {
    config.validate()?;
    (0..config.n_services)
        .map(|service| {
            let mut rng = Prng::new(derive_seed(config.base_seed, trial_index, service as u64));
            gen_trace(
                service,
                config.requests_per_service,
                &config.arrival,
                &mut rng,
            )
        })
        .collect()
}

/// One complete multi-service trial; a pure function of `(config, trial_index)`.
pub fn run_trial(config: &SimConfig, trial_index: u64) -> Result<Vec<RequestRecord>, SimError> {
    let traces = trial_traces(config, trial_index)?;
    simulate(config, &traces)
}
