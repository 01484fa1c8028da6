//! Test-only helpers: an independent fixed-timestep reference simulator and
//! random small-instance generation.
#![allow(dead_code)]

use poolsim::engine::{RequestRecord, SimConfig, StartKind};
use poolsim::workload::{ArrivalTrace, Prng, UniformSource};
use poolsim::SimTime;

/// Parameters for the reference simulator, all in whole milliseconds.
#[derive(Debug, Clone)]
pub struct TickParams {
    pub cold_ms: u64,
    pub migration_ms: u64,
    pub service_ms: u64,
    pub cooldown_ms: u64,
    pub pool_size: usize,
    pub replenish_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickRecord {
    pub service: usize,
    pub req: usize,
    pub response_ms: u64,
    pub kind: StartKind,
}

enum Slot {
    Off,
    Booting { ready: u64 },
    Up { idle_deadline: u64 },
}

/// Advances a 1 ms clock one tick at a time. Within a tick: arrivals in
/// service order, then instances finishing startup, then idle expiry, then
/// pool pods finishing warm-up.
pub fn tick_simulate(p: &TickParams, traces_ms: &[Vec<u64>]) -> Vec<TickRecord> {
    let n = traces_ms.len();
    let mut slots: Vec<Slot> = (0..n).map(|_| Slot::Off).collect();
    let mut waiting: Vec<Vec<(usize, u64, StartKind)>> = vec![Vec::new(); n];
    let mut next_req = vec![0usize; n];
    let mut available = p.pool_size;
    let mut warming: Vec<u64> = Vec::new();
    let mut out = Vec::new();

    let mut tick: u64 = 0;
    loop {
        let arrivals_left = (0..n).any(|s| next_req[s] < traces_ms[s].len());
        let booting = slots.iter().any(|s| matches!(s, Slot::Booting { .. }));
        if !arrivals_left && !booting {
            break;
        }

        for s in 0..n {
            if next_req[s] < traces_ms[s].len() && traces_ms[s][next_req[s]] == tick {
                let req = next_req[s];
                next_req[s] += 1;
                match slots[s] {
                    Slot::Up { .. } => {
                        out.push(TickRecord {
                            service: s,
                            req,
                            response_ms: p.service_ms,
                            kind: StartKind::Warm,
                        });
                        slots[s] = Slot::Up {
                            idle_deadline: tick + p.cooldown_ms,
                        };
                    }
                    Slot::Booting { .. } => {
                        waiting[s].push((req, tick, StartKind::PendingOnStarting));
                    }
                    Slot::Off => {
                        if available > 0 {
                            available -= 1;
                            if let Some(r) = p.replenish_ms {
                                warming.push(tick + r);
                            }
                            slots[s] = Slot::Booting {
                                ready: tick + p.migration_ms,
                            };
                            waiting[s].push((req, tick, StartKind::PoolHit));
                        } else {
                            slots[s] = Slot::Booting {
                                ready: tick + p.cold_ms,
                            };
                            waiting[s].push((req, tick, StartKind::ColdStart));
                        }
                    }
                }
            }
        }

        for s in 0..n {
            if let Slot::Booting { ready } = slots[s] {
                if ready == tick {
                    for (req, arrived, kind) in waiting[s].drain(..) {
                        out.push(TickRecord {
                            service: s,
                            req,
                            response_ms: tick - arrived + p.service_ms,
                            kind,
                        });
                    }
                    slots[s] = Slot::Up {
                        idle_deadline: tick + p.cooldown_ms,
                    };
                }
            }
        }

        for slot in slots.iter_mut() {
            if let Slot::Up { idle_deadline } = *slot {
                if idle_deadline == tick {
                    *slot = Slot::Off;
                }
            }
        }

        let before = warming.len();
        warming.retain(|&t| t != tick);
        available += before - warming.len();

        tick += 1;
    }

    out.sort_by_key(|r| (r.service, r.req));
    out
}

/// A random small instance on the millisecond grid.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: TickParams,
    pub traces_ms: Vec<Vec<u64>>,
}

fn uniform_int(rng: &mut Prng, lo: u64, hi: u64) -> u64 {
    lo + (rng.next_uniform() * (hi - lo + 1) as f64) as u64
}

/// Up to 3 services, up to 50 requests each, latencies in [0.5, 40] s.
/// Gaps are Pareto(1.1) with a random scale, rounded to whole ms and capped
/// at 600 s to bound the number of ticks.
pub fn random_instance(rng: &mut Prng, pool_size: Option<usize>) -> Instance {
    let lat = |rng: &mut Prng| uniform_int(rng, 500, 40_000);
    let params = TickParams {
        cold_ms: lat(rng),
        migration_ms: lat(rng),
        service_ms: lat(rng),
        cooldown_ms: lat(rng),
        pool_size: pool_size.unwrap_or_else(|| uniform_int(rng, 0, 3) as usize),
        replenish_ms: if rng.next_uniform() < 0.5 {
            None
        } else {
            Some(lat(rng))
        },
    };
    let services = uniform_int(rng, 1, 3) as usize;
    let requests = uniform_int(rng, 1, 50) as usize;
    let scale_ms = uniform_int(rng, 500, 5_000) as f64;
    let traces_ms = (0..services)
        .map(|_| {
            let mut t = 0u64;
            (0..requests)
                .map(|_| {
                    let u = rng.next_uniform();
                    let gap = (scale_ms * (1.0 - u).powf(-1.0 / 1.1))
                        .round()
                        .min(600_000.0);
                    t += gap as u64;
                    t
                })
                .collect()
        })
        .collect();
    Instance { params, traces_ms }
}

impl Instance {
    pub fn config(&self) -> SimConfig {
        let s = |ms: u64| ms as f64 / 1000.0;
        SimConfig {
            n_services: self.traces_ms.len(),
            requests_per_service: self.traces_ms[0].len(),
            cold_init_s: s(self.params.cold_ms),
            migration_s: s(self.params.migration_ms),
            service_time_s: s(self.params.service_ms),
            cooldown_s: s(self.params.cooldown_ms),
            pool_size: self.params.pool_size,
            replenish: self.params.replenish_ms.is_some(),
            replenish_latency_s: s(self.params.replenish_ms.unwrap_or(0)),
            trials: 1,
            ..SimConfig::default()
        }
    }

    pub fn traces(&self) -> Vec<ArrivalTrace> {
        self.traces_ms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                ArrivalTrace::from_times(
                    i,
                    t.iter()
                        .map(|&ms| SimTime::from_micros(ms * 1000))
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }
}

/// Compares engine records against the reference; `Err` describes the first mismatch.
pub fn compare(engine: &[RequestRecord], reference: &[TickRecord]) -> Result<(), String> {
    if engine.len() != reference.len() {
        return Err(format!(
            "{} engine records vs {} reference",
            engine.len(),
            reference.len()
        ));
    }
    for (e, r) in engine.iter().zip(reference) {
        let diff = (e.response.as_micros() as i64 - (r.response_ms * 1000) as i64).abs();
        if (e.service_id, e.req_index) != (r.service, r.req) || e.start_kind != r.kind || diff > 500
        {
            return Err(format!("engine {e:?} vs reference {r:?}"));
        }
    }
    Ok(())
}

/// One line per record; the byte-level form used for equivalence checks.
pub fn serialize(records: &[RequestRecord]) -> String {
    records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}\n",
                r.service_id,
                r.req_index,
                r.arrival,
                r.response,
                r.start_kind.as_str()
            )
        })
        .collect()
}
