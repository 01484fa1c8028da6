//! Warm-pod capacity shared by all services.
//!
//! Scale-up consults the pool first and cold-starts only the shortfall. A
//! migrated pod is never returned; when replenishment is enabled the pool
//! starts warming a replacement at the moment of the grant.

use serde::Serialize;

use super::SimError;
use crate::time::SimTime;

/// Splits a scale-up demand into pods taken from the pool and pods that
/// must be cold-started: `(min(desired, available), desired - min(..))`.
pub fn scale_up_split(desired_new: usize, available: usize) -> (usize, usize) {
    let from_pool = desired_new.min(available);
    (from_pool, desired_new - from_pool)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PoolState {
    pub available: usize,
    pub warming: usize,
    pub capacity: usize,
}

impl PoolState {
    pub fn full(capacity: usize) -> Self {
        PoolState {
            available: capacity,
            warming: 0,
            capacity,
        }
    }

    pub fn within_bounds(&self) -> bool {
        self.available + self.warming <= self.capacity
    }
}

/// Outcome of asking for one new instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Cold,
    /// Served from the pool; `replenish_at` is when a replacement pod
    /// becomes available, if one is being prepared.
    Pool {
        replenish_at: Option<SimTime>,
    },
}

/// Where new instances come from.
pub trait PodSource {
    fn claim(&mut self, now: SimTime) -> Result<Claim, SimError>;

    fn pod_ready(&mut self) -> Result<(), SimError>;

    fn state(&self) -> Option<PoolState>;
}

/// Original autoscaler behavior: every new instance is a cold start.
#[derive(Debug, Default, Clone, Copy)]
pub struct ColdOnly;

impl PodSource for ColdOnly {
    fn claim(&mut self, _now: SimTime) -> Result<Claim, SimError> {
        Ok(Claim::Cold)
    }

    fn pod_ready(&mut self) -> Result<(), SimError> {
        Err(SimError::Invariant(
            "pool pod ready event without a pool".into(),
        ))
    }

    fn state(&self) -> Option<PoolState> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct SharedPool {
    state: PoolState,
    replenish_latency: Option<SimTime>,
}

impl SharedPool {
    /// `replenish_latency = None` disables refilling; the pool then only drains.
    pub fn new(capacity: usize, replenish_latency: Option<SimTime>) -> Self {
        SharedPool {
            state: PoolState::full(capacity),
            replenish_latency,
        }
    }
}

impl PodSource for SharedPool {
    fn claim(&mut self, now: SimTime) -> Result<Claim, SimError> {
        let (from_pool, _cold) = scale_up_split(1, self.state.available);
        if from_pool == 0 {
            return Ok(Claim::Cold);
        }
        self.state.available -= from_pool;
        let replenish_at = match self.replenish_latency {
            Some(latency) => {
                self.state.warming += from_pool;
                Some(now.checked_add(latency).ok_or(SimError::ClockOverflow)?)
            }
            None => None,
        };
        debug_assert!(self.state.within_bounds());
        Ok(Claim::Pool { replenish_at })
    }

    fn pod_ready(&mut self) -> Result<(), SimError> {
        if self.state.warming == 0 {
            return Err(SimError::Invariant(
                "pool pod ready while no pod is warming".into(),
            ));
        }
        self.state.warming -= 1;
        self.state.available += 1;
        debug_assert!(self.state.within_bounds());
        Ok(())
    }

    fn state(&self) -> Option<PoolState> {
        Some(self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deficit_rule() {
        assert_eq!(scale_up_split(3, 2), (2, 1));
        assert_eq!(scale_up_split(0, 5), (0, 0));
        assert_eq!(scale_up_split(2, 0), (0, 2));
        assert_eq!(scale_up_split(1, 1), (1, 0));
    }

    #[test]
    fn claim_takes_from_pool_and_starts_warming() {
        let mut pool = SharedPool::new(1, Some(SimTime::from_micros(7_000_000)));
        let claim = pool.claim(SimTime::from_micros(1_000_000)).unwrap();
        assert_eq!(
            claim,
            Claim::Pool {
                replenish_at: Some(SimTime::from_micros(8_000_000))
            }
        );
        assert_eq!(
            pool.state(),
            Some(PoolState {
                available: 0,
                warming: 1,
                capacity: 1
            })
        );
    }

    #[test]
    fn empty_pool_falls_through_to_cold() {
        let mut pool = SharedPool::new(0, Some(SimTime::ZERO));
        assert_eq!(pool.claim(SimTime::ZERO).unwrap(), Claim::Cold);
        assert_eq!(pool.state(), Some(PoolState::full(0)));
    }

    #[test]
    fn pod_ready_refills() {
        let mut pool = SharedPool::new(1, Some(SimTime::ZERO));
        pool.claim(SimTime::ZERO).unwrap();
        pool.pod_ready().unwrap();
        assert_eq!(pool.state(), Some(PoolState::full(1)));

        let mut pool = SharedPool::new(2, Some(SimTime::ZERO));
        pool.claim(SimTime::ZERO).unwrap();
        assert_eq!(pool.state().unwrap().available, 1);
        pool.pod_ready().unwrap();
        assert_eq!(pool.state(), Some(PoolState::full(2)));
    }

    #[test]
    fn pod_ready_without_warming_is_an_invariant_violation() {
        let mut pool = SharedPool::new(1, None);
        assert!(matches!(pool.pod_ready(), Err(SimError::Invariant(_))));
    }

    #[test]
    fn without_replenish_the_pool_only_drains() {
        let mut pool = SharedPool::new(2, None);
        assert_eq!(
            pool.claim(SimTime::ZERO).unwrap(),
            Claim::Pool { replenish_at: None }
        );
        assert_eq!(
            pool.claim(SimTime::ZERO).unwrap(),
            Claim::Pool { replenish_at: None }
        );
        assert_eq!(pool.claim(SimTime::ZERO).unwrap(), Claim::Cold);
        assert_eq!(pool.state().unwrap().warming, 0);
    }
}
