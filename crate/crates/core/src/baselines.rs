//! Reference batching schemes and an exhaustive optimum for tiny instances.
//!
//! The baselines use the same generation budgets as the proposed scheduler
//! and never let a step overrun a budget: a service is stopped as soon as
//! its next batch would finish past its budget.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Scenario, ServiceId};
use crate::scheduler::{Batch, Schedule, TaskRef};

/// Largest instance [`exhaustive_oracle`] accepts.
pub const ORACLE_MAX_SERVICES: usize = 3;
pub const ORACLE_MAX_HORIZON: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exhaustive oracle supports at most {max} services, got {got}")]
    TooManyServices { got: usize, max: usize },
    #[error("exhaustive oracle supports a horizon of at most {max} batches, got {got}")]
    HorizonTooLong { got: usize, max: usize },
}

#[derive(Debug, Clone)]
struct Pending {
    id: ServiceId,
    budget: f64,
    completed: u32,
}

/// Services ordered by ascending deadline (ties by id), paired with budgets.
fn by_deadline(scenario: &Scenario, budgets: &[f64]) -> Vec<Pending> {
    let mut v: Vec<(f64, Pending)> = scenario
        .services
        .iter()
        .zip(budgets)
        .map(|(s, &budget)| (s.deadline, Pending { id: s.id, budget, completed: 0 }))
        .collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.id.cmp(&y.1.id)));
    v.into_iter().map(|(_, p)| p).collect()
}

fn emit(batches: &mut Vec<Batch>, members: &mut [Pending], start: f64, duration: f64) {
    let members = members
        .iter_mut()
        .map(|p| {
            p.completed += 1;
            TaskRef { service: p.id, step: p.completed }
        })
        .collect();
    batches.push(Batch { index: batches.len(), start, duration, members });
}

/// Drops the tightest service among `active[..len]` that cannot finish a
/// batch of `len` tasks starting at `now`. Returns whether one was dropped.
fn drop_one_overrun(active: &mut Vec<Pending>, len: usize, now: f64, duration: f64) -> bool {
    let violator = active[..len]
        .iter()
        .enumerate()
        .filter(|(_, p)| now + duration > p.budget)
        .min_by(|(_, x), (_, y)| x.budget.total_cmp(&y.budget))
        .map(|(i, _)| i);
    match violator {
        Some(i) => {
            active.remove(i);
            true
        }
        None => false,
    }
}

/// Serves services one at a time in deadline order, one step per batch,
/// until the next solo step would overrun the current service's budget.
pub fn single_instance(scenario: &Scenario, budgets: &[f64]) -> Schedule {
    let solo = scenario.delay_model.batch_delay(1);
    let mut batches = Vec::new();
    let mut now = 0.0;
    for mut p in by_deadline(scenario, budgets) {
        while now + solo <= p.budget {
            emit(&mut batches, std::slice::from_mut(&mut p), now, solo);
            now += solo;
        }
    }
    Schedule::from_batches(&scenario.ids(), batches)
}

/// Every batch holds one step of every service still running, members
/// listed in deadline order.
pub fn greedy_batching(scenario: &Scenario, budgets: &[f64]) -> Schedule {
    let model = &scenario.delay_model;
    let mut active = by_deadline(scenario, budgets);
    let mut batches = Vec::new();
    let mut now = 0.0;
    while !active.is_empty() {
        let len = active.len();
        let duration = model.batch_delay(len);
        if drop_one_overrun(&mut active, len, now, duration) {
            continue;
        }
        emit(&mut batches, &mut active, now, duration);
        now += duration;
    }
    Schedule::from_batches(&scenario.ids(), batches)
}

/// Default fixed batch size: half the service count, at least one.
pub fn default_fixed_size(services: usize) -> usize {
    (services / 2).max(1)
}

/// Batches of up to `size` services taken in deadline order; the batch
/// shrinks once fewer services remain.
pub fn fixed_size_batching(scenario: &Scenario, budgets: &[f64], size: usize) -> Schedule {
    let model = &scenario.delay_model;
    let size = size.max(1);
    let mut active = by_deadline(scenario, budgets);
    let mut batches = Vec::new();
    let mut now = 0.0;
    while !active.is_empty() {
        let len = size.min(active.len());
        let duration = model.batch_delay(len);
        if drop_one_overrun(&mut active, len, now, duration) {
            continue;
        }
        emit(&mut batches, &mut active[..len], now, duration);
        now += duration;
    }
    Schedule::from_batches(&scenario.ids(), batches)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub schedule: Schedule,
    pub mean_quality: f64,
}

struct Search<'a> {
    scenario: &'a Scenario,
    budgets: &'a [f64],
    horizon: usize,
    // (elapsed bits, depth, steps) -> (best quality sum, best first subset)
    memo: HashMap<(u64, usize, [u32; ORACLE_MAX_SERVICES]), (f64, u8)>,
}

impl Search<'_> {
    fn terminal(&self, steps: &[u32; ORACLE_MAX_SERVICES]) -> f64 {
        let q = &self.scenario.quality_model;
        (0..self.scenario.len()).map(|k| q.quality(steps[k])).sum()
    }

    /// Best achievable quality sum from this state; subset 0 means stop.
    fn best(&mut self, now: f64, depth: usize, steps: [u32; ORACLE_MAX_SERVICES]) -> (f64, u8) {
        let key = (now.to_bits(), depth, steps);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let mut best = (self.terminal(&steps), 0u8);
        if depth < self.horizon {
            let k = self.scenario.len();
            for subset in 1u8..(1 << k) {
                let size = subset.count_ones() as usize;
                let duration = self.scenario.delay_model.batch_delay(size);
                let end = now + duration;
                let fits = (0..k).filter(|i| subset & (1 << i) != 0).all(|i| end <= self.budgets[i]);
                if !fits {
                    continue;
                }
                let mut next = steps;
                for (i, s) in next.iter_mut().enumerate().take(k) {
                    if subset & (1 << i) != 0 {
                        *s += 1;
                    }
                }
                let (value, _) = self.best(end, depth + 1, next);
                if value < best.0 {
                    best = (value, subset);
                }
            }
        }
        self.memo.insert(key, best);
        best
    }
}

/// Minimum mean FID over every back-to-back sequence of at most `horizon`
/// batches, each batch a non-empty subset of services advancing one step,
/// with no batch ending past a member's budget.
pub fn exhaustive_oracle(scenario: &Scenario, budgets: &[f64], horizon: usize) -> Result<OracleOutcome, OracleError> {
    let k = scenario.len();
    if k > ORACLE_MAX_SERVICES {
        return Err(OracleError::TooManyServices { got: k, max: ORACLE_MAX_SERVICES });
    }
    if horizon > ORACLE_MAX_HORIZON {
        return Err(OracleError::HorizonTooLong { got: horizon, max: ORACLE_MAX_HORIZON });
    }
    let mut search = Search { scenario, budgets, horizon, memo: HashMap::new() };
    let ids = scenario.ids();
    let mut steps = [0u32; ORACLE_MAX_SERVICES];
    let (total, _) = search.best(0.0, 0, steps);

    let mut batches = Vec::new();
    let mut now = 0.0;
    loop {
        let (_, subset) = search.best(now, batches.len(), steps);
        if subset == 0 {
            break;
        }
        let mut members = Vec::new();
        for i in 0..k {
            if subset & (1 << i) != 0 {
                steps[i] += 1;
                members.push(TaskRef { service: ids[i], step: steps[i] });
            }
        }
        let duration = scenario.delay_model.batch_delay(members.len());
        batches.push(Batch { index: batches.len(), start: now, duration, members });
        now += duration;
    }
    Ok(OracleOutcome { schedule: Schedule::from_batches(&ids, batches), mean_quality: total / k as f64 })
}
