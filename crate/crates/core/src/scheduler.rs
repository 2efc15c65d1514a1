//! Batch denoising scheduler.
//!
//! The scheduler repeatedly clusters the active services by how many steps
//! they can still finish, sizes the next batch, and commits it. An outer
//! search over the target step count `T*` keeps the run with the lowest
//! mean FID.
//!
//! All times are relative to the moment generation starts; budgets are the
//! per-service generation windows left after transmission.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DelayModel, QualityModel, Scenario, ServiceId};

/// One denoising step of one service, placed in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRef {
    pub service: ServiceId,
    /// 1-based step index within the service.
    pub step: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub index: usize,
    pub start: f64,
    pub duration: f64,
    pub members: Vec<TaskRef>,
}

impl Batch {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-service result of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceOutcome {
    pub id: ServiceId,
    pub completed_steps: u32,
    /// End of the batch holding the last completed step; `None` on outage.
    pub completion_time: Option<f64>,
    pub outage: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("service {0} is not part of the schedule")]
    UnknownService(ServiceId),
    #[error("service {0} completed no step and has no completion time")]
    Outage(ServiceId),
}

/// Ordered batches plus the per-service outcome they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub batches: Vec<Batch>,
    pub services: Vec<ServiceOutcome>,
}

impl Schedule {
    /// Builds a schedule from committed batches, deriving step counts and
    /// completion times. `ids` fixes the order of `services`.
    pub fn from_batches(ids: &[ServiceId], batches: Vec<Batch>) -> Self {
        let mut last: HashMap<ServiceId, (u32, f64)> = HashMap::new();
        for batch in &batches {
            let end = batch.end();
            for m in &batch.members {
                let e = last.entry(m.service).or_insert((0, 0.0));
                if m.step >= e.0 {
                    *e = (m.step, end);
                }
            }
        }
        let services = ids
            .iter()
            .map(|&id| match last.get(&id) {
                Some(&(steps, end)) if steps > 0 => ServiceOutcome {
                    id,
                    completed_steps: steps,
                    completion_time: Some(end),
                    outage: false,
                },
                _ => ServiceOutcome { id, completed_steps: 0, completion_time: None, outage: true },
            })
            .collect();
        Self { batches, services }
    }

    /// Schedule in which no service runs.
    pub fn all_outage(ids: &[ServiceId]) -> Self {
        Self::from_batches(ids, Vec::new())
    }

    pub fn outcome(&self, id: ServiceId) -> Option<&ServiceOutcome> {
        self.services.iter().find(|s| s.id == id)
    }

    pub fn completed_steps(&self) -> Vec<u32> {
        self.services.iter().map(|s| s.completed_steps).collect()
    }

    pub fn outage_count(&self) -> usize {
        self.services.iter().filter(|s| s.outage).count()
    }

    /// Mean FID over every service, outages included.
    pub fn mean_quality(&self, model: &QualityModel) -> f64 {
        model.mean_quality(self.services.iter().map(|s| s.completed_steps))
    }

    /// Content generation delay of service `id`: the end of the batch
    /// holding its last step.
    pub fn generation_delay(&self, id: ServiceId) -> Result<f64, ScheduleError> {
        let outcome = self.outcome(id).ok_or(ScheduleError::UnknownService(id))?;
        if outcome.completed_steps == 0 {
            return Err(ScheduleError::Outage(id));
        }
        self.batches
            .iter()
            .find(|b| b.members.iter().any(|m| m.service == id && m.step == outcome.completed_steps))
            .map(Batch::end)
            .ok_or(ScheduleError::Outage(id))
    }

    /// Finish time of the last batch, 0 for an empty schedule.
    pub fn makespan(&self) -> f64 {
        self.batches.last().map_or(0.0, Batch::end)
    }
}

/// Free-function form of [`Schedule::generation_delay`].
pub fn generation_delay(schedule: &Schedule, id: ServiceId) -> Result<f64, ScheduleError> {
    schedule.generation_delay(id)
}

/// Scheduler-side view of one service that can still receive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveServiceState {
    pub id: ServiceId,
    /// Generation budget measured from time zero.
    pub budget: f64,
    /// Steps completed so far.
    pub completed: u32,
    /// Budget left at the current batch boundary.
    pub remaining: f64,
    /// Solo steps still affordable: `floor(remaining / (a + b))`.
    pub feasible: u32,
    /// `completed + feasible`.
    pub ideal: u32,
}

impl ActiveServiceState {
    pub fn new(id: ServiceId, budget: f64, model: &DelayModel) -> Self {
        let mut s = Self { id, budget, completed: 0, remaining: budget, feasible: 0, ideal: 0 };
        s.refresh(model);
        s
    }

    fn refresh(&mut self, model: &DelayModel) {
        self.feasible = affordable_steps(self.remaining, model);
        self.ideal = self.completed.saturating_add(self.feasible);
    }
}

fn affordable_steps(remaining: f64, model: &DelayModel) -> u32 {
    if remaining <= 0.0 {
        return 0;
    }
    let steps = (remaining / model.solo_step()).floor();
    if steps >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        steps as u32
    }
}

/// Ascending ideal step count, then remaining budget, then id.
fn priority_order(x: &ActiveServiceState, y: &ActiveServiceState) -> Ordering {
    x.ideal
        .cmp(&y.ideal)
        .then_with(|| x.remaining.total_cmp(&y.remaining))
        .then_with(|| x.id.cmp(&y.id))
}

/// Result of a clustering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Services that can no longer afford a solo step, at their final count.
    pub finalized: Vec<ActiveServiceState>,
    /// Length of the tight-cluster prefix (`ideal <= T*`) of the sorted
    /// active states.
    pub tight: usize,
}

/// Charges the previous batch to every active service, drops services that
/// cannot afford another solo step, and sorts the rest by priority.
///
/// The tight cluster is returned as a prefix length of `states`.
pub fn cluster(
    states: &mut Vec<ActiveServiceState>,
    prev_batch_duration: f64,
    target_steps: u32,
    model: &DelayModel,
) -> Clustering {
    let mut finalized = Vec::new();
    let tight = cluster_into(states, prev_batch_duration, target_steps, model, &mut finalized);
    Clustering { finalized, tight }
}

fn cluster_into(
    states: &mut Vec<ActiveServiceState>,
    prev_batch_duration: f64,
    target_steps: u32,
    model: &DelayModel,
    finalized: &mut Vec<ActiveServiceState>,
) -> usize {
    states.retain_mut(|s| {
        s.remaining -= prev_batch_duration;
        s.refresh(model);
        if s.feasible == 0 {
            finalized.push(s.clone());
            false
        } else {
            true
        }
    });
    states.sort_by(priority_order);
    states.partition_point(|s| s.ideal <= target_steps)
}

fn floor_to_count(x: f64) -> i64 {
    if x.is_nan() {
        return 0;
    }
    x.floor().clamp(i64::MIN as f64, i64::MAX as f64) as i64
}

/// Size of the next batch.
///
/// With a non-empty tight cluster the batch covers it and grows into the
/// loose cluster as far as the tightest member's remaining budget allows
/// without losing one of its feasible steps. Otherwise the batch is as large
/// as possible while every service can still reach `T*` steps.
pub fn pack_size(states: &[ActiveServiceState], tight: usize, target_steps: u32, model: &DelayModel) -> usize {
    let active = states.len();
    if active == 0 {
        return 0;
    }
    let (a, b) = (model.a, model.b);
    let size = if tight > 0 {
        let cluster = &states[..tight];
        let feasible_max = f64::from(cluster.iter().map(|s| s.feasible).max().unwrap_or(1).max(1));
        let remaining_min = cluster.iter().map(|s| s.remaining).fold(f64::INFINITY, f64::min);
        let grown = floor_to_count((remaining_min - b * feasible_max) / (a * feasible_max));
        (tight as i64).max((active as i64).min(grown))
    } else {
        let ideal_min = f64::from(states.iter().map(|s| s.ideal).min().unwrap_or(0));
        let target = f64::from(target_steps.max(1));
        let grown = floor_to_count(((a + b) * ideal_min - b * target) / (a * target));
        (active as i64).min(grown)
    };
    size.clamp(1, active as i64) as usize
}

/// Outcome of committing one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Commit {
    /// The committed batch; empty (duration 0) when every candidate was dropped.
    pub batch: Batch,
    /// Candidates dropped because the batch would overrun their budget.
    pub finalized: Vec<ActiveServiceState>,
}

/// Places the next step of the first `size` services into a batch starting
/// at `start`.
///
/// A candidate whose budget cannot cover the batch is dropped and finalized,
/// which shrinks the batch; this repeats until every remaining candidate
/// fits. Members get their completed count incremented.
pub fn batch_commit(
    states: &mut Vec<ActiveServiceState>,
    size: usize,
    start: f64,
    index: usize,
    model: &DelayModel,
) -> Commit {
    let mut finalized = Vec::new();
    let size = commit_into(states, size, start, model, &mut finalized);
    let batch = Batch { index, start, duration: model.batch_delay(size), members: members(&states[..size]) };
    Commit { batch, finalized }
}

fn members(states: &[ActiveServiceState]) -> Vec<TaskRef> {
    states.iter().map(|s| TaskRef { service: s.id, step: s.completed }).collect()
}

/// Shrinks the candidate prefix to a fixed point and advances its members;
/// returns the final batch size.
fn commit_into(
    states: &mut Vec<ActiveServiceState>,
    size: usize,
    start: f64,
    model: &DelayModel,
    finalized: &mut Vec<ActiveServiceState>,
) -> usize {
    let mut size = size.min(states.len());
    loop {
        let duration = model.batch_delay(size);
        let violator = states[..size]
            .iter()
            .enumerate()
            .filter(|(_, s)| start + duration > s.budget)
            .min_by(|(_, x), (_, y)| x.budget.total_cmp(&y.budget))
            .map(|(i, _)| i);
        match violator {
            Some(i) => {
                finalized.push(states.remove(i));
                size -= 1;
            }
            None => break,
        }
    }
    for s in &mut states[..size] {
        s.completed += 1;
    }
    size
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackingOutcome {
    pub schedule: Schedule,
    pub mean_quality: f64,
    pub target_steps: u32,
}

/// Runs the clustering-packing-batching loop and returns the completed step
/// count of each service in scenario order. Batches are pushed to `record`
/// when given.
fn simulate(scenario: &Scenario, budgets: &[f64], target_steps: u32, mut record: Option<&mut Vec<Batch>>) -> Vec<u32> {
    let model = &scenario.delay_model;
    let mut states: Vec<ActiveServiceState> = scenario
        .services
        .iter()
        .zip(budgets)
        .map(|(s, &budget)| ActiveServiceState::new(s.id, budget, model))
        .collect();
    let mut done = Vec::with_capacity(states.len());
    let mut now = 0.0;
    let mut prev = 0.0;
    let mut batches = 0;
    loop {
        let tight = cluster_into(&mut states, prev, target_steps, model, &mut done);
        if states.is_empty() {
            break;
        }
        let size = pack_size(&states, tight, target_steps, model);
        let size = commit_into(&mut states, size, now, model, &mut done);
        prev = model.batch_delay(size);
        if size > 0 {
            if let Some(out) = record.as_deref_mut() {
                out.push(Batch { index: batches, start: now, duration: prev, members: members(&states[..size]) });
            }
            batches += 1;
            now += prev;
        }
    }
    done.sort_unstable_by_key(|s| s.id);
    scenario
        .services
        .iter()
        .map(|s| done.binary_search_by_key(&s.id, |d| d.id).map_or(0, |i| done[i].completed))
        .collect()
}

/// One clustering-packing-batching pass for a fixed target step count.
///
/// `budgets[k]` is the generation budget of `scenario.services[k]`.
pub fn stacking_run(scenario: &Scenario, budgets: &[f64], target_steps: u32) -> StackingOutcome {
    let target_steps = target_steps.max(1);
    let mut batches = Vec::new();
    simulate(scenario, budgets, target_steps, Some(&mut batches));
    let schedule = Schedule::from_batches(&scenario.ids(), batches);
    let mean_quality = schedule.mean_quality(&scenario.quality_model);
    StackingOutcome { schedule, mean_quality, target_steps }
}

/// Largest target step count worth searching: the number of solo steps
/// the most relaxed service could afford, at least 1.
pub fn max_target_steps(budgets: &[f64], model: &DelayModel) -> u32 {
    let max_budget = budgets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    affordable_steps(max_budget, model).max(1)
}

/// Full search over `T* = 1..=T*max`, keeping the lowest mean FID (ties go
/// to the smaller `T*`).
pub fn stacking(scenario: &Scenario, budgets: &[f64]) -> StackingOutcome {
    let t_max = max_target_steps(budgets, &scenario.delay_model);
    let quality = &scenario.quality_model;
    let mut best = (1, f64::INFINITY);
    for t in 1..=t_max {
        let value = quality.mean_quality(simulate(scenario, budgets, t, None));
        if value < best.1 {
            best = (t, value);
        }
    }
    stacking_run(scenario, budgets, best.0)
}

/// One broken constraint found by [`validate_schedule`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Budget list does not match the service list.
    BudgetCount { services: usize, budgets: usize },
    /// Member refers to a service outside the scenario.
    UnknownService { batch: usize, service: ServiceId },
    /// Service has more than one task in one batch.
    DuplicateInBatch { batch: usize, service: ServiceId },
    /// Batch duration differs from the delay law for its size.
    Duration { batch: usize, expected: f64, actual: f64 },
    /// A step index is missing, repeated, or beyond the completed count.
    StepAssignment { service: ServiceId, step: u32, count: usize },
    /// Batch starts before the previous one ends.
    Overlap { batch: usize, start: f64, previous_end: f64 },
    /// Step `step + 1` starts before step `step` finishes.
    StepOrder { service: ServiceId, step: u32 },
    /// Generation finishes after the service's budget.
    Deadline { service: ServiceId, completion: f64, budget: f64 },
    /// Recorded per-service outcome disagrees with the batches.
    Outcome { service: ServiceId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BudgetCount { services, budgets } => {
                write!(f, "{budgets} budgets for {services} services")
            }
            Self::UnknownService { batch, service } => {
                write!(f, "batch {batch}: unknown service {service}")
            }
            Self::DuplicateInBatch { batch, service } => {
                write!(f, "batch {batch}: service {service} appears more than once")
            }
            Self::Duration { batch, expected, actual } => {
                write!(f, "batch {batch}: duration {actual} but delay law gives {expected}")
            }
            Self::StepAssignment { service, step, count } => {
                write!(f, "service {service}: step {step} assigned {count} times")
            }
            Self::Overlap { batch, start, previous_end } => {
                write!(f, "batch {batch}: starts at {start} before previous batch ends at {previous_end}")
            }
            Self::StepOrder { service, step } => {
                write!(f, "service {service}: step {} starts before step {step} finishes", step + 1)
            }
            Self::Deadline { service, completion, budget } => {
                write!(f, "service {service}: generation ends at {completion}, budget {budget}")
            }
            Self::Outcome { service } => {
                write!(f, "service {service}: recorded outcome disagrees with batches")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a schedule against the batching constraints and the per-service
/// generation budgets. Violations are reported, never raised.
pub fn validate_schedule(schedule: &Schedule, scenario: &Scenario, budgets: &[f64]) -> ViolationReport {
    let mut out = Vec::new();
    let model = &scenario.delay_model;
    if budgets.len() != scenario.len() {
        out.push(Violation::BudgetCount { services: scenario.len(), budgets: budgets.len() });
    }
    let budget_of: HashMap<ServiceId, f64> = scenario.ids().into_iter().zip(budgets.iter().copied()).collect();

    // (service, step) -> batch positions
    let mut placements: HashMap<(ServiceId, u32), Vec<usize>> = HashMap::new();
    let mut previous_end: Option<f64> = None;
    for (pos, batch) in schedule.batches.iter().enumerate() {
        let expected = model.batch_delay(batch.members.len());
        if batch.duration != expected {
            out.push(Violation::Duration { batch: batch.index, expected, actual: batch.duration });
        }
        let lower = previous_end.unwrap_or(0.0);
        if batch.start < lower {
            out.push(Violation::Overlap { batch: batch.index, start: batch.start, previous_end: lower });
        }
        previous_end = Some(batch.end());

        let mut seen = Vec::with_capacity(batch.members.len());
        for m in &batch.members {
            if !budget_of.contains_key(&m.service) {
                out.push(Violation::UnknownService { batch: batch.index, service: m.service });
                continue;
            }
            if seen.contains(&m.service) {
                out.push(Violation::DuplicateInBatch { batch: batch.index, service: m.service });
            }
            seen.push(m.service);
            placements.entry((m.service, m.step)).or_default().push(pos);
        }
    }

    for outcome in &schedule.services {
        let id = outcome.id;
        let Some(&budget) = budget_of.get(&id) else {
            out.push(Violation::Outcome { service: id });
            continue;
        };
        let achieved = outcome.completed_steps;
        for step in 1..=achieved {
            let count = placements.get(&(id, step)).map_or(0, Vec::len);
            if count != 1 {
                out.push(Violation::StepAssignment { service: id, step, count });
            }
        }
        let mut extra: Vec<_> = placements
            .iter()
            .filter(|(&(sid, step), _)| sid == id && (step == 0 || step > achieved))
            .map(|(&(_, step), v)| (step, v.len()))
            .collect();
        extra.sort_unstable();
        for (step, count) in extra {
            out.push(Violation::StepAssignment { service: id, step, count });
        }

        for step in 1..achieved {
            let (Some(cur), Some(next)) = (placements.get(&(id, step)), placements.get(&(id, step + 1))) else {
                continue;
            };
            let cur_end = schedule.batches[cur[0]].end();
            let next_start = schedule.batches[next[0]].start;
            if cur_end > next_start || next[0] <= cur[0] {
                out.push(Violation::StepOrder { service: id, step });
            }
        }

        let completion = placements.get(&(id, achieved)).map(|v| schedule.batches[v[0]].end());
        let consistent = match (achieved, outcome.completion_time, completion) {
            (0, None, _) => outcome.outage,
            (_, Some(c), Some(actual)) => !outcome.outage && c == actual,
            _ => false,
        };
        if !consistent {
            out.push(Violation::Outcome { service: id });
        }
        if let (true, Some(end)) = (achieved > 0, completion) {
            if end > budget {
                out.push(Violation::Deadline { service: id, completion: end, budget });
            }
        }
    }

    let listed: Vec<ServiceId> = schedule.services.iter().map(|s| s.id).collect();
    for id in scenario.ids() {
        if !listed.contains(&id) {
            out.push(Violation::Outcome { service: id });
        }
    }
    ViolationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ServiceRequest;
    use approx::assert_abs_diff_eq;

    fn model() -> DelayModel {
        DelayModel::default()
    }

    fn scenario(k: usize) -> Scenario {
        let services = (0..k).map(|i| ServiceRequest::new(i as u32, 10.0, 8.0)).collect();
        Scenario::new(services, 40_000.0, 24576.0, model(), QualityModel::default()).unwrap()
    }

    fn state(id: u32, remaining: f64, completed: u32) -> ActiveServiceState {
        let mut s = ActiveServiceState::new(id, remaining, &model());
        s.completed = completed;
        s.refresh(&model());
        s
    }

    #[test]
    fn cluster_single_state() {
        let mut states = vec![state(0, 7.0, 0)];
        let c = cluster(&mut states, 0.0, 20, &model());
        assert_eq!(states[0].feasible, 18);
        assert_eq!(states[0].ideal, 18);
        assert_eq!(c.tight, 1);
        assert!(c.finalized.is_empty());
    }

    #[test]
    fn cluster_finalizes_unaffordable() {
        let mut states = vec![state(0, 0.2, 0)];
        let c = cluster(&mut states, 0.0, 20, &model());
        assert!(states.is_empty());
        assert_eq!(c.finalized.len(), 1);
        assert_eq!(c.finalized[0].completed, 0);
    }

    #[test]
    fn cluster_threshold_and_order() {
        // ideal step counts 30 and 12
        let mut states = vec![state(1, 30.0 * 0.3783 + 0.01, 0), state(2, 12.0 * 0.3783 + 0.01, 0)];
        let c = cluster(&mut states, 0.0, 20, &model());
        assert_eq!(states.iter().map(|s| s.ideal).collect::<Vec<_>>(), vec![12, 30]);
        assert_eq!(c.tight, 1);
        assert_eq!(states[0].id, 2);
    }

    #[test]
    fn cluster_charges_elapsed_time() {
        let mut states = vec![state(0, 5.0, 3)];
        cluster(&mut states, 0.4023, 5, &model());
        assert_abs_diff_eq!(states[0].remaining, 5.0 - 0.4023, epsilon = 1e-12);
        assert_eq!(states[0].feasible, ((5.0 - 0.4023) / 0.3783f64).floor() as u32);
        assert_eq!(states[0].ideal, 3 + states[0].feasible);
    }

    #[test]
    fn cluster_ties_by_remaining_then_id() {
        let mut states = vec![state(5, 4.0, 0), state(3, 4.0, 0), state(4, 3.9, 0)];
        cluster(&mut states, 0.0, 1, &model());
        // ideal: floor(4/0.3783)=10, floor(3.9/0.3783)=10
        assert_eq!(states.iter().map(|s| s.id).collect::<Vec<_>>(), vec![4, 3, 5]);
    }

    #[test]
    fn pack_size_case_one() {
        let m = DelayModel::new(0.024, 0.3543).unwrap();
        let mut states: Vec<_> = (0..8).map(|i| state(i, 20.0, 0)).collect();
        for s in states.iter_mut().take(2) {
            s.remaining = 5.0;
            s.feasible = 10;
            s.ideal = 10;
        }
        for s in states.iter_mut().skip(2) {
            s.ideal = 40;
            s.feasible = 40;
        }
        assert_eq!(pack_size(&states, 2, 20, &m), 6);
    }

    #[test]
    fn pack_size_case_two() {
        let m = DelayModel::new(0.024, 0.3543).unwrap();
        let mut states: Vec<_> = (0..20).map(|i| state(i, 20.0, 0)).collect();
        for s in states.iter_mut() {
            s.ideal = 40;
        }
        states[0].ideal = 30;
        assert_eq!(pack_size(&states, 0, 20, &m), 8);
    }

    #[test]
    fn pack_size_case_two_clamps_to_one() {
        let mut states: Vec<_> = (0..5).map(|i| state(i, 20.0, 0)).collect();
        for s in states.iter_mut() {
            s.ideal = 20;
        }
        assert_eq!(pack_size(&states, 0, 20, &model()), 1);
    }

    #[test]
    fn pack_size_case_one_never_below_cluster() {
        let mut states: Vec<_> = (0..6).map(|i| state(i, 0.5, 0)).collect();
        for s in states.iter_mut() {
            s.feasible = 1;
            s.ideal = 1;
        }
        // floor term negative: (0.5 - 0.3543) / 0.024 = 6.07 -> capped by active
        assert_eq!(pack_size(&states, 3, 1, &model()), 6);
        for s in states.iter_mut() {
            s.remaining = 0.38;
        }
        assert_eq!(pack_size(&states, 3, 1, &model()), 3);
    }

    #[test]
    fn commit_both_fit() {
        let mut states = vec![state(0, 5.0, 0), state(1, 5.0, 0)];
        let c = batch_commit(&mut states, 2, 0.0, 0, &model());
        assert_abs_diff_eq!(c.batch.duration, 0.4023, epsilon = 1e-12);
        assert_eq!(c.batch.members.len(), 2);
        assert!(c.finalized.is_empty());
        assert!(states.iter().all(|s| s.completed == 1));
    }

    #[test]
    fn commit_drops_tight_member() {
        let mut states = vec![state(0, 0.39, 0), state(1, 5.0, 0)];
        let c = batch_commit(&mut states, 2, 0.0, 0, &model());
        assert_eq!(c.finalized.len(), 1);
        assert_eq!(c.finalized[0].id, 0);
        assert_eq!(c.batch.members, vec![TaskRef { service: 1, step: 1 }]);
        assert_abs_diff_eq!(c.batch.duration, 0.3783, epsilon = 1e-12);
        assert_eq!(states.len(), 1);
    }

    #[test]
    fn commit_can_empty_the_batch() {
        let mut states = vec![state(0, 0.3, 0)];
        let c = batch_commit(&mut states, 1, 0.0, 0, &model());
        assert!(c.batch.is_empty());
        assert_eq!(c.batch.duration, 0.0);
        assert_eq!(c.finalized.len(), 1);
        assert!(states.is_empty());
    }

    #[test]
    fn single_service_trace() {
        let sc = scenario(1);
        let out = stacking_run(&sc, &[1.0], 1);
        let s = &out.schedule;
        assert_eq!(s.batches.len(), 2);
        assert_eq!(s.batches[0].start, 0.0);
        assert_abs_diff_eq!(s.batches[1].start, 0.3783, epsilon = 1e-12);
        assert_eq!(s.services[0].completed_steps, 2);
        assert_abs_diff_eq!(s.generation_delay(0).unwrap(), 0.7566, epsilon = 1e-12);
    }

    #[test]
    fn tiny_budget_is_outage() {
        let sc = scenario(1);
        let out = stacking_run(&sc, &[0.1], 1);
        assert!(out.schedule.batches.is_empty());
        assert!(out.schedule.services[0].outage);
        assert_eq!(out.mean_quality, sc.quality_model.q_outage);
        assert_eq!(out.schedule.generation_delay(0), Err(ScheduleError::Outage(0)));
        assert_eq!(out.schedule.generation_delay(9), Err(ScheduleError::UnknownService(9)));
    }

    #[test]
    fn identical_pair_is_batched() {
        let sc = scenario(2);
        for t in 1..=2 {
            let out = stacking_run(&sc, &[1.0, 1.0], t);
            assert_eq!(out.schedule.batches.len(), 2);
            assert!(out.schedule.batches.iter().all(|b| b.len() == 2));
            assert_eq!(out.schedule.completed_steps(), vec![2, 2]);
        }
    }

    #[test]
    fn search_single_service() {
        let sc = scenario(1);
        assert_eq!(max_target_steps(&[1.0], &sc.delay_model), 2);
        let a = stacking_run(&sc, &[1.0], 1);
        let b = stacking_run(&sc, &[1.0], 2);
        assert_eq!(a.schedule, b.schedule);
        let best = stacking(&sc, &[1.0]);
        assert_eq!(best.target_steps, 1);
        assert_eq!(best.schedule.services[0].completed_steps, 2);
    }

    #[test]
    fn search_all_negative_budgets() {
        let sc = scenario(3);
        let out = stacking(&sc, &[-1.0, 0.0, -0.5]);
        assert!(out.schedule.batches.is_empty());
        assert_eq!(out.mean_quality, sc.quality_model.q_outage);
    }

    #[test]
    fn generation_delay_single_batch() {
        let b = Batch { index: 0, start: 0.0, duration: 0.3783, members: vec![TaskRef { service: 7, step: 1 }] };
        let s = Schedule::from_batches(&[7], vec![b]);
        assert_abs_diff_eq!(s.generation_delay(7).unwrap(), 0.3783, epsilon = 1e-12);
    }

    #[test]
    fn validate_accepts_stacking_output() {
        let sc = scenario(4);
        let budgets = [1.3, 2.9, 0.7, 5.5];
        let out = stacking(&sc, &budgets);
        assert!(validate_schedule(&out.schedule, &sc, &budgets).is_empty());
    }

    #[test]
    fn validate_flags_step_order() {
        let sc = scenario(1);
        let m = model();
        let batches = vec![
            Batch { index: 0, start: 0.0, duration: m.batch_delay(1), members: vec![TaskRef { service: 0, step: 2 }] },
            Batch {
                index: 1,
                start: m.batch_delay(1),
                duration: m.batch_delay(1),
                members: vec![TaskRef { service: 0, step: 1 }],
            },
        ];
        let s = Schedule::from_batches(&[0], batches);
        let r = validate_schedule(&s, &sc, &[5.0]);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::StepOrder { service: 0, step: 1 })));
    }

    #[test]
    fn validate_flags_overlap() {
        let sc = scenario(2);
        let m = model();
        let batches = vec![
            Batch { index: 0, start: 0.0, duration: m.batch_delay(1), members: vec![TaskRef { service: 0, step: 1 }] },
            Batch { index: 1, start: 0.2, duration: m.batch_delay(1), members: vec![TaskRef { service: 1, step: 1 }] },
        ];
        let s = Schedule::from_batches(&[0, 1], batches);
        let r = validate_schedule(&s, &sc, &[5.0, 5.0]);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::Overlap { batch: 1, .. }));
    }

    #[test]
    fn validate_flags_deadline_and_duplicates() {
        let sc = scenario(1);
        let m = model();
        let batches = vec![Batch {
            index: 0,
            start: 0.0,
            duration: m.batch_delay(2),
            members: vec![TaskRef { service: 0, step: 1 }, TaskRef { service: 0, step: 1 }],
        }];
        let s = Schedule::from_batches(&[0], batches);
        let r = validate_schedule(&s, &sc, &[0.3]);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::DuplicateInBatch { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::StepAssignment { count: 2, .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Deadline { .. })));
    }

    #[test]
    fn validate_flags_wrong_duration_and_bad_outcome() {
        let sc = scenario(1);
        let batches =
            vec![Batch { index: 0, start: 0.0, duration: 0.1, members: vec![TaskRef { service: 0, step: 1 }] }];
        let mut s = Schedule::from_batches(&[0], batches);
        s.services[0].completed_steps = 2;
        let r = validate_schedule(&s, &sc, &[5.0]);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Duration { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::StepAssignment { step: 2, count: 0, .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Outcome { .. })));
    }
}
