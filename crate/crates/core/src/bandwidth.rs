//! Downlink bandwidth allocation.
//!
//! A particle swarm searches the split of the total bandwidth across
//! services; each candidate is scored by running the batch scheduler on
//! the generation budgets it implies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{ModelError, Scenario};
use crate::scheduler::{stacking, StackingOutcome};

/// Smallest share any service receives, relative to the total.
pub const MIN_SHARE: f64 = 1e-6;

/// Per-service bandwidth in Hz, in scenario service order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(pub Vec<f64>);

impl Allocation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every entry lies in `[MIN_SHARE * total, total]` and the
    /// entries sum to at most `total`.
    pub fn is_feasible(&self, total: f64) -> bool {
        let floor = MIN_SHARE * total;
        self.0.iter().all(|&b| b >= floor && b <= total) && self.total() <= total
    }
}

/// Same bandwidth for every service.
pub fn equal_allocation(services: usize, total: f64) -> Allocation {
    Allocation(vec![total / services.max(1) as f64; services])
}

/// Repairs an arbitrary vector onto the feasible set: entries are clamped
/// to `[eps, total]`, then the entries above the floor are scaled down
/// until the sum fits.
pub fn project_feasible(raw: &[f64], total: f64) -> Allocation {
    let floor = MIN_SHARE * total;
    let mut v: Vec<f64> = raw
        .iter()
        .map(|&x| if x.is_nan() { floor } else { x.clamp(floor, total) })
        .collect();
    // Each pass pins at least one more entry to the floor or lands the sum
    // within the cap; the shrink factor absorbs rounding in the final pass.
    for _ in 0..=v.len() + 2 {
        let sum: f64 = v.iter().sum();
        if sum <= total {
            break;
        }
        let pinned: f64 = v.iter().filter(|&&x| x <= floor).sum();
        let free: f64 = sum - pinned;
        if free <= 0.0 {
            break;
        }
        let scale = ((total - pinned) / free) * (1.0 - 4.0 * f64::EPSILON);
        for x in v.iter_mut().filter(|x| **x > floor) {
            *x = (*x * scale).max(floor);
        }
    }
    Allocation(v)
}

/// Generation budgets implied by an allocation.
pub fn budgets(scenario: &Scenario, allocation: &Allocation) -> Result<Vec<f64>, ModelError> {
    scenario.budgets(allocation.as_slice())
}

/// Runs the scheduler under an allocation.
pub fn schedule_allocation(scenario: &Scenario, allocation: &Allocation) -> Result<StackingOutcome, ModelError> {
    Ok(stacking(scenario, &budgets(scenario, allocation)?))
}

/// Mean FID the scheduler reaches under an allocation.
pub fn evaluate_allocation(scenario: &Scenario, allocation: &Allocation) -> Result<f64, ModelError> {
    Ok(schedule_allocation(scenario, allocation)?.mean_quality)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of the total bandwidth.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 100,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            velocity_clamp: 0.2,
            seed: 0,
        }
    }
}

impl PsoParams {
    /// Checks the parameter ranges, naming the first offending field.
    pub fn validate(&self) -> Result<(), String> {
        if self.swarm_size < 2 {
            return Err(format!("pso.swarm_size must be >= 2, got {}", self.swarm_size));
        }
        if self.iterations < 1 {
            return Err(format!("pso.iterations must be >= 1, got {}", self.iterations));
        }
        if !(self.inertia > 0.0 && self.inertia < 1.0) {
            return Err(format!("pso.inertia must be in (0, 1), got {}", self.inertia));
        }
        if !(self.cognitive > 0.0) {
            return Err(format!("pso.cognitive must be > 0, got {}", self.cognitive));
        }
        if !(self.social > 0.0) {
            return Err(format!("pso.social must be > 0, got {}", self.social));
        }
        if !(self.velocity_clamp > 0.0) {
            return Err(format!("pso.velocity_clamp must be > 0, got {}", self.velocity_clamp));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoOutcome {
    pub allocation: Allocation,
    pub mean_quality: f64,
    /// Global-best mean FID after initialization (entry 0) and after each
    /// iteration.
    pub trace: Vec<f64>,
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_value: f64,
}

fn score_all(scenario: &Scenario, positions: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    positions
        .par_iter()
        .map(|p| evaluate_allocation(scenario, &Allocation(p.clone())))
        .collect()
}

/// Global-best particle swarm over the bandwidth split.
///
/// Particle 0 starts at the equal split, the rest uniformly in the box,
/// and every position is projected onto the feasible set before it is
/// scored. Candidates are scored in parallel; bests are updated in particle
/// order, so the result depends only on the inputs and the seed.
pub fn pso_optimize(scenario: &Scenario, params: &PsoParams) -> Result<PsoOutcome, ModelError> {
    let k = scenario.len();
    let total = scenario.total_bandwidth;
    let vmax = params.velocity_clamp * total;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let swarm_size = params.swarm_size.max(1);

    let mut positions = Vec::with_capacity(swarm_size);
    let mut velocities = Vec::with_capacity(swarm_size);
    for i in 0..swarm_size {
        let raw: Vec<f64> = if i == 0 {
            equal_allocation(k, total).0
        } else {
            (0..k).map(|_| rng.gen_range(0.0..=total)).collect()
        };
        positions.push(project_feasible(&raw, total).0);
        velocities.push((0..k).map(|_| rng.gen_range(-vmax..=vmax)).collect::<Vec<f64>>());
    }
    let values = score_all(scenario, &positions)?;

    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(velocities)
        .zip(values)
        .map(|((position, velocity), value)| Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_value: value,
        })
        .collect();

    let mut best_index = 0;
    for (i, p) in swarm.iter().enumerate() {
        if p.best_value < swarm[best_index].best_value {
            best_index = i;
        }
    }
    let mut best_position = swarm[best_index].best_position.clone();
    let mut best_value = swarm[best_index].best_value;
    let mut trace = Vec::with_capacity(params.iterations + 1);
    trace.push(best_value);

    for _ in 0..params.iterations {
        for p in swarm.iter_mut() {
            for d in 0..k {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let v = params.inertia * p.velocity[d]
                    + params.cognitive * r1 * (p.best_position[d] - p.position[d])
                    + params.social * r2 * (best_position[d] - p.position[d]);
                p.velocity[d] = v.clamp(-vmax, vmax);
                p.position[d] += p.velocity[d];
            }
            p.position = project_feasible(&p.position, total).0;
        }
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        let values = score_all(scenario, &positions)?;
        for (p, value) in swarm.iter_mut().zip(values) {
            if value < p.best_value {
                p.best_value = value;
                p.best_position = p.position.clone();
            }
            if value < best_value {
                best_value = value;
                best_position = p.position.clone();
            }
        }
        trace.push(best_value);
    }

    Ok(PsoOutcome { allocation: Allocation(best_position), mean_quality: best_value, trace })
}
