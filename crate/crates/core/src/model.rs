//! Closed-form system model: batch denoising latency, link rate and
//! transmission delay, the FID-vs-steps quality surrogate, and the
//! generation-time budget left after transmission.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a service request within a [`Scenario`].
pub type ServiceId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be {requirement}, got {value}")]
    InvalidParameter {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("scenario has no services")]
    NoServices,
    #[error("duplicate service id {0}")]
    DuplicateServiceId(ServiceId),
}

fn require(cond: bool, field: &'static str, requirement: &'static str, value: f64) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { field, requirement, value })
    }
}

/// Linear batch latency law `g(X) = a*X + b*[X > 0]`.
///
/// `a` is the marginal cost of one more task in the batch, `b` the fixed
/// cost paid once per non-empty batch (model load, kernel launch).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayModel {
    pub a: f64,
    pub b: f64,
}

impl Default for DelayModel {
    /// DDIM on CIFAR-10, RTX 3050 measurements.
    fn default() -> Self {
        Self { a: 0.0240, b: 0.3543 }
    }
}

impl DelayModel {
    pub fn new(a: f64, b: f64) -> Result<Self, ModelError> {
        let m = Self { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.a > 0.0 && self.a.is_finite(), "delay_model.a", "> 0", self.a)?;
        require(self.b > 0.0 && self.b.is_finite(), "delay_model.b", "> 0", self.b)?;
        if self.b <= self.a {
            log::warn!(
                "delay model has b ({}) <= a ({}); batching gains will be small",
                self.b,
                self.a
            );
        }
        Ok(())
    }

    /// Latency of one batch holding `tasks` denoising tasks.
    #[inline]
    pub fn batch_delay(&self, tasks: usize) -> f64 {
        if tasks == 0 {
            0.0
        } else {
            self.a * tasks as f64 + self.b
        }
    }

    /// Latency of a batch of one, `a + b`.
    #[inline]
    pub fn solo_step(&self) -> f64 {
        self.a + self.b
    }
}

/// Free-function form of [`DelayModel::batch_delay`].
pub fn batch_delay(tasks: usize, model: &DelayModel) -> f64 {
    model.batch_delay(tasks)
}

/// Power-law FID surrogate `alpha * T^-beta + gamma`, with a fixed
/// penalty for a service that completes no denoising step.
///
/// The defaults are placeholders shaped like a DDIM/CIFAR-10 FID curve;
/// lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub q_outage: f64,
}

impl Default for QualityModel {
    fn default() -> Self {
        Self { alpha: 57.0, beta: 0.75, gamma: 3.5, q_outage: 400.0 }
    }
}

impl QualityModel {
    pub fn new(alpha: f64, beta: f64, gamma: f64, q_outage: f64) -> Result<Self, ModelError> {
        let q = Self { alpha, beta, gamma, q_outage };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.alpha > 0.0 && self.alpha.is_finite(), "quality_model.alpha", "> 0", self.alpha)?;
        require(self.beta > 0.0 && self.beta.is_finite(), "quality_model.beta", "> 0", self.beta)?;
        require(self.gamma >= 0.0 && self.gamma.is_finite(), "quality_model.gamma", ">= 0", self.gamma)?;
        require(
            self.q_outage >= self.alpha + self.gamma && self.q_outage.is_finite(),
            "quality_model.q_outage",
            ">= alpha + gamma",
            self.q_outage,
        )
    }

    /// FID after `steps` completed denoising steps.
    pub fn quality(&self, steps: u32) -> f64 {
        if steps == 0 {
            self.q_outage
        } else {
            self.alpha * f64::from(steps).powf(-self.beta) + self.gamma
        }
    }

    /// Mean FID over a set of per-service step counts.
    pub fn mean_quality<I: IntoIterator<Item = u32>>(&self, steps: I) -> f64 {
        let (sum, n) = steps
            .into_iter()
            .fold((0.0, 0usize), |(s, n), t| (s + self.quality(t), n + 1));
        if n == 0 {
            self.q_outage
        } else {
            sum / n as f64
        }
    }
}

/// Free-function form of [`QualityModel::quality`].
pub fn quality(steps: u32, model: &QualityModel) -> f64 {
    model.quality(steps)
}

/// Spectral efficiency `log2(1 + p*h/N0)` in bit/s/Hz.
pub fn spectral_efficiency_from_link(power_density: f64, gain: f64, noise_density: f64) -> Result<f64, ModelError> {
    require(noise_density > 0.0, "noise_density", "> 0", noise_density)?;
    require(power_density >= 0.0, "power_density", ">= 0", power_density)?;
    require(gain >= 0.0, "gain", ">= 0", gain)?;
    Ok((power_density * gain / noise_density).ln_1p() / std::f64::consts::LN_2)
}

/// Time to deliver `content_bits` over `bandwidth` Hz at `efficiency` bit/s/Hz.
pub fn transmission_delay(bandwidth: f64, efficiency: f64, content_bits: f64) -> Result<f64, ModelError> {
    require(bandwidth > 0.0, "bandwidth", "> 0", bandwidth)?;
    require(efficiency > 0.0, "spectral_efficiency", "> 0", efficiency)?;
    require(content_bits >= 0.0, "content_size", ">= 0", content_bits)?;
    Ok(content_bits / (bandwidth * efficiency))
}

/// Time left for denoising once transmission is accounted for.
///
/// Negative when the link alone misses the deadline. The result `g`
/// satisfies `g + transmission <= deadline` in floating point, so any
/// generation delay within the budget keeps the end-to-end sum within the
/// deadline.
pub fn generation_budget(deadline: f64, transmission: f64) -> f64 {
    let mut budget = deadline - transmission;
    while budget + transmission > deadline {
        budget = budget.next_down();
    }
    budget
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceRequest {
    pub id: ServiceId,
    /// End-to-end deadline in seconds.
    pub deadline: f64,
    /// Link spectral efficiency in bit/s/Hz.
    pub spectral_efficiency: f64,
}

impl ServiceRequest {
    pub fn new(id: ServiceId, deadline: f64, spectral_efficiency: f64) -> Self {
        Self { id, deadline, spectral_efficiency }
    }
}

/// A batch of service requests sharing one edge server and one downlink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub services: Vec<ServiceRequest>,
    /// Total downlink bandwidth in Hz.
    pub total_bandwidth: f64,
    /// Size of one generated content item in bits.
    pub content_size: f64,
    pub delay_model: DelayModel,
    pub quality_model: QualityModel,
}

impl Scenario {
    pub fn new(
        services: Vec<ServiceRequest>,
        total_bandwidth: f64,
        content_size: f64,
        delay_model: DelayModel,
        quality_model: QualityModel,
    ) -> Result<Self, ModelError> {
        let s = Self { services, total_bandwidth, content_size, delay_model, quality_model };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.services.is_empty() {
            return Err(ModelError::NoServices);
        }
        require(self.total_bandwidth > 0.0, "total_bandwidth", "> 0", self.total_bandwidth)?;
        require(self.content_size > 0.0, "content_size", "> 0", self.content_size)?;
        self.delay_model.validate()?;
        self.quality_model.validate()?;
        let mut seen = std::collections::HashSet::new();
        for s in &self.services {
            require(s.deadline > 0.0, "service.deadline", "> 0", s.deadline)?;
            require(s.spectral_efficiency > 0.0, "service.spectral_efficiency", "> 0", s.spectral_efficiency)?;
            if !seen.insert(s.id) {
                return Err(ModelError::DuplicateServiceId(s.id));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    pub fn ids(&self) -> Vec<ServiceId> {
        self.services.iter().map(|s| s.id).collect()
    }

    /// Per-service generation budgets under a bandwidth split.
    ///
    /// `bandwidth[k]` pairs with `services[k]`.
    pub fn budgets(&self, bandwidth: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.services
            .iter()
            .zip(bandwidth)
            .map(|(s, &bw)| {
                let d = transmission_delay(bw, s.spectral_efficiency, self.content_size)?;
                Ok(generation_budget(s.deadline, d))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn batch_delay_golden() {
        let m = DelayModel::default();
        assert_eq!(m.batch_delay(0), 0.0);
        assert_abs_diff_eq!(m.batch_delay(1), 0.3783, epsilon = 1e-9);
        assert_abs_diff_eq!(m.batch_delay(20), 0.8343, epsilon = 1e-9);
        assert!(m.batch_delay(2) > m.batch_delay(1));
    }

    #[test]
    fn batching_saves_the_fixed_cost() {
        let m = DelayModel::default();
        for x in 2..=10_000usize {
            for x1 in [1, x / 2, x - 1] {
                let x2 = x - x1;
                assert!(m.batch_delay(x) < m.batch_delay(x1) + m.batch_delay(x2));
            }
        }
    }

    #[test]
    fn delay_model_rejects_non_positive() {
        let err = DelayModel::new(-1.0, 0.3).unwrap_err();
        assert!(err.to_string().contains("delay_model.a"));
        assert!(DelayModel::new(0.1, 0.0).is_err());
    }

    #[test]
    fn spectral_efficiency() {
        assert_eq!(spectral_efficiency_from_link(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(spectral_efficiency_from_link(1.0, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spectral_efficiency_from_link(255.0, 1.0, 1.0).unwrap(), 8.0, epsilon = 1e-12);
        assert!(spectral_efficiency_from_link(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn transmission_delay_examples() {
        assert_eq!(transmission_delay(2000.0, 8.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(transmission_delay(2000.0, 8.0, 24576.0).unwrap(), 1.536, epsilon = 1e-12);
        assert_abs_diff_eq!(transmission_delay(4000.0, 8.0, 24576.0).unwrap(), 0.768, epsilon = 1e-12);
        assert!(transmission_delay(0.0, 8.0, 1.0).is_err());
        assert!(transmission_delay(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn transmission_delay_scales_inversely() {
        let base = transmission_delay(1234.5, 6.5, 24576.0).unwrap();
        for c in [0.25, 0.5, 2.0, 3.0, 17.0] {
            let scaled = transmission_delay(1234.5 * c, 6.5, 24576.0).unwrap();
            assert_abs_diff_eq!(scaled, base / c, epsilon = 1e-12 * base);
        }
    }

    #[test]
    fn quality_examples() {
        let q = QualityModel::default();
        assert_eq!(q.quality(0), 400.0);
        assert_abs_diff_eq!(q.quality(1), 60.5, epsilon = 1e-12);
        // 100^-0.75 = 0.0316227766...
        assert_abs_diff_eq!(q.quality(100), 57.0 * 0.031_622_776_601_683_79 + 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q.quality(100), 5.3025, epsilon = 1e-4);
    }

    #[test]
    fn quality_is_monotone_and_approaches_floor() {
        let q = QualityModel::default();
        for t in 0..5000 {
            assert!(q.quality(t + 1) <= q.quality(t));
        }
        assert!((q.quality(1_000_000) - q.gamma).abs() < 1e-3 * q.alpha);
    }

    #[test]
    fn quality_model_rejects_small_outage_penalty() {
        assert!(QualityModel::new(57.0, 0.75, 3.5, 10.0).is_err());
        assert!(QualityModel::new(57.0, 0.75, 3.5, 60.5).is_ok());
    }

    #[test]
    fn generation_budget_examples() {
        assert_eq!(generation_budget(10.0, 0.0), 10.0);
        assert_abs_diff_eq!(generation_budget(10.0, 1.536), 8.464, epsilon = 1e-12);
        assert_abs_diff_eq!(generation_budget(1.0, 1.536), -0.536, epsilon = 1e-12);
    }

    #[test]
    fn generation_budget_never_overshoots_deadline() {
        let mut x = 0.1f64;
        for i in 0..10_000 {
            x = (x * 7.31 + i as f64 * 0.013) % 3.0;
            let deadline = 7.0 + x * 4.3;
            let d = x * 0.37;
            let g = generation_budget(deadline, d);
            assert!(g + d <= deadline);
        }
    }

    #[test]
    fn scenario_validation() {
        let mk = |services| Scenario::new(services, 40_000.0, 24576.0, DelayModel::default(), QualityModel::default());
        assert_eq!(mk(vec![]).unwrap_err(), ModelError::NoServices);
        let dup = vec![ServiceRequest::new(1, 7.0, 5.0), ServiceRequest::new(1, 8.0, 5.0)];
        assert_eq!(mk(dup).unwrap_err(), ModelError::DuplicateServiceId(1));
        assert!(mk(vec![ServiceRequest::new(0, 0.0, 5.0)]).is_err());
        assert!(mk(vec![ServiceRequest::new(0, 7.0, 5.0)]).is_ok());
    }
}
