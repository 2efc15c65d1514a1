//! Deadline-aware batch denoising for multi-user diffusion serving.
//!
//! An edge server runs a diffusion model for several users at once. Each
//! denoising step of each user is a task; tasks from different users can
//! share a GPU batch, which costs `a * size + b` seconds. Every user has an
//! end-to-end deadline covering generation plus downlink transmission, and
//! the image quality (FID) improves with the number of steps completed.
//!
//! The crate provides:
//!
//! - [`model`]: batch latency law, link and transmission delay, FID surrogate.
//! - [`scheduler`]: the STACKING clustering-packing-batching scheduler and a
//!   schedule validator.
//! - [`baselines`]: single-instance, greedy, and fixed-size batching, plus an
//!   exhaustive optimum for tiny instances.
//! - [`bandwidth`]: equal split and particle swarm bandwidth allocation.
//! - [`experiments`]: scenario generation, scheme comparison, sweeps.
//! - [`cli`]: the `batchdenoise` command-line driver.
//!
//! ```
//! use batchdenoise::model::{DelayModel, QualityModel, Scenario, ServiceRequest};
//! use batchdenoise::scheduler::stacking;
//!
//! let services = vec![ServiceRequest::new(0, 2.0, 8.0), ServiceRequest::new(1, 3.0, 6.0)];
//! let scenario =
//!     Scenario::new(services, 40_000.0, 24_576.0, DelayModel::default(), QualityModel::default()).unwrap();
//! let budgets = scenario.budgets(&[20_000.0, 20_000.0]).unwrap();
//! let outcome = stacking(&scenario, &budgets);
//! assert!(outcome.schedule.services.iter().all(|s| s.completed_steps > 0));
//! ```

pub mod bandwidth;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod model;
pub mod scheduler;

pub use error::{ConfigError, Error, Result};
