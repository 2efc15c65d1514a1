//! Scenario generation, scheme comparison, and parameter sweeps.

use std::fmt;
use std::io::Write;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{equal_allocation, pso_optimize, Allocation, PsoParams};
use crate::baselines::{
    default_fixed_size, fixed_size_batching, greedy_batching, single_instance, ORACLE_MAX_HORIZON,
    ORACLE_MAX_SERVICES,
};
use crate::error::{ConfigError, Error, Result};
use crate::model::{transmission_delay, DelayModel, QualityModel, Scenario, ServiceId, ServiceRequest};
use crate::scheduler::{stacking, validate_schedule, Schedule};

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn check(&self, field: &str, positive: bool) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(ConfigError::invalid(field, format!("needs min <= max, got [{}, {}]", self.min, self.max)));
        }
        if positive && self.min <= 0.0 {
            return Err(ConfigError::invalid(format!("{field}.min"), format!("must be > 0, got {}", self.min)));
        }
        Ok(())
    }

    fn sampler(&self) -> Uniform<f64> {
        Uniform::new_inclusive(self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub service_counts: Vec<usize>,
    pub min_deadlines: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { service_counts: vec![5, 10, 15, 20, 25], min_deadlines: vec![1.0, 4.0, 7.0, 10.0] }
    }
}

/// Tiny instance used to compare the scheduler against the exhaustive optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub services: usize,
    pub horizon: usize,
    pub deadline_range: Interval,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { services: 2, horizon: ORACLE_MAX_HORIZON, deadline_range: Interval::new(0.5, 3.0) }
    }
}

/// Everything a comparison or sweep depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub services: usize,
    /// Deadlines in seconds, drawn uniformly.
    pub deadline_range: Interval,
    /// Spectral efficiencies in bit/s/Hz, drawn uniformly.
    pub spectral_efficiency_range: Interval,
    /// Total downlink bandwidth in Hz.
    pub total_bandwidth: f64,
    /// Content size in bits.
    pub content_size: f64,
    pub delay_model: DelayModel,
    pub quality_model: QualityModel,
    pub pso: PsoParams,
    pub replications: usize,
    /// Batch size of the fixed-size baseline; half the service count when unset.
    pub fixed_batch_size: Option<usize>,
    pub sweep: SweepConfig,
    pub oracle: OracleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            services: 20,
            deadline_range: Interval::new(7.0, 20.0),
            spectral_efficiency_range: Interval::new(5.0, 10.0),
            total_bandwidth: 40_000.0,
            content_size: 24_576.0,
            delay_model: DelayModel::default(),
            quality_model: QualityModel::default(),
            pso: PsoParams::default(),
            replications: 10,
            fixed_batch_size: None,
            sweep: SweepConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Checks every invariant, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.services < 1 {
            return Err(ConfigError::invalid("services", "must be >= 1"));
        }
        self.deadline_range.check("deadline_range", true)?;
        self.spectral_efficiency_range.check("spectral_efficiency_range", true)?;
        if !(self.total_bandwidth > 0.0 && self.total_bandwidth.is_finite()) {
            return Err(ConfigError::invalid("total_bandwidth", format!("must be > 0, got {}", self.total_bandwidth)));
        }
        if !(self.content_size > 0.0 && self.content_size.is_finite()) {
            return Err(ConfigError::invalid("content_size", format!("must be > 0, got {}", self.content_size)));
        }
        self.delay_model.validate().map_err(model_field)?;
        self.quality_model.validate().map_err(model_field)?;
        self.pso.validate().map_err(|m| {
            let field = m.split_whitespace().next().unwrap_or("pso").to_string();
            ConfigError::invalid(field, m)
        })?;
        if self.replications < 1 {
            return Err(ConfigError::invalid("replications", "must be >= 1"));
        }
        if self.fixed_batch_size == Some(0) {
            return Err(ConfigError::invalid("fixed_batch_size", "must be >= 1"));
        }
        if self.sweep.service_counts.contains(&0) {
            return Err(ConfigError::invalid("sweep.service_counts", "entries must be >= 1"));
        }
        for &m in &self.sweep.min_deadlines {
            if !(m > 0.0 && m <= self.deadline_range.max) {
                return Err(ConfigError::invalid(
                    "sweep.min_deadlines",
                    format!("entries must be in (0, {}], got {m}", self.deadline_range.max),
                ));
            }
        }
        let oracle = &self.oracle;
        if oracle.services < 1 || oracle.services > ORACLE_MAX_SERVICES {
            return Err(ConfigError::invalid(
                "oracle.services",
                format!("must be in 1..={ORACLE_MAX_SERVICES}, got {}", oracle.services),
            ));
        }
        if oracle.horizon > ORACLE_MAX_HORIZON {
            return Err(ConfigError::invalid(
                "oracle.horizon",
                format!("must be <= {ORACLE_MAX_HORIZON}, got {}", oracle.horizon),
            ));
        }
        oracle.deadline_range.check("oracle.deadline_range", true)?;
        Ok(())
    }

    pub fn fixed_size(&self) -> usize {
        self.fixed_batch_size.unwrap_or_else(|| default_fixed_size(self.services))
    }
}

fn model_field(e: crate::model::ModelError) -> ConfigError {
    match &e {
        crate::model::ModelError::InvalidParameter { field, .. } => ConfigError::invalid(*field, e.to_string()),
        _ => ConfigError::invalid("model", e.to_string()),
    }
}

/// Draws a scenario from the configured ranges.
///
/// Each replicate reads its own ChaCha stream of the configured seed, and
/// services are drawn in order, so a larger service count extends the
/// smaller scenario of the same replicate.
pub fn generate_scenario(config: &ExperimentConfig, replicate: usize) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(replicate as u64);
    let deadlines = config.deadline_range.sampler();
    let efficiencies = config.spectral_efficiency_range.sampler();
    let services = (0..config.services)
        .map(|k| {
            let deadline = deadlines.sample(&mut rng);
            let efficiency = efficiencies.sample(&mut rng);
            ServiceRequest::new(k as ServiceId, deadline, efficiency)
        })
        .collect();
    Ok(Scenario::new(
        services,
        config.total_bandwidth,
        config.content_size,
        config.delay_model,
        config.quality_model,
    )?)
}

/// PSO seed for one replicate.
pub fn replicate_pso_seed(config: &ExperimentConfig, replicate: usize) -> u64 {
    config
        .pso
        .seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(config.seed.rotate_left(32))
        .wrapping_add(replicate as u64)
}

/// The compared bandwidth-plus-batching schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// PSO bandwidth allocation with the STACKING scheduler.
    Proposed,
    /// Equal bandwidth split with the STACKING scheduler.
    EqualBandwidth,
    /// PSO allocation, one task per batch in deadline order.
    SingleInstance,
    /// PSO allocation, every running service in every batch.
    Greedy,
    /// PSO allocation, fixed-size batches in deadline order.
    FixedSize,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Proposed, Scheme::EqualBandwidth, Scheme::SingleInstance, Scheme::Greedy, Scheme::FixedSize];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::EqualBandwidth => "equal-bandwidth",
            Scheme::SingleInstance => "single-instance",
            Scheme::Greedy => "greedy",
            Scheme::FixedSize => "fixed-size",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One service's end-to-end delay breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub service: ServiceId,
    pub deadline: f64,
    /// Generation delay; `None` on outage.
    pub generation_delay: Option<f64>,
    pub transmission_delay: f64,
    /// `generation_delay + transmission_delay`; `None` on outage.
    pub end_to_end_delay: Option<f64>,
    pub steps: u32,
    pub outage: bool,
}

/// Per-service delay breakdown of a schedule under an allocation.
///
/// Fails if any completed service misses its deadline end to end.
pub fn timeline_report(scenario: &Scenario, allocation: &Allocation, schedule: &Schedule) -> Result<Vec<TimelineRow>> {
    scenario
        .services
        .iter()
        .zip(allocation.as_slice())
        .map(|(service, &bandwidth)| {
            let outcome = schedule.outcome(service.id).ok_or(Error::Audit {
                service: service.id,
                message: "missing from schedule".into(),
            })?;
            let d_ct = transmission_delay(bandwidth, service.spectral_efficiency, scenario.content_size)?;
            let d_cg = if outcome.outage { None } else { Some(schedule.generation_delay(service.id).map_err(|e| {
                Error::Audit { service: service.id, message: e.to_string() }
            })?) };
            let d_e2e = d_cg.map(|g| g + d_ct);
            if let Some(total) = d_e2e {
                if total > service.deadline {
                    return Err(Error::Audit {
                        service: service.id,
                        message: format!("end-to-end delay {total} exceeds deadline {}", service.deadline),
                    });
                }
            }
            Ok(TimelineRow {
                service: service.id,
                deadline: service.deadline,
                generation_delay: d_cg,
                transmission_delay: d_ct,
                end_to_end_delay: d_e2e,
                steps: outcome.completed_steps,
                outage: outcome.outage,
            })
        })
        .collect()
}

/// One scheme's result on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub allocation: Allocation,
    pub budgets: Vec<f64>,
    pub mean_fid: f64,
    pub schedule: Schedule,
    pub timeline: Vec<TimelineRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub index: usize,
    pub scenario: Scenario,
    pub pso_trace: Vec<f64>,
    pub runs: Vec<SchemeRun>,
}

impl ReplicateResult {
    pub fn run(&self, scheme: Scheme) -> &SchemeRun {
        self.runs.iter().find(|r| r.scheme == scheme).expect("every scheme runs on every replicate")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    /// Mean FID averaged over replications.
    pub mean_fid: f64,
    /// Outages summed over replications.
    pub outages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub summaries: Vec<SchemeSummary>,
    pub replicates: Vec<ReplicateResult>,
}

impl ComparisonResult {
    pub fn summary(&self, scheme: Scheme) -> &SchemeSummary {
        self.summaries.iter().find(|s| s.scheme == scheme).expect("every scheme is summarized")
    }

    pub fn mean_fid(&self, scheme: Scheme) -> f64 {
        self.summary(scheme).mean_fid
    }

    /// Writes the per-scheme summary as CSV (`scheme,mean_fid,outages`).
    pub fn write_summary_csv<W: Write>(&self, out: W, schemes: &[Scheme]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheme", "mean_fid", "outages"])?;
        for s in self.summaries.iter().filter(|s| schemes.contains(&s.scheme)) {
            w.write_record([s.scheme.name().to_string(), s.mean_fid.to_string(), s.outages.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes every timeline row of every replicate and scheme as CSV.
    pub fn write_timeline_csv<W: Write>(&self, out: W, schemes: &[Scheme]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        write_timeline_header(&mut w)?;
        for rep in &self.replicates {
            for run in rep.runs.iter().filter(|r| schemes.contains(&r.scheme)) {
                for row in &run.timeline {
                    write_timeline_row(&mut w, rep.index, run.scheme, row)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn write_timeline_header<W: Write>(w: &mut csv::Writer<W>) -> Result<()> {
    w.write_record([
        "replicate",
        "scheme",
        "service",
        "deadline",
        "generation_delay",
        "transmission_delay",
        "end_to_end_delay",
        "steps",
        "outage",
    ])?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub(crate) fn write_timeline_row<W: Write>(
    w: &mut csv::Writer<W>,
    replicate: usize,
    scheme: Scheme,
    row: &TimelineRow,
) -> Result<()> {
    w.write_record([
        replicate.to_string(),
        scheme.name().to_string(),
        row.service.to_string(),
        row.deadline.to_string(),
        opt(row.generation_delay),
        row.transmission_delay.to_string(),
        opt(row.end_to_end_delay),
        row.steps.to_string(),
        row.outage.to_string(),
    ])?;
    Ok(())
}

fn checked_run(
    scheme: Scheme,
    replicate: usize,
    scenario: &Scenario,
    allocation: &Allocation,
    budgets: Vec<f64>,
    schedule: Schedule,
) -> Result<SchemeRun> {
    let report = validate_schedule(&schedule, scenario, &budgets);
    if !report.is_empty() {
        return Err(Error::InvalidSchedule { scheme, replicate, violations: report.violations });
    }
    let timeline = timeline_report(scenario, allocation, &schedule)?;
    Ok(SchemeRun {
        scheme,
        allocation: allocation.clone(),
        budgets,
        mean_fid: schedule.mean_quality(&scenario.quality_model),
        schedule,
        timeline,
    })
}

/// Runs every scheme on one replicate.
///
/// The PSO allocation found for the proposed scheme is shared by the
/// single-instance, greedy, and fixed-size baselines.
pub fn run_replicate(config: &ExperimentConfig, replicate: usize) -> Result<ReplicateResult> {
    let scenario = generate_scenario(config, replicate)?;
    let pso = PsoParams { seed: replicate_pso_seed(config, replicate), ..config.pso.clone() };
    let optimized = pso_optimize(&scenario, &pso)?;
    let allocation = optimized.allocation;
    let budgets = scenario.budgets(allocation.as_slice())?;

    let equal = equal_allocation(scenario.len(), scenario.total_bandwidth);
    let equal_budgets = scenario.budgets(equal.as_slice())?;

    let mut runs = Vec::with_capacity(Scheme::ALL.len());
    for scheme in Scheme::ALL {
        let run = match scheme {
            Scheme::Proposed => {
                let s = stacking(&scenario, &budgets).schedule;
                checked_run(scheme, replicate, &scenario, &allocation, budgets.clone(), s)?
            }
            Scheme::EqualBandwidth => {
                let s = stacking(&scenario, &equal_budgets).schedule;
                checked_run(scheme, replicate, &scenario, &equal, equal_budgets.clone(), s)?
            }
            Scheme::SingleInstance => {
                let s = single_instance(&scenario, &budgets);
                checked_run(scheme, replicate, &scenario, &allocation, budgets.clone(), s)?
            }
            Scheme::Greedy => {
                let s = greedy_batching(&scenario, &budgets);
                checked_run(scheme, replicate, &scenario, &allocation, budgets.clone(), s)?
            }
            Scheme::FixedSize => {
                let s = fixed_size_batching(&scenario, &budgets, config.fixed_size());
                checked_run(scheme, replicate, &scenario, &allocation, budgets.clone(), s)?
            }
        };
        runs.push(run);
    }
    Ok(ReplicateResult { index: replicate, scenario, pso_trace: optimized.trace, runs })
}

/// All schemes over all replications, averaged.
pub fn run_comparison(config: &ExperimentConfig) -> Result<ComparisonResult> {
    let replicates = (0..config.replications)
        .into_par_iter()
        .map(|r| run_replicate(config, r))
        .collect::<Result<Vec<_>>>()?;
    let summaries = Scheme::ALL
        .iter()
        .map(|&scheme| {
            let runs = replicates.iter().map(|r| r.run(scheme));
            let (sum, outages) =
                runs.fold((0.0, 0), |(s, o), run| (s + run.mean_fid, o + run.schedule.outage_count()));
            SchemeSummary { scheme, mean_fid: sum / replicates.len() as f64, outages }
        })
        .collect();
    Ok(ComparisonResult { summaries, replicates })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub scheme: Scheme,
    pub mean_fid: f64,
    pub outages: usize,
}

/// Mean FID per scheme along one swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    /// Name of the swept parameter; also the first CSV column.
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Collapses per-point comparisons into summary rows.
    pub fn from_results(axis: &str, points: &[(f64, ComparisonResult)]) -> Self {
        let rows = points
            .iter()
            .flat_map(|(value, result)| {
                result.summaries.iter().map(move |s| SweepRow {
                    value: *value,
                    scheme: s.scheme,
                    mean_fid: s.mean_fid,
                    outages: s.outages,
                })
            })
            .collect();
        Self { axis: axis.to_string(), rows }
    }

    /// Mean FID of `scheme` at each swept value, in sweep order.
    pub fn series(&self, scheme: Scheme) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.scheme == scheme).map(|r| (r.value, r.mean_fid)).collect()
    }

    pub fn mean_fid(&self, value: f64, scheme: Scheme) -> Option<f64> {
        self.rows.iter().find(|r| r.value == value && r.scheme == scheme).map(|r| r.mean_fid)
    }

    /// Long-format CSV: `<axis>,scheme,mean_fid,outages`.
    pub fn write_csv<W: Write>(&self, out: W, schemes: &[Scheme]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.axis.as_str(), "scheme", "mean_fid", "outages"])?;
        for r in self.rows.iter().filter(|r| schemes.contains(&r.scheme)) {
            w.write_record([r.value.to_string(), r.scheme.name().to_string(), r.mean_fid.to_string(), r.outages.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full comparison at each service count, bandwidth held fixed.
pub fn service_count_comparisons(config: &ExperimentConfig, counts: &[usize]) -> Result<Vec<(f64, ComparisonResult)>> {
    counts
        .iter()
        .map(|&k| {
            let cfg = ExperimentConfig { services: k, ..config.clone() };
            cfg.validate()?;
            Ok((k as f64, run_comparison(&cfg)?))
        })
        .collect()
}

/// Full comparison at each minimum deadline, the maximum held fixed.
pub fn min_delay_comparisons(config: &ExperimentConfig, min_deadlines: &[f64]) -> Result<Vec<(f64, ComparisonResult)>> {
    min_deadlines
        .iter()
        .map(|&min| {
            let cfg = ExperimentConfig {
                deadline_range: Interval::new(min, config.deadline_range.max),
                ..config.clone()
            };
            cfg.validate()?;
            Ok((min, run_comparison(&cfg)?))
        })
        .collect()
}

/// Mean FID per scheme at each service count.
pub fn sweep_service_count(config: &ExperimentConfig, counts: &[usize]) -> Result<SweepTable> {
    Ok(SweepTable::from_results("services", &service_count_comparisons(config, counts)?))
}

/// Mean FID per scheme at each minimum deadline.
pub fn sweep_min_delay(config: &ExperimentConfig, min_deadlines: &[f64]) -> Result<SweepTable> {
    Ok(SweepTable::from_results("min_deadline", &min_delay_comparisons(config, min_deadlines)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            services: 4,
            replications: 2,
            pso: PsoParams { swarm_size: 6, iterations: 4, ..PsoParams::default() },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn defaults_match_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.services, 20);
        assert_eq!(c.deadline_range, Interval::new(7.0, 20.0));
        assert_eq!(c.spectral_efficiency_range, Interval::new(5.0, 10.0));
        assert_eq!(c.total_bandwidth, 40_000.0);
        assert_eq!(c.fixed_size(), 10);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn scenario_is_drawn_from_ranges() {
        let c = ExperimentConfig::default();
        let s = generate_scenario(&c, 0).unwrap();
        assert_eq!(s.len(), 20);
        assert_eq!(s.total_bandwidth, 40_000.0);
        for r in &s.services {
            assert!((7.0..=20.0).contains(&r.deadline));
            assert!((5.0..=10.0).contains(&r.spectral_efficiency));
        }
        assert_eq!(s, generate_scenario(&c, 0).unwrap());
        assert_ne!(s, generate_scenario(&c, 1).unwrap());
    }

    #[test]
    fn degenerate_range() {
        let c = ExperimentConfig { deadline_range: Interval::new(7.0, 7.0), ..ExperimentConfig::default() };
        let s = generate_scenario(&c, 3).unwrap();
        assert!(s.services.iter().all(|r| r.deadline == 7.0));
    }

    #[test]
    fn larger_count_extends_scenario() {
        let c = ExperimentConfig::default();
        let small = generate_scenario(&ExperimentConfig { services: 5, ..c.clone() }, 2).unwrap();
        let big = generate_scenario(&c, 2).unwrap();
        assert_eq!(small.services[..], big.services[..5]);
    }

    #[test]
    fn config_rejects_bad_values() {
        let c = ExperimentConfig { deadline_range: Interval::new(9.0, 7.0), ..ExperimentConfig::default() };
        assert!(c.validate().unwrap_err().to_string().contains("deadline_range"));
        let c = ExperimentConfig { replications: 0, ..ExperimentConfig::default() };
        assert!(c.validate().unwrap_err().to_string().contains("replications"));
        let mut c = ExperimentConfig::default();
        c.delay_model.a = -1.0;
        assert!(c.validate().unwrap_err().to_string().contains("delay_model.a"));
        let mut c = ExperimentConfig::default();
        c.oracle.services = 4;
        assert!(c.validate().unwrap_err().to_string().contains("oracle.services"));
    }

    #[test]
    fn comparison_runs_every_scheme() {
        let r = run_comparison(&quick()).unwrap();
        assert_eq!(r.summaries.len(), 5);
        assert_eq!(r.replicates.len(), 2);
        for rep in &r.replicates {
            assert_eq!(rep.runs.len(), 5);
            assert!(rep.run(Scheme::Proposed).mean_fid <= rep.run(Scheme::EqualBandwidth).mean_fid);
        }
        let mut csv = Vec::new();
        r.write_summary_csv(&mut csv, &Scheme::ALL).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("scheme,mean_fid,outages\nproposed,"));
    }

    #[test]
    fn single_service_schemes_coincide() {
        let c = ExperimentConfig { services: 1, ..quick() };
        let r = run_comparison(&c).unwrap();
        for rep in &r.replicates {
            let single = &rep.run(Scheme::SingleInstance).schedule;
            assert_eq!(&rep.run(Scheme::Greedy).schedule, single);
            assert_eq!(&rep.run(Scheme::FixedSize).schedule, single);
            assert_eq!(&rep.run(Scheme::Proposed).schedule.completed_steps(), &single.completed_steps());
        }
    }

    #[test]
    fn timeline_rows_add_up() {
        let r = run_comparison(&quick()).unwrap();
        for rep in &r.replicates {
            for run in &rep.runs {
                for row in &run.timeline {
                    match (row.generation_delay, row.end_to_end_delay) {
                        (Some(g), Some(e)) => {
                            assert_eq!(e, g + row.transmission_delay);
                            assert!(e <= row.deadline);
                        }
                        (None, None) => assert!(row.outage),
                        _ => panic!("inconsistent row {row:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn sweep_tables_have_a_row_per_scheme_and_value() {
        let t = sweep_service_count(&quick(), &[2, 3]).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.series(Scheme::Proposed).len(), 2);
        let t = sweep_min_delay(&quick(), &[20.0]).unwrap();
        assert_eq!(t.rows.len(), 5);
        let mut csv = Vec::new();
        t.write_csv(&mut csv, &[Scheme::Proposed]).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2);
    }
}
