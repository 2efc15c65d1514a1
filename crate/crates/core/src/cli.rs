//! Command-line driver: config loading, subcommands, and output files.
//!
//! Exit codes: 0 on success, 1 on usage or config errors, 2 when a
//! schedule fails validation.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bandwidth::{equal_allocation, evaluate_allocation, pso_optimize, Allocation};
use crate::baselines::{exhaustive_oracle, fixed_size_batching, greedy_batching, single_instance};
use crate::error::{ConfigError, Error, Result};
use crate::experiments::{
    generate_scenario, replicate_pso_seed, run_comparison, sweep_min_delay, sweep_service_count, timeline_report,
    write_timeline_header, write_timeline_row, ExperimentConfig, Scheme,
};
use crate::model::Scenario;
use crate::scheduler::{stacking, validate_schedule, Schedule, Violation};

pub const OUTPUT_DIR_ENV: &str = "BATCHDENOISE_OUT";

#[derive(Debug, Clone, Parser)]
#[command(name = "batchdenoise", version, about = "Deadline-aware batch denoising and bandwidth allocation")]
pub struct Cli {
    /// TOML config; omitted keys take their defaults.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for emitted files.
    #[arg(long, short, global = true, env = OUTPUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Restricts output to these schemes (repeatable). `schedule` uses the first.
    #[arg(long = "scheme", value_enum, global = true)]
    pub schemes: Vec<Scheme>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Schedule one scenario and write the schedule and its timeline.
    Schedule,
    /// Optimize the bandwidth split of one scenario.
    Allocate,
    /// Compare all schemes over the configured replications.
    Compare,
    /// Sweep the service count.
    SweepK,
    /// Sweep the minimum deadline, maximum held fixed.
    SweepTau,
    /// Check a schedule document against its scenario.
    Validate {
        /// Schedule document written by `schedule`.
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Compare the scheduler with the exhaustive optimum on a tiny instance.
    OracleCheck,
}

/// Self-contained schedule file: scenario, bandwidth split, and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub scheme: Scheme,
    pub scenario: Scenario,
    pub allocation: Allocation,
    pub budgets: Vec<f64>,
    pub mean_fid: f64,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationDocument {
    pub scenario: Scenario,
    pub allocation: Allocation,
    pub mean_fid: f64,
    pub equal_bandwidth_mean_fid: f64,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckDocument {
    pub scenario: Scenario,
    pub budgets: Vec<f64>,
    pub horizon: usize,
    pub oracle_mean_fid: f64,
    pub stacking_mean_fid: f64,
    /// `(stacking - oracle) / oracle`.
    pub relative_gap: f64,
    pub oracle_schedule: Schedule,
    pub stacking_schedule: Schedule,
}

#[derive(Serialize)]
struct Bundle<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    result: &'a T,
}

/// What a subcommand produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub violations: Vec<Violation>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Reads a TOML config. Missing keys take defaults; the result is validated.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    if !path.exists() {
        return Err(ConfigError::Missing(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config(&text).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
        other => other,
    })
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: PathBuf::new(), message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }
}

/// Schedules `scenario` under `scheme`.
pub fn schedule_scheme(config: &ExperimentConfig, scenario: &Scenario, scheme: Scheme) -> Result<ScheduleDocument> {
    let allocation = match scheme {
        Scheme::EqualBandwidth => equal_allocation(scenario.len(), scenario.total_bandwidth),
        _ => {
            let params = crate::bandwidth::PsoParams { seed: replicate_pso_seed(config, 0), ..config.pso.clone() };
            pso_optimize(scenario, &params)?.allocation
        }
    };
    let budgets = scenario.budgets(allocation.as_slice())?;
    let schedule = match scheme {
        Scheme::Proposed | Scheme::EqualBandwidth => stacking(scenario, &budgets).schedule,
        Scheme::SingleInstance => single_instance(scenario, &budgets),
        Scheme::Greedy => greedy_batching(scenario, &budgets),
        Scheme::FixedSize => fixed_size_batching(scenario, &budgets, config.fixed_size()),
    };
    let mean_fid = schedule.mean_quality(&scenario.quality_model);
    Ok(ScheduleDocument { scheme, scenario: scenario.clone(), allocation, budgets, mean_fid, schedule })
}

/// Checks a schedule document, recomputing budgets from its scenario and
/// allocation.
pub fn validate_document(doc: &ScheduleDocument) -> Result<Vec<Violation>> {
    doc.scenario.validate()?;
    let budgets = doc.scenario.budgets(doc.allocation.as_slice())?;
    Ok(validate_schedule(&doc.schedule, &doc.scenario, &budgets).violations)
}

/// Runs one invocation and writes its files.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let config = resolve_config(cli)?;
    let schemes: Vec<Scheme> = if cli.schemes.is_empty() { Scheme::ALL.to_vec() } else { cli.schemes.clone() };

    if let Command::Validate { input } = &cli.command {
        let text = fs::read_to_string(input)?;
        let doc: ScheduleDocument = serde_json::from_str(&text)?;
        let violations = validate_document(&doc)?;
        let summary = if violations.is_empty() {
            format!("{}: valid ({} batches)", input.display(), doc.schedule.batches.len())
        } else {
            let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
            format!("{}: {} violation(s)\n{}", input.display(), violations.len(), lines.join("\n"))
        };
        return Ok(RunReport { files: Vec::new(), summary, violations });
    }

    let mut out = Output::new(&cli.out)?;
    let summary = match &cli.command {
        Command::Schedule => {
            let scheme = schemes[0];
            let scenario = generate_scenario(&config, 0)?;
            let doc = schedule_scheme(&config, &scenario, scheme)?;
            let timeline = timeline_report(&doc.scenario, &doc.allocation, &doc.schedule)?;
            write_json(&out.path("schedule.json"), &doc)?;
            let mut w = csv::Writer::from_writer(create(&out.path("timeline.csv"))?);
            write_timeline_header(&mut w)?;
            for row in &timeline {
                write_timeline_row(&mut w, 0, scheme, row)?;
            }
            w.flush()?;
            format!(
                "{scheme}: {} batches, mean FID {:.4}, {} outage(s)",
                doc.schedule.batches.len(),
                doc.mean_fid,
                doc.schedule.outage_count()
            )
        }
        Command::Allocate => {
            let scenario = generate_scenario(&config, 0)?;
            let params = crate::bandwidth::PsoParams { seed: replicate_pso_seed(&config, 0), ..config.pso.clone() };
            let result = pso_optimize(&scenario, &params)?;
            let equal = evaluate_allocation(&scenario, &equal_allocation(scenario.len(), scenario.total_bandwidth))?;
            let mut w = csv::Writer::from_writer(create(&out.path("pso_trace.csv"))?);
            w.write_record(["iteration", "best_mean_fid"])?;
            for (i, v) in result.trace.iter().enumerate() {
                w.write_record([i.to_string(), v.to_string()])?;
            }
            w.flush()?;
            let doc = AllocationDocument {
                scenario,
                allocation: result.allocation,
                mean_fid: result.mean_quality,
                equal_bandwidth_mean_fid: equal,
                trace: result.trace,
            };
            write_json(&out.path("allocation.json"), &doc)?;
            format!("PSO mean FID {:.4} (equal bandwidth {:.4})", doc.mean_fid, doc.equal_bandwidth_mean_fid)
        }
        Command::Compare => {
            let result = run_comparison(&config)?;
            result.write_summary_csv(create(&out.path("comparison.csv"))?, &schemes)?;
            result.write_timeline_csv(create(&out.path("comparison_timeline.csv"))?, &schemes)?;
            write_json(&out.path("comparison.json"), &Bundle { config: &config, result: &result })?;
            result
                .summaries
                .iter()
                .filter(|s| schemes.contains(&s.scheme))
                .map(|s| format!("{:<16} mean FID {:>10.4}  outages {}", s.scheme.name(), s.mean_fid, s.outages))
                .collect::<Vec<_>>()
                .join("\n")
        }
        Command::SweepK => {
            let table = sweep_service_count(&config, &config.sweep.service_counts)?;
            table.write_csv(create(&out.path("sweep_k.csv"))?, &schemes)?;
            write_json(&out.path("sweep_k.json"), &Bundle { config: &config, result: &table })?;
            format!("{} rows over {} service counts", table.rows.len(), config.sweep.service_counts.len())
        }
        Command::SweepTau => {
            let table = sweep_min_delay(&config, &config.sweep.min_deadlines)?;
            table.write_csv(create(&out.path("sweep_tau.csv"))?, &schemes)?;
            write_json(&out.path("sweep_tau.json"), &Bundle { config: &config, result: &table })?;
            format!("{} rows over {} minimum deadlines", table.rows.len(), config.sweep.min_deadlines.len())
        }
        Command::OracleCheck => {
            let doc = oracle_check(&config)?;
            write_json(&out.path("oracle_check.json"), &doc)?;
            format!(
                "oracle mean FID {:.6}, stacking mean FID {:.6}, relative gap {:.6}",
                doc.oracle_mean_fid, doc.stacking_mean_fid, doc.relative_gap
            )
        }
        Command::Validate { .. } => unreachable!("handled above"),
    };
    Ok(RunReport { files: out.files, summary, violations: Vec::new() })
}

/// Exhaustive optimum vs the scheduler on the configured tiny instance.
pub fn oracle_check(config: &ExperimentConfig) -> Result<OracleCheckDocument> {
    let tiny = ExperimentConfig {
        services: config.oracle.services,
        deadline_range: config.oracle.deadline_range,
        ..config.clone()
    };
    let scenario = generate_scenario(&tiny, 0)?;
    let budgets = scenario.budgets(equal_allocation(scenario.len(), scenario.total_bandwidth).as_slice())?;
    let oracle = exhaustive_oracle(&scenario, &budgets, config.oracle.horizon)?;
    let heuristic = stacking(&scenario, &budgets);
    let relative_gap = (heuristic.mean_quality - oracle.mean_quality) / oracle.mean_quality;
    Ok(OracleCheckDocument {
        scenario,
        budgets,
        horizon: config.oracle.horizon,
        oracle_mean_fid: oracle.mean_quality,
        stacking_mean_fid: heuristic.mean_quality,
        relative_gap,
        oracle_schedule: oracle.schedule,
        stacking_schedule: heuristic.schedule,
    })
}

/// Maps an error to the process exit code.
pub fn error_exit_code(_error: &Error) -> i32 {
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn partial_override_keeps_defaults() {
        let c = parse_config("services = 40\n").unwrap();
        assert_eq!(c.services, 40);
        assert_eq!(c, ExperimentConfig { services: 40, ..ExperimentConfig::default() });
        let c = parse_config("[pso]\niterations = 7\n[delay_model]\nb = 0.5\n").unwrap();
        assert_eq!(c.pso.iterations, 7);
        assert_eq!(c.pso.swarm_size, 50);
        assert_eq!(c.delay_model.a, 0.024);
        assert_eq!(c.delay_model.b, 0.5);
    }

    #[test]
    fn invalid_values_name_the_field() {
        let e = parse_config("[delay_model]\na = -1.0\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { field, .. } if field == "delay_model.a"), "{e}");
        let e = parse_config("deadline_range = { min = 9.0, max = 3.0 }\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { field, .. } if field == "deadline_range"), "{e}");
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert!(matches!(parse_config("services = \"many\""), Err(ConfigError::Parse { .. })));
        let e = parse_config("servces = 3").unwrap_err();
        assert!(e.to_string().contains("servces"));
        assert!(matches!(load_config(Path::new("/nonexistent/x.toml")), Err(ConfigError::Missing(_))));
    }
}
