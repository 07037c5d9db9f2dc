//! Reproducible bias experiments.
//!
//! Each experiment is described by an [`AuditConfig`], which includes the
//! full generator recipe. Running a config produces an [`AuditReport`] that
//! embeds the config, so [`replay`] can rerun it and check that every
//! statistic comes out identical.
//!
//! Replications can be split into shards that run in parallel. Shard `i` of
//! a hash-counter generator seeded with `S` is seeded with `S/i`; results
//! are combined as integer counts, so the outcome does not depend on
//! scheduling.

mod calibration;
mod experiments;
pub mod stats;

pub use calibration::{calibrate, CalibrationConfig, CalibrationReport, CalibrationRow};
pub use experiments::{
    derangement_test, murdoch_experiment, permutation_coverage, sample_frequency_test,
    spearman_test, MURDOCH_DENOM, MURDOCH_M, MURDOCH_NUMER,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{Generator, GeneratorError, GeneratorSpec, Seed};
use crate::integers::{IntegerError, IntegerMethod};
use crate::sampling::{Algorithm, SamplingError};

/// Family-wise significance level used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Integer(#[from] IntegerError),
    #[error("invalid audit parameters: {0}")]
    InvalidParams(String),
    /// The requested exhaustive or tabulated size is too large.
    #[error("infeasible size: {0}")]
    Infeasible(String),
    #[error("replay differs from the recorded report: {0}")]
    NotReproduced(String),
    #[error("report is not valid JSON: {0}")]
    Json(String),
}

fn default_shards() -> u32 {
    1
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_method() -> IntegerMethod {
    IntegerMethod::MaskReject
}

/// Everything needed to run, and rerun, one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum AuditConfig {
    /// Parity of draws on `{1..1717986918}`.
    Murdoch {
        generator: GeneratorSpec,
        method: IntegerMethod,
        reps: u64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Fisher-Yates from every initial register of a small LCG.
    Coverage {
        modulus: u64,
        multiplier: u64,
        increment: u64,
        n: u64,
    },
    Derangement {
        generator: GeneratorSpec,
        #[serde(default = "default_method")]
        method: IntegerMethod,
        n: u64,
        reps: u64,
        #[serde(default = "default_shards")]
        shards: u32,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Spearman {
        generator: GeneratorSpec,
        #[serde(default = "default_method")]
        method: IntegerMethod,
        n: u64,
        reps: u64,
        #[serde(default = "default_shards")]
        shards: u32,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    SampleFrequency {
        generator: GeneratorSpec,
        #[serde(default = "default_method")]
        method: IntegerMethod,
        algorithm: Algorithm,
        n: u64,
        k: u64,
        reps: u64,
        #[serde(default = "default_shards")]
        shards: u32,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

impl AuditConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AuditConfig::Murdoch { .. } => "murdoch",
            AuditConfig::Coverage { .. } => "coverage",
            AuditConfig::Derangement { .. } => "derangement",
            AuditConfig::Spearman { .. } => "spearman",
            AuditConfig::SampleFrequency { .. } => "sample_frequency",
        }
    }

    pub fn run(&self) -> Result<AuditReport, AuditError> {
        let start = Instant::now();
        let mut report = match self {
            AuditConfig::Murdoch { .. } => experiments::run_murdoch(self),
            AuditConfig::Coverage { .. } => experiments::run_coverage(self),
            AuditConfig::Derangement { .. } => experiments::run_derangement(self),
            AuditConfig::Spearman { .. } => experiments::run_spearman(self),
            AuditConfig::SampleFrequency { .. } => experiments::run_sample_frequency(self),
        }?;
        report.duration_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(report)
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub experiment: String,
    pub generator: String,
    pub method: Option<IntegerMethod>,
    /// The seed record: rerunning this reproduces the report.
    pub config: AuditConfig,
    pub replications: u64,
    pub statistics: BTreeMap<String, f64>,
    pub reference: BTreeMap<String, f64>,
    pub test_statistic: Option<f64>,
    pub p_values: BTreeMap<String, f64>,
    /// Family-wise level; each p-value is compared with
    /// `alpha / p_values.len()`. Absent for exact experiments.
    pub alpha: Option<f64>,
    pub rejected: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub duration_ms: f64,
}

impl AuditReport {
    fn new(config: &AuditConfig, generator: String, method: Option<IntegerMethod>, replications: u64) -> Self {
        AuditReport {
            experiment: config.name().to_string(),
            generator,
            method,
            config: config.clone(),
            replications,
            statistics: BTreeMap::new(),
            reference: BTreeMap::new(),
            test_statistic: None,
            p_values: BTreeMap::new(),
            alpha: None,
            rejected: false,
            warnings: Vec::new(),
            duration_ms: 0.0,
        }
    }

    /// Sets `rejected` from the p-values with a Bonferroni split of `alpha`.
    fn decide(&mut self, alpha: f64) {
        self.alpha = Some(alpha);
        let per_test = alpha / self.p_values.len().max(1) as f64;
        self.rejected = self.p_values.values().any(|&p| p < per_test);
    }

    /// Equal in everything except timing.
    pub fn same_results(&self, other: &AuditReport) -> bool {
        let strip = |r: &AuditReport| AuditReport {
            duration_ms: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, AuditError> {
        serde_json::from_str(text).map_err(|e| AuditError::Json(e.to_string()))
    }

    /// One row per reported quantity: `experiment,kind,name,value`, where
    /// kind is `meta`, `statistic`, `reference`, `p_value` or `decision`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,kind,name,value\n");
        let mut row = |kind: &str, name: &str, value: String| {
            let quoted = if value.contains(',') || value.contains('"') {
                format!("\"{}\"", value.replace('"', "\"\""))
            } else {
                value
            };
            out.push_str(&format!("{},{kind},{name},{quoted}\n", self.experiment));
        };
        row("meta", "generator", self.generator.clone());
        if let Some(m) = self.method {
            row("meta", "method", m.name().to_string());
        }
        row("meta", "replications", self.replications.to_string());
        for (k, v) in &self.statistics {
            row("statistic", k, v.to_string());
        }
        for (k, v) in &self.reference {
            row("reference", k, v.to_string());
        }
        if let Some(t) = self.test_statistic {
            row("statistic", "test_statistic", t.to_string());
        }
        for (k, v) in &self.p_values {
            row("p_value", k, v.to_string());
        }
        if let Some(a) = self.alpha {
            row("decision", "alpha", a.to_string());
        }
        row("decision", "rejected", self.rejected.to_string());
        row("meta", "duration_ms", format!("{:.3}", self.duration_ms));
        out
    }
}

/// Reruns a report's config and checks that the results match exactly.
pub fn replay(report: &AuditReport) -> Result<AuditReport, AuditError> {
    let rerun = report.config.run()?;
    if !rerun.same_results(report) {
        let differing: Vec<&str> = report
            .statistics
            .iter()
            .filter(|(k, v)| rerun.statistics.get(*k) != Some(v))
            .map(|(k, _)| k.as_str())
            .collect();
        return Err(AuditError::NotReproduced(if differing.is_empty() {
            "p-values or decision differ".into()
        } else {
            format!("statistics differ: {}", differing.join(", "))
        }));
    }
    Ok(rerun)
}

/// Generator recipe for shard `index`: the hash seed `S` becomes `S/index`.
pub fn shard_spec(spec: &GeneratorSpec, index: u32) -> Result<GeneratorSpec, AuditError> {
    match spec {
        GeneratorSpec::HashCounter { seed, hash, width } => {
            let mut bytes = Seed::from_human(seed).into_bytes();
            bytes.extend_from_slice(format!("/{index}").as_bytes());
            Ok(GeneratorSpec::HashCounter {
                seed: Seed::from_bytes(bytes).to_human(),
                hash: *hash,
                width: *width,
            })
        }
        _ => Err(AuditError::InvalidParams(
            "only hash-counter generators can be sharded".into(),
        )),
    }
}

/// Splits `reps` over `shards` generators and runs them in parallel.
/// With one shard the generator is used as given.
fn run_sharded<T, F>(spec: &GeneratorSpec, shards: u32, reps: u64, work: F) -> Result<Vec<T>, AuditError>
where
    T: Send,
    F: Fn(&mut Generator, u64) -> Result<T, AuditError> + Sync,
{
    if shards == 0 {
        return Err(AuditError::InvalidParams("shards must be at least 1".into()));
    }
    if shards == 1 {
        return Ok(vec![work(&mut spec.build()?, reps)?]);
    }
    let specs = (0..shards)
        .map(|i| shard_spec(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    specs
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let share = reps / shards as u64 + u64::from((i as u64) < reps % shards as u64);
            work(&mut s.build()?, share)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_derangement(shards: u32) -> AuditConfig {
        AuditConfig::Derangement {
            generator: GeneratorSpec::hash("report tests"),
            method: IntegerMethod::MaskReject,
            n: 5,
            reps: 10_000,
            shards,
            alpha: DEFAULT_ALPHA,
        }
    }

    #[test]
    fn json_round_trip_and_replay() {
        let report = small_derangement(3).run().unwrap();
        let parsed = AuditReport::from_json(&report.to_json()).unwrap();
        assert!(parsed.same_results(&report));
        let rerun = replay(&parsed).unwrap();
        assert!(rerun.same_results(&report));
    }

    #[test]
    fn tampered_report_is_not_reproduced() {
        let mut report = small_derangement(1).run().unwrap();
        *report.statistics.get_mut("derangements").unwrap() += 1.0;
        assert!(matches!(replay(&report), Err(AuditError::NotReproduced(_))));
    }

    #[test]
    fn shard_seeds_append_index() {
        let spec = shard_spec(&GeneratorSpec::hash("base"), 4).unwrap();
        assert_eq!(spec, GeneratorSpec::hash("base/4"));
        assert!(shard_spec(&GeneratorSpec::Mt19937 { seed: 1 }, 0).is_err());
    }

    #[test]
    fn shards_split_replications_exactly() {
        let parts = run_sharded(&GeneratorSpec::hash("split"), 4, 10, |_, r| Ok(r)).unwrap();
        assert_eq!(parts, vec![3, 3, 2, 2]);
    }

    #[test]
    fn csv_has_one_row_per_quantity() {
        let report = small_derangement(1).run().unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("experiment,kind,name,value\n"));
        assert!(csv.contains("derangement,reference,derangement_probability,0.36666"));
        assert!(csv.contains("derangement,decision,rejected,"));
    }
}
