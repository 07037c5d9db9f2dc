use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AuditConfig, AuditError, DEFAULT_ALPHA};
use crate::generators::GeneratorSpec;
use crate::integers::IntegerMethod;
use crate::sampling::Algorithm;

/// Repeats the derangement, Spearman and sample-frequency tests under the
/// hash generator to check that rejections occur at the nominal rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub base_seed: String,
    pub repetitions: u32,
    pub derangement_n: u64,
    pub spearman_n: u64,
    pub frequency_n: u64,
    pub frequency_k: u64,
    pub reps: u64,
    /// Split across every p-value of one repetition.
    pub alpha: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            base_seed: "calibration".into(),
            repetitions: 100,
            derangement_n: 7,
            spearman_n: 10,
            frequency_n: 5,
            frequency_k: 2,
            reps: 10_000,
            alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub repetition: u32,
    /// Test name prefixed with the experiment, e.g. `spearman/mean_rho_z`.
    pub p_values: BTreeMap<String, f64>,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub config: CalibrationConfig,
    pub per_test_alpha: f64,
    pub rows: Vec<CalibrationRow>,
    pub rejections: u32,
    pub duration_ms: f64,
}

impl CalibrationConfig {
    /// Experiment configs for one repetition, seeded `base/rep/experiment`.
    pub fn battery(&self, repetition: u32) -> Vec<AuditConfig> {
        let seed = |name: &str| GeneratorSpec::hash(&format!("{}/{repetition}/{name}", self.base_seed));
        vec![
            AuditConfig::Derangement {
                generator: seed("derangement"),
                method: IntegerMethod::MaskReject,
                n: self.derangement_n,
                reps: self.reps,
                shards: 1,
                alpha: self.alpha,
            },
            AuditConfig::Spearman {
                generator: seed("spearman"),
                method: IntegerMethod::MaskReject,
                n: self.spearman_n,
                reps: self.reps,
                shards: 1,
                alpha: self.alpha,
            },
            AuditConfig::SampleFrequency {
                generator: seed("sample_frequency"),
                method: IntegerMethod::MaskReject,
                algorithm: Algorithm::RandomIndices,
                n: self.frequency_n,
                k: self.frequency_k,
                reps: self.reps,
                shards: 1,
                alpha: self.alpha,
            },
        ]
    }
}

/// Runs every repetition in parallel. A repetition is rejected when any of
/// its p-values falls below `alpha` divided by the number of p-values.
pub fn calibrate(config: &CalibrationConfig) -> Result<CalibrationReport, AuditError> {
    if config.repetitions == 0 {
        return Err(AuditError::InvalidParams("at least one repetition is required".into()));
    }
    let start = Instant::now();
    let rows: Vec<BTreeMap<String, f64>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut p_values = BTreeMap::new();
            for audit in config.battery(rep) {
                let report = audit.run()?;
                for (name, p) in report.p_values {
                    p_values.insert(format!("{}/{name}", report.experiment), p);
                }
            }
            Ok(p_values)
        })
        .collect::<Result<_, AuditError>>()?;
    let tests = rows.first().map_or(1, BTreeMap::len);
    let per_test_alpha = config.alpha / tests as f64;
    let rows: Vec<CalibrationRow> = rows
        .into_iter()
        .enumerate()
        .map(|(i, p_values)| CalibrationRow {
            repetition: i as u32,
            rejected: p_values.values().any(|&p| p < per_test_alpha),
            p_values,
        })
        .collect();
    Ok(CalibrationReport {
        config: config.clone(),
        per_test_alpha,
        rejections: rows.iter().filter(|r| r.rejected).count() as u32,
        rows,
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
