use std::collections::HashSet;

use num_rational::BigRational;
use rayon::prelude::*;

use super::stats::{
    binomial_two_sided, chi_square_sf, colex_rank, derangement_probability, fixed_point_distribution,
    normal_two_sided, pooled_chi_square, small_binomial, squared_rank_difference,
};
use super::{run_sharded, AuditConfig, AuditError, AuditReport, DEFAULT_ALPHA};
use crate::bounds::{attainable_fraction_of, factorial, to_f64, BigCount};
use crate::generators::{GeneratorSpec, Lcg, LcgParams, WordSource};
use crate::integers::{
    floor_scaled_even_count, randint_floor_scaled, randint_mask, randint_round, round_even_count,
    IntegerMethod, MAX_EXACT_WIDTH,
};
use crate::sampling::enumerate::enumerate;
use crate::sampling::{draw_sample, fisher_yates, Algorithm, Drawer, SampleSpec};

/// Range of the parity experiment: `floor(2^32 * 2/5)`.
pub const MURDOCH_M: u64 = 1_717_986_918;
/// The floor method multiplies by the real `(2/5) * 2^32`, i.e. `2^33 / 5`.
pub const MURDOCH_NUMER: u128 = 1 << 33;
pub const MURDOCH_DENOM: u128 = 5;

const MIN_MURDOCH_REPS: u64 = 100_000;
const MIN_PERMUTATION_REPS: u64 = 10_000;
const MAX_COVERAGE_MODULUS: u64 = 1 << 16;
const MAX_COVERAGE_N: u64 = 8;
const MAX_FREQUENCY_CELLS: u64 = 10_000;
const MIN_EXPECTED: f64 = 10.0;

pub fn murdoch_experiment(generator: GeneratorSpec, method: IntegerMethod, reps: u64) -> Result<AuditReport, AuditError> {
    AuditConfig::Murdoch {
        generator,
        method,
        reps,
        alpha: DEFAULT_ALPHA,
    }
    .run()
}

pub fn permutation_coverage(params: LcgParams, n: u64) -> Result<AuditReport, AuditError> {
    AuditConfig::Coverage {
        modulus: params.modulus(),
        multiplier: params.multiplier(),
        increment: params.increment(),
        n,
    }
    .run()
}

pub fn derangement_test(generator: GeneratorSpec, n: u64, reps: u64) -> Result<AuditReport, AuditError> {
    AuditConfig::Derangement {
        generator,
        method: IntegerMethod::MaskReject,
        n,
        reps,
        shards: 1,
        alpha: DEFAULT_ALPHA,
    }
    .run()
}

pub fn spearman_test(generator: GeneratorSpec, n: u64, reps: u64) -> Result<AuditReport, AuditError> {
    AuditConfig::Spearman {
        generator,
        method: IntegerMethod::MaskReject,
        n,
        reps,
        shards: 1,
        alpha: DEFAULT_ALPHA,
    }
    .run()
}

pub fn sample_frequency_test(
    generator: GeneratorSpec,
    method: IntegerMethod,
    algorithm: Algorithm,
    n: u64,
    k: u64,
    reps: u64,
) -> Result<AuditReport, AuditError> {
    AuditConfig::SampleFrequency {
        generator,
        method,
        algorithm,
        n,
        k,
        reps,
        shards: 1,
        alpha: DEFAULT_ALPHA,
    }
    .run()
}

fn ratio_f64(num: u128, den: u128) -> f64 {
    to_f64(&BigRational::new(num.into(), den.into()))
}

pub(super) fn run_murdoch(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let AuditConfig::Murdoch {
        generator,
        method,
        reps,
        alpha,
    } = config
    else {
        unreachable!()
    };
    if *reps < MIN_MURDOCH_REPS {
        return Err(AuditError::InvalidParams(format!(
            "at least {MIN_MURDOCH_REPS} replications are required"
        )));
    }
    let mut g = generator.build()?;
    if g.width() != 32 {
        return Err(AuditError::InvalidParams(format!(
            "the parity experiment needs 32-bit words, {} emits {}",
            generator.describe(),
            g.width()
        )));
    }
    let mut evens = 0u64;
    for _ in 0..*reps {
        let v = match method {
            IntegerMethod::Floor => randint_floor_scaled(&mut g, MURDOCH_NUMER, MURDOCH_DENOM)?,
            IntegerMethod::Round => randint_round(&mut g, MURDOCH_M)?,
            IntegerMethod::MaskReject => randint_mask(&mut g, MURDOCH_M)?,
        };
        evens += u64::from(v % 2 == 0);
    }
    let exact_evens = match method {
        IntegerMethod::Floor => floor_scaled_even_count(32, MURDOCH_NUMER, MURDOCH_DENOM),
        IntegerMethod::Round => round_even_count(32, MURDOCH_M),
        // Uniform on {1..m} with m even.
        IntegerMethod::MaskReject => 1 << 31,
    };
    let p0 = ratio_f64(exact_evens, 1 << 32);
    let p_hat = evens as f64 / *reps as f64;
    let z = (p_hat - p0) / (p0 * (1.0 - p0) / *reps as f64).sqrt();

    let mut report = AuditReport::new(config, generator.describe(), Some(*method), *reps);
    report.statistics.insert("evens".into(), evens as f64);
    report.statistics.insert("p_even".into(), p_hat);
    report.statistics.insert("m".into(), MURDOCH_M as f64);
    report.reference.insert("p_even_exact".into(), p0);
    report.test_statistic = Some(z);
    report.p_values.insert("p_even_vs_exact".into(), normal_two_sided(z));
    report.decide(*alpha);
    Ok(report)
}

pub(super) fn run_coverage(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let AuditConfig::Coverage {
        modulus,
        multiplier,
        increment,
        n,
    } = *config
    else {
        unreachable!()
    };
    if modulus > MAX_COVERAGE_MODULUS {
        return Err(AuditError::Infeasible(format!(
            "modulus {modulus} exceeds {MAX_COVERAGE_MODULUS} initial states"
        )));
    }
    if n == 0 || n > MAX_COVERAGE_N {
        return Err(AuditError::Infeasible(format!(
            "n must be in 1..={MAX_COVERAGE_N} to count distinct permutations"
        )));
    }
    let params = LcgParams::new(modulus, multiplier, increment)?;
    let distinct: HashSet<Vec<u64>> = (0..modulus)
        .into_par_iter()
        .map(|seed| -> Result<Vec<u64>, AuditError> {
            let mut lcg = Lcg::new(params, seed)?;
            Ok(fisher_yates(&mut Drawer::new(&mut lcg), n)?)
        })
        .collect::<Result<_, _>>()?;
    let permutations = factorial(n);
    let total = to_f64(&permutations.to_rational());
    let bound = attainable_fraction_of(BigCount::new(modulus.into()), &permutations)
        .map_err(|e| AuditError::InvalidParams(e.to_string()))?;

    let mut report = AuditReport::new(
        config,
        format!("lcg(a={multiplier}, c={increment}, m={modulus}, every seed)"),
        Some(IntegerMethod::MaskReject),
        modulus,
    );
    if !params.full_period() {
        report
            .warnings
            .push("parameters do not give a full period; fewer distinct states are visited".into());
    }
    report.statistics.insert("distinct_permutations".into(), distinct.len() as f64);
    report.statistics.insert("observed_fraction".into(), distinct.len() as f64 / total);
    report.reference.insert("states".into(), modulus as f64);
    report.reference.insert("permutations".into(), total);
    report.reference.insert("attainable_fraction_bound".into(), to_f64(&bound.fraction));
    report.reference.insert("l1_lower_bound".into(), to_f64(&bound.l1_lower_bound));
    report.rejected = distinct.len() as u64 > modulus;
    Ok(report)
}

pub(super) fn run_derangement(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let AuditConfig::Derangement {
        generator,
        method,
        n,
        reps,
        shards,
        alpha,
    } = config
    else {
        unreachable!()
    };
    let (n, reps) = (*n, *reps);
    if n < 2 {
        return Err(AuditError::InvalidParams("n must be at least 2".into()));
    }
    if reps < MIN_PERMUTATION_REPS {
        return Err(AuditError::InvalidParams(format!(
            "at least {MIN_PERMUTATION_REPS} replications are required"
        )));
    }
    let parts = run_sharded(generator, *shards, reps, |g, share| {
        let mut d = Drawer::with_method(g, *method);
        let mut fixed = vec![0u64; n as usize + 1];
        for _ in 0..share {
            let perm = fisher_yates(&mut d, n)?;
            let f = perm.iter().enumerate().filter(|(i, &v)| v == *i as u64 + 1).count();
            fixed[f] += 1;
        }
        Ok(fixed)
    })?;
    let mut fixed = vec![0u64; n as usize + 1];
    for part in parts {
        for (acc, c) in fixed.iter_mut().zip(part) {
            *acc += c;
        }
    }
    let reference: Vec<f64> = fixed_point_distribution(n).iter().map(to_f64).collect();
    let p_derange = to_f64(&derangement_probability(n));
    let expected: Vec<f64> = reference.iter().map(|p| p * reps as f64).collect();
    let (chi, cells) = pooled_chi_square(&fixed, &expected, MIN_EXPECTED);

    let mut report = AuditReport::new(config, generator.describe(), Some(*method), reps);
    report.statistics.insert("derangements".into(), fixed[0] as f64);
    report.statistics.insert("derangement_frequency".into(), fixed[0] as f64 / reps as f64);
    for (j, c) in fixed.iter().enumerate() {
        report.statistics.insert(format!("fixed_points_{j}"), *c as f64);
    }
    report.statistics.insert("fixed_point_cells".into(), cells as f64);
    report.reference.insert("derangement_probability".into(), p_derange);
    for (j, p) in reference.iter().enumerate() {
        report.reference.insert(format!("fixed_points_{j}"), *p);
    }
    report.test_statistic = Some(chi);
    report
        .p_values
        .insert("derangement_binomial".into(), binomial_two_sided(fixed[0], reps, p_derange));
    report
        .p_values
        .insert("fixed_points_chi_square".into(), chi_square_sf(chi, cells as u64 - 1));
    report.decide(*alpha);
    Ok(report)
}

pub(super) fn run_spearman(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let AuditConfig::Spearman {
        generator,
        method,
        n,
        reps,
        shards,
        alpha,
    } = config
    else {
        unreachable!()
    };
    let (n, reps) = (*n, *reps);
    if n < 3 {
        return Err(AuditError::InvalidParams("n must be at least 3".into()));
    }
    if reps < MIN_PERMUTATION_REPS {
        return Err(AuditError::InvalidParams(format!(
            "at least {MIN_PERMUTATION_REPS} replications are required"
        )));
    }
    let parts = run_sharded(generator, *shards, reps, |g, share| {
        let mut d = Drawer::with_method(g, *method);
        let mut total = 0u128;
        for _ in 0..share {
            let a = fisher_yates(&mut d, n)?;
            let b = fisher_yates(&mut d, n)?;
            total += squared_rank_difference(&a, &b) as u128;
        }
        Ok(total)
    })?;
    let sum_d2: u128 = parts.into_iter().sum();
    let nf = n as f64;
    // Mean of rho = 1 - 6 d^2 / (n(n^2-1)) over the pairs.
    let mean_rho = 1.0 - 6.0 * (sum_d2 as f64 / reps as f64) / (nf * (nf * nf - 1.0));
    let z = mean_rho * ((reps as f64) * (nf - 1.0)).sqrt();

    let mut report = AuditReport::new(config, generator.describe(), Some(*method), reps);
    report.statistics.insert("mean_rho".into(), mean_rho);
    report.statistics.insert("sum_squared_rank_difference".into(), sum_d2 as f64);
    report.reference.insert("mean_rho".into(), 0.0);
    report.reference.insert("rho_variance".into(), 1.0 / (nf - 1.0));
    report.test_statistic = Some(z);
    report.p_values.insert("mean_rho_z".into(), normal_two_sided(z));
    report.decide(*alpha);
    Ok(report)
}

pub(super) fn run_sample_frequency(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let AuditConfig::SampleFrequency {
        generator,
        method,
        algorithm,
        n,
        k,
        reps,
        shards,
        alpha,
    } = config
    else {
        unreachable!()
    };
    let (n, k, reps) = (*n, *k, *reps);
    let spec = SampleSpec::new(n, k, false, *algorithm)?;
    let cells = small_binomial(n, k);
    if cells > MAX_FREQUENCY_CELLS {
        return Err(AuditError::Infeasible(format!(
            "C({n},{k}) = {cells} cells exceeds {MAX_FREQUENCY_CELLS}"
        )));
    }
    if reps < 100 * cells {
        return Err(AuditError::InvalidParams(format!(
            "at least 100 replications per cell ({}) are required",
            100 * cells
        )));
    }
    let parts = run_sharded(generator, *shards, reps, |g, share| {
        let mut d = Drawer::with_method(g, *method);
        let mut counts = vec![0u64; cells as usize];
        for _ in 0..share {
            let sample = draw_sample(&mut d, &spec)?;
            counts[colex_rank(&sample.sorted()) as usize] += 1;
        }
        Ok(counts)
    })?;
    let mut counts = vec![0u64; cells as usize];
    for part in parts {
        for (acc, c) in counts.iter_mut().zip(part) {
            *acc += c;
        }
    }
    let expected = reps as f64 / cells as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();

    let mut report = AuditReport::new(config, generator.describe(), Some(*method), reps);
    report.statistics.insert("chi_square".into(), chi);
    report.statistics.insert("cells".into(), cells as f64);
    report.statistics.insert("min_cell".into(), *counts.iter().min().expect("cells") as f64);
    report.statistics.insert("max_cell".into(), *counts.iter().max().expect("cells") as f64);
    report.reference.insert("expected_per_cell".into(), expected);
    if let Some(nc) = predicted_noncentrality(generator, *method, &spec, cells) {
        report.reference.insert("predicted_noncentrality".into(), nc * reps as f64);
    }
    report.test_statistic = Some(chi);
    report.p_values.insert("chi_square".into(), chi_square_sf(chi, cells - 1));
    report.decide(*alpha);
    Ok(report)
}

/// `sum (p_i - 1/C)^2 / (1/C)` over the exact cell probabilities, when the
/// sampler's paths can be enumerated at the generator's word width.
fn predicted_noncentrality(generator: &GeneratorSpec, method: IntegerMethod, spec: &SampleSpec, cells: u64) -> Option<f64> {
    // Mask-and-reject draws are exactly uniform at any width.
    let width = match method {
        IntegerMethod::MaskReject => 8,
        _ => generator.build().ok()?.width(),
    };
    if spec.n > 8 || width > MAX_EXACT_WIDTH || spec.algorithm == Algorithm::Pikk {
        return None;
    }
    let dist = enumerate(method, width, |s| Ok(draw_sample(s, spec)?.sorted())).ok()?;
    let q = 1.0 / cells as f64;
    let seen: f64 = dist
        .outcomes
        .values()
        .map(|p| (to_f64(p) - q).powi(2) / q)
        .sum();
    let missing = cells as usize - dist.outcomes.len();
    Some(seen + missing as f64 * q)
}
