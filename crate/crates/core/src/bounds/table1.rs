//! Pigeonhole table: state spaces against permutation and sample counts.

use num_rational::BigRational;
use serde::Serialize;

use super::{
    attainable_fraction, binomial, factorial, format_fixed, format_scientific, to_f64, BigCount,
};

/// One block of the table: a state space, a permutation count and a sample
/// count that exceed it, and the fraction of samples that are attainable.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Block {
    pub label: String,
    pub state_bits: u64,
    pub state_space: BigCount,
    pub permutation_n: u64,
    pub permutations: BigCount,
    pub sample_population: u64,
    pub sample_size: u64,
    pub samples: BigCount,
    #[serde(skip)]
    pub sample_fraction: BigRational,
    #[serde(skip)]
    pub permutation_fraction: BigRational,
    /// Decimal places used when printing `sample_fraction`; `None` prints it
    /// in scientific notation.
    pub display_decimals: Option<u32>,
}

impl Table1Block {
    pub fn sample_fraction_display(&self) -> String {
        match self.display_decimals {
            Some(places) => format_fixed(&self.sample_fraction, places),
            None => format_scientific(&self.sample_fraction, 3),
        }
    }

    pub fn permutation_fraction_display(&self) -> String {
        format_scientific(&self.permutation_fraction, 3)
    }

    fn population_label(&self) -> String {
        if self.sample_population >= 1_000_000 {
            format_scientific(
                &BigCount::from(self.sample_population).to_rational(),
                2,
            )
        } else {
            self.sample_population.to_string()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1 {
    pub blocks: Vec<Table1Block>,
}

struct Row {
    feature: String,
    size: String,
    full: String,
    scientific: String,
}

/// Exact values up to this many digits are printed in full.
const FULL_DIGITS: usize = 26;

impl Table1 {
    fn rows(&self) -> Vec<Row> {
        let full = |c: &BigCount| {
            if c.digits() <= FULL_DIGITS {
                c.grouped()
            } else {
                String::new()
            }
        };
        let mut rows = Vec::new();
        for b in &self.blocks {
            let pop = b.population_label();
            rows.push(Row {
                feature: format!("{} state space", b.label),
                size: format!("2^{}", b.state_bits),
                full: full(&b.state_space),
                scientific: b.state_space.scientific(3),
            });
            rows.push(Row {
                feature: format!("Permutations of {}", b.permutation_n),
                size: format!("{}!", b.permutation_n),
                full: full(&b.permutations),
                scientific: b.permutations.scientific(3),
            });
            rows.push(Row {
                feature: format!("Samples of {} out of {}", b.sample_size, pop),
                size: format!("C({}, {})", pop, b.sample_size),
                full: full(&b.samples),
                scientific: b.samples.scientific(3),
            });
            rows.push(Row {
                feature: "Fraction of attainable samples".into(),
                size: format!("2^{}/C({}, {})", b.state_bits, pop, b.sample_size),
                full: b.sample_fraction_display(),
                scientific: String::new(),
            });
            rows.push(Row {
                feature: "Fraction of attainable permutations".into(),
                size: format!("2^{}/{}!", b.state_bits, b.permutation_n),
                full: String::new(),
                scientific: b.permutation_fraction_display(),
            });
        }
        rows
    }

    /// Columns: `feature,size,full,scientific`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,size,full,scientific\n");
        for r in self.rows() {
            out.push_str(&format!(
                "{},{},\"{}\",{}\n",
                r.feature, r.size, r.full, r.scientific
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let w0 = rows.iter().map(|r| r.feature.len()).max().unwrap_or(0).max(7);
        let w1 = rows.iter().map(|r| r.size.len()).max().unwrap_or(0).max(4);
        let w2 = rows.iter().map(|r| r.full.len()).max().unwrap_or(0).max(4);
        let mut out = format!(
            "{:<w0$}  {:<w1$}  {:<w2$}  {}\n",
            "Feature", "Size", "Full", "Scientific"
        );
        let mut block_rows = 0;
        for r in rows {
            if block_rows == 0 {
                out.push_str(&"-".repeat(w0 + w1 + w2 + 18));
                out.push('\n');
            }
            out.push_str(
                format!(
                    "{:<w0$}  {:<w1$}  {:<w2$}  {}",
                    r.feature, r.size, r.full, r.scientific
                )
                .trim_end(),
            );
            out.push('\n');
            block_rows = (block_rows + 1) % 5;
        }
        out
    }
}

fn block(
    label: &str,
    state_bits: u64,
    permutation_n: u64,
    population: u64,
    size: u64,
    display_decimals: Option<u32>,
) -> Table1Block {
    let samples = binomial(population, size).expect("size <= population");
    let permutations = factorial(permutation_n);
    let sample_fraction = attainable_fraction(state_bits, &samples)
        .expect("nonzero target")
        .fraction;
    let permutation_fraction = attainable_fraction(state_bits, &permutations)
        .expect("nonzero target")
        .fraction;
    Table1Block {
        label: label.to_string(),
        state_bits,
        state_space: BigCount::pow2(state_bits),
        permutation_n,
        permutations,
        sample_population: population,
        sample_size: size,
        samples,
        sample_fraction,
        permutation_fraction,
        display_decimals,
    }
}

/// Builds every block exactly, including `2^(32*624)` against `2084!` and
/// `C(390000000, 1000)`.
pub fn table1_report() -> Table1 {
    Table1 {
        blocks: vec![
            block("32-bit", 32, 13, 50, 10, Some(3)),
            block("64-bit", 64, 21, 500, 10, Some(3)),
            block("128-bit", 128, 35, 500, 25, Some(4)),
            block("MT", 32 * 624, 2084, 390_000_000, 1000, None),
        ],
    }
}

impl Table1Block {
    pub fn sample_fraction_f64(&self) -> f64 {
        to_f64(&self.sample_fraction)
    }
}
