use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};

use prng_audit::audit::{
    calibrate, replay, AuditConfig, AuditError, AuditReport, CalibrationConfig, CalibrationReport,
};
use prng_audit::bounds::{attainable_fraction, binomial, factorial, table1_report};
use prng_audit::generators::{word_to_f64, GeneratorSpec, WordSource};
use prng_audit::integers::IntegerMethod;
use prng_audit::sampling::{
    draw_sample, reservoir_r, vitter_z, Accounting, Algorithm, Drawer, SampleSpec, SamplingError,
};
use serde_json::json;

use crate::source::{ResolvedSource, SeedOrigin, SourceArgs, SEED_ENV};
use crate::{AuditArgs, AuditCommand, BoundsArgs, CliError, Format, GenArgs, OutputKind, SampleArgs, StatArgs};

/// Largest `n` for which `n!` or `C(n, k)` is computed on request.
const MAX_BOUNDS_N: u64 = 100_000;

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn sampling_error(e: SamplingError) -> CliError {
    match e {
        SamplingError::KExceedsN { .. } | SamplingError::InvalidSpec(_) => CliError::Usage(e.to_string()),
        other => failure(other),
    }
}

fn audit_error(e: AuditError) -> CliError {
    match e {
        AuditError::InvalidParams(_) => CliError::Usage(e.to_string()),
        AuditError::Infeasible(_) => CliError::Infeasible(e.to_string()),
        AuditError::Sampling(s) => sampling_error(s),
        other => failure(other),
    }
}

fn warn_entropy(source: &ResolvedSource) {
    if source.origin == SeedOrigin::Entropy {
        eprintln!(
            "warning: no seed given (flag or {SEED_ENV}); using entropy seed {}",
            source.seed
        );
    }
}

pub fn gen(args: GenArgs, format: Format) -> Result<String, CliError> {
    let source = args.source.resolve(true)?;
    warn_entropy(&source);
    let method: IntegerMethod = args.method.into();
    let range = match (args.output, args.range) {
        (OutputKind::Ints, Some(0)) => return Err(CliError::Usage("--range must be at least 1".into())),
        (OutputKind::Ints, Some(m)) => Some(m),
        (OutputKind::Ints, None) => return Err(CliError::Usage("--as ints needs --range".into())),
        (_, Some(_)) => return Err(CliError::Usage("--range only applies to --as ints".into())),
        (_, None) => None,
    };
    let mut g = source.spec.build().map_err(failure)?;
    let width = g.width();
    let output = match args.output {
        OutputKind::Words => "words",
        OutputKind::Ints => "ints",
        OutputKind::Fractions => "fractions",
    };
    let mut header = format!("{} output={output} count={}", source.header(), args.count);
    if let Some(m) = range {
        header.push_str(&format!(" range={m} method={}", method.name()));
    }

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut values = Vec::new();
    match format {
        Format::Text => writeln!(out, "# {header}").map_err(failure)?,
        Format::Csv => writeln!(out, "# {header}\nindex,value").map_err(failure)?,
        Format::Json => {}
    }
    for i in 0..args.count {
        let value = match args.output {
            OutputKind::Words => json!(g.next_word().map_err(failure)?),
            OutputKind::Ints => json!(method.draw(&mut g, range.expect("checked")).map_err(failure)?),
            OutputKind::Fractions => json!(word_to_f64(g.next_word().map_err(failure)?, width)),
        };
        match format {
            Format::Text => writeln!(out, "{value}").map_err(failure)?,
            Format::Csv => writeln!(out, "{},{value}", i + 1).map_err(failure)?,
            Format::Json => values.push(value),
        }
    }
    if format == Format::Json {
        let doc = json!({
            "generator": source.spec,
            "description": source.spec.describe(),
            "seed": source.seed,
            "seed_source": source.origin.name(),
            "output": output,
            "range": range,
            "method": range.map(|_| method.name()),
            "values": values,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(failure)?;
    }
    out.flush().map_err(failure)?;
    Ok(String::new())
}

fn open_lines(path: &std::path::Path) -> Result<Box<dyn BufRead>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

struct Drawn {
    indices: Vec<u64>,
    items: Option<Vec<String>>,
    n: Option<u64>,
    partial: bool,
    accounting: Accounting,
}

pub fn sample(args: SampleArgs, format: Format) -> Result<String, CliError> {
    let source = args.source.resolve(false)?;
    let method: IntegerMethod = args.method.into();
    let mut g = source.spec.build().map_err(failure)?;
    let mut rng = Drawer::with_method(&mut g, method);

    let drawn = match (&args.file, args.algo.is_streaming()) {
        (Some(path), true) => {
            if args.replacement {
                return Err(CliError::Usage(format!("{} samples without replacement only", args.algo)));
            }
            let lines = open_lines(path)?.lines().map_while(Result::ok);
            let k = args.k as usize;
            let out = match args.algo {
                Algorithm::ReservoirR => reservoir_r(&mut rng, lines, k),
                _ => vitter_z(&mut rng, lines, k),
            }
            .map_err(sampling_error)?;
            if out.partial {
                eprintln!("warning: the stream held only {} of {} requested items", out.seen, args.k);
            }
            Drawn {
                indices: out.positions,
                items: Some(out.items),
                n: Some(out.seen),
                partial: out.partial,
                accounting: out.accounting,
            }
        }
        (Some(path), false) => {
            let lines: Vec<String> = open_lines(path)?.lines().map_while(Result::ok).collect();
            let spec = SampleSpec::new(lines.len() as u64, args.k, args.replacement, args.algo)
                .map_err(sampling_error)?;
            let s = draw_sample(&mut rng, &spec).map_err(sampling_error)?;
            Drawn {
                items: Some(s.indices.iter().map(|&i| lines[i as usize - 1].clone()).collect()),
                indices: s.indices,
                n: Some(spec.n),
                partial: false,
                accounting: s.accounting,
            }
        }
        (None, _) => {
            let n = args.n.expect("required by clap");
            let spec = SampleSpec::new(n, args.k, args.replacement, args.algo).map_err(sampling_error)?;
            let s = draw_sample(&mut rng, &spec).map_err(sampling_error)?;
            Drawn {
                indices: s.indices,
                items: None,
                n: Some(n),
                partial: false,
                accounting: s.accounting,
            }
        }
    };

    let header = format!(
        "{} algorithm={} n={} k={} replacement={} method={}",
        source.header(),
        args.algo,
        drawn.n.map_or("?".into(), |n| n.to_string()),
        args.k,
        args.replacement,
        method.name()
    );
    Ok(match format {
        Format::Text => {
            let mut out = format!("# {header}\n");
            match &drawn.items {
                Some(items) => items.iter().for_each(|it| out.push_str(&format!("{it}\n"))),
                None => drawn.indices.iter().for_each(|i| out.push_str(&format!("{i}\n"))),
            }
            out
        }
        Format::Csv => {
            let mut out = format!("# {header}\nposition,index");
            out.push_str(if drawn.items.is_some() { ",item\n" } else { "\n" });
            for (p, i) in drawn.indices.iter().enumerate() {
                out.push_str(&format!("{},{i}", p + 1));
                if let Some(items) = &drawn.items {
                    out.push_str(&format!(",\"{}\"", items[p].replace('"', "\"\"")));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let doc = json!({
                "generator": source.spec,
                "description": source.spec.describe(),
                "seed": source.seed,
                "seed_source": source.origin.name(),
                "algorithm": args.algo,
                "method": method,
                "n": drawn.n,
                "k": args.k,
                "replacement": args.replacement,
                "indices": drawn.indices,
                "items": drawn.items,
                "partial": drawn.partial,
                "accounting": drawn.accounting,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    })
}

struct CustomRow {
    label: String,
    report: prng_audit::bounds::AttainabilityReport,
}

fn parse_row(row: &str) -> Result<CustomRow, CliError> {
    let parts = row
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("row {row:?} must be STATE_BITS,N[,K]")))?;
    let (bits, label, target) = match parts.as_slice() {
        [bits, n] => {
            if *n > MAX_BOUNDS_N {
                return Err(CliError::Infeasible(format!("{n}! is above the limit n <= {MAX_BOUNDS_N}")));
            }
            (*bits, format!("{n}!"), factorial(*n))
        }
        [bits, n, k] => {
            if k > n {
                return Err(CliError::Usage(format!("sample size {k} exceeds population {n}")));
            }
            if (*k).min(n - k) > MAX_BOUNDS_N {
                return Err(CliError::Infeasible(format!(
                    "C({n},{k}) is above the limit min(k, n-k) <= {MAX_BOUNDS_N}"
                )));
            }
            (*bits, format!("C({n},{k})"), binomial(*n, *k).map_err(failure)?)
        }
        _ => return Err(CliError::Usage(format!("row {row:?} must be STATE_BITS,N[,K]"))),
    };
    let report = attainable_fraction(bits, &target).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(CustomRow { label, report })
}

pub fn bounds(args: BoundsArgs, format: Format) -> Result<String, CliError> {
    if args.table1 {
        let table = table1_report();
        return Ok(match format {
            Format::Text => table.to_text(),
            Format::Csv => table.to_csv(),
            Format::Json => {
                let blocks: Vec<_> = table
                    .blocks
                    .iter()
                    .map(|b| {
                        json!({
                            "label": b.label,
                            "state_bits": b.state_bits,
                            "permutation_n": b.permutation_n,
                            "permutations": b.permutations.scientific(3),
                            "permutation_fraction": b.permutation_fraction_display(),
                            "sample_population": b.sample_population,
                            "sample_size": b.sample_size,
                            "samples": b.samples.scientific(3),
                            "samples_exact": b.samples,
                            "sample_fraction": b.sample_fraction_display(),
                        })
                    })
                    .collect();
                format!("{}\n", serde_json::to_string_pretty(&json!({ "blocks": blocks })).expect("json"))
            }
        });
    }
    let rows = args.row.iter().map(|r| parse_row(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        Format::Text => rows
            .iter()
            .map(|r| {
                format!(
                    "state_bits={} target={} target_value={} fraction={} l1_lower_bound={}\n",
                    r.report.state_bits,
                    r.label,
                    r.report.target.scientific(6),
                    r.report.fraction_display(),
                    r.report.l1_display()
                )
            })
            .collect(),
        Format::Csv => {
            let mut out = String::from("state_bits,target,target_value,fraction,l1_lower_bound\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},\"{}\",{},{},{}\n",
                    r.report.state_bits,
                    r.label,
                    r.report.target.scientific(6),
                    r.report.fraction_display(),
                    r.report.l1_display()
                ));
            }
            out
        }
        Format::Json => {
            let docs: Vec<_> = rows
                .iter()
                .map(|r| json!({ "target": r.label, "report": r.report }))
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&docs).expect("json"))
        }
    })
}

fn report_text(report: &AuditReport, seed: Option<&ResolvedSource>) -> String {
    let mut out = format!(
        "experiment={} generator={} replications={}",
        report.experiment, report.generator, report.replications
    );
    if let Some(m) = report.method {
        out.push_str(&format!(" method={}", m.name()));
    }
    out.push('\n');
    if let Some(s) = seed {
        out.push_str(&format!("seed={} seed_source={}\n", s.seed, s.origin.name()));
    }
    out.push_str(&format!(
        "config={}\n",
        serde_json::to_string(&report.config).expect("json")
    ));
    for (k, v) in &report.statistics {
        out.push_str(&format!("statistic {k} = {v}\n"));
    }
    for (k, v) in &report.reference {
        out.push_str(&format!("reference {k} = {v}\n"));
    }
    if let Some(t) = report.test_statistic {
        out.push_str(&format!("test_statistic = {t}\n"));
    }
    for (k, v) in &report.p_values {
        out.push_str(&format!("p_value {k} = {v}\n"));
    }
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    match report.alpha {
        Some(a) => out.push_str(&format!("rejected={} alpha={a}\n", report.rejected)),
        None => out.push_str(&format!("violated={}\n", report.rejected)),
    }
    out.push_str(&format!("duration_ms={:.1}\n", report.duration_ms));
    out
}

fn calibration_text(report: &CalibrationReport) -> String {
    let mut out = format!(
        "calibration base_seed={} repetitions={} reps={} alpha={} per_test_alpha={}\n",
        report.config.base_seed, report.config.repetitions, report.config.reps, report.config.alpha, report.per_test_alpha
    );
    for row in report.rows.iter().filter(|r| r.rejected) {
        let worst = row
            .p_values
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("p-values");
        out.push_str(&format!("rejected repetition={} test={} p={}\n", row.repetition, worst.0, worst.1));
    }
    out.push_str(&format!("rejections={}\nduration_ms={:.1}\n", report.rejections, report.duration_ms));
    out
}

fn calibration_csv(report: &CalibrationReport) -> String {
    let mut out = String::from("repetition,test,p_value,rejected\n");
    for row in &report.rows {
        for (test, p) in &row.p_values {
            out.push_str(&format!(
                "{},{test},{p},{}\n",
                row.repetition,
                p < &report.per_test_alpha
            ));
        }
    }
    out
}

fn write_out(path: &Option<std::path::PathBuf>, json: &str) -> Result<(), CliError> {
    if let Some(path) = path {
        fs::write(path, format!("{json}\n"))
            .map_err(|e| failure(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn stat_source(stat: &StatArgs) -> Result<ResolvedSource, CliError> {
    stat.source.resolve(false)
}

fn resolved(source: &SourceArgs) -> Result<(GeneratorSpec, ResolvedSource), CliError> {
    let r = source.resolve(false)?;
    Ok((r.spec.clone(), r))
}

pub fn audit(args: AuditArgs, format: Format) -> Result<String, CliError> {
    let (config, seed) = match args.experiment {
        AuditCommand::Murdoch {
            source,
            method,
            reps,
            alpha,
        } => {
            let (generator, seed) = resolved(&source)?;
            (
                AuditConfig::Murdoch {
                    generator,
                    method: method.into(),
                    reps,
                    alpha,
                },
                Some(seed),
            )
        }
        AuditCommand::Coverage { a, c, m, n } => (
            AuditConfig::Coverage {
                modulus: m,
                multiplier: a,
                increment: c,
                n,
            },
            None,
        ),
        AuditCommand::Derangement { stat, n } => {
            let seed = stat_source(&stat)?;
            (
                AuditConfig::Derangement {
                    generator: seed.spec.clone(),
                    method: stat.method.into(),
                    n,
                    reps: stat.reps,
                    shards: stat.shards,
                    alpha: stat.alpha,
                },
                Some(seed),
            )
        }
        AuditCommand::Spearman { stat, n } => {
            let seed = stat_source(&stat)?;
            (
                AuditConfig::Spearman {
                    generator: seed.spec.clone(),
                    method: stat.method.into(),
                    n,
                    reps: stat.reps,
                    shards: stat.shards,
                    alpha: stat.alpha,
                },
                Some(seed),
            )
        }
        AuditCommand::Frequency { stat, n, k, algo } => {
            let seed = stat_source(&stat)?;
            (
                AuditConfig::SampleFrequency {
                    generator: seed.spec.clone(),
                    method: stat.method.into(),
                    algorithm: algo,
                    n,
                    k,
                    reps: stat.reps,
                    shards: stat.shards,
                    alpha: stat.alpha,
                },
                Some(seed),
            )
        }
        AuditCommand::Calibrate {
            seed,
            repetitions,
            reps,
            alpha,
        } => {
            let base_seed = match seed.or_else(|| std::env::var(SEED_ENV).ok()) {
                Some(s) if !s.is_empty() => s,
                _ => {
                    return Err(CliError::Usage(format!(
                        "a base seed is required: pass --seed or set {SEED_ENV}"
                    )))
                }
            };
            let config = CalibrationConfig {
                base_seed,
                repetitions,
                reps,
                alpha,
                ..CalibrationConfig::default()
            };
            let report = calibrate(&config).map_err(audit_error)?;
            let json = serde_json::to_string_pretty(&report).expect("json");
            write_out(&args.out, &json)?;
            return Ok(match format {
                Format::Text => calibration_text(&report),
                Format::Csv => calibration_csv(&report),
                Format::Json => format!("{json}\n"),
            });
        }
        AuditCommand::Replay { report } => {
            let text = fs::read_to_string(&report)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", report.display())))?;
            let recorded = AuditReport::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            let rerun = replay(&recorded).map_err(audit_error)?;
            let json = rerun.to_json();
            write_out(&args.out, &json)?;
            return Ok(match format {
                Format::Text => format!("reproduced=true\n{}", report_text(&rerun, None)),
                Format::Csv => rerun.to_csv(),
                Format::Json => format!("{json}\n"),
            });
        }
    };
    let report = config.run().map_err(audit_error)?;
    let json = report.to_json();
    write_out(&args.out, &json)?;
    Ok(match format {
        Format::Text => report_text(&report, seed.as_ref()),
        Format::Csv => report.to_csv(),
        Format::Json => format!("{json}\n"),
    })
}
