//! Generator selection and seed resolution shared by the subcommands.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use prng_audit::generators::{
    GeneratorSpec, HashFunction, LcgParams, Scripted, Seed, RANDU, WH_MODULI,
};

use crate::CliError;

/// Environment variable consulted when no seed flag is given.
pub const SEED_ENV: &str = "PRNG_AUDIT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Prng {
    /// Counter-mode hash generator
    Hash,
    #[value(alias = "mt19937")]
    Mt,
    Lcg,
    #[value(name = "wichmann-hill", alias = "wh")]
    WichmannHill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HashArg {
    Sha256,
    #[value(name = "sha512-256")]
    Sha512_256,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Generator family
    #[arg(long, value_enum, default_value_t = Prng::Hash)]
    pub prng: Prng,
    /// Seed in human-readable form: decimal, `a,b,c`, text, or 0x-prefixed hex
    #[arg(long, conflicts_with_all = ["seed_string", "seed_file"])]
    pub seed: Option<String>,
    /// Seed taken verbatim as text
    #[arg(long, conflicts_with = "seed_file")]
    pub seed_string: Option<String>,
    /// File holding the seed on its single non-comment line
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// LCG multiplier (RANDU when --a, --c and --m are all absent)
    #[arg(long)]
    pub a: Option<u64>,
    /// LCG increment [default: 0]
    #[arg(long)]
    pub c: Option<u64>,
    /// LCG modulus
    #[arg(long)]
    pub m: Option<u64>,
    /// Word width of the hash generator: 8, 16, 32 or 64
    #[arg(long, default_value_t = 32)]
    pub hash_width: u32,
    #[arg(long, value_enum, default_value_t = HashArg::Sha256)]
    pub hash: HashArg,
    /// Scripted word file (`width=<w>` header, one word per line); replaces --prng
    #[arg(long)]
    pub scripted: Option<PathBuf>,
}

/// Where the seed came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedOrigin {
    Flag,
    Env,
    Entropy,
    Script,
}

impl SeedOrigin {
    pub fn name(self) -> &'static str {
        match self {
            SeedOrigin::Flag => "flag",
            SeedOrigin::Env => "env",
            SeedOrigin::Entropy => "entropy",
            SeedOrigin::Script => "script",
        }
    }
}

/// A fully resolved generator: the recipe plus how its seed was chosen.
#[derive(Debug, Clone)]
pub struct ResolvedSource {
    pub spec: GeneratorSpec,
    pub seed: String,
    pub origin: SeedOrigin,
}

impl ResolvedSource {
    pub fn header(&self) -> String {
        format!(
            "generator={} seed={} seed_source={}",
            self.spec.describe(),
            self.seed,
            self.origin.name()
        )
    }
}

impl SourceArgs {
    fn lcg_params(&self) -> Result<LcgParams, CliError> {
        match (self.a, self.c, self.m) {
            (None, None, None) => Ok(RANDU),
            (Some(a), c, Some(m)) => {
                LcgParams::new(m, a, c.unwrap_or(0)).map_err(|e| CliError::Usage(e.to_string()))
            }
            _ => Err(CliError::Usage("an LCG needs both --a and --m".into())),
        }
    }

    fn flag_seed(&self) -> Result<Option<Seed>, CliError> {
        if let Some(s) = &self.seed {
            return Ok(Some(Seed::from_human(s)));
        }
        if let Some(s) = &self.seed_string {
            return Ok(Some(Seed::from_text(s)));
        }
        if let Some(path) = &self.seed_file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            return Seed::from_file_contents(&text)
                .map(Some)
                .ok_or_else(|| CliError::Usage("seed file must hold exactly one seed line".into()));
        }
        Ok(None)
    }

    fn entropy_seed(&self) -> Result<Seed, CliError> {
        let mut bytes = [0u8; 16];
        getrandom::getrandom(&mut bytes).map_err(|e| CliError::Failure(format!("no system entropy: {e}")))?;
        let r = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
        let r2 = u64::from_le_bytes(bytes[8..].try_into().expect("8 bytes"));
        Ok(match self.prng {
            Prng::Hash => Seed::from_bytes(bytes.to_vec()),
            Prng::Mt => Seed::from_text(&(r as u32).to_string()),
            Prng::Lcg => Seed::from_text(&(r % self.lcg_params()?.modulus()).to_string()),
            Prng::WichmannHill => {
                let pick = |x: u64, m: u64| 1 + x % (m - 1);
                Seed::from_text(&format!(
                    "{},{},{}",
                    pick(r, WH_MODULI[0]),
                    pick(r >> 21, WH_MODULI[1]),
                    pick(r2, WH_MODULI[2])
                ))
            }
        })
    }

    /// Seed precedence: flag, then `PRNG_AUDIT_SEED`, then system entropy
    /// when `allow_entropy`, else a usage error.
    pub fn resolve(&self, allow_entropy: bool) -> Result<ResolvedSource, CliError> {
        if let Some(path) = &self.scripted {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let script: Scripted = text.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
            let spec = GeneratorSpec::Scripted {
                width: prng_audit::generators::WordSource::width(&script),
                words: script.words().to_vec(),
            };
            return Ok(ResolvedSource {
                spec,
                seed: path.display().to_string(),
                origin: SeedOrigin::Script,
            });
        }
        let (seed, origin) = if let Some(seed) = self.flag_seed()? {
            (seed, SeedOrigin::Flag)
        } else if let Some(value) = std::env::var_os(SEED_ENV) {
            let value = value
                .into_string()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} is not valid UTF-8")))?;
            (Seed::from_human(&value), SeedOrigin::Env)
        } else if allow_entropy {
            (self.entropy_seed()?, SeedOrigin::Entropy)
        } else {
            return Err(CliError::Usage(format!(
                "a seed is required: pass --seed, --seed-string or --seed-file, or set {SEED_ENV}"
            )));
        };
        if seed.is_empty() {
            return Err(CliError::Usage("the seed is empty".into()));
        }
        let spec = self.spec_for(&seed)?;
        Ok(ResolvedSource {
            spec,
            seed: seed.to_human(),
            origin,
        })
    }

    fn spec_for(&self, seed: &Seed) -> Result<GeneratorSpec, CliError> {
        let bad = |what: &str| CliError::Usage(format!("seed {:?} {what}", seed.to_human()));
        let spec = match self.prng {
            Prng::Hash => GeneratorSpec::HashCounter {
                seed: seed.to_human(),
                hash: match self.hash {
                    HashArg::Sha256 => HashFunction::Sha256,
                    HashArg::Sha512_256 => HashFunction::Sha512_256,
                },
                width: self.hash_width,
            },
            Prng::Mt => {
                let v = seed.as_u64().ok_or_else(|| bad("is not an integer"))?;
                GeneratorSpec::Mt19937 {
                    seed: u32::try_from(v).map_err(|_| bad("exceeds 32 bits"))?,
                }
            }
            Prng::Lcg => {
                let params = self.lcg_params()?;
                GeneratorSpec::Lcg {
                    modulus: params.modulus(),
                    multiplier: params.multiplier(),
                    increment: params.increment(),
                    seed: seed.as_u64().ok_or_else(|| bad("is not an integer"))?,
                }
            }
            Prng::WichmannHill => {
                let text = seed.to_human();
                let parts = text
                    .split(',')
                    .map(|p| p.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad("is not a list of integers"))?;
                let triple = match parts.as_slice() {
                    [v] => [*v; 3],
                    [a, b, c] => [*a, *b, *c],
                    _ => return Err(bad("needs one or three values")),
                };
                GeneratorSpec::WichmannHill { seed: triple }
            }
        };
        spec.build().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}
