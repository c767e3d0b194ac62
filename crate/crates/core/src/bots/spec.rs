use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Bot configuration in its textual form:
///
/// | form | bot |
/// |------|-----|
/// | `rand:<seed>` | uniform random |
/// | `bully:<seed>` | trump / follow suit / highest card |
/// | `rdeep:d=<depth>,s=<samples>,seed=<seed>` | determinized random lookahead |
/// | `mlp:<path>` | greedy supervised network |
/// | `rl:<path>` | greedy reinforcement-learned network |
/// | `rl+look:<path>,d=<depth>,s=<samples>,seed=<seed>` | lookahead with the network as leaf value |
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BotSpec {
    Rand {
        seed: u64,
    },
    Bully {
        seed: u64,
    },
    Rdeep {
        depth: u32,
        num_samples: u32,
        seed: u64,
    },
    Mlp {
        model: PathBuf,
    },
    Rl {
        model: PathBuf,
    },
    RlLookahead {
        model: PathBuf,
        depth: u32,
        num_samples: u32,
        seed: u64,
    },
}

impl BotSpec {
    pub fn seed(&self) -> u64 {
        match self {
            BotSpec::Rand { seed }
            | BotSpec::Bully { seed }
            | BotSpec::Rdeep { seed, .. }
            | BotSpec::RlLookahead { seed, .. } => *seed,
            BotSpec::Mlp { .. } | BotSpec::Rl { .. } => 0,
        }
    }

    pub fn model_ref(&self) -> Option<&PathBuf> {
        match self {
            BotSpec::Mlp { model } | BotSpec::Rl { model } | BotSpec::RlLookahead { model, .. } => {
                Some(model)
            }
            _ => None,
        }
    }
}

impl fmt::Display for BotSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BotSpec::Rand { seed } => write!(f, "rand:{seed}"),
            BotSpec::Bully { seed } => write!(f, "bully:{seed}"),
            BotSpec::Rdeep {
                depth,
                num_samples,
                seed,
            } => write!(f, "rdeep:d={depth},s={num_samples},seed={seed}"),
            BotSpec::Mlp { model } => write!(f, "mlp:{}", model.display()),
            BotSpec::Rl { model } => write!(f, "rl:{}", model.display()),
            BotSpec::RlLookahead {
                model,
                depth,
                num_samples,
                seed,
            } => write!(
                f,
                "rl+look:{},d={depth},s={num_samples},seed={seed}",
                model.display()
            ),
        }
    }
}

fn bad(spec: &str, reason: impl Into<String>) -> Error {
    Error::BotSpec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

/// Parses `d=..,s=..,seed=..` in that order.
fn search_params(spec: &str, parts: &[&str]) -> Result<(u32, u32, u64), Error> {
    let [d, s, seed] = parts else {
        return Err(bad(spec, "expected d=<depth>,s=<samples>,seed=<seed>"));
    };
    let field = |part: &str, key: &str| -> Result<String, Error> {
        part.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(spec, format!("expected {key}=<value>, got '{part}'")))
    };
    let depth: u32 = field(d, "d")?
        .parse()
        .map_err(|_| bad(spec, "depth is not an integer"))?;
    let samples: u32 = field(s, "s")?
        .parse()
        .map_err(|_| bad(spec, "samples is not an integer"))?;
    let seed: u64 = field(seed, "seed")?
        .parse()
        .map_err(|_| bad(spec, "seed is not an integer"))?;
    if depth == 0 {
        return Err(bad(spec, "depth must be >= 1"));
    }
    if samples == 0 {
        return Err(bad(spec, "samples must be >= 1"));
    }
    Ok((depth, samples, seed))
}

impl FromStr for BotSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self, Error> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad(spec, "missing ':'"))?;
        let seed_only = |rest: &str| {
            rest.parse::<u64>()
                .map_err(|_| bad(spec, "seed is not an integer"))
        };
        let path = |rest: &str| {
            if rest.is_empty() {
                Err(bad(spec, "missing model path"))
            } else {
                Ok(PathBuf::from(rest))
            }
        };
        match kind {
            "rand" => Ok(BotSpec::Rand {
                seed: seed_only(rest)?,
            }),
            "bully" => Ok(BotSpec::Bully {
                seed: seed_only(rest)?,
            }),
            "rdeep" => {
                let parts: Vec<&str> = rest.split(',').collect();
                let (depth, num_samples, seed) = search_params(spec, &parts)?;
                Ok(BotSpec::Rdeep {
                    depth,
                    num_samples,
                    seed,
                })
            }
            "mlp" => Ok(BotSpec::Mlp { model: path(rest)? }),
            "rl" => Ok(BotSpec::Rl { model: path(rest)? }),
            "rl+look" => {
                // The path may itself contain commas; the last three fields are parameters.
                let mut parts: Vec<&str> = rest.rsplitn(4, ',').collect();
                if parts.len() != 4 {
                    return Err(bad(spec, "expected <path>,d=..,s=..,seed=.."));
                }
                parts.reverse();
                let (depth, num_samples, seed) = search_params(spec, &parts[1..])?;
                Ok(BotSpec::RlLookahead {
                    model: path(parts[0])?,
                    depth,
                    num_samples,
                    seed,
                })
            }
            other => Err(bad(spec, format!("unknown bot kind '{other}'"))),
        }
    }
}

impl TryFrom<String> for BotSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<BotSpec> for String {
    fn from(spec: BotSpec) -> String {
        spec.to_string()
    }
}
