use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_LIMIT: f64 = 2.5 / std::f64::consts::SQRT_2;

/// Significance level of the verdicts.
pub const ALPHA: f64 = 0.05;

/// `erf` for `0 <= x`, by the positive-term series
/// `erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > sum * 1e-17 {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// `erfc` for `x >= 1.7` by the Laplace continued fraction, evaluated bottom-up.
fn erfc_cf(x: f64) -> f64 {
    let mut tail = x;
    for k in (1..=80).rev() {
        tail = x + f64::from(k) / 2.0 / tail;
    }
    (-x * x).exp() / (tail * std::f64::consts::PI.sqrt())
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided tail probability `2 (1 - Phi(|z|))`, computed without cancellation.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// Significantly better than even.
    B,
    /// Significantly worse.
    W,
    /// No significant difference.
    E,
}

impl Verdict {
    pub fn mirror(self) -> Verdict {
        match self {
            Verdict::B => Verdict::W,
            Verdict::W => Verdict::B,
            Verdict::E => Verdict::E,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::B => "B",
            Verdict::W => "W",
            Verdict::E => "E",
        })
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" => Ok(Verdict::B),
            "W" => Ok(Verdict::W),
            "E" => Ok(Verdict::E),
            _ => Err(Error::Parse(format!("unknown verdict {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZTest {
    pub p_hat: f64,
    pub se: f64,
    pub z: f64,
    pub p_value: f64,
    pub verdict: Verdict,
}

/// One-sample Z-test of a win rate against 0.5 with `SE = sqrt(0.25 / n)`.
pub fn z_test(wins: u64, n: u64) -> Result<ZTest> {
    if n == 0 {
        return Err(Error::Config("z_test needs n >= 1".into()));
    }
    if wins > n {
        return Err(Error::Config(format!("wins {wins} exceed games {n}")));
    }
    let p_hat = wins as f64 / n as f64;
    let se = (0.25 / n as f64).sqrt();
    let z = (p_hat - 0.5) / se;
    let p_value = two_sided_p(z);
    let verdict = if p_value < ALPHA && p_hat > 0.5 {
        Verdict::B
    } else if p_value < ALPHA && p_hat < 0.5 {
        Verdict::W
    } else {
        Verdict::E
    };
    Ok(ZTest {
        p_hat,
        se,
        z,
        p_value,
        verdict,
    })
}
