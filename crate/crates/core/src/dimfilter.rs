//! Arithmetic nonexistence filter on dimensions `d = (2m+1)² − 2` and the
//! counting function of admissible `m`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{rat, square_free_decompose, Rational};

/// Truncated value of `∏_{p ≥ 5} (1 − 2/p²)`.
pub const DENSITY_CONSTANT: f64 = 0.82963;

pub const COUNT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimError {
    #[error("x = {x} exceeds the enumeration budget {budget}")]
    BudgetExceeded { x: u64, budget: u64 },
    #[error("m must be at least 1")]
    InvalidM,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub pass: bool,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterVerdict {
    pub m: u64,
    pub d: u64,
    pub conditions: Vec<Condition>,
    pub applies: bool,
}

impl FilterVerdict {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub fn dimension_of(m: u64) -> u64 {
    (2 * m + 1).pow(2) - 2
}

/// `Some(m)` when `d = (2m+1)² − 2` for some `m ≥ 1`.
pub fn m_of_dimension(d: u64) -> Option<u64> {
    let s = (d + 2).isqrt();
    (s * s == d + 2 && s % 2 == 1 && s >= 3).then(|| (s - 1) / 2)
}

fn odd_part(mut n: u64) -> u64 {
    while n % 2 == 0 && n > 0 {
        n /= 2;
    }
    n
}

pub fn thm37_filter(m: u64) -> Result<FilterVerdict, DimError> {
    if m == 0 {
        return Err(DimError::InvalidM);
    }
    let odd = Condition { name: "odd", pass: m % 2 == 1, witness: format!("m mod 2 = {}", m % 2) };
    let mod3 = Condition { name: "mod3", pass: m % 3 != 1, witness: format!("m mod 3 = {}", m % 3) };
    let dec = square_free_decompose(odd_part(m) * odd_part(m + 1));
    let sqf = Condition {
        name: "oddsquarefree",
        pass: dec.square == 1,
        witness: if dec.square == 1 {
            "odd part of m(m+1) is square-free".into()
        } else {
            format!("{}^2 divides m(m+1)", dec.square)
        },
    };
    let mod8 = Condition { name: "mod8", pass: (m + 1) % 8 != 0, witness: format!("(m+1) mod 8 = {}", (m + 1) % 8) };
    let conditions = vec![odd, mod3, sqf, mod8];
    let applies = conditions.iter().all(|c| c.pass);
    Ok(FilterVerdict { m, d: dimension_of(m), conditions, applies })
}

pub fn excluded_dims(m_max: u64) -> Vec<(u64, u64)> {
    (1..=m_max)
        .filter_map(|m| thm37_filter(m).ok())
        .filter(|v| v.applies)
        .map(|v| (v.m, v.d))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `m(m+1)` square-free.
    Thm38,
    /// `m(m+1)` free of odd prime squares.
    Thm37,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "thm38" => Ok(Variant::Thm38),
            "thm37" => Ok(Variant::Thm37),
            _ => Err(format!("unknown variant {s:?} (expected thm37 or thm38)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub x: u64,
    pub variant: Variant,
    pub f_x: u64,
    #[serde(serialize_with = "ser_display")]
    pub predicted: Rational,
    pub ratio: f64,
    pub predicted_ratio: f64,
    pub relative_gap: f64,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Square-free flags for `0..=n`, ignoring the prime 2 when `odd_only`.
fn square_free_sieve(n: usize, odd_only: bool) -> Vec<bool> {
    let mut flags = vec![true; n + 1];
    flags[0] = false;
    let mut composite = vec![false; n.isqrt() + 2];
    for p in 2..composite.len() {
        if composite[p] {
            continue;
        }
        for q in (p * p..composite.len()).step_by(p) {
            composite[q] = true;
        }
        if odd_only && p == 2 {
            continue;
        }
        for k in (p * p..=n).step_by(p * p) {
            flags[k] = false;
        }
    }
    flags
}

pub fn admissible(m: u64, variant: Variant) -> bool {
    let sqf = |n: u64| match variant {
        Variant::Thm38 => square_free_decompose(n).square == 1,
        Variant::Thm37 => square_free_decompose(odd_part(n)).square == 1,
    };
    m % 2 == 1 && m % 3 != 1 && (m + 1) % 8 != 0 && sqf(m) && sqf(m + 1)
}

pub fn count_valid_m(x: u64, variant: Variant) -> Result<DensityReport, DimError> {
    if x > COUNT_BUDGET {
        return Err(DimError::BudgetExceeded { x, budget: COUNT_BUDGET });
    }
    let flags = square_free_sieve(x as usize + 1, variant == Variant::Thm37);
    let f_x = (1..x as usize + 1)
        .into_par_iter()
        .with_min_len(4096)
        .filter(|&m| m % 2 == 1 && m % 3 != 1 && (m + 1) % 8 != 0 && flags[m] && flags[m + 1])
        .count() as u64;
    let c = rat(82963, 100_000);
    let predicted = c / BigInt::from(24) * BigInt::from(x);
    let predicted_ratio = DENSITY_CONSTANT / 24.0;
    let ratio = if x == 0 { 0.0 } else { f_x as f64 / x as f64 };
    Ok(DensityReport {
        x,
        variant,
        f_x,
        predicted: predicted.clone(),
        ratio,
        predicted_ratio,
        relative_gap: (ratio - predicted_ratio).abs() / predicted_ratio,
    })
}

/// `∏ (1 − 2/p²)` over primes `5 ≤ p < limit`.
pub fn euler_product(limit: usize) -> f64 {
    let mut composite = vec![false; limit];
    let mut acc = 1.0f64;
    for p in 2..limit {
        if composite[p] {
            continue;
        }
        for q in (p * p..limit).step_by(p) {
            composite[q] = true;
        }
        if p >= 5 {
            let pf = p as f64;
            acc *= 1.0 - 2.0 / (pf * pf);
        }
    }
    acc
}

pub fn predicted_count(x: u64) -> f64 {
    (rat(82963, 100_000) * BigInt::from(x) / BigInt::from(24)).to_f64().unwrap_or(f64::NAN)
}
