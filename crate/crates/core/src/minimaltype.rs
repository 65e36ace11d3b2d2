//! Minimal type: a vector `α` with `⟨α, x⟩ ∈ {0, ±1}` for every point of the
//! unit-normalized design.
//!
//! Everything is evaluated at the configuration's own scale: the level test
//! is `⟨α, x⟩² / k ∈ {0, 1}` where `k` is the squared norm of the points, so
//! `√k` never has to be formed.

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::configs::io::{lines, parse_err, scalar_at, usize_at};
use crate::configs::{dot, ConfigError, Point, PointConfig};
use crate::design::{design_strength, DesignError, DesignReport};
use crate::dimfilter::{m_of_dimension, thm37_filter};
use crate::exactnum::{binomial, rat, NumError, QuadExt, Rational};

pub const DEFAULT_GRID_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum MinimalTypeError {
    #[error("alpha has {found} coordinates, the configuration has {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("point {index}: <alpha,x>^2/k = {value} is not 0 or 1")]
    LevelViolation { index: usize, value: QuadExt },
    #[error("<alpha,alpha> = {found}, a 5-design needs {expected}")]
    AlphaNorm { found: QuadExt, expected: QuadExt },
    #[error("alpha is not in the span of the configuration")]
    AlphaOutsideSpan,
    #[error("n1 = {found} but a 5-design forces {expected}")]
    ClassSizeMismatch { found: usize, expected: Rational },
    #[error("search space has {candidates} candidates, budget is {budget}")]
    ScopeTooLarge { candidates: BigInt, budget: u64 },
    #[error("grid search needs rational coordinates")]
    GridNeedsRationalFrame,
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalTypeCertificate {
    pub alpha: Point,
    pub alpha_norm2: QuadExt,
    pub n0: usize,
    pub n1: usize,
    /// `⟨α, x⟩ / √k` for every point, in order.
    pub levels: Vec<i8>,
}

impl MinimalTypeCertificate {
    pub fn count(&self, level: i8) -> usize {
        self.levels.iter().filter(|&&l| l == level).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefutationKind {
    NonIntegralClassSizes,
    SevenDesignObstruction,
    ExhaustiveSearchEmpty,
    ValencyNonIntegral,
    ArithmeticFilter,
}

impl fmt::Display for RefutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RefutationKind::NonIntegralClassSizes => "non-integral class sizes",
            RefutationKind::SevenDesignObstruction => "seven-design obstruction",
            RefutationKind::ExhaustiveSearchEmpty => "exhaustive search empty",
            RefutationKind::ValencyNonIntegral => "non-integral valency",
            RefutationKind::ArithmeticFilter => "arithmetic filter",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub name: String,
    pub value: String,
}

fn w(name: impl Into<String>, value: impl fmt::Display) -> Witness {
    Witness { name: name.into(), value: value.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchScope {
    pub strategy: String,
    pub description: String,
    pub candidates: u64,
    pub examined: u64,
    pub outside_span: u64,
    pub unrepresentable: u64,
    pub blocks: u64,
    pub blocks_completed: u64,
    /// Hypothesis under which an empty search is a refutation.
    pub assumption: Option<String>,
}

impl SearchScope {
    pub fn complete(&self) -> bool {
        self.blocks_completed == self.blocks && self.examined + self.outside_span == self.candidates
    }
}

impl fmt::Display for SearchScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} of {} candidates examined, {} outside the span, {}/{} blocks)",
            self.strategy,
            self.description,
            self.examined,
            self.candidates,
            self.outside_span,
            self.blocks_completed,
            self.blocks
        )?;
        if let Some(a) = &self.assumption {
            write!(f, "; assumes {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Refutation {
    pub kind: RefutationKind,
    pub detail: Vec<Witness>,
    pub scope: Option<SearchScope>,
}

impl Refutation {
    pub fn witness(&self, name: &str) -> Option<&str> {
        self.detail.iter().find(|w| w.name == name).map(|w| w.value.as_str())
    }
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for w in &self.detail {
            write!(f, "; {} = {}", w.name, w.value)?;
        }
        if let Some(s) = &self.scope {
            write!(f, "; scope {s}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- filters

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterPass {
    pub n0: Option<usize>,
    pub n1: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FilterOutcome {
    Pass(FilterPass),
    Refuted(Refutation),
}

impl FilterOutcome {
    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            FilterOutcome::Refuted(r) => Some(r),
            FilterOutcome::Pass(_) => None,
        }
    }
}

/// `(d+2)|D| / (3d)`, the size of the `±1` levels of a minimal-type 5-design.
pub fn predicted_n1(d: usize, size: usize) -> Rational {
    rat(((d + 2) * size) as i64, (3 * d) as i64)
}

pub fn necessary_filters(config: &PointConfig, report: &DesignReport) -> Result<FilterOutcome, MinimalTypeError> {
    let d = config.dim();
    let size = config.len();
    let mut notes = Vec::new();
    if report.strength < 5 {
        notes.push(format!("strength {} < 5: class-size filters do not apply", report.strength_text()));
        return Ok(FilterOutcome::Pass(FilterPass { n0: None, n1: None, notes }));
    }
    let n1 = predicted_n1(d, size);
    let n0 = Rational::from_integer(BigInt::from(size)) - &n1;
    if !n1.is_integer() || !n0.is_integer() {
        return Ok(FilterOutcome::Refuted(Refutation {
            kind: RefutationKind::NonIntegralClassSizes,
            detail: vec![w("n0", &n0), w("n1", &n1)],
            scope: None,
        }));
    }
    let antipodal = config.is_antipodal();
    if antipodal {
        // x -> -x swaps the +1 and -1 levels and fixes the 0 level
        let half = &n1 / BigInt::from(2);
        let half0 = &n0 / BigInt::from(2);
        if !half.is_integer() || !half0.is_integer() {
            return Ok(FilterOutcome::Refuted(Refutation {
                kind: RefutationKind::NonIntegralClassSizes,
                detail: vec![w("n0", &n0), w("n1", &n1), w("n1/2", &half), w("n0/2", &half0)],
                scope: None,
            }));
        }
    }
    if report.strength >= 7 {
        let seven = rat((5 * (d + 2) * (d + 2) * size) as i64, (9 * d * (d + 4)) as i64);
        if seven != n1 {
            return Ok(FilterOutcome::Refuted(Refutation {
                kind: RefutationKind::SevenDesignObstruction,
                detail: vec![w("n1 from degree-2 moment", &n1), w("n1 from degree-6 moment", &seven)],
                scope: None,
            }));
        }
    }
    if report.tight && report.strength == 5 {
        if let Some(m) = m_of_dimension(d as u64) {
            let v = thm37_filter(m).expect("m >= 1");
            if v.applies {
                let mut detail = vec![w("m", m), w("d", v.d)];
                detail.extend(v.conditions.iter().map(|c| w(c.name, &c.witness)));
                return Ok(FilterOutcome::Refuted(Refutation { kind: RefutationKind::ArithmeticFilter, detail, scope: None }));
            }
            notes.push(format!("d = (2m+1)^2 - 2 with m = {m}, but the arithmetic filter does not apply"));
        }
    }
    if antipodal && report.strength < 7 && 2 * d * (d + 1) < 2 * size {
        let n = size / 2;
        let angles = config.gram()?.angles().len();
        if angles == 4 {
            match valency_filter(d, n)? {
                ValencyVerdict::Refuted(r) => return Ok(FilterOutcome::Refuted(r)),
                ValencyVerdict::PassWithCaveat { reason, .. } => notes.push(format!("valency filter inconclusive: {reason}")),
                ValencyVerdict::Pass(_) => notes.push("valencies are non-negative integers".into()),
            }
        }
    }
    let to_usize = |r: &Rational| r.to_integer().to_usize().expect("class size fits in usize");
    Ok(FilterOutcome::Pass(FilterPass { n0: Some(to_usize(&n0)), n1: Some(to_usize(&n1)), notes }))
}

// ---------------------------------------------------------------- valencies

pub const VALENCY_NAMES: [&str; 9] = ["p111", "p112", "p113", "p121", "p122", "p123", "p211", "p212", "p213"];
const VALENCY_NAMES_2: [&str; 3] = ["p221", "p222", "p223"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValencyReport {
    pub d: usize,
    pub n: usize,
    /// `α_{n,d}` of the Levenstein angle set.
    pub alpha: QuadExt,
    pub x1_angles: Vec<QuadExt>,
    pub x2_angles: Vec<QuadExt>,
    /// Square of the nonzero `A(X_1, X_2)` angle.
    pub cross_angle2: QuadExt,
    pub values: Vec<(String, QuadExt)>,
}

impl ValencyReport {
    pub fn get(&self, name: &str) -> Option<&QuadExt> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn x1_size(&self) -> Rational {
        predicted_n1(self.d, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ValencyVerdict {
    Pass(ValencyReport),
    PassWithCaveat { report: Option<ValencyReport>, reason: String },
    Refuted(Refutation),
}

/// The closed-form valencies of the three-class decomposition of an
/// antipodal 4-distance 5-design with `2n` points in `R^d`.
pub fn valency_table(d: usize, n: usize) -> Result<Option<ValencyReport>, MinimalTypeError> {
    let (di, ni) = (d as i64, n as i64);
    let q = |v: i64| QuadExt::from_int(v);
    let den_alpha = (di + 2) * (ni - di);
    let num_alpha = 3 * ni - di * (di + 2);
    if d < 2 || den_alpha <= 0 || num_alpha <= 0 {
        return Ok(None);
    }
    let Some(a) = QuadExt::from_frac(num_alpha, den_alpha).sqrt() else {
        return Ok(None);
    };
    let dm1 = q(di - 1);
    let x1_angles = vec![
        q(-3).checked_div(&dm1)?,
        q(-(di + 2)).checked_mul(&a)?.checked_sub(&q(3))?.checked_div(&dm1)?,
        q(di + 2).checked_mul(&a)?.checked_sub(&q(3))?.checked_div(&dm1)?,
    ];
    let x2_angles = vec![q(-1), q(0), -&a, a.clone()];
    // √((d+2)/(d−1))·α mixes two radicands in general; only its square is kept
    let cross_angle2 = QuadExt::from_frac(di + 2, di - 1).checked_mul(&a.square())?;

    let big = q(di * (di + 2) - 3 * ni);
    let base = q(3 * di).checked_mul(&big)?;
    let l = q(di * di + di - 2 * ni);
    let rat_val = |num: i64, den: &QuadExt| -> Result<QuadExt, NumError> { q(num).checked_div(den) };
    let p111 = q((di - 1) * ni).checked_mul(&l)?.checked_div(&base)?;
    let core = q(di * (-3 * di + ni - 6) + 8 * ni);
    let alpha_term = q(3 * (di + 2) * (di - ni)).checked_mul(&a)?;
    let den_p = q(6 * di * (3 * ni - di * (di + 2)));
    let p112 = q(ni - di).checked_mul(&core.checked_sub(&alpha_term)?)?.checked_div(&den_p)?;
    let p113 = q(ni - di).checked_mul(&core.checked_add(&alpha_term)?)?.checked_div(&den_p)?;
    let p121 = q(4 * (di - 1) * ni).checked_mul(&l)?.checked_div(&base)?;
    let p122 = rat_val(2 * (di - 1) * ni * (di - ni), &base)?;
    let p211 = q((di + 2) * ni).checked_mul(&l)?.checked_div(&base)?;
    let p212 = rat_val((di + 2) * ni * (di - ni), &q(6 * di).checked_mul(&big)?)?;
    let p221 = q(2 * (2 * di - 5) * ni).checked_mul(&l)?.checked_div(&base)?;
    let p222 = rat_val(-(di + 2) * (3 * di - 2 * ni) * (di - ni), &base)?;
    let vals = [p111, p112, p113, p121, p122.clone(), p122, p211, p212.clone(), p212];
    let mut values: Vec<(String, QuadExt)> = VALENCY_NAMES.iter().map(|s| s.to_string()).zip(vals).collect();
    values.extend(VALENCY_NAMES_2.iter().map(|s| s.to_string()).zip([p221, p222.clone(), p222]));
    Ok(Some(ValencyReport { d, n, alpha: a, x1_angles, x2_angles, cross_angle2, values }))
}

pub fn valency_filter(d: usize, n: usize) -> Result<ValencyVerdict, MinimalTypeError> {
    if 2 * n <= d * (d + 1) {
        return Ok(ValencyVerdict::PassWithCaveat {
            report: None,
            reason: format!("n = {n} is not above d(d+1)/2 = {}", d * (d + 1) / 2),
        });
    }
    if 3 * n == d * (d + 2) {
        return Ok(ValencyVerdict::PassWithCaveat { report: None, reason: "3n = d(d+2): alpha_{n,d} = 0".into() });
    }
    let Some(report) = valency_table(d, n)? else {
        return Ok(ValencyVerdict::PassWithCaveat { report: None, reason: "alpha_{n,d} is not real".into() });
    };
    let one = QuadExt::one();
    let minus_one = -&one;
    let in_range = |v: &QuadExt| *v >= minus_one && *v < one;
    let bad: Vec<String> = report
        .x1_angles
        .iter()
        .chain(&report.x2_angles)
        .filter(|v| !in_range(v))
        .map(|v| v.to_string())
        .collect();
    if !bad.is_empty() {
        return Ok(ValencyVerdict::PassWithCaveat {
            reason: format!("angle(s) {} outside [-1,1)", bad.join(", ")),
            report: Some(report),
        });
    }
    if report.cross_angle2 > one {
        return Ok(ValencyVerdict::PassWithCaveat {
            reason: format!("cross angle squared {} exceeds 1", report.cross_angle2),
            report: Some(report),
        });
    }
    let offending: Vec<Witness> = report
        .values
        .iter()
        .filter(|(_, v)| !matches!(v.as_integer(), Some(i) if i >= BigInt::zero()))
        .map(|(name, v)| w(name.clone(), v))
        .collect();
    if offending.is_empty() {
        return Ok(ValencyVerdict::Pass(report));
    }
    let mut detail = vec![w("d", d), w("n", n), w("alpha_{n,d}", &report.alpha)];
    detail.extend(offending);
    Ok(ValencyVerdict::Refuted(Refutation { kind: RefutationKind::ValencyNonIntegral, detail, scope: None }))
}

// ---------------------------------------------------------------- certificates

fn check_span(config: &PointConfig, alpha: &[QuadExt]) -> Result<(), MinimalTypeError> {
    for n in config.span_complement()? {
        if !dot(&n, alpha)?.is_zero() {
            return Err(MinimalTypeError::AlphaOutsideSpan);
        }
    }
    Ok(())
}

/// Checks the levels only; no norm or class-size checks.
fn levels_of(config: &PointConfig, alpha: &[QuadExt]) -> Result<Vec<i8>, MinimalTypeError> {
    if alpha.len() != config.ambient() {
        return Err(MinimalTypeError::DimensionMismatch { found: alpha.len(), expected: config.ambient() });
    }
    let k = config.norm2();
    config
        .points()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = dot(alpha, x)?;
            let r = v.square().checked_div(k)?;
            if r.is_zero() {
                Ok(0)
            } else if r.is_one() {
                Ok(v.signum() as i8)
            } else {
                Err(MinimalTypeError::LevelViolation { index: i, value: r })
            }
        })
        .collect()
}

pub fn verify_certificate(config: &PointConfig, alpha: &[QuadExt]) -> Result<MinimalTypeCertificate, MinimalTypeError> {
    verify_certificate_with(config, alpha, None)
}

/// As [`verify_certificate`], reusing a design report when one is at hand.
pub fn verify_certificate_with(
    config: &PointConfig,
    alpha: &[QuadExt],
    report: Option<&DesignReport>,
) -> Result<MinimalTypeCertificate, MinimalTypeError> {
    let levels = levels_of(config, alpha)?;
    check_span(config, alpha)?;
    let d = config.dim();
    let alpha_norm2 = dot(alpha, alpha)?;
    let n1 = levels.iter().filter(|&&l| l != 0).count();
    let n0 = levels.len() - n1;
    let strength = match report {
        Some(r) => r.strength,
        None => design_strength(config, 5)?.strength,
    };
    if strength >= 5 {
        let expected = QuadExt::from_frac(d as i64 + 2, 3);
        if alpha_norm2 != expected {
            return Err(MinimalTypeError::AlphaNorm { found: alpha_norm2, expected });
        }
        let want = predicted_n1(d, config.len());
        if Rational::from_integer(BigInt::from(n1)) != want {
            return Err(MinimalTypeError::ClassSizeMismatch { found: n1, expected: want });
        }
    }
    Ok(MinimalTypeCertificate { alpha: alpha.to_vec(), alpha_norm2, n0, n1, levels })
}

/// Stored certificates for the catalog entries that are of minimal type.
pub fn shipped_alpha(name: &str) -> Option<Point> {
    let r = |p, q| QuadExt::from_frac(p, q);
    let s2 = QuadExt::sqrt_int(2);
    let scaled = |s: &QuadExt, v: &[(i64, i64)]| v.iter().map(|&(p, q)| s * &r(p, q)).collect::<Point>();
    match name {
        "hexagon" => Some(vec![QuadExt::one(), QuadExt::new(rat(0, 1), rat(1, 3), 3)]),
        "d4_min" => Some(scaled(&s2, &[(1, 1), (0, 1), (0, 1), (0, 1)])),
        "e6_min" => Some(scaled(&s2, &[(1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (1, 3), (1, 3), (1, 3)])),
        "e7_min" => Some(scaled(&s2, &[(3, 4), (3, 4), (-1, 4), (-1, 4), (-1, 4), (-1, 4), (-1, 4), (-1, 4)])),
        "etf_7_28_design" => {
            let s = QuadExt::new(rat(0, 1), rat(1, 4), 6);
            Some(scaled(&s, &[(1, 1), (1, 1), (1, 1), (1, 1), (-1, 1), (-1, 1), (-1, 1), (-1, 1)]))
        }
        _ => None,
    }
}

/// Parses `alpha dim=<n>` followed by `n` scalars (any line layout).
pub fn parse_certificate(text: &str) -> Result<Point, ConfigError> {
    let all = lines(text);
    let Some((hline, _, htoks)) = all.first() else {
        return Err(parse_err(1, 1, "missing alpha header"));
    };
    if htoks[0].text != "alpha" {
        return Err(parse_err(*hline, htoks[0].column, "header must start with 'alpha'"));
    }
    let mut dim = None;
    for tok in &htoks[1..] {
        match tok.text.split_once('=') {
            Some(("dim", v)) => dim = Some(usize_at(tok, v, 4)?),
            _ => return Err(parse_err(tok.line, tok.column, format!("unexpected header token {:?}", tok.text))),
        }
    }
    let dim = dim.ok_or_else(|| parse_err(*hline, 1, "header is missing dim="))?;
    let toks: Vec<_> = all[1..].iter().flat_map(|(_, _, t)| t.iter().copied()).collect();
    if toks.len() != dim {
        let line = all.last().map_or(*hline, |l| l.0);
        return Err(parse_err(line, 1, format!("dim={dim} but {} scalars", toks.len())));
    }
    toks.iter().map(scalar_at).collect()
}

pub fn render_certificate(alpha: &[QuadExt]) -> String {
    let body: Vec<String> = alpha.iter().map(|c| c.to_string()).collect();
    format!("alpha dim={}\n{}\n", alpha.len(), body.join(" "))
}

pub fn load_certificate(path: impl AsRef<Path>) -> Result<Point, ConfigError> {
    parse_certificate(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------- search

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Shipped,
    Structured,
    ExhaustiveGrid { norm2_target: u32, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    Found(MinimalTypeCertificate),
    Refuted(Refutation),
    Unknown(SearchScope),
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

pub fn search_alpha(config: &PointConfig, strategy: Strategy) -> Result<SearchOutcome, MinimalTypeError> {
    let report = design_strength(config, 7)?;
    if let FilterOutcome::Refuted(r) = necessary_filters(config, &report)? {
        return Ok(SearchOutcome::Refuted(r));
    }
    search_with(config, &report, strategy)
}

fn search_with(config: &PointConfig, report: &DesignReport, strategy: Strategy) -> Result<SearchOutcome, MinimalTypeError> {
    match strategy {
        Strategy::Shipped => Ok(match shipped_alpha(config.label()) {
            Some(alpha) => SearchOutcome::Found(verify_certificate_with(config, &alpha, Some(report))?),
            None => SearchOutcome::Unknown(SearchScope {
                strategy: "shipped".into(),
                description: format!("no stored certificate for {:?}", config.label()),
                candidates: 0,
                examined: 0,
                outside_span: 0,
                unrepresentable: 0,
                blocks: 0,
                blocks_completed: 0,
                assumption: None,
            }),
        }),
        Strategy::Structured => structured_search(config, report),
        Strategy::ExhaustiveGrid { norm2_target, budget } => grid_search(config, report, norm2_target, budget),
    }
}

/// Candidates `x`, `x ± y` and coordinate axes, each rescaled to
/// `⟨α,α⟩ = (d+2)/3`.
fn structured_search(config: &PointConfig, report: &DesignReport) -> Result<SearchOutcome, MinimalTypeError> {
    let gram = config.gram()?;
    let d = config.dim() as i64;
    let vals = gram.values();
    let nv = vals.len();
    let dd = QuadExt::from_int(d + 2);
    let three = QuadExt::from_int(3);
    let n = config.len();

    // u = x_a: passes at z iff g(a,z)^2 (d+2) = 3 or g(a,z) = 0
    let single_ok: Vec<bool> = vals.iter().map(|g| g.is_zero() || &g.square() * &dd == three).collect();
    // u = x_a + s x_b with g(a,b) = g: |u|^2 = k(2 + 2sg), and at z
    // <u,z>^2 (d+2) = 3 |u|^2 k reads (g_az + s g_bz)^2 (d+2) = 3(2 + 2s g)
    let mut pair_ok = vec![vec![false; nv * nv * nv]; 2];
    for (si, s) in [1i64, -1].into_iter().enumerate() {
        let sq = QuadExt::from_int(s);
        for g in 0..nv {
            let rhs = &three * &(&QuadExt::from_int(2) + &(&QuadExt::from_int(2 * s) * &vals[g]));
            for i in 0..nv {
                for j in 0..nv {
                    let u = &vals[i] + &(&sq * &vals[j]);
                    pair_ok[si][(g * nv + i) * nv + j] = u.is_zero() || &u.square() * &dd == rhs;
                }
            }
        }
    }

    let mut cands: Vec<(usize, usize, i8)> = (0..n).map(|a| (a, a, 0)).collect();
    for a in 0..n {
        for b in a + 1..n {
            cands.push((a, b, 1));
            cands.push((a, b, -1));
        }
    }
    let passes = |&(a, b, s): &(usize, usize, i8)| -> bool {
        if s == 0 {
            return (0..n).all(|z| single_ok[gram.value_index(a, z)]);
        }
        let si = if s == 1 { 0 } else { 1 };
        let g = gram.value_index(a, b);
        // x_b = -s x_a gives u = 0
        if (s == 1 && vals[g] == -QuadExt::one()) || (s == -1 && vals[g].is_one()) {
            return false;
        }
        (0..n).all(|z| pair_ok[si][(g * nv + gram.value_index(a, z)) * nv + gram.value_index(b, z)])
    };
    let hits: Vec<(usize, usize, i8)> = cands.par_iter().filter(|c| passes(c)).copied().collect();

    let axes = config.ambient() == config.dim();
    let k = config.norm2();
    let mut axis_hits = Vec::new();
    if axes {
        for i in 0..config.ambient() {
            let ok = config.points().iter().all(|z| {
                let c = &z[i];
                c.is_zero() || matches!(c.square().checked_mul(&dd), Ok(v) if Ok(v.clone()) == three.checked_mul(k))
            });
            if ok {
                axis_hits.push(i);
            }
        }
    }

    let mut unrepresentable = 0u64;
    let target = QuadExt::from_frac(d + 2, 3);
    let mut build = |u: Point| -> Result<Option<MinimalTypeCertificate>, MinimalTypeError> {
        let uu = dot(&u, &u)?;
        let Some(lambda) = target.checked_div(&uu)?.sqrt() else {
            unrepresentable += 1;
            return Ok(None);
        };
        let alpha: Result<Point, NumError> = u.iter().map(|c| c.checked_mul(&lambda)).collect();
        let Ok(alpha) = alpha else {
            unrepresentable += 1;
            return Ok(None);
        };
        match verify_certificate_with(config, &alpha, Some(report)) {
            Ok(c) => Ok(Some(c)),
            Err(MinimalTypeError::Num(NumError::IncompatibleRadicands { .. })) => {
                unrepresentable += 1;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let pts = config.points();
    for &(a, b, s) in &hits {
        let u: Point = match s {
            0 => pts[a].clone(),
            1 => pts[a].iter().zip(&pts[b]).map(|(x, y)| x.checked_add(y)).collect::<Result<_, _>>()?,
            _ => pts[a].iter().zip(&pts[b]).map(|(x, y)| x.checked_sub(y)).collect::<Result<_, _>>()?,
        };
        if let Some(c) = build(u)? {
            return Ok(SearchOutcome::Found(c));
        }
    }
    for &i in &axis_hits {
        let mut u = vec![QuadExt::zero(); config.ambient()];
        u[i] = QuadExt::one();
        if let Some(c) = build(u)? {
            return Ok(SearchOutcome::Found(c));
        }
    }
    let candidates = (cands.len() + if axes { config.ambient() } else { 0 }) as u64;
    Ok(SearchOutcome::Unknown(SearchScope {
        strategy: "structured".into(),
        description: format!(
            "points x, x+y, x-y{} of {}",
            if axes { " and coordinate axes" } else { "" },
            config.label()
        ),
        candidates,
        examined: candidates,
        outside_span: 0,
        unrepresentable,
        blocks: 1,
        blocks_completed: 1,
        assumption: None,
    }))
}

/// All `w`-subsets of `0..n` in lexicographic order.
fn supports(n: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..w).collect();
    if w > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..w).rev().find(|&i| cur[i] < n - w + i) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..w {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

struct Block {
    examined: u64,
    outside_span: u64,
    found: Option<Vec<i64>>,
    completed: bool,
}

/// Every `α` with entries in `{0, ±1}` and `|α|² = norm2_target` in the
/// configuration's coordinates, tested as is (no rescaling).
fn grid_search(
    config: &PointConfig,
    report: &DesignReport,
    norm2_target: u32,
    budget: u64,
) -> Result<SearchOutcome, MinimalTypeError> {
    let amb = config.ambient();
    let wt = norm2_target as usize;
    let total = binomial(amb as i64, wt as i64) * (BigInt::from(1) << wt);
    let candidates = match total.to_u64() {
        Some(c) if c <= budget => c,
        _ => return Err(MinimalTypeError::ScopeTooLarge { candidates: total, budget }),
    };
    let model = config.integer_model().ok_or(MinimalTypeError::GridNeedsRationalFrame)?;
    let complement = config.span_complement()?;
    let mut comp_rows: Vec<Vec<i64>> = Vec::new();
    for c in &complement {
        let mut lcm = BigInt::from(1);
        for x in c {
            let r = x.as_rational().ok_or(MinimalTypeError::GridNeedsRationalFrame)?;
            lcm = num_integer::Integer::lcm(&lcm, r.denom());
        }
        let row: Option<Vec<i64>> =
            c.iter().map(|x| (x.as_rational().unwrap().numer() * &lcm / x.as_rational().unwrap().denom()).to_i64()).collect();
        comp_rows.push(row.ok_or(MinimalTypeError::GridNeedsRationalFrame)?);
    }
    // dense points first: coordinate-frame points pass for every candidate
    let mut order: Vec<usize> = (0..config.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(model.rows[i].iter().filter(|&&x| x != 0).count()));
    let rows: Vec<&[i64]> = order.iter().map(|&i| model.rows[i].as_slice()).collect();
    let k = model.norm2;

    let sups = supports(amb, wt);
    let stop = AtomicBool::new(false);
    let blocks: Vec<Block> = sups
        .par_iter()
        .map(|sup| {
            let mut b = Block { examined: 0, outside_span: 0, found: None, completed: false };
            if stop.load(Ordering::Relaxed) {
                return b;
            }
            // u and -u behave identically, so the first sign is fixed at +1
            for mask in 0..(1u32 << wt.saturating_sub(1)) {
                let sign = |t: usize| if t == 0 || mask >> (t - 1) & 1 == 0 { 1i64 } else { -1 };
                let sdot = |r: &[i64]| -> i128 { sup.iter().enumerate().map(|(t, &c)| (sign(t) * r[c]) as i128).sum() };
                if comp_rows.iter().any(|r| sdot(r) != 0) {
                    b.outside_span += 2;
                    continue;
                }
                b.examined += 2;
                if rows.iter().all(|r| {
                    let v = sdot(r);
                    v == 0 || v * v == k
                }) {
                    let mut u = vec![0i64; amb];
                    for (t, &c) in sup.iter().enumerate() {
                        u[c] = sign(t);
                    }
                    b.found = Some(u);
                    stop.store(true, Ordering::Relaxed);
                    return b;
                }
            }
            if wt == 0 {
                b.examined = 1;
            }
            b.completed = true;
            b
        })
        .collect();

    if let Some(u) = blocks.iter().find_map(|b| b.found.clone()) {
        let alpha: Point = u.iter().map(|&x| QuadExt::from_int(x)).collect();
        return Ok(SearchOutcome::Found(verify_certificate_with(config, &alpha, Some(report))?));
    }
    let scope = SearchScope {
        strategy: "exhaustive-grid".into(),
        description: format!("alpha in {{0,+1,-1}}^{amb} with |alpha|^2 = {norm2_target} in the frame of {}", config.label()),
        candidates,
        examined: blocks.iter().map(|b| b.examined).sum(),
        outside_span: blocks.iter().map(|b| b.outside_span).sum(),
        unrepresentable: 0,
        blocks: sups.len() as u64,
        blocks_completed: blocks.iter().filter(|b| b.completed).count() as u64,
        assumption: Some("a minimal-type alpha has entries in {0,+1,-1} in this frame".into()),
    };
    if !scope.complete() {
        return Ok(SearchOutcome::Unknown(scope));
    }
    Ok(SearchOutcome::Refuted(Refutation {
        kind: RefutationKind::ExhaustiveSearchEmpty,
        detail: vec![w("candidates", candidates), w("norm2", norm2_target)],
        scope: Some(scope),
    }))
}

// ---------------------------------------------------------------- pipeline

#[derive(Debug, Clone, Default)]
pub struct CertifyOptions {
    /// Tried before the stored certificate.
    pub certificate: Option<Point>,
    pub skip_structured: bool,
    pub grid: Option<(u32, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageLog {
    pub stage: String,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifyReport {
    pub label: String,
    pub dim: usize,
    pub size: usize,
    pub strength: String,
    pub tight: bool,
    pub filters: FilterOutcome,
    pub stages: Vec<StageLog>,
    pub verdict: SearchOutcome,
}

impl CertifyReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            SearchOutcome::Found(_) => 0,
            SearchOutcome::Refuted(_) => 1,
            SearchOutcome::Unknown(_) => 2,
        }
    }
}

/// Filters, then a user certificate, the stored certificate, structured
/// search and (when requested) the exhaustive grid.
pub fn certify(config: &PointConfig, opts: &CertifyOptions) -> Result<CertifyReport, MinimalTypeError> {
    let report = design_strength(config, 7)?;
    let filters = necessary_filters(config, &report)?;
    let mut stages = vec![StageLog {
        stage: "filters".into(),
        result: match &filters {
            FilterOutcome::Pass(p) if p.notes.is_empty() => "pass".into(),
            FilterOutcome::Pass(p) => format!("pass ({})", p.notes.join("; ")),
            FilterOutcome::Refuted(r) => format!("refuted: {r}"),
        },
    }];
    let finish = |filters, stages, verdict| CertifyReport {
        label: config.label().to_string(),
        dim: config.dim(),
        size: config.len(),
        strength: report.strength_text(),
        tight: report.tight,
        filters,
        stages,
        verdict,
    };
    if let FilterOutcome::Refuted(r) = &filters {
        let r = r.clone();
        return Ok(finish(filters, stages, SearchOutcome::Refuted(r)));
    }
    if let Some(alpha) = &opts.certificate {
        match verify_certificate_with(config, alpha, Some(&report)) {
            Ok(c) => {
                stages.push(StageLog { stage: "certificate".into(), result: "verified".into() });
                return Ok(finish(filters, stages, SearchOutcome::Found(c)));
            }
            Err(e @ (MinimalTypeError::LevelViolation { .. }
            | MinimalTypeError::AlphaNorm { .. }
            | MinimalTypeError::AlphaOutsideSpan
            | MinimalTypeError::ClassSizeMismatch { .. })) => {
                stages.push(StageLog { stage: "certificate".into(), result: format!("rejected: {e}") })
            }
            Err(e) => return Err(e),
        }
    }
    let mut last_scope = None;
    let mut plan = vec![Strategy::Shipped];
    if !opts.skip_structured {
        plan.push(Strategy::Structured);
    }
    if let Some((norm2_target, budget)) = opts.grid {
        plan.push(Strategy::ExhaustiveGrid { norm2_target, budget });
    }
    for strategy in plan {
        let name = match strategy {
            Strategy::Shipped => "shipped",
            Strategy::Structured => "structured",
            Strategy::ExhaustiveGrid { .. } => "exhaustive-grid",
        };
        match search_with(config, &report, strategy)? {
            SearchOutcome::Found(c) => {
                stages.push(StageLog { stage: name.into(), result: "found".into() });
                return Ok(finish(filters, stages, SearchOutcome::Found(c)));
            }
            SearchOutcome::Refuted(r) => {
                stages.push(StageLog { stage: name.into(), result: format!("refuted: {r}") });
                return Ok(finish(filters, stages, SearchOutcome::Refuted(r)));
            }
            SearchOutcome::Unknown(s) => {
                stages.push(StageLog { stage: name.into(), result: format!("nothing found in {s}") });
                last_scope = Some(s);
            }
        }
    }
    let scope = last_scope.expect("shipped stage always runs");
    Ok(finish(filters, stages, SearchOutcome::Unknown(scope)))
}
