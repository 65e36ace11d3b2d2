//! Derived codes: the points of a design sorted by their inner product with a
//! functional `α`, each level re-projected onto the unit sphere of `α^⊥`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::configs::{dot, ConfigError, Fibered, GramData, Point, PointConfig};
use crate::design::{design_strength_gram, DesignError, DesignReport};
use crate::exactnum::{NumError, QuadExt};
use crate::gegenbauer::DEFAULT_DEGREE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeriveMode {
    /// Thm-2.3 style: any `α` with `±α/|α|` outside the design.
    UnitSphere,
    /// Levels restricted to `{0, ±1}` at unit scale, `⟨α,α⟩ = (d+2)/3`.
    MinimalType,
}

#[derive(Debug, Error)]
pub enum DerivedError {
    #[error("point {index}: level value {value} is outside the allowed set")]
    LevelValueOutOfRange { index: usize, value: QuadExt },
    #[error("alpha is parallel to point {index}")]
    AlphaInD { index: usize },
    #[error("level {beta} cannot be normalized (1 - 3 beta^2/(d+2) <= 0)")]
    NormalizationSingular { beta: QuadExt },
    #[error("<alpha,alpha> = {found}, expected {expected}")]
    AlphaNorm { found: QuadExt, expected: QuadExt },
    #[error("alpha has a component outside the span of the configuration")]
    AlphaOutsideSpan,
    #[error("derived angle needs sqrt({0}), which leaves the supported fields")]
    NotRepresentable(QuadExt),
    #[error("level {beta}: strength {strength} is below the guaranteed {required}")]
    StrengthShortfall { beta: String, strength: usize, required: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedLevel {
    /// `⟨α, x⟩` in the configuration's native scale.
    pub value: QuadExt,
    /// Level label: `β ∈ {0, ±1}` in minimal-type mode, the unit-sphere
    /// cosine `⟨α,x⟩/(|α|√k)` otherwise (`None` if it needs a second radical).
    pub beta: Option<QuadExt>,
    /// Indices into the source configuration.
    pub indices: Vec<usize>,
    /// Projected coordinates, when they fit in a single quadratic field.
    pub coords: Option<PointConfig>,
}

impl DerivedLevel {
    pub fn label(&self) -> String {
        self.beta.as_ref().unwrap_or(&self.value).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedFamily {
    pub mode: DeriveMode,
    pub alpha: Point,
    pub source_dim: usize,
    /// Levels in decreasing order of `⟨α, x⟩`.
    pub levels: Vec<DerivedLevel>,
    /// Joint Gram of all levels on `S^{d-2}`, fibered by level.
    pub joint: Fibered,
}

impl DerivedFamily {
    pub fn level_gram(&self, i: usize) -> GramData {
        self.joint.fiber_gram(i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.indices.len()).collect()
    }

    pub fn level(&self, beta: &QuadExt) -> Option<&DerivedLevel> {
        self.levels.iter().find(|l| l.beta.as_ref() == Some(beta))
    }

    /// Position `p` in the joint Gram of source index `i`.
    pub fn joint_position(&self) -> HashMap<usize, usize> {
        self.levels.iter().flat_map(|l| l.indices.iter().copied()).enumerate().map(|(p, i)| (i, p)).collect()
    }
}

/// `(γ − β_i β_j) / √((1 − β_i²)(1 − β_j²))` for unit-sphere level values.
pub fn derived_angle_map(beta_i: &QuadExt, beta_j: &QuadExt, gamma: &QuadExt) -> Result<QuadExt, DerivedError> {
    let one = QuadExt::one();
    let prod = beta_i.checked_mul(beta_j)?;
    let den = one.checked_sub(&beta_i.square())?.checked_mul(&one.checked_sub(&beta_j.square())?)?;
    angle_from_parts(gamma, &prod, &den)
}

fn angle_from_parts(gamma: &QuadExt, prod: &QuadExt, den: &QuadExt) -> Result<QuadExt, DerivedError> {
    if den.is_zero() {
        return Err(NumError::DivisionByZero.into());
    }
    let root = den.sqrt().ok_or_else(|| DerivedError::NotRepresentable(den.clone()))?;
    Ok(gamma.checked_sub(prod)?.checked_div(&root)?)
}

pub fn derive(config: &PointConfig, alpha: &[QuadExt], mode: DeriveMode) -> Result<DerivedFamily, DerivedError> {
    derive_with_gram(config, &config.gram()?, alpha, mode)
}

/// As [`derive`], reusing a precomputed Gram of `config`.
pub fn derive_with_gram(
    config: &PointConfig,
    gram: &GramData,
    alpha: &[QuadExt],
    mode: DeriveMode,
) -> Result<DerivedFamily, DerivedError> {
    if alpha.len() != config.ambient() {
        return Err(NumError::Dimension(format!("alpha has {} coordinates, expected {}", alpha.len(), config.ambient())).into());
    }
    for n in config.span_complement()? {
        if !dot(&n, alpha)?.is_zero() {
            return Err(DerivedError::AlphaOutsideSpan);
        }
    }
    let d = config.dim();
    let k = config.norm2();
    let aa = dot(alpha, alpha)?;
    let big_n = aa.checked_mul(k)?;
    let values: Vec<QuadExt> = config.points().iter().map(|x| dot(alpha, x)).collect::<Result<_, _>>()?;

    let c = QuadExt::from_frac(3, d as i64 + 2);
    match mode {
        DeriveMode::MinimalType => {
            if aa != c.checked_recip()? {
                return Err(DerivedError::AlphaNorm { found: aa, expected: c.checked_recip()? });
            }
            for (i, v) in values.iter().enumerate() {
                let r = v.square().checked_div(k)?;
                if !(r.is_zero() || r.is_one()) {
                    return Err(DerivedError::LevelValueOutOfRange { index: i, value: r });
                }
            }
            if QuadExt::one().checked_sub(&c)?.signum() <= 0 {
                return Err(DerivedError::NormalizationSingular { beta: QuadExt::one() });
            }
        }
        DeriveMode::UnitSphere => {
            for (i, v) in values.iter().enumerate() {
                if v.square() >= big_n {
                    return Err(DerivedError::AlphaInD { index: i });
                }
            }
        }
    }

    let mut groups: BTreeMap<std::cmp::Reverse<QuadExt>, Vec<usize>> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        groups.entry(std::cmp::Reverse(v.clone())).or_default().push(i);
    }
    let sqrt_k = k.sqrt();
    let levels: Vec<DerivedLevel> = groups
        .into_iter()
        .map(|(std::cmp::Reverse(value), indices)| {
            let beta = match mode {
                DeriveMode::MinimalType => QuadExt::from_int(value.signum() as i64),
                DeriveMode::UnitSphere => {
                    let sq = value.square().checked_div(&big_n)?;
                    match sq.sqrt() {
                        Some(r) if value.signum() < 0 => -r,
                        Some(r) => r,
                        None => return Ok((value, None, indices)),
                    }
                }
            };
            Ok((value, Some(beta), indices))
        })
        .collect::<Result<Vec<_>, DerivedError>>()?
        .into_iter()
        .map(|(value, beta, indices)| {
            let coords = level_coords(config, alpha, &aa, &value, beta.as_ref(), sqrt_k.as_ref(), &c, mode, &indices);
            DerivedLevel { value, beta, indices, coords }
        })
        .collect();

    // joint gram: entry (γ − a_p a_q / N) / √((1 − a_p²/N)(1 − a_q²/N))
    let one = QuadExt::one();
    let unit_parts: Vec<(QuadExt, QuadExt)> = levels
        .iter()
        .map(|l| {
            let sq = l.value.square().checked_div(&big_n)?;
            Ok((l.value.clone(), one.checked_sub(&sq)?))
        })
        .collect::<Result<_, DerivedError>>()?;
    let order: Vec<(usize, usize)> =
        levels.iter().enumerate().flat_map(|(p, l)| l.indices.iter().map(move |&i| (p, i))).collect();
    let mut memo: HashMap<(usize, usize, usize), QuadExt> = HashMap::new();
    let mut matrix = vec![vec![QuadExt::zero(); order.len()]; order.len()];
    for (r, &(p, i)) in order.iter().enumerate() {
        for (s, &(q, j)) in order.iter().enumerate().skip(r) {
            let gi = gram.value_index(i, j);
            let v = match memo.get(&(p, q, gi)) {
                Some(v) => v.clone(),
                None => {
                    let prod = unit_parts[p].0.checked_mul(&unit_parts[q].0)?.checked_div(&big_n)?;
                    let den = unit_parts[p].1.checked_mul(&unit_parts[q].1)?;
                    let v = angle_from_parts(gram.entry(i, j), &prod, &den)?;
                    memo.insert((p, q, gi), v.clone());
                    v
                }
            };
            matrix[s][r] = v.clone();
            matrix[r][s] = v;
        }
    }
    let sizes: Vec<usize> = levels.iter().map(|l| l.indices.len()).collect();
    let joint = Fibered::new(GramData::from_matrix(d - 1, matrix)?, &sizes)?;
    Ok(DerivedFamily { mode, alpha: alpha.to_vec(), source_dim: d, levels, joint })
}

#[allow(clippy::too_many_arguments)]
fn level_coords(
    config: &PointConfig,
    alpha: &[QuadExt],
    aa: &QuadExt,
    value: &QuadExt,
    beta: Option<&QuadExt>,
    sqrt_k: Option<&QuadExt>,
    c: &QuadExt,
    mode: DeriveMode,
    indices: &[usize],
) -> Option<PointConfig> {
    // shift = coefficient of α removed from each point of the level
    let shift = match mode {
        DeriveMode::MinimalType => c.checked_mul(beta?).ok()?.checked_mul(sqrt_k?).ok()?,
        DeriveMode::UnitSphere => value.checked_div(aa).ok()?,
    };
    let step: Vec<QuadExt> = alpha.iter().map(|a| a.checked_mul(&shift)).collect::<Result<_, _>>().ok()?;
    let pts: Vec<Point> = indices
        .iter()
        .map(|&i| config.points()[i].iter().zip(&step).map(|(x, s)| x.checked_sub(s)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()
        .ok()?;
    let label = format!("{}[{}]", config.label(), beta.unwrap_or(value));
    PointConfig::from_points(pts, label).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelStrength {
    pub beta: String,
    pub size: usize,
    pub strength: usize,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedStrengthReport {
    pub design_strength: usize,
    pub levels_count: usize,
    /// `t + 1 − s`
    pub required: usize,
    pub levels: Vec<LevelStrength>,
}

/// Each level must be a `(t + 1 − s)`-design on `S^{d-2}`, with `s` the number
/// of realized levels.
pub fn verify_derived_strength(
    family: &DerivedFamily,
    report: &DesignReport,
) -> Result<DerivedStrengthReport, DerivedError> {
    let s = family.levels.len();
    let required = (report.strength + 1).saturating_sub(s);
    let t_max = required.clamp(1, DEFAULT_DEGREE_CAP);
    let mut levels = Vec::new();
    for (i, l) in family.levels.iter().enumerate() {
        let r = design_strength_gram(&family.level_gram(i), t_max)?;
        if r.strength < required {
            return Err(DerivedError::StrengthShortfall { beta: l.label(), strength: r.strength, required });
        }
        levels.push(LevelStrength { beta: l.label(), size: l.indices.len(), strength: r.strength, saturated: r.saturated });
    }
    Ok(DerivedStrengthReport { design_strength: report.strength, levels_count: s, required, levels })
}
