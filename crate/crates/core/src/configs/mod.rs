//! Exact point configurations on a sphere `S^{d-1}(k)`.

mod catalog;
mod gram;
pub(crate) mod io;
mod nr;

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::exactnum::{nullspace, rank, NumError, QuadExt};

pub use catalog::{catalog, CATALOG_NAMES};
pub use gram::{Fibered, GramData};
pub use io::{load_config, parse_config, render_config, save_config};
pub use nr::{nordstrom_robinson, BinaryCode};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown catalog name {0:?}")]
    UnknownCatalogName(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("self-test failed: {0}")]
    SelfTestFailed(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Point = Vec<QuadExt>;

/// Points of common squared norm `norm2` spanning a `dim`-dimensional
/// subspace of `Q(√n)^ambient`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointConfig {
    dim: usize,
    ambient: usize,
    points: Vec<Point>,
    norm2: QuadExt,
    label: String,
}

pub fn dot(a: &[QuadExt], b: &[QuadExt]) -> Result<QuadExt, NumError> {
    let mut acc = QuadExt::zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = acc.checked_add(&x.checked_mul(y)?)?;
    }
    Ok(acc)
}

impl PointConfig {
    /// Validates every invariant: nonempty, consistent lengths, a single
    /// radicand, common norm, no duplicates and span rank equal to `dim`.
    pub fn new(
        dim: usize,
        ambient: Option<usize>,
        points: Vec<Point>,
        norm2: QuadExt,
        label: impl Into<String>,
    ) -> Result<Self, ConfigError> {
        let ambient = ambient.unwrap_or(dim);
        let bad = |m: String| Err(ConfigError::InvariantViolation(m));
        if dim == 0 || ambient < dim {
            return bad(format!("dim {dim} with ambient {ambient}"));
        }
        if points.is_empty() {
            return bad("no points".into());
        }
        if let Some(i) = points.iter().position(|p| p.len() != ambient) {
            return bad(format!("point {} has {} coordinates, expected {ambient}", i + 1, points[i].len()));
        }
        let mut radicand = norm2.radicand();
        for c in points.iter().flatten() {
            match (radicand, c.radicand()) {
                (_, 0) => {}
                (0, r) => radicand = r,
                (a, b) if a != b => {
                    return Err(NumError::IncompatibleRadicands { left: a, right: b }.into());
                }
                _ => {}
            }
        }
        if norm2.signum() <= 0 {
            return bad(format!("norm2 {norm2} is not positive"));
        }
        for (i, p) in points.iter().enumerate() {
            let n = dot(p, p)?;
            if n != norm2 {
                return bad(format!("point {} has squared norm {n}, expected {norm2}", i + 1));
            }
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !seen.insert(p) {
                return bad(format!("duplicate point {}", i + 1));
            }
        }
        let r = rank(&points)?;
        if r != dim {
            return bad(format!("points span rank {r}, declared dim {dim}"));
        }
        Ok(PointConfig { dim, ambient, points, norm2, label: label.into() })
    }

    /// Builds a configuration whose norm and span are read off the points.
    pub fn from_points(points: Vec<Point>, label: impl Into<String>) -> Result<Self, ConfigError> {
        let first = points.first().ok_or_else(|| ConfigError::InvariantViolation("no points".into()))?;
        let norm2 = dot(first, first)?;
        let ambient = first.len();
        let dim = rank(&points)?;
        Self::new(dim, Some(ambient), points, norm2, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norm2(&self) -> &QuadExt {
        &self.norm2
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Radicand shared by the coordinates and norm (0 if all rational).
    pub fn radicand(&self) -> u64 {
        std::iter::once(&self.norm2)
            .chain(self.points.iter().flatten())
            .map(QuadExt::radicand)
            .find(|&r| r != 0)
            .unwrap_or(0)
    }

    pub fn subset(&self, indices: &[usize], label: impl Into<String>) -> Result<Self, ConfigError> {
        let pts: Vec<Point> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let dim = rank(&pts)?;
        Self::new(dim, Some(self.ambient), pts, self.norm2.clone(), label)
    }

    pub fn negated(&self) -> Self {
        PointConfig {
            points: self.points.iter().map(|p| p.iter().map(|c| -c).collect()).collect(),
            label: format!("-{}", self.label),
            ..self.clone()
        }
    }

    pub fn gram(&self) -> Result<GramData, ConfigError> {
        GramData::from_config(self)
    }

    /// Basis of the orthogonal complement of the span inside the ambient
    /// space; empty when `ambient == dim`.
    pub fn span_complement(&self) -> Result<Vec<Point>, NumError> {
        if self.ambient == self.dim {
            return Ok(Vec::new());
        }
        nullspace(&self.points)
    }

    /// Coordinates scaled to integers by a common factor `L`, together with
    /// `L² · norm2`. `None` unless every coordinate is rational and the
    /// scaled values fit comfortably in `i64`.
    pub fn integer_model(&self) -> Option<IntegerModel> {
        let mut lcm = BigInt::one();
        for c in self.points.iter().flatten() {
            lcm = lcm.lcm(c.as_rational()?.denom());
        }
        let mut rows = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let mut row = Vec::with_capacity(p.len());
            for c in p {
                let r = c.as_rational()?;
                let v = (r.numer() * &lcm / r.denom()).to_i64()?;
                if v.unsigned_abs() > 1 << 30 {
                    return None;
                }
                row.push(v);
            }
            rows.push(row);
        }
        let norm2 = rows[0].iter().map(|&x| x as i128 * x as i128).sum();
        Some(IntegerModel { scale: lcm, rows, norm2 })
    }

    /// `(index, index of −x)` for every point, if the set is antipodal.
    pub fn antipode_map(&self) -> Option<Vec<usize>> {
        let pos: HashMap<&Point, usize> = self.points.iter().enumerate().map(|(i, p)| (p, i)).collect();
        self.points
            .iter()
            .map(|p| {
                let neg: Point = p.iter().map(|c| -c).collect();
                pos.get(&neg).copied()
            })
            .collect()
    }

    pub fn is_antipodal(&self) -> bool {
        self.antipode_map().is_some()
    }
}

#[derive(Debug, Clone)]
pub struct IntegerModel {
    pub scale: BigInt,
    pub rows: Vec<Vec<i64>>,
    pub norm2: i128,
}

impl IntegerModel {
    pub fn dot(&self, i: usize, j: usize) -> i128 {
        dot_i64(&self.rows[i], &self.rows[j])
    }
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// One representative per antipodal pair (the first in list order) and a
/// flag telling whether the configuration is antipodal at all.
pub fn antipodal_split(config: &PointConfig) -> Result<(PointConfig, bool), ConfigError> {
    let Some(map) = config.antipode_map() else {
        return Ok((config.clone(), false));
    };
    let keep: Vec<usize> = (0..config.len()).filter(|&i| map[i] > i).collect();
    let half = config.subset(&keep, format!("{}/half", config.label))?;
    Ok((half, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[i64]]) -> Vec<Point> {
        rows.iter().map(|r| r.iter().map(|&x| QuadExt::from_int(x)).collect()).collect()
    }

    #[test]
    fn invariants_are_enforced() {
        let ok = PointConfig::new(2, None, pts(&[&[1, 0], &[0, 1]]), QuadExt::one(), "t");
        assert!(ok.is_ok());
        let bad_norm = PointConfig::new(2, None, pts(&[&[1, 0], &[1, 1]]), QuadExt::one(), "t");
        assert!(matches!(bad_norm, Err(ConfigError::InvariantViolation(_))));
        let dup = PointConfig::new(2, None, pts(&[&[1, 0], &[1, 0], &[0, 1]]), QuadExt::one(), "t");
        assert!(matches!(dup, Err(ConfigError::InvariantViolation(_))));
        let rank_short = PointConfig::new(2, None, pts(&[&[1, 0], &[-1, 0]]), QuadExt::one(), "t");
        assert!(matches!(rank_short, Err(ConfigError::InvariantViolation(_))));
        let empty = PointConfig::new(2, None, vec![], QuadExt::one(), "t");
        assert!(empty.is_err());
    }

    #[test]
    fn single_point_is_not_antipodal() {
        let c = PointConfig::new(1, None, pts(&[&[1]]), QuadExt::one(), "pt").unwrap();
        let (half, flag) = antipodal_split(&c).unwrap();
        assert!(!flag);
        assert_eq!(half, c);
    }

    #[test]
    fn span_complement_of_hyperplane_model() {
        let c = PointConfig::from_points(pts(&[&[1, -1, 0], &[0, 1, -1], &[-1, 0, 1]]), "a2").unwrap();
        assert_eq!(c.dim(), 2);
        let comp = c.span_complement().unwrap();
        assert_eq!(comp.len(), 1);
        assert!(comp[0].iter().all(|x| *x == comp[0][0]));
    }
}
