use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use num_bigint::BigInt;
use rayon::prelude::*;

use super::{dot, ConfigError, PointConfig};
use crate::exactnum::{QuadExt, Rational};

/// Normalized Gram matrix `⟨x,y⟩/k`, stored as an index matrix into the
/// sorted list of distinct values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramData {
    dim: usize,
    size: usize,
    values: Vec<QuadExt>,
    index: Vec<u16>,
}

impl GramData {
    pub fn from_config(config: &PointConfig) -> Result<Self, ConfigError> {
        let n = config.len();
        if let Some(model) = config.integer_model() {
            let raw: Vec<i128> = (0..n * n)
                .into_par_iter()
                .map(|ij| model.dot(ij / n, ij % n))
                .collect();
            let norm = BigInt::from(model.norm2);
            return Ok(Self::intern(config.dim(), n, raw, |v| {
                QuadExt::rational(Rational::new(BigInt::from(v), norm.clone()))
            }));
        }
        let inv = config.norm2().checked_recip()?;
        let pts = config.points();
        let rows: Result<Vec<Vec<QuadExt>>, _> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| dot(&pts[i], &pts[j])?.checked_mul(&inv)).collect())
            .collect();
        Self::from_matrix(config.dim(), rows?)
    }

    fn intern<K: std::hash::Hash + Eq + Copy>(
        dim: usize,
        size: usize,
        raw: Vec<K>,
        value: impl Fn(K) -> QuadExt,
    ) -> Self {
        let mut keys: HashMap<K, u16> = HashMap::new();
        let mut local = Vec::with_capacity(raw.len());
        for k in &raw {
            let next = keys.len() as u16;
            local.push(*keys.entry(*k).or_insert(next));
        }
        let mut vals: Vec<(QuadExt, u16)> = keys.into_iter().map(|(k, i)| (value(k), i)).collect();
        vals.sort();
        let mut remap = vec![0u16; vals.len()];
        for (pos, (_, old)) in vals.iter().enumerate() {
            remap[*old as usize] = pos as u16;
        }
        GramData {
            dim,
            size,
            values: vals.into_iter().map(|(v, _)| v).collect(),
            index: local.into_iter().map(|i| remap[i as usize]).collect(),
        }
    }

    /// Gram from explicit entries; must be square, symmetric with unit
    /// diagonal.
    pub fn from_matrix(dim: usize, m: Vec<Vec<QuadExt>>) -> Result<Self, ConfigError> {
        let n = m.len();
        let bad = |s: String| Err(ConfigError::InvariantViolation(s));
        if m.iter().any(|r| r.len() != n) {
            return bad("gram matrix is not square".into());
        }
        for i in 0..n {
            if !m[i][i].is_one() {
                return bad(format!("diagonal entry {i} is {}", m[i][i]));
            }
            for j in 0..i {
                if m[i][j] != m[j][i] {
                    return bad(format!("entries ({i},{j}) and ({j},{i}) differ"));
                }
            }
        }
        let mut values: Vec<QuadExt> = m.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        values.dedup();
        if values.len() > u16::MAX as usize {
            return bad("too many distinct gram values".into());
        }
        let pos: HashMap<&QuadExt, u16> = values.iter().enumerate().map(|(i, v)| (v, i as u16)).collect();
        let index = m.iter().flatten().map(|v| pos[v]).collect();
        Ok(GramData { dim, size: n, values, index })
    }

    /// Sphere dimension `d` (the points live on `S^{d-1}`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// All distinct entries, diagonal included, in increasing order.
    pub fn values(&self) -> &[QuadExt] {
        &self.values
    }

    pub fn value_index(&self, i: usize, j: usize) -> usize {
        self.index[i * self.size + j] as usize
    }

    pub fn entry(&self, i: usize, j: usize) -> &QuadExt {
        &self.values[self.value_index(i, j)]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.index[i * self.size + j] == self.index[j * self.size + i]))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.size).all(|i| self.entry(i, i).is_one())
    }

    /// The angle set: distinct off-diagonal values, sorted.
    pub fn angles(&self) -> Vec<QuadExt> {
        let mut seen = vec![false; self.values.len()];
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j {
                    seen[self.value_index(i, j)] = true;
                }
            }
        }
        self.values.iter().zip(seen).filter(|(_, s)| *s).map(|(v, _)| v.clone()).collect()
    }

    /// Number of ordered pairs (diagonal included) taking each value.
    pub fn distribution(&self) -> Vec<(QuadExt, u64)> {
        let mut counts = vec![0u64; self.values.len()];
        for &k in &self.index {
            counts[k as usize] += 1;
        }
        self.values.iter().cloned().zip(counts).filter(|(_, c)| *c > 0).collect()
    }

    /// Values `⟨x_i, z⟩` for `z` ranging over `targets`, with multiplicity.
    pub fn row_profile(&self, i: usize, targets: &[usize]) -> BTreeMap<QuadExt, u64> {
        let mut out = BTreeMap::new();
        for &j in targets {
            *out.entry(self.entry(i, j).clone()).or_insert(0) += 1;
        }
        out
    }

    pub fn sub(&self, indices: &[usize]) -> GramData {
        let raw: Vec<u16> = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.index[i * self.size + j])
            .collect();
        Self::intern(self.dim, indices.len(), raw, |k| self.values[k as usize].clone())
    }

    pub fn matrix(&self) -> Vec<Vec<QuadExt>> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.entry(i, j).clone()).collect()).collect()
    }
}

/// A Gram matrix over labelled points grouped into consecutive fibers.
/// Distinct labels may carry the same geometric point (off-diagonal 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fibered {
    pub gram: GramData,
    pub fibers: Vec<Range<usize>>,
}

impl Fibered {
    pub fn new(gram: GramData, sizes: &[usize]) -> Result<Self, ConfigError> {
        if sizes.iter().sum::<usize>() != gram.size() {
            return Err(ConfigError::InvariantViolation("fiber sizes do not cover the gram".into()));
        }
        let mut start = 0;
        let fibers = sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect();
        Ok(Fibered { gram, fibers })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fibers.iter().map(|r| r.len()).collect()
    }

    /// Realized values between fibers `a` and `b` (off-diagonal entries only
    /// when `a == b`).
    pub fn block_values(&self, a: usize, b: usize) -> Vec<QuadExt> {
        let mut set = BTreeSet::new();
        for i in self.fibers[a].clone() {
            for j in self.fibers[b].clone() {
                if i != j {
                    set.insert(self.gram.entry(i, j).clone());
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn fiber_gram(&self, a: usize) -> GramData {
        let idx: Vec<usize> = self.fibers[a].clone().collect();
        self.gram.sub(&idx)
    }
}
