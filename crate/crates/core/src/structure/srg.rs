use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::configs::GramData;
use crate::design::design_strength_gram;
use crate::exactnum::{rat, QuadExt, Rational};

use super::StructureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SrgParams {
    pub n: u64,
    pub k_val: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl SrgParams {
    /// `k(k − λ − 1) = (n − k − 1) μ`.
    pub fn feasible(&self) -> bool {
        let (n, k, l, m) = (self.n as i128, self.k_val as i128, self.lambda as i128, self.mu as i128);
        k * (k - l - 1) == (n - k - 1) * m
    }
}

impl fmt::Display for SrgParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "srg({},{},{},{})", self.n, self.k_val, self.lambda, self.mu)
    }
}

fn to_u64(name: &str, r: &Rational) -> Result<u64, StructureError> {
    if !r.is_integer() {
        return Err(StructureError::NonIntegral(format!("{name} = {r}")));
    }
    r.to_integer().to_u64().ok_or_else(|| StructureError::NonIntegral(format!("{name} = {r} is negative")))
}

fn quad_to_u64(name: &str, v: &QuadExt) -> Result<u64, StructureError> {
    match v.as_rational() {
        Some(r) => to_u64(name, r),
        None => Err(StructureError::NonIntegral(format!("{name} = {v}"))),
    }
}

/// Parameters of the graph family attached to `d = k² − 2`.
pub fn srg_family_params(k: i64) -> Result<SrgParams, StructureError> {
    if k < 3 || k % 2 == 0 {
        return Err(StructureError::InvalidK(k));
    }
    let k2 = k * k;
    Ok(SrgParams {
        n: to_u64("n", &rat(k2 * (k2 - 1), 6))?,
        k_val: to_u64("k", &rat((k - 1) * (k - 2) * (k2 - 3), 12))?,
        lambda: to_u64("lambda", &rat((k + 2) * (k - 1) * (k - 3) * (k - 5), 24))?,
        mu: to_u64("mu", &rat((k2 - 1) * (k - 2) * (k - 3), 24))?,
    })
}

/// `(n_a, λ, μ)` of the graph "inner product = a" on a two-distance tight
/// frame of `n` vectors in `R^l` with angles `a, b`.
pub fn srg_formula(n: usize, l: usize, a: &QuadExt, b: &QuadExt) -> Result<(QuadExt, QuadExt, QuadExt), StructureError> {
    let q = |v: i64| QuadExt::from_int(v);
    let nl = QuadExt::from_frac(n as i64, l as i64);
    let b2 = b.square();
    let na = nl.checked_sub(&q(1))?.checked_sub(&q(n as i64 - 1).checked_mul(&b2)?)?.checked_div(&a.square().checked_sub(&b2)?)?;
    let ab = a.checked_mul(b)?;
    let lam_num = nl
        .checked_sub(&q(2))?
        .checked_mul(a)?
        .checked_sub(&q(2).checked_mul(&na.checked_sub(&q(1))?)?.checked_mul(&ab)?)?
        .checked_sub(&q(n as i64).checked_sub(&q(2).checked_mul(&na)?)?.checked_mul(&b2)?)?;
    let lambda = lam_num.checked_div(&a.checked_sub(b)?.square())?;
    let mu = na
        .checked_mul(&na.checked_sub(&lambda)?.checked_sub(&q(1))?)?
        .checked_div(&q(n as i64).checked_sub(&na)?.checked_sub(&q(1))?)?;
    Ok((na, lambda, mu))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SrgReport {
    pub adjacency_angle: QuadExt,
    pub other_angle: QuadExt,
    pub formula: SrgParams,
    pub counted: SrgParams,
}

pub fn srg_from_two_distance(gram: &GramData, adjacency_angle: &QuadExt) -> Result<SrgReport, StructureError> {
    let angles = gram.angles();
    let listed = || angles.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
    if angles.len() != 2 || !angles.contains(adjacency_angle) || angles[0].square() == angles[1].square() {
        return Err(StructureError::NotTwoDistance(listed()));
    }
    let other = angles.iter().find(|a| *a != adjacency_angle).unwrap().clone();
    let report = design_strength_gram(gram, 2)?;
    if report.strength < 2 {
        let s2 = report.sum(2).or(report.sum(1)).cloned().unwrap_or_else(QuadExt::zero);
        return Err(StructureError::NotTightFrame(s2));
    }
    let n = gram.size();
    let (na, lambda, mu) = srg_formula(n, gram.dim(), adjacency_angle, &other)?;
    let formula = SrgParams {
        n: n as u64,
        k_val: quad_to_u64("n_a", &na)?,
        lambda: quad_to_u64("lambda", &lambda)?,
        mu: quad_to_u64("mu", &mu)?,
    };

    let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && gram.entry(i, j) == adjacency_angle).collect()).collect();
    let degrees: Vec<u64> = adj.iter().map(|r| r.iter().filter(|&&b| b).count() as u64).collect();
    let mut lambdas = Vec::new();
    let mut mus = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let common = (0..n).filter(|&z| adj[i][z] && adj[z][j]).count() as u64;
            if adj[i][j] {
                lambdas.push(common);
            } else {
                mus.push(common);
            }
        }
    }
    let constant = |v: &[u64]| v.windows(2).all(|w| w[0] == w[1]);
    let counted = SrgParams {
        n: n as u64,
        k_val: degrees[0],
        lambda: lambdas.first().copied().unwrap_or(0),
        mu: mus.first().copied().unwrap_or(0),
    };
    if !constant(&degrees) || !constant(&lambdas) || !constant(&mus) || counted != formula {
        return Err(StructureError::ParameterMismatch {
            formula: formula.to_string(),
            counted: format!(
                "degrees {:?}, lambda {:?}, mu {:?}",
                dedup(&degrees),
                dedup(&lambdas),
                dedup(&mus)
            ),
        });
    }
    Ok(SrgReport { adjacency_angle: adjacency_angle.clone(), other_angle: other, formula, counted })
}

fn dedup(v: &[u64]) -> Vec<u64> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{antipodal_split, catalog};

    #[test]
    fn family_values() {
        let p = |n, k, l, m| SrgParams { n, k_val: k, lambda: l, mu: m };
        assert_eq!(srg_family_params(3).unwrap(), p(12, 1, 0, 0));
        assert_eq!(srg_family_params(5).unwrap(), p(100, 22, 0, 6));
        assert_eq!(srg_family_params(7).unwrap(), p(392, 115, 18, 40));
        assert_eq!(srg_family_params(9).unwrap(), p(1080, 364, 88, 140));
        assert!(matches!(srg_family_params(4), Err(StructureError::InvalidK(4))));
        assert!(matches!(srg_family_params(1), Err(StructureError::InvalidK(1))));
    }

    #[test]
    fn family_is_feasible_and_matches_the_frame_formula() {
        for k in (3..60).step_by(2) {
            let p = srg_family_params(k).unwrap();
            assert!(p.feasible(), "k = {k}");
            // X_1 of the decomposition: n = (d+1)(d+2)/6 vectors in R^{d-1}
            let d = k * k - 2;
            let a = QuadExt::from_frac(-k - 3, d - 1);
            let b = QuadExt::from_frac(k - 3, d - 1);
            let n = ((d + 1) * (d + 2) / 6) as usize;
            let (na, l, m) = srg_formula(n, (d - 1) as usize, &a, &b).unwrap();
            assert_eq!(p.n, n as u64);
            assert_eq!((na, l, m), (QuadExt::from_int(p.k_val as i64), QuadExt::from_int(p.lambda as i64), QuadExt::from_int(p.mu as i64)), "k = {k}");
        }
    }

    #[test]
    fn hexagon_triangle_is_not_two_distance() {
        let (half, _) = antipodal_split(&catalog("hexagon").unwrap()).unwrap();
        let g = half.gram().unwrap();
        assert!(matches!(srg_from_two_distance(&g, &QuadExt::from_frac(1, 2)), Err(StructureError::NotTwoDistance(_))));
    }

    #[test]
    fn equal_squares_are_rejected() {
        // the six icosahedron diagonals have angles ±1/√5
        let (half, _) = antipodal_split(&catalog("icosahedron").unwrap()).unwrap();
        let g = half.gram().unwrap();
        let a = QuadExt::sqrt_int(5) / QuadExt::from_int(5);
        assert!(matches!(srg_from_two_distance(&g, &a), Err(StructureError::NotTwoDistance(_))));
    }
}
