//! Design strength, tightness, moment identities and valencies.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::configs::{dot, ConfigError, GramData, PointConfig};
use crate::exactnum::{binomial, int, solve, NumError, QuadExt, Rational};
use crate::gegenbauer::{gegenbauer_poly, DEFAULT_DEGREE_CAP};

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("degree {requested} exceeds the cap {cap}")]
    DegreeCapExceeded { requested: usize, cap: usize },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("valency at angle {angle} solves to {value}, not a non-negative integer")]
    NonIntegralSolution { angle: QuadExt, value: QuadExt },
    #[error("source point {source_index}: angle {angle} solved {solved} but counted {counted}")]
    CountMismatch { source_index: usize, angle: QuadExt, solved: u64, counted: u64 },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    pub dim: usize,
    pub size: usize,
    /// Largest t with the sums of degrees 1..=t all zero.
    pub strength: usize,
    /// All degrees up to `t_max` were zero, so the strength is only a lower
    /// bound.
    pub saturated: bool,
    /// First degree with a nonzero sum.
    pub witness: Option<usize>,
    /// `(k, Σ_{x,y} G_k(⟨x,y⟩))` for `k = 1..=t_max`.
    pub sums: Vec<(usize, QuadExt)>,
    #[serde(serialize_with = "ser_display")]
    pub bound: BigInt,
    pub tight: bool,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl DesignReport {
    pub fn sum(&self, k: usize) -> Option<&QuadExt> {
        self.sums.iter().find(|(j, _)| *j == k).map(|(_, v)| v)
    }

    pub fn strength_text(&self) -> String {
        if self.saturated {
            format!(">= {}", self.strength)
        } else {
            self.strength.to_string()
        }
    }
}

/// Lower bound on the size of a spherical `t`-design on `S^{d-1}`.
pub fn tight_bound(d: usize, t: usize) -> BigInt {
    let (d, s) = (d as i64, (t / 2) as i64);
    if t % 2 == 0 {
        binomial(d + s - 1, s) + binomial(d + s - 2, s - 1)
    } else {
        binomial(d + s - 1, s) * 2
    }
}

pub fn design_strength(config: &PointConfig, t_max: usize) -> Result<DesignReport, DesignError> {
    design_strength_gram(&config.gram()?, t_max)
}

pub fn design_strength_gram(gram: &GramData, t_max: usize) -> Result<DesignReport, DesignError> {
    design_strength_capped(gram, t_max, DEFAULT_DEGREE_CAP)
}

pub fn design_strength_capped(gram: &GramData, t_max: usize, cap: usize) -> Result<DesignReport, DesignError> {
    if t_max > cap {
        return Err(DesignError::DegreeCapExceeded { requested: t_max, cap });
    }
    let d = gram.dim();
    let dist = gram.distribution();
    let sums: Vec<(usize, QuadExt)> = (1..=t_max)
        .into_par_iter()
        .map(|k| {
            let g = gegenbauer_poly(d, k);
            let mut acc = QuadExt::zero();
            for (v, c) in &dist {
                let term = g.eval(v)?.checked_mul(&QuadExt::from_int(*c as i64))?;
                acc = acc.checked_add(&term)?;
            }
            Ok((k, acc))
        })
        .collect::<Result<_, NumError>>()?;
    let witness = sums.iter().find(|(_, v)| !v.is_zero()).map(|(k, _)| *k);
    let strength = witness.map_or(t_max, |k| k - 1);
    let bound = tight_bound(d, strength);
    Ok(DesignReport {
        dim: d,
        size: gram.size(),
        strength,
        saturated: witness.is_none(),
        witness,
        sums,
        tight: BigInt::from(gram.size()) == bound,
        bound,
    })
}

/// `E[⟨x,y⟩^λ]` for `x` uniform on `S^{d-1}` and a fixed unit `y`.
pub fn sphere_moment(d: usize, lambda: usize) -> Rational {
    if lambda % 2 == 1 {
        return Rational::zero();
    }
    let mut r = Rational::one();
    for i in 0..lambda / 2 {
        let i = i as i64;
        r *= Rational::new((2 * i + 1).into(), (d as i64 + 2 * i).into());
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentCheck {
    pub degree: usize,
    pub lhs: QuadExt,
    pub rhs: QuadExt,
    pub equal: bool,
}

/// `Σ_x ⟨y,x⟩^ℓ` against `m_ℓ(d) · |D| · k^{ℓ/2} · ⟨y,y⟩^{ℓ/2}`; `y` should lie
/// in the span of the configuration.
pub fn moment_check(config: &PointConfig, y: &[QuadExt], degree: usize) -> Result<MomentCheck, DesignError> {
    if y.len() != config.ambient() {
        return Err(NumError::Dimension(format!("y has {} coordinates", y.len())).into());
    }
    if ![2, 4, 6].contains(&degree) {
        return Err(DesignError::HypothesisNotMet(format!("moment degree {degree} is not 2, 4 or 6")));
    }
    let mut lhs = QuadExt::zero();
    for x in config.points() {
        lhs = lhs.checked_add(&dot(y, x)?.pow(degree as u32))?;
    }
    let half = (degree / 2) as u32;
    let yy = dot(y, y)?;
    let coef = QuadExt::rational(sphere_moment(config.dim(), degree) * int(config.len() as i64));
    let rhs = coef.checked_mul(&config.norm2().pow(half))?.checked_mul(&yy.pow(half))?;
    let equal = lhs == rhs;
    Ok(MomentCheck { degree, lhs, rhs, equal })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ValencyCase {
    /// `s − 1 ≤ t_j`
    Spread,
    /// `s − 2 = t_j` and the source is the negation of the target.
    Antipodal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValencyTable {
    pub case: ValencyCase,
    pub source_size: usize,
    pub target_size: usize,
    pub target_strength: usize,
    /// Whether every source point also occurs in the target.
    pub self_in_target: bool,
    /// `(α, p_α)` from the Vandermonde solve.
    pub rows: Vec<(QuadExt, u64)>,
    /// Source points whose direct counts matched the solved table.
    pub verified_sources: usize,
}

impl ValencyTable {
    pub fn row_sum(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    /// `|X_j| − [self] − [antipode]`.
    pub fn expected_row_sum(&self) -> u64 {
        self.target_size as u64 - self.self_in_target as u64 - (self.case == ValencyCase::Antipodal) as u64
    }

    pub fn get(&self, angle: &QuadExt) -> u64 {
        self.rows.iter().find(|(a, _)| a == angle).map_or(0, |(_, c)| *c)
    }
}

/// Valencies `p_α = |{z ∈ target : ⟨x,z⟩ = α}|` obtained by solving the
/// moment system, then checked by counting from every source point.
///
/// The target is treated as a design on the gram's sphere; its strength is
/// `target_strength` if given (it is verified), otherwise computed.
pub fn valencies(
    gram: &GramData,
    source: &[usize],
    target: &[usize],
    target_strength: Option<usize>,
) -> Result<ValencyTable, DesignError> {
    let minus = QuadExt::from_int(-1);
    if source.is_empty() || target.is_empty() {
        return Err(DesignError::HypothesisNotMet("empty source or target".into()));
    }
    let self_count = |i: usize| target.iter().filter(|&&z| gram.entry(i, z).is_one()).count();
    let self_in_target = self_count(source[0]) == 1;
    if source.iter().any(|&i| (self_count(i) == 1) != self_in_target || self_count(i) > 1) {
        return Err(DesignError::HypothesisNotMet("source partially overlaps the target".into()));
    }
    let mut angles = BTreeSet::new();
    for &i in source {
        for &z in target {
            let v = gram.entry(i, z);
            if !v.is_one() {
                angles.insert(v.clone());
            }
        }
    }
    let s = angles.len();

    let target_gram = gram.sub(target);
    let cap = DEFAULT_DEGREE_CAP;
    let t_j = match target_strength {
        Some(t) => {
            let rep = design_strength_capped(&target_gram, t.min(cap), cap)?;
            if rep.strength < t.min(cap) {
                return Err(DesignError::HypothesisNotMet(format!(
                    "target is only a {}-design, declared {t}",
                    rep.strength
                )));
            }
            t
        }
        None => design_strength_capped(&target_gram, s.min(cap), cap)?.strength,
    };

    let antipodal = source.len() == target.len()
        && source.iter().all(|&i| target.iter().filter(|&&z| *gram.entry(i, z) == minus).count() == 1);
    let case = if s <= t_j + 1 {
        ValencyCase::Spread
    } else if antipodal && s >= 2 && s - 2 == t_j {
        angles.remove(&minus);
        ValencyCase::Antipodal
    } else {
        return Err(DesignError::HypothesisNotMet(format!(
            "{s} angles against a {t_j}-design{}",
            if antipodal { " (source is the antipode of the target)" } else { "" }
        )));
    };

    let nodes: Vec<QuadExt> = angles.into_iter().collect();
    let m = nodes.len();
    let d = gram.dim();
    let vander: Vec<Vec<QuadExt>> = (0..m).map(|l| nodes.iter().map(|a| a.pow(l as u32)).collect()).collect();
    let rhs: Vec<QuadExt> = (0..m)
        .map(|l| {
            let mut r = sphere_moment(d, l) * int(target.len() as i64);
            if self_in_target {
                r -= Rational::one();
            }
            if case == ValencyCase::Antipodal {
                r -= if l % 2 == 0 { Rational::one() } else { -Rational::one() };
            }
            QuadExt::rational(r)
        })
        .collect();
    let sol = solve(&vander, &rhs)?;

    let mut rows = Vec::with_capacity(m);
    for (a, v) in nodes.iter().zip(&sol) {
        let count = v
            .as_integer()
            .filter(|c| !c.is_negative())
            .and_then(|c| c.to_u64())
            .ok_or_else(|| DesignError::NonIntegralSolution { angle: a.clone(), value: v.clone() })?;
        rows.push((a.clone(), count));
    }

    let mismatch = source.par_iter().find_map_any(|&i| {
        let prof = gram.row_profile(i, target);
        for (a, c) in &rows {
            let got = prof.get(a).copied().unwrap_or(0);
            if got != *c {
                return Some(DesignError::CountMismatch { source_index: i, angle: a.clone(), solved: *c, counted: got });
            }
        }
        let extra = prof.keys().find(|a| !a.is_one() && !(case == ValencyCase::Antipodal && **a == minus) && !nodes.contains(a));
        extra.map(|a| DesignError::CountMismatch { source_index: i, angle: a.clone(), solved: 0, counted: prof[a] })
    });
    if let Some(e) = mismatch {
        return Err(e);
    }
    Ok(ValencyTable {
        case,
        source_size: source.len(),
        target_size: target.len(),
        target_strength: t_j,
        self_in_target,
        rows,
        verified_sources: source.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{antipodal_split, catalog, CATALOG_NAMES};
    use proptest::prelude::*;

    fn f(p: i64, q: i64) -> QuadExt {
        QuadExt::from_frac(p, q)
    }

    #[test]
    fn tight_bounds() {
        assert_eq!(tight_bound(7, 5), BigInt::from(56));
        assert_eq!(tight_bound(8, 7), BigInt::from(240));
        assert_eq!(tight_bound(2, 5), BigInt::from(6));
        assert_eq!(tight_bound(3, 2), BigInt::from(4));
        assert_eq!(tight_bound(3, 0), BigInt::from(1));
    }

    #[test]
    fn hexagon_is_a_tight_five_design() {
        let r = design_strength(&catalog("hexagon").unwrap(), 6).unwrap();
        assert_eq!(r.strength, 5);
        assert!(!r.saturated && r.tight);
        assert!(!r.sum(6).unwrap().is_zero());
        // G_6^{(2)} = 2 T_6 sums to 6·6·2 over the Gram of a hexagon
        assert_eq!(r.sum(6).unwrap(), &QuadExt::from_int(72));
    }

    #[test]
    fn catalog_strengths() {
        let expect = [
            ("hexagon", 5),
            ("icosahedron", 5),
            ("d4_min", 5),
            ("e6_min", 5),
            ("e7_min", 5),
            ("e8_min", 7),
            ("etf_7_28_design", 5),
            ("mub16", 5),
        ];
        for (name, t) in expect {
            let r = design_strength(&catalog(name).unwrap(), 8).unwrap();
            assert_eq!(r.strength, t, "{name}");
            for (_, v) in &r.sums {
                assert!(v.signum() >= 0, "{name}: negative sum {v}");
            }
        }
        assert!(design_strength(&catalog("e8_min").unwrap(), 8).unwrap().tight);
        assert!(!design_strength(&catalog("d4_min").unwrap(), 8).unwrap().tight);
    }

    #[test]
    fn saturation_and_cap() {
        let r = design_strength(&catalog("hexagon").unwrap(), 3).unwrap();
        assert!(r.saturated);
        assert_eq!(r.strength_text(), ">= 3");
        let e = design_strength(&catalog("hexagon").unwrap(), 13);
        assert!(matches!(e, Err(DesignError::DegreeCapExceeded { requested: 13, cap: 12 })));
    }

    #[test]
    fn strength_is_monotone_in_t_max() {
        for name in ["hexagon", "e8_min", "icosahedron"] {
            let g = catalog(name).unwrap().gram().unwrap();
            let long = design_strength_gram(&g, 10).unwrap();
            for t in 1..10 {
                let short = design_strength_gram(&g, t).unwrap();
                assert_eq!(short.sums[..], long.sums[..t]);
                assert_eq!(short.strength, long.strength.min(t));
            }
        }
    }

    #[test]
    fn moments() {
        let e8 = catalog("e8_min").unwrap();
        let mut y = vec![QuadExt::zero(); 8];
        y[0] = QuadExt::one();
        // 28 roots ±e1±ej contribute 1 each and 128 half-vectors 1/4 each
        let m = moment_check(&e8, &y, 2).unwrap();
        assert_eq!((m.lhs.clone(), m.rhs.clone()), (QuadExt::from_int(60), QuadExt::from_int(60)));
        for l in [4, 6] {
            assert!(moment_check(&e8, &y, l).unwrap().equal);
        }
        let hex = catalog("hexagon").unwrap();
        let y = vec![f(3, 5), f(4, 5)];
        assert!(moment_check(&hex, &y, 4).unwrap().equal);
        assert!(!moment_check(&hex, &y, 6).unwrap().equal);
    }

    #[test]
    fn moment_check_fails_for_non_designs() {
        let pts = vec![
            vec![f(1, 1), f(0, 1), f(0, 1)],
            vec![f(0, 1), f(1, 1), f(0, 1)],
            vec![f(0, 1), f(0, 1), f(1, 1)],
            vec![f(3, 5), f(4, 5), f(0, 1)],
        ];
        let c = PointConfig::from_points(pts, "four").unwrap();
        let y = vec![f(1, 1), f(2, 1), f(3, 1)];
        assert!(!moment_check(&c, &y, 4).unwrap().equal);
    }

    #[test]
    fn hexagon_valencies() {
        let g = catalog("hexagon").unwrap().gram().unwrap();
        let all: Vec<usize> = (0..6).collect();
        let t = valencies(&g, &all, &all, None).unwrap();
        assert_eq!(t.rows, vec![(f(-1, 1), 1), (f(-1, 2), 2), (f(1, 2), 2)]);
        assert_eq!(t.row_sum(), t.expected_row_sum());
    }

    #[test]
    fn hexagon_antipodal_case() {
        let g = catalog("hexagon").unwrap().gram().unwrap();
        let t = valencies(&g, &[0, 2, 4], &[3, 5, 1], Some(0)).unwrap();
        assert_eq!(t.case, ValencyCase::Antipodal);
        assert_eq!(t.rows, vec![(f(1, 2), 2)]);
        assert_eq!(t.row_sum(), t.expected_row_sum());
        // claiming more strength than the triangle has is rejected
        assert!(matches!(valencies(&g, &[0, 2, 4], &[3, 5, 1], Some(3)), Err(DesignError::HypothesisNotMet(_))));
    }

    #[test]
    fn e8_valencies() {
        let g = catalog("e8_min").unwrap().gram().unwrap();
        let all: Vec<usize> = (0..240).collect();
        let t = valencies(&g, &all, &all, None).unwrap();
        assert_eq!(t.get(&f(1, 2)), 56);
        assert_eq!(t.get(&f(0, 1)), 126);
        assert_eq!(t.get(&f(-1, 1)), 1);
        assert_eq!(t.row_sum(), 239);
    }

    #[test]
    fn valencies_agree_with_counts_on_catalog() {
        for name in CATALOG_NAMES {
            let g = catalog(name).unwrap().gram().unwrap();
            let all: Vec<usize> = (0..g.size()).collect();
            let t = valencies(&g, &all, &all, None).unwrap();
            assert_eq!(t.verified_sources, g.size(), "{name}");
            assert_eq!(t.row_sum(), t.expected_row_sum(), "{name}");
        }
    }

    #[test]
    fn non_design_target_is_rejected() {
        let c = catalog("e8_min").unwrap();
        let (half, _) = antipodal_split(&c).unwrap();
        let g = half.gram().unwrap();
        let first: Vec<usize> = (0..10).collect();
        assert!(valencies(&g, &first, &first, None).is_err());
    }

    // Σ c_x c_y G_k(⟨x,y⟩) ≥ 0 on random subsets of the E8 roots.
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gegenbauer_forms_are_psd(picks in prop::collection::btree_set(0usize..240, 2..12),
                                    cs in prop::collection::vec(-9i64..10, 12),
                                    k in 1usize..7) {
            let g = catalog("e8_min").unwrap().gram().unwrap();
            let idx: Vec<usize> = picks.into_iter().collect();
            let poly = gegenbauer_poly(8, k);
            let mut total = QuadExt::zero();
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    let w = QuadExt::from_int(cs[a] * cs[b]);
                    total = total + poly.eval(g.entry(i, j)).unwrap() * w;
                }
            }
            prop_assert!(total.signum() >= 0);
        }
    }
}
