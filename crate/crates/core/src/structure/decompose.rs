use std::collections::BTreeSet;

use serde::Serialize;

use crate::configs::{Fibered, GramData, PointConfig};
use crate::derived::{derive_with_gram, DeriveMode};
use crate::design::{design_strength_gram, DesignReport};
use crate::exactnum::{rat, QuadExt};
use crate::minimaltype::{verify_certificate_with, MinimalTypeCertificate};

use super::packing::levenstein_alpha;
use super::StructureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecomposeCase {
    /// Tight 5-design, `|D| = d(d+1)`.
    Tight,
    /// Antipodal 5-design of size `2n` with `n > d(d+1)/2`.
    Levenstein,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    /// False when the condition is only guaranteed for larger `d`.
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub d: usize,
    pub case: DecomposeCase,
    /// Half the size of `D`.
    pub n: usize,
    /// Normalized Gram of `X_1 ∪ X_2 ∪ X_3` on `S^{d-2}`.
    #[serde(skip)]
    pub joint: Fibered,
    pub sizes: Vec<usize>,
    /// Index in `D` of every joint position.
    pub source: Vec<usize>,
    /// Joint position of the antipode.
    pub antipode: Vec<usize>,
    pub strengths: Vec<usize>,
    pub conditions: Vec<Condition>,
}

impl Decomposition {
    pub fn fiber(&self, i: usize) -> GramData {
        self.joint.fiber_gram(i)
    }

    pub fn degenerate(&self) -> Vec<&Condition> {
        self.conditions.iter().filter(|c| !c.holds).collect()
    }

    /// One point of each antipodal pair of `X_2`.
    pub fn x2_half(&self) -> GramData {
        let r = self.joint.fibers[1].clone();
        let keep: Vec<usize> = r.clone().filter(|&p| self.antipode[p] > p).collect();
        self.joint.gram.sub(&keep)
    }

    /// `X_1` and `X_2` with their cross block, the input of [`lift`].
    pub fn x12(&self) -> Fibered {
        let s = self.sizes[0] + self.sizes[1];
        let idx: Vec<usize> = (0..s).collect();
        Fibered::new(self.joint.gram.sub(&idx), &self.sizes[..2]).expect("sizes add up")
    }
}

fn set_text(v: &BTreeSet<QuadExt>) -> String {
    format!("{{{}}}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn block_set(f: &Fibered, a: usize, b: usize) -> BTreeSet<QuadExt> {
    f.block_values(a, b).into_iter().collect()
}

pub fn decompose(config: &PointConfig, cert: &MinimalTypeCertificate) -> Result<Decomposition, StructureError> {
    let gram = config.gram()?;
    let report = design_strength_gram(&gram, 5)?;
    let hyp = |m: String| Err(StructureError::HypothesisViolated(m));
    if report.strength < 5 {
        return hyp(format!("D is only a {}-design", report.strength_text()));
    }
    verify_certificate_with(config, &cert.alpha, Some(&report)).map_err(|e| StructureError::HypothesisViolated(e.to_string()))?;
    let Some(anti) = config.antipode_map() else {
        return hyp("D is not antipodal".into());
    };
    let d = config.dim();
    let n = config.len() / 2;
    let case = if report.tight {
        DecomposeCase::Tight
    } else if 2 * n > d * (d + 1) {
        DecomposeCase::Levenstein
    } else {
        return hyp(format!("|D| = {} is neither tight nor above the Levenstein threshold", config.len()));
    };
    let family = derive_with_gram(config, &gram, &cert.alpha, DeriveMode::MinimalType)?;
    let betas: Vec<Option<QuadExt>> = family.levels.iter().map(|l| l.beta.clone()).collect();
    let want = vec![Some(QuadExt::one()), Some(QuadExt::zero()), Some(QuadExt::from_int(-1))];
    if betas != want {
        return hyp("alpha does not produce the three levels 1, 0, -1".into());
    }
    let joint = family.joint.clone();
    let pos = family.joint_position();
    let source: Vec<usize> = family.levels.iter().flat_map(|l| l.indices.iter().copied()).collect();
    let antipode: Vec<usize> = source.iter().map(|&i| pos[&anti[i]]).collect();
    let sizes = joint.sizes();
    let g = &joint.gram;
    let fiber_of = |p: usize| joint.fibers.iter().position(|r| r.contains(&p)).unwrap();

    let mut conditions = Vec::new();
    let mut push = |name: &str, holds: bool, required: bool, detail: String| {
        conditions.push(Condition { name: name.into(), holds, required, detail })
    };
    let minus_one = QuadExt::from_int(-1);
    let x3 = joint.fibers[0].clone().all(|p| fiber_of(antipode[p]) == 2 && *g.entry(p, antipode[p]) == minus_one);
    push("X3 = -X1", x3, true, "antipodes of X1 are X3".into());
    let x2 = joint.fibers[1].clone().all(|p| fiber_of(antipode[p]) == 1 && *g.entry(p, antipode[p]) == minus_one);
    push("X2 = -X2", x2, true, "antipodes of X2 stay in X2".into());

    let big_d = d >= 8 || (case == DecomposeCase::Levenstein && d >= 5);
    let a11 = block_set(&joint, 0, 0);
    push(
        "X1 and -X1 disjoint",
        !a11.contains(&minus_one),
        big_d,
        if a11.contains(&minus_one) { "X1 contains an antipodal pair".into() } else { "no antipodal pair in X1".into() },
    );

    let (di, ni) = (d as i64, n as i64);
    let (s1, s2) = match case {
        DecomposeCase::Tight => (rat((di + 1) * (di + 2), 6), rat(2 * (di - 1) * (di + 1), 3)),
        DecomposeCase::Levenstein => (rat((di + 2) * ni, 3 * di), rat(4 * (di - 1) * ni, 3 * di)),
    };
    let sizes_ok = [sizes[0], sizes[1], sizes[2]]
        .iter()
        .zip([&s1, &s2, &s1])
        .all(|(&s, want)| rat(s as i64, 1) == *want);
    push("sizes", sizes_ok, true, format!("found {:?}, expected ({s1}, {s2}, {s1})", sizes));

    let mut strengths = Vec::new();
    for i in 0..3 {
        let r = design_strength_gram(&joint.fiber_gram(i), 3)?;
        strengths.push(r.strength);
    }
    push("fibers are 3-designs", strengths.iter().all(|&t| t >= 3), d >= 3, format!("strengths {strengths:?}"));

    let q = |v: i64| QuadExt::from_int(v);
    let frac = |v: QuadExt| v / q(di - 1);
    let realized = [(0, 0), (1, 1), (0, 1), (0, 2)].map(|(a, b)| block_set(&joint, a, b));
    let names = ["A(X1)", "A(X2)", "A(X1,X2)", "A(X1,X3)"];
    match case {
        DecomposeCase::Tight => {
            let r = QuadExt::sqrt_int(d as u64 + 2);
            let inv = |v: QuadExt| v.checked_recip();
            let s = QuadExt::sqrt_int(d as u64 - 1);
            let expected: [BTreeSet<QuadExt>; 4] = [
                [frac(&r - &q(3)), frac(-&r - &q(3))].into(),
                [inv(r.clone())?, -inv(r.clone())?, q(-1)].into(),
                [inv(s.clone())?, -inv(s)?].into(),
                [frac(&r + &q(3)), frac(q(3) - &r), q(-1)].into(),
            ];
            for i in 0..4 {
                let detail = format!("found {}, expected {}", set_text(&realized[i]), set_text(&expected[i]));
                push(&format!("{} contained", names[i]), realized[i].is_subset(&expected[i]), true, detail.clone());
                push(&format!("{} equal", names[i]), realized[i] == expected[i], d >= 8, detail);
            }
        }
        DecomposeCase::Levenstein => {
            let a = levenstein_alpha(n, d).ok_or_else(|| StructureError::HypothesisViolated("alpha_{n,d} undefined".into()))?;
            let da = &q(di + 2) * &a;
            let expected: [BTreeSet<QuadExt>; 2] = [
                [frac(q(-3)), frac(&da - &q(3)), frac(-&da - &q(3))].into(),
                [q(-1), q(0), a.clone(), -&a].into(),
            ];
            let expected13: BTreeSet<QuadExt> = [q(-1), frac(q(3)), frac(&da + &q(3)), frac(q(3) - &da)].into();
            for (i, exp) in expected.iter().enumerate() {
                let detail = format!("found {}, expected within {}", set_text(&realized[i]), set_text(exp));
                push(&format!("{} contained", names[i]), realized[i].is_subset(exp), true, detail);
            }
            // the cross value √((d+2)/(d−1))·α is compared through its square
            let cross2 = QuadExt::from_frac(di + 2, di - 1) * a.square();
            let ok = realized[2].iter().all(|v| v.is_zero() || v.square() == cross2);
            push(
                "A(X1,X2) contained",
                ok,
                true,
                format!("found {}, expected 0 or values with square {cross2}", set_text(&realized[2])),
            );
            let detail = format!("found {}, expected within {}", set_text(&realized[3]), set_text(&expected13));
            push("A(X1,X3) contained", realized[3].is_subset(&expected13), true, detail);
        }
    }

    if let Some(c) = conditions.iter().find(|c| c.required && !c.holds) {
        return Err(StructureError::ConditionViolated(format!("{}: {}", c.name, c.detail)));
    }
    Ok(Decomposition { d, case, n, joint, sizes, source, antipode, strengths, conditions })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftReport {
    pub d: usize,
    pub case: DecomposeCase,
    #[serde(skip)]
    pub gram: GramData,
    pub sizes: Vec<usize>,
    pub angles: Vec<QuadExt>,
    pub report: DesignReport,
}

/// `√((d−1)/(d+2)) · g`, formed through its square when the two factors
/// live in different fields.
fn cross_entry(c: &QuadExt, b: &QuadExt, g: &QuadExt) -> Result<QuadExt, StructureError> {
    if let Ok(v) = c.checked_mul(g) {
        return Ok(v);
    }
    let sq = b.checked_mul(&g.square())?;
    let root = sq.sqrt().ok_or_else(|| StructureError::HypothesisViolated(format!("cannot represent sqrt({sq})")))?;
    Ok(if g.signum() < 0 { -root } else { root })
}

/// Rebuilds `D = X̃_1 ∪ X̃_2 ∪ −X̃_1` on `S^{d-1}` from the joint Gram of
/// `X_1, X_2` on `S^{d-2}`.
pub fn lift(x12: &Fibered, d: usize) -> Result<LiftReport, StructureError> {
    let hyp = |m: String| Err(StructureError::HypothesisViolated(m));
    if x12.fibers.len() < 2 {
        return hyp("need the fibers X1 and X2".into());
    }
    if x12.gram.dim() + 1 != d {
        return hyp(format!("fibers live on S^{}, expected S^{}", x12.gram.dim().saturating_sub(1), d - 2));
    }
    let (s1, s2) = (x12.fibers[0].len(), x12.fibers[1].len());
    let (di, s1i, s2i) = (d as i64, s1 as i64, s2 as i64);
    let case = if 6 * s1i == (di + 1) * (di + 2) && 3 * s2i == 2 * (di - 1) * (di + 1) {
        DecomposeCase::Tight
    } else {
        let n = rat(3 * di * s1i, di + 2);
        if !n.is_integer() {
            return hyp(format!("|X1| = {s1} gives n = {n}"));
        }
        let ni: i64 = n.to_integer().try_into().unwrap_or(0);
        if rat(s2i, 1) != rat(4 * (di - 1) * ni, 3 * di) {
            return hyp(format!("|X2| = {s2}, expected {} for n = {ni}", rat(4 * (di - 1) * ni, 3 * di)));
        }
        if 2 * ni <= di * (di + 1) {
            return hyp(format!("n = {ni} is not above d(d+1)/2"));
        }
        DecomposeCase::Levenstein
    };
    let g = &x12.gram;
    let minus_one = QuadExt::from_int(-1);
    let r2 = x12.fibers[1].clone();
    if let Some(p) = r2.clone().find(|&p| !r2.clone().any(|q| *g.entry(p, q) == minus_one)) {
        return hyp(format!("X2 is not antipodal at point {}", p - r2.start));
    }

    let a = QuadExt::from_frac(3, di + 2);
    let b = QuadExt::from_frac(di - 1, di + 2);
    let c = b.sqrt().ok_or_else(|| StructureError::HypothesisViolated("sqrt((d-1)/(d+2))".into()))?;
    let r1 = x12.fibers[0].clone();
    // positions: X̃1 then X̃2 then X̃3 = −X̃1
    let src: Vec<(usize, i8)> = r1.clone().map(|p| (p, 1)).chain(r2.clone().map(|p| (p, 0))).chain(r1.clone().map(|p| (p, -1))).collect();
    let total = src.len();
    let mut m = vec![vec![QuadExt::zero(); total]; total];
    for i in 0..total {
        for j in i..total {
            let ((p, si), (q, sj)) = (src[i], src[j]);
            let gv = g.entry(p, q);
            let v = match (si, sj) {
                (0, 0) => gv.clone(),
                (0, s) | (s, 0) => {
                    let e = cross_entry(&c, &b, gv)?;
                    if s < 0 { -e } else { e }
                }
                (s, t) => {
                    let e = a.checked_add(&b.checked_mul(gv)?)?;
                    if s == t { e } else { -e }
                }
            };
            m[j][i] = v.clone();
            m[i][j] = v;
        }
    }
    let gram = GramData::from_matrix(d, m)?;
    let report = design_strength_gram(&gram, 7)?;
    if report.strength < 5 {
        return hyp(format!("the lift is only a {}-design", report.strength_text()));
    }
    Ok(LiftReport { d, case, angles: gram.angles(), sizes: vec![s1, s2, s1], report, gram })
}

/// Gram of `D` reordered as `X_1, X_2, −X_1`, for comparison with a lift.
pub fn reordered_source(config: &PointConfig, dec: &Decomposition) -> Result<GramData, StructureError> {
    let s1 = dec.sizes[0];
    let anti = config.antipode_map().ok_or_else(|| StructureError::HypothesisViolated("not antipodal".into()))?;
    let mut order: Vec<usize> = dec.source[..s1 + dec.sizes[1]].to_vec();
    order.extend(dec.source[..s1].iter().map(|&i| anti[i]));
    Ok(config.gram()?.sub(&order))
}
