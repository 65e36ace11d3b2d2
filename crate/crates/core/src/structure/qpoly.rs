use serde::Serialize;

use crate::configs::Fibered;
use crate::exactnum::{determinant, Poly, QuadExt, Rational};
use crate::gegenbauer::gegenbauer_poly;

use super::coherent::CoherentConfigReport;
use super::StructureError;

/// Scaled idempotents of one block: `values[ℓ][r]` is the entry of
/// `√(|X_i||X_j|)·E_ℓ^{(i,j)}` on the `r`-th relation of the block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockCheck {
    pub block: (usize, usize),
    pub relations: Vec<usize>,
    pub values: Vec<Vec<QuadExt>>,
    pub determinant: QuadExt,
    /// `v_h(F_1(r)) = F_h(r)` with `deg v_h = h` for every `h`.
    pub polynomial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenRow {
    pub block: (usize, usize),
    /// `None` on the diagonal.
    pub value: Option<QuadExt>,
    pub realized: Vec<QuadExt>,
    pub expected: Option<Vec<QuadExt>>,
}

impl EigenRow {
    pub fn matches(&self) -> bool {
        self.expected.as_ref() == Some(&self.realized)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QPolyReport {
    pub d: usize,
    pub c: QuadExt,
    pub blocks: Vec<BlockCheck>,
    pub all_ones: bool,
    pub basis: bool,
    pub transpose: bool,
    /// Products `F_ℓ^{(i,j)} F_m^{(j,h)}` checked, all with zero residual.
    pub products_checked: usize,
    pub q_polynomial: bool,
    pub eigen_rows: Vec<EigenRow>,
}

impl QPolyReport {
    pub fn eigen_match(&self) -> bool {
        self.eigen_rows.iter().all(EigenRow::matches)
    }

    pub fn verified(&self) -> bool {
        self.all_ones && self.basis && self.transpose && self.q_polynomial && self.eigen_match()
    }

    pub fn block(&self, i: usize, j: usize) -> &BlockCheck {
        self.blocks.iter().find(|b| b.block == (i, j)).expect("3x3 blocks")
    }

    pub fn row(&self, i: usize, j: usize, value: Option<&QuadExt>) -> Option<&EigenRow> {
        self.eigen_rows.iter().find(|r| r.block == (i, j) && r.value.as_ref() == value)
    }
}

const TYPE: [[usize; 3]; 3] = [[3, 2, 3], [2, 4, 2], [3, 2, 3]];

fn rational_of(v: &QuadExt) -> Result<Rational, StructureError> {
    v.as_rational()
        .cloned()
        .ok_or_else(|| StructureError::HypothesisViolated(format!("{v} is irrational")))
}

/// `Π (x − a)/(t − a)` over `a` in `roots`: the indicator of `t` on the
/// realized values.
fn indicator(roots: &[QuadExt], t: &QuadExt) -> Result<Poly, StructureError> {
    let mut p = Poly::constant(Rational::from_integer(1.into()));
    let t = rational_of(t)?;
    for a in roots {
        let a = rational_of(a)?;
        let lin = Poly::new(vec![-a.clone(), Rational::from_integer(1.into())]);
        p = p.mul(&lin).scale(&(Rational::from_integer(1.into()) / (&t - &a)));
    }
    Ok(p)
}

fn expected_row(d: usize, i: usize, j: usize, value: Option<&QuadExt>) -> Option<Vec<QuadExt>> {
    let di = d as i64;
    let q = |v: i64| QuadExt::from_int(v);
    let rt = QuadExt::sqrt_int(d as u64 + 2);
    let over = |v: QuadExt| v / q(di - 1);
    let row = |v: Vec<QuadExt>| Some(v);
    match ((i, j), value) {
        ((0, 0) | (2, 2), None) => row(vec![q(1), q(di - 1), QuadExt::from_frac((di - 2) * (di - 1), 6)]),
        ((0, 0) | (2, 2), Some(g)) if *g == over(&rt - &q(3)) => row(vec![q(1), &rt - &q(3), q(2) - &rt]),
        ((0, 0) | (2, 2), Some(g)) if *g == over(-&rt - &q(3)) => row(vec![q(1), -&rt - &q(3), &rt + &q(2)]),
        ((1, 1), None) => row(vec![
            q(1),
            q(di - 1),
            QuadExt::from_frac((di - 2) * (di + 2), 3),
            QuadExt::from_frac((di - 2) * (di - 1), 3),
        ]),
        ((1, 1), Some(g)) if *g == q(-1) => row(vec![
            q(1),
            q(1 - di),
            QuadExt::from_frac((di - 2) * (di + 2), 3),
            QuadExt::from_frac(-(di - 2) * (di - 1), 3),
        ]),
        ((1, 1), Some(g)) if g.square() == QuadExt::from_frac(1, di + 2) => {
            let e = q(di - 1) / &rt;
            let e = if g.signum() > 0 { e } else { -e };
            row(vec![q(1), e.clone(), q(-1), -e])
        }
        ((0, 2) | (2, 0), Some(g)) if *g == q(-1) => row(vec![q(1), q(1 - di), QuadExt::from_frac((di - 2) * (di - 1), 6)]),
        ((0, 2) | (2, 0), Some(g)) if *g == over(q(3) - &rt) => row(vec![q(1), q(3) - &rt, q(2) - &rt]),
        ((0, 2) | (2, 0), Some(g)) if *g == over(q(3) + &rt) => row(vec![q(1), &rt + &q(3), &rt + &q(2)]),
        ((0, 1) | (1, 0) | (1, 2) | (2, 1), Some(g)) if g.square() == QuadExt::from_frac(1, di - 1) => {
            let s = QuadExt::sqrt_int(d as u64 - 1);
            row(vec![q(1), if g.signum() > 0 { s } else { -s }])
        }
        _ => None,
    }
}

/// Builds the scaled idempotents of the three-fiber configuration from the
/// Gegenbauer polynomials of `S^{d-2}` and checks the idempotent identities
/// through the intersection numbers.
pub fn verify_q_poly(cc: &CoherentConfigReport, fibered: &Fibered, d: usize) -> Result<QPolyReport, StructureError> {
    let hyp = |m: String| Err(StructureError::HypothesisViolated(m));
    if fibered.fibers.len() != 3 || cc.type_matrix.iter().map(|r| r.as_slice()).ne(TYPE.iter().map(|r| r.as_slice())) {
        return hyp(format!("type {:?} is not (3,2,3; 2,4,2; 3,2,3)", cc.type_matrix));
    }
    if fibered.gram.dim() + 1 != d || d < 3 {
        return hyp(format!("fibers live in R^{}, expected R^{}", fibered.gram.dim(), d.saturating_sub(1)));
    }
    let m = d - 1;
    let sizes = cc.fiber_sizes.clone();
    let (di, x2) = (d as i64, sizes[1] as i64);
    let c = QuadExt::from_frac(x2 - 2, (di + 1) * (di - 2));
    let geg: Vec<Poly> = (0..3).map(|k| gegenbauer_poly(m, k).poly).collect();
    let one = QuadExt::one();
    let minus_one = QuadExt::from_int(-1);

    // idempotents and their polynomials v_h, block by block
    let mut blocks = Vec::new();
    let mut polys: Vec<Vec<Poly>> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let rels = cc.block(i, j);
            let gamma: Vec<QuadExt> = rels.iter().map(|&r| cc.relations[r].value.clone().unwrap_or_else(QuadExt::one)).collect();
            let diag: Vec<bool> = rels.iter().map(|&r| cc.relations[r].value.is_none()).collect();
            let count = TYPE[i][j];
            // v_h as polynomials in γ; the substitution x = mγ comes last
            let mut v: Vec<Poly> = vec![geg[0].clone(), geg[1].clone()];
            if (i, j) == (1, 1) {
                v.push(geg[2].scale(&rational_of(&c)?));
            }
            if i == j {
                let realized = fibered.block_values(i, i);
                let mut last = indicator(&realized, &one)?.scale(&Rational::from_integer((sizes[i] as i64).into()));
                for p in &v {
                    last = last.sub(p);
                }
                v.push(last);
            } else if count == 3 {
                let others: Vec<QuadExt> = fibered.block_values(i, j).into_iter().filter(|g| *g != minus_one).collect();
                let a3 = indicator(&others, &minus_one)?.scale(&Rational::from_integer((sizes[i] as i64).into()));
                v.push(a3.sub(&v[0]).add(&v[1]));
            }
            let mut values = Vec::new();
            for (h, p) in v.iter().enumerate() {
                let mut row = Vec::new();
                for (k, g) in gamma.iter().enumerate() {
                    // the complement forms are exact only on the realized
                    // values, so the diagonal uses |X_i| directly
                    let val = if i == j && h == count - 1 {
                        let mut s = if diag[k] { QuadExt::from_int(sizes[i] as i64) } else { QuadExt::zero() };
                        for prev in &values {
                            let prev: &Vec<QuadExt> = prev;
                            s = s.checked_sub(&prev[k])?;
                        }
                        s
                    } else {
                        p.eval(g)?
                    };
                    row.push(val);
                }
                values.push(row);
            }
            let det = determinant(&values)?;
            let x_over_m = Rational::new(1.into(), (m as i64).into());
            let vh: Vec<Poly> = v.iter().map(|p| p.rescale_arg(&x_over_m)).collect();
            let mut polynomial = vh.iter().enumerate().all(|(h, p)| p.degree().unwrap_or(0) == h);
            for (h, p) in vh.iter().enumerate() {
                for k in 0..gamma.len() {
                    polynomial &= p.eval(&values[1][k])? == values[h][k];
                }
            }
            blocks.push(BlockCheck { block: (i, j), relations: rels, values, determinant: det, polynomial });
            polys.push(vh);
        }
    }
    let blk = |i: usize, j: usize| &blocks[3 * i + j];
    let pos = |i: usize, j: usize, r: usize| blk(i, j).relations.iter().position(|&x| x == r).unwrap();

    let all_ones = blocks.iter().all(|b| b.values[0].iter().all(QuadExt::is_one));
    let basis = blocks.iter().all(|b| !b.determinant.is_zero());
    let mut transpose = true;
    for b in &blocks {
        let (i, j) = b.block;
        for (k, &r) in b.relations.iter().enumerate() {
            let Some(t) = cc.transpose(r) else {
                transpose = false;
                continue;
            };
            let tk = pos(j, i, t);
            transpose &= (0..b.values.len()).all(|l| b.values[l][k] == blk(j, i).values[l][tk]);
        }
    }

    let mut products_checked = 0;
    for i in 0..3 {
        for j in 0..3 {
            for h in 0..3 {
                let (left, right, target) = (blk(i, j), blk(j, h), blk(i, h));
                for l in 0..left.values.len() {
                    for mm in 0..right.values.len() {
                        for (k, &out) in target.relations.iter().enumerate() {
                            let mut sum = QuadExt::zero();
                            for (a, &r1) in left.relations.iter().enumerate() {
                                for (b, &r2) in right.relations.iter().enumerate() {
                                    let p = cc.p(out, r1, r2);
                                    if p > 0 {
                                        let term = left.values[l][a].checked_mul(&right.values[mm][b])?;
                                        sum = sum.checked_add(&term.checked_mul(&QuadExt::from_int(p as i64))?)?;
                                    }
                                }
                            }
                            let want = if l == mm && l < target.values.len() {
                                target.values[l][k].checked_mul(&QuadExt::from_int(sizes[j] as i64))?
                            } else {
                                QuadExt::zero()
                            };
                            let residual = sum.checked_sub(&want)?;
                            if !residual.is_zero() {
                                return Err(StructureError::ResidualNonzero { block: (i, j, h), l, m: mm, entry: residual });
                            }
                        }
                        products_checked += 1;
                    }
                }
            }
        }
    }

    let q_polynomial = blocks.iter().all(|b| b.polynomial);
    let mut eigen_rows = Vec::new();
    for b in &blocks {
        let (i, j) = b.block;
        for (k, &r) in b.relations.iter().enumerate() {
            let value = cc.relations[r].value.clone();
            let realized: Vec<QuadExt> = b.values.iter().map(|row| row[k].clone()).collect();
            let expected = expected_row(d, i, j, value.as_ref());
            eigen_rows.push(EigenRow { block: (i, j), value, realized, expected });
        }
    }
    Ok(QPolyReport { d, c, blocks, all_ones, basis, transpose, products_checked, q_polynomial, eigen_rows })
}
