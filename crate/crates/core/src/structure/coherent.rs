use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::configs::Fibered;
use crate::design::design_strength_gram;
use crate::exactnum::QuadExt;

use super::StructureError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub id: usize,
    pub fibers: (usize, usize),
    /// `None` for the diagonal of a fiber.
    pub value: Option<QuadExt>,
    pub size: usize,
}

/// Which sufficient condition of the union-of-designs criterion applies to a
/// fiber triple: `s̃_{ij} + s̃_{jk} − 2 − t_j` is at most 0, 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCase {
    pub triple: (usize, usize, usize),
    pub case: Option<u8>,
    pub excess: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherentConfigReport {
    pub fiber_sizes: Vec<usize>,
    pub relations: Vec<Relation>,
    pub type_matrix: Vec<Vec<usize>>,
    pub partition: bool,
    pub transpose_closed: bool,
    pub diagonal_separated: bool,
    pub axiom_iv: bool,
    pub fiber_strengths: Vec<usize>,
    pub lemma_hypothesis: bool,
    pub lemma_cases: Vec<LemmaCase>,
    pub symmetric_fibers: bool,
    #[serde(skip)]
    n: usize,
    #[serde(skip)]
    rel: Vec<u32>,
    #[serde(skip)]
    intersection: Vec<u32>,
}

impl CoherentConfigReport {
    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn relation_of(&self, x: usize, y: usize) -> usize {
        self.rel[x * self.n + y] as usize
    }

    /// `p^h_{r1,r2}`: the number of `z` with `(x,z) ∈ r1`, `(z,y) ∈ r2` for
    /// any `(x,y) ∈ h`.
    pub fn p(&self, h: usize, r1: usize, r2: usize) -> u64 {
        let r = self.relations.len();
        self.intersection[(h * r + r1) * r + r2] as u64
    }

    /// Relation ids inside `X_i × X_j`, diagonal first, then by descending value.
    pub fn block(&self, i: usize, j: usize) -> Vec<usize> {
        self.relations.iter().filter(|r| r.fibers == (i, j)).map(|r| r.id).collect()
    }

    pub fn find(&self, i: usize, j: usize, value: Option<&QuadExt>) -> Option<usize> {
        self.relations.iter().find(|r| r.fibers == (i, j) && r.value.as_ref() == value).map(|r| r.id)
    }

    pub fn transpose(&self, r: usize) -> Option<usize> {
        let rel = &self.relations[r];
        self.find(rel.fibers.1, rel.fibers.0, rel.value.as_ref())
    }

    pub fn valency(&self, r: usize) -> u64 {
        let i = self.relations[r].fibers.0;
        let diag = self.find(i, i, None).unwrap();
        let t = self.transpose(r).unwrap_or(r);
        self.p(diag, r, t)
    }

    /// Nonzero `p^h_{r1,r2}` as `(h, r1, r2, count)`.
    pub fn intersection_numbers(&self) -> Vec<(usize, usize, usize, u64)> {
        let r = self.relations.len();
        let mut out = Vec::new();
        for h in 0..r {
            for a in 0..r {
                for b in 0..r {
                    let v = self.p(h, a, b);
                    if v > 0 {
                        out.push((h, a, b, v));
                    }
                }
            }
        }
        out
    }
}

type Histogram = Vec<(u32, u32)>;

fn histogram(rel: &[u32], n: usize, r: usize, x: usize, y: usize, counts: &mut [u32], touched: &mut Vec<u32>) -> Histogram {
    for z in 0..n {
        let key = rel[x * n + z] * r as u32 + rel[z * n + y];
        if counts[key as usize] == 0 {
            touched.push(key);
        }
        counts[key as usize] += 1;
    }
    touched.sort_unstable();
    let out = touched.iter().map(|&k| (k, counts[k as usize])).collect();
    for &k in touched.iter() {
        counts[k as usize] = 0;
    }
    touched.clear();
    out
}

fn first_difference(a: &Histogram, b: &Histogram) -> (u32, u32, u32) {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (Some(&(ka, ca)), Some(&(kb, cb))) if ka == kb => {
                if ca != cb {
                    return (ka, ca, cb);
                }
                i += 1;
                j += 1;
            }
            (Some(&(ka, ca)), Some(&(kb, _))) if ka < kb => return (ka, ca, 0),
            (Some(_), Some(&(kb, cb))) => return (kb, 0, cb),
            (Some(&(ka, ca)), None) => return (ka, ca, 0),
            (None, Some(&(kb, cb))) => return (kb, 0, cb),
            (None, None) => unreachable!("histograms are equal"),
        }
    }
}

fn has_value(f: &Fibered, a: usize, b: usize, v: &QuadExt) -> (bool, bool) {
    let g = &f.gram;
    let row = |i: usize, other: &std::ops::Range<usize>| other.clone().any(|j| g.entry(i, j) == v);
    let some = f.fibers[a].clone().any(|i| row(i, &f.fibers[b]));
    let all = f.fibers[a].clone().all(|i| row(i, &f.fibers[b])) && f.fibers[b].clone().all(|j| row(j, &f.fibers[a]));
    (some, all)
}

/// Partitions `X × X` by fiber pair and inner product and checks the
/// coherent-configuration axioms by enumerating every triple.
pub fn build_coherent_config(fibered: &Fibered) -> Result<CoherentConfigReport, StructureError> {
    let g = &fibered.gram;
    let n = g.size();
    let k = fibered.fibers.len();
    let fiber_of: Vec<usize> = (0..n).map(|p| fibered.fibers.iter().position(|r| r.contains(&p)).unwrap()).collect();

    let mut relations = Vec::new();
    let mut type_matrix = vec![vec![0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let before = relations.len();
            if i == j {
                relations.push(Relation { id: before, fibers: (i, i), value: None, size: fibered.fibers[i].len() });
            }
            for v in fibered.block_values(i, j).into_iter().rev() {
                relations.push(Relation { id: relations.len(), fibers: (i, j), value: Some(v), size: 0 });
            }
            type_matrix[i][j] = relations.len() - before;
        }
    }
    let r = relations.len();
    let mut rel = vec![0u32; n * n];
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (fiber_of[x], fiber_of[y]);
            let value = (x != y).then(|| g.entry(x, y));
            let id = relations
                .iter()
                .position(|rl| rl.fibers == (a, b) && rl.value.as_ref() == value)
                .expect("every entry has a relation");
            rel[x * n + y] = id as u32;
        }
    }
    for x in 0..n * n {
        if relations[rel[x] as usize].value.is_some() {
            relations[rel[x] as usize].size += 1;
        }
    }

    // (i) holds by construction; (ii) transposes; (iii) diagonal relations
    let partition = relations.iter().all(|rl| rl.size > 0);
    let transpose_closed = (0..n).all(|x| {
        (0..n).all(|y| {
            let (a, b) = (&relations[rel[x * n + y] as usize], &relations[rel[y * n + x] as usize]);
            a.value == b.value && a.fibers == (b.fibers.1, b.fibers.0)
        })
    });
    let diagonal_separated = (0..n).all(|x| (0..n).all(|y| (x == y) == relations[rel[x * n + y] as usize].value.is_none()));

    let mut first_pair = vec![None; r];
    for x in 0..n {
        for y in 0..n {
            let h = rel[x * n + y] as usize;
            if first_pair[h].is_none() {
                first_pair[h] = Some((x, y));
            }
        }
    }
    let canonical: Vec<Histogram> = first_pair
        .par_iter()
        .map(|p| {
            let (x, y) = p.expect("relations are nonempty");
            histogram(&rel, n, r, x, y, &mut vec![0; r * r], &mut Vec::new())
        })
        .collect();
    let failure = (0..n).into_par_iter().find_map_first(|x| {
        let mut counts = vec![0u32; r * r];
        let mut touched = Vec::new();
        (0..n).find_map(|y| {
            let h = rel[x * n + y] as usize;
            let hist = histogram(&rel, n, r, x, y, &mut counts, &mut touched);
            (hist != canonical[h]).then(|| (h, x, y, first_difference(&canonical[h], &hist)))
        })
    });
    if let Some((h, x, y, (key, c0, c1))) = failure {
        return Err(StructureError::AxiomIvFails {
            r1: key as usize / r,
            r2: key as usize % r,
            h,
            first: first_pair[h].unwrap(),
            first_count: c0 as u64,
            second: (x, y),
            second_count: c1 as u64,
        });
    }
    let mut intersection = vec![0u32; r * r * r];
    for (h, hist) in canonical.iter().enumerate() {
        for &(key, c) in hist {
            intersection[h * r * r + key as usize] = c;
        }
    }

    let mut fiber_strengths = Vec::new();
    for i in 0..k {
        fiber_strengths.push(design_strength_gram(&fibered.fiber_gram(i), 7)?.strength);
    }
    let one = QuadExt::one();
    let minus_one = QuadExt::from_int(-1);
    let mut lemma_hypothesis = true;
    for i in 0..k {
        for j in 0..k {
            let (some, all) = has_value(fibered, i, j, &one);
            let same = if i == j { true } else { !some || all };
            let (some, all) = has_value(fibered, i, j, &minus_one);
            lemma_hypothesis &= same && (!some || all);
        }
    }
    let s_tilde = |i: usize, j: usize| {
        let vals: BTreeSet<QuadExt> = fibered.block_values(i, j).into_iter().filter(|v| *v != one && *v != minus_one).collect();
        vals.len() as i64
    };
    let mut lemma_cases = Vec::new();
    for i in 0..k {
        for j in 0..k {
            for h in 0..k {
                let excess = s_tilde(i, j) + s_tilde(j, h) - 2 - fiber_strengths[j] as i64;
                let case = match excess {
                    e if e <= 0 => Some(1),
                    1 => Some(2),
                    2 => Some(3),
                    _ => None,
                };
                lemma_cases.push(LemmaCase { triple: (i, j, h), case, excess });
            }
        }
    }
    let symmetric_fibers = (0..k).all(|i| {
        fibered.fibers[i].clone().all(|x| fibered.fibers[i].clone().all(|y| rel[x * n + y] == rel[y * n + x]))
    });

    Ok(CoherentConfigReport {
        fiber_sizes: fibered.sizes(),
        relations,
        type_matrix,
        partition,
        transpose_closed,
        diagonal_separated,
        axiom_iv: true,
        fiber_strengths,
        lemma_hypothesis,
        lemma_cases,
        symmetric_fibers,
        n,
        rel,
        intersection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{catalog, PointConfig};
    use crate::minimaltype::{shipped_alpha, verify_certificate};
    use crate::structure::decompose;

    pub(crate) fn d7() -> Fibered {
        let c = catalog("etf_7_28_design").unwrap();
        let cert = verify_certificate(&c, &shipped_alpha("etf_7_28_design").unwrap()).unwrap();
        decompose(&c, &cert).unwrap().joint
    }

    #[test]
    fn d7_type_matrix() {
        let f = d7();
        let cc = build_coherent_config(&f).unwrap();
        assert_eq!(cc.type_matrix, vec![vec![3, 2, 3], vec![2, 4, 2], vec![3, 2, 3]]);
        assert_eq!(cc.fiber_sizes, vec![12, 32, 12]);
        assert!(cc.partition && cc.transpose_closed && cc.diagonal_separated && cc.axiom_iv);
        assert!(cc.symmetric_fibers && cc.lemma_hypothesis);
        assert_eq!(cc.fiber_strengths, vec![3, 3, 3]);
        assert!(cc.lemma_cases.iter().all(|c| c.case == Some(1)));
        assert_eq!(cc.relation_count(), 24);
    }

    #[test]
    fn d7_valencies() {
        let cc = build_coherent_config(&d7()).unwrap();
        let x1_minus = cc.find(0, 0, Some(&QuadExt::from_int(-1))).unwrap();
        assert_eq!(cc.valency(x1_minus), 1);
        assert_eq!(cc.valency(cc.find(0, 0, Some(&QuadExt::zero())).unwrap()), 10);
        let x2_third = cc.find(1, 1, Some(&QuadExt::from_frac(1, 3))).unwrap();
        assert_eq!(cc.valency(x2_third), 15);
        // 12 + 32 + 12 points: every row of each block sums to the fiber size
        for i in 0..3 {
            for j in 0..3 {
                let total: u64 = cc.block(i, j).iter().map(|&r| cc.valency(r)).sum();
                assert_eq!(total, cc.fiber_sizes[j] as u64);
            }
        }
    }

    #[test]
    fn hexagon_is_a_three_class_scheme() {
        let g = catalog("hexagon").unwrap().gram().unwrap();
        let cc = build_coherent_config(&Fibered::new(g, &[6]).unwrap()).unwrap();
        assert_eq!(cc.type_matrix, vec![vec![4]]);
        let values: Vec<_> = cc.relations.iter().map(|r| r.value.clone()).collect();
        let f = QuadExt::from_frac;
        assert_eq!(values, vec![None, Some(f(1, 2)), Some(f(-1, 2)), Some(f(-1, 1))]);
        assert!(cc.symmetric_fibers);
        assert_eq!(cc.p(2, 1, 1), 1);
        assert_eq!(cc.p(3, 1, 2), 2);
    }

    #[test]
    fn generic_points_fail_axiom_iv() {
        // stereographic images of a few rational parameters
        let pts: Vec<Vec<QuadExt>> = [(1, 2), (2, 3), (-1, 5), (3, -4), (0, 7)]
            .iter()
            .map(|&(s, t)| {
                let den = 1 + s * s + t * t;
                vec![QuadExt::from_frac(2 * s, den), QuadExt::from_frac(2 * t, den), QuadExt::from_frac(s * s + t * t - 1, den)]
            })
            .collect();
        let c = PointConfig::from_points(pts, "generic").unwrap();
        let g = c.gram().unwrap();
        match build_coherent_config(&Fibered::new(g, &[5]).unwrap()) {
            Err(StructureError::AxiomIvFails { first_count, second_count, .. }) => assert_ne!(first_count, second_count),
            other => panic!("expected a failure, got {other:?}"),
        }
    }

    #[test]
    fn decompositions_of_tight_designs_are_coherent() {
        let c = catalog("hexagon").unwrap();
        let cert = verify_certificate(&c, &shipped_alpha("hexagon").unwrap()).unwrap();
        let f = decompose(&c, &cert).unwrap().joint;
        let cc = build_coherent_config(&f).unwrap();
        assert!(cc.axiom_iv);
    }
}
