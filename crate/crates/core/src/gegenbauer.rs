//! Gegenbauer polynomials normalized so that `G_k^{(d)}(1) = h_k(d)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::Serialize;

use crate::exactnum::{binomial, int, NumError, Poly, QuadExt, Rational};

pub const DEFAULT_DEGREE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GegenbauerPoly {
    pub dim: usize,
    pub degree: usize,
    #[serde(serialize_with = "ser_coeffs")]
    pub poly: Poly,
}

fn ser_coeffs<S: serde::Serializer>(p: &Poly, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.coeffs().iter().map(|c| c.to_string()))
}

impl GegenbauerPoly {
    pub fn coeffs(&self) -> &[Rational] {
        self.poly.coeffs()
    }

    pub fn eval(&self, x: &QuadExt) -> Result<QuadExt, NumError> {
        self.poly.eval(x)
    }
}

/// Dimension of the space of degree-`k` harmonics on `S^{d-1}`.
pub fn harm_dim(d: usize, k: usize) -> BigInt {
    let (d, k) = (d as i64, k as i64);
    binomial(d + k - 1, k) - binomial(d + k - 3, k - 2)
}

type Cache = RwLock<HashMap<usize, Arc<Vec<Poly>>>>;
static CACHE: Lazy<Cache> = Lazy::new(Default::default);

/// `G_0 … G_k` for dimension `d`, computed from the three-term recursion
///
/// `(k+1)/(d+2k) G_{k+1} = x G_k − (d+k−3)/(d+2k−4) G_{k−1}`.
fn sequence(d: usize, k: usize) -> Arc<Vec<Poly>> {
    if let Some(v) = CACHE.read().expect("cache lock").get(&d) {
        if v.len() > k {
            return v.clone();
        }
    }
    let di = d as i64;
    let mut seq = vec![Poly::constant(Rational::one()), Poly::linear(int(di))];
    for j in 1..k.max(1) as i64 {
        // the j = 1 ratio is 0/0 at d = 2; its limit is 1
        let back = if j == 1 { Rational::one() } else { Rational::new((di + j - 3).into(), (di + 2 * j - 4).into()) };
        let lead = Rational::new((di + 2 * j).into(), (j + 1).into());
        let x_gk = seq[j as usize].mul(&Poly::linear(Rational::one()));
        let next = x_gk.sub(&seq[j as usize - 1].scale(&back)).scale(&lead);
        seq.push(next);
    }
    let seq = Arc::new(seq);
    let mut w = CACHE.write().expect("cache lock");
    let entry = w.entry(d).or_insert_with(|| seq.clone());
    if entry.len() < seq.len() {
        *entry = seq.clone();
    }
    entry.clone()
}

/// `G_k^{(d)}`; `d = 1` is accepted (the sphere `S^0`), where only `k ≤ 1`
/// is meaningful.
pub fn gegenbauer_poly(d: usize, k: usize) -> GegenbauerPoly {
    assert!(d >= 1, "dimension must be positive");
    let poly = sequence(d, k)[k].clone();
    GegenbauerPoly { dim: d, degree: k, poly }
}

pub fn gegenbauer_eval(d: usize, k: usize, x: &QuadExt) -> Result<QuadExt, NumError> {
    sequence(d, k)[k].eval(x)
}

/// Residual `(k+1)/(d+2k) G_{k+1} − x G_k + (d+k−3)/(d+2k−4) G_{k−1}` for
/// `k ≥ 2`, which must vanish identically.
pub fn recursion_residual(d: usize, k: usize) -> Poly {
    assert!(k >= 2);
    let (di, ki) = (d as i64, k as i64);
    let s = sequence(d, k + 1);
    let lhs = s[k + 1].scale(&Rational::new((ki + 1).into(), (di + 2 * ki).into()));
    let back = Rational::new((di + ki - 3).into(), (di + 2 * ki - 4).into());
    lhs.sub(&s[k].mul(&Poly::linear(Rational::one()))).add(&s[k - 1].scale(&back))
}

/// Whether the coefficients of parity opposite to `k` vanish.
pub fn has_parity(p: &GegenbauerPoly) -> bool {
    p.coeffs().iter().enumerate().all(|(i, c)| (i + p.degree) % 2 == 0 || c.is_zero())
}
