use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sqfree::{big_square_free, square_free_decompose};
use super::{NumError, Rational};

/// `rat + coef·√radicand` with `radicand` square-free.
///
/// Canonical form: `radicand == 0` exactly when `coef == 0`, and
/// `radicand ≥ 2` otherwise. Equality and hashing are therefore syntactic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    rat: Rational,
    coef: Rational,
    radicand: u64,
}

impl QuadExt {
    /// Builds `rat + coef·√n` for any `n ≥ 0`, pulling square factors out of
    /// `n` and collapsing perfect squares to rationals.
    pub fn new(rat: Rational, coef: Rational, n: u64) -> Self {
        if coef.is_zero() || n == 0 {
            return Self::rational(rat);
        }
        let d = square_free_decompose(n);
        let coef = coef * Rational::from_integer(BigInt::from(d.square));
        if d.core == 1 {
            Self::rational(rat + coef)
        } else {
            QuadExt { rat, coef, radicand: d.core }
        }
    }

    pub fn rational(r: Rational) -> Self {
        QuadExt { rat: r, coef: Rational::zero(), radicand: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(p: i64, q: i64) -> Self {
        Self::rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// `√n` for a non-negative integer.
    pub fn sqrt_int(n: u64) -> Self {
        Self::new(Rational::zero(), Rational::one(), n)
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rat_part(&self) -> &Rational {
        &self.rat
    }

    pub fn coef(&self) -> &Rational {
        &self.coef
    }

    /// 0 for pure rationals.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.coef.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.radicand == 0 && self.rat.is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 0
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.rat)
    }

    /// Integer value, if this is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    fn common_radicand(&self, other: &Self) -> Result<u64, NumError> {
        match (self.radicand, other.radicand) {
            (0, r) | (r, 0) => Ok(r),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(NumError::IncompatibleRadicands { left: a, right: b }),
        }
    }

    fn build(rat: Rational, coef: Rational, radicand: u64) -> Self {
        if coef.is_zero() {
            Self::rational(rat)
        } else {
            QuadExt { rat, coef, radicand }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, NumError> {
        let n = self.common_radicand(other)?;
        Ok(Self::build(&self.rat + &other.rat, &self.coef + &other.coef, n))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, NumError> {
        let n = self.common_radicand(other)?;
        Ok(Self::build(&self.rat - &other.rat, &self.coef - &other.coef, n))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, NumError> {
        let n = self.common_radicand(other)?;
        if n == 0 {
            return Ok(Self::rational(&self.rat * &other.rat));
        }
        let nr = Rational::from_integer(BigInt::from(n));
        let rat = &self.rat * &other.rat + &self.coef * &other.coef * nr;
        let coef = &self.rat * &other.coef + &self.coef * &other.rat;
        Ok(Self::build(rat, coef, n))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, NumError> {
        self.checked_mul(&other.checked_recip()?)
    }

    pub fn checked_recip(&self) -> Result<Self, NumError> {
        if self.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Self::rational(self.rat.recip()));
        }
        let n = Rational::from_integer(BigInt::from(self.radicand));
        let norm = &self.rat * &self.rat - &self.coef * &self.coef * n;
        Ok(Self::build(&self.rat / &norm, -&self.coef / &norm, self.radicand))
    }

    /// `a − b√n`.
    pub fn conjugate(&self) -> Self {
        Self::build(self.rat.clone(), -self.coef.clone(), self.radicand)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("powers stay in one field");
        }
        acc
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn square(&self) -> Self {
        self.checked_mul(self).expect("a value is compatible with itself")
    }

    /// Exact sign: −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        sign_single(&self.rat, &self.coef, self.radicand)
    }

    /// Square root inside a single-radical field, if one exists.
    ///
    /// Rationals always have a root of the form `s·√r / q`. For an irrational
    /// `a + b√n` a root `p + q√n` exists only when `a² − n b²` is a rational
    /// square.
    pub fn sqrt(&self) -> Option<Self> {
        match self.signum() {
            -1 => return None,
            0 => return Some(Self::zero()),
            _ => {}
        }
        if self.is_rational() {
            return sqrt_rational(&self.rat).ok();
        }
        let n = Rational::from_integer(BigInt::from(self.radicand));
        let disc = &self.rat * &self.rat - &self.coef * &self.coef * &n;
        let root = rational_sqrt_exact(&disc)?;
        let two = Rational::from_integer(BigInt::from(2));
        for p2 in [(&self.rat + &root) / &two, (&self.rat - &root) / &two] {
            if p2.is_negative() {
                continue;
            }
            if let Some(p) = rational_sqrt_exact(&p2) {
                if p.is_zero() {
                    // a = n q², b = 0 is excluded since coef != 0
                    continue;
                }
                let q = &self.coef / (&two * &p);
                let cand = Self::build(p, q, self.radicand);
                if cand.signum() >= 0 && cand.square() == *self {
                    return Some(cand);
                }
                let neg = -cand;
                if neg.signum() >= 0 && neg.square() == *self {
                    return Some(neg);
                }
            }
        }
        // a pure multiple of √n squared never has a nonzero coefficient
        None
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rat.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return r;
        }
        r + self.coef.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }
}

/// `√r` for a non-negative rational: `√(p/q) = √(pq)/q`.
pub(crate) fn sqrt_rational(r: &Rational) -> Result<QuadExt, NumError> {
    if r.is_negative() {
        return Err(NumError::Parse { message: "square root of a negative value".into(), column: 0 });
    }
    if r.is_zero() {
        return Ok(QuadExt::zero());
    }
    let pq = (r.numer() * r.denom()).to_biguint().expect("non-negative");
    let (square, core) = big_square_free(&pq)?;
    let coef = Rational::new(BigInt::from_biguint(Sign::Plus, square), r.denom().clone());
    if core == 1 {
        Ok(QuadExt::rational(coef))
    } else {
        Ok(QuadExt { rat: Rational::zero(), coef, radicand: core })
    }
}

fn rational_sqrt_exact(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().to_biguint()?;
    let d = r.denom().to_biguint()?;
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == n && &sd * &sd == d).then(|| {
        Rational::new(BigInt::from_biguint(Sign::Plus, sn), BigInt::from_biguint(Sign::Plus, sd))
    })
}

fn sgn(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign of `a + b√n` for a non-square positive `n` (or `b = 0`).
fn sign_single(a: &Rational, b: &Rational, n: u64) -> i32 {
    sign_single_big(a, b, &BigUint::from(n))
}

fn sign_single_big(a: &Rational, b: &Rational, n: &BigUint) -> i32 {
    let (sa, sb) = (sgn(a), sgn(b));
    if sb == 0 || n.is_zero() {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    let nr = Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()));
    // a² ≠ b²n because √n is irrational
    if a * a > b * b * nr {
        sa
    } else {
        sb
    }
}

/// Sign of `a + b√n + c√m` with `n ≠ m` square-free and `b, c ≠ 0`.
fn sign_two_radicals(a: &Rational, b: &Rational, n: u64, c: &Rational, m: u64) -> i32 {
    let nr = Rational::from_integer(BigInt::from(n));
    let mr = Rational::from_integer(BigInt::from(m));
    let (sb, sc) = (sgn(b), sgn(c));
    let s = if sb == sc {
        sb
    } else if b * b * &nr > c * c * &mr {
        sb
    } else {
        sc
    };
    let sa = sgn(a);
    if sa == 0 || sa == s {
        return if sa == 0 { s } else { sa };
    }
    // compare a² with (b√n + c√m)² = b²n + c²m + 2bc√(nm)
    let two = Rational::from_integer(BigInt::from(2));
    let rat = a * a - b * b * nr - c * c * mr;
    let coef = -(two * b * c);
    let nm = BigUint::from(n) * BigUint::from(m);
    if sign_single_big(&rat, &coef, &nm) > 0 {
        sa
    } else {
        s
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = match self.checked_sub(other) {
            Ok(diff) => diff.signum(),
            Err(_) => sign_two_radicals(
                &(&self.rat - &other.rat),
                &self.coef,
                self.radicand,
                &(-other.coef.clone()),
                other.radicand,
            ),
        };
        s.cmp(&0)
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for QuadExt {
    fn from(r: Rational) -> Self {
        Self::rational(r)
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::build(-self.rat, -self.coef, self.radicand)
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::build(-self.rat.clone(), -self.coef.clone(), self.radicand)
    }
}

// Operator forms panic on mixed radicands; library code that can see
// user-supplied fields goes through the `checked_*` methods instead.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadExt> for &QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$method(rhs)
            }
        }
        impl $tr<QuadExt> for &QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rat)?;
        if !self.is_rational() {
            let sign = if self.coef.is_negative() { '-' } else { '+' };
            write!(f, "{sign}{}*sqrt({})", self.coef.abs(), self.radicand)?;
        }
        Ok(())
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for QuadExt {
    type Err = NumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse_scalar(s)
    }
}

impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    fn q(a: (i64, i64), b: (i64, i64), n: u64) -> QuadExt {
        QuadExt::new(rat(a.0, a.1), rat(b.0, b.1), n)
    }

    #[test]
    fn conjugate_product() {
        let x = q((1, 1), (1, 1), 2);
        let y = q((1, 1), (-1, 1), 2);
        assert_eq!(&x * &y, QuadExt::from_int(-1));
    }

    #[test]
    fn perfect_square_collapses() {
        let x = q((0, 1), (1, 1), 9);
        assert_eq!(x, QuadExt::from_int(3));
        assert!(x.is_rational());
        assert_eq!(QuadExt::sqrt_int(12), q((0, 1), (2, 1), 3));
    }

    #[test]
    fn compare_sqrt2_with_three_halves() {
        assert_eq!(QuadExt::sqrt_int(2).cmp(&QuadExt::from_frac(3, 2)), Ordering::Less);
        assert!(QuadExt::sqrt_int(2) > QuadExt::from_frac(7, 5));
    }

    #[test]
    fn mixed_radicands_are_an_error() {
        let err = QuadExt::sqrt_int(2).checked_add(&QuadExt::sqrt_int(3)).unwrap_err();
        assert_eq!(err, NumError::IncompatibleRadicands { left: 2, right: 3 });
        assert!(QuadExt::sqrt_int(2).checked_mul(&QuadExt::sqrt_int(5)).is_err());
        assert!(QuadExt::sqrt_int(2).checked_add(&QuadExt::from_int(1)).is_ok());
    }

    #[test]
    fn divide_by_zero() {
        assert_eq!(QuadExt::one().checked_div(&QuadExt::zero()), Err(NumError::DivisionByZero));
    }

    #[test]
    fn ordering_across_radicands() {
        // √2 + √3 ≈ 3.146 > π-ish rational 3.14, and √3 − √2 ≈ 0.3178
        let a = QuadExt::sqrt_int(2);
        let b = QuadExt::sqrt_int(3);
        assert!(a < b);
        assert!(QuadExt::from_frac(1, 3) > &b - &QuadExt::from_frac(3, 2));
        let c = q((1, 1), (1, 1), 5); // 3.236
        let d = q((2, 1), (1, 1), 2); // 3.414
        assert!(c < d);
        let e = q((-1, 1), (1, 1), 6); // 1.449
        let f = q((0, 1), (1, 1), 2); // 1.414
        assert!(e > f);
    }

    #[test]
    fn square_roots() {
        assert_eq!(QuadExt::from_frac(2, 3).sqrt().unwrap(), q((0, 1), (1, 3), 6));
        assert_eq!(QuadExt::from_frac(9, 4).sqrt().unwrap(), QuadExt::from_frac(3, 2));
        // (1 + √2)² = 3 + 2√2
        assert_eq!(q((3, 1), (2, 1), 2).sqrt().unwrap(), q((1, 1), (1, 1), 2));
        // (√2 − 1)² = 3 − 2√2
        assert_eq!(q((3, 1), (-2, 1), 2).sqrt().unwrap(), q((-1, 1), (1, 1), 2));
        assert!(q((1, 1), (1, 1), 2).sqrt().is_none());
        assert!(QuadExt::from_int(-4).sqrt().is_none());
    }

    #[test]
    fn display_grammar() {
        assert_eq!(q((1, 2), (-1, 3), 5).to_string(), "1/2-1/3*sqrt(5)");
        assert_eq!(q((0, 1), (1, 1), 6).to_string(), "0+1*sqrt(6)");
        assert_eq!(QuadExt::from_frac(-7, 4).to_string(), "-7/4");
    }

    fn small() -> impl Strategy<Value = (i64, i64)> {
        (-20i64..20, 1i64..9)
    }

    fn elem(n: u64) -> impl Strategy<Value = QuadExt> {
        (small(), small()).prop_map(move |(a, b)| q(a, b, n))
    }

    proptest! {
        #[test]
        fn reciprocal_and_sqrt_roundtrip(x in elem(6)) {
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.checked_recip().unwrap(), QuadExt::one());
            }
            let sq = x.square();
            prop_assert_eq!(sq.sqrt().unwrap(), x.abs());
        }

        #[test]
        fn axioms_on_random_samples(a in small(), b in small(), c in small(), e in small(),
                                    g in small(), h in small(),
                                    n in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10, 15])) {
            let (x, y, z) = (q(a, b, n), q(c, e, n), q(g, h, n));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&(&x - &y) + &y, x.clone());
            if !y.is_zero() {
                prop_assert_eq!(&(&x / &y) * &y, x.clone());
            }
        }

        #[test]
        fn order_matches_floating_point(a in small(), b in small(), c in small(), e in small(),
                                        n in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10]),
                                        m in prop::sample::select(vec![2u64, 3, 5, 11, 13])) {
            let x = q(a, b, n);
            let y = q(c, e, m);
            let (fx, fy) = (x.to_f64(), y.to_f64());
            // the gap is bounded away from zero for these small coefficients
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(x.cmp(&y), fx.partial_cmp(&fy).unwrap());
            } else {
                prop_assert_eq!(x.cmp(&y) == Ordering::Equal, x == y);
            }
        }
    }
}
