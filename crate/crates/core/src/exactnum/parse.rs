use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{NumError, QuadExt, Rational};

/// Cursor over the whitespace-free input; columns are reported 1-based
/// against the original text.
struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let chars = src
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (src[..i].chars().count() + 1, c))
            .collect();
        Cursor { chars, pos: 0, src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(col, _)| col)
            .unwrap_or_else(|| self.src.chars().count() + 1)
    }

    fn err(&self, message: impl Into<String>) -> NumError {
        NumError::Parse { message: message.into(), column: self.column() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let n = w.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().map(|&(_, c)| c).eq(w.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn sign(&mut self) -> Option<bool> {
        if self.eat('-') {
            Some(true)
        } else if self.eat('+') {
            Some(false)
        } else {
            None
        }
    }

    fn digits(&mut self) -> Result<BigInt, NumError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        Ok(s.parse().expect("ascii digits"))
    }

    /// Unsigned `p`, `p/q` or decimal `p.q`.
    fn unsigned_rational(&mut self) -> Result<Rational, NumError> {
        let p = self.digits()?;
        if self.eat('/') {
            let col = self.column();
            let q = self.digits()?;
            if q.is_zero() {
                return Err(NumError::Parse { message: "zero denominator".into(), column: col });
            }
            return Ok(Rational::new(p, q));
        }
        if self.eat('.') {
            let start = self.pos;
            let frac = self.digits()?;
            let places = (self.pos - start) as u32;
            let scale = BigInt::from(10).pow(places);
            return Ok(Rational::new(p * &scale + frac, scale));
        }
        Ok(Rational::from_integer(p))
    }

    fn sqrt_call(&mut self) -> Result<u64, NumError> {
        if !self.eat_word("sqrt") {
            return Err(self.err("expected sqrt("));
        }
        if !self.eat('(') {
            return Err(self.err("expected '('"));
        }
        let col = self.column();
        let n = self.digits()?;
        if !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        u64::try_from(n).map_err(|_| NumError::Parse { message: "radicand too large".into(), column: col })
    }

    fn at_sqrt(&self) -> bool {
        self.peek() == Some('s')
    }

    /// `[coef '*'] sqrt(n)` or a bare rational.
    fn term(&mut self) -> Result<(Rational, Option<u64>), NumError> {
        if self.at_sqrt() {
            return Ok((Rational::one(), Some(self.sqrt_call()?)));
        }
        let r = self.unsigned_rational()?;
        if self.eat('*') {
            return Ok((r, Some(self.sqrt_call()?)));
        }
        Ok((r, None))
    }
}

/// Parses a scalar such as `3`, `-7/4`, `1/2-1/3*sqrt(5)`, `sqrt(2)` or
/// `2*sqrt(3)+1`. Whitespace anywhere is ignored.
pub fn parse_scalar(s: &str) -> Result<QuadExt, NumError> {
    let mut cur = Cursor::new(s);
    if cur.peek().is_none() {
        return Err(cur.err("empty scalar"));
    }
    let mut rat = Rational::zero();
    let mut radical: Option<(Rational, u64)> = None;
    let mut first = true;
    while cur.peek().is_some() {
        let neg = match cur.sign() {
            Some(n) => n,
            None if first => false,
            None => return Err(cur.err("expected '+' or '-'")),
        };
        first = false;
        let (mut v, rad) = cur.term()?;
        if neg {
            v = -v;
        }
        match rad {
            None => rat += v,
            Some(n) => {
                if let Some((c, m)) = radical.as_mut() {
                    if *m != n {
                        return Err(cur.err("more than one radicand"));
                    }
                    *c += v;
                } else {
                    radical = Some((v, n));
                }
            }
        }
    }
    let mut out = QuadExt::rational(rat);
    if let Some((c, n)) = radical {
        let r = QuadExt::new(Rational::zero(), c, n);
        out = out.checked_add(&r).expect("rational plus radical");
    }
    Ok(out)
}

pub fn parse_rational(s: &str) -> Result<Rational, NumError> {
    let q = parse_scalar(s)?;
    q.as_rational()
        .cloned()
        .ok_or(NumError::Parse { message: "expected a rational value".into(), column: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    #[test]
    fn accepted_forms() {
        assert_eq!(parse_scalar("3").unwrap(), QuadExt::from_int(3));
        assert_eq!(parse_scalar(" -7 / 4 ").unwrap(), QuadExt::from_frac(-7, 4));
        assert_eq!(parse_scalar("0.25").unwrap(), QuadExt::from_frac(1, 4));
        let x = QuadExt::new(rat(1, 2), rat(-1, 3), 5);
        assert_eq!(parse_scalar("1/2-1/3*sqrt(5)").unwrap(), x);
        assert_eq!(parse_scalar("-1/3 * sqrt(5) + 1/2").unwrap(), x);
        assert_eq!(parse_scalar("sqrt(8)").unwrap(), QuadExt::new(rat(0, 1), rat(2, 1), 2));
        assert_eq!(parse_scalar("-sqrt(9)").unwrap(), QuadExt::from_int(-3));
        assert_eq!(parse_scalar("+2").unwrap(), QuadExt::from_int(2));
    }

    #[test]
    fn rejected_forms() {
        for bad in ["", "1/0", "1+", "sqrt(2)+sqrt(3)", "abc", "1/", "2*3", "sqrt 2"] {
            assert!(parse_scalar(bad).is_err(), "{bad:?} should fail");
        }
        match parse_scalar("1/2 + x") {
            Err(NumError::Parse { column, .. }) => assert_eq!(column, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rational_only() {
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert!(parse_rational("sqrt(2)").is_err());
    }

    proptest! {
        #[test]
        fn display_roundtrip(a in -1000i64..1000, b in 1i64..50, c in -1000i64..1000,
                             e in 1i64..50, n in 0u64..200) {
            let x = QuadExt::new(rat(a, b), rat(c, e), n);
            prop_assert_eq!(parse_scalar(&x.to_string()).unwrap(), x);
        }
    }
}
