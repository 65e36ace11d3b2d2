use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::NumError;

/// `n = square² · core` with `core` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SqFreeDecomp {
    pub square: u64,
    pub core: u64,
}

/// Split `n ≥ 1` into its largest square divisor and a square-free core by
/// trial division. Intended for inputs up to ~10^12.
pub fn square_free_decompose(n: u64) -> SqFreeDecomp {
    assert!(n >= 1, "square_free_decompose needs n >= 1");
    let mut rest = n;
    let mut square = 1u64;
    let mut core = 1u64;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                core *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    core *= rest;
    SqFreeDecomp { square, core }
}

pub fn is_square_free(n: u64) -> bool {
    n >= 1 && square_free_decompose(n).square == 1
}

/// Square-free decomposition of a big integer, returned as `(square, core)`
/// with `core` fitting in a `u64`.
///
/// Trial division runs to `LIMIT`; a leftover cofactor below `LIMIT³` has no
/// repeated prime unless it is itself a perfect square.
pub(crate) fn big_square_free(n: &BigUint) -> Result<(BigUint, u64), NumError> {
    const LIMIT: u64 = 100_000;
    if n.is_zero() {
        return Ok((BigUint::zero(), 0));
    }
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut core = BigUint::one();
    let mut p = 2u64;
    while p <= LIMIT {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        if (&rest % &pb).is_zero() {
            let mut e = 0u32;
            while (&rest % &pb).is_zero() {
                rest /= &pb;
                e += 1;
            }
            square *= pb.pow(e / 2);
            if e % 2 == 1 {
                core *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigUint::one() {
        let r = rest.sqrt();
        if &r * &r == rest {
            square *= r;
        } else if rest < BigUint::from(LIMIT).pow(3) || BigUint::from(p) * BigUint::from(p) > rest {
            core *= rest;
        } else {
            return Err(NumError::RadicandTooLarge(n.to_string()));
        }
    }
    let core = core
        .to_u64()
        .ok_or_else(|| NumError::RadicandTooLarge(n.to_string()))?;
    Ok((square, core))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        assert_eq!(square_free_decompose(12), SqFreeDecomp { square: 2, core: 3 });
        assert_eq!(square_free_decompose(30), SqFreeDecomp { square: 1, core: 30 });
        assert_eq!(square_free_decompose(90), SqFreeDecomp { square: 3, core: 10 });
        assert_eq!(square_free_decompose(1), SqFreeDecomp { square: 1, core: 1 });
        assert_eq!(square_free_decompose(49), SqFreeDecomp { square: 7, core: 1 });
    }

    // Oracle: smallest-prime-factor sieve, factor each n and rebuild.
    #[test]
    fn agrees_with_sieve_factorization_up_to_a_million() {
        const N: usize = 1_000_000;
        let mut spf = vec![0u32; N + 1];
        for i in 2..=N {
            if spf[i] == 0 {
                let mut j = i;
                while j <= N {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        for n in 1..=N {
            let mut m = n;
            let mut square = 1u64;
            let mut core = 1u64;
            while m > 1 {
                let p = spf[m] as usize;
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                square *= (p as u64).pow(e / 2);
                if e % 2 == 1 {
                    core *= p as u64;
                }
            }
            let got = square_free_decompose(n as u64);
            assert_eq!(got, SqFreeDecomp { square, core }, "n = {n}");
            assert_eq!(got.square * got.square * got.core, n as u64);
        }
    }

    #[test]
    fn big_decomposition() {
        let (s, c) = big_square_free(&BigUint::from(72u32)).unwrap();
        assert_eq!((s, c), (BigUint::from(6u32), 2));
        let (s, c) = big_square_free(&BigUint::from(1_000_000_007u64 * 4)).unwrap();
        assert_eq!((s, c), (BigUint::from(2u32), 1_000_000_007));
    }
}
