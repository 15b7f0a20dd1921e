//! Arithmetic in prime fields `F_p` with `p < 2^64`.
//!
//! Elements are plain `u64` values kept in canonical form `[0, p)`. The
//! modulus carries a flag for the common `p < 2^32` case so that products fit
//! in a `u64` and avoid 128-bit division.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{value} has no inverse modulo {modulus}")]
    ZeroInverse { value: u64, modulus: u64 },
}

/// A prime `p` defining the field `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus {
    p: u64,
    /// `⌊2^64 / p⌋`, used for Barrett reduction when `p < 2^32`.
    barrett: u64,
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(Self { p, barrett: ((1u128 << 64) / p as u128) as u64 })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.p
    }

    #[inline]
    pub(crate) fn is_small(self) -> bool {
        self.p <= u32::MAX as u64
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        // The quotient estimate is low by at most one.
        let q = ((a as u128 * self.barrett as u128) >> 64) as u64;
        let r = a - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.p {
            s.wrapping_sub(self.p)
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.is_small() {
            self.reduce(a * b)
        } else {
            mul_mod_u64(a, b, self.p)
        }
    }

    pub fn pow(self, base: u64, exp: u64) -> u64 {
        pow_mod_u64(base, exp, self.p)
    }

    /// Multiplicative inverse of `a`, or [`FieldError::ZeroInverse`] when `a ≡ 0`.
    pub fn inv(self, a: u64) -> Result<u64, FieldError> {
        mod_inverse(a, self)
    }
}

impl fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// Returns `b` in `[1, p-1]` with `a·b ≡ 1 (mod p)`.
pub fn mod_inverse(a: u64, p: PrimeModulus) -> Result<u64, FieldError> {
    let m = p.get();
    let a = a % m;
    if a == 0 {
        return Err(FieldError::ZeroInverse { value: a, modulus: m });
    }
    // Extended Euclid on (m, a), tracking only the coefficient of `a`.
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    Ok(t0.rem_euclid(m as i128) as u64)
}

#[inline]
fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, PrimeModulus::new(7).unwrap()), Ok(1));
        assert_eq!(mod_inverse(3, PrimeModulus::new(5).unwrap()), Ok(2));
        let f11 = PrimeModulus::new(11).unwrap();
        let brute = (1..11).find(|b| 7 * b % 11 == 1).unwrap();
        assert_eq!(brute, 8);
        assert_eq!(mod_inverse(7, f11), Ok(8));
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = PrimeModulus::new(13).unwrap();
        assert!(matches!(mod_inverse(0, f), Err(FieldError::ZeroInverse { .. })));
        assert!(matches!(mod_inverse(26, f), Err(FieldError::ZeroInverse { .. })));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for p in (2..1000u64).filter(|&p| trial_division(p)) {
            let f = PrimeModulus::new(p).unwrap();
            for a in 1..p {
                let b = f.inv(a).unwrap();
                assert!((1..p).contains(&b));
                assert_eq!(a * b % p, 1, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial_division(n), "n={n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557)); // largest prime below 2^64
        assert!(!is_prime(18_446_744_073_709_551_615));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(PrimeModulus::new(603).is_err());
        assert!(PrimeModulus::new(613).is_ok());
    }

    #[test]
    fn barrett_reduction_is_exact() {
        for p in [2u64, 3, 5, 163, 65_521, 4_294_967_291] {
            let f = PrimeModulus::new(p).unwrap();
            let samples = [0, 1, p - 1, p, p + 1, 2 * p - 1, u64::MAX, u64::MAX - 1, (p - 1) * (p - 1)];
            for &a in &samples {
                assert_eq!(f.reduce(a), a % p, "p={p} a={a}");
            }
            let mut x = 0x9e37_79b9_7f4a_7c15u64;
            for _ in 0..10_000 {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                assert_eq!(f.reduce(x), x % p);
            }
        }
    }

    #[test]
    fn large_modulus_arithmetic() {
        let p = 18_446_744_073_709_551_557u64;
        let f = PrimeModulus::new(p).unwrap();
        let a = p - 2;
        let b = f.inv(a).unwrap();
        assert_eq!(f.mul(a, b), 1);
        assert_eq!(f.add(p - 1, p - 1), p - 2);
        assert_eq!(f.sub(1, 2), p - 1);
        assert_eq!(f.neg(0), 0);
    }
}
