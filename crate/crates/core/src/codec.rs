//! Moving between message units and digit vectors.
//!
//! A message `m ∈ [0, N)` with `N = p_1^r_1 ⋯ p_k^r_k` is split into its CRT
//! residues `m mod p_i^r_i`, and each residue into `r_i` little-endian base
//! `p_i` digits. The way back assembles digits into residues and recombines
//! them as `Σ m_i e_i mod N` with idempotents computed once per block size.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{FieldError, PrimeModulus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("{0} is not prime")]
    CompositeFactor(u64),
    #[error("factors multiply to {product}, not {claimed}")]
    FactorMismatch { claimed: BigUint, product: BigUint },
    #[error("prime {0} appears more than once")]
    DuplicatePrime(u64),
    #[error("exponent of {0} must be at least 1")]
    ZeroExponent(u64),
    #[error("a block size needs at least one prime power")]
    NoFactors,
    #[error("value {value} is outside [0, {bound})")]
    OutOfRange { value: BigUint, bound: BigUint },
    #[error("digit {digit} is not below the base {p}")]
    DigitOverflow { digit: u64, p: u64 },
    #[error("expected {expected} residues, got {got}")]
    ResidueCount { expected: usize, got: usize },
    #[error("cannot parse factor list: {0}")]
    Syntax(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// `p^r` for one prime of the block size.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimePower {
    prime: PrimeModulus,
    exponent: u32,
    modulus: BigUint,
    small_modulus: Option<u64>,
}

impl PrimePower {
    pub fn prime(&self) -> PrimeModulus {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// `p^r`.
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }
}

impl fmt::Debug for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.prime.get(), self.exponent)
    }
}

/// Named block sizes.
pub const PRESETS: &[(&str, &[(u64, u32)])] = &[
    // 16-digit decimal numbers, e.g. card numbers: 10^16 = 2^16 * 5^16
    ("pan16", &[(2, 16), (5, 16)]),
    // just below 2^128, every prime to the fifth power
    ("n128", &[(163, 5), (509, 5), (613, 5)]),
];

/// A block size `N` with its prime-power decomposition and CRT idempotents.
#[derive(Clone, PartialEq, Eq)]
pub struct Factorization {
    n: BigUint,
    factors: Vec<PrimePower>,
    idempotents: Vec<BigUint>,
}

impl Factorization {
    /// Validates a claimed decomposition of `n`. Factors may come in any
    /// order; they are stored by ascending prime.
    pub fn new(n: &BigUint, factors: &[(u64, u32)]) -> Result<Self, CodecError> {
        let built = Self::from_factors(factors)?;
        if &built.n != n {
            return Err(CodecError::FactorMismatch { claimed: n.clone(), product: built.n });
        }
        Ok(built)
    }

    /// Builds `N` as the product of the given prime powers.
    pub fn from_factors(factors: &[(u64, u32)]) -> Result<Self, CodecError> {
        if factors.is_empty() {
            return Err(CodecError::NoFactors);
        }
        let mut sorted = factors.to_vec();
        sorted.sort_unstable();
        let mut powers = Vec::with_capacity(sorted.len());
        for (k, &(p, r)) in sorted.iter().enumerate() {
            if k > 0 && sorted[k - 1].0 == p {
                return Err(CodecError::DuplicatePrime(p));
            }
            let prime = PrimeModulus::new(p).map_err(|e| match e {
                FieldError::NotPrime(p) => CodecError::CompositeFactor(p),
                FieldError::ZeroInverse { .. } => unreachable!(),
            })?;
            if r == 0 {
                return Err(CodecError::ZeroExponent(p));
            }
            let modulus = BigUint::from(p).pow(r);
            let small_modulus = modulus.to_u64();
            powers.push(PrimePower { prime, exponent: r, modulus, small_modulus });
        }
        let n: BigUint = powers.iter().map(|f| &f.modulus).product();
        let idempotents = powers.iter().map(|f| idempotent(&f.modulus, &n)).collect();
        let built = Self { n, factors: powers, idempotents };
        built.check_idempotents();
        Ok(built)
    }

    pub fn preset(name: &str) -> Result<Self, CodecError> {
        PRESETS
            .iter()
            .find(|(key, _)| *key == name)
            .map(|(_, factors)| Self::from_factors(factors))
            .unwrap_or_else(|| Err(CodecError::UnknownPreset(name.to_string())))
    }

    fn check_idempotents(&self) {
        let mut total = BigUint::zero();
        for (i, e) in self.idempotents.iter().enumerate() {
            for (j, f) in self.factors.iter().enumerate() {
                let want = if i == j { BigUint::one() % &f.modulus } else { BigUint::zero() };
                assert_eq!(e % &f.modulus, want, "idempotent {i} fails modulo factor {j}");
            }
            total += e;
        }
        assert_eq!(total % &self.n, BigUint::one() % &self.n);
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    /// `e_i ≡ 1 (mod p_i^r_i)`, `e_i ≡ 0` modulo every other factor.
    pub fn idempotents(&self) -> &[BigUint] {
        &self.idempotents
    }

    pub fn pairs(&self) -> Vec<(u64, u32)> {
        self.factors.iter().map(|f| (f.prime.get(), f.exponent)).collect()
    }

    /// `p1^r1 p2^r2 …`, the form used in key files.
    pub fn factor_text(&self) -> String {
        self.factors
            .iter()
            .map(|f| format!("{}^{}", f.prime.get(), f.exponent))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn check_message(&self, m: &BigUint) -> Result<(), CodecError> {
        if m >= &self.n {
            return Err(CodecError::OutOfRange { value: m.clone(), bound: self.n.clone() });
        }
        Ok(())
    }

    /// The map `m ↦ (m mod p_i^r_i)_i`.
    pub fn crt_split(&self, m: &BigUint) -> Result<ResidueTuple, CodecError> {
        self.check_message(m)?;
        let small = m.to_u64();
        Ok(ResidueTuple(
            self.factors
                .iter()
                .map(|f| match (small, f.small_modulus) {
                    (Some(m), Some(q)) => BigUint::from(m % q),
                    _ => m % &f.modulus,
                })
                .collect(),
        ))
    }

    /// The unique `m ∈ [0, N)` with the given residues, as `Σ m_i e_i mod N`.
    pub fn crt_combine(&self, t: &ResidueTuple) -> Result<BigUint, CodecError> {
        if t.0.len() != self.factors.len() {
            return Err(CodecError::ResidueCount { expected: self.factors.len(), got: t.0.len() });
        }
        let mut acc = BigUint::zero();
        for ((m, f), e) in t.0.iter().zip(&self.factors).zip(&self.idempotents) {
            if m >= &f.modulus {
                return Err(CodecError::OutOfRange { value: m.clone(), bound: f.modulus.clone() });
            }
            acc += m * e;
        }
        Ok(acc % &self.n)
    }
}

impl fmt::Debug for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Factorization({} = {})", self.n, self.factor_text())
    }
}

impl FromStr for Factorization {
    type Err = CodecError;

    /// Parses `2^3,5^4` (commas or whitespace between factors; `p` alone means `p^1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pairs = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_prime_power)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_factors(&pairs)
    }
}

pub(crate) fn parse_prime_power(token: &str) -> Result<(u64, u32), CodecError> {
    let bad = || CodecError::Syntax(format!("`{token}` is not of the form p^r"));
    let (p, r) = match token.split_once('^') {
        Some((p, r)) => (p, r),
        None => (token, "1"),
    };
    let p = p.parse().map_err(|_| bad())?;
    let r = r.parse().map_err(|_| bad())?;
    Ok((p, r))
}

/// `e = Q · (Q^{-1} mod M) mod N` with `Q = N / M`.
fn idempotent(m: &BigUint, n: &BigUint) -> BigUint {
    let q = n / m;
    let gcd = BigInt::from(m.clone()).extended_gcd(&BigInt::from(q.clone()));
    assert!(gcd.gcd.is_one(), "prime powers of distinct primes are coprime");
    let inv = gcd.y.mod_floor(&BigInt::from(m.clone()));
    (q * inv.to_biguint().expect("reduced into [0, m)")) % n
}

/// `(m_1, …, m_k)` with `m_i < p_i^r_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueTuple(Vec<BigUint>);

impl ResidueTuple {
    pub fn new(residues: Vec<BigUint>) -> Self {
        ResidueTuple(residues)
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<BigUint> {
        self.0
    }
}

/// Little-endian base-`p` digits `(α_0, …, α_{r-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitVector(Vec<u64>);

impl DigitVector {
    pub fn new(digits: Vec<u64>) -> Self {
        DigitVector(digits)
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

impl Deref for DigitVector {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for DigitVector {
    fn from(v: Vec<u64>) -> Self {
        DigitVector(v)
    }
}

/// Exactly `r` little-endian base-`p` digits of `a`, zero padded.
pub fn to_digits(a: &BigUint, p: PrimeModulus, r: u32) -> Result<DigitVector, CodecError> {
    let base = p.get();
    let mut digits = Vec::with_capacity(r as usize);
    if let Some(bound) = base.checked_pow(r) {
        let value = a
            .to_u64()
            .filter(|&v| v < bound)
            .ok_or_else(|| CodecError::OutOfRange { value: a.clone(), bound: BigUint::from(bound) })?;
        let mut rest = value;
        for _ in 0..r {
            digits.push(rest % base);
            rest /= base;
        }
        return Ok(DigitVector(digits));
    }
    let bound = BigUint::from(base).pow(r);
    if a >= &bound {
        return Err(CodecError::OutOfRange { value: a.clone(), bound });
    }
    let mut rest = a.clone();
    for _ in 0..r {
        let (q, d) = rest.div_rem(&BigUint::from(base));
        digits.push(d.to_u64().expect("digit below a u64 base"));
        rest = q;
    }
    Ok(DigitVector(digits))
}

/// `Σ d_j p^j`.
pub fn from_digits(d: &[u64], p: PrimeModulus) -> Result<BigUint, CodecError> {
    let base = p.get();
    if let Some(&digit) = d.iter().find(|&&x| x >= base) {
        return Err(CodecError::DigitOverflow { digit, p: base });
    }
    let mut small: Option<u128> = Some(0);
    for &x in d.iter().rev() {
        small = small
            .and_then(|acc| acc.checked_mul(base as u128))
            .and_then(|acc| acc.checked_add(x as u128));
        if small.is_none() {
            break;
        }
    }
    if let Some(v) = small {
        return Ok(BigUint::from(v));
    }
    let big_base = BigUint::from(base);
    Ok(d.iter().rev().fold(BigUint::zero(), |acc, &x| acc * &big_base + x))
}
