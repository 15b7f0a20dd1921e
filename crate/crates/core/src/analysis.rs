//! Keyspace counting.
//!
//! The number of triangular automorphisms of `F_p^n` whose polynomials have
//! total degree at most `d < p` is `p^E (p-1)^n` with
//! `E = Σ_{i=1}^{n-1} C(i + d, d)`. Distinct coefficient data give distinct
//! functions as long as `d < p`, which [`distinctness_census`] checks by
//! brute force on small spaces.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::cipher::effective_degree;
use crate::codec::Factorization;
use crate::field::{is_prime, PrimeModulus};
use crate::jonquieres::JonquieresAutomorphism;
use crate::poly::{monomial_count, monomial_count_usize, TriangularPolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("census too large: {0}")]
    TooLarge(String),
}

/// Largest `p^n` the census will tabulate.
pub const CENSUS_MAX_POINTS: u64 = 10_000;
/// Largest number of automorphisms the census will enumerate.
pub const CENSUS_MAX_AUTOMORPHISMS: u64 = 1_000_000;

/// `E = Σ_{i=1}^{n-1} C(i + d, d)`: the number of free coefficients.
pub fn coefficient_count(n: usize, degree: u32) -> BigUint {
    (1..n).map(|i| monomial_count(i, degree)).sum()
}

/// `p^E (p-1)^n` with `d` used as given, i.e. the plain counting formula.
pub fn triangular_count_formula(p: u64, n: usize, degree: u32) -> BigUint {
    let e = coefficient_count(n, degree).to_u32().expect("exponent fits in u32");
    BigUint::from(p).pow(e) * BigUint::from(p - 1).pow(n as u32)
}

/// Number of triangular automorphisms of `F_p^n` with polynomial degree at
/// most `min(d, p-1)`.
pub fn count_triangular_autos(p: PrimeModulus, n: usize, degree: u32) -> BigUint {
    triangular_count_formula(p.get(), n, effective_degree(degree, p.get()))
}

/// `(automorphisms enumerated, distinct functions among them)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Census {
    pub syntactic: u64,
    pub functional: u64,
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntactic={} functional={}", self.syntactic, self.functional)
    }
}

/// Enumerates every triangular automorphism of `F_p^n` with degree at most
/// `min(d, p-1)`, tabulates each one on all `p^n` points, and counts the
/// distinct tables.
pub fn distinctness_census(p: PrimeModulus, n: usize, degree: u32) -> Result<Census, AnalysisError> {
    let q = p.get();
    let eff = effective_degree(degree, q);
    let points = q
        .checked_pow(n as u32)
        .filter(|&v| v <= CENSUS_MAX_POINTS)
        .ok_or_else(|| AnalysisError::TooLarge(format!("{q}^{n} points exceeds {CENSUS_MAX_POINTS}")))?;
    let total = count_triangular_autos(p, n, degree);
    let total = total
        .to_u64()
        .filter(|&v| v <= CENSUS_MAX_AUTOMORPHISMS)
        .ok_or_else(|| {
            AnalysisError::TooLarge(format!("{total} automorphisms exceeds {CENSUS_MAX_AUTOMORPHISMS}"))
        })?;

    let lengths: Vec<usize> = (1..n).map(|i| monomial_count_usize(i, eff)).collect();
    let build = |mut code: u64| -> JonquieresAutomorphism {
        let mut take = |base: u64| {
            let d = code % base;
            code /= base;
            d
        };
        let scalars: Vec<u64> = (0..n).map(|_| take(q - 1) + 1).collect();
        let polys = lengths
            .iter()
            .enumerate()
            .map(|(k, &len)| {
                let dense: Vec<u64> = (0..len).map(|_| take(q)).collect();
                TriangularPolynomial::from_dense(p, k + 1, eff, &dense).expect("in range")
            })
            .collect();
        JonquieresAutomorphism::new(p, scalars, polys).expect("valid by construction")
    };
    let tabulate = |auto: &JonquieresAutomorphism| -> Vec<u32> {
        let mut x = vec![0u64; n];
        (0..points)
            .map(|_| {
                let y = auto.apply(&x).expect("point in range");
                // advance x as a little-endian counter
                for digit in x.iter_mut() {
                    *digit += 1;
                    if *digit < q {
                        break;
                    }
                    *digit = 0;
                }
                y.iter().rev().fold(0u64, |acc, &d| acc * q + d) as u32
            })
            .collect()
    };

    let mut seen: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut census = Census { syntactic: 0, functional: 0 };
    for code in 0..total {
        census.syntactic += 1;
        let table = tabulate(&build(code));
        let mut hasher = DefaultHasher::new();
        table.hash(&mut hasher);
        let bucket = seen.entry(hasher.finish()).or_default();
        // hash hits are confirmed by rebuilding the earlier table
        let duplicate = bucket.iter().any(|&other| tabulate(&build(other)) == table);
        if !duplicate {
            bucket.push(code);
            census.functional += 1;
        }
    }
    Ok(census)
}

/// `⌊log₂ x⌋ + 1`.
pub fn bit_length(x: &BigUint) -> u64 {
    x.bits()
}

/// `⌊log₂ x⌋` for `x ≥ 1`.
pub fn floor_log2(x: &BigUint) -> u64 {
    x.bits().saturating_sub(1)
}

pub fn decimal_digits(x: &BigUint) -> usize {
    x.to_str_radix(10).len()
}

/// Keyspace size implied by the degree cap for one block size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyspaceReport {
    pub n: BigUint,
    pub degree_bound: u32,
    /// `(p, r, automorphisms of F_p^r)` per factor.
    pub per_factor: Vec<(u64, u32, BigUint)>,
    /// One automorphism per factor.
    pub single_stage: BigUint,
    /// Two stages per factor: the square of `single_stage`.
    pub full_key: BigUint,
}

impl KeyspaceReport {
    pub fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("n".to_string(), self.n.to_string()),
            ("degree_bound".to_string(), self.degree_bound.to_string()),
        ];
        for (p, r, count) in &self.per_factor {
            out.push((format!("factor_{p}^{r}_count"), count.to_string()));
            out.push((format!("factor_{p}^{r}_bits"), bit_length(count).to_string()));
        }
        for (name, value) in [("single_stage", &self.single_stage), ("full_key", &self.full_key)] {
            out.push((name.to_string(), value.to_string()));
            out.push((format!("{name}_bits"), bit_length(value).to_string()));
            out.push((format!("{name}_floor_log2"), floor_log2(value).to_string()));
            out.push((format!("{name}_digits"), decimal_digits(value).to_string()));
        }
        out
    }
}

impl fmt::Display for KeyspaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "block size N       {}", self.n)?;
        writeln!(f, "degree bound       {}", self.degree_bound)?;
        for (p, r, count) in &self.per_factor {
            let label = format!("{p}^{r}");
            writeln!(f, "  {label:<16} {} automorphisms (~2^{})", count, floor_log2(count))?;
        }
        writeln!(
            f,
            "single stage       ~2^{} ({} bits, {} digits)",
            floor_log2(&self.single_stage),
            bit_length(&self.single_stage),
            decimal_digits(&self.single_stage)
        )?;
        write!(
            f,
            "full key (2 stages) ~2^{} ({} bits, {} digits)",
            floor_log2(&self.full_key),
            bit_length(&self.full_key),
            decimal_digits(&self.full_key)
        )
    }
}

pub fn keyspace_lower_bound(factorization: &Factorization, degree: u32) -> KeyspaceReport {
    let per_factor: Vec<(u64, u32, BigUint)> = factorization
        .factors()
        .iter()
        .map(|pp| {
            let count = count_triangular_autos(pp.prime(), pp.exponent() as usize, degree);
            (pp.prime().get(), pp.exponent(), count)
        })
        .collect();
    let single_stage: BigUint = per_factor.iter().map(|(_, _, c)| c).product();
    let full_key = &single_stage * &single_stage;
    KeyspaceReport {
        n: factorization.n().clone(),
        degree_bound: degree,
        per_factor,
        single_stage,
        full_key,
    }
}

/// One row of the published automorphism-count table:
/// `(n, d, exponent of p, exponent of p - 1)` as printed.
pub const PRINTED_COUNT_TABLE: [(usize, u32, u32, u32); 6] = [
    (4, 3, 34, 4),
    (4, 4, 55, 4),
    (4, 5, 83, 5),
    (5, 3, 69, 5),
    (5, 4, 125, 5),
    (5, 5, 209, 5),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub n: usize,
    pub degree: u32,
    pub printed: (u32, u32),
    pub computed: (u32, u32),
}

impl TableRow {
    pub fn matches(&self) -> bool {
        self.printed == self.computed
    }
}

/// Recomputes the exponent pair `(E, n)` for every printed row.
pub fn table_rows() -> Vec<TableRow> {
    PRINTED_COUNT_TABLE
        .iter()
        .map(|&(n, degree, pe, se)| TableRow {
            n,
            degree,
            printed: (pe, se),
            computed: (coefficient_count(n, degree).to_u32().unwrap(), n as u32),
        })
        .collect()
}

/// Prime factorization by trial division, for small numbers in reports.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn factor_string(factors: &[(u64, u32)]) -> String {
    factors
        .iter()
        .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

/// The published block size just under `2^128`.
pub const PRINTED_N: &str = "340274423051874795558305386758572502851";
/// Primes as printed; the third is not prime.
pub const PRINTED_PRIMES: [u64; 3] = [163, 509, 603];
/// Primes that reproduce the printed block size.
pub const CORRECTED_PRIMES: [u64; 3] = [163, 509, 613];
pub const CLAIMED_LOG2: u64 = 5478;
const EXPONENT: u32 = 5;
const DEGREE: u32 = 5;

/// Exact re-derivation of the comparison between the near-`2^128` block size
/// and AES-128.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperComparison {
    pub printed_n: BigUint,
    pub corrected_n: BigUint,
    pub literal_n: BigUint,
    pub printed_p3_factors: Vec<(u64, u32)>,
    pub corrected_p3_is_prime: bool,
    /// `(Π p)^209 · (Π (p-1))^5` with the corrected primes.
    pub bound: BigUint,
    /// The same expression with the printed primes, as plain arithmetic.
    pub literal_bound: BigUint,
    pub rows: Vec<TableRow>,
}

impl PaperComparison {
    pub fn corrected_n_matches(&self) -> bool {
        self.corrected_n == self.printed_n
    }

    pub fn literal_n_matches(&self) -> bool {
        self.literal_n == self.printed_n
    }

    /// `⌊log₂ bound⌋` within one of the claimed exponent.
    pub fn bound_matches_claim(&self) -> bool {
        floor_log2(&self.bound).abs_diff(CLAIMED_LOG2) <= 1
    }

    pub fn lines(&self) -> Vec<(String, String)> {
        let aes = BigUint::one() << 128u32;
        let full = &self.bound * &self.bound;
        let mut out: Vec<(String, String)> = vec![
            ("printed_n", self.printed_n.to_string()),
            ("corrected_n", self.corrected_n.to_string()),
            ("corrected_n_matches", self.corrected_n_matches().to_string()),
            ("literal_n", self.literal_n.to_string()),
            ("literal_n_matches", self.literal_n_matches().to_string()),
            ("printed_p3", PRINTED_PRIMES[2].to_string()),
            ("printed_p3_is_prime", is_prime(PRINTED_PRIMES[2]).to_string()),
            ("printed_p3_factors", factor_string(&self.printed_p3_factors)),
            ("corrected_p3", CORRECTED_PRIMES[2].to_string()),
            ("corrected_p3_is_prime", self.corrected_p3_is_prime.to_string()),
            ("n_below_2^128", (self.printed_n < aes).to_string()),
            ("bound_floor_log2", floor_log2(&self.bound).to_string()),
            ("bound_bits", bit_length(&self.bound).to_string()),
            ("bound_digits", decimal_digits(&self.bound).to_string()),
            ("bound_claimed_log2", CLAIMED_LOG2.to_string()),
            ("bound_matches_claim", self.bound_matches_claim().to_string()),
            ("literal_bound_floor_log2", floor_log2(&self.literal_bound).to_string()),
            ("two_stage_floor_log2", floor_log2(&full).to_string()),
            ("aes128_keys_log2", "128".to_string()),
            ("bound_over_aes128_log2", (floor_log2(&self.bound) - 128).to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        for (k, row) in self.rows.iter().enumerate() {
            out.push((
                format!("table_row_{}", k + 1),
                format!(
                    "n={} d={} printed=({},{}) computed=({},{}) match={}",
                    row.n,
                    row.degree,
                    row.printed.0,
                    row.printed.1,
                    row.computed.0,
                    row.computed.1,
                    row.matches()
                ),
            ));
        }
        out
    }
}

impl fmt::Display for PaperComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = CORRECTED_PRIMES;
        let [_, _, printed] = PRINTED_PRIMES;
        let mut s = String::new();
        writeln!(s, "block size check")?;
        writeln!(s, "  printed N                  {}", self.printed_n)?;
        writeln!(
            s,
            "  {a}^5 * {b}^5 * {c}^5        {}  [{}]",
            self.corrected_n,
            if self.corrected_n_matches() { "MATCH" } else { "DISCREPANCY" }
        )?;
        writeln!(
            s,
            "  {a}^5 * {b}^5 * {printed}^5        {}  [{}]",
            self.literal_n,
            if self.literal_n_matches() { "MATCH" } else { "differs" }
        )?;
        writeln!(
            s,
            "  {printed} = {} is composite; {c} prime: {}",
            factor_string(&self.printed_p3_factors),
            self.corrected_p3_is_prime
        )?;
        writeln!(s, "keyspace bound, degree <= 5")?;
        writeln!(
            s,
            "  ({c}*{b}*{a})^209 * ({}*{}*{})^5  floor(log2) = {} (claimed {CLAIMED_LOG2}: {}), {} digits",
            c - 1,
            b - 1,
            a - 1,
            floor_log2(&self.bound),
            if self.bound_matches_claim() { "consistent" } else { "DISCREPANCY" },
            decimal_digits(&self.bound)
        )?;
        writeln!(
            s,
            "  literal expression with {printed}              floor(log2) = {} (arithmetic only)",
            floor_log2(&self.literal_bound)
        )?;
        writeln!(
            s,
            "  two stages per prime                   floor(log2) = {}",
            floor_log2(&(&self.bound * &self.bound))
        )?;
        writeln!(
            s,
            "  AES-128 keyspace                       2^128 (bound exceeds it by 2^{})",
            floor_log2(&self.bound) - 128
        )?;
        writeln!(s, "automorphism-count table, exponents of (p, p-1)")?;
        for row in &self.rows {
            let note = if row.matches() {
                String::new()
            } else {
                format!("  <- printed ({},{}); the scalar exponent equals the dimension", row.printed.0, row.printed.1)
            };
            writeln!(
                s,
                "  A^{} deg<={}  ({},{}){note}",
                row.n, row.degree, row.computed.0, row.computed.1
            )?;
        }
        f.write_str(s.trim_end())
    }
}

pub fn paper_comparison_report() -> PaperComparison {
    let product = |primes: [u64; 3]| -> BigUint {
        primes.iter().map(|&p| BigUint::from(p).pow(EXPONENT)).product()
    };
    let bound = |primes: [u64; 3]| -> BigUint {
        let e = coefficient_count(EXPONENT as usize, DEGREE).to_u32().unwrap();
        let base: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let units: BigUint = primes.iter().map(|&p| BigUint::from(p - 1)).product();
        base.pow(e) * units.pow(EXPONENT)
    };
    PaperComparison {
        printed_n: PRINTED_N.parse().unwrap(),
        corrected_n: product(CORRECTED_PRIMES),
        literal_n: product(PRINTED_PRIMES),
        printed_p3_factors: trial_factor(PRINTED_PRIMES[2]),
        corrected_p3_is_prime: trial_factor(CORRECTED_PRIMES[2]) == vec![(CORRECTED_PRIMES[2], 1)],
        bound: bound(CORRECTED_PRIMES),
        literal_bound: bound(PRINTED_PRIMES),
        rows: table_rows(),
    }
}
