//! Sparse multivariate polynomials over `F_p` restricted to a prefix of the
//! variables.
//!
//! A [`TriangularPolynomial`] with index `i` may only read `x_1 … x_i`. Its
//! monomials are ordered canonically: ascending total degree, then ascending
//! lexicographic order of the exponent tuple. That order drives both key
//! serialization and enumeration.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::field::PrimeModulus;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial index must be at least 1")]
    ZeroIndex,
    #[error("degree bound {bound} is not below the field order {p}")]
    DegreeBoundTooHigh { bound: u32, p: u64 },
    #[error("monomial of degree {degree} exceeds the degree bound {bound}")]
    DegreeExceedsBound { degree: u32, bound: u32 },
    #[error("monomial uses x_{var} but the polynomial may only read x_1..x_{index}")]
    VariableOutOfRange { var: usize, index: usize },
    #[error("coefficient {coeff} is not a canonical element of F_{p}")]
    CoefficientOutOfRange { coeff: u64, p: u64 },
    #[error("expected {expected} dense coefficients, got {got}")]
    DenseLength { expected: usize, got: usize },
    #[error("point has {got} coordinates but the polynomial reads {needed}")]
    ArityError { needed: usize, got: usize },
    #[error("coordinate {value} is not a canonical element of F_{p}")]
    PointOutOfRange { value: u64, p: u64 },
}

/// Exponent tuple `(e_1, …, e_i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn constant(vars: usize) -> Self {
        Monomial(vec![0; vars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// 1-based index of the last variable with a nonzero exponent, 0 for the constant.
    pub fn last_variable(&self) -> usize {
        self.0.iter().rposition(|&e| e > 0).map_or(0, |j| j + 1)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("1");
        }
        let mut first = true;
        for (j, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", j + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Number of monomials of total degree at most `degree` in `vars` variables,
/// i.e. `C(vars + degree, degree)`.
pub fn monomial_count(vars: usize, degree: u32) -> BigUint {
    let n = vars as u64 + degree as u64;
    let k = degree.min(vars as u32) as u64;
    // Running product stays an exact binomial at every step.
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc = acc * (n - k + j) / j;
    }
    acc
}

pub(crate) fn monomial_count_usize(vars: usize, degree: u32) -> usize {
    monomial_count(vars, degree)
        .to_usize()
        .expect("monomial count exceeds addressable memory")
}

/// All monomials in `vars` variables of total degree at most `degree`, in
/// canonical order.
pub fn monomials(vars: usize, degree: u32) -> Vec<Monomial> {
    fn fill(rest: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if rest == 1 {
            prefix.push(total);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in 0..=total {
            prefix.push(e);
            fill(rest - 1, total - e, prefix, out);
            prefix.pop();
        }
    }

    let mut out = Vec::with_capacity(monomial_count_usize(vars, degree));
    if vars == 0 {
        out.push(Monomial(Vec::new()));
        return out;
    }
    let mut prefix = Vec::with_capacity(vars);
    for total in 0..=degree {
        fill(vars, total, &mut prefix, &mut out);
    }
    out
}

/// Polynomial over `F_p` in the variables `x_1 … x_index` with bounded total degree.
///
/// Only nonzero coefficients are stored.
#[derive(Clone, PartialEq, Eq)]
pub struct TriangularPolynomial {
    modulus: PrimeModulus,
    index: usize,
    degree_bound: u32,
    coeffs: BTreeMap<Monomial, u64>,
}

impl TriangularPolynomial {
    pub fn zero(modulus: PrimeModulus, index: usize, degree_bound: u32) -> Result<Self, PolyError> {
        Self::new(modulus, index, degree_bound, std::iter::empty())
    }

    /// Builds a polynomial from `(monomial, coefficient)` terms.
    ///
    /// Monomials may carry fewer than `index` exponents (missing ones are
    /// zero) or more, as long as the extra exponents are zero. Repeated
    /// monomials are summed.
    pub fn new(
        modulus: PrimeModulus,
        index: usize,
        degree_bound: u32,
        terms: impl IntoIterator<Item = (Monomial, u64)>,
    ) -> Result<Self, PolyError> {
        let p = modulus.get();
        if index == 0 {
            return Err(PolyError::ZeroIndex);
        }
        if degree_bound as u64 >= p {
            return Err(PolyError::DegreeBoundTooHigh { bound: degree_bound, p });
        }
        let mut coeffs = BTreeMap::new();
        for (mono, c) in terms {
            if c >= p {
                return Err(PolyError::CoefficientOutOfRange { coeff: c, p });
            }
            let mono = normalize(mono, index)?;
            let degree = mono.degree();
            if degree > degree_bound {
                return Err(PolyError::DegreeExceedsBound { degree, bound: degree_bound });
            }
            let slot = coeffs.entry(mono).or_insert(0);
            *slot = modulus.add(*slot, c);
        }
        coeffs.retain(|_, c| *c != 0);
        Ok(Self { modulus, index, degree_bound, coeffs })
    }

    /// Builds a polynomial from one coefficient per monomial, in canonical order.
    pub fn from_dense(
        modulus: PrimeModulus,
        index: usize,
        degree_bound: u32,
        dense: &[u64],
    ) -> Result<Self, PolyError> {
        if index == 0 {
            return Err(PolyError::ZeroIndex);
        }
        if degree_bound as u64 >= modulus.get() {
            return Err(PolyError::DegreeBoundTooHigh { bound: degree_bound, p: modulus.get() });
        }
        let expected = monomial_count_usize(index, degree_bound);
        if dense.len() != expected {
            return Err(PolyError::DenseLength { expected, got: dense.len() });
        }
        Self::new(
            modulus,
            index,
            degree_bound,
            monomials(index, degree_bound).into_iter().zip(dense.iter().copied()),
        )
    }

    /// Coefficients of every monomial up to the degree bound, zeros included,
    /// in canonical order.
    pub fn dense_coefficients(&self) -> Vec<u64> {
        monomials(self.index, self.degree_bound)
            .iter()
            .map(|m| self.coeffs.get(m).copied().unwrap_or(0))
            .collect()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Largest total degree among the nonzero terms (0 for the zero polynomial).
    pub fn total_degree(&self) -> u32 {
        self.coeffs.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> u64 {
        normalize(mono.clone(), self.index)
            .ok()
            .and_then(|m| self.coeffs.get(&m).copied())
            .unwrap_or(0)
    }

    /// Nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> + '_ {
        self.coeffs.iter().map(|(m, &c)| (m, c))
    }

    /// Evaluates at `point`, reading only its first `index` coordinates.
    pub fn eval(&self, point: &[u64]) -> Result<u64, PolyError> {
        if point.len() < self.index {
            return Err(PolyError::ArityError { needed: self.index, got: point.len() });
        }
        let f = self.modulus;
        if let Some(&value) = point[..self.index].iter().find(|&&v| v >= f.get()) {
            return Err(PolyError::PointOutOfRange { value, p: f.get() });
        }
        let mut acc = 0;
        for (mono, &c) in &self.coeffs {
            let mut term = c;
            for (&x, &e) in point.iter().zip(mono.exponents()) {
                if e > 0 {
                    term = f.mul(term, f.pow(x, e as u64));
                }
            }
            acc = f.add(acc, term);
        }
        Ok(acc)
    }

    /// Coefficient-wise sum; the degree bound of the result is the larger one.
    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        assert_eq!(self.modulus, other.modulus, "polynomials over different fields");
        let index = self.index.max(other.index);
        let bound = self.degree_bound.max(other.degree_bound);
        Self::new(
            self.modulus,
            index,
            bound,
            self.terms().chain(other.terms()).map(|(m, c)| (m.clone(), c)),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(self.modulus.neg(1))
    }

    pub fn scale(&self, factor: u64) -> Self {
        let f = self.modulus;
        let factor = f.reduce(factor);
        let mut coeffs: BTreeMap<Monomial, u64> =
            self.coeffs.iter().map(|(m, &c)| (m.clone(), f.mul(c, factor))).collect();
        coeffs.retain(|_, c| *c != 0);
        Self { coeffs, ..self.clone() }
    }

    /// Substitutes `x_j := images[j-1]` for `j = 1..=index` and expands.
    pub(crate) fn substitute(&self, images: &[Expansion]) -> Expansion {
        assert!(images.len() >= self.index);
        let f = self.modulus;
        let vars = images.first().map_or(0, |e| e.vars);
        let mut powers: Vec<Vec<Expansion>> = images[..self.index]
            .iter()
            .map(|img| vec![Expansion::constant(f, vars, 1), img.clone()])
            .collect();
        let mut out = Expansion::constant(f, vars, 0);
        for (mono, &c) in &self.coeffs {
            let mut term = Expansion::constant(f, vars, c);
            for (j, &e) in mono.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[j];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap().mul(&cache[1]);
                    cache.push(next);
                }
                term = term.mul(&cache[e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Wraps an expanded polynomial without the `degree < p` check. Used for
    /// explicit inverse maps, whose total degree can exceed the bound even
    /// though each variable's exponent stays below `p`.
    pub(crate) fn from_expansion(index: usize, expansion: Expansion) -> Self {
        let Expansion { modulus, terms, .. } = expansion;
        let coeffs: BTreeMap<Monomial, u64> = terms
            .into_iter()
            .map(|(mut e, c)| {
                e.resize(index, 0);
                (Monomial(e), c)
            })
            .collect();
        let degree_bound = coeffs.keys().map(Monomial::degree).max().unwrap_or(0);
        Self { modulus, index, degree_bound, coeffs }
    }
}

impl fmt::Debug for TriangularPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}[deg<={}] over {:?}: ", self.index, self.degree_bound, self.modulus)?;
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}

fn normalize(mono: Monomial, index: usize) -> Result<Monomial, PolyError> {
    let mut exps = mono.0;
    if let Some(j) = exps.iter().skip(index).position(|&e| e > 0) {
        return Err(PolyError::VariableOutOfRange { var: index + j + 1, index });
    }
    exps.resize(index, 0);
    Ok(Monomial(exps))
}

/// Expanded polynomial used while composing maps symbolically. Exponents are
/// reduced with `x^p = x`, which preserves the polynomial as a function on
/// `F_p^vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Expansion {
    modulus: PrimeModulus,
    vars: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl Expansion {
    pub(crate) fn constant(modulus: PrimeModulus, vars: usize, c: u64) -> Self {
        let mut terms = BTreeMap::new();
        if c % modulus.get() != 0 {
            terms.insert(vec![0; vars], c % modulus.get());
        }
        Self { modulus, vars, terms }
    }

    /// `c · y_var` (1-based variable).
    pub(crate) fn variable(modulus: PrimeModulus, vars: usize, var: usize, c: u64) -> Self {
        let mut out = Self::constant(modulus, vars, 0);
        if c % modulus.get() != 0 {
            let mut e = vec![0; vars];
            e[var - 1] = 1;
            out.terms.insert(e, c % modulus.get());
        }
        out
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let f = self.modulus;
        let mut terms = self.terms.clone();
        for (e, &c) in &other.terms {
            let slot = terms.entry(e.clone()).or_insert(0);
            *slot = f.add(*slot, c);
        }
        terms.retain(|_, c| *c != 0);
        Self { terms, ..self.clone() }
    }

    pub(crate) fn scale(&self, factor: u64) -> Self {
        let f = self.modulus;
        let mut terms: BTreeMap<Vec<u32>, u64> =
            self.terms.iter().map(|(e, &c)| (e.clone(), f.mul(c, factor))).collect();
        terms.retain(|_, c| *c != 0);
        Self { terms, ..self.clone() }
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let f = self.modulus;
        let p = f.get();
        let mut terms: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea
                    .iter()
                    .zip(eb)
                    .map(|(&x, &y)| reduce_exponent(x as u64 + y as u64, p))
                    .collect();
                let slot = terms.entry(e).or_insert(0);
                *slot = f.add(*slot, f.mul(ca, cb));
            }
        }
        terms.retain(|_, c| *c != 0);
        Self { terms, ..self.clone() }
    }
}

fn reduce_exponent(e: u64, p: u64) -> u32 {
    if e < p {
        e as u32
    } else {
        ((e - 1) % (p - 1) + 1) as u32
    }
}
