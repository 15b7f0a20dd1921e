//! Triangular (de Jonquières) automorphisms of the affine space `F_p^n`.
//!
//! An automorphism is given by nonzero scalars `a_1 … a_n` and polynomials
//! `P_1 … P_{n-1}`, with `P_i` reading only `x_1 … x_i`:
//!
//! ```text
//! y_1 = a_1 x_1
//! y_i = a_i x_i + P_{i-1}(x_1, …, x_{i-1})     (i ≥ 2)
//! ```
//!
//! The inverse is solved front to back, since each `x_i` only needs the
//! coordinates recovered before it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::field::{is_prime, PrimeModulus};
use crate::poly::{Expansion, Monomial, PolyError, TriangularPolynomial};

/// One broken hypothesis of a draft automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotPrime(u64),
    EmptyDimension,
    ZeroScalar { position: usize },
    ScalarOutOfRange { position: usize, value: u64 },
    PolyCount { expected: usize, got: usize },
    CoefficientOutOfRange { poly: usize, value: u64 },
    DegreeTooHigh { poly: usize, degree: u32, p: u64 },
    VariableBeyondPrefix { poly: usize, var: usize },
    IndexMismatch { poly: usize, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPrime(p) => write!(f, "{p} is not prime"),
            Violation::EmptyDimension => write!(f, "dimension must be at least 1"),
            Violation::ZeroScalar { position } => write!(f, "scalar a_{position} is zero"),
            Violation::ScalarOutOfRange { position, value } => {
                write!(f, "scalar a_{position} = {value} is not reduced")
            }
            Violation::PolyCount { expected, got } => {
                write!(f, "expected {expected} polynomials, got {got}")
            }
            Violation::CoefficientOutOfRange { poly, value } => {
                write!(f, "P_{poly} has unreduced coefficient {value}")
            }
            Violation::DegreeTooHigh { poly, degree, p } => {
                write!(f, "P_{poly} has a term of degree {degree} >= p = {p}")
            }
            Violation::VariableBeyondPrefix { poly, var } => {
                write!(f, "P_{poly} uses x_{var}, beyond x_1..x_{poly}")
            }
            Violation::IndexMismatch { poly, index } => {
                write!(f, "P_{poly} is declared over {index} variables")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JonqError {
    #[error("invalid automorphism: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} is not an element of F_{p}")]
    DigitOutOfRange { value: u64, p: u64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Unvalidated automorphism data. `polys[i - 1]` holds the terms of `P_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismDraft {
    pub modulus: u64,
    pub scalars: Vec<u64>,
    pub polys: Vec<Vec<(Monomial, u64)>>,
}

impl AutomorphismDraft {
    /// Every violated hypothesis, in the order found. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let p = self.modulus;
        let mut out = Vec::new();
        if !is_prime(p) {
            out.push(Violation::NotPrime(p));
        }
        let n = self.scalars.len();
        if n == 0 {
            out.push(Violation::EmptyDimension);
        }
        for (j, &a) in self.scalars.iter().enumerate() {
            if p > 0 && a % p == 0 {
                out.push(Violation::ZeroScalar { position: j + 1 });
            } else if a >= p {
                out.push(Violation::ScalarOutOfRange { position: j + 1, value: a });
            }
        }
        let expected = n.saturating_sub(1);
        if self.polys.len() != expected {
            out.push(Violation::PolyCount { expected, got: self.polys.len() });
        }
        for (k, terms) in self.polys.iter().enumerate() {
            let index = k + 1;
            let mut worst = 0;
            for (mono, c) in terms {
                if *c >= p {
                    out.push(Violation::CoefficientOutOfRange { poly: index, value: *c });
                }
                if *c % p.max(1) == 0 {
                    continue;
                }
                let var = mono.last_variable();
                if var > index {
                    out.push(Violation::VariableBeyondPrefix { poly: index, var });
                }
                worst = worst.max(mono.degree());
            }
            if worst as u64 >= p {
                out.push(Violation::DegreeTooHigh { poly: index, degree: worst, p });
            }
        }
        out
    }

    pub fn build(self) -> Result<JonquieresAutomorphism, JonqError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(JonqError::Invalid(violations));
        }
        let modulus = PrimeModulus::new(self.modulus).expect("validated");
        let polys = self
            .polys
            .into_iter()
            .enumerate()
            .map(|(k, terms)| {
                let bound = terms
                    .iter()
                    .filter(|(_, c)| *c != 0)
                    .map(|(m, _)| m.degree())
                    .max()
                    .unwrap_or(0);
                TriangularPolynomial::new(modulus, k + 1, bound, terms)
            })
            .collect::<Result<Vec<_>, _>>()?;
        JonquieresAutomorphism::new(modulus, self.scalars, polys)
    }
}

/// A validated triangular automorphism of `F_p^n`.
#[derive(Clone)]
pub struct JonquieresAutomorphism {
    modulus: PrimeModulus,
    scalars: Vec<u64>,
    inv_scalars: Vec<u64>,
    polys: Vec<TriangularPolynomial>,
    plan: EvalPlan,
}

impl JonquieresAutomorphism {
    /// `polys[i - 1]` must be a polynomial over the same field with index `i`.
    pub fn new(
        modulus: PrimeModulus,
        scalars: Vec<u64>,
        polys: Vec<TriangularPolynomial>,
    ) -> Result<Self, JonqError> {
        let mut violations = Vec::new();
        let n = scalars.len();
        if n == 0 {
            violations.push(Violation::EmptyDimension);
        }
        for (j, &a) in scalars.iter().enumerate() {
            if a == 0 {
                violations.push(Violation::ZeroScalar { position: j + 1 });
            } else if a >= modulus.get() {
                violations.push(Violation::ScalarOutOfRange { position: j + 1, value: a });
            }
        }
        if polys.len() != n.saturating_sub(1) {
            violations.push(Violation::PolyCount { expected: n.saturating_sub(1), got: polys.len() });
        }
        for (k, poly) in polys.iter().enumerate() {
            assert_eq!(poly.modulus(), modulus, "polynomial over a different field");
            if poly.index() != k + 1 {
                violations.push(Violation::IndexMismatch { poly: k + 1, index: poly.index() });
            }
        }
        if !violations.is_empty() {
            return Err(JonqError::Invalid(violations));
        }
        Ok(Self::assemble(modulus, scalars, polys))
    }

    fn assemble(modulus: PrimeModulus, scalars: Vec<u64>, polys: Vec<TriangularPolynomial>) -> Self {
        let inv_scalars = scalars
            .iter()
            .map(|&a| modulus.inv(a).expect("scalars are nonzero"))
            .collect();
        let plan = EvalPlan::new(modulus, scalars.len(), &polys);
        Self { modulus, scalars, inv_scalars, polys, plan }
    }

    /// The identity map of `F_p^n`: unit scalars, zero polynomials.
    pub fn identity(modulus: PrimeModulus, n: usize, degree_bound: u32) -> Result<Self, JonqError> {
        let polys = (1..n)
            .map(|i| TriangularPolynomial::zero(modulus, i, degree_bound))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(modulus, vec![1; n], polys)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn dimension(&self) -> usize {
        self.scalars.len()
    }

    pub fn scalars(&self) -> &[u64] {
        &self.scalars
    }

    pub fn polys(&self) -> &[TriangularPolynomial] {
        &self.polys
    }

    pub fn to_draft(&self) -> AutomorphismDraft {
        AutomorphismDraft {
            modulus: self.modulus.get(),
            scalars: self.scalars.clone(),
            polys: self
                .polys
                .iter()
                .map(|p| p.terms().map(|(m, c)| (m.clone(), c)).collect())
                .collect(),
        }
    }

    /// Re-checks the automorphism hypotheses. Only explicit inverses built by
    /// [`inverse_key`](Self::inverse_key) can fail here, by exceeding `degree < p`.
    pub fn validate(&self) -> Vec<Violation> {
        self.to_draft().validate()
    }

    fn check_input(&self, x: &[u64]) -> Result<(), JonqError> {
        if x.len() != self.dimension() {
            return Err(JonqError::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        let p = self.modulus.get();
        match x.iter().find(|&&v| v >= p) {
            Some(&value) => Err(JonqError::DigitOutOfRange { value, p }),
            None => Ok(()),
        }
    }

    /// `y_1 = a_1 x_1`, `y_i = a_i x_i + P_{i-1}(x_1, …, x_{i-1})`.
    pub fn apply(&self, x: &[u64]) -> Result<Vec<u64>, JonqError> {
        self.check_input(x)?;
        let f = self.modulus;
        let mut values = self.plan.scratch();
        self.plan.fill(&mut values, x, self.dimension() - 1);
        let mut y = Vec::with_capacity(x.len());
        y.push(f.mul(self.scalars[0], x[0]));
        for i in 1..x.len() {
            let shift = self.plan.eval(i - 1, &values);
            y.push(f.add(f.mul(self.scalars[i], x[i]), shift));
        }
        Ok(y)
    }

    /// Solves `apply(x) = y` for `x`, one coordinate at a time.
    pub fn invert_apply(&self, y: &[u64]) -> Result<Vec<u64>, JonqError> {
        self.check_input(y)?;
        let f = self.modulus;
        let mut values = self.plan.scratch();
        let mut x = Vec::with_capacity(y.len());
        x.push(f.mul(self.inv_scalars[0], y[0]));
        for i in 1..y.len() {
            self.plan.extend(&mut values, &x, i);
            let shift = self.plan.eval(i - 1, &values);
            x.push(f.mul(self.inv_scalars[i], f.sub(y[i], shift)));
        }
        Ok(x)
    }

    /// The inverse map written again in triangular form: scalars `a_i^{-1}`
    /// and polynomials `-a_i^{-1} · P_{i-1}` composed with the inverse of the
    /// leading coordinates.
    ///
    /// Composition raises degrees, so the result can exceed `degree < p`; it is
    /// reduced with `x^p = x` and stays exact as a function.
    pub fn inverse_key(&self) -> JonquieresAutomorphism {
        let f = self.modulus;
        let n = self.dimension();
        let mut coords: Vec<Expansion> = Vec::with_capacity(n);
        let mut polys = Vec::with_capacity(n.saturating_sub(1));
        coords.push(Expansion::variable(f, n, 1, self.inv_scalars[0]));
        for i in 1..n {
            let b = self.inv_scalars[i];
            let shifted = self.polys[i - 1].substitute(&coords).scale(f.neg(b));
            coords.push(Expansion::variable(f, n, i + 1, b).add(&shifted));
            polys.push(TriangularPolynomial::from_expansion(i, shifted));
        }
        Self::assemble(f, self.inv_scalars.clone(), polys)
    }
}

impl PartialEq for JonquieresAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.scalars == other.scalars && self.polys == other.polys
    }
}

impl Eq for JonquieresAutomorphism {}

impl fmt::Debug for JonquieresAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JonquieresAutomorphism")
            .field("modulus", &self.modulus)
            .field("scalars", &self.scalars)
            .field("polys", &self.polys)
            .finish()
    }
}

/// Reverses one digit block: `(x_1, …, x_n) ↦ (x_n, …, x_1)`.
pub fn reversal(x: &[u64]) -> Vec<u64> {
    x.iter().rev().copied().collect()
}

/// Evaluation schedule shared by every polynomial of one automorphism.
///
/// All monomials in use sit in one table ordered by (last variable, degree),
/// so every entry's parent (the monomial with one power of its last variable
/// removed) comes earlier, and the monomials in `x_1 … x_i` form a prefix.
/// Each entry then costs one field multiplication, and the prefix structure
/// lets the sequential inverse fill the table as coordinates are recovered.
#[derive(Clone, Debug)]
struct EvalPlan {
    modulus: PrimeModulus,
    parent: Vec<u32>,
    var: Vec<u32>,
    /// `level_end[j]`: number of entries using only `x_1 … x_j`.
    level_end: Vec<usize>,
    terms: Vec<Terms>,
    /// Products that can be summed in a `u64` before reducing.
    lazy_run: usize,
}

#[derive(Clone, Debug)]
enum Terms {
    /// Coefficients of the table prefix `[0, len)`, zeros included.
    Dense(Vec<u64>),
    Sparse(Vec<(u32, u64)>),
}

impl EvalPlan {
    fn new(modulus: PrimeModulus, n: usize, polys: &[TriangularPolynomial]) -> Self {
        let width = n.saturating_sub(1);
        let pad = |m: &Monomial| {
            let mut e = m.exponents().to_vec();
            e.resize(width, 0);
            e
        };
        let mut needed: BTreeSet<(usize, u32, Vec<u32>)> = BTreeSet::new();
        needed.insert((0, 0, vec![0; width]));
        for poly in polys {
            for (m, _) in poly.terms() {
                let mut e = pad(m);
                // Close under parents so every entry is one product away.
                loop {
                    let last = e.iter().rposition(|&v| v > 0);
                    let Some(j) = last else { break };
                    if !needed.insert((j + 1, e.iter().sum(), e.clone())) {
                        break;
                    }
                    e[j] -= 1;
                }
            }
        }
        let table: Vec<Vec<u32>> = needed.iter().map(|(_, _, e)| e.clone()).collect();
        let position: HashMap<&[u32], u32> =
            table.iter().enumerate().map(|(k, e)| (e.as_slice(), k as u32)).collect();
        let mut parent = vec![0; table.len()];
        let mut var = vec![0; table.len()];
        let mut level_end = vec![0; width + 1];
        for (k, e) in table.iter().enumerate() {
            let Some(j) = e.iter().rposition(|&v| v > 0) else {
                continue;
            };
            let mut up = e.clone();
            up[j] -= 1;
            parent[k] = position[up.as_slice()];
            var[k] = j as u32;
        }
        for (k, (last, _, _)) in needed.iter().enumerate() {
            for end in level_end.iter_mut().skip(*last) {
                *end = k + 1;
            }
        }
        let terms = polys
            .iter()
            .enumerate()
            .map(|(k, poly)| {
                let sparse: Vec<(u32, u64)> =
                    poly.terms().map(|(m, c)| (position[pad(m).as_slice()], c)).collect();
                let span = level_end[k + 1];
                if modulus.is_small() && 2 * sparse.len() >= span {
                    let mut dense = vec![0; span];
                    for (idx, c) in sparse {
                        dense[idx as usize] = c;
                    }
                    Terms::Dense(dense)
                } else {
                    Terms::Sparse(sparse)
                }
            })
            .collect();
        let top = (modulus.get() - 1).max(1);
        let lazy_run = (u64::MAX / top.saturating_mul(top)).max(1) as usize;
        Self { modulus, parent, var, level_end, terms, lazy_run }
    }

    fn scratch(&self) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.parent.len());
        v.push(1);
        v
    }

    /// Fills monomial values for variables `x_1 … x_upto`.
    fn fill(&self, values: &mut Vec<u64>, x: &[u64], upto: usize) {
        let f = self.modulus;
        let (start, end) = (values.len(), self.level_end[upto]);
        if start >= end {
            return;
        }
        values.resize(end, 0);
        let steps = self.parent[start..end].iter().zip(&self.var[start..end]);
        if f.is_small() {
            for (k, (&up, &j)) in (start..end).zip(steps) {
                values[k] = f.reduce(values[up as usize] * x[j as usize]);
            }
        } else {
            for (k, (&up, &j)) in (start..end).zip(steps) {
                values[k] = f.mul(values[up as usize], x[j as usize]);
            }
        }
    }

    fn extend(&self, values: &mut Vec<u64>, x: &[u64], upto: usize) {
        self.fill(values, x, upto)
    }

    /// Value of `P_{k+1}` given filled monomial values.
    #[inline]
    fn eval(&self, k: usize, values: &[u64]) -> u64 {
        let f = self.modulus;
        match &self.terms[k] {
            Terms::Dense(coeffs) => {
                let values = &values[..coeffs.len()];
                let mut acc = 0;
                for (cs, vs) in coeffs.chunks(self.lazy_run).zip(values.chunks(self.lazy_run)) {
                    // Operands are below 2^32; the masks let the multiply vectorize.
                    let run: u64 = cs
                        .iter()
                        .zip(vs)
                        .map(|(&c, &v)| (c & 0xffff_ffff) * (v & 0xffff_ffff))
                        .sum();
                    acc = f.add(acc, f.reduce(run));
                }
                acc
            }
            Terms::Sparse(terms) if f.is_small() => {
                // Products stay below 2^64, so the sum fits in 128 bits.
                let acc: u128 = terms
                    .iter()
                    .map(|&(idx, c)| (c * values[idx as usize]) as u128)
                    .sum();
                (acc % f.get() as u128) as u64
            }
            Terms::Sparse(terms) => terms
                .iter()
                .fold(0, |acc, &(idx, c)| f.add(acc, f.mul(c, values[idx as usize]))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    /// p=5, a=(2,3), P1(x1) = x1^2 + 1
    fn small_example() -> JonquieresAutomorphism {
        AutomorphismDraft {
            modulus: 5,
            scalars: vec![2, 3],
            polys: vec![vec![(mono(&[2]), 1), (mono(&[0]), 1)]],
        }
        .build()
        .unwrap()
    }

    fn random_auto(rng: &mut impl Rng, p: u64, n: usize, d: u32) -> JonquieresAutomorphism {
        let m = f(p);
        let d = d.min(p as u32 - 1);
        let scalars = (0..n).map(|_| rng.gen_range(1..p)).collect();
        let polys = (1..n)
            .map(|i| {
                let len = crate::poly::monomial_count_usize(i, d);
                let dense: Vec<u64> = (0..len).map(|_| rng.gen_range(0..p)).collect();
                TriangularPolynomial::from_dense(m, i, d, &dense).unwrap()
            })
            .collect();
        JonquieresAutomorphism::new(m, scalars, polys).unwrap()
    }

    fn all_points(p: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
        (0..p.pow(n as u32)).map(move |mut code| {
            (0..n)
                .map(|_| {
                    let d = code % p;
                    code /= p;
                    d
                })
                .collect()
        })
    }

    /// Straight-line evaluation of the defining formulas, independent of the plan.
    fn oracle_apply(j: &JonquieresAutomorphism, x: &[u64]) -> Vec<u64> {
        let p = j.modulus().get();
        let mut y = vec![j.scalars()[0] * x[0] % p];
        for i in 1..x.len() {
            let shift = j.polys()[i - 1].eval(&x[..i]).unwrap();
            y.push((j.scalars()[i] * x[i] + shift) % p);
        }
        y
    }

    #[test]
    fn validate_identity() {
        let id = JonquieresAutomorphism::identity(f(7), 4, 3).unwrap();
        assert!(id.validate().is_empty());
        assert_eq!(id.apply(&[1, 2, 3, 4]).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(id.invert_apply(&[6, 0, 5, 1]).unwrap(), vec![6, 0, 5, 1]);
    }

    #[test]
    fn validate_reports_degree_overflow() {
        let draft = AutomorphismDraft {
            modulus: 2,
            scalars: vec![1, 1],
            polys: vec![vec![(mono(&[2]), 1)]],
        };
        assert_eq!(
            draft.validate(),
            vec![Violation::DegreeTooHigh { poly: 1, degree: 2, p: 2 }]
        );
        assert!(matches!(draft.build(), Err(JonqError::Invalid(_))));
    }

    #[test]
    fn validate_reports_variable_beyond_prefix() {
        let draft = AutomorphismDraft {
            modulus: 5,
            scalars: vec![1, 1, 1],
            polys: vec![vec![], vec![(mono(&[0, 0, 1]), 1)]],
        };
        assert_eq!(draft.validate(), vec![Violation::VariableBeyondPrefix { poly: 2, var: 3 }]);
    }

    #[test]
    fn validate_collects_every_violation() {
        let draft = AutomorphismDraft {
            modulus: 6,
            scalars: vec![0, 1, 2],
            polys: vec![vec![]],
        };
        let v = draft.validate();
        assert!(v.contains(&Violation::NotPrime(6)));
        assert!(v.contains(&Violation::ZeroScalar { position: 1 }));
        assert!(v.contains(&Violation::PolyCount { expected: 2, got: 1 }));
    }

    #[test]
    fn apply_examples() {
        let j = small_example();
        assert_eq!(j.apply(&[1, 4]).unwrap(), vec![2, 4]);
        assert_eq!(j.invert_apply(&[2, 4]).unwrap(), vec![1, 4]);

        let b = AutomorphismDraft {
            modulus: 2,
            scalars: vec![1, 1, 1],
            polys: vec![
                vec![(mono(&[1]), 1)],
                vec![(mono(&[1, 0]), 1), (mono(&[0, 1]), 1)],
            ],
        }
        .build()
        .unwrap();
        assert_eq!(b.apply(&[1, 1, 1]).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn apply_rejects_bad_input() {
        let j = small_example();
        assert_eq!(
            j.apply(&[1, 2, 3]),
            Err(JonqError::DimensionMismatch { expected: 2, got: 3 })
        );
        assert_eq!(j.invert_apply(&[5, 0]), Err(JonqError::DigitOutOfRange { value: 5, p: 5 }));
    }

    #[test]
    fn dimension_one() {
        let j = AutomorphismDraft { modulus: 11, scalars: vec![4], polys: vec![] }.build().unwrap();
        for x in 0..11 {
            let y = j.apply(&[x]).unwrap();
            assert_eq!(y, vec![4 * x % 11]);
            assert_eq!(j.invert_apply(&y).unwrap(), vec![x]);
        }
    }

    #[test]
    fn inverse_key_example() {
        let j = small_example();
        let inv = j.inverse_key();
        assert_eq!(inv.scalars(), &[3, 2]);
        // -a_2^{-1} * P1(3 y1) = -2 (4 y1^2 + 1) = 2 y1^2 + 3 over F5
        let expected =
            TriangularPolynomial::new(f(5), 1, 2, [(mono(&[2]), 2), (mono(&[0]), 3)]).unwrap();
        assert_eq!(inv.polys()[0], expected);
        assert!(inv.validate().is_empty());
        for y in all_points(5, 2) {
            assert_eq!(inv.apply(&y).unwrap(), j.invert_apply(&y).unwrap());
        }
    }

    #[test]
    fn exhaustive_round_trip_f7_dim4() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let j = random_auto(&mut rng, 7, 4, 6);
        for x in all_points(7, 4) {
            let y = j.apply(&x).unwrap();
            assert_eq!(y, oracle_apply(&j, &x));
            assert_eq!(j.invert_apply(&y).unwrap(), x);
        }
    }

    #[test]
    fn inverse_key_random_f11_dim3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.gen_range(0..=3);
            let j = random_auto(&mut rng, 11, 3, d);
            let inv = j.inverse_key();
            for x in all_points(11, 3) {
                assert_eq!(inv.apply(&j.apply(&x).unwrap()).unwrap(), x);
            }
        }
    }

    #[test]
    fn inverse_key_is_involutive_as_a_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let j = random_auto(&mut rng, 5, 3, 2);
            let back = j.inverse_key().inverse_key();
            for x in all_points(5, 3) {
                assert_eq!(back.apply(&x).unwrap(), j.apply(&x).unwrap());
            }
        }
    }

    #[test]
    fn high_degree_inverse_is_flagged_but_exact() {
        // degree 3 composed twice reaches degree 9 >= 7
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random_auto(&mut rng, 7, 4, 3);
        let inv = j.inverse_key();
        for x in all_points(7, 4) {
            assert_eq!(inv.apply(&j.apply(&x).unwrap()).unwrap(), x);
        }
        let worst = inv.polys().iter().map(|p| p.total_degree()).max().unwrap();
        if worst >= 7 {
            assert!(inv
                .validate()
                .iter()
                .any(|v| matches!(v, Violation::DegreeTooHigh { .. })));
        }
    }

    #[test]
    fn bijective_on_small_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &(p, n) in &[(2u64, 10usize), (3, 8), (5, 5), (7, 5), (11, 4), (13, 3), (101, 2)] {
            assert!(p.pow(n as u32) <= 20_000);
            let j = random_auto(&mut rng, p, n, 5);
            let mut seen = vec![false; p.pow(n as u32) as usize];
            for x in all_points(p, n) {
                let y = j.apply(&x).unwrap();
                let code = y.iter().rev().fold(0u64, |acc, &d| acc * p + d) as usize;
                assert!(!seen[code], "collision over F_{p}^{n}");
                seen[code] = true;
            }
        }
    }

    #[test]
    fn triangularity_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let j = random_auto(&mut rng, 13, 5, 4);
        for _ in 0..500 {
            let x: Vec<u64> = (0..5).map(|_| rng.gen_range(0..13)).collect();
            let k = rng.gen_range(0..5);
            let mut x2 = x.clone();
            x2[k] = (x2[k] + rng.gen_range(1..13)) % 13;
            let (y, y2) = (j.apply(&x).unwrap(), j.apply(&x2).unwrap());
            assert_eq!(y[..k], y2[..k]);
        }
    }

    #[test]
    fn large_prime_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let p = 18_446_744_073_709_551_557u64;
        let j = random_auto(&mut rng, p, 4, 5);
        for _ in 0..200 {
            let x: Vec<u64> = (0..4).map(|_| rng.gen_range(0..p)).collect();
            let y = j.apply(&x).unwrap();
            assert_eq!(j.invert_apply(&y).unwrap(), x);
        }
    }

    #[test]
    fn reversal_examples() {
        assert_eq!(reversal(&[1, 0, 1]), vec![1, 0, 1]);
        assert_eq!(reversal(&[2, 0, 3, 3]), vec![3, 3, 0, 2]);
        let x = vec![4, 8, 15, 16, 23, 42];
        assert_eq!(reversal(&reversal(&x)), x);
    }
}
