//! The block cipher: a keyed permutation of `[0, N)`.
//!
//! Encryption splits `m` into CRT residues, writes each residue as base-`p`
//! digits, applies the stage-1 automorphism of that prime, reverses the
//! digit block, applies the stage-2 automorphism, and reassembles. Every
//! prime block is handled on its own; blocks never exchange digits.

use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::batch;
use crate::codec::{from_digits, to_digits, CodecError, Factorization, ResidueTuple};
use crate::jonquieres::{JonqError, JonquieresAutomorphism};
use crate::poly::{monomial_count_usize, monomials, TriangularPolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CipherError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Jonquieres(#[from] JonqError),
    #[error("stage {stage} automorphism for factor {factor}: {reason}")]
    Shape { factor: usize, stage: usize, reason: String },
}

/// 32 bytes expanded into all key material by [`keygen`].
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct KeySeed(pub [u8; 32]);

impl KeySeed {
    /// A seed from operating-system entropy.
    pub fn random() -> Self {
        let mut seed = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut seed);
        KeySeed(seed)
    }
}

impl fmt::Debug for KeySeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("KeySeed(..)")
    }
}

/// Two triangular automorphisms per prime-power factor of `N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CipherKey {
    factorization: Factorization,
    degree_bound: u32,
    stage1: Vec<JonquieresAutomorphism>,
    stage2: Vec<JonquieresAutomorphism>,
}

/// `min(d, p - 1)`: polynomials over `F_p` must stay below degree `p`.
pub fn effective_degree(degree_bound: u32, p: u64) -> u32 {
    (degree_bound as u64).min(p - 1) as u32
}

impl CipherKey {
    /// Checks that `stage1[i]` and `stage2[i]` act on `F_{p_i}^{r_i}` with
    /// polynomials of degree at most `min(d, p_i - 1)`. Polynomials are
    /// re-declared at exactly that bound so equal keys compare equal.
    pub fn new(
        factorization: Factorization,
        degree_bound: u32,
        stage1: Vec<JonquieresAutomorphism>,
        stage2: Vec<JonquieresAutomorphism>,
    ) -> Result<Self, CipherError> {
        let k = factorization.factors().len();
        for (stage, autos) in [(1, &stage1), (2, &stage2)] {
            if autos.len() != k {
                return Err(CipherError::Shape {
                    factor: autos.len().min(k) + 1,
                    stage,
                    reason: format!("expected {k} automorphisms, got {}", autos.len()),
                });
            }
        }
        let normalize = |stage: usize, autos: Vec<JonquieresAutomorphism>| {
            autos
                .into_iter()
                .zip(factorization.factors())
                .enumerate()
                .map(|(i, (auto, pp))| {
                    let shape = |reason: String| CipherError::Shape { factor: i + 1, stage, reason };
                    if auto.modulus() != pp.prime() {
                        return Err(shape(format!(
                            "works over F_{}, factor prime is {}",
                            auto.modulus(),
                            pp.prime()
                        )));
                    }
                    if auto.dimension() != pp.exponent() as usize {
                        return Err(shape(format!(
                            "dimension {} does not match exponent {}",
                            auto.dimension(),
                            pp.exponent()
                        )));
                    }
                    let eff = effective_degree(degree_bound, pp.prime().get());
                    let polys = auto
                        .polys()
                        .iter()
                        .map(|poly| {
                            if poly.total_degree() > eff {
                                return Err(shape(format!(
                                    "P_{} has degree {} above {eff}",
                                    poly.index(),
                                    poly.total_degree()
                                )));
                            }
                            let terms = poly.terms().map(|(m, c)| (m.clone(), c));
                            TriangularPolynomial::new(pp.prime(), poly.index(), eff, terms)
                                .map_err(|e| shape(e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(JonquieresAutomorphism::new(pp.prime(), auto.scalars().to_vec(), polys)?)
                })
                .collect::<Result<Vec<_>, CipherError>>()
        };
        let stage1 = normalize(1, stage1)?;
        let stage2 = normalize(2, stage2)?;
        Ok(Self { factorization, degree_bound, stage1, stage2 })
    }

    /// All scalars 1, all polynomials 0: encryption only reverses digit blocks.
    pub fn identity(factorization: Factorization, degree_bound: u32) -> Result<Self, CipherError> {
        let autos = factorization
            .factors()
            .iter()
            .map(|pp| {
                let eff = effective_degree(degree_bound, pp.prime().get());
                JonquieresAutomorphism::identity(pp.prime(), pp.exponent() as usize, eff)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factorization, degree_bound, autos.clone(), autos)
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn n(&self) -> &BigUint {
        self.factorization.n()
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn stage1(&self) -> &[JonquieresAutomorphism] {
        &self.stage1
    }

    pub fn stage2(&self) -> &[JonquieresAutomorphism] {
        &self.stage2
    }

    /// Human-readable notes about factors whose mixing is structurally weak.
    ///
    /// Over `F_2` the degree cap is 1, so that block's automorphisms are
    /// affine maps of `F_2^r`.
    pub fn mixing_warnings(&self) -> Vec<String> {
        self.factorization
            .factors()
            .iter()
            .filter(|pp| pp.prime().get() == 2)
            .map(|pp| {
                format!(
                    "factor 2^{}: polynomials over F_2 are limited to degree 1, so this block is mixed affinely",
                    pp.exponent()
                )
            })
            .collect()
    }

    fn blocks(&self, m: &BigUint) -> Result<Vec<Vec<u64>>, CipherError> {
        let residues = self.factorization.crt_split(m)?;
        residues
            .residues()
            .iter()
            .zip(self.factorization.factors())
            .map(|(r, pp)| Ok(to_digits(r, pp.prime(), pp.exponent())?.into_inner()))
            .collect()
    }

    fn assemble(&self, blocks: Vec<Vec<u64>>) -> Result<BigUint, CipherError> {
        let residues = blocks
            .iter()
            .zip(self.factorization.factors())
            .map(|(d, pp)| from_digits(d, pp.prime()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.factorization.crt_combine(&ResidueTuple::new(residues))?)
    }

    /// `E_K(m)` for `m ∈ [0, N)`.
    pub fn encrypt(&self, m: &BigUint) -> Result<BigUint, CipherError> {
        let mut blocks = self.blocks(m)?;
        for (i, block) in blocks.iter_mut().enumerate() {
            let mut mid = self.stage1[i].apply(block)?;
            mid.reverse();
            *block = self.stage2[i].apply(&mid)?;
        }
        self.assemble(blocks)
    }

    /// Inverse of [`encrypt`](Self::encrypt), solving each stage sequentially.
    pub fn decrypt(&self, c: &BigUint) -> Result<BigUint, CipherError> {
        let mut blocks = self.blocks(c)?;
        for (i, block) in blocks.iter_mut().enumerate() {
            let mut mid = self.stage2[i].invert_apply(block)?;
            mid.reverse();
            *block = self.stage1[i].invert_apply(&mid)?;
        }
        self.assemble(blocks)
    }

    pub fn encrypt_batch(&self, messages: &[BigUint], workers: usize) -> Result<Vec<BigUint>, CipherError> {
        batch::try_map(messages, workers, |m| self.encrypt(m))
    }

    pub fn decrypt_batch(&self, ciphertexts: &[BigUint], workers: usize) -> Result<Vec<BigUint>, CipherError> {
        batch::try_map(ciphertexts, workers, |c| self.decrypt(c))
    }

    /// Decryption key with every automorphism inverted explicitly.
    ///
    /// Composed inverses reach degree `p - 1` in each variable, so the term
    /// count grows like `p^(r-1)`. Use [`decrypt`](Self::decrypt) for anything
    /// beyond small fields.
    pub fn inverse(&self) -> InverseKey {
        let invert = |autos: &[JonquieresAutomorphism]| autos.iter().map(|a| a.inverse_key()).collect();
        InverseKey {
            key: CipherKey {
                factorization: self.factorization.clone(),
                degree_bound: self.degree_bound,
                stage1: invert(&self.stage2),
                stage2: invert(&self.stage1),
            },
        }
    }
}

/// Decryption running forward through explicitly inverted automorphisms.
///
/// Stage 1 here is the inverse of the encryption's stage 2 and vice versa,
/// so decryption is the same pipeline as encryption.
#[derive(Clone, Debug)]
pub struct InverseKey {
    key: CipherKey,
}

impl InverseKey {
    pub fn decrypt(&self, c: &BigUint) -> Result<BigUint, CipherError> {
        self.key.encrypt(c)
    }

    pub fn stage1(&self) -> &[JonquieresAutomorphism] {
        &self.key.stage1
    }

    pub fn stage2(&self) -> &[JonquieresAutomorphism] {
        &self.key.stage2
    }
}

/// Draws a key from `seed`: for each factor in ascending prime order, stage 1
/// then stage 2, the scalars uniform on `[1, p-1]` followed by the
/// coefficients of `P_1 … P_{n-1}` uniform on `[0, p-1]` in canonical
/// monomial order.
pub fn keygen(factorization: &Factorization, degree_bound: u32, seed: KeySeed) -> CipherKey {
    let mut rng = ChaCha20Rng::from_seed(seed.0);
    let mut stages: [Vec<JonquieresAutomorphism>; 2] = [Vec::new(), Vec::new()];
    for pp in factorization.factors() {
        let f = pp.prime();
        let p = f.get();
        let n = pp.exponent() as usize;
        let eff = effective_degree(degree_bound, p);
        for stage in stages.iter_mut() {
            let scalars: Vec<u64> = (0..n).map(|_| rng.gen_range(1..p)).collect();
            let polys = (1..n)
                .map(|i| {
                    let dense: Vec<u64> =
                        (0..monomial_count_usize(i, eff)).map(|_| rng.gen_range(0..p)).collect();
                    TriangularPolynomial::from_dense(f, i, eff, &dense).expect("coefficients in range")
                })
                .collect();
            stage.push(JonquieresAutomorphism::new(f, scalars, polys).expect("scalars drawn nonzero"));
        }
    }
    let [stage1, stage2] = stages;
    CipherKey { factorization: factorization.clone(), degree_bound, stage1, stage2 }
}

/// Dense coefficients of `poly` over all monomials up to `degree`, zeros included.
pub(crate) fn dense_at(poly: &TriangularPolynomial, degree: u32) -> Vec<u64> {
    monomials(poly.index(), degree).iter().map(|m| poly.coefficient(m)).collect()
}
