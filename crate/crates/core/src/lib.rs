//! A format-preserving block cipher for blocks of any size
//! `N = p_1^r_1 ⋯ p_k^r_k`.
//!
//! A message `m ∈ [0, N)` is split by the Chinese Remainder Theorem into one
//! residue per prime power, each residue is read as a vector of base-`p`
//! digits, i.e. a point of the affine space `F_p^r`, and that point is moved
//! by two triangular polynomial automorphisms with a digit reversal between
//! them. The results are glued back into a number in `[0, N)`.
//!
//! ```
//! use jonqfpe::{keygen, Factorization, KeySeed};
//! use num_bigint::BigUint;
//!
//! let block = Factorization::preset("pan16").unwrap();
//! let key = keygen(&block, 5, KeySeed([7; 32]));
//! let m = BigUint::from(4_111_111_111_111_111u64);
//! let c = key.encrypt(&m).unwrap();
//! assert!(&c < block.n());
//! assert_eq!(key.decrypt(&c).unwrap(), m);
//! ```
//!
//! The [`analysis`] module counts the keys available under a degree cap.

pub mod analysis;
pub mod batch;
pub mod cipher;
pub mod codec;
pub mod field;
pub mod jonquieres;
pub mod keyfile;
pub mod numeral;
pub mod poly;

pub use cipher::{keygen, CipherError, CipherKey, InverseKey, KeySeed};
pub use codec::{from_digits, to_digits, CodecError, DigitVector, Factorization, ResidueTuple};
pub use field::{mod_inverse, PrimeModulus};
pub use jonquieres::{reversal, AutomorphismDraft, JonqError, JonquieresAutomorphism, Violation};
pub use keyfile::KeyFileError;
pub use numeral::NumeralFormat;
pub use poly::{monomial_count, Monomial, TriangularPolynomial};
