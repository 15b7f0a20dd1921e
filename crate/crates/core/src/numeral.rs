//! Fixed-width numeral strings as message units.
//!
//! `digits:10:16` reads 16-character decimal strings such as card numbers.
//! The block size must be exactly `base^width`, so every ciphertext is again
//! a numeral string of the same width.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::codec::Factorization;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumeralError {
    #[error("bad format `{0}`: expected digits:<base>:<width> with base in 2..=36")]
    Spec(String),
    #[error("format {format} covers {domain} values but the block size is {n}")]
    DomainMismatch { format: NumeralFormat, domain: BigUint, n: BigUint },
    #[error("`{value}` is not a {width}-digit base-{base} numeral")]
    BadNumeral { value: String, base: u32, width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumeralFormat {
    pub base: u32,
    pub width: usize,
}

impl NumeralFormat {
    pub fn new(base: u32, width: usize) -> Result<Self, NumeralError> {
        if !(2..=36).contains(&base) || width == 0 {
            return Err(NumeralError::Spec(format!("digits:{base}:{width}")));
        }
        Ok(Self { base, width })
    }

    /// `base^width`.
    pub fn domain(&self) -> BigUint {
        BigUint::from(self.base).pow(self.width as u32)
    }

    pub fn check_block(&self, fac: &Factorization) -> Result<(), NumeralError> {
        let domain = self.domain();
        if &domain != fac.n() {
            return Err(NumeralError::DomainMismatch { format: *self, domain, n: fac.n().clone() });
        }
        Ok(())
    }

    pub fn decode(&self, s: &str) -> Result<BigUint, NumeralError> {
        let bad = || NumeralError::BadNumeral { value: s.to_string(), base: self.base, width: self.width };
        if s.len() != self.width || !s.chars().all(|c| c.is_digit(self.base)) {
            return Err(bad());
        }
        BigUint::parse_bytes(s.as_bytes(), self.base).ok_or_else(bad)
    }

    /// Zero-padded to `width`.
    pub fn encode(&self, value: &BigUint) -> String {
        let digits = value.to_str_radix(self.base);
        format!("{digits:0>width$}", width = self.width)
    }
}

impl fmt::Display for NumeralFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "digits:{}:{}", self.base, self.width)
    }
}

impl FromStr for NumeralFormat {
    type Err = NumeralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumeralError::Spec(s.to_string());
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("digits"), Some(base), Some(width), None) => Self::new(
                base.parse().map_err(|_| bad())?,
                width.parse().map_err(|_| bad())?,
            )
            .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pan_format() {
        let fmt: NumeralFormat = "digits:10:16".parse().unwrap();
        fmt.check_block(&Factorization::preset("pan16").unwrap()).unwrap();
        assert_eq!(fmt.decode("0000000000000042").unwrap(), BigUint::from(42u32));
        assert_eq!(fmt.encode(&BigUint::from(42u32)), "0000000000000042");
        assert!(fmt.decode("42").is_err());
        assert!(fmt.decode("00000000000000x2").is_err());
        assert!(fmt.decode("+000000000000042").is_err());
    }

    #[test]
    fn domain_must_match() {
        let fmt: NumeralFormat = "digits:10:4".parse().unwrap();
        let fac = Factorization::from_factors(&[(2, 3), (5, 4)]).unwrap();
        assert!(matches!(fmt.check_block(&fac), Err(NumeralError::DomainMismatch { .. })));
        let fac = Factorization::from_factors(&[(2, 4), (5, 4)]).unwrap();
        fmt.check_block(&fac).unwrap();
    }

    #[test]
    fn bad_specs() {
        for s in ["digits:1:4", "digits:37:2", "digits:10", "hex:16:4", "digits:10:0", "digits:a:4"] {
            assert!(s.parse::<NumeralFormat>().is_err(), "{s}");
        }
        let hex: NumeralFormat = "digits:16:4".parse().unwrap();
        assert_eq!(hex.decode("00ff").unwrap(), BigUint::from(255u32));
        assert_eq!(hex.encode(&BigUint::from(255u32)), "00ff");
    }
}
