//! Canonical text form of a [`CipherKey`].
//!
//! ```text
//! JONQFPE-KEY v1
//! N 5000
//! factors 2^3 5^4
//! degree-bound 2
//! scalars 1 1 1 1 1
//! poly 1 1 1 0 1
//! ...
//! ```
//!
//! For each factor `f` (ascending prime) and stage `s ∈ {1, 2}` there is one
//! `scalars f s a_1 … a_n` line followed by `poly f s i c_1 … c_M` for
//! `i = 1 … n-1`, listing every coefficient up to degree `min(d, p_f - 1)` in
//! canonical monomial order. Every line ends in LF, tokens are separated by
//! one space, and integers carry no sign or leading zeros.

use num_bigint::BigUint;
use thiserror::Error;

use crate::cipher::{dense_at, effective_degree, CipherKey};
use crate::codec::{parse_prime_power, Factorization};
use crate::jonquieres::JonquieresAutomorphism;
use crate::poly::{monomial_count_usize, TriangularPolynomial};

pub const HEADER: &str = "JONQFPE-KEY v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("not a key file: expected header `{HEADER}`")]
    Version,
}

pub fn serialize(key: &CipherKey) -> String {
    let fac = key.factorization();
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("N {}\n", fac.n()));
    out.push_str(&format!("factors {}\n", fac.factor_text()));
    out.push_str(&format!("degree-bound {}\n", key.degree_bound()));
    for (f, pp) in fac.factors().iter().enumerate() {
        let eff = effective_degree(key.degree_bound(), pp.prime().get());
        for (s, auto) in [(1, &key.stage1()[f]), (2, &key.stage2()[f])] {
            out.push_str(&format!("scalars {} {s}", f + 1));
            for a in auto.scalars() {
                out.push_str(&format!(" {a}"));
            }
            out.push('\n');
            for poly in auto.polys() {
                out.push_str(&format!("poly {} {s} {}", f + 1, poly.index()));
                for c in dense_at(poly, eff) {
                    out.push_str(&format!(" {c}"));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn parse(bytes: &[u8]) -> Result<CipherKey, KeyFileError> {
    let text = std::str::from_utf8(bytes).map_err(|_| KeyFileError::Version)?;
    let mut lines = Lines::new(text);

    if let Some(pos) = text.find('\r') {
        if text.starts_with(HEADER) {
            return Err(syntax(text[..pos].matches('\n').count() + 1, "carriage return in key file"));
        }
    }
    match lines.next() {
        Some((_, HEADER)) => {}
        _ => return Err(KeyFileError::Version),
    }
    if !text.ends_with('\n') {
        return Err(syntax(text.lines().count(), "missing final newline"));
    }

    let (no, rest) = lines.keyed("N")?;
    let n: BigUint = parse_uint(no, single(no, rest)?)?;

    let (no, rest) = lines.keyed("factors")?;
    let pairs = tokens(no, rest)?
        .into_iter()
        .map(|t| {
            let (p, r) = parse_prime_power(t).map_err(|e| syntax(no, e.to_string()))?;
            // reject non-canonical spellings such as `5` or `05^1`
            if format!("{p}^{r}") != t {
                return Err(syntax(no, format!("`{t}` is not a canonical p^r")));
            }
            Ok((p, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(validation(no, "factors must be listed by strictly ascending prime"));
    }
    let fac = Factorization::new(&n, &pairs).map_err(|e| validation(no, e.to_string()))?;

    let (no, rest) = lines.keyed("degree-bound")?;
    let degree_bound: u32 = parse_uint(no, single(no, rest)?)?;

    let mut stages: [Vec<JonquieresAutomorphism>; 2] = [Vec::new(), Vec::new()];
    for (f, pp) in fac.factors().iter().enumerate() {
        let prime = pp.prime();
        let p = prime.get();
        let dim = pp.exponent() as usize;
        let eff = effective_degree(degree_bound, p);
        for s in 1..=2 {
            let (no, rest) = lines.keyed("scalars")?;
            let values = tagged(no, rest, &[f + 1, s])?;
            if values.len() != dim {
                return Err(validation(no, format!("expected {dim} scalars, got {}", values.len())));
            }
            let scalars = values
                .iter()
                .map(|t| {
                    let a: u64 = parse_uint(no, t)?;
                    if a == 0 || a >= p {
                        return Err(validation(no, format!("scalar {a} is not a nonzero element of F_{p}")));
                    }
                    Ok(a)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut polys = Vec::with_capacity(dim.saturating_sub(1));
            for i in 1..dim {
                let (no, rest) = lines.keyed("poly")?;
                let values = tagged(no, rest, &[f + 1, s, i])?;
                let expected = monomial_count_usize(i, eff);
                if values.len() != expected {
                    return Err(validation(
                        no,
                        format!("P_{i} over F_{p} needs {expected} coefficients, got {}", values.len()),
                    ));
                }
                let dense = values
                    .iter()
                    .map(|t| parse_uint(no, t))
                    .collect::<Result<Vec<u64>, _>>()?;
                let poly = TriangularPolynomial::from_dense(prime, i, eff, &dense)
                    .map_err(|e| validation(no, e.to_string()))?;
                polys.push(poly);
            }
            let auto = JonquieresAutomorphism::new(prime, scalars, polys)
                .map_err(|e| validation(no, e.to_string()))?;
            stages[s - 1].push(auto);
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(syntax(no, "unexpected trailing content"));
    }
    let [stage1, stage2] = stages;
    CipherKey::new(fac, degree_bound, stage1, stage2).map_err(|e| validation(0, e.to_string()))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Split<'a, char>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let body = text.strip_suffix('\n').unwrap_or(text);
        Self { inner: body.split('\n').enumerate(), last: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let (k, line) = self.inner.next()?;
        self.last = k + 1;
        Some((k + 1, line))
    }

    /// Next line, which must start with `keyword` and a space.
    fn keyed(&mut self, keyword: &str) -> Result<(usize, &'a str), KeyFileError> {
        let Some((no, line)) = self.next() else {
            return Err(syntax(self.last + 1, format!("expected `{keyword}` line, found end of file")));
        };
        match line.strip_prefix(keyword).and_then(|r| r.strip_prefix(' ')) {
            Some(rest) => Ok((no, rest)),
            None => Err(syntax(no, format!("expected `{keyword}` line"))),
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> KeyFileError {
    KeyFileError::Syntax { line, message: message.into() }
}

fn validation(line: usize, message: impl Into<String>) -> KeyFileError {
    KeyFileError::Validation { line, message: message.into() }
}

fn tokens(line: usize, rest: &str) -> Result<Vec<&str>, KeyFileError> {
    let parts: Vec<&str> = rest.split(' ').collect();
    if parts.iter().any(|t| t.is_empty()) {
        return Err(syntax(line, "tokens must be separated by exactly one space"));
    }
    Ok(parts)
}

fn single(line: usize, rest: &str) -> Result<&str, KeyFileError> {
    match tokens(line, rest)?.as_slice() {
        [one] => Ok(one),
        _ => Err(syntax(line, "expected exactly one value")),
    }
}

/// Checks the leading `f s [i]` tags and returns the remaining values.
fn tagged<'a>(line: usize, rest: &'a str, tags: &[usize]) -> Result<Vec<&'a str>, KeyFileError> {
    let parts = tokens(line, rest)?;
    if parts.len() < tags.len() {
        return Err(syntax(line, "missing tags"));
    }
    for (t, &want) in parts.iter().zip(tags) {
        let got: usize = parse_uint(line, t)?;
        if got != want {
            let want_text = tags.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            return Err(syntax(line, format!("expected tags `{want_text}`")));
        }
    }
    Ok(parts[tags.len()..].to_vec())
}

fn parse_uint<T: std::str::FromStr>(line: usize, t: &str) -> Result<T, KeyFileError> {
    let canonical = !t.is_empty()
        && t.bytes().all(|b| b.is_ascii_digit())
        && (t == "0" || !t.starts_with('0'));
    if !canonical {
        return Err(syntax(line, format!("`{t}` is not a canonical decimal integer")));
    }
    t.parse().map_err(|_| syntax(line, format!("`{t}` is out of range")))
}
