//! Rough throughput check for the 16-digit preset.

use std::time::Instant;

use jonqfpe::{keygen, Factorization, KeySeed};
use num_bigint::BigUint;

fn main() {
    let degree: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let workers: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let block = Factorization::preset("pan16").unwrap();
    let key = keygen(&block, degree, KeySeed([1; 32]));
    let messages: Vec<BigUint> = (0..20_000u64).map(|m| BigUint::from(m * 499_999_999_989)).collect();
    let start = Instant::now();
    let out = key.encrypt_batch(&messages, workers).unwrap();
    let elapsed = start.elapsed();
    println!(
        "degree {degree}, {workers} workers: {} messages in {elapsed:.2?} ({:.1} us/message)",
        out.len(),
        elapsed.as_secs_f64() * 1e6 / out.len() as f64
    );
}
