//! Acceptance criteria. Run with `cargo test -p jonqfpe --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use jonqfpe::analysis::{
    count_triangular_autos, distinctness_census, floor_log2, paper_comparison_report,
    triangular_count_formula, CLAIMED_LOG2, PRINTED_COUNT_TABLE, PRINTED_N,
};
use jonqfpe::cipher::effective_degree;
use jonqfpe::field::is_prime;
use jonqfpe::{keyfile, keygen, to_digits, Factorization, KeySeed, NumeralFormat, PrimeModulus};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn prime(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

/// 1. Exhaustive permutation and round trip, N = 72 and N = 5000, 20 keys each.
fn exhaustive_permutation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0u64;
    for factors in [&[(2u64, 3u32), (3, 2)][..], &[(2, 3), (5, 4)]] {
        let block = Factorization::from_factors(factors).unwrap();
        let n = block.n().to_u64().unwrap();
        for _ in 0..20 {
            let key = keygen(&block, 5, KeySeed(rng.gen()));
            let mut hit = vec![false; n as usize];
            for m in 0..n {
                let c = key.encrypt(&big(m)).map_err(|e| e.to_string())?;
                let cu = c.to_u64().unwrap();
                ensure!(cu < n, "N={n}: E({m}) = {cu} out of range");
                ensure!(!hit[cu as usize], "N={n}: collision at {cu}");
                hit[cu as usize] = true;
                let back = key.decrypt(&c).map_err(|e| e.to_string())?;
                ensure!(back == big(m), "N={n}: D(E({m})) = {back}");
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}, limit 5s");
    Ok(format!("{checked} points over 40 keys, zero collisions, {elapsed:.2?}"))
}

/// 2. The worked digit example under the 5^3 modulus and little-endian digits.
fn worked_example() -> Outcome {
    let block = Factorization::from_factors(&[(2, 3), (5, 3)]).unwrap();
    let residues = block.crt_split(&big(471)).map_err(|e| e.to_string())?;
    ensure!(residues.residues() == [big(7), big(96)], "split gave {residues:?}");
    let digits = to_digits(&big(96), prime(5), 3).map_err(|e| e.to_string())?;
    ensure!(&*digits == [1, 4, 3], "digits of 96 gave {digits:?}");
    let seven = to_digits(&big(7), prime(2), 3).map_err(|e| e.to_string())?;
    ensure!(&*seven == [1, 1, 1], "digits of 7 gave {seven:?}");
    Ok("psi(471) = (7, 96); 96 -> (1,4,3) little-endian, i.e. 341 in base 5".into())
}

/// 3. Exponent pairs of the automorphism-count table.
fn count_table() -> Outcome {
    let mut notes = Vec::new();
    for (row, &(n, d, printed_p, printed_units)) in PRINTED_COUNT_TABLE.iter().enumerate() {
        let pow = |p: u64, e: u32, u: u32| big(p).pow(e) * big(p - 1).pow(u);
        // p = 163 > d: the count is exactly p^E (p-1)^n with the printed E
        let got = count_triangular_autos(prime(163), n, d);
        ensure!(got == pow(163, printed_p, n as u32), "row {}: p=163 mismatch", row + 1);
        if printed_units != n as u32 {
            ensure!(got != pow(163, printed_p, printed_units), "row {}: printed form unexpectedly equal", row + 1);
            notes.push(format!(
                "row {} printed (p-1)^{printed_units}, computed (p-1)^{n}",
                row + 1
            ));
        }
        // p = 5: the counting formula itself, then the clamped count
        ensure!(
            triangular_count_formula(5, n, d) == pow(5, printed_p, n as u32),
            "row {}: p=5 formula mismatch",
            row + 1
        );
        let eff = effective_degree(d, 5);
        let clamped = count_triangular_autos(prime(5), n, d);
        if eff == d {
            ensure!(clamped == pow(5, printed_p, n as u32), "row {}: p=5 count mismatch", row + 1);
        } else {
            ensure!(
                clamped == triangular_count_formula(5, n, eff),
                "row {}: p=5 clamped count mismatch",
                row + 1
            );
            notes.push(format!("row {} at p=5 clamps degree {d} to {eff}", row + 1));
        }
    }
    Ok(format!("(34,4) (55,4) (83,4) (69,5) (125,5) (209,5) exact; {}", notes.join("; ")))
}

/// 4. Syntactic and functional counts agree.
fn census() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (p, n, d) in [(3u64, 2usize, 2u32), (2, 2, 1), (5, 2, 1)] {
        let census = distinctness_census(prime(p), n, d).map_err(|e| e.to_string())?;
        ensure!(census.syntactic == census.functional, "(p={p},n={n},d={d}): {census}");
        ensure!(
            big(census.syntactic) == count_triangular_autos(prime(p), n, d),
            "(p={p},n={n},d={d}): enumeration disagrees with the count"
        );
        parts.push(format!("({p},{n},{d}) {census}"));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}, limit 30s");
    Ok(parts.join(", "))
}

/// 5. Block size and keyspace bound near 2^128.
fn comparison() -> Outcome {
    let report = paper_comparison_report();
    ensure!(report.printed_n.to_string() == PRINTED_N, "printed N altered");
    ensure!(
        report.corrected_n_matches(),
        "DISCREPANCY: 163^5*509^5*613^5 = {} != {}",
        report.corrected_n,
        report.printed_n
    );
    ensure!(!is_prime(603) && report.printed_p3_factors == vec![(3, 2), (67, 1)], "603 check");
    ensure!(is_prime(613) && report.corrected_p3_is_prime, "613 check");
    let log = floor_log2(&report.bound);
    ensure!(log.abs_diff(CLAIMED_LOG2) <= 1, "floor(log2 bound) = {log}, claimed {CLAIMED_LOG2}");
    Ok(format!(
        "N reproduced with 613; 603 = 3^2*67; floor(log2 bound) = {log} (literal 603 form: {})",
        floor_log2(&report.literal_bound)
    ))
}

/// 6. Key files round-trip byte-exactly.
fn serialization() -> Outcome {
    let blocks = [
        &[(2u64, 3u32), (3, 2)][..],
        &[(2, 3), (5, 4)],
        &[(7, 3), (11, 2), (13, 1)],
        &[(2, 16), (5, 16)],
        &[(163, 5), (509, 5), (613, 5)],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut count = 0;
    for factors in blocks {
        let block = Factorization::from_factors(factors).unwrap();
        for k in 0..40 {
            let degree = [0, 1, 2, 3, 5][k % 5];
            let key = keygen(&block, degree, KeySeed(rng.gen()));
            let text = keyfile::serialize(&key);
            ensure!(keyfile::serialize(&key) == text, "serialize not deterministic");
            let parsed = keyfile::parse(text.as_bytes()).map_err(|e| e.to_string())?;
            ensure!(parsed == key, "parse(serialize(K)) != K for {factors:?}");
            ensure!(keyfile::serialize(&parsed) == text, "bytes changed after round trip");
            count += 1;
        }
    }
    Ok(format!("{count} keys over 5 block sizes"))
}

/// 7. One worker and eight workers agree on 10^5 messages.
fn parallel_equivalence() -> Outcome {
    let start = Instant::now();
    let block = Factorization::preset("pan16").unwrap();
    let key = keygen(&block, 5, KeySeed([7; 32]));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let messages: Vec<BigUint> = (0..100_000).map(|_| big(rng.gen_range(0..10u64.pow(16)))).collect();
    let one = key.encrypt_batch(&messages, 1).map_err(|e| e.to_string())?;
    let eight = key.encrypt_batch(&messages, 8).map_err(|e| e.to_string())?;
    ensure!(one.len() == messages.len(), "lost outputs");
    ensure!(one == eight, "outputs differ between 1 and 8 workers");
    Ok(format!("10^5 messages identical, {:.2?}", start.elapsed()))
}

/// 8. 16-digit numerals stay 16-digit numerals.
fn pan_demo() -> Outcome {
    let block = Factorization::preset("pan16").unwrap();
    let format: NumeralFormat = "digits:10:16".parse().unwrap();
    format.check_block(&block).map_err(|e| e.to_string())?;
    let key = keygen(&block, 5, KeySeed([8; 32]));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10_000 {
        let input = format!("{:016}", rng.gen_range(0..10u64.pow(16)));
        let m = format.decode(&input).map_err(|e| e.to_string())?;
        let c = key.encrypt(&m).map_err(|e| e.to_string())?;
        let out = format.encode(&c);
        ensure!(out.len() == 16 && out.bytes().all(|b| b.is_ascii_digit()), "{input} -> {out}");
        let back = key.decrypt(&format.decode(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(format.encode(&back) == input, "{input} -> {out} -> {}", format.encode(&back));
    }
    Ok("10^4 16-digit values: ciphertexts 16 digits, decryption exact".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exhaustive permutation, N=72 and N=5000", exhaustive_permutation),
        ("worked residue/digit example", worked_example),
        ("automorphism count table", count_table),
        ("distinctness census", census),
        ("block size and bound near 2^128", comparison),
        ("key serialization round trip", serialization),
        ("parallel equivalence, 1 vs 8 workers", parallel_equivalence),
        ("16-digit format preservation", pan_demo),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
