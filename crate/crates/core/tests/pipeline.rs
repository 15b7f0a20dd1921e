use jonqfpe::{keyfile, keygen, Factorization, KeySeed, NumeralFormat};
use num_bigint::BigUint;
use proptest::prelude::*;

const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Distinct primes with exponents, product at most `limit`.
fn block_strategy(limit: u64) -> impl Strategy<Value = Vec<(u64, u32)>> {
    prop::collection::vec((0..SMALL_PRIMES.len(), 1u32..5), 1..4).prop_filter_map("too large", move |picks| {
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        for (i, r) in picks {
            let p = SMALL_PRIMES[i];
            if !pairs.iter().any(|&(q, _)| q == p) {
                pairs.push((p, r));
            }
        }
        let n: u64 = pairs.iter().map(|&(p, r)| p.pow(r)).product();
        (n <= limit).then_some(pairs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_key_permutes_the_block(pairs in block_strategy(3_000), degree in 0u32..6, seed in any::<[u8; 32]>()) {
        let fac = Factorization::from_factors(&pairs).unwrap();
        let key = keygen(&fac, degree, KeySeed(seed));
        let n = u64::try_from(fac.n()).unwrap();
        let mut seen = vec![false; n as usize];
        for m in 0..n {
            let c = key.encrypt(&BigUint::from(m)).unwrap();
            let slot = u64::try_from(&c).unwrap();
            prop_assert!(slot < n);
            prop_assert!(!seen[slot as usize], "collision at {}", slot);
            seen[slot as usize] = true;
            prop_assert_eq!(key.decrypt(&c).unwrap(), BigUint::from(m));
        }
    }

    #[test]
    fn serialized_keys_encrypt_identically(pairs in block_strategy(1_000_000), seed in any::<[u8; 32]>(), m in any::<u64>()) {
        let fac = Factorization::from_factors(&pairs).unwrap();
        let key = keygen(&fac, 4, KeySeed(seed));
        let back = keyfile::parse(keyfile::serialize(&key).as_bytes()).unwrap();
        let m = BigUint::from(m) % fac.n();
        prop_assert_eq!(back.encrypt(&m).unwrap(), key.encrypt(&m).unwrap());
    }
}

#[test]
fn n128_sampled_round_trip() {
    let fac = Factorization::preset("n128").unwrap();
    let key = keygen(&fac, 5, KeySeed([3; 32]));
    let n = fac.n().clone();
    let step = &n / 10_007u32 + 1u32;
    let mut m = BigUint::from(12_345u32);
    for _ in 0..10_000 {
        let c = key.encrypt(&m).unwrap();
        assert!(c < n);
        assert_eq!(key.decrypt(&c).unwrap(), m);
        m = (m + &step) % &n;
    }
}

#[test]
fn batch_matches_sequential() {
    let fac = Factorization::from_factors(&[(3, 4), (7, 3), (11, 2)]).unwrap();
    let key = keygen(&fac, 5, KeySeed([9; 32]));
    let msgs: Vec<BigUint> = (0..3_000u32).map(|i| BigUint::from(i * 331) % fac.n()).collect();
    let one: Vec<BigUint> = msgs.iter().map(|m| key.encrypt(m).unwrap()).collect();
    for workers in [1, 2, 5, 16] {
        assert_eq!(key.encrypt_batch(&msgs, workers).unwrap(), one);
        assert_eq!(key.decrypt_batch(&one, workers).unwrap(), msgs);
    }
}

#[test]
fn pan16_numerals_round_trip() {
    let fac = Factorization::preset("pan16").unwrap();
    let format: NumeralFormat = "digits:10:16".parse().unwrap();
    format.check_block(&fac).unwrap();
    let key = keygen(&fac, 5, KeySeed([5; 32]));
    for text in ["0000000000000000", "0000000000000001", "4111111111111111", "9999999999999999"] {
        let c = format.encode(&key.encrypt(&format.decode(text).unwrap()).unwrap());
        assert_eq!(c.len(), 16);
        assert_eq!(format.encode(&key.decrypt(&format.decode(&c).unwrap()).unwrap()), text);
    }
}
