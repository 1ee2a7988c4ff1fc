// SPDX-License-Identifier: Apache-2.0

use cqzl_core::channel::{codeword_abs_overlap, trine_channel};
use cqzl_core::code::{code_gram, empirical_rate, expurgate_code, interference_sums, sample_codewords};
use cqzl_core::factor::is_diagonally_dominant;
use cqzl_core::simplex::SimplexDistribution;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn construction_is_deterministic(seed in any::<u64>(), n in 6usize..13) {
        let t = trine_channel();
        let p = SimplexDistribution::uniform(3);
        let (a, ca) = expurgate_code(&t, &p, n, seed).unwrap();
        let (b, cb) = expurgate_code(&t, &p, n, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(serde_json::to_string(&ca).unwrap(), serde_json::to_string(&cb).unwrap());
    }

    #[test]
    fn certificate_is_sound(seed in any::<u64>(), n in 6usize..13) {
        let t = trine_channel();
        let (code, cert) = expurgate_code(&t, &SimplexDistribution::uniform(3), n, seed).unwrap();
        prop_assert_eq!(code.size() as u64, cert.target_m);
        prop_assert!(code.codewords.iter().all(|w| w.len() == n && w.iter().all(|&s| s < 3)));
        for (i, s) in cert.s_values.iter().enumerate() {
            prop_assert!(*s <= 1.0 + 1e-9);
            // recompute from scratch with the direct per-letter product
            let direct: f64 = (0..code.size())
                .filter(|&j| j != i)
                .map(|j| codeword_abs_overlap(&t, &code.codewords[i], &code.codewords[j]).unwrap())
                .sum();
            prop_assert!((direct - s).abs() <= 1e-9);
        }
        prop_assert!(is_diagonally_dominant(&code_gram(&t, &code).unwrap(), 1e-12));
    }

    #[test]
    fn sampled_words_are_in_range(seed in any::<u64>(), n in 1usize..20, count in 0usize..50) {
        let p = SimplexDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let words = sample_codewords(&p, n, count, seed);
        prop_assert_eq!(words.len(), count);
        prop_assert!(words.iter().all(|w| w.len() == n && w.iter().all(|&s| s == 0 || s == 2)));
        // prefixes do not depend on how many words are drawn
        let fewer = sample_codewords(&p, n, count / 2, seed);
        prop_assert_eq!(&words[..count / 2], &fewer[..]);
    }
}

#[test]
fn rate_approaches_achievability() {
    let t = trine_channel();
    let target = (1.5f64).log2();
    for n in [10usize, 14, 18] {
        let (code, _) = expurgate_code(&t, &SimplexDistribution::uniform(3), n, 3).unwrap();
        let rate = empirical_rate(&code, 2);
        let floor = target - 3.0 / n as f64 - 0.02;
        assert!(rate >= floor, "n={n}: rate {rate} below {floor}");
    }
}

#[test]
fn mean_pair_overlap_matches_q_to_the_n() {
    let t = trine_channel();
    let p = SimplexDistribution::uniform(3);
    let pairs = 20_000;
    for n in 1..=5usize {
        let words = sample_codewords(&p, n, 2 * pairs, 1000 + n as u64);
        let values: Vec<f64> = words
            .chunks(2)
            .map(|w| codeword_abs_overlap(&t, &w[0], &w[1]).unwrap())
            .collect();
        let mean = values.iter().sum::<f64>() / pairs as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (pairs as f64 - 1.0);
        let se = (var / pairs as f64).sqrt();
        let expected = (2.0f64 / 3.0).powi(n as i32);
        assert!((mean - expected).abs() <= 3.0 * se, "n={n}: mean {mean}, expected {expected}, se {se}");
    }
}

#[test]
fn interference_sums_match_direct_products() {
    let t = trine_channel();
    let words = sample_codewords(&SimplexDistribution::uniform(3), 9, 40, 17);
    let s = interference_sums(&t, &words);
    for (i, si) in s.iter().enumerate() {
        let direct: f64 = (0..words.len())
            .filter(|&j| j != i)
            .map(|j| codeword_abs_overlap(&t, &words[i], &words[j]).unwrap())
            .sum();
        assert!((direct - si).abs() <= 1e-12);
    }
}
