//! Tokenizer and n-gram model properties.

use cfbench::token::{detokenize, fit_ngram, tokenize, NgramModel, Token, TokenSeries, TokenVocab};
use proptest::prelude::*;

/// Linear scan over the edges; the last bin is closed.
fn scan_bin(v: &TokenVocab, x: f64) -> usize {
    let x = x.clamp(-v.clip(), v.clip());
    let e = v.edges();
    (0..v.n_bins()).find(|&k| e[k] <= x && (x < e[k + 1] || k == v.n_bins() - 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokens_stay_in_the_value_range(
        xs in prop::collection::vec(-1e6..1e6f64, 1..200),
        n_bins in 2usize..600,
        clip in 0.5..20.0f64,
    ) {
        let v = TokenVocab::new(n_bins, clip).unwrap();
        let (toks, scale) = tokenize(&xs, &v);
        prop_assert!(scale > 0.0);
        for t in &toks.tokens {
            prop_assert!(!t.is_special());
            prop_assert!(v.is_valid(*t));
        }
        let back = detokenize(&toks.tokens, scale, &v).unwrap();
        prop_assert!(back.iter().all(|y| y.abs() <= clip * scale * (1.0 + 1e-12)));
    }

    #[test]
    fn binary_search_matches_linear_scan(
        x in -30.0..30.0f64,
        n_bins in 2usize..300,
        clip in 0.1..10.0f64,
    ) {
        let v = TokenVocab::new(n_bins, clip).unwrap();
        prop_assert_eq!(v.bin_of(x), scan_bin(&v, x));
        let edge = v.edges()[(x.abs() as usize) % (n_bins + 1)];
        prop_assert_eq!(v.bin_of(edge), scan_bin(&v, edge));
    }

    #[test]
    fn ngram_distributions_normalize(
        seqs in prop::collection::vec(prop::collection::vec(2u32..12, 0..60), 1..6),
        order in 1usize..4,
        smoothing in 0.01..2.0f64,
        history in prop::collection::vec(0u32..12, 0..4),
    ) {
        prop_assume!(seqs.iter().any(|s| !s.is_empty()));
        let corpus: Vec<TokenSeries> = seqs.iter().map(|s| TokenSeries::new(s.iter().map(|&t| Token(t)).collect())).collect();
        let m = fit_ngram(&corpus, order, smoothing, 12).unwrap();
        let h: Vec<Token> = history.iter().map(|&t| Token(t)).collect();
        let p = m.distribution(&h);
        prop_assert_eq!(p.len(), 12);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&q| q > 0.0));
        for (i, &q) in p.iter().enumerate() {
            prop_assert!((m.prob(&h, Token(i as u32)) - q).abs() < 1e-15);
        }
    }
}

#[test]
fn fitted_cross_entropy_beats_uniform_on_training_data() {
    let v = 20;
    let seq: Vec<Token> = (0..3000).map(|i| Token(2 + ((i * 7 + i / 5) % 18) as u32)).collect();
    let corpus = vec![TokenSeries::new(seq.clone())];
    for order in 1..=4 {
        let m = fit_ngram(&corpus, order, 0.1, v).unwrap();
        let ce = m.cross_entropy(&seq).unwrap();
        let uni = NgramModel::uniform(order, v).cross_entropy(&seq).unwrap();
        assert!((uni - (v as f64).ln()).abs() < 1e-12);
        assert!(ce <= uni, "order {order}: {ce} > {uni}");
    }
}

#[test]
fn sampling_never_emits_special_tokens() {
    use rand::SeedableRng;
    // A corpus dominated by EOS still has to yield value tokens.
    let corpus = vec![TokenSeries::new(vec![Token(1), Token(1), Token(1), Token(2)])];
    let m = fit_ngram(&corpus, 2, 0.5, 4).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        assert!(!m.sample_value(&[Token(1)], &mut rng).is_special());
    }
}

#[test]
fn zero_series_uses_unit_scale() {
    let v = TokenVocab::default();
    let (toks, scale) = tokenize(&[0.0; 10], &v);
    assert_eq!(scale, 1.0);
    assert_eq!(detokenize(&toks.tokens, scale, &v).unwrap(), vec![v.center(v.bin_of(0.0)); 10]);
}
