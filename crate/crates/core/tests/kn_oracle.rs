mod common;

use attnsent::lm::KnModel;
use common::{kn_fixtures, KnOracle, BOS};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn contexts(model: &KnModel, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for level in 1..=model.order() {
        for c in model.observed_contexts(level) {
            out.push(c.iter().map(|s| s.to_string()).collect());
        }
    }
    let mut pool: Vec<String> = model.predictable_words().map(str::to_owned).collect();
    pool.push(BOS.into());
    pool.push("never-seen".into());
    for _ in 0..40 {
        let len = rng.random_range(0..=model.order() + 1);
        out.push((0..len).map(|_| pool.choose(rng).unwrap().clone()).collect());
    }
    out
}

#[test]
fn matches_scan_based_oracle_on_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, corpus, order, min_count) in kn_fixtures() {
        let tokens: usize = corpus.iter().map(Vec::len).sum();
        assert!(tokens <= 200, "{name} has {tokens} tokens");
        let model = KnModel::build(&corpus, order, min_count).unwrap();
        assert!(model.vocab().len() <= 30, "{name} vocabulary too large");
        let oracle = KnOracle::new(&corpus, order, min_count);
        for k in 1..=order {
            let d = model.discounts(k);
            assert_eq!([d.d1, d.d2, d.d3], oracle.discounts(k), "{name} discounts at order {k}");
        }
        let mut queried = 0;
        let mut words = oracle.predictable();
        words.push("never-seen".into());
        for ctx in contexts(&model, &mut rng) {
            let ctx_ref: Vec<&str> = ctx.iter().map(String::as_str).collect();
            for w in &words {
                let got = model.prob(w, &ctx_ref);
                let want = oracle.prob(w, &ctx_ref);
                assert!((got - want).abs() < 1e-10, "{name} P({w} | {ctx:?}): {got} vs {want}");
                queried += 1;
            }
        }
        assert!(queried > 100);
    }
}

#[test]
fn every_order_matches_oracle_on_handwritten_corpus() {
    let corpus = common::handwritten_corpus();
    for order in 1..=5 {
        let model = KnModel::build(&corpus, order, 1).unwrap();
        let oracle = KnOracle::new(&corpus, order, 1);
        for ctx in [vec![], vec!["the"], vec!["on", "the"], vec![BOS, "the", "cat"], vec!["a", "dog", "sat", "on"]] {
            for w in oracle.predictable() {
                let (got, want) = (model.prob(&w, &ctx), oracle.prob(&w, &ctx));
                assert!((got - want).abs() < 1e-10, "order {order} P({w} | {ctx:?}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn modified_discounts_are_exercised() {
    let any_modified = kn_fixtures().into_iter().any(|(_, corpus, order, min_count)| {
        let m = KnModel::build(&corpus, order, min_count).unwrap();
        (1..=order).any(|k| {
            let d = m.discounts(k);
            d.d1 != d.d2 || d.d2 != d.d3
        })
    });
    assert!(any_modified);
}

#[test]
fn surprisal_of_first_token_follows_oracle() {
    let corpus = common::handwritten_corpus();
    let model = KnModel::build(&corpus, 3, 1).unwrap();
    let oracle = KnOracle::new(&corpus, 3, 1);
    let s = model.surprisal_words(&["the", "cat", "sat"]);
    assert!((s[0] + oracle.prob("the", &[BOS, BOS]).ln()).abs() < 1e-10);
    assert!((s[2] + oracle.prob("sat", &["the", "cat"]).ln()).abs() < 1e-10);
}

#[test]
fn serialized_model_keeps_probabilities() {
    for (_, corpus, order, min_count) in kn_fixtures() {
        let model = KnModel::build(&corpus, order, min_count).unwrap();
        let back = KnModel::from_text(&model.to_text(), "mem").unwrap();
        for w in model.predictable_words() {
            assert_eq!(model.prob(w, &["w0", "w1"]).to_bits(), back.prob(w, &["w0", "w1"]).to_bits());
        }
    }
}
