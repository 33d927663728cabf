use std::fs;

use attnsent::eval::{eval_sts, tag_attention_profile, StsDataset};
use attnsent::synthetic::{SyntheticConfig, SyntheticCorpus};
use attnsent::{AttentionKind, EmbeddingTable, SentenceEncoder, TagKind, TagTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn setup() -> (SyntheticCorpus, TagTable) {
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        documents: 20,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = Normal::new(0.0, 0.3).unwrap();
    let mut tags = TagTable::zeros(TagKind::Pos, ["DT", "IN", "JJ", "NN", "VB"], corpus.init.dim());
    for v in tags.as_mut_slice() {
        *v = n.sample(&mut rng);
    }
    (corpus, tags)
}

#[test]
fn sts_pearson_ignores_vector_rescaling() {
    let (corpus, _) = setup();
    let ds = [StsDataset {
        name: "s".into(),
        group: None,
        examples: corpus.sts_pairs(60, 3),
    }];
    let mut scaled: EmbeddingTable = corpus.init.clone();
    for v in scaled.as_mut_slice() {
        *v *= 3.7;
    }
    for kind in [AttentionKind::Uniform, AttentionKind::TfIdf] {
        let idx = attnsent::TfIdfIndex::build(ds[0].examples.iter().flat_map(|e| [&e.s1, &e.s2])).unwrap();
        let a = eval_sts(&ds, &SentenceEncoder::new(&corpus.init, kind).with_tfidf(&idx)).unwrap();
        let b = eval_sts(&ds, &SentenceEncoder::new(&scaled, kind).with_tfidf(&idx)).unwrap();
        assert!((a.average - b.average).abs() < 1e-12);
    }
}

#[test]
fn tag_profile_conserves_mean_attention() {
    let (corpus, tags) = setup();
    let sentences: Vec<_> = corpus.sentences().cloned().collect();
    let enc = SentenceEncoder::new(&corpus.init, AttentionKind::Pos).with_tags(&tags);
    let rows = tag_attention_profile(&sentences, &enc, TagKind::Pos, 20).unwrap();
    let tokens: usize = rows.iter().map(|r| r.token_count).sum();
    let weighted: f64 = rows.iter().map(|r| r.mean_attention * r.token_count as f64).sum::<f64>() / tokens as f64;
    let direct = sentences.iter().map(|s| enc.weights(s).unwrap().values().iter().sum::<f64>()).sum::<f64>()
        / tokens as f64;
    assert!((weighted - direct).abs() < 1e-9);
}

#[test]
fn datasets_load_from_files_with_groups() {
    let (corpus, _) = setup();
    let dir = tempfile::tempdir().unwrap();
    let year = dir.path().join("2014");
    fs::create_dir(&year).unwrap();
    for (name, seed) in [("a", 1), ("b", 2)] {
        let text: String = corpus
            .sts_pairs(10, seed)
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.gold, e.s1, e.s2))
            .collect();
        fs::write(year.join(format!("{name}.tsv")), text).unwrap();
    }
    let ds: Vec<StsDataset> = ["a", "b"]
        .iter()
        .map(|n| StsDataset::load(&year.join(format!("{n}.tsv"))).unwrap())
        .collect();
    assert_eq!(ds[0].group.as_deref(), Some("2014"));
    assert_eq!(ds[0].examples.len(), 10);
    let report = eval_sts(&ds, &SentenceEncoder::new(&corpus.init, AttentionKind::Uniform)).unwrap();
    assert_eq!(report.group_averages.len(), 1);
    let mean = (report.datasets[0].pearson + report.datasets[1].pearson) / 2.0;
    assert!((report.group_averages[0].1 - mean).abs() < 1e-15);
}
