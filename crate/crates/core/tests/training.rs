use std::fs;

use attnsent::eval::parse_pairs;
use attnsent::lm::KnModel;
use attnsent::synthetic::{SyntheticConfig, SyntheticCorpus};
use attnsent::training::{train_pp, train_scbow, OptimizerConfig, PpConfig, ScbowConfig};
use attnsent::{AttentionKind, ModelBundle, TaggedSentence};

fn corpus(documents: usize) -> SyntheticCorpus {
    SyntheticCorpus::generate(&SyntheticConfig {
        documents,
        ..SyntheticConfig::default()
    })
    .unwrap()
}

fn scbow(kind: AttentionKind, epochs: usize) -> ScbowConfig {
    ScbowConfig {
        attention: kind,
        epochs,
        dim: 25,
        batch_size: 20,
        optimizer: OptimizerConfig::adagrad(0.05),
        ..ScbowConfig::default()
    }
}

fn bundle_bytes(b: &ModelBundle) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    b.save(dir.path()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn scbow_training_is_deterministic() {
    let c = corpus(30);
    for kind in [AttentionKind::Uniform, AttentionKind::Pos, AttentionKind::TfIdf] {
        let (a, la) = train_scbow(&c.documents, Some(c.init.clone()), None, &scbow(kind, 2)).unwrap();
        let (b, lb) = train_scbow(&c.documents, Some(c.init.clone()), None, &scbow(kind, 2)).unwrap();
        assert_eq!(la, lb);
        assert_eq!(bundle_bytes(&a), bundle_bytes(&b));
    }
}

#[test]
fn different_seeds_differ() {
    let c = corpus(30);
    let mut cfg = scbow(AttentionKind::Pos, 1);
    let (a, _) = train_scbow(&c.documents, Some(c.init.clone()), None, &cfg).unwrap();
    cfg.seed = 7;
    let (b, _) = train_scbow(&c.documents, Some(c.init.clone()), None, &cfg).unwrap();
    assert_ne!(bundle_bytes(&a), bundle_bytes(&b));
}

#[test]
fn scbow_loss_decreases_over_three_epochs() {
    let c = corpus(60);
    for kind in [AttentionKind::Uniform, AttentionKind::Pos] {
        let (_, log) = train_scbow(&c.documents, Some(c.init.clone()), None, &scbow(kind, 3)).unwrap();
        assert_eq!(log.len(), 3);
        assert!(log[2].mean_loss < log[0].mean_loss, "{kind}: {log:?}");
    }
}

#[test]
fn surprisal_training_uses_language_model() {
    let c = corpus(20);
    let sentences: Vec<TaggedSentence> = c.sentences().cloned().collect();
    let lm = KnModel::build_tagged(&sentences, 3, 1).unwrap();
    let (b, log) = train_scbow(&c.documents, Some(c.init.clone()), Some(&lm), &scbow(AttentionKind::Sur, 1)).unwrap();
    assert_eq!(b.attention_kind, AttentionKind::Sur);
    assert!(log[0].mean_loss.is_finite());
    assert!(train_scbow(&c.documents, Some(c.init.clone()), None, &scbow(AttentionKind::Sur, 1)).is_err());
}

#[test]
fn random_init_when_no_vectors_given() {
    let c = corpus(10);
    let (b, _) = train_scbow(&c.documents, None, None, &scbow(AttentionKind::Uniform, 1)).unwrap();
    assert_eq!(b.dim(), 25);
    assert!(b.embeddings.vocab().contains("man"));
}

fn paraphrases() -> Vec<(TaggedSentence, TaggedSentence)> {
    let text = "\
a#DT man#NN is#VB dancing#VB\tthe#DT man#NN dancing#VB
a#DT dog#NN is#VB running#VB\tthe#DT dog#NN running#VB
the#DT cook#NN is#VB slicing#VB bread#NN\ta#DT cook#NN slicing#VB bread#NN
a#DT player#NN is#VB kicking#VB a#DT ball#NN\tthe#DT player#NN kicking#VB the#DT ball#NN
the#DT singer#NN is#VB singing#VB\ta#DT singer#NN singing#VB a#DT song#NN
a#DT cat#NN is#VB sleeping#VB\tthe#DT cat#NN sleeping#VB
";
    parse_pairs(text, "pairs").unwrap()
}

#[test]
fn pp_training_reduces_loss_and_is_deterministic() {
    let c = corpus(5);
    let pairs = paraphrases();
    let cfg = PpConfig {
        attention: AttentionKind::Pos,
        epochs: 5,
        batch_size: 3,
        dim: 25,
        attn_epochs: 3,
        ..PpConfig::default()
    };
    let (a, log) = train_pp(&pairs, None, Some(c.init.clone()), None, &cfg).unwrap();
    assert_eq!(log.len(), 5);
    assert!(log[4].mean_loss < log[0].mean_loss, "{log:?}");
    let (b, _) = train_pp(&pairs, None, Some(c.init.clone()), None, &cfg).unwrap();
    assert_eq!(bundle_bytes(&a), bundle_bytes(&b));

    let (two_phase, log) = train_pp(&pairs, Some(&pairs), Some(c.init.clone()), None, &cfg).unwrap();
    assert_eq!(log.iter().filter(|l| l.phase == "attention").count(), 3);
    assert_eq!(two_phase.config.get("attn_phase").map(String::as_str), Some("true"));
}

#[test]
fn trained_bundle_roundtrips() {
    let c = corpus(10);
    let (b, _) = train_scbow(&c.documents, Some(c.init.clone()), None, &scbow(AttentionKind::Pos, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    b.save(dir.path()).unwrap();
    let back = ModelBundle::load(dir.path()).unwrap();
    assert_eq!(b, back);
}
