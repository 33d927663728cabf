//! Random instances for finite-difference checks of both objectives.

use attnsent::training::{
    mine_negatives, pp_loss, pp_loss_and_grad, scbow_loss, scbow_loss_and_grad, Model, PpBatch, ScbowInstance,
};
use attnsent::{AttentionKind, EmbeddingTable, TagKind, TagTable, TaggedSentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{max_gradient_error, random_tagged_line, TAGS};

pub const DIM: usize = 5;
const VOCAB: [&str; 8] = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"];
pub const TOLERANCE: f64 = 1e-4;
// relative errors are taken against at least this magnitude
const FLOOR: f64 = 1e-6;

fn random_model(kind: AttentionKind, rng: &mut ChaCha8Rng) -> Model {
    let n = Normal::new(0.0, 1.0).unwrap();
    let entries: Vec<(&str, Vec<f64>)> = VOCAB
        .iter()
        .map(|w| (*w, (0..DIM).map(|_| n.sample(rng)).collect()))
        .collect();
    let words = EmbeddingTable::from_entries(DIM, entries).unwrap();
    let mut model = Model::new(words, kind);
    if kind == AttentionKind::Pos {
        let mut tags = TagTable::zeros(TagKind::Pos, TAGS, DIM);
        for v in tags.as_mut_slice() {
            *v = 0.5 * n.sample(rng);
        }
        model = model.with_tags(tags);
    }
    model
}

fn random_sentence(kind: AttentionKind, rng: &mut ChaCha8Rng) -> TaggedSentence {
    let len = rng.random_range(1..=4);
    let mut s = TaggedSentence::parse_line(&random_tagged_line(rng, &VOCAB, len)).unwrap();
    if kind == AttentionKind::Sur {
        for t in s.tokens_mut() {
            t.surprisal = Some(rng.random_range(0.0..12.0f64).min(10.0));
        }
    }
    s
}

pub fn scbow_case(kind: AttentionKind, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = random_model(kind, &mut rng);
    let center = random_sentence(kind, &mut rng);
    let n_cand = rng.random_range(2..=3);
    let cands: Vec<TaggedSentence> = (0..n_cand).map(|_| random_sentence(kind, &mut rng)).collect();
    let n_pos = rng.random_range(1..n_cand);
    let pos: Vec<&TaggedSentence> = cands[..n_pos].iter().collect();
    let neg: Vec<&TaggedSentence> = cands[n_pos..].iter().collect();
    let inst = ScbowInstance {
        center: &center,
        positives: &pos,
        negatives: &neg,
    };
    let (_, grads) = scbow_loss_and_grad(&inst, &model).unwrap();
    max_gradient_error(&model, &grads, FLOOR, |m| scbow_loss(&inst, m).unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn pp_case(kind: AttentionKind, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let model = random_model(kind, &mut rng);
        let n_pairs = rng.random_range(2..=3);
        let pairs: Vec<(TaggedSentence, TaggedSentence)> = (0..n_pairs)
            .map(|_| (random_sentence(kind, &mut rng), random_sentence(kind, &mut rng)))
            .collect();
        let mut initial = model.words.clone();
        for v in initial.as_mut_slice() {
            *v += rng.random_range(-0.1..0.1);
        }
        let batch = PpBatch::mine(&pairs, &model, 0.1, &initial).unwrap();
        // hinges sitting on their kink have no derivative; redraw
        let vecs: Vec<Vec<f64>> = pairs
            .iter()
            .flat_map(|(a, b)| [model.forward(a).unwrap().vector, model.forward(b).unwrap().vector])
            .collect();
        let near_kink = batch.negatives.iter().enumerate().any(|(i, n)| {
            let pos = dot(&vecs[2 * i], &vecs[2 * i + 1]);
            let a1 = 1.0 - pos + dot(&vecs[2 * i], &vecs[n.t1]);
            let a2 = 1.0 - pos + dot(&vecs[2 * i + 1], &vecs[n.t2]);
            a1.abs() < 1e-3 || a2.abs() < 1e-3
        });
        if near_kink {
            continue;
        }
        assert_eq!(batch.negatives, mine_negatives(&pairs, &model).unwrap());
        let (_, grads) = pp_loss_and_grad(&batch, &model).unwrap();
        return max_gradient_error(&model, &grads, FLOOR, |m| pp_loss(&batch, m).unwrap());
    }
}

pub fn kinds() -> [AttentionKind; 3] {
    [AttentionKind::Uniform, AttentionKind::Sur, AttentionKind::Pos]
}

