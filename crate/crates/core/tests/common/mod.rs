//! Independent reference implementations shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

pub mod grad;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use attnsent::training::{Gradients, Model};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

// ---------------------------------------------------------------------------
// Kneser-Ney

/// Context total, discounted mass, and per-word counts.
type ContextStats = (u64, f64, HashMap<String, u64>);

/// Modified Kneser-Ney computed straight from the padded token streams, with
/// every count found by scanning.
pub struct KnOracle {
    order: usize,
    streams: Vec<Vec<String>>,
    predictable: BTreeSet<String>,
    memo: RefCell<HashMap<Vec<String>, u64>>,
    context_memo: RefCell<HashMap<Vec<String>, ContextStats>>,
    discounts: Vec<[f64; 3]>,
}

impl KnOracle {
    pub fn new(corpus: &[Vec<String>], order: usize, min_count: u64) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in corpus.iter().flatten() {
            *freq.entry(w).or_default() += 1;
        }
        let mut predictable: BTreeSet<String> = freq
            .iter()
            .filter(|(_, &c)| c >= min_count.max(1))
            .map(|(w, _)| w.to_string())
            .collect();
        predictable.insert(EOS.into());
        predictable.insert(UNK.into());
        let streams = corpus
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| {
                let mut padded = vec![BOS.to_string(); order - 1];
                padded.extend(s.iter().map(|w| {
                    if predictable.contains(w) {
                        w.clone()
                    } else {
                        UNK.to_string()
                    }
                }));
                padded.push(EOS.into());
                padded
            })
            .collect();
        let mut o = KnOracle {
            order,
            streams,
            predictable,
            memo: RefCell::new(HashMap::new()),
            context_memo: RefCell::new(HashMap::new()),
            discounts: Vec::new(),
        };
        o.discounts = (1..=order).map(|k| o.estimate_discounts(k)).collect();
        o
    }

    pub fn predictable(&self) -> Vec<String> {
        self.predictable.iter().cloned().collect()
    }

    fn map(&self, w: &str) -> String {
        if w == BOS || self.predictable.contains(w) {
            w.to_string()
        } else {
            UNK.to_string()
        }
    }

    /// Raw occurrences of a full-order window.
    fn raw(&self, gram: &[String]) -> u64 {
        self.streams
            .iter()
            .map(|s| s.windows(gram.len()).filter(|w| *w == gram).count() as u64)
            .sum()
    }

    /// Raw count at the top order, number of distinct left extensions below.
    pub fn count(&self, gram: &[String]) -> u64 {
        if let Some(&c) = self.memo.borrow().get(gram) {
            return c;
        }
        let c = if gram.len() == self.order {
            self.raw(gram)
        } else {
            // distinct tokens seen immediately left of an occurrence that ends
            // on a real (non-padding) position
            let mut left = BTreeSet::new();
            for s in &self.streams {
                for start in 1..s.len() {
                    let end = start + gram.len() - 1;
                    if end < s.len() && end + 1 >= self.order && s[start..=end] == *gram {
                        left.insert(&s[start - 1]);
                    }
                }
            }
            left.len() as u64
        };
        self.memo.borrow_mut().insert(gram.to_vec(), c);
        c
    }

    fn grams(&self, k: usize) -> BTreeSet<Vec<String>> {
        let mut out = BTreeSet::new();
        for s in &self.streams {
            for end in self.order - 1..s.len() {
                if end + 1 >= k {
                    let g = s[end + 1 - k..=end].to_vec();
                    if self.count(&g) > 0 {
                        out.insert(g);
                    }
                }
            }
        }
        out
    }

    fn estimate_discounts(&self, k: usize) -> [f64; 3] {
        let mut n = [0f64; 4];
        for g in self.grams(k) {
            let c = self.count(&g);
            if (1..=4).contains(&c) {
                n[c as usize - 1] += 1.0;
            }
        }
        let [n1, n2, n3, n4] = n;
        if n.iter().all(|&x| x > 0.0) {
            let y = n1 / (n1 + 2.0 * n2);
            let d = [1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3];
            if d.iter().enumerate().all(|(i, &v)| v >= 0.0 && v <= (i + 1) as f64) {
                return d;
            }
        }
        let single = if n1 > 0.0 && n2 > 0.0 { n1 / (n1 + 2.0 * n2) } else { 0.5 };
        [single; 3]
    }

    pub fn discounts(&self, k: usize) -> [f64; 3] {
        self.discounts[k - 1]
    }

    fn discount(&self, k: usize, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.discounts[k - 1][0],
            2 => self.discounts[k - 1][1],
            _ => self.discounts[k - 1][2],
        }
    }

    pub fn prob(&self, word: &str, context: &[&str]) -> f64 {
        let keep = context.len().min(self.order - 1);
        let ctx: Vec<String> = context[context.len() - keep..].iter().map(|w| self.map(w)).collect();
        self.interpolated(&self.map(word), &ctx)
    }

    fn interpolated(&self, w: &str, ctx: &[String]) -> f64 {
        let k = ctx.len() + 1;
        let lower = if ctx.is_empty() {
            1.0 / self.predictable.len() as f64
        } else {
            self.interpolated(w, &ctx[1..])
        };
        let (total, mass, own) = {
            let mut memo = self.context_memo.borrow_mut();
            let entry = memo.entry(ctx.to_vec()).or_insert_with(|| {
                let mut total = 0u64;
                let mut mass = 0.0;
                let mut counts = HashMap::new();
                for x in self.predictable.iter() {
                    let mut g = ctx.to_vec();
                    g.push(x.clone());
                    let c = self.count(&g);
                    total += c;
                    mass += self.discount(k, c);
                    counts.insert(x.clone(), c);
                }
                (total, mass, counts)
            });
            (entry.0, entry.1, entry.2.get(w).copied().unwrap_or(0))
        };
        if total == 0 {
            return lower;
        }
        let t = total as f64;
        (own as f64 - self.discount(k, own)).max(0.0) / t + mass / t * lower
    }
}

pub fn words(lines: &[&str]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| l.split_whitespace().map(str::to_owned).collect())
        .collect()
}

pub fn handwritten_corpus() -> Vec<Vec<String>> {
    words(&[
        "the cat sat on the mat",
        "the dog sat on the log",
        "a cat saw a dog",
        "the cat saw the dog on the mat",
        "a dog sat on a log",
        "the mat was on the log",
        "a cat and a dog sat",
        "the dog saw a cat",
    ])
}

/// Zipf-flavoured random sentences over `types` word types.
pub fn random_corpus(seed: u64, tokens: usize, types: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..types).map(|i| format!("w{i}")).collect();
    let weights: Vec<f64> = (1..=types).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::new();
    let mut used = 0;
    while used < tokens {
        let len = rng.random_range(1..=8).min(tokens - used);
        let sentence = (0..len)
            .map(|_| {
                let mut u = rng.random::<f64>() * total;
                for (w, p) in vocab.iter().zip(&weights) {
                    if u < *p {
                        return w.clone();
                    }
                    u -= p;
                }
                vocab[types - 1].clone()
            })
            .collect();
        used += len;
        out.push(sentence);
    }
    out
}

/// The fixture corpora with their model orders and vocabulary thresholds.
pub fn kn_fixtures() -> Vec<(&'static str, Vec<Vec<String>>, usize, u64)> {
    vec![
        ("handwritten", handwritten_corpus(), 2, 1),
        ("zipf25", random_corpus(11, 200, 25), 3, 1),
        ("zipf12-mincount2", random_corpus(12, 180, 14), 5, 2),
    ]
}

// ---------------------------------------------------------------------------
// Finite differences

pub const FD_STEP: f64 = 1e-5;

/// Largest relative error between analytic and central-difference gradients
/// over every word and tag parameter. Errors are measured relative to
/// `max(|analytic|, |numeric|, floor)`.
pub fn max_gradient_error(model: &Model, grads: &Gradients, floor: f64, loss: impl Fn(&Model) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let dim = model.dim();
    let mut m = model.clone();
    for i in 0..model.words.as_slice().len() {
        let orig = m.words.as_slice()[i];
        m.words.as_mut_slice()[i] = orig + FD_STEP;
        let plus = loss(&m);
        m.words.as_mut_slice()[i] = orig - FD_STEP;
        let minus = loss(&m);
        m.words.as_mut_slice()[i] = orig;
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let analytic = grads.words.get(i / dim).map_or(0.0, |r| r[i % dim]);
        worst = worst.max(rel_err(analytic, numeric, floor));
    }
    if let Some(tags) = &model.tags {
        for i in 0..tags.as_slice().len() {
            let t = m.tags.as_mut().unwrap();
            let orig = t.as_slice()[i];
            t.as_mut_slice()[i] = orig + FD_STEP;
            let plus = loss(&m);
            let t = m.tags.as_mut().unwrap();
            t.as_mut_slice()[i] = orig - FD_STEP;
            let minus = loss(&m);
            m.tags.as_mut().unwrap().as_mut_slice()[i] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let analytic = grads.tags.get(i / dim).map_or(0.0, |r| r[i % dim]);
            worst = worst.max(rel_err(analytic, numeric, floor));
        }
    }
    worst
}

pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

// ---------------------------------------------------------------------------
// Correlation

pub fn pearson_raw_sums(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// 1-based ranks by counting, ties sharing the average rank.
pub fn counting_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let below = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_by_counting(xs: &[f64], ys: &[f64]) -> f64 {
    pearson_raw_sums(&counting_ranks(xs), &counting_ranks(ys))
}

fn gamma_half_integer(x2: u32) -> f64 {
    // Γ(x2 / 2) by the recurrence from Γ(1) = 1 and Γ(1/2) = √π.
    let mut v = if x2.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut k = if x2.is_multiple_of(2) { 2 } else { 1 };
    while k < x2 {
        v *= k as f64 / 2.0;
        k += 2;
    }
    v
}

/// Two-sided Student-t tail by Simpson integration of the density.
pub fn t_tail_by_integration(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let c = gamma_half_integer(df + 1) / ((nu * std::f64::consts::PI).sqrt() * gamma_half_integer(df));
    let f = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let n = 200_000;
    let h = t.abs() / n as f64;
    let mut s = f(0.0) + f(t.abs());
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    1.0 - 2.0 * s * h / 3.0
}

// ---------------------------------------------------------------------------
// Mining

/// For each pair, scans every phrase of every other pair and keeps the first
/// one reaching the maximum dot product.
pub fn mine_exhaustive(vectors: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let best = |q: usize, own: usize| {
        let scores: Vec<(usize, f64)> = (0..vectors.len())
            .filter(|&j| j / 2 != own)
            .map(|j| (j, dot(&vectors[q], &vectors[j])))
            .collect();
        let max = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        scores.iter().filter(|s| s.1 == max).map(|s| s.0).min().unwrap()
    };
    (0..vectors.len() / 2).map(|i| (best(2 * i, i), best(2 * i + 1, i))).collect()
}

// ---------------------------------------------------------------------------
// Random sentences

pub const TAGS: [&str; 5] = ["DT", "NN", "VB", "JJ", "IN"];

pub fn random_tagged_line(rng: &mut ChaCha8Rng, vocab: &[&str], len: usize) -> String {
    (0..len)
        .map(|_| format!("{}#{}", vocab.choose(rng).unwrap(), TAGS.choose(rng).unwrap()))
        .collect::<Vec<_>>()
        .join(" ")
}
