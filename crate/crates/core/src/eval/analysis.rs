//! Probes of what the attention model learned.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::attention::SentenceEncoder;
use crate::error::{Error, Result};
use crate::sentence::{TagKind, TaggedSentence};
use crate::tables::{EmbeddingTable, TagTable};
use crate::vector::{cosine_unchecked, norm};
use crate::vocab::Vocabulary;

pub const DEFAULT_TOP_TAGS: usize = 20;
pub const DEFAULT_MIN_OCCURRENCES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TagProfileRow {
    pub tag: String,
    pub token_count: usize,
    pub mean_attention: f64,
}

fn desc_then_name(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Mean attention per tag for the `top` most frequent tags. Tokens without
/// the requested tag (e.g. no CCG annotation) are counted under `<unk>`.
pub fn tag_attention_profile(
    corpus: &[TaggedSentence],
    encoder: &SentenceEncoder<'_>,
    tag_kind: TagKind,
    top: usize,
) -> Result<Vec<TagProfileRow>> {
    let mut acc: HashMap<&str, (usize, f64)> = HashMap::new();
    for s in corpus {
        let w = encoder.weights(s)?;
        for (tok, a) in s.tokens().iter().zip(w.values()) {
            let e = acc.entry(tok.tag(tag_kind).unwrap_or(crate::vocab::UNK)).or_default();
            e.0 += 1;
            e.1 += a;
        }
    }
    let mut rows: Vec<TagProfileRow> = acc
        .into_iter()
        .map(|(tag, (n, sum))| TagProfileRow {
            tag: tag.to_string(),
            token_count: n,
            mean_attention: sum / n as f64,
        })
        .collect();
    rows.sort_by(|a, b| desc_then_name((a.token_count as f64, &a.tag), (b.token_count as f64, &b.tag)));
    rows.truncate(top);
    Ok(rows)
}

pub fn profile_to_csv(rows: &[TagProfileRow]) -> String {
    let mut out = String::from("tag,token_count,mean_attention\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.9}\n", r.tag, r.token_count, r.mean_attention));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordAttention {
    pub word: String,
    pub occurrences: usize,
    pub mean_attention: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeWords {
    /// Ascending by mean attention.
    pub lowest: Vec<WordAttention>,
    /// Descending by mean attention.
    pub highest: Vec<WordAttention>,
    /// Number of words meeting the occurrence floor.
    pub qualifying: usize,
    /// Set when fewer than `k` words qualified.
    pub note: Option<String>,
}

impl ExtremeWords {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("list\trank\tword\toccurrences\tmean_attention\n");
        for (name, list) in [("lowest", &self.lowest), ("highest", &self.highest)] {
            for (i, w) in list.iter().enumerate() {
                out.push_str(&format!(
                    "{name}\t{}\t{}\t{}\t{:.9}\n",
                    i + 1,
                    w.word,
                    w.occurrences,
                    w.mean_attention
                ));
            }
        }
        out
    }
}

/// Words with the lowest and highest attention averaged over all their
/// occurrences. Ties go to the lexicographically smaller word.
pub fn extreme_attention_words(
    corpus: &[TaggedSentence],
    encoder: &SentenceEncoder<'_>,
    k: usize,
    min_occurrences: usize,
) -> Result<ExtremeWords> {
    let mut acc: HashMap<&str, (usize, f64)> = HashMap::new();
    for s in corpus {
        let w = encoder.weights(s)?;
        for (word, a) in s.words().zip(w.values()) {
            let e = acc.entry(word).or_default();
            e.0 += 1;
            e.1 += a;
        }
    }
    let mut words: Vec<WordAttention> = acc
        .into_iter()
        .filter(|(_, (n, _))| *n >= min_occurrences.max(1))
        .map(|(w, (n, sum))| WordAttention {
            word: w.to_string(),
            occurrences: n,
            mean_attention: sum / n as f64,
        })
        .collect();
    let qualifying = words.len();
    words.sort_by(|a, b| {
        a.mean_attention
            .total_cmp(&b.mean_attention)
            .then_with(|| a.word.cmp(&b.word))
    });
    let lowest = words.iter().take(k).cloned().collect();
    words.sort_by(|a, b| desc_then_name((a.mean_attention, &a.word), (b.mean_attention, &b.word)));
    let highest = words.iter().take(k).cloned().collect();
    let note = (qualifying < k).then(|| {
        format!("only {qualifying} words occur at least {min_occurrences} times; all are listed")
    });
    Ok(ExtremeWords {
        lowest,
        highest,
        qualifying,
        note,
    })
}

/// The `k` in-vocabulary words closest to a tag vector by cosine.
pub fn nearest_words_to_tag(
    tag: &str,
    tags: &TagTable,
    embeddings: &EmbeddingTable,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    let v = tags
        .vector(tag)
        .ok_or_else(|| Error::Lookup(format!("unknown {} tag `{tag}`", tags.kind().as_str())))?;
    if v.len() != embeddings.dim() {
        return Err(Error::Dimension {
            expected: embeddings.dim(),
            got: v.len(),
        });
    }
    let mut scored: Vec<(String, f64)> = embeddings
        .vocab()
        .words()
        .iter()
        .enumerate()
        .filter(|(id, _)| !Vocabulary::is_special(*id))
        .map(|(id, w)| (w.clone(), cosine_unchecked(embeddings.row(id), v)))
        .collect();
    scored.sort_by(|a, b| desc_then_name((a.1, &a.0), (b.1, &b.0)));
    scored.truncate(k);
    Ok(scored)
}

/// Tags in descending order of vector length.
pub fn tag_norms(tags: &TagTable) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = tags
        .tags()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), norm(tags.row(i))))
        .collect();
    out.sort_by(|a, b| desc_then_name((a.1, &a.0), (b.1, &b.0)));
    out
}

pub fn ranking_to_tsv(header: &str, rows: &[(String, f64)]) -> String {
    let mut out = format!("rank\t{header}\n");
    for (i, (name, v)) in rows.iter().enumerate() {
        out.push_str(&format!("{}\t{name}\t{v:.9}\n", i + 1));
    }
    out
}
