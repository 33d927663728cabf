//! Word-embedding and tag-vector tables plus their text serialization.
//!
//! Text format: a header line `<count> <dim>` followed by one
//! `<label> <v1> ... <vdim>` line per row. Values are written with 17
//! significant digits so a save/load cycle reproduces every bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sentence::TagKind;
use crate::vocab::{Vocabulary, UNK};

pub const DEFAULT_DIM: usize = 300;
/// Standard deviation of the tag-vector initializer.
pub const TAG_INIT_STD: f64 = 0.01;

pub(crate) fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<'a>(labels: impl Iterator<Item = &'a str>, dim: usize, data: &[f64]) -> String {
    let rows = data.len() / dim.max(1);
    let mut out = String::with_capacity(rows * (dim * 24 + 16));
    let _ = writeln!(out, "{rows} {dim}");
    for (label, row) in labels.zip(data.chunks(dim)) {
        out.push_str(label);
        for v in row {
            out.push(' ');
            out.push_str(&format_value(*v));
        }
        out.push('\n');
    }
    out
}

struct RawRows {
    dim: usize,
    labels: Vec<String>,
    data: Vec<f64>,
}

fn read_rows(text: &str, source: &str) -> Result<RawRows> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "missing `<count> <dim>` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(source, 1, "header must be `<count> <dim>` with dim >= 1")),
        },
        _ => return Err(Error::parse(source, 1, "header must be `<count> <dim>`")),
    };

    let mut labels = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    let mut seen = HashMap::with_capacity(count);
    for (i, line) in lines {
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let label = fields.next().expect("non-blank line has a field");
        let start = data.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("invalid number `{f}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(source, lineno, format!("non-finite value `{f}`")));
            }
            data.push(v);
        }
        let got = data.len() - start;
        if got != dim {
            return Err(Error::parse(
                source,
                lineno,
                format!("row `{label}` has {got} values, expected {dim}"),
            ));
        }
        if let Some(prev) = seen.insert(label.to_owned(), lineno) {
            return Err(Error::parse(
                source,
                lineno,
                format!("duplicate entry `{label}` (first seen on line {prev})"),
            ));
        }
        labels.push(label.to_owned());
    }
    if labels.len() != count {
        return Err(Error::parse(
            source,
            1,
            format!("header declares {count} rows but {} were found", labels.len()),
        ));
    }
    Ok(RawRows { dim, labels, data })
}

/// Dense word-vector matrix indexed by a [`Vocabulary`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::Dimension {
                expected: vocab.len() * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("embedding entries must be finite".into()));
        }
        Ok(EmbeddingTable { vocab, dim, data })
    }

    pub fn zeros(vocab: Vocabulary, dim: usize) -> Self {
        let data = vec![0.0; vocab.len() * dim];
        EmbeddingTable { vocab, dim, data }
    }

    /// Builds a table from `(word, vector)` entries. Special tokens absent
    /// from `entries` get a zero row, except `<unk>`, which gets the mean of
    /// the ordinary word vectors.
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; vocab.len()];
        for (word, vec) in entries {
            if vec.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: vec.len(),
                });
            }
            let id = vocab.insert(word.as_ref());
            if id == rows.len() {
                rows.push(Some(vec));
            } else {
                rows[id] = Some(vec);
            }
        }
        let has_unk = rows[Vocabulary::UNK_ID].is_some();
        let data = rows
            .into_iter()
            .flat_map(|r| r.unwrap_or_else(|| vec![0.0; dim]))
            .collect();
        let mut table = EmbeddingTable::new(vocab, dim, data)?;
        if !has_unk {
            table.set_unk_to_mean();
        }
        Ok(table)
    }

    /// Overwrites the `<unk>` row with the mean of all non-special rows.
    pub fn set_unk_to_mean(&mut self) {
        let dim = self.dim;
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for id in (Vocabulary::UNK_ID + 1)..self.vocab.len() {
            for (m, v) in mean.iter_mut().zip(self.row(id)) {
                *m += v;
            }
            n += 1;
        }
        if n > 0 {
            for m in &mut mean {
                *m /= n as f64;
            }
        }
        self.row_mut(Vocabulary::UNK_ID).copy_from_slice(&mean);
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn id(&self, word: &str) -> usize {
        self.vocab.id_or_unk(word)
    }

    /// Vector for `word`, or the `<unk>` row when out of vocabulary.
    pub fn vector(&self, word: &str) -> &[f64] {
        self.row(self.id(word))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_text(&self) -> String {
        write_rows(self.vocab.words().iter().map(String::as_str), self.dim, &self.data)
    }

    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let raw = read_rows(text, source)?;
        let dim = raw.dim;
        let entries = raw
            .labels
            .into_iter()
            .zip(raw.data.chunks(dim).map(<[f64]>::to_vec));
        Self::from_entries(dim, entries)
    }
}

/// Dense tag-vector matrix over a POS or CCG tag set. Row 0 is always the
/// `<unk>` tag, used for tags unseen at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct TagTable {
    kind: TagKind,
    tags: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl TagTable {
    pub const UNK_ROW: usize = 0;

    fn index_of(tags: &[String]) -> HashMap<String, usize> {
        tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect()
    }

    fn tagset_with_unk<I, S>(tags: I) -> Vec<String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = vec![UNK.to_owned()];
        for t in tags {
            let t = t.as_ref();
            if !out.iter().any(|x| x == t) {
                out.push(t.to_owned());
            }
        }
        out
    }

    pub fn zeros<I, S>(kind: TagKind, tags: I, dim: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tags = Self::tagset_with_unk(tags);
        let index = Self::index_of(&tags);
        let data = vec![0.0; tags.len() * dim];
        TagTable {
            kind,
            tags,
            index,
            dim,
            data,
        }
    }

    pub fn kind(&self) -> TagKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn get(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn id_or_unk(&self, tag: Option<&str>) -> usize {
        tag.and_then(|t| self.get(t)).unwrap_or(Self::UNK_ROW)
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn vector(&self, tag: &str) -> Option<&[f64]> {
        self.get(tag).map(|id| self.row(id))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_text(&self) -> String {
        write_rows(self.tags.iter().map(String::as_str), self.dim, &self.data)
    }

    /// Parses a tag table. A file without an `<unk>` row gets a zero one.
    pub fn from_text(text: &str, source: &str, kind: TagKind) -> Result<Self> {
        let raw = read_rows(text, source)?;
        let mut table = TagTable::zeros(kind, &raw.labels, raw.dim);
        for (label, row) in raw.labels.iter().zip(raw.data.chunks(raw.dim)) {
            let id = table.get(label).expect("label inserted above");
            table.row_mut(id).copy_from_slice(row);
        }
        Ok(table)
    }
}

/// Draws every tag vector entry i.i.d. from N(0, 0.01²) with a seeded generator.
pub fn init_tag_table<I, S>(kind: TagKind, tagset: I, dim: usize, seed: u64) -> Result<TagTable>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if dim == 0 {
        return Err(Error::Config("tag dimension must be positive".into()));
    }
    let mut table = TagTable::zeros(kind, tagset, dim);
    if table.len() <= 1 {
        return Err(Error::Config("tag set must not be empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, TAG_INIT_STD).expect("valid std");
    for v in table.as_mut_slice() {
        *v = normal.sample(&mut rng);
    }
    Ok(table)
}
