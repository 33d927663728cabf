//! Trained model bundles: a directory holding `meta.txt`, `words.vec`, and
//! optionally `pos.vec` / `ccg.vec`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};
use crate::sentence::TagKind;
use crate::tables::{EmbeddingTable, TagTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttentionKind {
    Uniform,
    Sur,
    Pos,
    Ccg,
    TfIdf,
}

impl AttentionKind {
    pub const ALL: [AttentionKind; 5] = [
        AttentionKind::Uniform,
        AttentionKind::Sur,
        AttentionKind::Pos,
        AttentionKind::Ccg,
        AttentionKind::TfIdf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttentionKind::Uniform => "uniform",
            AttentionKind::Sur => "sur",
            AttentionKind::Pos => "pos",
            AttentionKind::Ccg => "ccg",
            AttentionKind::TfIdf => "tfidf",
        }
    }

    /// Tag table this scheme reads, if any.
    pub fn tag_kind(self) -> Option<TagKind> {
        match self {
            AttentionKind::Pos => Some(TagKind::Pos),
            AttentionKind::Ccg => Some(TagKind::Ccg),
            _ => None,
        }
    }
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttentionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttentionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown attention kind `{s}` (expected uniform, sur, pos, ccg or tfidf)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub embeddings: EmbeddingTable,
    pub pos_tags: Option<TagTable>,
    pub ccg_tags: Option<TagTable>,
    pub attention_kind: AttentionKind,
    pub lm_ref: Option<String>,
    pub seed: u64,
    /// Resolved training configuration, written verbatim to `meta.txt`.
    pub config: BTreeMap<String, String>,
}

impl ModelBundle {
    pub fn new(embeddings: EmbeddingTable, attention_kind: AttentionKind, seed: u64) -> Self {
        ModelBundle {
            embeddings,
            pos_tags: None,
            ccg_tags: None,
            attention_kind,
            lm_ref: None,
            seed,
            config: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    pub fn tags(&self, kind: TagKind) -> Option<&TagTable> {
        match kind {
            TagKind::Pos => self.pos_tags.as_ref(),
            TagKind::Ccg => self.ccg_tags.as_ref(),
        }
    }

    pub fn tags_mut(&mut self, kind: TagKind) -> Option<&mut TagTable> {
        match kind {
            TagKind::Pos => self.pos_tags.as_mut(),
            TagKind::Ccg => self.ccg_tags.as_mut(),
        }
    }

    /// Checks that the tag tables required by `kind` are present and sized
    /// like the word vectors.
    pub fn check_attention(&self, kind: AttentionKind) -> Result<()> {
        if let Some(tk) = kind.tag_kind() {
            let table = self.tags(tk).ok_or_else(|| {
                Error::Config(format!("attention `{kind}` requires a {tk} tag table in the bundle"))
            })?;
            if table.dim() != self.dim() {
                return Err(Error::Dimension {
                    expected: self.dim(),
                    got: table.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_attention(self.attention_kind)?;
        for t in [&self.pos_tags, &self.ccg_tags].into_iter().flatten() {
            if t.dim() != self.dim() {
                return Err(Error::Dimension {
                    expected: self.dim(),
                    got: t.dim(),
                });
            }
        }
        Ok(())
    }

    fn meta_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim={}\n", self.dim()));
        out.push_str(&format!("attention_kind={}\n", self.attention_kind));
        out.push_str(&format!("seed={}\n", self.seed));
        if let Some(lm) = &self.lm_ref {
            out.push_str(&format!("lm_ref={lm}\n"));
        }
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k}={v}\n"));
        }
        out
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        write_atomic(dir.join("words.vec"), self.embeddings.to_text().as_bytes())?;
        for (name, table) in [("pos.vec", &self.pos_tags), ("ccg.vec", &self.ccg_tags)] {
            match table {
                Some(t) => write_atomic(dir.join(name), t.to_text().as_bytes())?,
                None => {
                    let stale = dir.join(name);
                    if stale.exists() {
                        fs::remove_file(stale)?;
                    }
                }
            }
        }
        // meta.txt last: its presence marks a complete bundle
        write_atomic(dir.join("meta.txt"), self.meta_text().as_bytes())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta_path = dir.join("meta.txt");
        let meta_src = meta_path.display().to_string();
        let meta = read_to_string(&meta_path)?;
        let mut dim = None;
        let mut kind = None;
        let mut seed = None;
        let mut lm_ref = None;
        let mut config = BTreeMap::new();
        for (i, line) in meta.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(&meta_src, i + 1, "expected key=value"))?;
            let bad = |what: &str| Error::parse(&meta_src, i + 1, format!("invalid {what} `{value}`"));
            match key {
                "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("dim"))?),
                "attention_kind" => kind = Some(value.parse::<AttentionKind>().map_err(|_| bad("attention_kind"))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "lm_ref" => lm_ref = Some(value.to_owned()),
                k => {
                    if let Some(ck) = k.strip_prefix("config.") {
                        config.insert(ck.to_owned(), value.to_owned());
                    }
                }
            }
        }
        let missing = |k: &str| Error::parse(&meta_src, 0, format!("missing `{k}`"));
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let attention_kind = kind.ok_or_else(|| missing("attention_kind"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;

        let words_path = dir.join("words.vec");
        let embeddings =
            EmbeddingTable::from_text(&read_to_string(&words_path)?, &words_path.display().to_string())?;
        if embeddings.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: embeddings.dim(),
            });
        }
        let load_tags = |name: &str, kind: TagKind| -> Result<Option<TagTable>> {
            let p = dir.join(name);
            if !p.exists() {
                return Ok(None);
            }
            TagTable::from_text(&read_to_string(&p)?, &p.display().to_string(), kind).map(Some)
        };
        let bundle = ModelBundle {
            embeddings,
            pos_tags: load_tags("pos.vec", TagKind::Pos)?,
            ccg_tags: load_tags("ccg.vec", TagKind::Ccg)?,
            attention_kind,
            lm_ref,
            seed,
            config,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}
