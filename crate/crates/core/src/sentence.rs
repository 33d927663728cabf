//! Tagged tokens and sentences in the `word#POS[#CCG]` input format.

use std::fmt;

use crate::error::{Error, Result};

/// Which tag column of a token an operation reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagKind {
    Pos,
    Ccg,
}

impl TagKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Pos => "pos",
            TagKind::Ccg => "ccg",
        }
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedToken {
    pub word: String,
    pub pos: String,
    pub ccg: Option<String>,
    /// Surprisal in nats, already clipped to `[0, 10]`.
    pub surprisal: Option<f64>,
}

impl TaggedToken {
    pub fn new(word: impl Into<String>, pos: impl Into<String>) -> Self {
        TaggedToken {
            word: word.into(),
            pos: pos.into(),
            ccg: None,
            surprisal: None,
        }
    }

    pub fn with_ccg(mut self, ccg: impl Into<String>) -> Self {
        self.ccg = Some(ccg.into());
        self
    }

    pub fn with_surprisal(mut self, s: f64) -> Self {
        self.surprisal = Some(crate::lm::clip_surprisal(s));
        self
    }

    pub fn tag(&self, kind: TagKind) -> Option<&str> {
        match kind {
            TagKind::Pos => Some(&self.pos),
            TagKind::Ccg => self.ccg.as_deref(),
        }
    }

    /// Parses `word#POS` or `word#POS#CCG`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = text.split('#').collect();
        let token = match parts.as_slice() {
            [word, pos] => TaggedToken::new(*word, *pos),
            [word, pos, ccg] => TaggedToken::new(*word, *pos).with_ccg(*ccg),
            _ => return Err(format!("token `{text}` is not of the form word#POS[#CCG]")),
        };
        if token.word.is_empty() || token.pos.is_empty() || token.ccg.as_deref() == Some("") {
            return Err(format!("token `{text}` has an empty field"));
        }
        Ok(token)
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.word, self.pos)?;
        if let Some(ccg) = &self.ccg {
            write!(f, "#{ccg}")?;
        }
        Ok(())
    }
}

/// A non-empty token sequence where either every token carries a CCG tag or none does.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedSentence {
    tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Domain("sentence must contain at least one token".into()));
        }
        let with_ccg = tokens.iter().filter(|t| t.ccg.is_some()).count();
        if with_ccg != 0 && with_ccg != tokens.len() {
            return Err(Error::Domain(
                "either every token carries a CCG tag or none does".into(),
            ));
        }
        if tokens.iter().any(|t| t.word.is_empty()) {
            return Err(Error::Domain("empty word form".into()));
        }
        Ok(TaggedSentence { tokens })
    }

    /// Parses one line of space-separated tagged tokens.
    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let tokens = line
            .split_whitespace()
            .map(TaggedToken::parse)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TaggedSentence::new(tokens).map_err(|e| e.to_string())
    }

    pub fn tokens(&self) -> &[TaggedToken] {
        &self.tokens
    }

    pub fn tokens_mut(&mut self) -> &mut [TaggedToken] {
        &mut self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.word.as_str())
    }

    pub fn has_ccg(&self) -> bool {
        self.tokens[0].ccg.is_some()
    }

    /// Surprisals of every token, if all are present.
    pub fn surprisals(&self) -> Option<Vec<f64>> {
        self.tokens.iter().map(|t| t.surprisal).collect()
    }
}

impl fmt::Display for TaggedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Reads a tagged corpus, one sentence per line. Blank lines separate
/// documents; the returned vector holds one entry per document.
pub fn parse_documents(text: &str, source_name: &str) -> Result<Vec<Vec<TaggedSentence>>> {
    let mut docs = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
            continue;
        }
        let sentence =
            TaggedSentence::parse_line(line).map_err(|m| Error::parse(source_name, i + 1, m))?;
        current.push(sentence);
    }
    if !current.is_empty() {
        docs.push(current);
    }
    Ok(docs)
}

/// Reads a tagged corpus ignoring document boundaries.
pub fn parse_sentences(text: &str, source_name: &str) -> Result<Vec<TaggedSentence>> {
    Ok(parse_documents(text, source_name)?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pos_and_ccg() {
        let s = TaggedSentence::parse_line("a#DT man#NN#N").unwrap_err();
        assert!(s.contains("CCG"));
        let s = TaggedSentence::parse_line("a#DT#NP/N man#NN#N").unwrap();
        assert!(s.has_ccg());
        assert_eq!(s.tokens()[1].tag(TagKind::Ccg), Some("N"));
        assert_eq!(s.to_string(), "a#DT#NP/N man#NN#N");
    }

    #[test]
    fn rejects_malformed_tokens() {
        assert!(TaggedToken::parse("man").is_err());
        assert!(TaggedToken::parse("#NN").is_err());
        assert!(TaggedToken::parse("a#b#c#d").is_err());
        assert!(TaggedSentence::parse_line("   ").is_err());
    }

    #[test]
    fn surprisal_is_clipped() {
        let t = TaggedToken::new("x", "NN").with_surprisal(12.3);
        assert_eq!(t.surprisal, Some(10.0));
    }

    #[test]
    fn documents_split_on_blank_lines() {
        let text = "a#DT b#NN\nc#VB\n\n\nd#NN\n";
        let docs = parse_documents(text, "t").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].len(), 2);
        let err = parse_documents("a#DT\nbad\n", "corpus.txt").unwrap_err();
        assert_eq!(err.to_string().split(':').take(2).collect::<Vec<_>>(), ["corpus.txt", "2"]);
    }
}
