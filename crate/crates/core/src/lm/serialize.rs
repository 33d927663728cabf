//! Text form of a [`KnModel`]:
//!
//! ```text
//! \attnsent-kn
//! order=3
//! min_count=1
//! discounts 1 <d1> <d2> <d3+>
//! ...
//! \1-grams
//! <word>\t<count>
//! \2-grams
//! <w1> <w2>\t<count>
//! ...
//! \end
//! ```
//!
//! n-gram lines are sorted; counts are the stored ones (raw at the top
//! order, continuation below). Discounts carry 17 significant digits.

use std::collections::HashMap;

use super::{Discounts, Gram, KnModel};
use crate::error::{Error, Result};
use crate::tables::format_value;
use crate::vocab::Vocabulary;

const MAGIC: &str = "\\attnsent-kn";

impl KnModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("order={}\nmin_count={}\n", self.order, self.min_count));
        for (i, d) in self.discounts.iter().enumerate() {
            out.push_str(&format!(
                "discounts {} {} {} {}\n",
                i + 1,
                format_value(d.d1),
                format_value(d.d2),
                format_value(d.d3)
            ));
        }
        for level in 1..=self.order {
            out.push_str(&format!("\\{level}-grams\n"));
            let mut lines: Vec<String> = self
                .ngrams(level)
                .map(|(words, c)| format!("{}\t{c}", words.join(" ")))
                .collect();
            lines.sort_unstable();
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
        out.push_str("\\end\n");
        out
    }

    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(source, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(err(1, format!("missing `{MAGIC}` header"))),
        }
        let mut header_value = |key: &str| -> Result<(usize, u64)> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing `{key}=` line")))?;
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse::<u64>().ok())
                .map(|v| (n, v))
                .ok_or_else(|| err(n, format!("expected `{key}=<integer>`")))
        };
        let (order_line, order) = header_value("order")?;
        let (_, min_count) = header_value("min_count")?;
        let order = order as usize;
        if order == 0 {
            return Err(err(order_line, "order must be at least 1".into()));
        }

        let mut discounts = Vec::with_capacity(order);
        for level in 1..=order {
            let (n, line) = lines
                .next()
                .ok_or_else(|| err(0, "truncated discount header".into()))?;
            let fields: Vec<&str> = line.split(' ').collect();
            let parsed = match fields.as_slice() {
                ["discounts", l, a, b, c] if l.parse::<usize>().ok() == Some(level) => {
                    match (a.parse::<f64>(), b.parse::<f64>(), c.parse::<f64>()) {
                        (Ok(d1), Ok(d2), Ok(d3)) => Some(Discounts { d1, d2, d3 }),
                        _ => None,
                    }
                }
                _ => None,
            };
            discounts.push(parsed.ok_or_else(|| err(n, format!("expected `discounts {level} <d1> <d2> <d3>`")))?);
        }

        let mut raw: Vec<Vec<(Vec<&str>, u64)>> = vec![Vec::new(); order];
        let mut level = 0usize;
        let mut ended = false;
        for (n, line) in lines.by_ref() {
            if line == "\\end" {
                ended = true;
                break;
            }
            if let Some(l) = line.strip_prefix('\\').and_then(|r| r.strip_suffix("-grams")) {
                let l: usize = l.parse().map_err(|_| err(n, format!("bad section `{line}`")))?;
                if l != level + 1 || l > order {
                    return Err(err(n, format!("unexpected section `{line}`")));
                }
                level = l;
                continue;
            }
            if level == 0 {
                return Err(err(n, "n-gram line before any section".into()));
            }
            let (gram, count) = line
                .split_once('\t')
                .ok_or_else(|| err(n, "expected `<n-gram>\\t<count>`".into()))?;
            let words: Vec<&str> = gram.split(' ').collect();
            if words.len() != level || words.iter().any(|w| w.is_empty()) {
                return Err(err(n, format!("expected a {level}-gram")));
            }
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| err(n, format!("invalid count `{count}`")))?;
            raw[level - 1].push((words, count));
        }
        if !ended || level != order {
            return Err(err(0, "truncated model: missing sections or `\\end`".into()));
        }

        let mut words: Vec<&str> = raw[0]
            .iter()
            .map(|(g, _)| g[0])
            .filter(|w| !Vocabulary::is_special_word(w))
            .collect();
        words.sort_unstable();
        words.dedup();
        let vocab = Vocabulary::from_words(words);
        let mut counts: Vec<HashMap<Gram, u64>> = Vec::with_capacity(order);
        for table in raw {
            let mut map = HashMap::with_capacity(table.len());
            for (gram, c) in table {
                let ids = gram
                    .iter()
                    .map(|w| {
                        vocab
                            .get(w)
                            .map(|id| id as u32)
                            .ok_or_else(|| Error::parse(source, 0, format!("word `{w}` missing from 1-grams")))
                    })
                    .collect::<Result<Gram>>()?;
                map.insert(ids, c);
            }
            counts.push(map);
        }
        Ok(Self::assemble(order, min_count, vocab, counts, discounts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_probabilities_bit_exactly() {
        let corpus: Vec<Vec<&str>> = vec![
            vec!["the", "cat", "sat"],
            vec!["the", "dog", "sat", "down"],
            vec!["a", "cat", "ran"],
        ];
        let m = KnModel::build(&corpus, 3, 1).unwrap();
        let text = m.to_text();
        let back = KnModel::from_text(&text, "m.lm").unwrap();
        assert_eq!(back.to_text(), text);
        for w in m.predictable_words() {
            for ctx in [vec!["the", "cat"], vec!["<s>", "<s>"], vec!["zz"]] {
                assert_eq!(m.prob(w, &ctx).to_bits(), back.prob(w, &ctx).to_bits());
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(KnModel::from_text("hello", "m").is_err());
        let m = KnModel::build(&[vec!["a", "b"]], 2, 1).unwrap();
        let truncated: String = m.to_text().lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(KnModel::from_text(&truncated, "m").is_err());
        let bad = m.to_text().replace("\t1", "\tx");
        assert!(matches!(KnModel::from_text(&bad, "m"), Err(Error::Parse { .. })));
    }
}
