//! Semantic textual similarity scoring.

use std::path::Path;

use crate::attention::SentenceEncoder;
use crate::error::{Error, Result};
use crate::sentence::TaggedSentence;
use crate::vector::cosine_unchecked;
use crate::vocab::Vocabulary;

use super::stats::{pearson, pearson_pvalue, spearman};

#[derive(Debug, Clone, PartialEq)]
pub struct StsExample {
    pub gold: f64,
    pub s1: TaggedSentence,
    pub s2: TaggedSentence,
}

/// Parses `gold TAB sentence1 TAB sentence2` lines. Blank lines are skipped.
pub fn parse_sts(text: &str, source: &str) -> Result<Vec<StsExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(source, i + 1, m);
        let fields: Vec<&str> = line.split('\t').collect();
        let [gold, a, b] = fields.as_slice() else {
            return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let gold: f64 = gold
            .trim()
            .parse()
            .ok()
            .filter(|g: &f64| g.is_finite())
            .ok_or_else(|| err(format!("invalid gold score `{gold}`")))?;
        out.push(StsExample {
            gold,
            s1: TaggedSentence::parse_line(a).map_err(&err)?,
            s2: TaggedSentence::parse_line(b).map_err(&err)?,
        });
    }
    Ok(out)
}

/// Parses a sentence-pair file, `phrase1 TAB phrase2 [TAB score]`; the
/// optional score column is ignored.
pub fn parse_pairs(text: &str, source: &str) -> Result<Vec<(TaggedSentence, TaggedSentence)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(source, i + 1, m);
        let fields: Vec<&str> = line.split('\t').collect();
        let (a, b) = match fields.as_slice() {
            [a, b] | [a, b, _] => (a, b),
            _ => return Err(err(format!("expected 2 or 3 tab-separated fields, found {}", fields.len()))),
        };
        out.push((
            TaggedSentence::parse_line(a).map_err(&err)?,
            TaggedSentence::parse_line(b).map_err(&err)?,
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub score: f64,
    /// Both sentences consisted solely of out-of-vocabulary words.
    pub all_oov: bool,
}

fn all_oov(sentence: &TaggedSentence, encoder: &SentenceEncoder<'_>) -> bool {
    sentence.words().all(|w| encoder.embeddings().id(w) == Vocabulary::UNK_ID)
}

/// Cosine between the two composed sentence vectors.
pub fn score_pair(example: &StsExample, encoder: &SentenceEncoder<'_>) -> Result<ScoredPair> {
    if all_oov(&example.s1, encoder) && all_oov(&example.s2, encoder) {
        return Ok(ScoredPair {
            score: 0.0,
            all_oov: true,
        });
    }
    let a = encoder.encode(&example.s1)?;
    let b = encoder.encode(&example.s2)?;
    Ok(ScoredPair {
        score: cosine_unchecked(&a, &b),
        all_oov: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsDataset {
    pub name: String,
    /// Averaging group, e.g. the year of a shared task.
    pub group: Option<String>,
    pub examples: Vec<StsExample>,
}

impl StsDataset {
    /// Loads a file; the dataset is named by its file stem and grouped by
    /// its parent directory name.
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let examples = parse_sts(&text, &path.display().to_string())?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let group = path
            .parent()
            .and_then(Path::file_name)
            .map(|s| s.to_string_lossy().into_owned());
        Ok(StsDataset { name, group, examples })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsResult {
    pub name: String,
    pub group: Option<String>,
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
    pub p_value: f64,
    pub oov_pairs: usize,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsReport {
    pub datasets: Vec<StsResult>,
    /// Unweighted mean Pearson per group, in first-appearance order.
    pub group_averages: Vec<(String, f64)>,
    /// Unweighted mean Pearson over all datasets.
    pub average: f64,
}

impl StsReport {
    pub fn total_oov_pairs(&self) -> usize {
        self.datasets.iter().map(|d| d.oov_pairs).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("dataset\tgroup\tn\tpearson\tspearman\tp_value\tsig\toov_pairs\n");
        for d in &self.datasets {
            let sig = if d.p_value < super::stats::SIGNIFICANCE_LEVEL { "*" } else { "" };
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6e}\t{}\t{}\n",
                d.name,
                d.group.as_deref().unwrap_or(""),
                d.n,
                d.pearson,
                d.spearman,
                d.p_value,
                sig,
                d.oov_pairs
            ));
        }
        for (g, avg) in &self.group_averages {
            out.push_str(&format!("{g} Average\t{g}\t\t{avg:.6}\t\t\t\t\n"));
        }
        out.push_str(&format!("Average\t\t\t{:.6}\t\t\t\t{}\n", self.average, self.total_oov_pairs()));
        out
    }
}

pub fn eval_dataset(dataset: &StsDataset, encoder: &SentenceEncoder<'_>) -> Result<StsResult> {
    if dataset.examples.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "dataset `{}` has {} pairs; at least 3 are needed",
            dataset.name,
            dataset.examples.len()
        )));
    }
    let mut predictions = Vec::with_capacity(dataset.examples.len());
    let mut oov_pairs = 0;
    for ex in &dataset.examples {
        let s = score_pair(ex, encoder)?;
        oov_pairs += s.all_oov as usize;
        predictions.push(s.score);
    }
    let gold: Vec<f64> = dataset.examples.iter().map(|e| e.gold).collect();
    let p = pearson(&gold, &predictions)
        .map_err(|e| Error::UndefinedCorrelation(format!("dataset `{}`: {e}", dataset.name)))?;
    let s = spearman(&gold, &predictions)
        .map_err(|e| Error::UndefinedCorrelation(format!("dataset `{}`: {e}", dataset.name)))?;
    Ok(StsResult {
        name: dataset.name.clone(),
        group: dataset.group.clone(),
        n: gold.len(),
        pearson: p,
        spearman: s,
        p_value: pearson_pvalue(p, gold.len())?,
        oov_pairs,
        predictions,
    })
}

pub fn eval_sts(datasets: &[StsDataset], encoder: &SentenceEncoder<'_>) -> Result<StsReport> {
    if datasets.is_empty() {
        return Err(Error::Config("no STS datasets given".into()));
    }
    let results = datasets
        .iter()
        .map(|d| eval_dataset(d, encoder))
        .collect::<Result<Vec<_>>>()?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in &results {
        if let Some(g) = &r.group {
            match groups.iter_mut().find(|(name, _)| name == g) {
                Some((_, v)) => v.push(r.pearson),
                None => groups.push((g.clone(), vec![r.pearson])),
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let group_averages = groups.iter().map(|(g, v)| (g.clone(), mean(v))).collect();
    let all: Vec<f64> = results.iter().map(|r| r.pearson).collect();
    Ok(StsReport {
        average: mean(&all),
        group_averages,
        datasets: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::AttentionKind;
    use crate::tables::EmbeddingTable;
    use approx::assert_abs_diff_eq;

    fn emb() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            2,
            [
                ("x", vec![1.0, 0.0]),
                ("y", vec![0.0, 1.0]),
                ("z", vec![1.0, 1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_errors_name_line() {
        let err = parse_sts("1\tx#A\ty#A\nbad line\n", "d.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_sts("abc\tx#A\ty#A\n", "d.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert_eq!(parse_pairs("x#A\ty#A\t4.5\n", "p").unwrap().len(), 1);
    }

    #[test]
    fn pair_scores() {
        let e = emb();
        let enc = SentenceEncoder::new(&e, AttentionKind::Uniform);
        let ex = |a: &str, b: &str| StsExample {
            gold: 0.0,
            s1: TaggedSentence::parse_line(a).unwrap(),
            s2: TaggedSentence::parse_line(b).unwrap(),
        };
        assert_abs_diff_eq!(score_pair(&ex("x#A z#B", "x#A z#B"), &enc).unwrap().score, 1.0, epsilon = 1e-15);
        assert_eq!(score_pair(&ex("x#A", "y#A"), &enc).unwrap().score, 0.0);
        // x + z = (2, 1) vs y = (0, 1): cos = 1/√5
        assert_abs_diff_eq!(
            score_pair(&ex("x#A z#A", "y#A"), &enc).unwrap().score,
            1.0 / 5f64.sqrt(),
            epsilon = 1e-15
        );
        let oov = score_pair(&ex("q#A", "r#A r#A"), &enc).unwrap();
        assert!(oov.all_oov);
        assert_eq!(oov.score, 0.0);
    }

    #[test]
    fn perfect_predictor() {
        let e = emb();
        let enc = SentenceEncoder::new(&e, AttentionKind::Uniform);
        let lines = ["x#A", "y#A", "z#A", "x#A z#A"];
        let base = TaggedSentence::parse_line("x#A").unwrap();
        let examples: Vec<StsExample> = lines
            .iter()
            .map(|l| {
                let s2 = TaggedSentence::parse_line(l).unwrap();
                let gold = score_pair(
                    &StsExample {
                        gold: 0.0,
                        s1: base.clone(),
                        s2: s2.clone(),
                    },
                    &enc,
                )
                .unwrap()
                .score;
                StsExample {
                    gold,
                    s1: base.clone(),
                    s2,
                }
            })
            .collect();
        let ds = |name: &str, group: &str| StsDataset {
            name: name.into(),
            group: Some(group.into()),
            examples: examples.clone(),
        };
        let report = eval_sts(&[ds("a", "2012"), ds("b", "2012"), ds("c", "2013")], &enc).unwrap();
        assert_abs_diff_eq!(report.datasets[0].pearson, 1.0, epsilon = 1e-12);
        assert_eq!(report.group_averages.len(), 2);
        assert_abs_diff_eq!(report.average, 1.0, epsilon = 1e-12);
        let tsv = report.to_tsv();
        assert!(tsv.starts_with("dataset\t"));
        assert!(tsv.contains("2012 Average"));

        let tiny = StsDataset {
            name: "t".into(),
            group: None,
            examples: examples[..2].to_vec(),
        };
        assert!(eval_sts(&[tiny], &enc).is_err());
    }
}
