//! Correlating attention weights with human reading times.

use std::fmt;

use crate::attention::SentenceEncoder;
use crate::error::{Error, Result};
use crate::sentence::{TaggedSentence, TaggedToken};

use super::stats::CorrelationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtMeasure {
    FirstPass,
    GoPast,
    RightBounded,
}

impl RtMeasure {
    pub const ALL: [RtMeasure; 3] = [RtMeasure::FirstPass, RtMeasure::GoPast, RtMeasure::RightBounded];

    pub fn as_str(self) -> &'static str {
        match self {
            RtMeasure::FirstPass => "fpass",
            RtMeasure::GoPast => "gopast",
            RtMeasure::RightBounded => "rb",
        }
    }
}

impl fmt::Display for RtMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-token reading times in milliseconds; `None` where no time was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TokenTimes {
    pub fpass: Option<f64>,
    pub gopast: Option<f64>,
    pub rb: Option<f64>,
}

impl TokenTimes {
    pub fn get(&self, m: RtMeasure) -> Option<f64> {
        match m {
            RtMeasure::FirstPass => self.fpass,
            RtMeasure::GoPast => self.gopast,
            RtMeasure::RightBounded => self.rb,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadingTimeRecord {
    pub sentence: TaggedSentence,
    pub times: Vec<TokenTimes>,
}

impl ReadingTimeRecord {
    pub fn new(sentence: TaggedSentence, times: Vec<TokenTimes>) -> Result<Self> {
        if times.len() != sentence.len() {
            return Err(Error::Dimension {
                expected: sentence.len(),
                got: times.len(),
            });
        }
        for t in &times {
            check_times(t).map_err(Error::Domain)?;
        }
        Ok(ReadingTimeRecord { sentence, times })
    }
}

fn check_times(t: &TokenTimes) -> std::result::Result<(), String> {
    for v in [t.fpass, t.gopast, t.rb].into_iter().flatten() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("reading time {v} is not a non-negative number"));
        }
    }
    if let Some(f) = t.fpass {
        if t.gopast.is_some_and(|g| g < f) {
            return Err("go-past time is shorter than first-pass time".into());
        }
        if t.rb.is_some_and(|r| r < f) {
            return Err("right-bounded time is shorter than first-pass time".into());
        }
    }
    Ok(())
}

fn parse_time(field: &str) -> std::result::Result<Option<f64>, String> {
    let f = field.trim();
    if f.is_empty() || f == "NA" || f == "-" {
        return Ok(None);
    }
    f.parse().map(Some).map_err(|_| format!("invalid reading time `{f}`"))
}

/// Parses one token per line, `word#TAG TAB fpass TAB gopast TAB rb`, with
/// blank lines between sentences. `NA` or `-` marks a missing time.
pub fn parse_reading_times(text: &str, source: &str) -> Result<Vec<ReadingTimeRecord>> {
    let mut out = Vec::new();
    let mut tokens: Vec<TaggedToken> = Vec::new();
    let mut times = Vec::new();
    let mut start = 0;
    let flush = |tokens: &mut Vec<TaggedToken>, times: &mut Vec<TokenTimes>, line: usize, out: &mut Vec<_>| {
        if tokens.is_empty() {
            return Ok(());
        }
        let sentence = TaggedSentence::new(std::mem::take(tokens)).map_err(|e| Error::parse(source, line, e.to_string()))?;
        out.push(ReadingTimeRecord {
            sentence,
            times: std::mem::take(times),
        });
        Ok::<(), Error>(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut tokens, &mut times, start, &mut out)?;
            continue;
        }
        if tokens.is_empty() {
            start = i + 1;
        }
        let err = |m: String| Error::parse(source, i + 1, m);
        let fields: Vec<&str> = line.split('\t').collect();
        let [tok, fp, gp, rb] = fields.as_slice() else {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let t = TokenTimes {
            fpass: parse_time(fp).map_err(&err)?,
            gopast: parse_time(gp).map_err(&err)?,
            rb: parse_time(rb).map_err(&err)?,
        };
        check_times(&t).map_err(&err)?;
        tokens.push(TaggedToken::parse(tok.trim()).map_err(&err)?);
        times.push(t);
    }
    flush(&mut tokens, &mut times, start, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCorrelation {
    pub measure: RtMeasure,
    pub report: CorrelationReport,
    /// Tokens left out because this measure was missing.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadingTimeReport {
    pub measures: Vec<MeasureCorrelation>,
    pub tokens: usize,
}

impl ReadingTimeReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("measure\tn\tpearson\tspearman\tp_value\tsig\tskipped\n");
        for m in &self.measures {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6e}\t{}\t{}\n",
                m.measure,
                m.report.n,
                m.report.pearson,
                m.report.spearman,
                m.report.p_value,
                m.report.marker(),
                m.skipped
            ));
        }
        out
    }
}

/// Pools every token of the corpus and correlates its attention weight with
/// each reading-time measure.
pub fn eval_reading_time(records: &[ReadingTimeRecord], encoder: &SentenceEncoder<'_>) -> Result<ReadingTimeReport> {
    let mut pooled: Vec<(f64, TokenTimes)> = Vec::new();
    for r in records {
        let w = encoder.weights(&r.sentence)?;
        pooled.extend(w.values().iter().copied().zip(r.times.iter().copied()));
    }
    let mut measures = Vec::new();
    for m in RtMeasure::ALL {
        let (att, rt): (Vec<f64>, Vec<f64>) = pooled
            .iter()
            .filter_map(|(a, t)| t.get(m).map(|v| (*a, v)))
            .unzip();
        let report = CorrelationReport::compute(&att, &rt)
            .map_err(|e| Error::UndefinedCorrelation(format!("measure {m}: {e}")))?;
        measures.push(MeasureCorrelation {
            measure: m,
            report,
            skipped: pooled.len() - att.len(),
        });
    }
    Ok(ReadingTimeReport {
        measures,
        tokens: pooled.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::AttentionKind;
    use crate::tables::EmbeddingTable;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parse_blocks_and_missing() {
        let text = "a#DT\t100\t120\t110\nb#NN\tNA\t-\t200\n\n\nc#VB\t50\t50\t50\n";
        let recs = parse_reading_times(text, "rt").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].sentence.len(), 2);
        assert_eq!(recs[0].times[1].fpass, None);
        assert_eq!(recs[0].times[1].rb, Some(200.0));
    }

    #[test]
    fn parse_rejects_bad_lines() {
        let e = parse_reading_times("a#DT\t100\t90\t110\n", "rt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_reading_times("a#DT\t1\t1\t1\nb#NN\t1\t1\n", "rt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_reading_times("a#DT\tx\t1\t1\n", "rt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    fn corpus() -> (EmbeddingTable, Vec<TaggedSentence>) {
        let emb = EmbeddingTable::from_entries(1, [("a", vec![1.0])]).unwrap();
        let sents = ["a#A", "a#A a#A", "a#A a#A a#A", "a#A a#A a#A a#A"]
            .iter()
            .map(|l| TaggedSentence::parse_line(l).unwrap())
            .collect();
        (emb, sents)
    }

    #[test]
    fn identity_affine_monotone() {
        let (emb, sents) = corpus();
        let enc = SentenceEncoder::new(&emb, AttentionKind::Uniform);
        let build = |f: &dyn Fn(f64) -> f64| -> Vec<ReadingTimeRecord> {
            sents
                .iter()
                .map(|s| {
                    let w = 1.0 / s.len() as f64;
                    let t = TokenTimes {
                        fpass: Some(f(w)),
                        gopast: Some(f(w) + 1.0),
                        rb: Some(f(w) * 2.0),
                    };
                    ReadingTimeRecord::new(s.clone(), vec![t; s.len()]).unwrap()
                })
                .collect()
        };
        let id = eval_reading_time(&build(&|w| w), &enc).unwrap();
        for m in &id.measures {
            assert_abs_diff_eq!(m.report.pearson, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.report.spearman, 1.0, epsilon = 1e-12);
        }
        let affine = eval_reading_time(&build(&|w| 300.0 * w + 50.0), &enc).unwrap();
        assert_abs_diff_eq!(affine.measures[0].report.pearson, 1.0, epsilon = 1e-12);
        let mono = eval_reading_time(&build(&|w| (10.0 * w).exp()), &enc).unwrap();
        assert_abs_diff_eq!(mono.measures[0].report.spearman, 1.0, epsilon = 1e-12);
        assert!(mono.measures[0].report.pearson < 1.0 - 1e-6);
        assert_eq!(id.tokens, 10);
        assert!(id.to_tsv().starts_with("measure\t"));
    }

    #[test]
    fn missing_tokens_counted() {
        let (emb, sents) = corpus();
        let enc = SentenceEncoder::new(&emb, AttentionKind::Uniform);
        let mut recs: Vec<ReadingTimeRecord> = sents
            .iter()
            .map(|s| {
                let w = 1.0 / s.len() as f64;
                let t = TokenTimes {
                    fpass: Some(w),
                    gopast: Some(w),
                    rb: Some(w),
                };
                ReadingTimeRecord::new(s.clone(), vec![t; s.len()]).unwrap()
            })
            .collect();
        recs[3].times[0].gopast = None;
        let rep = eval_reading_time(&recs, &enc).unwrap();
        assert_eq!(rep.measures[0].skipped, 0);
        assert_eq!(rep.measures[1].skipped, 1);
        assert_eq!(rep.measures[1].report.n, 9);
    }
}
