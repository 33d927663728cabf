//! Evaluation harness: similarity benchmarks, reading-time correlation and
//! attention analysis.

pub mod analysis;
pub mod reading_time;
pub mod stats;
pub mod sts;

pub use analysis::{
    extreme_attention_words, nearest_words_to_tag, profile_to_csv, ranking_to_tsv, tag_attention_profile, tag_norms,
    ExtremeWords, TagProfileRow, WordAttention, DEFAULT_MIN_OCCURRENCES, DEFAULT_TOP_TAGS,
};
pub use reading_time::{
    eval_reading_time, parse_reading_times, MeasureCorrelation, ReadingTimeRecord, ReadingTimeReport, RtMeasure,
    TokenTimes,
};
pub use stats::{pearson, pearson_pvalue, spearman, CorrelationReport, SIGNIFICANCE_LEVEL};
pub use sts::{
    eval_dataset, eval_sts, parse_pairs, parse_sts, score_pair, ScoredPair, StsDataset, StsExample, StsReport,
    StsResult,
};
