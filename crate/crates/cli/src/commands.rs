use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use attnsent::eval::{
    eval_reading_time, eval_sts, extreme_attention_words, nearest_words_to_tag, parse_pairs, parse_reading_times,
    profile_to_csv, ranking_to_tsv, tag_attention_profile, tag_norms, StsDataset,
};
use attnsent::io::{read_to_string, write_atomic};
use attnsent::sentence::{parse_documents, parse_sentences};
use attnsent::training::{train_pp, train_scbow, OptimizerConfig, PpConfig, ScbowConfig};
use attnsent::{
    clip_surprisal, AttentionKind, EmbeddingTable, KnModel, ModelBundle, SentenceEncoder, TagKind, TaggedSentence,
    TfIdfIndex,
};

use crate::args::*;

type Echo = BTreeMap<String, String>;

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Writes `content` to `output` with a `.meta` sidecar holding the resolved
/// configuration, or prints it when no path is given.
fn emit(output: Option<&Path>, content: &str, echo: &Echo) -> Result<()> {
    match output {
        Some(path) => {
            write_atomic(path, content.as_bytes())?;
            let mut meta = String::new();
            for (k, v) in echo {
                writeln!(meta, "{k}={v}")?;
            }
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".meta");
            write_atomic(PathBuf::from(sidecar), meta.as_bytes())?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn load_lm(path: &Path) -> Result<KnModel> {
    let text = read_to_string(path)?;
    Ok(KnModel::from_text(&text, &path_str(path))?)
}

fn plain_words(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.split('#').next().unwrap_or(t).to_owned())
                .collect()
        })
        .collect()
}

pub fn lm_build(a: &LmBuildArgs) -> Result<()> {
    let text = read_to_string(&a.corpus)?;
    let model = KnModel::build(&plain_words(&text), a.order, a.min_count as u64)?;
    write_atomic(&a.output, model.to_text().as_bytes())?;
    eprintln!(
        "order {} model over {} word types written to {}",
        a.order,
        model.predictable_len(),
        a.output.display()
    );
    Ok(())
}

pub fn lm_surprisal(a: &LmSurprisalArgs) -> Result<()> {
    let lm = load_lm(&a.lm)?;
    let text = read_to_string(&a.input)?;
    let mut out = String::new();
    for (i, sentence) in plain_words(&text).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (w, s) in sentence.iter().zip(lm.surprisal_words(sentence)) {
            let v = if a.no_clip { s } else { clip_surprisal(s) };
            writeln!(out, "{w}\t{v}")?;
        }
    }
    let mut echo = Echo::new();
    echo.insert("lm".into(), path_str(&a.lm));
    echo.insert("input".into(), path_str(&a.input));
    echo.insert("clip".into(), (!a.no_clip).to_string());
    emit(a.output.as_deref(), &out, &echo)
}

fn load_init(model: &ModelArgs) -> Result<Option<EmbeddingTable>> {
    let Some(path) = &model.init else {
        return Ok(None);
    };
    let table = EmbeddingTable::from_text(&read_to_string(path)?, &path_str(path))?;
    if let Some(d) = model.dim {
        if d != table.dim() {
            bail!(attnsent::Error::Config(format!(
                "--dim {d} disagrees with the {}-dimensional vectors in {}",
                table.dim(),
                path.display()
            )));
        }
    }
    Ok(Some(table))
}

fn finish_bundle(mut bundle: ModelBundle, model: &ModelArgs, extra: &[(&str, String)]) -> Result<()> {
    bundle.lm_ref = model.lm.as_deref().map(path_str);
    if let Some(init) = &model.init {
        bundle.config.insert("init".into(), path_str(init));
    }
    for (k, v) in extra {
        bundle.config.insert((*k).into(), v.clone());
    }
    bundle.save(&model.output)?;
    eprintln!("bundle written to {}", model.output.display());
    Ok(())
}

fn report_epochs(log: &[attnsent::training::EpochLog]) {
    for l in log {
        eprintln!("{} epoch {}: mean loss {:.6}", l.phase, l.epoch, l.mean_loss);
    }
}

pub fn train_scbow_cmd(a: &ScbowArgs) -> Result<()> {
    let m = &a.model;
    let docs = parse_documents(&read_to_string(&a.corpus)?, &path_str(&a.corpus))?;
    let init = load_init(m)?;
    let lm = m.lm.as_deref().map(load_lm).transpose()?;
    let config = ScbowConfig {
        attention: m.attention,
        epochs: a.epochs,
        batch_size: a.batch,
        negatives: a.neg,
        optimizer: OptimizerConfig::new(a.optimizer, a.lr),
        seed: m.seed,
        length_factor: !m.no_length_factor,
        dim: m.dim.unwrap_or(attnsent::tables::DEFAULT_DIM),
    };
    let (bundle, log) = train_scbow(&docs, init, lm.as_ref(), &config)?;
    report_epochs(&log);
    finish_bundle(bundle, m, &[("corpus", path_str(&a.corpus))])
}

fn load_pairs(path: &Path) -> Result<Vec<(TaggedSentence, TaggedSentence)>> {
    Ok(parse_pairs(&read_to_string(path)?, &path_str(path))?)
}

pub fn train_pp_cmd(a: &PpArgs) -> Result<()> {
    let m = &a.model;
    let pairs = load_pairs(&a.pairs)?;
    let attn_pairs = a.attn_pairs.as_deref().map(load_pairs).transpose()?;
    let init = load_init(m)?;
    let lm = m.lm.as_deref().map(load_lm).transpose()?;
    let config = PpConfig {
        attention: m.attention,
        epochs: a.epochs,
        batch_size: a.batch,
        lambda: a.lambda,
        optimizer: OptimizerConfig::new(a.optimizer, a.lr),
        attn_epochs: a.attn_epochs,
        attn_optimizer: OptimizerConfig::new(a.optimizer, a.attn_lr),
        freeze_words: !a.no_freeze_words,
        seed: m.seed,
        length_factor: !m.no_length_factor,
        dim: m.dim.unwrap_or(attnsent::tables::DEFAULT_DIM),
    };
    let (bundle, log) = train_pp(&pairs, attn_pairs.as_deref(), init, lm.as_ref(), &config)?;
    report_epochs(&log);
    let mut extra = vec![("pairs", path_str(&a.pairs))];
    if let Some(p) = &a.attn_pairs {
        extra.push(("attn_pairs", path_str(p)));
    }
    finish_bundle(bundle, m, &extra)
}

/// Everything an encoder borrows from, loaded once.
struct EncoderParts {
    bundle: ModelBundle,
    kind: AttentionKind,
    lm: Option<KnModel>,
    tfidf: Option<TfIdfIndex>,
    length_factor: bool,
    echo: Echo,
}

impl EncoderParts {
    fn load<'s>(a: &EncoderArgs, evaluated: impl IntoIterator<Item = &'s TaggedSentence>) -> Result<Self> {
        let bundle = ModelBundle::load(&a.bundle)?;
        let kind = a.attention.unwrap_or(bundle.attention_kind);
        bundle.check_attention(kind)?;
        let lm = match (&a.lm, kind) {
            (Some(p), _) => Some(load_lm(p)?),
            (None, AttentionKind::Sur) => bail!(attnsent::Error::Config(
                "surprisal attention needs --lm".into()
            )),
            _ => None,
        };
        let tfidf = if kind == AttentionKind::TfIdf {
            Some(match &a.tfidf_corpus {
                Some(p) => TfIdfIndex::build(parse_sentences(&read_to_string(p)?, &path_str(p))?.iter())?,
                None => TfIdfIndex::build(evaluated)?,
            })
        } else {
            None
        };
        let mut echo = Echo::new();
        echo.insert("bundle".into(), path_str(&a.bundle));
        echo.insert("bundle_seed".into(), bundle.seed.to_string());
        echo.insert("attention".into(), kind.to_string());
        echo.insert("length_factor".into(), (!a.no_length_factor).to_string());
        if let Some(p) = &a.lm {
            echo.insert("lm".into(), path_str(p));
        }
        if kind == AttentionKind::TfIdf {
            let src = a.tfidf_corpus.as_deref().map_or("evaluated sentences".into(), path_str);
            echo.insert("tfidf_corpus".into(), src);
        }
        Ok(EncoderParts {
            bundle,
            kind,
            lm,
            tfidf,
            length_factor: !a.no_length_factor,
            echo,
        })
    }

    fn encoder(&self) -> Result<SentenceEncoder<'_>> {
        let mut enc = SentenceEncoder::from_bundle(&self.bundle, self.kind)?.with_length_factor(self.length_factor);
        if let Some(lm) = &self.lm {
            enc = enc.with_lm(lm);
        }
        if let Some(t) = &self.tfidf {
            enc = enc.with_tfidf(t);
        }
        Ok(enc)
    }

    fn tag_kind(&self) -> TagKind {
        self.kind.tag_kind().unwrap_or(TagKind::Pos)
    }
}

pub fn embed(a: &EmbedArgs) -> Result<()> {
    let sentences = parse_sentences(&read_to_string(&a.sentences)?, &path_str(&a.sentences))?;
    let parts = EncoderParts::load(&a.encoder, &sentences)?;
    let enc = parts.encoder()?;
    let mut vectors = String::new();
    let mut weights = String::new();
    for (i, s) in sentences.iter().enumerate() {
        let w = enc.weights(s)?;
        let v = attnsent::attention::compose(s, &w, enc.embeddings(), parts.length_factor)?;
        let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        writeln!(vectors, "{}", line.join("\t"))?;
        if i > 0 {
            weights.push('\n');
        }
        for (word, a) in s.words().zip(w.values()) {
            writeln!(weights, "{word}\t{a}")?;
        }
    }
    let mut echo = parts.echo.clone();
    echo.insert("sentences".into(), path_str(&a.sentences));
    if let Some(p) = &a.weights_out {
        emit(Some(p), &weights, &echo)?;
    }
    emit(a.output.as_deref(), &vectors, &echo)
}

pub fn eval_sts_cmd(a: &EvalStsArgs) -> Result<()> {
    let datasets = a
        .datasets
        .iter()
        .map(|p| StsDataset::load(p))
        .collect::<attnsent::Result<Vec<_>>>()?;
    let all = datasets.iter().flat_map(|d| &d.examples).flat_map(|e| [&e.s1, &e.s2]);
    let parts = EncoderParts::load(&a.encoder, all)?;
    let report = eval_sts(&datasets, &parts.encoder()?)?;
    let oov = report.total_oov_pairs();
    if oov > 0 {
        eprintln!("warning: {oov} pairs consisted entirely of unknown words and were scored 0");
    }
    let mut echo = parts.echo.clone();
    let files: Vec<String> = a.datasets.iter().map(|p| path_str(p)).collect();
    echo.insert("datasets".into(), files.join(","));
    emit(a.report.as_deref(), &report.to_tsv(), &echo)
}

pub fn eval_rt_cmd(a: &EvalRtArgs) -> Result<()> {
    let records = parse_reading_times(&read_to_string(&a.data)?, &path_str(&a.data))?;
    let parts = EncoderParts::load(&a.encoder, records.iter().map(|r| &r.sentence))?;
    let report = eval_reading_time(&records, &parts.encoder()?)?;
    for m in &report.measures {
        if m.skipped > 0 {
            eprintln!("warning: {} tokens without a {} time were skipped", m.skipped, m.measure);
        }
    }
    let mut echo = parts.echo.clone();
    echo.insert("data".into(), path_str(&a.data));
    emit(a.report.as_deref(), &report.to_tsv(), &echo)
}

fn load_corpus(paths: &[PathBuf]) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(parse_sentences(&read_to_string(p)?, &path_str(p))?);
    }
    Ok(out)
}

pub fn analyze_tags(a: &AnalyzeTagsArgs) -> Result<()> {
    let corpus = load_corpus(std::slice::from_ref(&a.corpus))?;
    let parts = EncoderParts::load(&a.encoder, &corpus)?;
    let rows = tag_attention_profile(&corpus, &parts.encoder()?, parts.tag_kind(), a.top)?;
    let mut echo = parts.echo.clone();
    echo.insert("corpus".into(), path_str(&a.corpus));
    echo.insert("top".into(), a.top.to_string());
    emit(a.output.as_deref(), &profile_to_csv(&rows), &echo)
}

fn bundle_tags(bundle: &ModelBundle, requested: Option<TagKind>) -> Result<&attnsent::TagTable> {
    let kind = requested
        .or(bundle.attention_kind.tag_kind())
        .unwrap_or(TagKind::Pos);
    bundle.tags(kind).with_context(|| {
        attnsent::Error::Lookup(format!("bundle has no {} tag vectors", kind.as_str()))
    })
}

fn bundle_echo(path: &Path, bundle: &ModelBundle) -> Echo {
    let mut echo = Echo::new();
    echo.insert("bundle".into(), path_str(path));
    echo.insert("bundle_seed".into(), bundle.seed.to_string());
    echo
}

pub fn analyze_nearest(a: &AnalyzeNearestArgs) -> Result<()> {
    let bundle = ModelBundle::load(&a.bundle)?;
    let tags = bundle_tags(&bundle, a.tags)?;
    let rows = nearest_words_to_tag(&a.tag, tags, &bundle.embeddings, a.k)?;
    let mut echo = bundle_echo(&a.bundle, &bundle);
    echo.insert("tag".into(), a.tag.clone());
    echo.insert("k".into(), a.k.to_string());
    emit(a.output.as_deref(), &ranking_to_tsv("word\tcosine", &rows), &echo)
}

pub fn analyze_norms(a: &AnalyzeNormsArgs) -> Result<()> {
    let bundle = ModelBundle::load(&a.bundle)?;
    let tags = bundle_tags(&bundle, a.tags)?;
    let echo = bundle_echo(&a.bundle, &bundle);
    emit(a.output.as_deref(), &ranking_to_tsv("tag\tnorm", &tag_norms(tags)), &echo)
}

pub fn analyze_extremes(a: &AnalyzeExtremesArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let parts = EncoderParts::load(&a.encoder, &corpus)?;
    let ex = extreme_attention_words(&corpus, &parts.encoder()?, a.k, a.min_occurrences)?;
    if let Some(note) = &ex.note {
        eprintln!("note: {note}");
    }
    let mut echo = parts.echo.clone();
    let files: Vec<String> = a.corpus.iter().map(|p| path_str(p)).collect();
    echo.insert("corpus".into(), files.join(","));
    echo.insert("k".into(), a.k.to_string());
    echo.insert("min_occurrences".into(), a.min_occurrences.to_string());
    emit(a.output.as_deref(), &ex.to_tsv(), &echo)
}
