//! Unigram and bigram language models over a capped vocabulary.
//!
//! Conventions:
//! - The vocabulary is the `vocab_size` most frequent training tokens (ties
//!   broken by byte-wise string order) plus the reserved unknown token
//!   [`UNK`]. Out-of-vocabulary tokens map to [`UNK`] in training and scoring.
//! - Bigram contexts start from the reserved boundary token [`BOS`] at every
//!   sentence start. There is no end token.
//! - Laplace smoothing for bigrams is `(c(ctx, w) + 1) / (c(ctx) + |E|)` where
//!   `c(ctx)` counts occurrences of `ctx` as a context and the event space
//!   `E` is the vocabulary plus [`BOS`]. Conditionals therefore sum to one
//!   over `E`.
//! - Unigrams are unsmoothed by default: `P(w) = c(w) / total`.
//! - Natural logarithms throughout.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scoring::tokenize::tokenize;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const DEFAULT_VOCAB_SIZE: usize = 50_000;

const MODEL_MAGIC: &str = "kasus-ngram\t1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    Laplace,
}

impl Smoothing {
    fn key(self) -> &'static str {
        match self {
            Smoothing::None => "none",
            Smoothing::Laplace => "laplace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramConfig {
    pub order: u8,
    pub vocab_size: usize,
    pub smoothing: Smoothing,
}

impl NgramConfig {
    /// Unsmoothed unigram model.
    pub fn unigram(vocab_size: usize) -> Self {
        NgramConfig {
            order: 1,
            vocab_size,
            smoothing: Smoothing::None,
        }
    }

    /// Add-one smoothed bigram model.
    pub fn bigram(vocab_size: usize) -> Self {
        NgramConfig {
            order: 2,
            vocab_size,
            smoothing: Smoothing::Laplace,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.order) {
            return Err(Error::Config(format!(
                "n-gram order must be 1 or 2, got {}",
                self.order
            )));
        }
        if self.vocab_size == 0 {
            return Err(Error::Config("vocabulary size must be at least 1".into()));
        }
        Ok(())
    }
}

/// A re-iterable source of training sentences. Training makes two passes:
/// one to pick the vocabulary and one to count.
pub trait CorpusSource: Sync {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()>;
}

impl<S: AsRef<str> + Sync> CorpusSource for [S] {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        for line in self {
            f(&tokenize(line.as_ref()));
        }
        Ok(())
    }
}

impl<S: AsRef<str> + Sync> CorpusSource for Vec<S> {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        self.as_slice().for_each_sentence(f)
    }
}

impl<S: AsRef<str> + Sync, const N: usize> CorpusSource for [S; N] {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        self.as_slice().for_each_sentence(f)
    }
}

/// Plain-text corpus with one sentence per line, streamed from disk.
#[derive(Debug, Clone)]
pub struct TextCorpus {
    path: PathBuf,
    part: usize,
    parts: usize,
}

impl TextCorpus {
    pub fn new(path: impl AsRef<Path>) -> Self {
        TextCorpus {
            path: path.as_ref().to_path_buf(),
            part: 0,
            parts: 1,
        }
    }

    /// Splits one file into `parts` sources; source `k` sees lines
    /// `k, k + parts, k + 2 * parts, ...`.
    pub fn strided(path: impl AsRef<Path>, parts: usize) -> Vec<TextCorpus> {
        let parts = parts.max(1);
        (0..parts)
            .map(|part| TextCorpus {
                path: path.as_ref().to_path_buf(),
                part,
                parts,
            })
            .collect()
    }
}

impl CorpusSource for TextCorpus {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        let reader = BufReader::new(File::open(&self.path)?);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if idx % self.parts == self.part {
                f(&tokenize(&line));
            }
        }
        Ok(())
    }
}

fn is_reserved(token: &str) -> bool {
    token == UNK || token == BOS
}

/// Raw token frequencies for vocabulary selection. Merging is associative
/// and commutative.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FrequencyCounts(HashMap<String, u64>);

impl FrequencyCounts {
    pub fn observe(&mut self, tokens: &[String]) {
        for token in tokens {
            *self.0.entry(token.clone()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: FrequencyCounts) {
        for (token, count) in other.0 {
            *self.0.entry(token).or_insert(0) += count;
        }
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// Top `limit` non-reserved tokens by count, ties lexicographic.
    pub fn top(&self, limit: usize) -> Vec<String> {
        let mut entries: Vec<(&String, &u64)> =
            self.0.iter().filter(|(t, _)| !is_reserved(t)).collect();
        entries.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        entries
            .into_iter()
            .take(limit)
            .map(|(t, _)| t.clone())
            .collect()
    }
}

/// Vocabulary-mapped counts. Ids: 0 is [`UNK`], 1.. are vocabulary tokens,
/// `vocab.len()` is [`BOS`] (context only).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Counts {
    unigram: Vec<u64>,
    context: Vec<u64>,
    bigram: HashMap<(u32, u32), u64>,
    total: u64,
}

impl Counts {
    fn new(vocab_len: usize, order: u8) -> Self {
        Counts {
            unigram: vec![0; vocab_len],
            context: if order == 2 {
                vec![0; vocab_len + 1]
            } else {
                Vec::new()
            },
            bigram: HashMap::new(),
            total: 0,
        }
    }

    fn observe(&mut self, ids: &[u32], bos: u32, order: u8) {
        for &id in ids {
            self.unigram[id as usize] += 1;
        }
        self.total += ids.len() as u64;
        if order == 2 {
            let mut prev = bos;
            for &id in ids {
                self.context[prev as usize] += 1;
                *self.bigram.entry((prev, id)).or_insert(0) += 1;
                prev = id;
            }
        }
    }

    fn merge(&mut self, other: Counts) {
        for (a, b) in self.unigram.iter_mut().zip(other.unigram) {
            *a += b;
        }
        for (a, b) in self.context.iter_mut().zip(other.context) {
            *a += b;
        }
        for (key, count) in other.bigram {
            *self.bigram.entry(key).or_insert(0) += count;
        }
        self.total += other.total;
    }
}

/// Trained unigram or bigram model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramModel {
    config: NgramConfig,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    counts: Counts,
}

/// Trains on a single source.
pub fn train_ngram<S: CorpusSource + ?Sized>(
    corpus: &S,
    config: NgramConfig,
) -> Result<NgramModel> {
    train_ngram_partitioned(&[corpus], config)
}

/// Trains on several partitions counted in parallel and merged. The result
/// does not depend on how the corpus was partitioned.
pub fn train_ngram_partitioned<S: CorpusSource + ?Sized>(
    partitions: &[&S],
    config: NgramConfig,
) -> Result<NgramModel> {
    config.validate()?;

    let frequencies = std::thread::scope(|scope| -> Result<FrequencyCounts> {
        let handles: Vec<_> = partitions
            .iter()
            .map(|part| {
                scope.spawn(move || -> Result<FrequencyCounts> {
                    let mut counts = FrequencyCounts::default();
                    part.for_each_sentence(&mut |tokens| counts.observe(tokens))?;
                    Ok(counts)
                })
            })
            .collect();
        let mut merged = FrequencyCounts::default();
        for handle in handles {
            merged.merge(handle.join().expect("counting thread panicked")?);
        }
        Ok(merged)
    })?;
    if frequencies.total() == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut vocab = vec![UNK.to_string()];
    vocab.extend(frequencies.top(config.vocab_size));
    let index: HashMap<String, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let bos = vocab.len() as u32;

    let counts = std::thread::scope(|scope| -> Result<Counts> {
        let index = &index;
        let vocab_len = vocab.len();
        let handles: Vec<_> = partitions
            .iter()
            .map(|part| {
                scope.spawn(move || -> Result<Counts> {
                    let mut counts = Counts::new(vocab_len, config.order);
                    let mut ids = Vec::new();
                    part.for_each_sentence(&mut |tokens| {
                        ids.clear();
                        ids.extend(
                            tokens
                                .iter()
                                .map(|t| index.get(t.as_str()).copied().unwrap_or(0)),
                        );
                        if !ids.is_empty() {
                            counts.observe(&ids, bos, config.order);
                        }
                    })?;
                    Ok(counts)
                })
            })
            .collect();
        let mut merged = Counts::new(vocab_len, config.order);
        for handle in handles {
            merged.merge(handle.join().expect("counting thread panicked")?);
        }
        Ok(merged)
    })?;

    Ok(NgramModel {
        config,
        vocab,
        index,
        counts,
    })
}

impl NgramModel {
    pub fn order(&self) -> u8 {
        self.config.order
    }

    pub fn config(&self) -> NgramConfig {
        self.config
    }

    /// Vocabulary including [`UNK`], excluding [`BOS`].
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts.total
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(0)
    }

    fn bos(&self) -> u32 {
        self.vocab.len() as u32
    }

    /// Count of `token` after unknown-mapping.
    pub fn unigram_count(&self, token: &str) -> u64 {
        self.counts.unigram[self.id(token) as usize]
    }

    /// Count of the bigram `(context, token)`; `context = None` is sentence start.
    pub fn bigram_count(&self, context: Option<&str>, token: &str) -> u64 {
        let ctx = context.map_or(self.bos(), |c| self.id(c));
        self.counts
            .bigram
            .get(&(ctx, self.id(token)))
            .copied()
            .unwrap_or(0)
    }

    /// Size of the outcome space used in the smoothing denominator.
    pub fn event_space_size(&self) -> usize {
        match self.config.order {
            1 => self.vocab.len(),
            _ => self.vocab.len() + 1,
        }
    }

    /// Tokens of the bigram event space: vocabulary plus [`BOS`].
    pub fn event_space(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .iter()
            .map(String::as_str)
            .chain((self.config.order == 2).then_some(BOS))
    }

    fn unigram_prob_id(&self, id: u32) -> f64 {
        let count = self.counts.unigram.get(id as usize).copied().unwrap_or(0) as f64;
        let total = self.counts.total as f64;
        match self.config.smoothing {
            Smoothing::None => count / total,
            Smoothing::Laplace => (count + 1.0) / (total + self.vocab.len() as f64),
        }
    }

    fn bigram_prob_id(&self, ctx: u32, id: u32) -> f64 {
        let pair = self.counts.bigram.get(&(ctx, id)).copied().unwrap_or(0) as f64;
        let ctx_count = self.counts.context[ctx as usize] as f64;
        match self.config.smoothing {
            Smoothing::None => {
                if ctx_count == 0.0 {
                    0.0
                } else {
                    pair / ctx_count
                }
            }
            Smoothing::Laplace => (pair + 1.0) / (ctx_count + self.event_space_size() as f64),
        }
    }

    /// `P(token)` for unigram models.
    pub fn unigram_probability(&self, token: &str) -> f64 {
        let id = if token == BOS {
            self.bos()
        } else {
            self.id(token)
        };
        self.unigram_prob_id(id)
    }

    /// `P(token | context)` for bigram models; `context = None` is sentence start.
    /// Unigram models ignore the context.
    pub fn probability(&self, context: Option<&str>, token: &str) -> f64 {
        if self.config.order == 1 {
            return self.unigram_probability(token);
        }
        let ctx = match context {
            None => self.bos(),
            Some(c) if c == BOS => self.bos(),
            Some(c) => self.id(c),
        };
        let id = if token == BOS {
            self.bos()
        } else {
            self.id(token)
        };
        self.bigram_prob_id(ctx, id)
    }

    /// Natural-log probability of each token under the chain rule.
    pub fn token_log_probs(&self, tokens: &[String]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut prev = self.bos();
        for token in tokens {
            let id = self.id(token);
            let p = match self.config.order {
                1 => self.unigram_prob_id(id),
                _ => self.bigram_prob_id(prev, id),
            };
            if p <= 0.0 {
                return Err(Error::ZeroProbability(token.clone()));
            }
            out.push(p.ln());
            prev = id;
        }
        Ok(out)
    }

    /// Sentence log-probability `sum_i log P(w_i | w_{<i})`.
    pub fn score_chain(&self, tokens: &[String]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::EmptyTokens);
        }
        Ok(self.token_log_probs(tokens)?.iter().sum())
    }

    /// Per-token perplexity over a set of sentences. Diagnostic only.
    pub fn perplexity<'a>(&self, sentences: impl IntoIterator<Item = &'a [String]>) -> Result<f64> {
        let mut log_sum = 0.0;
        let mut n = 0usize;
        for tokens in sentences {
            let lps = self.token_log_probs(tokens)?;
            n += lps.len();
            log_sum += lps.iter().sum::<f64>();
        }
        if n == 0 {
            return Err(Error::EmptyTokens);
        }
        Ok((-log_sum / n as f64).exp())
    }

    /// Text serialization:
    ///
    /// ```text
    /// kasus-ngram<TAB>1
    /// order<TAB>2
    /// vocab_size<TAB>50000
    /// smoothing<TAB>laplace
    /// total_tokens<TAB>N
    /// vocab<TAB>token<TAB>count      (one per vocabulary id, <unk> first)
    /// context<TAB>token<TAB>count    (bigram models, nonzero only)
    /// bigram<TAB>ctx<TAB>token<TAB>count
    /// ```
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC}")?;
        writeln!(w, "order\t{}", self.config.order)?;
        writeln!(w, "vocab_size\t{}", self.config.vocab_size)?;
        writeln!(w, "smoothing\t{}", self.config.smoothing.key())?;
        writeln!(w, "total_tokens\t{}", self.counts.total)?;
        for (token, count) in self.vocab.iter().zip(&self.counts.unigram) {
            writeln!(w, "vocab\t{token}\t{count}")?;
        }
        let name = |id: u32| {
            if id == self.bos() {
                BOS
            } else {
                self.vocab[id as usize].as_str()
            }
        };
        for (id, count) in self.counts.context.iter().enumerate() {
            if *count > 0 {
                writeln!(w, "context\t{}\t{count}", name(id as u32))?;
            }
        }
        let mut pairs: Vec<(&(u32, u32), &u64)> = self.counts.bigram.iter().collect();
        pairs.sort();
        for ((ctx, id), count) in pairs {
            writeln!(w, "bigram\t{}\t{}\t{count}", name(*ctx), name(*id))?;
        }
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let bad = |msg: String| Error::Model(msg);
        let mut lines = reader.lines();
        let mut next_line = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Model("unexpected end of file".into()))?
                .map_err(Error::from)
        };
        if next_line()? != MODEL_MAGIC {
            return Err(bad("missing kasus-ngram header".into()));
        }
        let mut header = |key: &str| -> Result<String> {
            let line = next_line()?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('\t'))
                .map(String::from)
                .ok_or_else(|| Error::Model(format!("expected `{key}` line, got {line:?}")))
        };
        let order: u8 = header("order")?
            .parse()
            .map_err(|e| bad(format!("order: {e}")))?;
        let vocab_size: usize = header("vocab_size")?
            .parse()
            .map_err(|e| bad(format!("vocab_size: {e}")))?;
        let smoothing = match header("smoothing")?.as_str() {
            "none" => Smoothing::None,
            "laplace" => Smoothing::Laplace,
            other => return Err(bad(format!("unknown smoothing {other:?}"))),
        };
        let total: u64 = header("total_tokens")?
            .parse()
            .map_err(|e| bad(format!("total_tokens: {e}")))?;
        let config = NgramConfig {
            order,
            vocab_size,
            smoothing,
        };
        config.validate()?;

        let mut vocab = Vec::new();
        let mut unigram = Vec::new();
        let mut rest = Vec::new();
        for line in lines {
            let line = line?;
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["vocab", token, count] => {
                    if !rest.is_empty() {
                        return Err(bad("vocab lines must precede counts".into()));
                    }
                    vocab.push(token.to_string());
                    unigram.push(
                        count
                            .parse::<u64>()
                            .map_err(|e| bad(format!("count: {e}")))?,
                    );
                }
                _ => rest.push(line),
            }
        }
        if vocab.first().map(String::as_str) != Some(UNK) || vocab.len() > vocab_size + 1 {
            return Err(bad(
                "vocabulary must start with <unk> and respect vocab_size".into(),
            ));
        }
        let index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if index.len() != vocab.len() {
            return Err(bad("duplicate vocabulary entry".into()));
        }
        let bos = vocab.len() as u32;
        let lookup = |token: &str| -> Result<u32> {
            if token == BOS {
                Ok(bos)
            } else {
                index
                    .get(token)
                    .copied()
                    .ok_or_else(|| Error::Model(format!("token {token:?} not in vocabulary")))
            }
        };
        let mut counts = Counts::new(vocab.len(), order);
        counts.unigram = unigram;
        counts.total = total;
        for line in rest {
            let fields: Vec<&str> = line.split('\t').collect();
            match (order, fields.as_slice()) {
                (2, ["context", token, count]) => {
                    counts.context[lookup(token)? as usize] =
                        count.parse().map_err(|e| bad(format!("count: {e}")))?;
                }
                (2, ["bigram", ctx, token, count]) => {
                    let key = (lookup(ctx)?, lookup(token)?);
                    counts
                        .bigram
                        .insert(key, count.parse().map_err(|e| bad(format!("count: {e}")))?);
                }
                _ => return Err(bad(format!("unexpected line {line:?}"))),
            }
        }
        if counts.unigram.iter().sum::<u64>() != total {
            return Err(bad("unigram counts do not sum to total_tokens".into()));
        }
        Ok(NgramModel {
            config,
            vocab,
            index,
            counts,
        })
    }
}
