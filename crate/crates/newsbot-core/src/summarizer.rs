//! Extractive summarization: generic 0/1 sentence labeling behind a pluggable
//! scorer, plus the soccer-specific variant that ranks in-match sentences by
//! the importance of their underlying events.
//!
//! Both paths are purely extractive — selected sentences are an order-
//! preserving subsequence of the input, never rewritten.

use indexmap::IndexMap;
use thiserror::Error;

use crate::event_model::{CategoryKind, EventRecord};
use crate::news_gen::{Article, Section, Sentence};

/// Per-sentence 0/1 labels with the scores that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceLabels {
    pub labels: Vec<u8>,
    pub scores: Vec<f64>,
}

impl SentenceLabels {
    pub fn selected_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1)
            .map(|(i, _)| i)
            .collect()
    }
}

/// How labels are derived from scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// Keep the `k` best-scoring sentences; earlier positions win ties.
    TopK(usize),
    /// Keep every sentence scoring at least the threshold.
    Threshold(f64),
}

/// Scores sentences in `[0, 1]`. Implementations must be deterministic and
/// reentrant.
pub trait SentenceScorer {
    fn score(&self, sentences: &[String]) -> Vec<f64>;
}

/// Default scorer: a normalized linear combination of a position prior
/// (earlier is higher), a length prior, and keyword overlap.
#[derive(Debug, Clone)]
pub struct HeuristicScorer {
    pub position_weight: f64,
    pub length_weight: f64,
    pub keyword_weight: f64,
    /// Matched case-insensitively as substrings.
    pub keywords: Vec<String>,
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        Self {
            position_weight: 0.5,
            length_weight: 0.3,
            keyword_weight: 0.2,
            keywords: Vec::new(),
        }
    }
}

impl HeuristicScorer {
    pub fn with_keywords(keywords: Vec<String>) -> Self {
        Self {
            keywords,
            ..Self::default()
        }
    }
}

impl SentenceScorer for HeuristicScorer {
    fn score(&self, sentences: &[String]) -> Vec<f64> {
        let n = sentences.len();
        if n == 0 {
            return Vec::new();
        }
        let total_weight = self.position_weight + self.length_weight + self.keyword_weight;
        let lengths: Vec<usize> = sentences.iter().map(|s| s.chars().count()).collect();
        let max_len = lengths.iter().copied().max().unwrap_or(0);
        let lowered: Vec<String> = sentences.iter().map(|s| s.to_lowercase()).collect();
        (0..n)
            .map(|i| {
                let position = (n - i) as f64 / n as f64;
                let length = if max_len == 0 {
                    0.0
                } else {
                    lengths[i] as f64 / max_len as f64
                };
                let keywords = if self.keywords.is_empty() {
                    0.0
                } else {
                    let hits = self
                        .keywords
                        .iter()
                        .filter(|k| lowered[i].contains(&k.to_lowercase()))
                        .count();
                    hits as f64 / self.keywords.len() as f64
                };
                if total_weight <= 0.0 {
                    0.0
                } else {
                    (self.position_weight * position
                        + self.length_weight * length
                        + self.keyword_weight * keywords)
                        / total_weight
                }
            })
            .collect()
    }
}

/// Event-importance weights; a strictly descending default gives a total,
/// deterministic ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceTable {
    weights: IndexMap<CategoryKind, f64>,
}

impl Default for ImportanceTable {
    fn default() -> Self {
        let mut weights = IndexMap::new();
        weights.insert(CategoryKind::Score, 5.0);
        weights.insert(CategoryKind::RedCard, 4.0);
        weights.insert(CategoryKind::YellowCard, 3.0);
        weights.insert(CategoryKind::Substitution, 2.0);
        weights.insert(CategoryKind::Foul, 1.0);
        weights.insert(CategoryKind::Other, 0.0);
        Self { weights }
    }
}

impl ImportanceTable {
    pub fn weight(&self, kind: CategoryKind) -> f64 {
        self.weights.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.values().copied().fold(0.0, f64::max)
    }

    /// Override one kind's weight; weights must be non-negative.
    pub fn set(&mut self, kind: CategoryKind, weight: f64) -> Result<(), SummarizeError> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(SummarizeError::BadImportanceWeight { weight });
        }
        self.weights.insert(kind, weight);
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SummarizeError {
    #[error("scorer returned {count} scores for {expected} sentences")]
    ScoreCountMismatch { count: usize, expected: usize },
    #[error("scorer returned {value} for sentence {index}; scores must lie in [0, 1]")]
    ScoreOutOfRange { index: usize, value: f64 },
    #[error("summary budget must be at least 1")]
    ZeroBudget,
    #[error("in-match sentence {index} has no valid source event link")]
    MissingEventLink { index: usize },
    #[error("importance weight {weight} must be finite and non-negative")]
    BadImportanceWeight { weight: f64 },
}

/// Split raw text into sentences on sentence-final punctuation
/// (`。 ！ ？ . ! ?`), keeping the delimiter with the preceding sentence.
/// Leading whitespace is trimmed from each sentence and whitespace-only
/// chunks are dropped. Text already split into sentence records never goes
/// through here — see [`split_sentences`].
pub fn split_text(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        current.push(c);
        if matches!(c, '。' | '！' | '？' | '.' | '!' | '?') {
            push_sentence(&mut sentences, &mut current);
        }
    }
    push_sentence(&mut sentences, &mut current);
    sentences
}

fn push_sentence(sentences: &mut Vec<String>, current: &mut String) {
    let sentence = current.trim_start();
    if !sentence.trim().is_empty() {
        sentences.push(sentence.to_string());
    }
    current.clear();
}

/// Sentence texts of an article. Generated articles are already
/// sentence-granular, so records pass through unchanged.
pub fn split_sentences(article: &Article) -> Vec<String> {
    article.sentences.iter().map(|s| s.text.clone()).collect()
}

/// Score sentences with the pluggable scorer and derive 0/1 labels with the
/// given selection rule. Deterministic given a deterministic scorer.
pub fn label_sentences(
    sentences: &[String],
    scorer: &dyn SentenceScorer,
    rule: SelectionRule,
) -> Result<SentenceLabels, SummarizeError> {
    let scores = scorer.score(sentences);
    if scores.len() != sentences.len() {
        return Err(SummarizeError::ScoreCountMismatch {
            count: scores.len(),
            expected: sentences.len(),
        });
    }
    for (index, &value) in scores.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(SummarizeError::ScoreOutOfRange { index, value });
        }
    }
    let mut labels = vec![0u8; scores.len()];
    match rule {
        SelectionRule::TopK(k) => {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            // Stable by construction: equal scores keep ascending position.
            order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
            for &i in order.iter().take(k) {
                labels[i] = 1;
            }
        }
        SelectionRule::Threshold(t) => {
            for (i, &s) in scores.iter().enumerate() {
                if s >= t {
                    labels[i] = 1;
                }
            }
        }
    }
    Ok(SentenceLabels { labels, scores })
}

/// Soccer summarization: keep the `budget` in-match sentences whose linked
/// events rank highest by (importance descending, minute ascending, sentence
/// position ascending), plus every post-match sentence. Pre-match sentences
/// are dropped. Original sentence order is preserved; a budget larger than
/// the candidate count keeps all candidates.
pub fn summarize_soccer(
    events: &[EventRecord],
    article: &Article,
    table: &ImportanceTable,
    budget: usize,
) -> Result<Article, SummarizeError> {
    if budget == 0 {
        return Err(SummarizeError::ZeroBudget);
    }
    let mut candidates = Vec::new();
    for (index, sentence) in article.sentences.iter().enumerate() {
        if sentence.section != Section::InMatch {
            continue;
        }
        let event = sentence
            .source_event_index
            .and_then(|e| events.get(e))
            .ok_or(SummarizeError::MissingEventLink { index })?;
        candidates.push((
            index,
            table.weight(event.category.kind()),
            event.time_minute,
        ));
    }
    candidates.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then(a.2.cmp(&b.2))
            .then(a.0.cmp(&b.0))
    });
    let mut keep: Vec<usize> = candidates.iter().take(budget).map(|c| c.0).collect();
    keep.sort_unstable();

    let sentences: Vec<Sentence> = article
        .sentences
        .iter()
        .enumerate()
        .filter(|(i, s)| s.section == Section::PostMatch || keep.binary_search(i).is_ok())
        .map(|(_, s)| s.clone())
        .collect();
    Ok(Article { sentences })
}

/// Labels aligned with the input article for a soccer summary: 1 for kept
/// sentences; scores are event importance normalized by the table maximum
/// (post-match sentences score 1, pre-match 0).
pub fn soccer_labels(
    events: &[EventRecord],
    article: &Article,
    table: &ImportanceTable,
    summary: &Article,
) -> SentenceLabels {
    let max = table.max_weight().max(1.0);
    let mut kept = summary.sentences.iter();
    let mut next_kept = kept.next();
    let mut labels = Vec::with_capacity(article.sentences.len());
    let mut scores = Vec::with_capacity(article.sentences.len());
    for sentence in &article.sentences {
        let label = match next_kept {
            Some(k) if k == sentence => {
                next_kept = kept.next();
                1u8
            }
            _ => 0u8,
        };
        labels.push(label);
        let score = match sentence.section {
            Section::PostMatch => 1.0,
            Section::PreMatch => 0.0,
            Section::InMatch => sentence
                .source_event_index
                .and_then(|e| events.get(e))
                .map_or(0.0, |e| table.weight(e.category.kind()) / max),
        };
        scores.push(score);
    }
    SentenceLabels { labels, scores }
}

/// Serialize labels to the sidecar format: one `label TAB score` line per
/// input sentence.
pub fn write_labels(labels: &SentenceLabels) -> String {
    labels
        .labels
        .iter()
        .zip(&labels.scores)
        .map(|(l, s)| format!("{l}\t{s}\n"))
        .collect()
}
