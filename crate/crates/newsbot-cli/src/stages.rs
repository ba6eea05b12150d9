//! One function per pipeline stage, file paths in, files out. The `run`
//! pipeline and the stage subcommands share these, so composing subcommands
//! by hand produces byte-identical artifacts.

use std::path::Path;

use anyhow::{anyhow, Context, Result};

use newsbot_core::event_model::EventRecord;
use newsbot_core::lipsync::{synthesize_animation, write_animation, MlpParameters};
use newsbot_core::news_gen::{generate_article, parse_article, write_article, Article, NewsConfig};
use newsbot_core::phoneme_timeline::{
    text_to_phonemes, write_timeline, Lexicon, PhonemeTimeline, UnknownTokenPolicy,
};
use newsbot_core::summarizer::{
    label_sentences, soccer_labels, split_sentences, summarize_soccer, write_labels,
    HeuristicScorer, ImportanceTable, SelectionRule,
};
use newsbot_core::template_dsl::TemplateBank;
use newsbot_core::translator::{translate_text, Glossary, TranslationBackend};

use crate::config::SummaryRule;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Generate the article from events + facts and persist it.
pub fn stage_generate(
    events: &[EventRecord],
    facts: &newsbot_core::event_model::MatchFacts,
    bank: &TemplateBank,
    seed: u64,
    news_config: &NewsConfig,
    out_path: &Path,
) -> Result<Article> {
    let article = generate_article(events, facts, bank, seed, news_config)?;
    write_file(out_path, &write_article(&article)?)?;
    Ok(article)
}

/// Summarize an article and persist the summary plus the labels sidecar.
pub fn stage_summarize(
    article: &Article,
    events: &[EventRecord],
    rule: &SummaryRule,
    importance: &ImportanceTable,
    out_path: &Path,
    labels_path: &Path,
) -> Result<Article> {
    let (summary, labels) = match rule {
        SummaryRule::Budget(budget) => {
            let summary = summarize_soccer(events, article, importance, *budget)?;
            let labels = soccer_labels(events, article, importance, &summary);
            (summary, labels)
        }
        SummaryRule::TopK { k, keywords } => {
            let sentences = split_sentences(article);
            let scorer = HeuristicScorer::with_keywords(keywords.clone());
            let labels = label_sentences(&sentences, &scorer, SelectionRule::TopK(*k))?;
            let kept: Vec<_> = article
                .sentences
                .iter()
                .zip(&labels.labels)
                .filter(|(_, &label)| label == 1)
                .map(|(s, _)| s.clone())
                .collect();
            (Article { sentences: kept }, labels)
        }
    };
    write_file(out_path, &write_article(&summary)?)?;
    write_file(labels_path, &write_labels(&labels))?;
    Ok(summary)
}

/// Translate every sentence of an article through mask → backend → unmask,
/// preserving section tags and event links.
pub fn stage_translate(
    input: &Article,
    glossary: &Glossary,
    backend: &dyn TranslationBackend,
    src: &str,
    tgt: &str,
    out_path: &Path,
) -> Result<Article> {
    let mut sentences = Vec::with_capacity(input.sentences.len());
    for sentence in &input.sentences {
        let translated = translate_text(&sentence.text, glossary, backend, src, tgt)?;
        sentences.push(newsbot_core::news_gen::Sentence {
            text: translated,
            section: sentence.section,
            source_event_index: sentence.source_event_index,
        });
    }
    let article = Article { sentences };
    write_file(out_path, &write_article(&article)?)?;
    Ok(article)
}

/// Convert an article's text to a phoneme timeline and persist it.
/// Sentences are joined with spaces; sentence punctuation becomes silence.
pub fn stage_phonemize(
    input: &Article,
    lexicon: &Lexicon,
    default_duration_s: f64,
    policy: UnknownTokenPolicy,
    out_path: &Path,
) -> Result<PhonemeTimeline> {
    let text = input
        .sentences
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let timeline = text_to_phonemes(&text, lexicon, default_duration_s, policy)?;
    write_file(out_path, &write_timeline(&timeline))?;
    Ok(timeline)
}

/// Synthesize the blendshape animation and persist it.
pub fn stage_animate(
    model: &MlpParameters,
    timeline: &PhonemeTimeline,
    fps: f64,
    out_path: &Path,
) -> Result<newsbot_core::lipsync::BlendshapeAnimation> {
    let animation = synthesize_animation(model, timeline, fps)?;
    write_file(out_path, &write_animation(&animation))?;
    Ok(animation)
}

/// Read + parse an article file.
pub fn load_article(path: &Path) -> Result<Article> {
    let text = crate::config::read_to_string(path)?;
    parse_article(&text).with_context(|| format!("cannot parse article {}", path.display()))
}

/// Standard artifact names inside a run directory.
pub mod artifact {
    pub const ARTICLE: &str = "article.txt";
    pub const SUMMARY: &str = "summary.txt";
    pub const SUMMARY_LABELS: &str = "summary_labels.txt";
    pub const TRANSLATED: &str = "translated.txt";
    pub const TIMELINE: &str = "timeline.txt";
    pub const ANIMATION: &str = "animation.txt";
    pub const MANIFEST: &str = "manifest.json";

    pub const ALL_OUTPUTS: [&str; 6] = [
        ARTICLE,
        SUMMARY,
        SUMMARY_LABELS,
        TRANSLATED,
        TIMELINE,
        ANIMATION,
    ];
}

/// Parse a `w1,w2,...` hidden-width list.
pub fn parse_widths(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad hidden width {w:?}"))
        })
        .collect()
}
