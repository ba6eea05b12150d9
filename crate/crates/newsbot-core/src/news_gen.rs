//! Sentence-generation strategies and article assembly.
//!
//! Three strategies fill an article in order: pre-match sentences rendered
//! from historical results, in-match sentences rendered per qualifying event,
//! and a post-match wrap-up rendered from the normalized facts.
//!
//! Template bank keys used by the generators:
//!
//! * `prematch` — rendered once per history record with `prior.*` bindings
//! * `prematch_empty` — optional fallback when there is no history
//! * `score`, `yellow_card`, `red_card`, `foul`, `substitution`, ... — one
//!   key per event category (an unmapped category falls back to `other`)
//! * `postmatch` — rendered once from the match facts
//!
//! Article files are line-oriented: `section TAB event-index TAB text`, with
//! `pre` / `in` / `post` section tags and `-` for sentences with no source
//! event. The summarizer reads and writes the same format.

use thiserror::Error;

use crate::event_model::{CategoryKind, EventRecord, HistoryRecord, MatchFacts};
use crate::rng::SplitMix64;
use crate::template_dsl::{render, RenderContext, TemplateBank, TemplateError};

/// Article section, in mandatory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    PreMatch,
    InMatch,
    PostMatch,
}

impl Section {
    pub fn tag(self) -> &'static str {
        match self {
            Section::PreMatch => "pre",
            Section::InMatch => "in",
            Section::PostMatch => "post",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "pre" => Some(Section::PreMatch),
            "in" => Some(Section::InMatch),
            "post" => Some(Section::PostMatch),
            _ => None,
        }
    }
}

/// One generated sentence with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub section: Section,
    /// Index into the event list for in-match sentences.
    pub source_event_index: Option<usize>,
}

/// Ordered sentences; sections always appear as `pre* in* post*`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Article {
    pub sentences: Vec<Sentence>,
}

impl Article {
    /// Check the section-order and event-link invariants.
    pub fn validate(&self, event_count: usize) -> Result<(), NewsGenError> {
        let mut last = Section::PreMatch;
        for (i, sentence) in self.sentences.iter().enumerate() {
            if sentence.section < last {
                return Err(NewsGenError::SectionOrder { index: i });
            }
            last = sentence.section;
            if sentence.section == Section::InMatch {
                match sentence.source_event_index {
                    Some(e) if e < event_count => {}
                    _ => return Err(NewsGenError::BadEventLink { index: i }),
                }
            }
        }
        Ok(())
    }
}

/// Generation tuning; `Default` matches the shipped behaviour.
#[derive(Debug, Clone)]
pub struct NewsConfig {
    /// Event categories that get an in-match sentence.
    pub included_categories: Vec<CategoryKind>,
    /// `score_diff >= blowout_threshold` sets the `blowout` binding.
    pub blowout_threshold: u32,
}

impl Default for NewsConfig {
    fn default() -> Self {
        Self {
            included_categories: vec![
                CategoryKind::Score,
                CategoryKind::YellowCard,
                CategoryKind::RedCard,
                CategoryKind::Substitution,
            ],
            blowout_threshold: 3,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NewsGenError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("sentence {index}: sections must appear in pre/in/post order")]
    SectionOrder { index: usize },
    #[error("sentence {index}: in-match sentence needs a valid source event index")]
    BadEventLink { index: usize },
    #[error("article line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("sentence text must not contain tabs or newlines: {text:?}")]
    UnwritableSentence { text: String },
}

/// Facts bindings shared by the pre- and post-match strategies. `winner`,
/// `loser` and `winning_score` are bound only when the match has a winner;
/// draw templates branch on `is_draw` instead.
fn facts_context(facts: &MatchFacts, config: &NewsConfig, seed: u64) -> RenderContext {
    let mut ctx = RenderContext::new(seed);
    ctx.insert("home", facts.home_team.as_str());
    ctx.insert("away", facts.away_team.as_str());
    ctx.insert("home_goals", facts.home_goals as i64);
    ctx.insert("away_goals", facts.away_goals as i64);
    ctx.insert("score_diff", facts.score_diff as i64);
    ctx.insert("is_draw", facts.winning_team.is_none());
    ctx.insert("blowout", facts.score_diff >= config.blowout_threshold);
    if let Some(winner) = &facts.winning_team {
        ctx.insert("winner", winner.as_str());
    }
    if let Some(loser) = &facts.losing_team {
        ctx.insert("loser", loser.as_str());
    }
    if let Some(score) = &facts.winning_score {
        ctx.insert("winning_score", score.as_str());
    }
    ctx
}

fn history_context(
    facts: &MatchFacts,
    config: &NewsConfig,
    record: &HistoryRecord,
    seed: u64,
) -> RenderContext {
    let mut ctx = facts_context(facts, config, seed);
    ctx.insert("prior.home", record.home_team.as_str());
    ctx.insert("prior.away", record.away_team.as_str());
    ctx.insert("prior.home_goals", record.home_goals as i64);
    ctx.insert("prior.away_goals", record.away_goals as i64);
    ctx.insert("prior.score", record.score_text());
    ctx.insert("prior.date", record.date.as_str());
    ctx
}

fn event_context(event: &EventRecord, seed: u64) -> RenderContext {
    let mut ctx = RenderContext::new(seed);
    ctx.insert("minute", event.time_minute as i64);
    ctx.insert("team", event.team.as_str());
    ctx.insert("player", event.player.as_str());
    for (key, value) in &event.attributes {
        ctx.insert(&format!("attr.{key}"), value.as_str());
    }
    ctx
}

/// Pre-match analysis: one sentence per history record. With no history, the
/// optional `prematch_empty` key supplies a single fallback sentence.
pub fn generate_prematch(
    facts: &MatchFacts,
    bank: &TemplateBank,
    rng: &mut SplitMix64,
    config: &NewsConfig,
) -> Result<Vec<Sentence>, NewsGenError> {
    let mut sentences = Vec::new();
    if facts.history.is_empty() {
        if bank.contains_key("prematch_empty") {
            let template = bank.select("prematch_empty", rng)?;
            let ctx = facts_context(facts, config, rng_peek(rng));
            sentences.push(Sentence {
                text: render(template, &ctx)?,
                section: Section::PreMatch,
                source_event_index: None,
            });
        }
        return Ok(sentences);
    }
    for record in &facts.history {
        let template = bank.select("prematch", rng)?;
        let ctx = history_context(facts, config, record, rng_peek(rng));
        sentences.push(Sentence {
            text: render(template, &ctx)?,
            section: Section::PreMatch,
            source_event_index: None,
        });
    }
    Ok(sentences)
}

/// In-match description: one sentence per qualifying event, ordered by match
/// minute (stable for equal minutes). Each sentence links back to its event's
/// index in the *original* list.
pub fn generate_inmatch(
    events: &[EventRecord],
    bank: &TemplateBank,
    rng: &mut SplitMix64,
    config: &NewsConfig,
) -> Result<Vec<Sentence>, NewsGenError> {
    let mut order: Vec<usize> = (0..events.len())
        .filter(|&i| {
            config
                .included_categories
                .contains(&events[i].category.kind())
        })
        .collect();
    order.sort_by_key(|&i| events[i].time_minute);

    let mut sentences = Vec::new();
    for index in order {
        let event = &events[index];
        let key = event.category.bank_key();
        let template = if bank.contains_key(&key) {
            bank.select(&key, rng)?
        } else if bank.contains_key("other") {
            bank.select("other", rng)?
        } else {
            return Err(TemplateError::MissingKey { key }.into());
        };
        let ctx = event_context(event, rng_peek(rng));
        sentences.push(Sentence {
            text: render(template, &ctx)?,
            section: Section::InMatch,
            source_event_index: Some(index),
        });
    }
    Ok(sentences)
}

/// Post-match summary: a single sentence rendered from the facts.
pub fn generate_postmatch(
    facts: &MatchFacts,
    bank: &TemplateBank,
    rng: &mut SplitMix64,
    config: &NewsConfig,
) -> Result<Vec<Sentence>, NewsGenError> {
    let template = bank.select("postmatch", rng)?;
    let ctx = facts_context(facts, config, rng_peek(rng));
    Ok(vec![Sentence {
        text: render(template, &ctx)?,
        section: Section::PostMatch,
        source_event_index: None,
    }])
}

/// Concatenate strategy outputs in pre/in/post order, re-tagging each
/// sentence with its section.
pub fn assemble_article(
    pre: Vec<Sentence>,
    in_match: Vec<Sentence>,
    post: Vec<Sentence>,
) -> Article {
    let mut sentences = Vec::with_capacity(pre.len() + in_match.len() + post.len());
    for (list, section) in [
        (pre, Section::PreMatch),
        (in_match, Section::InMatch),
        (post, Section::PostMatch),
    ] {
        for mut sentence in list {
            sentence.section = section;
            sentences.push(sentence);
        }
    }
    Article { sentences }
}

/// Run all three strategies with a single random stream (pre, then in-match,
/// then post) and assemble the article. Identical seeds give byte-identical
/// articles.
pub fn generate_article(
    events: &[EventRecord],
    facts: &MatchFacts,
    bank: &TemplateBank,
    seed: u64,
    config: &NewsConfig,
) -> Result<Article, NewsGenError> {
    let mut rng = SplitMix64::new(seed);
    let pre = generate_prematch(facts, bank, &mut rng, config)?;
    let in_match = generate_inmatch(events, bank, &mut rng, config)?;
    let post = generate_postmatch(facts, bank, &mut rng, config)?;
    let article = assemble_article(pre, in_match, post);
    article.validate(events.len())?;
    Ok(article)
}

// The seed recorded on a RenderContext is informational (render itself draws
// nothing); expose the stream state without disturbing it.
fn rng_peek(rng: &SplitMix64) -> u64 {
    let mut copy = *rng;
    copy.next_u64()
}

/// Serialize an article to the shared sentence-record format.
pub fn write_article(article: &Article) -> Result<String, NewsGenError> {
    let mut out = String::new();
    for sentence in &article.sentences {
        if sentence.text.contains(['\t', '\n', '\r']) {
            return Err(NewsGenError::UnwritableSentence {
                text: sentence.text.clone(),
            });
        }
        let index = sentence
            .source_event_index
            .map_or_else(|| "-".to_string(), |i| i.to_string());
        out.push_str(sentence.section.tag());
        out.push('\t');
        out.push_str(&index);
        out.push('\t');
        out.push_str(&sentence.text);
        out.push('\n');
    }
    Ok(out)
}

/// Parse the sentence-record format back into an article.
pub fn parse_article(input: &str) -> Result<Article, NewsGenError> {
    let mut sentences = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(tag), Some(index), Some(text)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(NewsGenError::Format {
                line: line_no,
                message: "expected 'section<TAB>event-index<TAB>text'".to_string(),
            });
        };
        let section = Section::from_tag(tag).ok_or_else(|| NewsGenError::Format {
            line: line_no,
            message: format!("unknown section tag {tag:?}"),
        })?;
        let source_event_index = if index == "-" {
            None
        } else {
            Some(index.parse::<usize>().map_err(|_| NewsGenError::Format {
                line: line_no,
                message: format!("bad event index {index:?}"),
            })?)
        };
        sentences.push(Sentence {
            text: text.to_string(),
            section,
            source_event_index,
        });
    }
    Ok(Article { sentences })
}
