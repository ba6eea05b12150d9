//! Pipeline configuration: a TOML file with scalar settings and input paths,
//! optionally overridden by CLI flags (flags win). Loading a config validates
//! everything up front — every referenced file must exist and parse — so a
//! bad config fails before any stage runs.
//!
//! Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use newsbot_core::event_model::{
    normalize_facts, parse_events, parse_history, CategoryKind, EventRecord, HistoryRecord,
    MatchFacts,
};
use newsbot_core::lipsync::MlpParameters;
use newsbot_core::news_gen::NewsConfig;
use newsbot_core::phoneme_timeline::{Lang, Lexicon, UnknownTokenPolicy};
use newsbot_core::summarizer::ImportanceTable;
use newsbot_core::template_dsl::TemplateBank;
use newsbot_core::translator::{DictionaryBackend, Glossary};

/// Raw config file shape.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub run_id: String,
    pub seed: u64,
    pub src_lang: String,
    pub tgt_lang: String,
    pub home_team: String,
    pub away_team: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_blowout")]
    pub blowout_threshold: u32,
    #[serde(default = "default_scope")]
    pub translate_scope: String,
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_duration")]
    pub default_phoneme_duration_s: f64,
    #[serde(default = "default_policy")]
    pub unknown_token_policy: String,
    pub include_categories: Option<Vec<String>>,
    pub paths: PathsSection,
    pub summary: SummarySection,
    #[serde(default)]
    pub importance: BTreeMap<String, f64>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_fps() -> f64 {
    25.0
}
fn default_blowout() -> u32 {
    3
}
fn default_scope() -> String {
    "summary".to_string()
}
fn default_backend() -> String {
    "identity".to_string()
}
fn default_duration() -> f64 {
    0.08
}
fn default_policy() -> String {
    "error".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub events: PathBuf,
    pub templates: PathBuf,
    pub glossary: PathBuf,
    pub lexicon: PathBuf,
    pub model: PathBuf,
    pub dictionary: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarySection {
    /// `budget` (soccer commentary-to-summary) or `topk` (generic labeling).
    pub mode: String,
    pub value: usize,
    /// Keywords for the generic scorer; ignored in budget mode.
    pub keywords: Option<Vec<String>>,
}

/// CLI flag overrides; every field beats the config file when present.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub fps: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub run_id: Option<String>,
    pub translate_scope: Option<String>,
}

/// Whether translation consumes the summary or the full article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslateScope {
    Summary,
    Article,
}

/// Summary selection rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SummaryRule {
    Budget(usize),
    TopK { k: usize, keywords: Vec<String> },
}

/// The scalar settings that define a run; hashed into the manifest so a
/// bundle records exactly what produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub run_id: String,
    pub seed: u64,
    pub fps: f64,
    pub src_lang: String,
    pub tgt_lang: String,
    pub home_team: String,
    pub away_team: String,
    pub blowout_threshold: u32,
    pub translate_scope: TranslateScope,
    pub backend: String,
    pub default_phoneme_duration_s: f64,
    pub unknown_token_policy: String,
    pub include_categories: Vec<String>,
    pub summary: SummaryRule,
    pub importance_overrides: BTreeMap<String, f64>,
    pub input_paths: Vec<String>,
}

/// Translation backend choice with its loaded data.
pub enum Backend {
    Identity,
    Dictionary(DictionaryBackend),
}

impl Backend {
    pub fn as_trait(&self) -> &dyn newsbot_core::translator::TranslationBackend {
        match self {
            Backend::Identity => &newsbot_core::translator::IdentityBackend,
            Backend::Dictionary(d) => d,
        }
    }
}

/// A fully validated run configuration with every input parsed and loaded.
pub struct ResolvedConfig {
    pub settings: Settings,
    /// Directory the config file lives in; relative input paths resolve
    /// against it.
    pub config_base: PathBuf,
    pub out_dir: PathBuf,
    pub events_path: PathBuf,
    pub events: Vec<EventRecord>,
    pub history: Vec<HistoryRecord>,
    pub facts: MatchFacts,
    pub bank: TemplateBank,
    pub glossary: Glossary,
    pub backend: Backend,
    pub lexicon: Lexicon,
    pub model: MlpParameters,
    pub news_config: NewsConfig,
    pub importance: ImportanceTable,
    pub summary_rule: SummaryRule,
    pub target_language: Lang,
    pub unknown_token_policy: UnknownTokenPolicy,
}

impl ResolvedConfig {
    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(&self.settings.run_id)
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parse the importance override table.
pub fn importance_table(overrides: &BTreeMap<String, f64>) -> Result<ImportanceTable> {
    let mut table = ImportanceTable::default();
    for (name, &weight) in overrides {
        let kind = CategoryKind::parse(name)
            .ok_or_else(|| anyhow!("unknown event category {name:?} in [importance]"))?;
        table
            .set(kind, weight)
            .map_err(|e| anyhow!("importance override {name}: {e}"))?;
    }
    Ok(table)
}

/// Parse included category names.
pub fn parse_categories(names: &[String]) -> Result<Vec<CategoryKind>> {
    names
        .iter()
        .map(|name| {
            CategoryKind::parse(name)
                .ok_or_else(|| anyhow!("unknown event category {name:?} in include_categories"))
        })
        .collect()
}

/// Load, override, resolve and validate a config file.
pub fn load_config(config_path: &Path, overrides: &Overrides) -> Result<ResolvedConfig> {
    let text = read_to_string(config_path)?;
    let mut file: ConfigFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", config_path.display()))?;

    if let Some(seed) = overrides.seed {
        file.seed = seed;
    }
    if let Some(fps) = overrides.fps {
        file.fps = fps;
    }
    if let Some(out_dir) = &overrides.out_dir {
        file.out_dir = out_dir.clone();
    }
    if let Some(run_id) = &overrides.run_id {
        file.run_id = run_id.clone();
    }
    if let Some(scope) = &overrides.translate_scope {
        file.translate_scope = scope.clone();
    }

    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &Path| -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    if !file.fps.is_finite() || file.fps <= 0.0 {
        return Err(anyhow!("fps must be positive and finite, got {}", file.fps));
    }
    if file.run_id.is_empty() || file.run_id.contains(['/', '\\']) {
        return Err(anyhow!("run_id must be a non-empty plain directory name"));
    }
    if !file.default_phoneme_duration_s.is_finite() || file.default_phoneme_duration_s <= 0.0 {
        return Err(anyhow!(
            "default_phoneme_duration_s must be positive, got {}",
            file.default_phoneme_duration_s
        ));
    }
    let translate_scope = match file.translate_scope.as_str() {
        "summary" => TranslateScope::Summary,
        "article" => TranslateScope::Article,
        other => {
            return Err(anyhow!(
                "translate_scope must be 'summary' or 'article', got {other:?}"
            ))
        }
    };
    let target_language = Lang::parse(&file.tgt_lang)
        .ok_or_else(|| anyhow!("unsupported target language {:?}", file.tgt_lang))?;
    let unknown_token_policy =
        UnknownTokenPolicy::parse(&file.unknown_token_policy).ok_or_else(|| {
            anyhow!(
                "unknown_token_policy must be 'error' or 'skip', got {:?}",
                file.unknown_token_policy
            )
        })?;

    let summary_rule = match file.summary.mode.as_str() {
        "budget" => {
            if file.summary.value == 0 {
                return Err(anyhow!("summary budget must be at least 1"));
            }
            SummaryRule::Budget(file.summary.value)
        }
        "topk" => {
            if file.summary.value == 0 {
                return Err(anyhow!("summary top-k must be at least 1"));
            }
            SummaryRule::TopK {
                k: file.summary.value,
                keywords: file.summary.keywords.clone().unwrap_or_default(),
            }
        }
        other => {
            return Err(anyhow!(
                "summary.mode must be 'budget' or 'topk', got {other:?}"
            ))
        }
    };

    let include_names = file.include_categories.clone().unwrap_or_else(|| {
        NewsConfig::default()
            .included_categories
            .iter()
            .map(|k| k.name().to_string())
            .collect()
    });
    let news_config = NewsConfig {
        included_categories: parse_categories(&include_names)?,
        blowout_threshold: file.blowout_threshold,
    };
    let importance = importance_table(&file.importance)?;

    // Load and parse every referenced file.
    let events_path = resolve(&file.paths.events);
    let events = parse_events(&read_to_string(&events_path)?)
        .with_context(|| format!("cannot parse events {}", events_path.display()))?;
    let history = match &file.paths.history {
        Some(p) => {
            let path = resolve(p);
            parse_history(&read_to_string(&path)?)
                .with_context(|| format!("cannot parse history {}", path.display()))?
        }
        None => Vec::new(),
    };
    let facts = normalize_facts(&events, &file.home_team, &file.away_team, history.clone())
        .context("cannot normalize match facts")?;

    let templates_path = resolve(&file.paths.templates);
    let bank = TemplateBank::parse(
        &read_to_string(&templates_path)?,
        &templates_path.display().to_string(),
    )
    .with_context(|| format!("cannot parse template bank {}", templates_path.display()))?;

    let glossary_path = resolve(&file.paths.glossary);
    let glossary = Glossary::parse(&read_to_string(&glossary_path)?)
        .with_context(|| format!("cannot parse glossary {}", glossary_path.display()))?;

    let backend = match file.backend.as_str() {
        "identity" => Backend::Identity,
        "dictionary" => {
            let dict_path = file
                .paths
                .dictionary
                .as_ref()
                .ok_or_else(|| anyhow!("backend 'dictionary' needs paths.dictionary"))?;
            let path = resolve(dict_path);
            Backend::Dictionary(
                DictionaryBackend::parse(&read_to_string(&path)?)
                    .with_context(|| format!("cannot parse dictionary {}", path.display()))?,
            )
        }
        other => {
            return Err(anyhow!(
                "backend must be 'identity' or 'dictionary', got {other:?}"
            ))
        }
    };

    let lexicon_path = resolve(&file.paths.lexicon);
    let lexicon = Lexicon::parse(&read_to_string(&lexicon_path)?, target_language)
        .with_context(|| format!("cannot parse lexicon {}", lexicon_path.display()))?;

    let model_path = resolve(&file.paths.model);
    let model = newsbot_core::lipsync::parse_model(&read_to_string(&model_path)?)
        .with_context(|| format!("cannot parse model {}", model_path.display()))?;

    let mut input_paths: Vec<String> = vec![
        file.paths.events.display().to_string(),
        file.paths.templates.display().to_string(),
        file.paths.glossary.display().to_string(),
        file.paths.lexicon.display().to_string(),
        file.paths.model.display().to_string(),
    ];
    if let Some(p) = &file.paths.dictionary {
        input_paths.push(p.display().to_string());
    }
    if let Some(p) = &file.paths.history {
        input_paths.push(p.display().to_string());
    }

    let settings = Settings {
        run_id: file.run_id,
        seed: file.seed,
        fps: file.fps,
        src_lang: file.src_lang,
        tgt_lang: file.tgt_lang,
        home_team: file.home_team,
        away_team: file.away_team,
        blowout_threshold: file.blowout_threshold,
        translate_scope,
        backend: file.backend,
        default_phoneme_duration_s: file.default_phoneme_duration_s,
        unknown_token_policy: file.unknown_token_policy,
        include_categories: include_names,
        summary: summary_rule.clone(),
        importance_overrides: file.importance,
        input_paths,
    };

    Ok(ResolvedConfig {
        settings,
        config_base: base.to_path_buf(),
        out_dir: resolve(&file.out_dir),
        events_path,
        events,
        history,
        facts,
        bank,
        glossary,
        backend,
        lexicon,
        model,
        news_config,
        importance,
        summary_rule,
        target_language,
        unknown_token_policy,
    })
}
