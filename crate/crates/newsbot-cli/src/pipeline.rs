//! Full pipeline orchestration: generate → summarize → translate → phonemize
//! → animate, each stage persisted into the run directory, everything
//! recorded in a manifest. Identical config + inputs ⇒ byte-identical
//! artifacts (manifest timings aside).

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;

use crate::config::{ResolvedConfig, TranslateScope};
use crate::error::CliError;
use crate::manifest::{config_hash, hash_file, sha256_hex, InputRecord, Manifest, StageRecord};
use crate::stages::{self, artifact};

/// Everything a finished run leaves behind.
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub manifest: Manifest,
}

/// Execute all stages. A stage failure halts the run, keeping the artifacts
/// written so far; validation problems surface before any stage runs
/// (config loading already parsed every input).
pub fn run_pipeline(config: &ResolvedConfig) -> Result<RunOutcome, CliError> {
    let run_dir = config.run_dir();
    std::fs::create_dir_all(&run_dir)
        .map_err(|e| CliError::validation(anyhow::anyhow!("cannot create run dir: {e}")))?;

    let mut inputs = Vec::new();
    for path in &config.settings.input_paths {
        // Input paths were resolved and read during config loading; hash the
        // same resolved locations for provenance.
        let resolved = config.resolve_input(path);
        inputs.push(InputRecord {
            path: path.clone(),
            sha256: hash_file(&resolved).map_err(CliError::validation)?,
        });
    }

    let mut stages_log: Vec<StageRecord> = Vec::new();
    let mut record = |name: &str, output: &str, contents_hash: String, started: Instant| {
        stages_log.push(StageRecord {
            name: name.to_string(),
            output: output.to_string(),
            sha256: contents_hash,
            duration_ms: started.elapsed().as_millis() as u64,
        });
    };

    let stage_err = |stage: &'static str| move |e: anyhow::Error| CliError::stage(stage, e);

    // generate
    let started = Instant::now();
    let article_path = run_dir.join(artifact::ARTICLE);
    let article = stages::stage_generate(
        &config.events,
        &config.facts,
        &config.bank,
        config.settings.seed,
        &config.news_config,
        &article_path,
    )
    .map_err(stage_err("generate"))?;
    record(
        "generate",
        artifact::ARTICLE,
        hash_file(&article_path).map_err(stage_err("generate"))?,
        started,
    );

    // summarize
    let started = Instant::now();
    let summary_path = run_dir.join(artifact::SUMMARY);
    let labels_path = run_dir.join(artifact::SUMMARY_LABELS);
    let summary = stages::stage_summarize(
        &article,
        &config.events,
        &config.summary_rule,
        &config.importance,
        &summary_path,
        &labels_path,
    )
    .map_err(stage_err("summarize"))?;
    record(
        "summarize",
        artifact::SUMMARY,
        hash_file(&summary_path).map_err(stage_err("summarize"))?,
        started,
    );

    // translate
    let started = Instant::now();
    let translate_input = match config.settings.translate_scope {
        TranslateScope::Summary => &summary,
        TranslateScope::Article => &article,
    };
    let translated_path = run_dir.join(artifact::TRANSLATED);
    let translated = stages::stage_translate(
        translate_input,
        &config.glossary,
        config.backend.as_trait(),
        &config.settings.src_lang,
        &config.settings.tgt_lang,
        &translated_path,
    )
    .map_err(stage_err("translate"))?;
    record(
        "translate",
        artifact::TRANSLATED,
        hash_file(&translated_path).map_err(stage_err("translate"))?,
        started,
    );

    // phonemize
    let started = Instant::now();
    let timeline_path = run_dir.join(artifact::TIMELINE);
    let timeline = stages::stage_phonemize(
        &translated,
        &config.lexicon,
        config.settings.default_phoneme_duration_s,
        config.unknown_token_policy,
        &timeline_path,
    )
    .map_err(stage_err("phonemize"))?;
    record(
        "phonemize",
        artifact::TIMELINE,
        hash_file(&timeline_path).map_err(stage_err("phonemize"))?,
        started,
    );

    // animate
    let started = Instant::now();
    let animation_path = run_dir.join(artifact::ANIMATION);
    stages::stage_animate(
        &config.model,
        &timeline,
        config.settings.fps,
        &animation_path,
    )
    .map_err(stage_err("animate"))?;
    record(
        "animate",
        artifact::ANIMATION,
        hash_file(&animation_path).map_err(stage_err("animate"))?,
        started,
    );

    let manifest = Manifest {
        run_id: config.settings.run_id.clone(),
        seed: config.settings.seed,
        config_hash: config_hash(&config.settings).map_err(CliError::validation)?,
        inputs,
        stages: stages_log,
    };
    let manifest_json = manifest.to_json().map_err(CliError::validation)?;
    stages::write_file(&run_dir.join(artifact::MANIFEST), &manifest_json)
        .map_err(CliError::validation)?;

    Ok(RunOutcome { run_dir, manifest })
}

impl ResolvedConfig {
    /// Re-resolve a recorded input path the same way config loading did.
    fn resolve_input(&self, recorded: &str) -> PathBuf {
        let path = PathBuf::from(recorded);
        if path.is_absolute() {
            path
        } else {
            self.config_base.join(path)
        }
    }
}

/// Hash helper re-exported for tests comparing bundles.
pub fn file_hash_hex(path: &std::path::Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
