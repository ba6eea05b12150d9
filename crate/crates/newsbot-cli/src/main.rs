//! `newsbot` — table-to-news pipeline driver.
//!
//! `newsbot run --config <toml>` executes the full pipeline into a run
//! directory; the stage subcommands (`generate`, `summarize`, `translate`,
//! `phonemize`, `animate`) run one step each with explicit file I/O and
//! compose to the identical bundle. `train-lipsync` and `grad-check` manage
//! the lip-sync model. Exit codes: 0 success, 2 validation/usage error,
//! 3 stage failure.

use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use newsbot_cli::config::{self, Overrides, SummaryRule};
use newsbot_cli::error::CliError;
use newsbot_cli::pipeline::run_pipeline;
use newsbot_cli::stages;
use newsbot_core::event_model::{normalize_facts, parse_events, parse_history};
use newsbot_core::lipsync::{
    grad_check, mean_squared_error, parse_dataset, parse_model, train, write_dataset, write_model,
    FrameWindowing, MlpParameters, SyntheticTask, TrainingConfig,
};
use newsbot_core::news_gen::NewsConfig;
use newsbot_core::phoneme_timeline::{parse_timeline, Lang, Lexicon, UnknownTokenPolicy};
use newsbot_core::summarizer::ImportanceTable;
use newsbot_core::template_dsl::TemplateBank;
use newsbot_core::translator::{DictionaryBackend, Glossary, IdentityBackend};

#[derive(Parser)]
#[command(
    name = "newsbot",
    version,
    about = "Structured match events in; article, summary, translation, phoneme timeline and lip-sync animation out."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a config file into a run directory.
    Run(RunArgs),
    /// Generate the article from an event table.
    Generate(GenerateArgs),
    /// Condense an article into a summary (+ labels sidecar).
    Summarize(SummarizeArgs),
    /// Translate an article/summary with glossary entity masking.
    Translate(TranslateArgs),
    /// Convert text to a phoneme timeline via a lexicon.
    Phonemize(PhonemizeArgs),
    /// Predict per-frame blendshape weights from a timeline.
    Animate(AnimateArgs),
    /// Train the lip-sync network (synthetic task or dataset file).
    TrainLipsync(TrainArgs),
    /// Verify backpropagation against finite differences.
    GradCheck(GradCheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config frame rate.
    #[arg(long)]
    fps: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the run id.
    #[arg(long)]
    run_id: Option<String>,
    /// Override what gets translated: summary | article.
    #[arg(long)]
    translate_scope: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    templates: PathBuf,
    #[arg(long)]
    home: String,
    #[arg(long)]
    away: String,
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Comma-separated categories that get in-match sentences.
    #[arg(long)]
    include_categories: Option<String>,
    #[arg(long, default_value_t = 3)]
    blowout_threshold: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    article: PathBuf,
    /// Event table; required for --budget (soccer) mode.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Keep the N most important in-match sentences plus the post-match
    /// wrap-up (soccer commentary-to-summary).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), group = "rule")]
    budget: Option<u64>,
    /// Keep the K best-scoring sentences (generic extractive labeling).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), group = "rule", required_unless_present = "budget")]
    top_k: Option<u64>,
    /// Comma-separated keywords for the generic scorer.
    #[arg(long)]
    keywords: Option<String>,
    /// `category=weight` importance overrides, comma-separated.
    #[arg(long)]
    importance: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Labels sidecar path (default: the output path with a `_labels` suffix).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    glossary: PathBuf,
    /// Phrase-table file; omit to use the identity backend.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    #[arg(long)]
    src: String,
    #[arg(long)]
    tgt: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PhonemizeArgs {
    /// Sentence-record file (or plain text with --plain-text).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Language tag: zh | en | ja.
    #[arg(long)]
    language: String,
    #[arg(long, default_value_t = 0.08)]
    default_duration: f64,
    /// Unknown-token policy: error | skip.
    #[arg(long, default_value = "error")]
    unknown: String,
    /// Treat the input as raw text rather than sentence records.
    #[arg(long)]
    plain_text: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnimateArgs {
    #[arg(long)]
    timeline: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 25.0)]
    fps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Train from a dataset file instead of the synthetic task.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Synthetic task: inventory size (silence + N-1 phonemes).
    #[arg(long, default_value_t = 8)]
    phonemes: usize,
    /// Derive the inventory size from a lexicon file instead.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Lexicon language for --lexicon (zh | en | ja).
    #[arg(long, default_value = "en")]
    language: String,
    /// Synthetic samples to generate.
    #[arg(long, default_value_t = 4096)]
    examples: usize,
    /// Synthetic target noise amplitude.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Comma-separated hidden-layer widths.
    #[arg(long, default_value = "128,128,128")]
    hidden: String,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    /// Base seed; weight init, data generation and training derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional loss-trace output (one loss per step).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Optional path to save the generated synthetic dataset.
    #[arg(long)]
    save_dataset: Option<PathBuf>,
}

#[derive(Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 4)]
    phonemes: usize,
    #[arg(long, default_value = "8,8,8")]
    hidden: String,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("newsbot: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Phonemize(args) => cmd_phonemize(args),
        Command::Animate(args) => cmd_animate(args),
        Command::TrainLipsync(args) => cmd_train(args),
        Command::GradCheck(args) => cmd_grad_check(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: args.seed,
        fps: args.fps,
        out_dir: args.out_dir,
        run_id: args.run_id,
        translate_scope: args.translate_scope,
    };
    let config = config::load_config(&args.config, &overrides).map_err(CliError::validation)?;
    let outcome = run_pipeline(&config)?;
    println!(
        "run {} complete: {}",
        outcome.manifest.run_id,
        outcome.run_dir.display()
    );
    for stage in &outcome.manifest.stages {
        println!(
            "  {} -> {} ({} ms)",
            stage.name, stage.output, stage.duration_ms
        );
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let load = || -> Result<_> {
        let events = parse_events(&config::read_to_string(&args.events)?)
            .with_context(|| format!("cannot parse events {}", args.events.display()))?;
        let history = match &args.history {
            Some(path) => parse_history(&config::read_to_string(path)?)
                .with_context(|| format!("cannot parse history {}", path.display()))?,
            None => Vec::new(),
        };
        let facts = normalize_facts(&events, &args.home, &args.away, history)
            .context("cannot normalize match facts")?;
        let bank_text = config::read_to_string(&args.templates)?;
        let bank = TemplateBank::parse(&bank_text, &args.templates.display().to_string())
            .with_context(|| format!("cannot parse template bank {}", args.templates.display()))?;
        let included = match &args.include_categories {
            Some(spec) => config::parse_categories(
                &spec
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .collect::<Vec<_>>(),
            )?,
            None => NewsConfig::default().included_categories,
        };
        Ok((events, facts, bank, included))
    };
    let (events, facts, bank, included) = load().map_err(CliError::validation)?;
    let news_config = NewsConfig {
        included_categories: included,
        blowout_threshold: args.blowout_threshold,
    };
    let article =
        stages::stage_generate(&events, &facts, &bank, args.seed, &news_config, &args.out)
            .map_err(|e| CliError::stage("generate", e))?;
    println!(
        "generated {} sentences -> {}",
        article.sentences.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_importance_spec(spec: &str) -> Result<ImportanceTable> {
    let mut overrides = std::collections::BTreeMap::new();
    for pair in spec.split(',') {
        let (name, weight) = pair.split_once('=').ok_or_else(|| {
            anyhow!("bad importance override {pair:?} (expected category=weight)")
        })?;
        overrides.insert(
            name.trim().to_string(),
            weight
                .trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad weight in {pair:?}"))?,
        );
    }
    config::importance_table(&overrides)
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), CliError> {
    let load = || -> Result<_> {
        let article = stages::load_article(&args.article)?;
        let rule = if let Some(budget) = args.budget {
            if args.events.is_none() {
                return Err(anyhow!("--budget needs --events to rank sentences"));
            }
            SummaryRule::Budget(budget as usize)
        } else {
            let keywords = args
                .keywords
                .as_deref()
                .map(|s| s.split(',').map(|k| k.trim().to_string()).collect())
                .unwrap_or_default();
            SummaryRule::TopK {
                k: args.top_k.expect("clap enforces budget xor top-k") as usize,
                keywords,
            }
        };
        let events = match &args.events {
            Some(path) => parse_events(&config::read_to_string(path)?)
                .with_context(|| format!("cannot parse events {}", path.display()))?,
            None => Vec::new(),
        };
        let importance = match &args.importance {
            Some(spec) => parse_importance_spec(spec)?,
            None => ImportanceTable::default(),
        };
        Ok((article, rule, events, importance))
    };
    let (article, rule, events, importance) = load().map_err(CliError::validation)?;
    let labels_path = args.labels.clone().unwrap_or_else(|| {
        let mut name = args.out.file_stem().unwrap_or_default().to_os_string();
        name.push("_labels.txt");
        args.out.with_file_name(name)
    });
    let summary = stages::stage_summarize(
        &article,
        &events,
        &rule,
        &importance,
        &args.out,
        &labels_path,
    )
    .map_err(|e| CliError::stage("summarize", e))?;
    println!(
        "kept {} of {} sentences -> {}",
        summary.sentences.len(),
        article.sentences.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_translate(args: TranslateArgs) -> Result<(), CliError> {
    let load = || -> Result<_> {
        let article = stages::load_article(&args.input)?;
        let glossary = Glossary::parse(&config::read_to_string(&args.glossary)?)
            .with_context(|| format!("cannot parse glossary {}", args.glossary.display()))?;
        let dictionary = match &args.dictionary {
            Some(path) => Some(
                DictionaryBackend::parse(&config::read_to_string(path)?)
                    .with_context(|| format!("cannot parse dictionary {}", path.display()))?,
            ),
            None => None,
        };
        Ok((article, glossary, dictionary))
    };
    let (article, glossary, dictionary) = load().map_err(CliError::validation)?;
    let translated = match &dictionary {
        Some(backend) => stages::stage_translate(
            &article, &glossary, backend, &args.src, &args.tgt, &args.out,
        ),
        None => stages::stage_translate(
            &article,
            &glossary,
            &IdentityBackend,
            &args.src,
            &args.tgt,
            &args.out,
        ),
    }
    .map_err(|e| CliError::stage("translate", e))?;
    println!(
        "translated {} sentences -> {}",
        translated.sentences.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_phonemize(args: PhonemizeArgs) -> Result<(), CliError> {
    let load = || -> Result<_> {
        let language = Lang::parse(&args.language)
            .ok_or_else(|| anyhow!("unsupported language {:?}", args.language))?;
        let lexicon = Lexicon::parse(&config::read_to_string(&args.lexicon)?, language)
            .with_context(|| format!("cannot parse lexicon {}", args.lexicon.display()))?;
        let policy = UnknownTokenPolicy::parse(&args.unknown)
            .ok_or_else(|| anyhow!("--unknown must be 'error' or 'skip'"))?;
        let article = if args.plain_text {
            newsbot_core::news_gen::Article {
                sentences: vec![newsbot_core::news_gen::Sentence {
                    text: config::read_to_string(&args.input)?
                        .split_whitespace()
                        .collect::<Vec<_>>()
                        .join(" "),
                    section: newsbot_core::news_gen::Section::InMatch,
                    source_event_index: Some(0),
                }],
            }
        } else {
            stages::load_article(&args.input)?
        };
        Ok((article, lexicon, policy))
    };
    let (article, lexicon, policy) = load().map_err(CliError::validation)?;
    let timeline =
        stages::stage_phonemize(&article, &lexicon, args.default_duration, policy, &args.out)
            .map_err(|e| CliError::stage("phonemize", e))?;
    println!(
        "{} segments, {:.3} s total -> {}",
        timeline.segments.len(),
        timeline.total_duration(),
        args.out.display()
    );
    Ok(())
}

fn cmd_animate(args: AnimateArgs) -> Result<(), CliError> {
    let load = || -> Result<_> {
        let timeline = parse_timeline(&config::read_to_string(&args.timeline)?)
            .with_context(|| format!("cannot parse timeline {}", args.timeline.display()))?;
        let model = parse_model(&config::read_to_string(&args.model)?)
            .with_context(|| format!("cannot parse model {}", args.model.display()))?;
        Ok((timeline, model))
    };
    let (timeline, model) = load().map_err(CliError::validation)?;
    let animation = stages::stage_animate(&model, &timeline, args.fps, &args.out)
        .map_err(|e| CliError::stage("animate", e))?;
    println!(
        "{} frames at {} fps -> {}",
        animation.frames.len(),
        animation.fps,
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let windowing = FrameWindowing::default();
    let load = || -> Result<_> {
        let hidden = stages::parse_widths(&args.hidden)?;
        let (samples, inventory_size) = match &args.dataset {
            Some(path) => {
                let samples = parse_dataset(&config::read_to_string(path)?)
                    .with_context(|| format!("cannot parse dataset {}", path.display()))?;
                let max_id = samples
                    .iter()
                    .flat_map(|s| s.input_ids.iter())
                    .max()
                    .copied()
                    .ok_or_else(|| anyhow!("dataset {} is empty", path.display()))?;
                (samples, max_id + 1)
            }
            None => {
                let inventory_size = match &args.lexicon {
                    Some(path) => {
                        let language = Lang::parse(&args.language)
                            .ok_or_else(|| anyhow!("unsupported language {:?}", args.language))?;
                        Lexicon::parse(&config::read_to_string(path)?, language)
                            .with_context(|| format!("cannot parse lexicon {}", path.display()))?
                            .inventory()
                            .len()
                    }
                    None => args.phonemes,
                };
                let task = SyntheticTask::new(inventory_size, windowing, args.seed)
                    .map_err(|e| anyhow!(e))?;
                (
                    task.generate(args.examples, args.noise, args.seed + 1),
                    inventory_size,
                )
            }
        };
        Ok((hidden, samples, inventory_size))
    };
    let (hidden, samples, inventory_size) = load().map_err(CliError::validation)?;

    let run = || -> Result<_> {
        let params = MlpParameters::seeded(
            windowing.input_window * inventory_size,
            &hidden,
            windowing,
            args.seed,
        )?;
        let config = TrainingConfig {
            batch_size: args.batch,
            learning_rate: args.lr,
            steps: args.steps,
            dropout_p: args.dropout,
            bn_momentum: args.momentum,
            rng_seed: args.seed + 2,
        };
        let outcome = train(params, &samples, &config)?;
        let mse = mean_squared_error(&outcome.params, &samples)?;
        stages::write_file(&args.out, &write_model(&outcome.params))?;
        if let Some(trace_path) = &args.trace {
            let trace: String = outcome
                .loss_trace
                .iter()
                .map(|l| format!("{l}\n"))
                .collect();
            stages::write_file(trace_path, &trace)?;
        }
        if let Some(dataset_path) = &args.save_dataset {
            stages::write_file(dataset_path, &write_dataset(&samples))?;
        }
        Ok((outcome, mse))
    };
    let (outcome, mse) = run().map_err(|e| CliError::stage("train-lipsync", e))?;
    println!(
        "trained {} steps on {} samples (inventory {}): first loss {:.4}, last loss {:.4}, train MSE {:.6} -> {}",
        outcome.loss_trace.len(),
        samples.len(),
        inventory_size,
        outcome.loss_trace.first().copied().unwrap_or(f64::NAN),
        outcome.loss_trace.last().copied().unwrap_or(f64::NAN),
        mse,
        args.out.display()
    );
    Ok(())
}

fn cmd_grad_check(args: GradCheckArgs) -> Result<(), CliError> {
    let windowing = FrameWindowing::default();
    let run = || -> Result<f64> {
        let hidden = stages::parse_widths(&args.hidden)?;
        let params = MlpParameters::seeded(
            windowing.input_window * args.phonemes,
            &hidden,
            windowing,
            args.seed,
        )?;
        // Fully random windows keep every batch-norm feature's variance
        // healthy, which the finite-difference side needs.
        let mut rng = newsbot_core::rng::SplitMix64::new(args.seed + 1);
        let samples: Vec<newsbot_core::lipsync::DatasetSample> = (0..args.samples.max(2))
            .map(|_| newsbot_core::lipsync::DatasetSample {
                input_ids: (0..windowing.input_window)
                    .map(|_| rng.next_bounded(args.phonemes as u64) as usize)
                    .collect(),
                target: (0..windowing.output_dim())
                    .map(|_| rng.next_f64())
                    .collect(),
            })
            .collect();
        Ok(grad_check(&params, &samples, args.epsilon)?)
    };
    let worst = run().map_err(|e| CliError::stage("grad-check", e))?;
    println!("max relative gradient error: {worst:e}");
    if worst < args.threshold {
        Ok(())
    } else {
        Err(CliError::stage(
            "grad-check",
            anyhow!(
                "max relative error {worst:e} exceeds threshold {:e}",
                args.threshold
            ),
        ))
    }
}
