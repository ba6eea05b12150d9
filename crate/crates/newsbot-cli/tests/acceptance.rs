//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test -p newsbot-cli --test acceptance --
//! --nocapture` to see them).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use newsbot_core::event_model::{normalize_facts, parse_events};
use newsbot_core::lipsync::{blend_windows, grad_check, mean_squared_error};
use newsbot_core::news_gen::{generate_inmatch, NewsConfig};
use newsbot_core::rng::SplitMix64;
use newsbot_core::template_dsl::{parse_template, render, RenderContext, TemplateBank};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read_fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path:?}: {e}"))
}

fn newsbot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_newsbot"))
}

#[test]
fn criterion_01_table1_reproduction() {
    let started = Instant::now();
    let events = parse_events(&read_fixture("events.csv")).unwrap();
    let zh_bank = TemplateBank::parse(&read_fixture("banks/zh.bank"), "zh").unwrap();
    let en_bank = TemplateBank::parse(&read_fixture("banks/en.bank"), "en").unwrap();
    let config = NewsConfig::default();

    let mut rng = SplitMix64::new(42);
    let zh = generate_inmatch(&events, &zh_bank, &mut rng, &config).unwrap();
    let zh_texts: Vec<&str> = zh.iter().map(|s| s.text.as_str()).collect();
    assert_eq!(
        zh_texts,
        [
            "第23分钟，西班牙人迪达克打入一球。",
            "第35分钟，阿拉维斯穆巴拉克吃到一张黄牌。",
        ]
    );

    let mut rng = SplitMix64::new(7);
    let en = generate_inmatch(&events, &en_bank, &mut rng, &config).unwrap();
    let en_texts: Vec<&str> = en.iter().map(|s| s.text.as_str()).collect();
    assert_eq!(
        en_texts,
        [
            "In the 23rd minute, Espanyol Didac scored a goal.",
            "In the 35th minute, Alavés Mubarak received a yellow card.",
        ]
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "took {elapsed:?}, budget is 1 s"
    );
    println!("acceptance criterion 1 (Table-1 reproduction, both languages): PASS");
}

#[test]
fn criterion_02_template_round_trip_1000_asts() {
    let mut rng = SplitMix64::new(20_240_001);
    let mut failures = 0usize;
    for i in 0..1000 {
        let program = random_ast::program(&mut rng);
        let source = program.to_source();
        match parse_template(&source, "roundtrip") {
            Ok(reparsed) if program.structural_eq(&reparsed) => {}
            _ => {
                failures += 1;
                eprintln!("round-trip failure #{i}: {source:?}");
            }
        }
    }
    assert_eq!(failures, 0, "{failures} of 1000 ASTs failed to round-trip");
    println!("acceptance criterion 2 (1000 random ASTs round-trip, 0 failures): PASS");
}

#[test]
fn criterion_03_blowout_conditional() {
    let template = parse_template(
        "#if(score_diff >= 3){winner} overwhelms {loser}.#end",
        "blowout",
    )
    .unwrap();
    let ctx = |diff: i64| {
        RenderContext::new(0)
            .bind("score_diff", diff)
            .bind("winner", "Team A")
            .bind("loser", "Team B")
    };
    let at_three = render(&template, &ctx(3)).unwrap();
    assert!(at_three.contains("overwhelms"));
    assert_eq!(at_three, "Team A overwhelms Team B.");
    let at_two = render(&template, &ctx(2)).unwrap();
    assert!(!at_two.contains("overwhelms"));
    assert_eq!(at_two, "");
    println!("acceptance criterion 3 (score_diff 3 triggers the blowout branch, 2 does not): PASS");
}

mod random_ast {
    //! Seeded AST generator for the round-trip criterion. Never emits
    //! adjacent text nodes (no parse of any source can produce them).

    use newsbot_core::rng::SplitMix64;
    use newsbot_core::template_dsl::{CmpOp, Expr, IfBranch, Node, Pos, TemplateProgram};

    fn ident(rng: &mut SplitMix64) -> String {
        let letters = b"abcdefgh";
        let len = 1 + rng.next_bounded(6) as usize;
        (0..len)
            .map(|_| letters[rng.next_bounded(letters.len() as u64) as usize] as char)
            .collect()
    }

    fn text(rng: &mut SplitMix64) -> String {
        let alphabet: Vec<char> = " abz019{}#比赛进球。，!?\"\\".chars().collect();
        let len = 1 + rng.next_bounded(12) as usize;
        (0..len)
            .map(|_| alphabet[rng.next_bounded(alphabet.len() as u64) as usize])
            .collect()
    }

    fn expr(rng: &mut SplitMix64, depth: usize) -> Expr {
        let leaf = |rng: &mut SplitMix64| match rng.next_bounded(4) {
            0 => Expr::Int(rng.next_bounded(2001) as i64 - 1000),
            1 => Expr::Str(text(rng)),
            2 => Expr::Call {
                name: if rng.next_bounded(2) == 0 {
                    "ordinal"
                } else {
                    "minute"
                }
                .to_string(),
                args: vec![Expr::Path(vec![ident(rng)])],
            },
            _ => {
                let segments = 1 + rng.next_bounded(3) as usize;
                Expr::Path((0..segments).map(|_| ident(rng)).collect())
            }
        };
        if depth == 0 {
            return leaf(rng);
        }
        match rng.next_bounded(6) {
            0 => Expr::And(
                Box::new(expr(rng, depth - 1)),
                Box::new(expr(rng, depth - 1)),
            ),
            1 => Expr::Or(
                Box::new(expr(rng, depth - 1)),
                Box::new(expr(rng, depth - 1)),
            ),
            2 | 3 => {
                let ops = [
                    CmpOp::Eq,
                    CmpOp::Ne,
                    CmpOp::Lt,
                    CmpOp::Le,
                    CmpOp::Gt,
                    CmpOp::Ge,
                ];
                Expr::Compare {
                    op: ops[rng.next_bounded(6) as usize],
                    lhs: Box::new(expr(rng, depth - 1)),
                    rhs: Box::new(expr(rng, depth - 1)),
                }
            }
            _ => leaf(rng),
        }
    }

    fn nodes(rng: &mut SplitMix64, depth: usize) -> Vec<Node> {
        let count = rng.next_bounded(5) as usize;
        let mut out = Vec::with_capacity(count);
        let mut last_was_text = false;
        let pos = Pos::new(1, 1);
        for _ in 0..count {
            let choice = rng.next_bounded(if depth == 0 { 2 } else { 3 });
            let node = match choice {
                0 if !last_was_text => Node::Text {
                    literal: text(rng),
                    pos,
                },
                1 | 0 => Node::Interp {
                    expr: expr(rng, 2),
                    pos,
                },
                _ => {
                    let branch_count = 1 + rng.next_bounded(3) as usize;
                    Node::If {
                        branches: (0..branch_count)
                            .map(|_| IfBranch {
                                condition: expr(rng, 2),
                                body: nodes(rng, depth - 1),
                            })
                            .collect(),
                        else_body: if rng.next_bounded(2) == 0 {
                            Some(nodes(rng, depth - 1))
                        } else {
                            None
                        },
                        pos,
                    }
                }
            };
            last_was_text = matches!(node, Node::Text { .. });
            out.push(node);
        }
        out
    }

    pub fn program(rng: &mut SplitMix64) -> TemplateProgram {
        TemplateProgram {
            nodes: nodes(rng, 2),
            source_name: "random".to_string(),
        }
    }
}

#[test]
fn criterion_04_ne_translation_round_trip() {
    use newsbot_core::translator::{
        mask_entities, translate_masked, unmask, EntryKind, Glossary, GlossaryEntry,
        IdentityBackend, TranslateError, TranslationBackend,
    };

    // 50-entry glossary: 25 teams and 25 players, mixed scripts.
    let entries: Vec<GlossaryEntry> = (0..25)
        .flat_map(|i| {
            [
                GlossaryEntry {
                    source_term: format!("甲{i}队"),
                    target_term: format!("Club{i}"),
                    kind: EntryKind::Team,
                },
                GlossaryEntry {
                    source_term: format!("球星{i}号"),
                    target_term: format!("Star{i}"),
                    kind: EntryKind::Player,
                },
            ]
        })
        .collect();
    assert_eq!(entries.len(), 50);
    let glossary = Glossary::new(entries.clone()).unwrap();

    let fillers = [
        "第3分钟，",
        "在主场，",
        "下半场",
        "凭借点球，",
        "比赛尾声，",
        "打入一球。",
        "获得黄牌。",
        "完成换人。",
        "射门偏出。",
        "扳平比分。",
    ];
    let mut rng = SplitMix64::new(4_0404);
    for case in 0..200 {
        // Build a sentence interleaving fillers and glossary terms; compute
        // the expected output directly from the construction.
        let mut sentence = String::new();
        let mut expected = String::new();
        let parts = 1 + rng.next_bounded(3) as usize;
        for _ in 0..parts {
            let filler = fillers[rng.next_bounded(fillers.len() as u64) as usize];
            sentence.push_str(filler);
            expected.push_str(filler);
            let entry = &entries[rng.next_bounded(50) as usize];
            sentence.push_str(&entry.source_term);
            expected.push_str(&entry.target_term);
        }
        let tail = fillers[rng.next_bounded(fillers.len() as u64) as usize];
        sentence.push_str(tail);
        expected.push_str(tail);

        let masked = mask_entities(&sentence, &glossary);
        let translated = translate_masked(&masked, &IdentityBackend, "zh", "en").unwrap();
        let restored = unmask(&translated, &masked.map).unwrap();
        assert_eq!(restored, expected, "case {case}: {sentence}");
    }

    // A corrupting backend must raise a placeholder-integrity error.
    struct Corrupting;
    impl TranslationBackend for Corrupting {
        fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
            Ok(text.replace("⟨NE1⟩", ""))
        }
    }
    let masked = mask_entities("甲0队 对阵 球星3号", &glossary);
    assert_eq!(masked.map.len(), 2);
    let err = translate_masked(&masked, &Corrupting, "zh", "en").unwrap_err();
    match err {
        TranslateError::PlaceholderIntegrity { missing, extra } => {
            assert_eq!(missing, vec![1]);
            assert!(extra.is_empty());
        }
        other => panic!("unexpected error {other:?}"),
    }
    println!("acceptance criterion 4 (NE mask/translate/unmask round-trip over 200 sentences + integrity error): PASS");
}

#[test]
fn criterion_05_soccer_summarization() {
    use newsbot_core::news_gen::generate_article;
    use newsbot_core::summarizer::{summarize_soccer, ImportanceTable};

    // Table-1 fixture, budget 1: the goal sentence stays, the card goes.
    let events = parse_events(&read_fixture("events.csv")).unwrap();
    let facts = normalize_facts(&events, "Espanyol", "Alavés", vec![]).unwrap();
    let bank = TemplateBank::parse(&read_fixture("banks/en.bank"), "en").unwrap();
    let article = generate_article(&events, &facts, &bank, 42, &NewsConfig::default()).unwrap();
    let summary = summarize_soccer(&events, &article, &ImportanceTable::default(), 1).unwrap();
    let texts: Vec<&str> = summary.sentences.iter().map(|s| s.text.as_str()).collect();
    assert!(texts.contains(&"In the 23rd minute, Espanyol Didac scored a goal."));
    assert!(
        !texts.iter().any(|t| t.contains("yellow card")),
        "summary kept the card sentence: {texts:?}"
    );

    // Budget monotonicity on a 10-event fixture.
    let ten_events = parse_events(
        "5',Score,P1,A\n12',Foul,P2,B\n20',Yellow Card,P3,A\n28',Score,P4,B\n\
         39',Substitution,P5,A\n47',Red Card,P6,B\n55',Score,P7,A\n63',Yellow Card,P8,B\n\
         78',Substitution,P9,A\n88',Score,P10,B\n",
    )
    .unwrap();
    let ten_facts = normalize_facts(&ten_events, "A", "B", vec![]).unwrap();
    let config = NewsConfig {
        included_categories: newsbot_core::event_model::CategoryKind::ALL.to_vec(),
        ..NewsConfig::default()
    };
    let mut bank10 = TemplateBank::parse(&read_fixture("banks/en.bank"), "en").unwrap();
    let _ = &mut bank10;
    let article10 = generate_article(&ten_events, &ten_facts, &bank10, 3, &config).unwrap();
    let table = ImportanceTable::default();
    let mut previous: Vec<String> = Vec::new();
    for budget in 1..=5 {
        let summary = summarize_soccer(&ten_events, &article10, &table, budget).unwrap();
        let kept: Vec<String> = summary.sentences.iter().map(|s| s.text.clone()).collect();
        for sentence in &previous {
            assert!(
                kept.contains(sentence),
                "budget {budget} dropped previously selected {sentence:?}"
            );
        }
        previous = kept;
    }
    println!("acceptance criterion 5 (soccer summary keeps the goal, budget is monotone): PASS");
}

#[test]
fn criterion_06_frame_conversion() {
    use newsbot_core::phoneme_timeline::{
        timeline_to_frames, Lang, PhonemeSegment, PhonemeTimeline, SIL,
    };

    let make = |durations: &[(usize, f64)]| PhonemeTimeline {
        language: Lang::English,
        segments: durations
            .iter()
            .map(|&(id, duration_s)| PhonemeSegment {
                phoneme: ["A", "B", "C"][id].to_string(),
                duration_s,
                prosody: None,
            })
            .collect(),
        inventory: vec![SIL.into(), "A".into(), "B".into(), "C".into()],
    };

    // 0.4 s at 25 fps -> exactly 10 frames.
    let frames = timeline_to_frames(&make(&[(0, 0.4)]), 25.0).unwrap();
    assert_eq!(frames.len(), 10);

    // Worked example: two 0.2 s segments at 25 fps -> 5 of each.
    let frames = timeline_to_frames(&make(&[(0, 0.2), (1, 0.2)]), 25.0).unwrap();
    assert_eq!(frames, [1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);

    // Worked example: one 0.04 s segment at 25 fps -> a single frame.
    let frames = timeline_to_frames(&make(&[(0, 0.04)]), 25.0).unwrap();
    assert_eq!(frames, [1]);

    // Worked example: 0.1 s + 0.1 s at 30 fps -> frames 0-2 then 3-5
    // (midpoints 1/60..11/60 against the 6/60 boundary).
    let frames = timeline_to_frames(&make(&[(0, 0.1), (1, 0.1)]), 30.0).unwrap();
    assert_eq!(frames, [1, 1, 1, 2, 2, 2]);

    // 1000 random timelines: frame count within ±1 of duration × fps.
    let mut rng = SplitMix64::new(606);
    for _ in 0..1000 {
        let segment_count = rng.next_bounded(20) as usize;
        let durations: Vec<(usize, f64)> = (0..segment_count)
            .map(|_| (rng.next_bounded(3) as usize, rng.next_range(0.01, 0.5)))
            .collect();
        let fps = [10.0, 24.0, 25.0, 30.0, 60.0][rng.next_bounded(5) as usize];
        let timeline = make(&durations);
        let frames = timeline_to_frames(&timeline, fps).unwrap();
        let expected = timeline.total_duration() * fps;
        assert!(
            (frames.len() as f64 - expected).abs() <= 1.0 + 1e-9,
            "{} frames vs duration×fps {expected}",
            frames.len()
        );
        assert!(frames.iter().all(|&id| id < timeline.inventory.len()));
    }
    println!("acceptance criterion 6 (frame conversion: worked examples + ±1 bound over 1000 cases): PASS");
}

#[test]
fn criterion_07_blending_matches_brute_force() {
    use newsbot_core::lipsync::FrameWindowing;

    // Brute-force oracle: enumerate every (window, row) pair covering each
    // frame and average, then clamp.
    fn oracle(predictions: &[Vec<f64>], frame_count: usize, w: &FrameWindowing) -> Vec<Vec<f64>> {
        let half = (w.output_window / 2) as isize;
        (0..frame_count)
            .map(|f| {
                (0..w.num_blendshapes)
                    .map(|b| {
                        let mut total = 0.0;
                        let mut covered = 0usize;
                        for (t, prediction) in predictions.iter().enumerate() {
                            for row in 0..w.output_window {
                                if t as isize + row as isize - half == f as isize {
                                    total += prediction[row * w.num_blendshapes + b];
                                    covered += 1;
                                }
                            }
                        }
                        (total / covered as f64).clamp(0.0, 1.0)
                    })
                    .collect()
            })
            .collect()
    }

    let w = FrameWindowing::default();
    let mut rng = SplitMix64::new(707);
    for case in 0..200 {
        let frame_count = 1 + rng.next_bounded(50) as usize;
        let predictions: Vec<Vec<f64>> = (0..frame_count)
            .map(|_| {
                (0..w.output_dim())
                    .map(|_| rng.next_range(-0.3, 1.3))
                    .collect()
            })
            .collect();
        let fast = blend_windows(&predictions, frame_count, &w).unwrap();
        let slow = oracle(&predictions, frame_count, &w);
        for (frame, (a, b)) in fast.iter().zip(&slow).enumerate() {
            for (x, y) in a.iter().zip(b) {
                assert!(
                    (x - y).abs() <= 1e-12,
                    "case {case} frame {frame}: {x} vs {y}"
                );
            }
        }
    }
    println!("acceptance criterion 7 (blending equals brute-force oracle within 1e-12 on 200 cases): PASS");
}

#[test]
fn criterion_08_gradient_check() {
    use newsbot_core::lipsync::{DatasetSample, FrameWindowing, MlpParameters};

    // Fully random windows keep the per-feature batch variance healthy; a
    // near-constant feature makes the finite-difference side of the check
    // ill-conditioned through the batch-norm curvature.
    let windowing = FrameWindowing::default();
    let params =
        MlpParameters::seeded(windowing.input_window * 4, &[8, 8, 8], windowing, 808).unwrap();
    let mut rng = SplitMix64::new(809);
    let samples: Vec<DatasetSample> = (0..16)
        .map(|_| DatasetSample {
            input_ids: (0..windowing.input_window)
                .map(|_| rng.next_bounded(4) as usize)
                .collect(),
            target: (0..windowing.output_dim())
                .map(|_| rng.next_f64())
                .collect(),
        })
        .collect();
    let worst = grad_check(&params, &samples, 1e-4).unwrap();
    assert!(worst < 1e-5, "max relative gradient error {worst}");
    println!("acceptance criterion 8 (analytic vs central-difference gradients, max error {worst:.2e} < 1e-5): PASS");
}

#[test]
fn criterion_09_desk_scale_training() {
    use newsbot_core::lipsync::{
        train, FrameWindowing, MlpParameters, SyntheticTask, TrainingConfig,
    };

    let started = Instant::now();
    let windowing = FrameWindowing::default();
    let task = SyntheticTask::new(8, windowing, 1).unwrap();
    let train_set = task.generate(4096, 0.01, 2);
    let eval_set = task.generate(512, 0.0, 3);
    let params =
        MlpParameters::seeded(windowing.input_window * 8, &[128, 128, 128], windowing, 4).unwrap();
    let config = TrainingConfig {
        batch_size: 128,
        learning_rate: 1e-3,
        steps: 2000,
        dropout_p: 0.5,
        bn_momentum: 0.9,
        rng_seed: 5,
    };
    let outcome = train(params, &train_set, &config).unwrap();
    let mse = mean_squared_error(&outcome.params, &eval_set).unwrap();
    assert!(mse < 0.01, "eval MSE {mse} must be below 0.01");

    // Overfit-one-example sanity oracle: loss falls at least 100x. The
    // example carries real phonemes and non-zero targets so the initial
    // loss is non-degenerate.
    let tiny_windowing = FrameWindowing::new(3, 3, 2).unwrap();
    let tiny = MlpParameters::seeded(3 * 4, &[8], tiny_windowing, 6).unwrap();
    let one_example = vec![newsbot_core::lipsync::DatasetSample {
        input_ids: vec![1, 2, 3],
        target: vec![0.8, 0.2, 0.6, 0.4, 0.9, 0.1],
    }];
    let tiny_config = TrainingConfig {
        batch_size: 1,
        learning_rate: 0.05,
        steps: 500,
        dropout_p: 0.0,
        bn_momentum: 0.9,
        rng_seed: 9,
    };
    let tiny_outcome = train(tiny, &one_example, &tiny_config).unwrap();
    let first = tiny_outcome.loss_trace[0];
    let last = *tiny_outcome.loss_trace.last().unwrap();
    assert!(
        last < first && first / last >= 100.0,
        "loss {first} -> {last}"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "training took {elapsed:?}, budget is 5 minutes"
    );
    println!(
        "acceptance criterion 9 (desk-scale training: eval MSE {mse:.4} < 0.01, overfit drop {:.1e}x, {:.1?}): PASS",
        first / last,
        elapsed
    );
}

/// Train a quick model and write a config into `dir`, returning the config
/// path. Artifacts land in `dir/runs/<run_id>`.
fn prepare_run(dir: &Path, run_id: &str) -> PathBuf {
    let model_path = dir.join("model.txt");
    let status = newsbot()
        .args([
            "train-lipsync",
            "--lexicon",
            fixtures_dir().join("lexicon.en.lex").to_str().unwrap(),
            "--hidden",
            "16,16",
            "--steps",
            "80",
            "--examples",
            "128",
            "--seed",
            "10",
            "--out",
            model_path.to_str().unwrap(),
        ])
        .status()
        .expect("spawn train-lipsync");
    assert!(status.success(), "train-lipsync failed");

    let fixtures = fixtures_dir().canonicalize().unwrap();
    let config = format!(
        r#"run_id = "{run_id}"
out_dir = "{out}"
seed = 42
fps = 25.0
src_lang = "zh"
tgt_lang = "en"
home_team = "Espanyol"
away_team = "Alavés"
backend = "dictionary"

[paths]
events = "{fx}/events.csv"
templates = "{fx}/banks/zh.bank"
glossary = "{fx}/glossary.zh-en.tsv"
dictionary = "{fx}/dict.zh-en.tsv"
lexicon = "{fx}/lexicon.en.lex"
model = "{model}"

[summary]
mode = "budget"
value = 1
"#,
        out = dir.join("runs").display(),
        fx = fixtures.display(),
        model = model_path.display(),
    );
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config).unwrap();
    config_path
}

const BUNDLE_FILES: [&str; 6] = [
    "article.txt",
    "summary.txt",
    "summary_labels.txt",
    "translated.txt",
    "timeline.txt",
    "animation.txt",
];

#[test]
fn criterion_10_end_to_end_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = prepare_run(tmp.path(), "det");
    let run_dir = tmp.path().join("runs/det");

    let run = || {
        let status = newsbot()
            .args(["run", "--config", config_path.to_str().unwrap()])
            .status()
            .expect("spawn run");
        assert!(status.success(), "pipeline run failed");
    };

    run();
    let first_dir = tmp.path().join("first");
    std::fs::create_dir_all(&first_dir).unwrap();
    for name in BUNDLE_FILES.iter().chain(["manifest.json"].iter()) {
        std::fs::copy(run_dir.join(name), first_dir.join(name)).unwrap();
    }

    run();
    for name in BUNDLE_FILES {
        let first = std::fs::read(first_dir.join(name)).unwrap();
        let second = std::fs::read(run_dir.join(name)).unwrap();
        assert_eq!(first, second, "artifact {name} differs between runs");
    }
    // The manifest is byte-identical except for wall-clock stage timings.
    let first_manifest = newsbot_cli::manifest::Manifest::parse(
        &std::fs::read_to_string(first_dir.join("manifest.json")).unwrap(),
    )
    .unwrap();
    let second_manifest = newsbot_cli::manifest::Manifest::parse(
        &std::fs::read_to_string(run_dir.join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        first_manifest.with_zeroed_durations(),
        second_manifest.with_zeroed_durations()
    );
    println!("acceptance criterion 10 (two runs with one seed are byte-identical, animation included): PASS");
}

#[test]
fn stage_composability_matches_run_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = prepare_run(tmp.path(), "composed");
    let run_dir = tmp.path().join("runs/composed");

    let status = newsbot()
        .args(["run", "--config", config_path.to_str().unwrap()])
        .status()
        .expect("spawn run");
    assert!(status.success());

    let fixtures = fixtures_dir().canonicalize().unwrap();
    let stage_dir = tmp.path().join("stages");
    std::fs::create_dir_all(&stage_dir).unwrap();
    let path = |name: &str| stage_dir.join(name).to_str().unwrap().to_string();
    let fx = |name: &str| fixtures.join(name).to_str().unwrap().to_string();

    let steps: Vec<Vec<String>> = vec![
        vec![
            "generate".into(),
            "--events".into(),
            fx("events.csv"),
            "--templates".into(),
            fx("banks/zh.bank"),
            "--home".into(),
            "Espanyol".into(),
            "--away".into(),
            "Alavés".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            path("article.txt"),
        ],
        vec![
            "summarize".into(),
            "--article".into(),
            path("article.txt"),
            "--events".into(),
            fx("events.csv"),
            "--budget".into(),
            "1".into(),
            "--out".into(),
            path("summary.txt"),
            "--labels".into(),
            path("summary_labels.txt"),
        ],
        vec![
            "translate".into(),
            "--input".into(),
            path("summary.txt"),
            "--glossary".into(),
            fx("glossary.zh-en.tsv"),
            "--dictionary".into(),
            fx("dict.zh-en.tsv"),
            "--src".into(),
            "zh".into(),
            "--tgt".into(),
            "en".into(),
            "--out".into(),
            path("translated.txt"),
        ],
        vec![
            "phonemize".into(),
            "--input".into(),
            path("translated.txt"),
            "--lexicon".into(),
            fx("lexicon.en.lex"),
            "--language".into(),
            "en".into(),
            "--default-duration".into(),
            "0.08".into(),
            "--out".into(),
            path("timeline.txt"),
        ],
        vec![
            "animate".into(),
            "--timeline".into(),
            path("timeline.txt"),
            "--model".into(),
            tmp.path().join("model.txt").to_str().unwrap().into(),
            "--fps".into(),
            "25".into(),
            "--out".into(),
            path("animation.txt"),
        ],
    ];
    for step in steps {
        let status = newsbot().args(&step).status().expect("spawn stage");
        assert!(status.success(), "stage {:?} failed", step[0]);
    }

    for name in BUNDLE_FILES {
        let from_run = std::fs::read(run_dir.join(name)).unwrap();
        let from_stages = std::fs::read(stage_dir.join(name)).unwrap();
        assert_eq!(
            from_run, from_stages,
            "stage output {name} differs from run bundle"
        );
    }
    println!("invariant (stage subcommands compose to the run bundle): PASS");
}
