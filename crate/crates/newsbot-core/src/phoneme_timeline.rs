//! Text → phoneme timeline conversion and frame sampling.
//!
//! A lexicon maps words to phoneme sequences with per-language prosody tags:
//! tone digits 1-5 for Chinese, stress digits 0-2 for English and mora-accent
//! letters H/L for Japanese. Durations are fixed per-segment defaults with
//! optional per-phoneme lexicon overrides (a `:seconds` suffix on the
//! phoneme token), standing in for an acoustic duration model.
//!
//! Lexicon file: one `word TAB space-separated-phonemes` entry per line,
//! `#`-prefixed lines are comments. Example: `ball<TAB>B AO1 L:0.12`.
//!
//! Timeline file: two header lines (`language <tag>`, `inventory <symbols>`)
//! then one `phoneme TAB duration_s TAB prosody` line per segment, with `-`
//! for "no prosody tag".

use indexmap::IndexMap;
use thiserror::Error;

/// Silence symbol; always present at inventory index 0.
pub const SIL: &str = "SIL";

/// Languages with their prosody-tag conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lang {
    Chinese,
    English,
    Japanese,
}

impl Lang {
    pub fn parse(tag: &str) -> Option<Self> {
        match tag.trim().to_lowercase().as_str() {
            "zh" | "zh-cn" | "chinese" => Some(Self::Chinese),
            "en" | "en-us" | "english" => Some(Self::English),
            "ja" | "jp" | "japanese" => Some(Self::Japanese),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Chinese => "zh",
            Self::English => "en",
            Self::Japanese => "ja",
        }
    }
}

/// Mora accent level for Japanese.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoraLevel {
    High,
    Low,
}

/// Per-segment prosody tag; the kind must match the timeline language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prosody {
    /// Chinese tone, 1-5 (5 = neutral).
    Tone(u8),
    /// English stress, 0-2.
    Stress(u8),
    /// Japanese mora accent.
    MoraAccent(MoraLevel),
}

impl Prosody {
    pub fn text(self) -> String {
        match self {
            Prosody::Tone(t) => format!("tone{t}"),
            Prosody::Stress(s) => format!("stress{s}"),
            Prosody::MoraAccent(MoraLevel::High) => "moraH".to_string(),
            Prosody::MoraAccent(MoraLevel::Low) => "moraL".to_string(),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        if let Some(t) = text.strip_prefix("tone") {
            return t
                .parse::<u8>()
                .ok()
                .filter(|t| (1..=5).contains(t))
                .map(Prosody::Tone);
        }
        if let Some(s) = text.strip_prefix("stress") {
            return s
                .parse::<u8>()
                .ok()
                .filter(|s| *s <= 2)
                .map(Prosody::Stress);
        }
        match text {
            "moraH" => Some(Prosody::MoraAccent(MoraLevel::High)),
            "moraL" => Some(Prosody::MoraAccent(MoraLevel::Low)),
            _ => None,
        }
    }

    fn matches_language(self, language: Lang) -> bool {
        matches!(
            (self, language),
            (Prosody::Tone(_), Lang::Chinese)
                | (Prosody::Stress(_), Lang::English)
                | (Prosody::MoraAccent(_), Lang::Japanese)
        )
    }
}

/// One phoneme with its duration and optional prosody tag.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeSegment {
    pub phoneme: String,
    pub duration_s: f64,
    pub prosody: Option<Prosody>,
}

/// Ordered phoneme segments plus the symbol inventory they index into.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeTimeline {
    pub language: Lang,
    pub segments: Vec<PhonemeSegment>,
    /// Unique symbols; `SIL` sits at index 0.
    pub inventory: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PhonemeError {
    #[error("unknown token {token:?} (not in lexicon and not decomposable)")]
    UnknownToken { token: String },
    #[error("default duration must be positive, got {0}")]
    BadDefaultDuration(f64),
    #[error("lexicon line {line}: {message}")]
    LexiconFormat { line: usize, message: String },
    #[error("timeline line {line}: {message}")]
    TimelineFormat { line: usize, message: String },
    #[error("segment {index}: duration must be positive, got {duration}")]
    BadDuration { index: usize, duration: f64 },
    #[error("segment {index}: phoneme {phoneme:?} is not in the inventory")]
    PhonemeNotInInventory { index: usize, phoneme: String },
    #[error("segment {index}: prosody tag does not match language {language:?}")]
    ProsodyLanguageMismatch { index: usize, language: Lang },
    #[error("inventory must start with {SIL} and contain no duplicates")]
    BadInventory,
    #[error("frame rate must be positive and finite, got {0}")]
    BadFps(f64),
}

impl PhonemeTimeline {
    pub fn empty(language: Lang, inventory: Vec<String>) -> Self {
        Self {
            language,
            segments: Vec::new(),
            inventory,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<(), PhonemeError> {
        if self.inventory.first().map(String::as_str) != Some(SIL) {
            return Err(PhonemeError::BadInventory);
        }
        for (i, symbol) in self.inventory.iter().enumerate() {
            if self.inventory[..i].contains(symbol) {
                return Err(PhonemeError::BadInventory);
            }
        }
        for (index, segment) in self.segments.iter().enumerate() {
            if !segment.duration_s.is_finite() || segment.duration_s <= 0.0 {
                return Err(PhonemeError::BadDuration {
                    index,
                    duration: segment.duration_s,
                });
            }
            if !self.inventory.contains(&segment.phoneme) {
                return Err(PhonemeError::PhonemeNotInInventory {
                    index,
                    phoneme: segment.phoneme.clone(),
                });
            }
            if let Some(prosody) = segment.prosody {
                if !prosody.matches_language(self.language) {
                    return Err(PhonemeError::ProsodyLanguageMismatch {
                        index,
                        language: self.language,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One phoneme slot in a lexicon entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LexPhone {
    pub symbol: String,
    pub prosody: Option<Prosody>,
    /// Duration override in seconds.
    pub duration_s: Option<f64>,
}

/// Word → phoneme-sequence map with the derived symbol inventory.
#[derive(Debug, Clone)]
pub struct Lexicon {
    language: Lang,
    entries: IndexMap<String, Vec<LexPhone>>,
    inventory: Vec<String>,
    /// Entry keys sorted by char length descending, for greedy decomposition.
    keys_by_length: Vec<String>,
}

impl Lexicon {
    /// Parse lexicon text. Words are stored lowercased; lookups are
    /// case-insensitive.
    pub fn parse(input: &str, language: Lang) -> Result<Self, PhonemeError> {
        let mut entries: IndexMap<String, Vec<LexPhone>> = IndexMap::new();
        let mut inventory: Vec<String> = vec![SIL.to_string()];
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, phones) =
                line.split_once('\t')
                    .ok_or_else(|| PhonemeError::LexiconFormat {
                        line: line_no,
                        message: "expected 'word TAB phonemes'".to_string(),
                    })?;
            let word = word.trim().to_lowercase();
            if word.is_empty() {
                return Err(PhonemeError::LexiconFormat {
                    line: line_no,
                    message: "empty word".to_string(),
                });
            }
            let mut parsed = Vec::new();
            for token in phones.split_whitespace() {
                let phone = parse_phone_token(token, language).map_err(|message| {
                    PhonemeError::LexiconFormat {
                        line: line_no,
                        message,
                    }
                })?;
                if !inventory.contains(&phone.symbol) {
                    inventory.push(phone.symbol.clone());
                }
                parsed.push(phone);
            }
            if parsed.is_empty() {
                return Err(PhonemeError::LexiconFormat {
                    line: line_no,
                    message: "entry has no phonemes".to_string(),
                });
            }
            entries.insert(word, parsed);
        }
        let mut keys_by_length: Vec<String> = entries.keys().cloned().collect();
        keys_by_length.sort_by_key(|k| std::cmp::Reverse(k.chars().count()));
        Ok(Self {
            language,
            entries,
            inventory,
            keys_by_length,
        })
    }

    pub fn language(&self) -> Lang {
        self.language
    }

    pub fn inventory(&self) -> &[String] {
        &self.inventory
    }

    pub fn lookup(&self, word: &str) -> Option<&[LexPhone]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }
}

/// Parse one phoneme token: base symbol, optional prosody suffix, optional
/// `:seconds` duration override. `AO1` → stress 1 on `AO` (English),
/// `ma3` → tone 3 on `ma` (Chinese), `kaH` → high mora accent (Japanese).
fn parse_phone_token(token: &str, language: Lang) -> Result<LexPhone, String> {
    let (symbol_part, duration_s) = match token.split_once(':') {
        Some((sym, dur)) => {
            let parsed: f64 = dur
                .parse()
                .map_err(|_| format!("bad duration override {dur:?} in {token:?}"))?;
            if !parsed.is_finite() || parsed <= 0.0 {
                return Err(format!("duration override must be positive in {token:?}"));
            }
            (sym, Some(parsed))
        }
        None => (token, None),
    };
    let mut symbol = symbol_part.to_string();
    let mut prosody = None;
    match language {
        Lang::Chinese | Lang::English => {
            if let Some(last) = symbol.chars().last().filter(char::is_ascii_digit) {
                let digit = last.to_digit(10).unwrap() as u8;
                prosody = Some(match language {
                    Lang::Chinese => {
                        if !(1..=5).contains(&digit) {
                            return Err(format!("tone must be 1-5 in {token:?}"));
                        }
                        Prosody::Tone(digit)
                    }
                    Lang::English => {
                        if digit > 2 {
                            return Err(format!("stress must be 0-2 in {token:?}"));
                        }
                        Prosody::Stress(digit)
                    }
                    Lang::Japanese => unreachable!(),
                });
                symbol.pop();
            }
        }
        Lang::Japanese => {
            if let Some(last) = symbol.chars().last() {
                if last == 'H' || last == 'L' {
                    prosody = Some(Prosody::MoraAccent(if last == 'H' {
                        MoraLevel::High
                    } else {
                        MoraLevel::Low
                    }));
                    symbol.pop();
                }
            }
        }
    }
    if symbol.is_empty() {
        return Err(format!("empty phoneme symbol in {token:?}"));
    }
    Ok(LexPhone {
        symbol,
        prosody,
        duration_s,
    })
}

/// What to do with a token the lexicon cannot cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownTokenPolicy {
    /// Fail, naming the token.
    #[default]
    Error,
    /// Skip the token and log a warning.
    Skip,
}

impl UnknownTokenPolicy {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_lowercase().as_str() {
            "error" => Some(Self::Error),
            "skip" => Some(Self::Skip),
            _ => None,
        }
    }
}

/// Punctuation that maps to a silence segment.
fn is_pause_char(c: char) -> bool {
    matches!(
        c,
        '。' | '，'
            | '！'
            | '？'
            | '；'
            | '：'
            | '、'
            | '．'
            | '.'
            | ','
            | '!'
            | '?'
            | ';'
            | ':'
            | '"'
            | '\''
            | '('
            | ')'
            | '（'
            | '）'
            | '…'
            | '—'
            | '-'
            | '«'
            | '»'
    )
}

/// Convert text to a phoneme timeline.
///
/// Whitespace-separated tokens are looked up in the lexicon; a token that
/// misses is decomposed greedily, longest lexicon entry first, which handles
/// unsegmented Chinese text and punctuation glued to words. Pause punctuation
/// becomes a `SIL` segment. A token that cannot be fully covered is handled
/// per `policy` — a hard error naming the token, or skip-with-warning.
pub fn text_to_phonemes(
    text: &str,
    lexicon: &Lexicon,
    default_duration_s: f64,
    policy: UnknownTokenPolicy,
) -> Result<PhonemeTimeline, PhonemeError> {
    if !default_duration_s.is_finite() || default_duration_s <= 0.0 {
        return Err(PhonemeError::BadDefaultDuration(default_duration_s));
    }
    let mut segments = Vec::new();
    for token in text.split_whitespace() {
        match token_segments(token, lexicon, default_duration_s) {
            Some(mut parts) => segments.append(&mut parts),
            None => match policy {
                UnknownTokenPolicy::Error => {
                    return Err(PhonemeError::UnknownToken {
                        token: token.to_string(),
                    })
                }
                UnknownTokenPolicy::Skip => {
                    log::warn!("skipping unknown token {token:?}");
                }
            },
        }
    }
    let timeline = PhonemeTimeline {
        language: lexicon.language,
        segments,
        inventory: lexicon.inventory.clone(),
    };
    timeline.validate()?;
    Ok(timeline)
}

/// Segments for one token, or `None` if it cannot be fully covered.
fn token_segments(
    token: &str,
    lexicon: &Lexicon,
    default_duration_s: f64,
) -> Option<Vec<PhonemeSegment>> {
    if let Some(phones) = lexicon.lookup(token) {
        return Some(
            phones
                .iter()
                .map(|p| segment_from(p, default_duration_s))
                .collect(),
        );
    }
    // Greedy longest-prefix decomposition over lexicon entries and pause
    // punctuation.
    let lowered: Vec<char> = token.to_lowercase().chars().collect();
    let mut segments = Vec::new();
    let mut i = 0;
    while i < lowered.len() {
        let hit = lexicon.keys_by_length.iter().find_map(|key| {
            let key_chars: Vec<char> = key.chars().collect();
            lowered[i..]
                .starts_with(&key_chars)
                .then(|| (key.clone(), key_chars.len()))
        });
        if let Some((key, len)) = hit {
            for phone in lexicon.entries.get(&key).unwrap() {
                segments.push(segment_from(phone, default_duration_s));
            }
            i += len;
        } else if is_pause_char(lowered[i]) {
            segments.push(PhonemeSegment {
                phoneme: SIL.to_string(),
                duration_s: default_duration_s,
                prosody: None,
            });
            i += 1;
        } else {
            return None;
        }
    }
    Some(segments)
}

fn segment_from(phone: &LexPhone, default_duration_s: f64) -> PhonemeSegment {
    PhonemeSegment {
        phoneme: phone.symbol.clone(),
        duration_s: phone.duration_s.unwrap_or(default_duration_s),
        prosody: phone.prosody,
    }
}

/// Sample the timeline at a video frame rate.
///
/// The frame count is `round(total_duration × fps)`; frame `t` (0-based)
/// reports the segment containing its midpoint `(t + 0.5) / fps`, with the
/// final segment absorbing any rounding overhang. Returns inventory indices.
pub fn timeline_to_frames(
    timeline: &PhonemeTimeline,
    fps: f64,
) -> Result<Vec<usize>, PhonemeError> {
    if !fps.is_finite() || fps <= 0.0 {
        return Err(PhonemeError::BadFps(fps));
    }
    timeline.validate()?;
    if timeline.segments.is_empty() {
        return Ok(Vec::new());
    }
    let ids: Vec<usize> = timeline
        .segments
        .iter()
        .map(|s| {
            timeline
                .inventory
                .iter()
                .position(|symbol| *symbol == s.phoneme)
                .expect("validated above")
        })
        .collect();
    let ends: Vec<f64> = timeline
        .segments
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s.duration_s;
            Some(*acc)
        })
        .collect();
    let total = *ends.last().unwrap();
    let frame_count = (total * fps).round() as usize;
    let mut frames = Vec::with_capacity(frame_count);
    let mut segment = 0usize;
    for t in 0..frame_count {
        let midpoint = (t as f64 + 0.5) / fps;
        while segment + 1 < ids.len() && midpoint >= ends[segment] {
            segment += 1;
        }
        frames.push(ids[segment]);
    }
    Ok(frames)
}

/// Serialize a timeline to its file format.
pub fn write_timeline(timeline: &PhonemeTimeline) -> String {
    let mut out = format!(
        "language {}\ninventory {}\n",
        timeline.language.tag(),
        timeline.inventory.join(" ")
    );
    for segment in &timeline.segments {
        let prosody = segment
            .prosody
            .map_or_else(|| "-".to_string(), Prosody::text);
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            segment.phoneme, segment.duration_s, prosody
        ));
    }
    out
}

/// Parse the timeline file format.
pub fn parse_timeline(input: &str) -> Result<PhonemeTimeline, PhonemeError> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, message: String| PhonemeError::TimelineFormat { line, message };

    let (_, language_line) = lines
        .next()
        .ok_or_else(|| bad(1, "missing 'language' header".to_string()))?;
    let language = language_line
        .strip_prefix("language ")
        .and_then(Lang::parse)
        .ok_or_else(|| bad(1, format!("bad language header {language_line:?}")))?;

    let (_, inventory_line) = lines
        .next()
        .ok_or_else(|| bad(2, "missing 'inventory' header".to_string()))?;
    let inventory: Vec<String> = inventory_line
        .strip_prefix("inventory ")
        .ok_or_else(|| bad(2, format!("bad inventory header {inventory_line:?}")))?
        .split_whitespace()
        .map(str::to_string)
        .collect();

    let mut segments = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(bad(
                line_no,
                "expected 'phoneme TAB duration TAB prosody'".to_string(),
            ));
        }
        let duration_s: f64 = parts[1]
            .parse()
            .map_err(|_| bad(line_no, format!("bad duration {:?}", parts[1])))?;
        let prosody = match parts[2] {
            "-" => None,
            tag => Some(
                Prosody::parse(tag).ok_or_else(|| bad(line_no, format!("bad prosody {tag:?}")))?,
            ),
        };
        segments.push(PhonemeSegment {
            phoneme: parts[0].to_string(),
            duration_s,
            prosody,
        });
    }
    let timeline = PhonemeTimeline {
        language,
        segments,
        inventory,
    };
    timeline.validate()?;
    Ok(timeline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en_lexicon() -> Lexicon {
        Lexicon::parse("ball\tB AO1 L\ngoal\tG OW1 L\n", Lang::English).unwrap()
    }

    #[test]
    fn ball_yields_three_default_duration_segments() {
        let timeline =
            text_to_phonemes("ball", &en_lexicon(), 0.1, UnknownTokenPolicy::Error).unwrap();
        assert_eq!(timeline.segments.len(), 3);
        for segment in &timeline.segments {
            assert_eq!(segment.duration_s, 0.1);
        }
        assert_eq!(timeline.segments[0].phoneme, "B");
        assert_eq!(timeline.segments[1].phoneme, "AO");
        assert_eq!(timeline.segments[1].prosody, Some(Prosody::Stress(1)));
        assert_eq!(timeline.segments[2].phoneme, "L");
        assert_eq!(timeline.inventory[0], SIL);
    }

    #[test]
    fn empty_text_gives_empty_timeline() {
        let timeline = text_to_phonemes("", &en_lexicon(), 0.1, UnknownTokenPolicy::Error).unwrap();
        assert!(timeline.segments.is_empty());
        assert_eq!(timeline.total_duration(), 0.0);
    }

    #[test]
    fn unknown_token_errors_under_error_policy() {
        let err =
            text_to_phonemes("xyzzy", &en_lexicon(), 0.1, UnknownTokenPolicy::Error).unwrap_err();
        assert_eq!(
            err,
            PhonemeError::UnknownToken {
                token: "xyzzy".into()
            }
        );
    }

    #[test]
    fn unknown_token_skipped_under_skip_policy() {
        let timeline =
            text_to_phonemes("xyzzy ball", &en_lexicon(), 0.1, UnknownTokenPolicy::Skip).unwrap();
        assert_eq!(timeline.segments.len(), 3);
    }

    #[test]
    fn punctuation_becomes_silence() {
        let timeline =
            text_to_phonemes("goal.", &en_lexicon(), 0.1, UnknownTokenPolicy::Error).unwrap();
        let symbols: Vec<&str> = timeline
            .segments
            .iter()
            .map(|s| s.phoneme.as_str())
            .collect();
        assert_eq!(symbols, ["G", "OW", "L", SIL]);
    }

    #[test]
    fn unsegmented_text_decomposes_longest_first() {
        let lexicon = Lexicon::parse(
            "分钟\tf en1 zh ong1\n分\tf en1\n钟\tzh ong1\n一\ti1\n",
            Lang::Chinese,
        )
        .unwrap();
        let timeline =
            text_to_phonemes("一分钟", &lexicon, 0.05, UnknownTokenPolicy::Error).unwrap();
        // "一" then the two-char word "分钟" (longest match), not 分+钟.
        let symbols: Vec<&str> = timeline
            .segments
            .iter()
            .map(|s| s.phoneme.as_str())
            .collect();
        assert_eq!(symbols, ["i", "f", "en", "zh", "ong"]);
        assert_eq!(timeline.segments[0].prosody, Some(Prosody::Tone(1)));
    }

    #[test]
    fn duration_override_applies() {
        let lexicon = Lexicon::parse("ball\tB AO1:0.25 L\n", Lang::English).unwrap();
        let timeline = text_to_phonemes("ball", &lexicon, 0.1, UnknownTokenPolicy::Error).unwrap();
        assert_eq!(timeline.segments[1].duration_s, 0.25);
        assert_eq!(timeline.segments[0].duration_s, 0.1);
    }

    #[test]
    fn case_insensitive_lookup() {
        let timeline =
            text_to_phonemes("BALL Ball", &en_lexicon(), 0.1, UnknownTokenPolicy::Error).unwrap();
        assert_eq!(timeline.segments.len(), 6);
    }

    fn two_segment_timeline(d1: f64, d2: f64) -> PhonemeTimeline {
        PhonemeTimeline {
            language: Lang::English,
            segments: vec![
                PhonemeSegment {
                    phoneme: "A".into(),
                    duration_s: d1,
                    prosody: None,
                },
                PhonemeSegment {
                    phoneme: "B".into(),
                    duration_s: d2,
                    prosody: None,
                },
            ],
            inventory: vec![SIL.into(), "A".into(), "B".into()],
        }
    }

    #[test]
    fn frames_split_evenly_at_25fps() {
        // Two 0.2 s segments at 25 fps: 10 frames, midpoints 0.02..0.38,
        // boundary at 0.2 → frames 0-4 are A, 5-9 are B.
        let timeline = two_segment_timeline(0.2, 0.2);
        let frames = timeline_to_frames(&timeline, 25.0).unwrap();
        assert_eq!(frames, [1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn single_short_segment_gives_one_frame() {
        let timeline = PhonemeTimeline {
            language: Lang::English,
            segments: vec![PhonemeSegment {
                phoneme: "A".into(),
                duration_s: 0.04,
                prosody: None,
            }],
            inventory: vec![SIL.into(), "A".into()],
        };
        assert_eq!(timeline_to_frames(&timeline, 25.0).unwrap(), [1]);
    }

    #[test]
    fn frames_at_30fps_follow_midpoints() {
        // 0.1 s + 0.1 s at 30 fps: 6 frames, midpoints 1/60, 3/60, 5/60,
        // 7/60, 9/60, 11/60 against the 0.1 = 6/60 boundary → 3 A then 3 B.
        let timeline = two_segment_timeline(0.1, 0.1);
        let frames = timeline_to_frames(&timeline, 30.0).unwrap();
        assert_eq!(frames, [1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn empty_timeline_gives_no_frames() {
        let timeline = PhonemeTimeline::empty(Lang::English, vec![SIL.into()]);
        assert!(timeline_to_frames(&timeline, 25.0).unwrap().is_empty());
    }

    #[test]
    fn bad_fps_is_rejected() {
        let timeline = two_segment_timeline(0.1, 0.1);
        assert_eq!(
            timeline_to_frames(&timeline, 0.0).unwrap_err(),
            PhonemeError::BadFps(0.0)
        );
    }

    #[test]
    fn prosody_kind_must_match_language() {
        let mut timeline = two_segment_timeline(0.1, 0.1);
        timeline.segments[0].prosody = Some(Prosody::Tone(3));
        match timeline.validate().unwrap_err() {
            PhonemeError::ProsodyLanguageMismatch { index, .. } => assert_eq!(index, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn timeline_file_round_trip() {
        let timeline =
            text_to_phonemes("ball goal.", &en_lexicon(), 0.08, UnknownTokenPolicy::Error).unwrap();
        let text = write_timeline(&timeline);
        assert_eq!(parse_timeline(&text).unwrap(), timeline);
    }

    #[test]
    fn timeline_parse_rejects_missing_sil() {
        let err = parse_timeline("language en\ninventory A B\nA\t0.1\t-\n").unwrap_err();
        assert_eq!(err, PhonemeError::BadInventory);
    }
}
