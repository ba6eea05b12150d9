//! Glossary-driven named-entity placeholder translation.
//!
//! Glossary terms are masked to `⟨NEk⟩` placeholder tokens before the text
//! reaches the translation backend and restored to their target-language
//! forms afterwards. Masking is exact-string, longest-match-first and
//! left-to-right (no tokenizer — Chinese source text has no word
//! boundaries), and a conforming backend must carry every placeholder
//! through unchanged; the wrapper counts them on both sides and fails loudly
//! when one is lost or duplicated.
//!
//! File formats: the glossary is tab-separated `source TAB target TAB kind`
//! with kind `team` / `player` / `other`; the dictionary backend reads a
//! tab-separated `source-phrase TAB target-phrase` table.

use std::collections::BTreeMap;

use thiserror::Error;

/// Kind of glossary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Team,
    Player,
    Other,
}

impl EntryKind {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_lowercase().as_str() {
            "team" => Some(Self::Team),
            "player" => Some(Self::Player),
            "other" => Some(Self::Other),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Team => "team",
            Self::Player => "player",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryEntry {
    pub source_term: String,
    pub target_term: String,
    pub kind: EntryKind,
}

/// Validated entity glossary: source terms are unique and non-empty.
#[derive(Debug, Clone, Default)]
pub struct Glossary {
    entries: Vec<GlossaryEntry>,
    /// Entry indices sorted by source length (chars) descending, which makes
    /// the left-to-right scan longest-match-first.
    by_length: Vec<usize>,
}

impl Glossary {
    pub fn new(entries: Vec<GlossaryEntry>) -> Result<Self, TranslateError> {
        for (i, entry) in entries.iter().enumerate() {
            if entry.source_term.is_empty() {
                return Err(TranslateError::EmptySourceTerm { index: i });
            }
            if entries[..i]
                .iter()
                .any(|e| e.source_term == entry.source_term)
            {
                return Err(TranslateError::DuplicateSourceTerm {
                    term: entry.source_term.clone(),
                });
            }
        }
        let mut by_length: Vec<usize> = (0..entries.len()).collect();
        by_length.sort_by_key(|&i| std::cmp::Reverse(entries[i].source_term.chars().count()));
        Ok(Self { entries, by_length })
    }

    /// Parse the tab-separated glossary format.
    pub fn parse(input: &str) -> Result<Self, TranslateError> {
        let mut entries = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(source), Some(target), Some(kind)) =
                (parts.next(), parts.next(), parts.next())
            else {
                return Err(TranslateError::GlossaryFormat {
                    line: line_no,
                    message: "expected 'source TAB target TAB kind'".to_string(),
                });
            };
            let kind = EntryKind::parse(kind).ok_or_else(|| TranslateError::GlossaryFormat {
                line: line_no,
                message: format!("unknown kind {kind:?} (team, player or other)"),
            })?;
            entries.push(GlossaryEntry {
                source_term: source.trim().to_string(),
                target_term: target.trim().to_string(),
                kind,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[GlossaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Text with glossary mentions replaced by `⟨NEk⟩` tokens, plus the map back
/// to the entries. Ids are assigned 1..n in first-occurrence order and
/// repeated mentions reuse their id.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedText {
    pub text: String,
    pub map: BTreeMap<usize, GlossaryEntry>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TranslateError {
    #[error("glossary entry {index} has an empty source term")]
    EmptySourceTerm { index: usize },
    #[error("glossary source term {term:?} appears more than once")]
    DuplicateSourceTerm { term: String },
    #[error("glossary line {line}: {message}")]
    GlossaryFormat { line: usize, message: String },
    #[error("dictionary line {line}: {message}")]
    DictionaryFormat { line: usize, message: String },
    #[error(
        "backend broke placeholder integrity (missing ids: {missing:?}, extra ids: {extra:?})"
    )]
    PlaceholderIntegrity {
        missing: Vec<usize>,
        extra: Vec<usize>,
    },
    #[error("translated text references unknown placeholder id {id}")]
    UnknownPlaceholder { id: usize },
    #[error("backend error: {0}")]
    Backend(String),
}

/// Surface form of placeholder tokens: `<open><id><close>`. The default
/// `⟨NEk⟩` uses mathematical angle brackets, which are vanishingly rare in
/// news text; swap the affixes if a corpus does use them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderStyle {
    pub open: String,
    pub close: String,
}

impl Default for PlaceholderStyle {
    fn default() -> Self {
        Self {
            open: "⟨NE".to_string(),
            close: "⟩".to_string(),
        }
    }
}

impl PlaceholderStyle {
    fn token(&self, id: usize) -> String {
        format!("{}{id}{}", self.open, self.close)
    }

    /// If `chars[start..]` begins with a placeholder token, return (id,
    /// token length in chars).
    fn parse(&self, chars: &[char], start: usize) -> Option<(usize, usize)> {
        let rest = &chars[start..];
        let mut len = 0usize;
        for c in self.open.chars() {
            if rest.get(len) != Some(&c) {
                return None;
            }
            len += 1;
        }
        let mut id = 0usize;
        let mut digits = 0;
        while let Some(d) = rest.get(len).and_then(|c| c.to_digit(10)) {
            id = id * 10 + d as usize;
            len += 1;
            digits += 1;
        }
        if digits == 0 {
            return None;
        }
        for c in self.close.chars() {
            if rest.get(len) != Some(&c) {
                return None;
            }
            len += 1;
        }
        Some((id, len))
    }
}

/// Replace glossary mentions with placeholder tokens in the default style.
///
/// The scan is left-to-right and non-overlapping; at each position the
/// longest matching source term wins. Existing placeholder tokens in the
/// input are copied verbatim and never re-matched, which makes masking
/// idempotent on its own output.
pub fn mask_entities(text: &str, glossary: &Glossary) -> MaskedText {
    mask_entities_with(text, glossary, &PlaceholderStyle::default())
}

/// [`mask_entities`] with a custom placeholder style.
pub fn mask_entities_with(text: &str, glossary: &Glossary, style: &PlaceholderStyle) -> MaskedText {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut map: BTreeMap<usize, GlossaryEntry> = BTreeMap::new();
    let mut assigned: BTreeMap<&str, usize> = BTreeMap::new();
    let mut i = 0;
    while i < chars.len() {
        if let Some((_, token_len)) = style.parse(&chars, i) {
            out.extend(&chars[i..i + token_len]);
            i += token_len;
            continue;
        }
        let matched = glossary.by_length.iter().find_map(|&entry_idx| {
            let entry = &glossary.entries[entry_idx];
            let term: Vec<char> = entry.source_term.chars().collect();
            (chars[i..].starts_with(&term)).then_some((entry, term.len()))
        });
        match matched {
            Some((entry, term_len)) => {
                let next_id = assigned.len() + 1;
                let id = *assigned
                    .entry(entry.source_term.as_str())
                    .or_insert(next_id);
                map.entry(id).or_insert_with(|| entry.clone());
                out.push_str(&style.token(id));
                i += term_len;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    MaskedText { text: out, map }
}

/// Count placeholder occurrences per id.
fn placeholder_counts(text: &str, style: &PlaceholderStyle) -> BTreeMap<usize, usize> {
    let chars: Vec<char> = text.chars().collect();
    let mut counts = BTreeMap::new();
    let mut i = 0;
    while i < chars.len() {
        if let Some((id, len)) = style.parse(&chars, i) {
            *counts.entry(id).or_insert(0) += 1;
            i += len;
        } else {
            i += 1;
        }
    }
    counts
}

/// Translation backend contract: translate `text` from `src` to `tgt`,
/// carrying placeholder tokens through verbatim.
pub trait TranslationBackend {
    fn translate(&self, text: &str, src: &str, tgt: &str) -> Result<String, TranslateError>;
}

/// Passes text through unchanged. Used in tests and as the no-op backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityBackend;

impl TranslationBackend for IdentityBackend {
    fn translate(&self, text: &str, _src: &str, _tgt: &str) -> Result<String, TranslateError> {
        Ok(text.to_string())
    }
}

/// Phrase-table backend: replaces known source phrases longest-match-first,
/// left-to-right, passing everything else (including placeholders) through.
///
/// Output segments — translated phrases and passthrough runs — are joined
/// with a single space unless the boundary already has whitespace or the next
/// segment starts with closing punctuation, so `⟨NE1⟩⟨NE2⟩打入一球` with the
/// entry `打入一球 → scored a goal` becomes `⟨NE1⟩⟨NE2⟩ scored a goal`.
#[derive(Debug, Clone, Default)]
pub struct DictionaryBackend {
    /// (source chars, target) sorted by source length descending.
    entries: Vec<(Vec<char>, String)>,
}

impl DictionaryBackend {
    pub fn new(pairs: Vec<(String, String)>) -> Self {
        let mut entries: Vec<(Vec<char>, String)> = pairs
            .into_iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|(s, t)| (s.chars().collect(), t))
            .collect();
        entries.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
        Self { entries }
    }

    /// Parse the tab-separated phrase table.
    pub fn parse(input: &str) -> Result<Self, TranslateError> {
        let mut pairs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (source, target) =
                line.split_once('\t')
                    .ok_or_else(|| TranslateError::DictionaryFormat {
                        line: i + 1,
                        message: "expected 'source TAB target'".to_string(),
                    })?;
            pairs.push((source.trim().to_string(), target.trim().to_string()));
        }
        Ok(Self::new(pairs))
    }
}

fn no_space_before(c: char) -> bool {
    c.is_whitespace() || matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | ')' | ']' | '}' | '%')
}

fn no_space_after(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | '[' | '{')
}

impl TranslationBackend for DictionaryBackend {
    fn translate(&self, text: &str, _src: &str, _tgt: &str) -> Result<String, TranslateError> {
        let chars: Vec<char> = text.chars().collect();
        let mut segments: Vec<String> = Vec::new();
        let mut passthrough = String::new();
        let mut i = 0;
        while i < chars.len() {
            let hit = self
                .entries
                .iter()
                .find(|(source, _)| chars[i..].starts_with(source));
            match hit {
                Some((source, target)) => {
                    if !passthrough.is_empty() {
                        segments.push(std::mem::take(&mut passthrough));
                    }
                    segments.push(target.clone());
                    i += source.len();
                }
                None => {
                    passthrough.push(chars[i]);
                    i += 1;
                }
            }
        }
        if !passthrough.is_empty() {
            segments.push(passthrough);
        }
        let mut out = String::new();
        for segment in segments {
            if segment.is_empty() {
                continue;
            }
            let boundary_ok = out.chars().last().is_some_and(|c| !no_space_after(c))
                && segment.chars().next().is_some_and(|c| !no_space_before(c));
            if boundary_ok {
                out.push(' ');
            }
            out.push_str(&segment);
        }
        Ok(out)
    }
}

/// Run the backend over masked text and verify placeholder integrity: the
/// multiset of placeholder ids must be identical before and after.
pub fn translate_masked(
    masked: &MaskedText,
    backend: &dyn TranslationBackend,
    src: &str,
    tgt: &str,
) -> Result<String, TranslateError> {
    translate_masked_with(masked, backend, src, tgt, &PlaceholderStyle::default())
}

/// [`translate_masked`] with a custom placeholder style.
pub fn translate_masked_with(
    masked: &MaskedText,
    backend: &dyn TranslationBackend,
    src: &str,
    tgt: &str,
    style: &PlaceholderStyle,
) -> Result<String, TranslateError> {
    let before = placeholder_counts(&masked.text, style);
    let output = backend.translate(&masked.text, src, tgt)?;
    let after = placeholder_counts(&output, style);
    let mut missing = Vec::new();
    let mut extra = Vec::new();
    for (&id, &count) in &before {
        match after.get(&id) {
            Some(&c) if c == count => {}
            Some(&c) if c > count => extra.push(id),
            _ => missing.push(id),
        }
    }
    for &id in after.keys() {
        if !before.contains_key(&id) {
            extra.push(id);
        }
    }
    if !missing.is_empty() || !extra.is_empty() {
        return Err(TranslateError::PlaceholderIntegrity { missing, extra });
    }
    Ok(output)
}

/// True when two adjacent placeholder expansions need a separating space:
/// both boundary characters are alphanumeric in a script that uses spaces.
/// CJK text stays glued.
fn needs_space(left: char, right: char) -> bool {
    fn is_cjk(c: char) -> bool {
        matches!(
            c as u32,
            0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF
        )
    }
    left.is_alphanumeric() && right.is_alphanumeric() && !is_cjk(left) && !is_cjk(right)
}

/// Restore placeholders to their target-language terms. Every placeholder in
/// the text must exist in the map; the result contains no placeholders.
///
/// Directly adjacent placeholders get a single separating space when both
/// boundary characters are spaced-script alphanumerics, so `⟨NE1⟩⟨NE2⟩`
/// with targets `Espanyol` / `Didac` restores to `Espanyol Didac`.
pub fn unmask(
    translated: &str,
    map: &BTreeMap<usize, GlossaryEntry>,
) -> Result<String, TranslateError> {
    unmask_with(translated, map, &PlaceholderStyle::default())
}

/// [`unmask`] with a custom placeholder style.
pub fn unmask_with(
    translated: &str,
    map: &BTreeMap<usize, GlossaryEntry>,
    style: &PlaceholderStyle,
) -> Result<String, TranslateError> {
    let chars: Vec<char> = translated.chars().collect();
    let mut out = String::with_capacity(translated.len());
    let mut i = 0;
    let mut previous_was_placeholder = false;
    while i < chars.len() {
        if let Some((id, token_len)) = style.parse(&chars, i) {
            let entry = map
                .get(&id)
                .ok_or(TranslateError::UnknownPlaceholder { id })?;
            if previous_was_placeholder {
                if let (Some(left), Some(right)) =
                    (out.chars().last(), entry.target_term.chars().next())
                {
                    if needs_space(left, right) {
                        out.push(' ');
                    }
                }
            }
            out.push_str(&entry.target_term);
            previous_was_placeholder = true;
            i += token_len;
        } else {
            out.push(chars[i]);
            previous_was_placeholder = false;
            i += 1;
        }
    }
    Ok(out)
}

/// Convenience: mask, translate through the backend, and unmask.
pub fn translate_text(
    text: &str,
    glossary: &Glossary,
    backend: &dyn TranslationBackend,
    src: &str,
    tgt: &str,
) -> Result<String, TranslateError> {
    let masked = mask_entities(text, glossary);
    let translated = translate_masked(&masked, backend, src, tgt)?;
    unmask(&translated, &masked.map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_glossary() -> Glossary {
        Glossary::parse(
            "西班牙人\tEspanyol\tteam\n迪达克\tDidac\tplayer\n阿拉维斯\tAlavés\tteam\n穆巴拉克\tMubarak\tplayer\n",
        )
        .unwrap()
    }

    #[test]
    fn masks_table1_source_text() {
        let masked = mask_entities("西班牙人迪达克打入一球", &table1_glossary());
        assert_eq!(masked.text, "⟨NE1⟩⟨NE2⟩打入一球");
        assert_eq!(masked.map[&1].target_term, "Espanyol");
        assert_eq!(masked.map[&2].target_term, "Didac");
    }

    #[test]
    fn empty_glossary_is_identity_with_empty_map() {
        let glossary = Glossary::new(vec![]).unwrap();
        let masked = mask_entities("西班牙人迪达克打入一球", &glossary);
        assert_eq!(masked.text, "西班牙人迪达克打入一球");
        assert!(masked.map.is_empty());
    }

    #[test]
    fn longest_match_wins_on_overlap() {
        let glossary = Glossary::parse("AB\tab\tother\nB\tb\tother\n").unwrap();
        let masked = mask_entities("AB", &glossary);
        assert_eq!(masked.text, "⟨NE1⟩");
        assert_eq!(masked.map.len(), 1);
        assert_eq!(masked.map[&1].source_term, "AB");
    }

    #[test]
    fn repeated_mentions_reuse_ids() {
        let glossary = Glossary::parse("X\tEx\tteam\nY\tWhy\tteam\n").unwrap();
        let masked = mask_entities("X beat Y; X celebrated", &glossary);
        assert_eq!(masked.text, "⟨NE1⟩ beat ⟨NE2⟩; ⟨NE1⟩ celebrated");
        assert_eq!(masked.map.len(), 2);
    }

    #[test]
    fn masking_is_idempotent_on_its_own_output() {
        let glossary = table1_glossary();
        let once = mask_entities("西班牙人迪达克打入一球", &glossary);
        let twice = mask_entities(&once.text, &glossary);
        assert_eq!(twice.text, once.text);
        assert!(twice.map.is_empty());
    }

    #[test]
    fn identity_backend_round_trip_replaces_terms_only() {
        let glossary = table1_glossary();
        let text = "第23分钟，西班牙人 的迪达克打入一球。";
        let masked = mask_entities(text, &glossary);
        let translated = translate_masked(&masked, &IdentityBackend, "zh", "en").unwrap();
        let restored = unmask(&translated, &masked.map).unwrap();
        assert_eq!(restored, "第23分钟，Espanyol 的Didac打入一球。");
    }

    #[test]
    fn dictionary_backend_translates_around_placeholders() {
        let glossary = table1_glossary();
        let dict = DictionaryBackend::parse("打入一球\tscored a goal\n").unwrap();
        let masked = mask_entities("西班牙人迪达克打入一球", &glossary);
        let translated = translate_masked(&masked, &dict, "zh", "en").unwrap();
        assert_eq!(translated, "⟨NE1⟩⟨NE2⟩ scored a goal");
        let restored = unmask(&translated, &masked.map).unwrap();
        assert_eq!(restored, "Espanyol Didac scored a goal");
    }

    #[test]
    fn full_table1_sentence_translates() {
        let glossary = table1_glossary();
        let dict = DictionaryBackend::parse(
            "第23分钟，\tIn the 23rd minute,\n第35分钟，\tIn the 35th minute,\n\
             打入一球。\tscored a goal.\n吃到一张黄牌。\treceived a yellow card.\n",
        )
        .unwrap();
        let restored = translate_text(
            "第23分钟，西班牙人迪达克打入一球。",
            &glossary,
            &dict,
            "zh",
            "en",
        )
        .unwrap();
        assert_eq!(
            restored,
            "In the 23rd minute, Espanyol Didac scored a goal."
        );

        let restored = translate_text(
            "第35分钟，阿拉维斯穆巴拉克吃到一张黄牌。",
            &glossary,
            &dict,
            "zh",
            "en",
        )
        .unwrap();
        assert_eq!(
            restored,
            "In the 35th minute, Alavés Mubarak received a yellow card."
        );
    }

    fn token(id: usize) -> String {
        PlaceholderStyle::default().token(id)
    }

    struct DroppingBackend(usize);

    impl TranslationBackend for DroppingBackend {
        fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
            Ok(text.replace(&token(self.0), ""))
        }
    }

    struct DuplicatingBackend(usize);

    impl TranslationBackend for DuplicatingBackend {
        fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
            let t = token(self.0);
            Ok(text.replace(&t, &format!("{t}{t}")))
        }
    }

    #[test]
    fn dropped_placeholder_is_an_integrity_error() {
        let masked = mask_entities("西班牙人迪达克打入一球", &table1_glossary());
        let err = translate_masked(&masked, &DroppingBackend(2), "zh", "en").unwrap_err();
        assert_eq!(
            err,
            TranslateError::PlaceholderIntegrity {
                missing: vec![2],
                extra: vec![]
            }
        );
    }

    #[test]
    fn duplicated_placeholder_is_an_integrity_error() {
        let masked = mask_entities("西班牙人迪达克打入一球", &table1_glossary());
        let err = translate_masked(&masked, &DuplicatingBackend(1), "zh", "en").unwrap_err();
        assert_eq!(
            err,
            TranslateError::PlaceholderIntegrity {
                missing: vec![],
                extra: vec![1]
            }
        );
    }

    #[test]
    fn unmask_without_placeholders_is_identity() {
        let map = BTreeMap::new();
        assert_eq!(unmask("plain text", &map).unwrap(), "plain text");
    }

    #[test]
    fn unknown_placeholder_id_is_an_error() {
        let map = BTreeMap::new();
        assert_eq!(
            unmask("⟨NE9⟩", &map).unwrap_err(),
            TranslateError::UnknownPlaceholder { id: 9 }
        );
    }

    #[test]
    fn adjacent_cjk_targets_stay_glued() {
        let glossary =
            Glossary::parse("Espanyol\t西班牙人\tteam\nDidac\t迪达克\tplayer\n").unwrap();
        let restored = translate_text(
            "EspanyolDidac scored",
            &glossary,
            &IdentityBackend,
            "en",
            "zh",
        )
        .unwrap();
        assert_eq!(restored, "西班牙人迪达克 scored");
    }

    #[test]
    fn custom_placeholder_style_round_trips() {
        let style = PlaceholderStyle {
            open: "[[NE".to_string(),
            close: "]]".to_string(),
        };
        let glossary = table1_glossary();
        let masked = mask_entities_with("西班牙人迪达克打入一球", &glossary, &style);
        assert_eq!(masked.text, "[[NE1]][[NE2]]打入一球");
        let translated =
            translate_masked_with(&masked, &IdentityBackend, "zh", "en", &style).unwrap();
        let restored = unmask_with(&translated, &masked.map, &style).unwrap();
        assert_eq!(restored, "Espanyol Didac打入一球");
    }

    #[test]
    fn duplicate_glossary_terms_rejected() {
        let err = Glossary::parse("A\ta\tteam\nA\tb\tteam\n").unwrap_err();
        assert_eq!(
            err,
            TranslateError::DuplicateSourceTerm { term: "A".into() }
        );
    }

    #[test]
    fn empty_glossary_term_rejected() {
        let err = Glossary::new(vec![GlossaryEntry {
            source_term: String::new(),
            target_term: "x".into(),
            kind: EntryKind::Other,
        }])
        .unwrap_err();
        assert_eq!(err, TranslateError::EmptySourceTerm { index: 0 });
    }
}
