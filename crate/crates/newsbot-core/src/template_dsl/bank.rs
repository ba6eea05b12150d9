//! Keyed template collections.
//!
//! Bank file format: UTF-8 text where a line `[key]` opens a section and a
//! line containing only `---` separates alternative templates within it.
//! Everything else is template source; blocks are trimmed and blank blocks
//! are skipped. `#` is *not* a comment character here — templates use it for
//! directives.

use indexmap::IndexMap;

use super::{parse_template, TemplateError, TemplateProgram};
use crate::rng::SplitMix64;

/// Ordered key → alternative-templates map. Every key holds at least one
/// template.
#[derive(Debug, Clone, Default)]
pub struct TemplateBank {
    entries: IndexMap<String, Vec<TemplateProgram>>,
}

impl TemplateBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a bank file. `name` is used in error messages and template names.
    pub fn parse(input: &str, name: &str) -> Result<Self, TemplateError> {
        let mut bank = Self::new();
        let mut key: Option<String> = None;
        let mut block: Vec<&str> = Vec::new();
        let mut block_line = 0usize;

        let flush = |bank: &mut Self,
                     key: &Option<String>,
                     block: &mut Vec<&str>,
                     block_line: usize|
         -> Result<(), TemplateError> {
            let source = block.join("\n");
            block.clear();
            let source = source.trim();
            if source.is_empty() {
                return Ok(());
            }
            let key = key.as_ref().ok_or_else(|| TemplateError::Bank {
                name: name.to_string(),
                line: block_line,
                message: "template text before any [key] section".to_string(),
            })?;
            let templates = bank.entries.entry(key.clone()).or_default();
            let template_name = format!("{name}[{key}#{}]", templates.len());
            templates.push(parse_template(source, &template_name)?);
            Ok(())
        };

        for (index, line) in input.lines().enumerate() {
            let line_no = index + 1;
            let trimmed = line.trim();
            if trimmed.starts_with('[') && trimmed.ends_with(']') && trimmed.len() >= 2 {
                flush(&mut bank, &key, &mut block, block_line)?;
                if let Some(prev) = &key {
                    if bank.entries.get(prev).is_none_or(|t| t.is_empty()) {
                        return Err(TemplateError::Bank {
                            name: name.to_string(),
                            line: line_no,
                            message: format!("section {prev:?} has no templates"),
                        });
                    }
                }
                let new_key = trimmed[1..trimmed.len() - 1].trim().to_string();
                if new_key.is_empty() {
                    return Err(TemplateError::Bank {
                        name: name.to_string(),
                        line: line_no,
                        message: "empty section key".to_string(),
                    });
                }
                if bank.entries.contains_key(&new_key) {
                    return Err(TemplateError::Bank {
                        name: name.to_string(),
                        line: line_no,
                        message: format!("duplicate section key {new_key:?}"),
                    });
                }
                key = Some(new_key);
                block_line = line_no + 1;
            } else if trimmed == "---" {
                flush(&mut bank, &key, &mut block, block_line)?;
                block_line = line_no + 1;
            } else {
                if block.is_empty() {
                    block_line = line_no;
                }
                block.push(line);
            }
        }
        flush(&mut bank, &key, &mut block, block_line)?;
        if let Some(prev) = &key {
            if bank.entries.get(prev).is_none_or(|t| t.is_empty()) {
                return Err(TemplateError::Bank {
                    name: name.to_string(),
                    line: input.lines().count(),
                    message: format!("section {prev:?} has no templates"),
                });
            }
        }
        Ok(bank)
    }

    /// Add a parsed template under a key.
    pub fn push(&mut self, key: &str, template: TemplateProgram) {
        self.entries
            .entry(key.to_string())
            .or_default()
            .push(template);
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn templates(&self, key: &str) -> Option<&[TemplateProgram]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Pick one of the key's templates uniformly at random.
    ///
    /// Exactly one `u64` is drawn from the stream per call (the unbiased
    /// bounded draw retries only in the astronomically rare rejection case),
    /// so a fixed seed and call sequence reproduce the same choices on every
    /// platform. A key with a single template returns it for any seed.
    pub fn select<'a>(
        &'a self,
        key: &str,
        rng: &mut SplitMix64,
    ) -> Result<&'a TemplateProgram, TemplateError> {
        let templates = self
            .entries
            .get(key)
            .ok_or_else(|| TemplateError::MissingKey {
                key: key.to_string(),
            })?;
        let index = rng.next_bounded(templates.len() as u64) as usize;
        Ok(&templates[index])
    }
}
