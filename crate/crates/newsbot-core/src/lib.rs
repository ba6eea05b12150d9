//! Building blocks for a table-to-news robot reporter.
//!
//! The crate turns structured match-event tables into a news article, condenses
//! the article into a summary, translates it with glossary-aware entity
//! masking, converts the result into a phoneme timeline and finally predicts
//! per-frame mouth blendshape weights for an animated reader.
//!
//! Modules follow the pipeline order:
//!
//! * [`event_model`] — event ingestion and match-fact normalization
//! * [`template_dsl`] — the generation template language (parser + renderer)
//! * [`news_gen`] — sentence strategies and article assembly
//! * [`summarizer`] — extractive sentence selection
//! * [`translator`] — named-entity placeholder translation
//! * [`phoneme_timeline`] — lexicon lookup and frame sampling
//! * [`lipsync`] — the sliding-window blendshape network
//!
//! Everything is deterministic: random choices draw from [`rng::SplitMix64`]
//! streams seeded by the caller, never from wall-clock entropy.

pub mod event_model;
pub mod lipsync;
pub mod news_gen;
pub mod phoneme_timeline;
pub mod rng;
pub mod summarizer;
pub mod template_dsl;
pub mod translator;
