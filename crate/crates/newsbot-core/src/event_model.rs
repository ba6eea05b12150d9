//! Match-event ingestion and key-value normalization.
//!
//! Raw input is a UTF-8 delimited table, one event per record:
//! `time,category,player,team[,attributes]` where `time` is `23'` or `23`
//! (both the ASCII apostrophe and the typographic `’` are accepted) and
//! `attributes` is a semicolon-separated list of `key=value` pairs. A header
//! row starting with `time` is skipped when present.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Event categories the generator knows templates for. Anything else is
/// carried through as `Other` with the raw tag preserved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventCategory {
    Score,
    YellowCard,
    RedCard,
    Foul,
    Substitution,
    Other(String),
}

impl EventCategory {
    /// Parse a category cell. Matching ignores case and interior whitespace,
    /// so `Yellow Card`, `yellow card` and `YellowCard` are all the same tag.
    pub fn parse(raw: &str) -> Self {
        let folded: String = raw
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        match folded.as_str() {
            "score" => Self::Score,
            "yellowcard" => Self::YellowCard,
            "redcard" => Self::RedCard,
            "foul" => Self::Foul,
            "substitution" => Self::Substitution,
            _ => Self::Other(raw.trim().to_string()),
        }
    }

    /// Canonical bank key for this category (`score`, `yellow_card`, ...).
    /// `Other` tags are lowercased with whitespace folded to underscores.
    pub fn bank_key(&self) -> String {
        match self {
            Self::Score => "score".into(),
            Self::YellowCard => "yellow_card".into(),
            Self::RedCard => "red_card".into(),
            Self::Foul => "foul".into(),
            Self::Substitution => "substitution".into(),
            Self::Other(tag) => tag
                .split_whitespace()
                .collect::<Vec<_>>()
                .join("_")
                .to_lowercase(),
        }
    }
}

/// Category with the `Other` payload erased; used wherever behaviour depends
/// only on the kind of event (inclusion filters, importance weights).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CategoryKind {
    Score,
    YellowCard,
    RedCard,
    Foul,
    Substitution,
    Other,
}

impl CategoryKind {
    pub const ALL: [CategoryKind; 6] = [
        CategoryKind::Score,
        CategoryKind::YellowCard,
        CategoryKind::RedCard,
        CategoryKind::Foul,
        CategoryKind::Substitution,
        CategoryKind::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoryKind::Score => "score",
            CategoryKind::YellowCard => "yellow_card",
            CategoryKind::RedCard => "red_card",
            CategoryKind::Foul => "foul",
            CategoryKind::Substitution => "substitution",
            CategoryKind::Other => "other",
        }
    }

    /// Parse a kind name as used in config files (`score`, `yellow_card`, ...).
    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name.trim().to_lowercase())
    }
}

impl EventCategory {
    pub fn kind(&self) -> CategoryKind {
        match self {
            Self::Score => CategoryKind::Score,
            Self::YellowCard => CategoryKind::YellowCard,
            Self::RedCard => CategoryKind::RedCard,
            Self::Foul => CategoryKind::Foul,
            Self::Substitution => CategoryKind::Substitution,
            Self::Other(_) => CategoryKind::Other,
        }
    }
}

impl fmt::Display for EventCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Score => write!(f, "Score"),
            Self::YellowCard => write!(f, "Yellow Card"),
            Self::RedCard => write!(f, "Red Card"),
            Self::Foul => write!(f, "Foul"),
            Self::Substitution => write!(f, "Substitution"),
            Self::Other(tag) => write!(f, "{tag}"),
        }
    }
}

/// One timestamped match event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time_minute: u32,
    pub category: EventCategory,
    pub player: String,
    pub team: String,
    /// Insertion-ordered extra columns (`player_zh`, `assist`, ...).
    pub attributes: IndexMap<String, String>,
}

/// A prior result between two teams; opaque pass-through data for pre-match
/// templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryRecord {
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
    pub date: String,
}

impl HistoryRecord {
    pub fn score_text(&self) -> String {
        format!("{}-{}", self.home_goals, self.away_goals)
    }
}

/// Normalized key-value facts derived from the event table.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchFacts {
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
    /// Absent iff the match is a draw.
    pub winning_team: Option<String>,
    pub losing_team: Option<String>,
    /// `"home-away"` score text; omitted for draws.
    pub winning_score: Option<String>,
    pub score_diff: u32,
    pub history: Vec<HistoryRecord>,
}

#[derive(Debug, Error, PartialEq)]
pub enum EventError {
    #[error("row {row}: expected at least 4 fields (time, category, player, team), found {found}")]
    TooFewFields { row: usize, found: usize },
    #[error("row {row}: expected at most 5 fields, found {found}")]
    TooManyFields { row: usize, found: usize },
    #[error("row {row}: malformed time field {value:?}")]
    MalformedTime { row: usize, value: String },
    #[error("row {row}: {field} must be non-empty")]
    EmptyField { row: usize, field: &'static str },
    #[error("row {row}: malformed attribute {value:?} (expected key=value)")]
    MalformedAttribute { row: usize, value: String },
    #[error("event references unknown team {team:?} (teams are {home:?} and {away:?})")]
    UnknownTeam {
        team: String,
        home: String,
        away: String,
    },
    #[error("home and away team must differ, both are {0:?}")]
    SameTeams(String),
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("{context}: value {value:?} contains a reserved character")]
    ReservedCharacter {
        context: &'static str,
        value: String,
    },
}

fn parse_time(raw: &str, row: usize) -> Result<u32, EventError> {
    let trimmed = raw.trim();
    let digits = trimmed
        .strip_suffix('\'')
        .or_else(|| trimmed.strip_suffix('’'))
        .unwrap_or(trimmed);
    digits
        .parse::<u32>()
        .map_err(|_| EventError::MalformedTime {
            row,
            value: raw.to_string(),
        })
}

fn parse_attributes(raw: &str, row: usize) -> Result<IndexMap<String, String>, EventError> {
    let mut map = IndexMap::new();
    for pair in raw.split(';') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (key, value) = pair.split_once('=').ok_or(EventError::MalformedAttribute {
            row,
            value: pair.to_string(),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Parse an event table from delimited text. Row numbers in errors are
/// 1-based and count every input record, including a skipped header.
pub fn parse_events(input: &str) -> Result<Vec<EventRecord>, EventError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input.as_bytes());

    let mut events = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| EventError::Csv(e.to_string()))?;
        if index == 0 && is_header(&record) {
            continue;
        }
        if record.len() < 4 {
            // A lone empty line yields a single empty field; ignore it.
            if record.len() == 1 && record[0].trim().is_empty() {
                continue;
            }
            return Err(EventError::TooFewFields {
                row,
                found: record.len(),
            });
        }
        if record.len() > 5 {
            return Err(EventError::TooManyFields {
                row,
                found: record.len(),
            });
        }
        let time_minute = parse_time(&record[0], row)?;
        let category = EventCategory::parse(&record[1]);
        let player = record[2].trim().to_string();
        if player.is_empty() {
            return Err(EventError::EmptyField {
                row,
                field: "player",
            });
        }
        let team = record[3].trim().to_string();
        if team.is_empty() {
            return Err(EventError::EmptyField { row, field: "team" });
        }
        let attributes = match record.get(4) {
            Some(raw) => parse_attributes(raw, row)?,
            None => IndexMap::new(),
        };
        events.push(EventRecord {
            time_minute,
            category,
            player,
            team,
            attributes,
        });
    }
    Ok(events)
}

fn is_header(record: &csv::StringRecord) -> bool {
    record
        .get(0)
        .is_some_and(|f| f.trim().eq_ignore_ascii_case("time"))
}

/// Serialize events back to the delimited format read by [`parse_events`],
/// including the canonical header row. Attribute keys and values must not
/// contain `;`, `=` or newlines.
pub fn serialize_events(events: &[EventRecord]) -> Result<String, EventError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["time", "category", "player", "team", "attributes"])
        .map_err(|e| EventError::Csv(e.to_string()))?;
    for event in events {
        let mut attrs = String::new();
        for (i, (key, value)) in event.attributes.iter().enumerate() {
            for part in [key, value] {
                if part.contains([';', '=', '\n', '\r']) {
                    return Err(EventError::ReservedCharacter {
                        context: "attribute",
                        value: part.clone(),
                    });
                }
            }
            if i > 0 {
                attrs.push(';');
            }
            attrs.push_str(key);
            attrs.push('=');
            attrs.push_str(value);
        }
        writer
            .write_record([
                &format!("{}'", event.time_minute),
                &event.category.to_string(),
                &event.player,
                &event.team,
                &attrs,
            ])
            .map_err(|e| EventError::Csv(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| EventError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Parse a history table: `home,away,home_goals,away_goals,date` per record,
/// optional header (first field `home`).
pub fn parse_history(input: &str) -> Result<Vec<HistoryRecord>, EventError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input.as_bytes());
    let mut records = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| EventError::Csv(e.to_string()))?;
        if index == 0
            && record
                .get(0)
                .is_some_and(|f| f.trim().eq_ignore_ascii_case("home"))
        {
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() < 5 {
            return Err(EventError::TooFewFields {
                row,
                found: record.len(),
            });
        }
        let goals = |i: usize| -> Result<u32, EventError> {
            record[i]
                .trim()
                .parse::<u32>()
                .map_err(|_| EventError::MalformedTime {
                    row,
                    value: record[i].to_string(),
                })
        };
        records.push(HistoryRecord {
            home_team: record[0].trim().to_string(),
            away_team: record[1].trim().to_string(),
            home_goals: goals(2)?,
            away_goals: goals(3)?,
            date: record[4].trim().to_string(),
        });
    }
    Ok(records)
}

/// Derive normalized match facts from the event list.
///
/// Goal counts come from `Score` events only; each `Score` event credits the
/// team named on the event. Every event must belong to one of the two teams.
pub fn normalize_facts(
    events: &[EventRecord],
    home: &str,
    away: &str,
    history: Vec<HistoryRecord>,
) -> Result<MatchFacts, EventError> {
    if home == away {
        return Err(EventError::SameTeams(home.to_string()));
    }
    let mut home_goals = 0u32;
    let mut away_goals = 0u32;
    for event in events {
        let is_home = event.team == home;
        let is_away = event.team == away;
        if !is_home && !is_away {
            return Err(EventError::UnknownTeam {
                team: event.team.clone(),
                home: home.to_string(),
                away: away.to_string(),
            });
        }
        if event.category == EventCategory::Score {
            if is_home {
                home_goals += 1;
            } else {
                away_goals += 1;
            }
        }
    }
    let (winning_team, losing_team, winning_score) = if home_goals > away_goals {
        (
            Some(home.to_string()),
            Some(away.to_string()),
            Some(format!("{home_goals}-{away_goals}")),
        )
    } else if away_goals > home_goals {
        (
            Some(away.to_string()),
            Some(home.to_string()),
            Some(format!("{home_goals}-{away_goals}")),
        )
    } else {
        (None, None, None)
    };
    Ok(MatchFacts {
        home_team: home.to_string(),
        away_team: away.to_string(),
        home_goals,
        away_goals,
        winning_team,
        losing_team,
        winning_score,
        score_diff: home_goals.abs_diff(away_goals),
        history,
    })
}
