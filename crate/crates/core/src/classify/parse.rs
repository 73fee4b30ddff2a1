use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cellsim::GarmentClass;

use super::RawResponse;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    NotAClass,
    MultiWord,
    EmptyText,
    /// The backend never answered; only produced by evaluation bookkeeping.
    Transport,
}

impl InvalidReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::NotAClass => "not_a_class",
            InvalidReason::MultiWord => "multi_word",
            InvalidReason::EmptyText => "empty_text",
            InvalidReason::Transport => "transport",
        }
    }
}

/// Scored outcome of one response. Serialized as the class name or as
/// `invalid(<reason>)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ParsedLabel {
    Valid(GarmentClass),
    Invalid(InvalidReason),
}

impl ParsedLabel {
    pub fn class(self) -> Option<GarmentClass> {
        match self {
            ParsedLabel::Valid(c) => Some(c),
            ParsedLabel::Invalid(_) => None,
        }
    }

    pub fn is_valid(self) -> bool {
        matches!(self, ParsedLabel::Valid(_))
    }
}

impl fmt::Display for ParsedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedLabel::Valid(c) => f.write_str(c.as_str()),
            ParsedLabel::Invalid(r) => write!(f, "invalid({})", r.as_str()),
        }
    }
}

impl From<ParsedLabel> for String {
    fn from(l: ParsedLabel) -> String {
        l.to_string()
    }
}

impl FromStr for ParsedLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(reason) = s.strip_prefix("invalid(").and_then(|r| r.strip_suffix(')')) {
            let r = [
                InvalidReason::NotAClass,
                InvalidReason::MultiWord,
                InvalidReason::EmptyText,
                InvalidReason::Transport,
            ]
            .into_iter()
            .find(|r| r.as_str() == reason)
            .ok_or_else(|| format!("unknown invalid reason '{reason}'"))?;
            return Ok(ParsedLabel::Invalid(r));
        }
        s.parse::<GarmentClass>()
            .map(ParsedLabel::Valid)
            .map_err(|e| e.to_string())
    }
}

impl TryFrom<String> for ParsedLabel {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    /// Strip ASCII punctuation around the word before matching.
    pub lenient_punctuation: bool,
}

/// Strict single-word scoring.
pub fn parse_response(raw: &RawResponse) -> ParsedLabel {
    parse_text(&raw.text, ParseOptions::default())
}

pub fn parse_response_with(raw: &RawResponse, opts: ParseOptions) -> ParsedLabel {
    parse_text(&raw.text, opts)
}

pub fn parse_text(text: &str, opts: ParseOptions) -> ParsedLabel {
    let mut t = text.trim();
    if opts.lenient_punctuation {
        t = t.trim_matches(|c: char| c.is_ascii_punctuation()).trim();
    }
    if t.is_empty() {
        return ParsedLabel::Invalid(InvalidReason::EmptyText);
    }
    if t.chars().any(char::is_whitespace) {
        return ParsedLabel::Invalid(InvalidReason::MultiWord);
    }
    match t.to_lowercase().parse::<GarmentClass>() {
        Ok(c) => ParsedLabel::Valid(c),
        Err(_) => ParsedLabel::Invalid(InvalidReason::NotAClass),
    }
}
