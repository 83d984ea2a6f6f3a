use std::fmt;

use super::ParseError;

pub const MESSAGE_START: &str = "$$MESSAGE_START$$";
pub const MESSAGE_END: &str = "$$MESSAGE_END$$";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeErrorKind {
    MissingStart,
    MissingEnd,
    EndBeforeStart,
    Empty,
}

impl fmt::Display for EnvelopeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvelopeErrorKind::MissingStart => "missing $$MESSAGE_START$$",
            EnvelopeErrorKind::MissingEnd => "missing $$MESSAGE_END$$",
            EnvelopeErrorKind::EndBeforeStart => "$$MESSAGE_END$$ appears before $$MESSAGE_START$$",
            EnvelopeErrorKind::Empty => "nothing between the delimiters",
        })
    }
}

/// The payload between the first start delimiter and the next end
/// delimiter. Anything outside (reasoning, quotes) is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    inner: String,
}

impl Envelope {
    pub fn inner_text(&self) -> &str {
        &self.inner
    }

    /// Wraps already-extracted text, e.g. for round-trip tests.
    pub fn from_inner(inner: impl Into<String>) -> Self {
        Envelope { inner: inner.into() }
    }
}

fn trim_edges(mut s: &str) -> &str {
    loop {
        let before = s.len();
        s = s.trim();
        for esc in ["\\n", "\\r", "\\t"] {
            s = s.strip_prefix(esc).unwrap_or(s);
            s = s.strip_suffix(esc).unwrap_or(s);
        }
        if s.len() == before {
            return s;
        }
    }
}

pub fn extract_envelope(raw: &str) -> Result<Envelope, ParseError> {
    let Some(start) = raw.find(MESSAGE_START) else {
        return Err(ParseError::Envelope(if raw.contains(MESSAGE_END) {
            EnvelopeErrorKind::EndBeforeStart
        } else {
            EnvelopeErrorKind::MissingStart
        }));
    };
    let body_start = start + MESSAGE_START.len();
    let Some(len) = raw[body_start..].find(MESSAGE_END) else {
        return Err(ParseError::Envelope(if raw[..start].contains(MESSAGE_END) {
            EnvelopeErrorKind::EndBeforeStart
        } else {
            EnvelopeErrorKind::MissingEnd
        }));
    };
    let inner = trim_edges(&raw[body_start..body_start + len]);
    if inner.is_empty() {
        return Err(ParseError::Envelope(EnvelopeErrorKind::Empty));
    }
    Ok(Envelope { inner: inner.to_string() })
}

pub fn wrap_envelope(inner: &str) -> String {
    format!("{MESSAGE_START}{inner}{MESSAGE_END}")
}
