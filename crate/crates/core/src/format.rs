//! The line-oriented automaton document format.
//!
//! ```text
//! states: <id> <id> ...
//! initial: <id> ...
//! event: <id> <label-or-.>     # one line per event
//! trans: <state> <event> <state>
//! ```
//!
//! `#` starts a comment, blank lines are ignored, sections may appear in any
//! order. `states`, `initial` and at least one `event` line are mandatory.

use thiserror::Error;

use crate::lsts::{Label, Lsts, ModelError, EPSILON_TOKEN};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared state {id:?}")]
    UndeclaredState { line: usize, id: String },
    #[error("line {line}: undeclared event {id:?}")]
    UndeclaredEvent { line: usize, id: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("missing mandatory section `{0}`")]
    MissingSection(&'static str),
    #[error("{0}")]
    Model(#[from] ModelError),
}

/// Strips the comment and returns the meaningful part of a line, if any.
pub(crate) fn effective_line(raw: &str) -> Option<&str> {
    let line = match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    }
    .trim();
    if line.is_empty() {
        None
    } else {
        Some(line)
    }
}

pub(crate) fn split_section(line: &str) -> Option<(&str, &str)> {
    let pos = line.find(':')?;
    Some((line[..pos].trim(), line[pos + 1..].trim()))
}

/// Parses an automaton document.
pub fn parse_lsts(text: &str) -> Result<Lsts, ParseError> {
    let mut builder = Lsts::builder();
    let mut saw_states = false;
    let mut saw_initial = false;
    let mut saw_event = false;

    let mut declared_states: Vec<(String, usize)> = Vec::new();
    let mut declared_events: Vec<(String, usize)> = Vec::new();
    let mut trans_lines: Vec<(usize, String, String, String)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match effective_line(raw) {
            Some(l) => l,
            None => continue,
        };
        let (section, rest) = split_section(line).ok_or_else(|| ParseError::Syntax {
            line: lineno,
            msg: format!("expected `<section>: ...`, got {line:?}"),
        })?;
        match section {
            "states" => {
                saw_states = true;
                for id in rest.split_whitespace() {
                    if declared_states.iter().any(|(s, _)| s == id) {
                        return Err(ParseError::DuplicateId {
                            line: lineno,
                            id: id.to_owned(),
                        });
                    }
                    declared_states.push((id.to_owned(), lineno));
                    builder.state(id);
                }
            }
            "initial" => {
                saw_initial = true;
                for id in rest.split_whitespace() {
                    builder.initial(id);
                }
            }
            "event" => {
                saw_event = true;
                let mut parts = rest.split_whitespace();
                let (id, token) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(id), Some(token), None) => (id, token),
                    _ => {
                        return Err(ParseError::Syntax {
                            line: lineno,
                            msg: "expected `event: <id> <label-or-.>`".to_owned(),
                        })
                    }
                };
                if declared_events.iter().any(|(e, _)| e == id) {
                    return Err(ParseError::DuplicateId {
                        line: lineno,
                        id: id.to_owned(),
                    });
                }
                declared_events.push((id.to_owned(), lineno));
                let label = if token == EPSILON_TOKEN {
                    Label::Epsilon
                } else {
                    Label::symbol(token)
                };
                builder.event(id, label);
            }
            "trans" => {
                let mut parts = rest.split_whitespace();
                match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(x), Some(e), Some(y), None) => {
                        trans_lines.push((lineno, x.to_owned(), e.to_owned(), y.to_owned()));
                        builder.transition(x, e, y);
                    }
                    _ => {
                        return Err(ParseError::Syntax {
                            line: lineno,
                            msg: "expected `trans: <state> <event> <state>`".to_owned(),
                        })
                    }
                }
            }
            other => {
                return Err(ParseError::Syntax {
                    line: lineno,
                    msg: format!("unknown section {other:?}"),
                })
            }
        }
    }

    if !saw_states {
        return Err(ParseError::MissingSection("states"));
    }
    if !saw_initial {
        return Err(ParseError::MissingSection("initial"));
    }
    if !saw_event {
        return Err(ParseError::MissingSection("event"));
    }

    builder.build().map_err(|e| match &e {
        ModelError::UndeclaredState(id) => {
            let line = trans_lines
                .iter()
                .find(|(_, x, _, y)| x == id || y == id)
                .map(|(l, ..)| *l)
                .unwrap_or(0);
            ParseError::UndeclaredState {
                line,
                id: id.clone(),
            }
        }
        ModelError::UndeclaredEvent(id) => {
            let line = trans_lines
                .iter()
                .find(|(_, _, ev, _)| ev == id)
                .map(|(l, ..)| *l)
                .unwrap_or(0);
            ParseError::UndeclaredEvent {
                line,
                id: id.clone(),
            }
        }
        _ => ParseError::Model(e),
    })
}

/// Serializes to the canonical document: sorted ids, one event or transition
/// per line, trailing newline.
pub fn serialize_lsts(m: &Lsts) -> String {
    let mut out = String::new();
    out.push_str("states:");
    for s in m.states() {
        out.push(' ');
        out.push_str(s);
    }
    out.push('\n');
    out.push_str("initial:");
    for s in m.initial_ids() {
        out.push(' ');
        out.push_str(s);
    }
    out.push('\n');
    for (i, e) in m.events().iter().enumerate() {
        out.push_str("event: ");
        out.push_str(e);
        out.push(' ');
        out.push_str(m.label(i).token());
        out.push('\n');
    }
    for (x, e, y) in m.transitions() {
        out.push_str("trans: ");
        out.push_str(m.state_id(x));
        out.push(' ');
        out.push_str(m.event_id(e));
        out.push(' ');
        out.push_str(m.state_id(y));
        out.push('\n');
    }
    out
}
