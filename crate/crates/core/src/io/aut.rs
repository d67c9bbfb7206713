//! Aldebaran `.aut` files.
//!
//! ```text
//! des (0, 3, 3)
//! (0, "a", 1)
//! (0, b, 2)
//! (1, "send(x, y)", 2)
//! ```
//!
//! The header gives the initial state, the number of transitions and the
//! number of states. Each body line is one transition; the label is either a
//! double-quoted string (`\"` and `\\` are unescaped) or a bare token free of
//! commas, parentheses and quotes. Blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write;

use super::ParseError;
use crate::lts::{Lts, RawLts};

/// A parsed `.aut` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutDocument {
    /// Recorded but not used: the simulation is computed over all states.
    pub first_state: usize,
    pub lts: RawLts,
}

impl AutDocument {
    pub fn declared_states(&self) -> usize {
        self.lts.num_states
    }

    pub fn declared_transitions(&self) -> usize {
        self.lts.transitions.len()
    }
}

pub fn parse_aut(text: &str) -> Result<AutDocument, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (header_line, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or_else(|| {
        ParseError::new(
            1,
            "empty file, expected header `des (first, transitions, states)`",
        )
    })?;
    let (first_state, declared, num_states) =
        parse_header(header).map_err(|m| ParseError::new(header_line, m))?;
    if first_state >= num_states {
        return Err(ParseError::new(
            header_line,
            format!("initial state {first_state} out of range ({num_states} states)"),
        ));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    let mut transitions = Vec::with_capacity(declared.min(1 << 20));
    let mut last_line = header_line;
    for (line, body) in lines {
        last_line = line;
        if body.is_empty() {
            continue;
        }
        if transitions.len() == declared {
            return Err(ParseError::new(
                line,
                format!("expected {declared} transitions, found an extra one"),
            ));
        }
        let (source, label, target) =
            parse_transition(body).map_err(|m| ParseError::new(line, m))?;
        for state in [source, target] {
            if state >= num_states {
                return Err(ParseError::new(
                    line,
                    format!("state {state} out of range ({num_states} states)"),
                ));
            }
        }
        let id = *label_ids.entry(label).or_insert_with_key(|l| {
            labels.push(l.clone());
            labels.len() - 1
        });
        transitions.push((source, id, target));
    }
    if transitions.len() != declared {
        return Err(ParseError::new(
            last_line,
            format!(
                "expected {declared} transitions, found {} at EOF",
                transitions.len()
            ),
        ));
    }
    Ok(AutDocument {
        first_state,
        lts: RawLts {
            num_states,
            labels,
            transitions,
            state_names: None,
        },
    })
}

fn parse_header(line: &str) -> Result<(usize, usize, usize), String> {
    let malformed =
        || format!("malformed header `{line}`, expected `des (first, transitions, states)`");
    let rest = line.strip_prefix("des").ok_or_else(malformed)?.trim_start();
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(malformed)?;
    let fields: Vec<&str> = inner.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(malformed());
    }
    let number = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("header {what} `{s}` is not a non-negative integer"))
    };
    Ok((
        number(fields[0], "initial state")?,
        number(fields[1], "transition count")?,
        number(fields[2], "state count")?,
    ))
}

fn parse_transition(line: &str) -> Result<(usize, String, usize), String> {
    let inner = line
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("malformed transition `{line}`, expected `(from, label, to)`"))?;
    let (source, rest) = inner
        .split_once(',')
        .ok_or_else(|| format!("malformed transition `{line}`, expected `(from, label, to)`"))?;
    let source = parse_state(source)?;
    let rest = rest.trim_start();

    let (label, rest) = if let Some(quoted) = rest.strip_prefix('"') {
        let mut label = String::new();
        let mut chars = quoted.char_indices();
        let end = loop {
            match chars.next() {
                None => return Err(format!("unterminated label in `{line}`")),
                Some((i, '"')) => break i,
                Some((_, '\\')) => match chars.next() {
                    Some((_, c @ ('"' | '\\'))) => label.push(c),
                    Some((_, c)) => {
                        label.push('\\');
                        label.push(c);
                    }
                    None => return Err(format!("unterminated label in `{line}`")),
                },
                Some((_, c)) => label.push(c),
            }
        };
        (label, &quoted[end + 1..])
    } else {
        let end = rest.find(',').unwrap_or(rest.len());
        let token = rest[..end].trim();
        if token.is_empty() {
            return Err(format!("missing label in `{line}`"));
        }
        if token.contains(['(', ')', '"']) || token.contains(char::is_whitespace) {
            return Err(format!("bare label `{token}` must be quoted"));
        }
        (token.to_string(), &rest[end..])
    };

    let target = rest.trim_start().strip_prefix(',').ok_or_else(|| {
        format!("malformed transition `{line}`, expected `, to)` after the label")
    })?;
    Ok((source, label, parse_state(target)?))
}

fn parse_state(s: &str) -> Result<usize, String> {
    let s = s.trim();
    s.parse()
        .map_err(|_| format!("state `{s}` is not a non-negative integer"))
}

fn quote(label: &str) -> String {
    let mut out = String::with_capacity(label.len() + 2);
    out.push('"');
    for c in label.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Writes a normalized LTS with states numbered by their dense index,
/// initial state 0, labels quoted, transitions sorted by
/// `(from, label, to)`.
pub fn emit_aut(lts: &Lts) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "des (0, {}, {})",
        lts.num_transitions(),
        lts.num_states()
    )
    .unwrap();
    let quoted: Vec<String> = lts.labels().iter().map(|l| quote(l)).collect();
    for t in lts.transitions() {
        writeln!(out, "({}, {}, {})", t.source, quoted[t.label], t.target).unwrap();
    }
    out
}

/// Writes a raw LTS as is: declared states, transition order and
/// duplicates are kept.
pub fn emit_raw_aut(first_state: usize, raw: &RawLts) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "des ({first_state}, {}, {})",
        raw.transitions.len(),
        raw.num_states
    )
    .unwrap();
    let quoted: Vec<String> = raw.labels.iter().map(|l| quote(l)).collect();
    for &(source, label, target) in &raw.transitions {
        writeln!(out, "({source}, {}, {target})", quoted[label]).unwrap();
    }
    out
}
