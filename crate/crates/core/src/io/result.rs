//! The result document.
//!
//! ```text
//! simrel-result v1
//! B0: q0
//! B1: q1
//! R:
//! 0 0
//! 1 0
//! 1 1
//! stats:
//! while_iterations=1
//! …
//! ```
//!
//! Blocks are numbered by their smallest member state and list their members
//! by name in state order. A line `i j` under `R:` means every state of
//! `Bj` simulates every state of `Bi`; reflexive pairs are listed. An
//! optional `pairs:` section expands `R` to state names, one `q r` line per
//! pair (`r` simulates `q`). The statistics come last; everything before
//! the `stats:` line is the *canonical* part, which depends only on the
//! computed relation and not on the strategy that computed it.
//!
//! State names must not contain whitespace for the document to parse back.

use std::fmt::Write;

use super::ParseError;
use crate::lts::Lts;
use crate::sim::SimResult;

pub const HEADER: &str = "simrel-result v1";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultDocument {
    /// Member names of each block, in canonical block order.
    pub blocks: Vec<Vec<String>>,
    /// Sorted canonical block pairs.
    pub pairs: Vec<(usize, usize)>,
    /// State-level pairs, present when expansion was requested.
    pub expanded: Option<Vec<(String, String)>>,
    pub stats: Vec<(String, u64)>,
}

impl ResultDocument {
    pub fn from_result(result: &SimResult, lts: &Lts, expand: bool) -> Self {
        let mut internal = result.blocks();
        for members in &mut internal {
            members.sort_unstable();
        }
        let mut order: Vec<usize> = (0..internal.len()).collect();
        order.sort_by_key(|&b| internal[b][0]);
        let mut canonical_id = vec![0; internal.len()];
        for (k, &b) in order.iter().enumerate() {
            canonical_id[b] = k;
        }

        let mut pairs: Vec<(usize, usize)> = result
            .relation_pairs()
            .into_iter()
            .map(|(b, c)| (canonical_id[b], canonical_id[c]))
            .collect();
        pairs.sort_unstable();

        let names = |members: &[usize]| {
            members
                .iter()
                .map(|&q| lts.state_name(q).to_string())
                .collect()
        };
        let blocks: Vec<Vec<String>> = order.iter().map(|&b| names(&internal[b])).collect();

        let expanded = expand.then(|| {
            let rel = result.induced_relation();
            rel.pairs()
                .map(|(q, r)| (lts.state_name(q).to_string(), lts.state_name(r).to_string()))
                .collect()
        });

        let stats = result
            .stats
            .fields()
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        ResultDocument {
            blocks,
            pairs,
            expanded,
            stats,
        }
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for (k, members) in self.blocks.iter().enumerate() {
            write!(out, "B{k}:").unwrap();
            for name in members {
                write!(out, " {name}").unwrap();
            }
            out.push('\n');
        }
        out.push_str("R:\n");
        for (i, j) in &self.pairs {
            writeln!(out, "{i} {j}").unwrap();
        }
        if let Some(expanded) = &self.expanded {
            out.push_str("pairs:\n");
            for (q, r) in expanded {
                writeln!(out, "{q} {r}").unwrap();
            }
        }
        out.push_str("stats:\n");
        for (key, value) in &self.stats {
            writeln!(out, "{key}={value}").unwrap();
        }
        out
    }
}

pub fn emit_result(result: &SimResult, lts: &Lts, expand: bool) -> String {
    ResultDocument::from_result(result, lts, expand).emit()
}

/// The part of a result document before its `stats:` line.
pub fn canonical(document: &str) -> &str {
    let mut offset = 0;
    for line in document.split_inclusive('\n') {
        if line.trim_end() == "stats:" {
            return &document[..offset];
        }
        offset += line.len();
    }
    document
}

pub fn parse_result(text: &str) -> Result<ResultDocument, ParseError> {
    enum Section {
        Blocks,
        Relation,
        Pairs,
        Stats,
    }

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return Err(ParseError::new(
                line,
                format!("expected `{HEADER}`, found `{other}`"),
            ));
        }
        None => {
            return Err(ParseError::new(
                1,
                format!("empty document, expected `{HEADER}`"),
            ))
        }
    }

    let mut doc = ResultDocument::default();
    let mut section = Section::Blocks;
    let mut seen_stats = false;
    for (line, body) in lines {
        match body {
            "R:" if matches!(section, Section::Blocks) => {
                section = Section::Relation;
                continue;
            }
            "pairs:" if matches!(section, Section::Relation) => {
                section = Section::Pairs;
                doc.expanded = Some(Vec::new());
                continue;
            }
            "stats:" if matches!(section, Section::Relation | Section::Pairs) => {
                section = Section::Stats;
                seen_stats = true;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Blocks => {
                let (id, members) = body.split_once(':').ok_or_else(|| {
                    ParseError::new(line, format!("expected `B<k>: members`, found `{body}`"))
                })?;
                let expected = format!("B{}", doc.blocks.len());
                if id != expected {
                    return Err(ParseError::new(
                        line,
                        format!("expected block `{expected}`, found `{id}`"),
                    ));
                }
                doc.blocks
                    .push(members.split_whitespace().map(str::to_string).collect());
            }
            Section::Relation => {
                let (i, j) = two_fields(body, line)?;
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .ok()
                        .filter(|&b| b < doc.blocks.len())
                        .ok_or_else(|| {
                            ParseError::new(line, format!("`{s}` is not a block number"))
                        })
                };
                doc.pairs.push((parse(i)?, parse(j)?));
            }
            Section::Pairs => {
                let (q, r) = two_fields(body, line)?;
                doc.expanded
                    .as_mut()
                    .unwrap()
                    .push((q.to_string(), r.to_string()));
            }
            Section::Stats => {
                let (key, value) = body.split_once('=').ok_or_else(|| {
                    ParseError::new(line, format!("expected `key=value`, found `{body}`"))
                })?;
                let value = value
                    .parse()
                    .map_err(|_| ParseError::new(line, format!("`{value}` is not a count")))?;
                doc.stats.push((key.to_string(), value));
            }
        }
    }
    if !seen_stats {
        return Err(ParseError::new(
            text.lines().count().max(1),
            "missing `stats:` section",
        ));
    }
    Ok(doc)
}

fn two_fields(body: &str, line: usize) -> Result<(&str, &str), ParseError> {
    let mut fields = body.split_whitespace();
    match (fields.next(), fields.next(), fields.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(ParseError::new(
            line,
            format!("expected two fields, found `{body}`"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{normalize, RawLts};
    use crate::partition::PartitionRelation;
    use crate::sim::{run, SimOptions};

    fn q0q1_document(expand: bool) -> String {
        let raw = RawLts::from_triples(2, &[(0, "a", 1)]).with_state_names(["q0", "q1"]);
        let (lts, _) = normalize(&raw).unwrap();
        let result = run(
            &lts,
            &PartitionRelation::universal(2),
            SimOptions::default(),
        )
        .unwrap();
        emit_result(&result, &lts, expand)
    }

    #[test]
    fn q0q1_document_layout() {
        let doc = q0q1_document(false);
        assert_eq!(
            canonical(&doc),
            "simrel-result v1\nB0: q0\nB1: q1\nR:\n0 0\n1 0\n1 1\n"
        );
        assert!(doc[canonical(&doc).len()..].starts_with("stats:\nwhile_iterations="));
    }

    #[test]
    fn expanded_pairs() {
        let doc = q0q1_document(true);
        assert!(
            canonical(&doc).ends_with("pairs:\nq0 q0\nq1 q0\nq1 q1\n"),
            "{doc}"
        );
    }

    #[test]
    fn single_state_loop() {
        let (lts, _) = normalize(&RawLts::from_triples(1, &[(0, "a", 0)])).unwrap();
        let result = run(
            &lts,
            &PartitionRelation::universal(1),
            SimOptions::default(),
        )
        .unwrap();
        let doc = emit_result(&result, &lts, false);
        assert_eq!(canonical(&doc), "simrel-result v1\nB0: 0\nR:\n0 0\n");
    }

    #[test]
    fn parse_round_trips() {
        for expand in [false, true] {
            let text = q0q1_document(expand);
            let doc = parse_result(&text).unwrap();
            assert_eq!(doc.emit(), text);
            assert_eq!(doc.expanded.is_some(), expand);
        }
    }

    #[test]
    fn parse_errors() {
        let cases = [
            ("", 1),
            ("simrel-result v2\n", 1),
            ("simrel-result v1\nB1: 0\n", 2),
            ("simrel-result v1\nB0: 0\nR:\n0 1\n", 4),
            ("simrel-result v1\nB0: 0\nR:\n0 0\nstats:\nsplits=x\n", 6),
            ("simrel-result v1\nB0: 0\nR:\n0 0\n", 4),
        ];
        for (text, line) in cases {
            let err = parse_result(text).unwrap_err();
            assert_eq!(err.line, line, "{text:?}: {err}");
        }
    }
}
