//! Initial partition-relation files (`.pr`).
//!
//! ```text
//! partition
//! 0: 0 1 4
//! 1: 2 3
//! relation
//! 1 0
//! ```
//!
//! Block `i` lists its states (raw `.aut` state numbers); blocks are
//! numbered `0, 1, …` in order. A relation line `i j` states that every
//! state of block `j` may simulate every state of block `i`. Reflexive pairs
//! are implied. The relation must be antisymmetric and transitive. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write;

use super::ParseError;
use crate::lts::RemapReport;
use crate::partition::PartitionRelation;

/// A parsed `.pr` file, still in raw state numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrDocument {
    /// Pairs are sorted and include every reflexive pair.
    pub pair: PartitionRelation,
    block_lines: Vec<usize>,
    last_line: usize,
}

pub fn parse_pr(text: &str) -> Result<PrDocument, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Partition,
        Relation,
    }

    let mut section = Section::None;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_lines = Vec::new();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut pair_lines: HashMap<(usize, usize), usize> = HashMap::new();
    let mut last_line = 1;

    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw_line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        last_line = line;
        match (body, &section) {
            ("partition", Section::None) => section = Section::Partition,
            ("partition", _) => return Err(ParseError::new(line, "duplicate `partition` section")),
            ("relation", Section::Partition) => section = Section::Relation,
            ("relation", Section::None) => {
                return Err(ParseError::new(
                    line,
                    "`relation` section before `partition` section",
                ))
            }
            ("relation", Section::Relation) => {
                return Err(ParseError::new(line, "duplicate `relation` section"))
            }
            (_, Section::None) => return Err(ParseError::new(line, "expected `partition`")),
            (_, Section::Partition) => {
                let (id, states) = body.split_once(':').ok_or_else(|| {
                    ParseError::new(line, format!("expected `block: states…`, found `{body}`"))
                })?;
                let id = number(id, line)?;
                if id != blocks.len() {
                    return Err(ParseError::new(
                        line,
                        format!("block {id} out of order, expected block {}", blocks.len()),
                    ));
                }
                let mut members = Vec::new();
                for token in states.split_whitespace() {
                    let state = number(token, line)?;
                    if let Some(first) = owner.insert(state, id) {
                        return Err(ParseError::new(
                            line,
                            format!("state {state} already belongs to block {first}"),
                        ));
                    }
                    members.push(state);
                }
                if members.is_empty() {
                    return Err(ParseError::new(line, format!("block {id} is empty")));
                }
                blocks.push(members);
                block_lines.push(line);
            }
            (_, Section::Relation) => {
                let fields: Vec<&str> = body.split_whitespace().collect();
                let [i, j] = fields[..] else {
                    return Err(ParseError::new(
                        line,
                        format!("expected `i j`, found `{body}`"),
                    ));
                };
                let (i, j) = (number(i, line)?, number(j, line)?);
                for b in [i, j] {
                    if b >= blocks.len() {
                        return Err(ParseError::new(
                            line,
                            format!("unknown block {b} ({} blocks)", blocks.len()),
                        ));
                    }
                }
                if i != j && pair_lines.contains_key(&(j, i)) {
                    return Err(ParseError::new(
                        line,
                        format!("relation not antisymmetric: both ({i}, {j}) and ({j}, {i})"),
                    ));
                }
                pair_lines.entry((i, j)).or_insert(line);
            }
        }
    }
    if section == Section::None {
        return Err(ParseError::new(last_line, "missing `partition` section"));
    }
    if blocks.is_empty() {
        return Err(ParseError::new(last_line, "partition has no blocks"));
    }

    let k = blocks.len();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(i, j) in pair_lines.keys() {
        if i != j {
            successors[i].push(j);
        }
    }
    let mut violations = Vec::new();
    for (&(i, j), &l1) in &pair_lines {
        if i == j {
            continue;
        }
        for &m in &successors[j] {
            if m != i && !pair_lines.contains_key(&(i, m)) {
                violations.push((l1.max(pair_lines[&(j, m)]), i, j, m));
            }
        }
    }
    if let Some(&(line, i, j, m)) = violations.iter().min() {
        return Err(ParseError::new(
            line,
            format!("relation not transitive: ({i}, {j}) and ({j}, {m}) but not ({i}, {m})"),
        ));
    }

    let pair = PartitionRelation {
        blocks,
        pairs: pair_lines.into_keys().collect(),
    }
    .with_reflexive_closure();
    Ok(PrDocument {
        pair,
        block_lines,
        last_line,
    })
}

fn number(token: &str, line: usize) -> Result<usize, ParseError> {
    let token = token.trim();
    token
        .parse()
        .map_err(|_| ParseError::new(line, format!("`{token}` is not a non-negative integer")))
}

impl PrDocument {
    /// Maps raw state numbers through normalization: states dropped by
    /// normalization are removed, blocks left empty disappear and the
    /// remaining blocks are renumbered in order. Every raw state kept by
    /// normalization must belong to a block.
    pub fn resolve(
        &self,
        raw_num_states: usize,
        report: &RemapReport,
    ) -> Result<PartitionRelation, ParseError> {
        let mut covered = vec![false; raw_num_states];
        let mut new_id = Vec::with_capacity(self.pair.blocks.len());
        let mut blocks = Vec::new();
        for (b, members) in self.pair.blocks.iter().enumerate() {
            let mut mapped = Vec::new();
            for &q in members {
                if q >= raw_num_states {
                    return Err(ParseError::new(
                        self.block_lines[b],
                        format!("state {q} out of range ({raw_num_states} states)"),
                    ));
                }
                covered[q] = true;
                if let Some(m) = report.state_map[q] {
                    mapped.push(m);
                }
            }
            if mapped.is_empty() {
                new_id.push(None);
            } else {
                new_id.push(Some(blocks.len()));
                blocks.push(mapped);
            }
        }
        if let Some(q) = (0..raw_num_states).find(|&q| !covered[q] && report.state_map[q].is_some())
        {
            return Err(ParseError::new(
                self.last_line,
                format!("state {q} is not in any block"),
            ));
        }
        let pairs = self
            .pair
            .pairs
            .iter()
            .filter_map(|&(i, j)| Some((new_id[i]?, new_id[j]?)))
            .collect();
        Ok(PartitionRelation { blocks, pairs })
    }
}

pub fn emit_pr(pair: &PartitionRelation) -> String {
    let mut out = String::from("partition\n");
    for (b, members) in pair.blocks.iter().enumerate() {
        write!(out, "{b}:").unwrap();
        for q in members {
            write!(out, " {q}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("relation\n");
    let mut pairs = pair.pairs.clone();
    pairs.sort_unstable();
    pairs.dedup();
    for (i, j) in pairs {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}
