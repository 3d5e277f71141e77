use std::fmt::Write;

use crate::graph::Modifier;

use super::{Instruction, Item, Pattern, PatternSegment, Round, Stitch};

/// Notes printed as `#` lines above the segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Header {
    pub lines: Vec<String>,
}

/// How round numbers are written: `Rnd 4:` / `Rnds 2-3:`, or `row 4:` / `rows 2-3:`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoundLabel {
    #[default]
    Rnd,
    Rows,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn stitch_text(ins: &Instruction) -> String {
    let prefix = match ins.modifier {
        Modifier::Both => "",
        Modifier::Blo => "BLO ",
        Modifier::Flo => "FLO ",
    };
    let body = match ins.stitch {
        Stitch::Sc => "sc".to_string(),
        Stitch::Inc(2) => "inc".to_string(),
        Stitch::Inc(x) => format!("inc {x}"),
        Stitch::Dec(2) => "dec".to_string(),
        Stitch::Dec(x) => format!("dec {x}"),
        Stitch::MagicRing(n) => format!("MR {n}"),
        Stitch::Skip(n) => format!("skip {n}"),
        Stitch::Attach(s) => format!("attach {s}"),
    };
    format!("{prefix}{body}")
}

fn item_text(item: &Item) -> String {
    match item {
        Item::Repeat {
            count: 1,
            instruction,
        } => stitch_text(instruction),
        Item::Repeat { count, instruction } if instruction.modifier != Modifier::Both => {
            format!("{count} {}", stitch_text(instruction))
        }
        Item::Repeat { count, instruction } => format!("{count}{}", stitch_text(instruction)),
        Item::Group { count, items } => format!("({})*{count}", items_text(items)),
    }
}

fn items_text(items: &[Item]) -> String {
    items.iter().map(item_text).collect::<Vec<_>>().join(", ")
}

fn label_text(round: &Round, label: RoundLabel) -> String {
    let (one, many) = match label {
        RoundLabel::Rnd => ("Rnd", "Rnds"),
        RoundLabel::Rows => ("row", "rows"),
    };
    if round.first == round.last {
        format!("{one} {}", round.first)
    } else {
        format!("{many} {}-{}", round.first, round.last)
    }
}

/// One round line, e.g. `Rnds 2-3: (sc, inc, 2sc)*3`.
pub fn render_round(round: &Round, label: RoundLabel) -> String {
    format!("{}: {}", label_text(round, label), items_text(&round.items))
}

pub fn render_pattern(pattern: &Pattern, label: RoundLabel) -> String {
    let mut out = String::new();
    for line in &pattern.header.lines {
        writeln!(out, "# {line}").unwrap();
    }
    for seg in &pattern.segments {
        out.push('\n');
        write!(out, "Segment {}", seg.id).unwrap();
        if !seg.joins.is_empty() {
            let ids: Vec<String> = seg.joins.iter().map(|j| j.to_string()).collect();
            write!(out, " (join: {})", ids.join(", ")).unwrap();
        }
        out.push('\n');
        for round in &seg.rounds {
            writeln!(out, "{}", render_round(round, label)).unwrap();
        }
    }
    out
}

fn number(s: &str, line: usize) -> Result<usize, ParseError> {
    s.trim().parse().map_err(|_| ParseError {
        line,
        message: format!("expected a number, found {s:?}"),
    })
}

/// Splits at commas outside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_stitch(s: &str, line: usize) -> Result<Instruction, ParseError> {
    let mut s = s.trim();
    let mut modifier = Modifier::Both;
    for (tag, m) in [("BLO ", Modifier::Blo), ("FLO ", Modifier::Flo)] {
        if let Some(rest) = s.strip_prefix(tag) {
            modifier = m;
            s = rest.trim_start();
        }
    }
    let (word, arg) = match s.find(' ') {
        Some(k) => (&s[..k], Some(&s[k + 1..])),
        None => (s, None),
    };
    let need = |arg: Option<&str>| -> Result<usize, ParseError> {
        number(
            arg.ok_or(ParseError {
                line,
                message: format!("{word} needs a number"),
            })?,
            line,
        )
    };
    let stitch = match word {
        "sc" if arg.is_none() => Stitch::Sc,
        "inc" => Stitch::Inc(arg.map_or(Ok(2), |a| number(a, line))?),
        "dec" => Stitch::Dec(arg.map_or(Ok(2), |a| number(a, line))?),
        "MR" => Stitch::MagicRing(need(arg)?),
        "skip" => Stitch::Skip(need(arg)?),
        "attach" => Stitch::Attach(need(arg)?),
        _ => {
            return Err(ParseError {
                line,
                message: format!("unknown stitch {s:?}"),
            })
        }
    };
    if matches!(stitch, Stitch::Inc(x) | Stitch::Dec(x) if x < 2) {
        return Err(ParseError {
            line,
            message: format!("{word} needs at least 2 loops"),
        });
    }
    Ok(Instruction { stitch, modifier })
}

fn parse_item(s: &str, line: usize) -> Result<Item, ParseError> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('(') {
        let close = rest.rfind(')').ok_or(ParseError {
            line,
            message: "unclosed group".into(),
        })?;
        let count = rest[close + 1..]
            .trim()
            .strip_prefix('*')
            .ok_or(ParseError {
                line,
                message: "group needs *count".into(),
            })?;
        let items = split_top(&rest[..close])
            .into_iter()
            .map(|p| parse_item(p, line))
            .collect::<Result<_, _>>()?;
        return Ok(Item::Group {
            count: number(count, line)?,
            items,
        });
    }
    let digits = s.len() - s.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    let count = if digits > 0 {
        number(&s[..digits], line)?
    } else {
        1
    };
    if count == 0 {
        return Err(ParseError {
            line,
            message: "zero repeat".into(),
        });
    }
    Ok(Item::Repeat {
        count,
        instruction: parse_stitch(&s[digits..], line)?,
    })
}

fn parse_label(s: &str, line: usize) -> Result<(usize, usize), ParseError> {
    let s = s.trim();
    for many in ["Rnds ", "rows "] {
        if let Some(rest) = s.strip_prefix(many) {
            let (a, b) = rest.split_once('-').ok_or(ParseError {
                line,
                message: "range needs a-b".into(),
            })?;
            let (a, b) = (number(a, line)?, number(b, line)?);
            if b < a {
                return Err(ParseError {
                    line,
                    message: format!("empty range {a}-{b}"),
                });
            }
            return Ok((a, b));
        }
    }
    for one in ["Rnd ", "row "] {
        if let Some(rest) = s.strip_prefix(one) {
            let n = number(rest, line)?;
            return Ok((n, n));
        }
    }
    Err(ParseError {
        line,
        message: format!("unknown round label {s:?}"),
    })
}

pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    let mut header = super::Header::default();
    let mut segments: Vec<PatternSegment> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(note) = t.strip_prefix('#') {
            if segments.is_empty() {
                header
                    .lines
                    .push(note.strip_prefix(' ').unwrap_or(note).to_string());
            }
            continue;
        }
        if let Some(rest) = t.strip_prefix("Segment ") {
            let (id, joins) = match rest.split_once('(') {
                Some((id, j)) => {
                    let list = j
                        .trim_end()
                        .strip_suffix(')')
                        .and_then(|j| j.trim().strip_prefix("join:"))
                        .ok_or(ParseError {
                            line,
                            message: "expected (join: ...)".into(),
                        })?;
                    let joins = list
                        .split(',')
                        .map(|x| number(x, line))
                        .collect::<Result<_, _>>()?;
                    (id, joins)
                }
                None => (rest, Vec::new()),
            };
            segments.push(PatternSegment {
                id: number(id, line)?,
                joins,
                rounds: Vec::new(),
            });
            continue;
        }
        let (label, body) = t.split_once(':').ok_or(ParseError {
            line,
            message: "expected a round".into(),
        })?;
        let (first, last) = parse_label(label, line)?;
        let items = split_top(body)
            .into_iter()
            .map(|p| parse_item(p, line))
            .collect::<Result<_, _>>()?;
        let seg = segments.last_mut().ok_or(ParseError {
            line,
            message: "round before any segment".into(),
        })?;
        seg.rounds.push(Round { first, last, items });
    }
    if segments.is_empty() {
        return Err(ParseError {
            line: 0,
            message: "no segments".into(),
        });
    }
    Ok(Pattern { header, segments })
}
