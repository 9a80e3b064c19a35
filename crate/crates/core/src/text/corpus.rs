//! The four-line relation record grammar shared by SemEval-2010 Task 8 and KBP37.
//!
//! ```text
//! 1\t"<e1>people</e1> have been moving back into <e2>downtown</e2>"
//! Entity-Destination(e1,e2)
//! Comment:
//!
//! ```

use std::fmt::Write as _;

use super::schema::{Label, RelationSchema};
use super::{DataError, E1_CLOSE, E1_OPEN, E2_CLOSE, E2_OPEN};

/// Inclusive token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn single(i: usize) -> Self {
        Span { start: i, end: i }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// A tokenized sentence with two marked nominals and a directed relation label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: u64,
    pub tokens: Vec<String>,
    pub e1: Span,
    pub e2: Span,
    pub label: Label,
}

impl Example {
    pub fn new(id: u64, tokens: Vec<String>, e1: Span, e2: Span, label: Label) -> Result<Self, DataError> {
        validate_spans(tokens.len(), e1, e2).map_err(|reason| DataError::InvalidExample { id, reason })?;
        Ok(Example {
            id,
            tokens,
            e1,
            e2,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn e1_text(&self) -> String {
        self.tokens[self.e1.start..=self.e1.end].join(" ")
    }

    pub fn e2_text(&self) -> String {
        self.tokens[self.e2.start..=self.e2.end].join(" ")
    }

    /// Sentence with inline entity markup, as written in the record grammar.
    pub fn marked_sentence(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if i == self.e1.start {
                out.push_str(E1_OPEN);
            }
            if i == self.e2.start {
                out.push_str(E2_OPEN);
            }
            out.push_str(tok);
            if i == self.e1.end {
                out.push_str(E1_CLOSE);
            }
            if i == self.e2.end {
                out.push_str(E2_CLOSE);
            }
        }
        out
    }
}

fn validate_spans(len: usize, e1: Span, e2: Span) -> Result<(), String> {
    for (name, s) in [("e1", e1), ("e2", e2)] {
        if s.is_empty() {
            return Err(format!("{name} span is empty"));
        }
        if s.end >= len {
            return Err(format!("{name} span {}..={} exceeds {len} tokens", s.start, s.end));
        }
    }
    if e1.overlaps(&e2) {
        return Err("e1 and e2 spans overlap".into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizeOptions {
    pub lowercase: bool,
}

/// One record of the grammar before the label is interpreted against a schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    /// 1-based line number of the sentence line.
    pub line: usize,
    pub id: u64,
    pub tokens: Vec<String>,
    pub e1: Span,
    pub e2: Span,
    pub relation: String,
    pub comment: Option<String>,
}

/// Splits a marked-up sentence into tokens and nominal spans.
///
/// Markup is separated from surrounding text first, then the sentence is
/// split on whitespace.
pub fn tokenize_marked(sentence: &str, opts: TokenizeOptions) -> Result<(Vec<String>, Span, Span), String> {
    let mut spaced = sentence.to_string();
    for tag in [E1_CLOSE, E2_CLOSE, E1_OPEN, E2_OPEN] {
        spaced = spaced.replace(tag, &format!(" {tag} "));
    }
    let mut tokens = Vec::new();
    let mut e1: (Option<usize>, Option<usize>) = (None, None);
    let mut e2: (Option<usize>, Option<usize>) = (None, None);
    let mut open: Option<&str> = None;
    for raw in spaced.split_whitespace() {
        match raw {
            E1_OPEN | E2_OPEN => {
                let slot = if raw == E1_OPEN { &mut e1 } else { &mut e2 };
                if open.is_some() {
                    return Err(format!("`{raw}` opened inside another nominal"));
                }
                if slot.0.is_some() {
                    return Err(format!("duplicate `{raw}`"));
                }
                slot.0 = Some(tokens.len());
                open = Some(raw);
            }
            E1_CLOSE | E2_CLOSE => {
                let (slot, opener) = if raw == E1_CLOSE {
                    (&mut e1, E1_OPEN)
                } else {
                    (&mut e2, E2_OPEN)
                };
                if open != Some(opener) {
                    return Err(format!("`{raw}` without matching `{opener}`"));
                }
                let start = slot.0.expect("opened");
                if tokens.len() == start {
                    return Err(format!("empty nominal closed by `{raw}`"));
                }
                slot.1 = Some(tokens.len() - 1);
                open = None;
            }
            tok => tokens.push(if opts.lowercase {
                tok.to_lowercase()
            } else {
                tok.to_string()
            }),
        }
    }
    if let Some(tag) = open {
        return Err(format!("`{tag}` never closed"));
    }
    let span = |s: (Option<usize>, Option<usize>), name: &str| match s {
        (Some(a), Some(b)) => Ok(Span::new(a, b)),
        _ => Err(format!("missing {name} markup")),
    };
    Ok((tokens, span(e1, "e1")?, span(e2, "e2")?))
}

fn truncate(s: &str) -> String {
    const MAX: usize = 60;
    if s.chars().count() <= MAX {
        s.to_string()
    } else {
        let head: String = s.chars().take(MAX).collect();
        format!("{head}...")
    }
}

/// Parses every record in `text` without interpreting labels.
pub fn parse_records(text: &str, opts: TokenizeOptions) -> Result<Vec<Record>, DataError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let malformed = |line: usize, fragment: &str, reason: String| DataError::Malformed {
        line,
        fragment: truncate(fragment),
        reason,
    };
    let mut records = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let line_no = i + 1;
        let head = lines[i];
        let (id, quoted) = head
            .split_once('\t')
            .ok_or_else(|| malformed(line_no, head, "expected `<id>\\t\"<sentence>\"`".into()))?;
        let id: u64 = id
            .trim()
            .parse()
            .map_err(|_| malformed(line_no, head, format!("bad record id `{id}`")))?;
        let quoted = quoted.trim();
        let sentence = quoted
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .filter(|_| quoted.len() >= 2)
            .ok_or_else(|| malformed(line_no, head, "sentence must be double-quoted".into()))?;
        let (tokens, e1, e2) = tokenize_marked(sentence, opts).map_err(|reason| malformed(line_no, head, reason))?;
        validate_spans(tokens.len(), e1, e2).map_err(|reason| malformed(line_no, head, reason))?;

        i += 1;
        let relation = match lines.get(i) {
            Some(l) if !l.trim().is_empty() => l.trim().to_string(),
            _ => {
                return Err(malformed(
                    i + 1,
                    lines.get(i).unwrap_or(&""),
                    "missing relation line".into(),
                ))
            }
        };
        i += 1;
        let mut comment = None;
        if let Some(l) = lines.get(i) {
            if let Some(rest) = l.strip_prefix("Comment:") {
                comment = Some(rest.trim().to_string());
                i += 1;
            }
        }
        match lines.get(i) {
            None => {}
            Some(l) if l.trim().is_empty() => i += 1,
            Some(l) => return Err(malformed(i + 1, l, "expected blank line after record".into())),
        }
        records.push(Record {
            line: line_no,
            id,
            tokens,
            e1,
            e2,
            relation,
            comment,
        });
    }
    Ok(records)
}

/// Parses SemEval/KBP37-style records, resolving every label against `schema`.
pub fn parse_dataset(text: &str, schema: &RelationSchema, opts: TokenizeOptions) -> Result<Vec<Example>, DataError> {
    parse_records(text, opts)?
        .into_iter()
        .map(|r| {
            let label: Label = r.relation.parse().map_err(|e| DataError::Schema {
                line: r.line + 1,
                source: e,
            })?;
            schema.class_index(&label).map_err(|e| DataError::Schema {
                line: r.line + 1,
                source: e,
            })?;
            Ok(Example {
                id: r.id,
                tokens: r.tokens,
                e1: r.e1,
                e2: r.e2,
                label,
            })
        })
        .collect()
}

/// Parses records and builds the schema from the labels they carry.
pub fn parse_dataset_inferring_schema(
    text: &str,
    opts: TokenizeOptions,
) -> Result<(Vec<Example>, RelationSchema), DataError> {
    let records = parse_records(text, opts)?;
    let mut labels = Vec::with_capacity(records.len());
    for r in &records {
        labels.push(r.relation.parse::<Label>().map_err(|e| DataError::Schema {
            line: r.line + 1,
            source: e,
        })?);
    }
    let schema = RelationSchema::infer(&labels).map_err(|e| DataError::Schema { line: 0, source: e })?;
    let examples = records
        .into_iter()
        .zip(labels)
        .map(|(r, label)| Example {
            id: r.id,
            tokens: r.tokens,
            e1: r.e1,
            e2: r.e2,
            label,
        })
        .collect();
    Ok((examples, schema))
}

/// Writes examples in the record grammar (empty `Comment:` line).
pub fn write_dataset(examples: &[Example]) -> String {
    let mut out = String::new();
    for ex in examples {
        let _ = write!(
            out,
            "{}\t\"{}\"\n{}\nComment:\n\n",
            ex.id,
            ex.marked_sentence(),
            ex.label
        );
    }
    out
}
