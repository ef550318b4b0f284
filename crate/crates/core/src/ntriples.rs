//! Canonical N-Triples serialization and a parser for reading it back.
//!
//! Lines are sorted by the serialized `(subject, predicate, object)` tuple,
//! so equal sets produce identical bytes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use thiserror::Error;

use crate::kg::{Iri, KgError, Literal, LiteralKind, Term, Triple, TripleSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NtError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Term { line: usize, source: KgError },
}

fn escape_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() && (c as u32) < 0x10000 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c if c.is_control() => {
                let _ = write!(out, "\\U{:08X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn iri_term(iri: &Iri) -> String {
    let mut s = String::with_capacity(iri.as_str().len() + 2);
    s.push('<');
    s.push_str(iri.as_str());
    s.push('>');
    s
}

pub fn term_to_string(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri_term(iri),
        Term::Literal(lit) => {
            let mut s = String::from("\"");
            escape_into(&mut s, &lit.lexical);
            s.push('"');
            match &lit.kind {
                LiteralKind::Plain => {}
                LiteralKind::Lang(tag) => {
                    s.push('@');
                    s.push_str(tag);
                }
                LiteralKind::Datatype(dt) => {
                    s.push_str("^^");
                    s.push_str(&iri_term(dt));
                }
            }
            s
        }
    }
}

/// UTF-8 N-Triples, one triple per line, each line newline-terminated.
/// An empty set serializes to an empty string.
pub fn serialize_ntriples(kg: &TripleSet) -> String {
    let mut rows: Vec<(String, String, String)> = kg
        .iter()
        .map(|t| (iri_term(&t.subject), iri_term(&t.predicate), term_to_string(&t.object)))
        .collect();
    rows.sort_unstable();
    let mut out = String::new();
    for (s, p, o) in rows {
        out.push_str(&s);
        out.push(' ');
        out.push_str(&p);
        out.push(' ');
        out.push_str(&o);
        out.push_str(" .\n");
    }
    out
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: &str) -> NtError {
        NtError::Syntax { line: self.line, reason: String::from(reason) }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn eat(&mut self, c: char) -> bool {
        match self.rest.strip_prefix(c) {
            Some(r) => {
                self.rest = r;
                true
            }
            None => false,
        }
    }

    fn unescape_hex(&mut self, len: usize) -> Result<char, NtError> {
        let hex = self.rest.get(..len).ok_or_else(|| self.err("truncated unicode escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.err("bad unicode escape"))?;
        self.rest = &self.rest[len..];
        char::from_u32(code).ok_or_else(|| self.err("escape is not a scalar value"))
    }

    fn iri(&mut self) -> Result<Iri, NtError> {
        if !self.eat('<') {
            return Err(self.err("expected '<'"));
        }
        let mut value = String::new();
        loop {
            let c = self.rest.chars().next().ok_or_else(|| self.err("unterminated IRI"))?;
            self.rest = &self.rest[c.len_utf8()..];
            match c {
                '>' => break,
                '\\' => {
                    let kind = self.rest.chars().next();
                    self.rest = self.rest.get(1..).unwrap_or("");
                    let ch = match kind {
                        Some('u') => self.unescape_hex(4)?,
                        Some('U') => self.unescape_hex(8)?,
                        _ => return Err(self.err("bad escape in IRI")),
                    };
                    value.push(ch);
                }
                c => value.push(c),
            }
        }
        Iri::new(value).map_err(|source| NtError::Term { line: self.line, source })
    }

    fn literal(&mut self) -> Result<Literal, NtError> {
        self.eat('"');
        let mut lexical = String::new();
        loop {
            let c = self.rest.chars().next().ok_or_else(|| self.err("unterminated literal"))?;
            self.rest = &self.rest[c.len_utf8()..];
            match c {
                '"' => break,
                '\\' => {
                    let e = self.rest.chars().next().ok_or_else(|| self.err("dangling escape"))?;
                    self.rest = &self.rest[e.len_utf8()..];
                    let ch = match e {
                        't' => '\t',
                        'b' => '\u{8}',
                        'n' => '\n',
                        'r' => '\r',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' => self.unescape_hex(4)?,
                        'U' => self.unescape_hex(8)?,
                        _ => return Err(self.err("unknown escape")),
                    };
                    lexical.push(ch);
                }
                c => lexical.push(c),
            }
        }
        if self.eat('@') {
            let end = self.rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).unwrap_or(self.rest.len());
            let tag = &self.rest[..end];
            self.rest = &self.rest[end..];
            return Literal::lang(lexical, tag).map_err(|source| NtError::Term { line: self.line, source });
        }
        if self.rest.starts_with("^^") {
            self.rest = &self.rest[2..];
            return Ok(Literal::typed(lexical, self.iri()?));
        }
        Ok(Literal::plain(lexical))
    }
}

/// Parses N-Triples with IRI subjects. Blank nodes are not supported.
pub fn parse_ntriples(text: &str) -> Result<TripleSet, NtError> {
    let mut set = TripleSet::new();
    for (n, line) in text.lines().enumerate() {
        let mut cur = Cursor { rest: line, line: n + 1 };
        cur.skip_ws();
        if cur.rest.is_empty() || cur.rest.starts_with('#') {
            continue;
        }
        let subject = cur.iri()?;
        cur.skip_ws();
        let predicate = cur.iri()?;
        cur.skip_ws();
        let object = if cur.rest.starts_with('<') {
            Term::Iri(cur.iri()?)
        } else if cur.rest.starts_with('"') {
            Term::Literal(cur.literal()?)
        } else {
            return Err(cur.err("expected IRI or literal object"));
        };
        cur.skip_ws();
        if !cur.eat('.') {
            return Err(cur.err("expected '.'"));
        }
        cur.skip_ws();
        if !(cur.rest.is_empty() || cur.rest.starts_with('#')) {
            return Err(cur.err("trailing content"));
        }
        set.insert(Triple { subject, predicate, object });
    }
    Ok(set)
}
