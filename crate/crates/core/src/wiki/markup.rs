//! Lossy cleaning of wiki markup: whole-text preprocessing (comments,
//! references, templates) and inline cleaning (links, emphasis, tags,
//! entities).

use alloc::string::String;
use alloc::vec::Vec;

use super::InternalLink;

/// Maximum template nesting removed by balanced-brace scanning.
pub const MAX_TEMPLATE_DEPTH: usize = 16;
const MAX_LINK_DEPTH: usize = 16;

const DROPPED_NAMESPACES: &[&str] = &[
    "file", "image", "media", "category", "datei", "bild", "kategorie", "datoteka", "slika",
    "kategorija", "categoria", "immagine", "fichier", "catégorie",
];

fn starts_with_ci(hay: &str, at: usize, needle: &str) -> bool {
    hay.as_bytes()
        .get(at..at + needle.len())
        .is_some_and(|s| s.eq_ignore_ascii_case(needle.as_bytes()))
}

fn find_ci(hay: &str, from: usize, needle: &str) -> Option<usize> {
    let bytes = hay.as_bytes();
    let n = needle.len();
    if bytes.len() < n {
        return None;
    }
    (from..=bytes.len() - n).find(|&i| bytes[i..i + n].eq_ignore_ascii_case(needle.as_bytes()))
}

/// Byte offset just past the template opened at `start`, or `None` when it is
/// unclosed or nests deeper than [`MAX_TEMPLATE_DEPTH`].
fn template_end(s: &str, start: usize) -> Option<usize> {
    let b = s.as_bytes();
    let mut depth = 0usize;
    let mut i = start;
    while i + 1 < b.len() {
        if b[i] == b'{' && b[i + 1] == b'{' {
            depth += 1;
            if depth > MAX_TEMPLATE_DEPTH {
                return None;
            }
            i += 2;
        } else if b[i] == b'}' && b[i + 1] == b'}' {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Some(i);
            }
        } else {
            i += 1;
        }
    }
    None
}

/// End of a `<ref ...>...</ref>` or `<ref .../>` element starting at `start`.
fn ref_end(s: &str, start: usize) -> Option<usize> {
    let after = start + 4;
    match s.as_bytes().get(after) {
        Some(b'>' | b' ' | b'/' | b'\t' | b'\n') => {}
        _ => return None,
    }
    let tag_close = s[after..].find('>')? + after;
    if s.as_bytes()[tag_close - 1] == b'/' {
        return Some(tag_close + 1);
    }
    let close = find_ci(s, tag_close + 1, "</ref>")?;
    Some(close + "</ref>".len())
}

/// Removes HTML comments, `<ref>` elements and `{{...}}` templates from the
/// whole page text. Unclosed constructs are kept as literal text.
pub fn preprocess(s: &str) -> String {
    let b = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    let mut copied = 0;
    while i < b.len() {
        let skip_to = match b[i] {
            b'<' if s[i..].starts_with("<!--") => s[i + 4..].find("-->").map(|p| i + 4 + p + 3),
            b'<' if starts_with_ci(s, i, "<ref") => ref_end(s, i),
            b'{' if b.get(i + 1) == Some(&b'{') => template_end(s, i),
            _ => None,
        };
        match skip_to {
            Some(end) => {
                out.push_str(&s[copied..i]);
                i = end;
                copied = end;
            }
            None if b[i] == b'{' && b.get(i + 1) == Some(&b'{') => i += 2,
            None => i += 1,
        }
    }
    out.push_str(&s[copied..]);
    out
}

/// String builder that collapses whitespace runs and never emits leading or
/// trailing spaces, so recorded byte offsets stay valid.
struct Collapsed {
    buf: String,
    pending_space: bool,
}

impl Collapsed {
    fn new() -> Self {
        Self { buf: String::new(), pending_space: false }
    }

    fn push_char(&mut self, c: char) {
        if c.is_whitespace() {
            self.space();
        } else {
            self.flush_space();
            self.buf.push(c);
        }
    }

    fn push_str(&mut self, s: &str) {
        s.chars().for_each(|c| self.push_char(c));
    }

    fn space(&mut self) {
        if !self.buf.is_empty() {
            self.pending_space = true;
        }
    }

    fn flush_space(&mut self) {
        if self.pending_space {
            self.buf.push(' ');
            self.pending_space = false;
        }
    }
}

enum LinkItem {
    Link { target: String, surface_raw: String },
    Dropped,
}

fn is_interlanguage(prefix: &str) -> bool {
    (2..=3).contains(&prefix.len()) && prefix.bytes().all(|c| c.is_ascii_lowercase())
}

/// Parses a `[[...]]` construct at `start`; returns the item and the offset
/// past it, or `None` to treat the brackets literally.
fn parse_wikilink(s: &str, start: usize) -> Option<(LinkItem, usize)> {
    let inner_start = start + 2;
    let head_end = s[inner_start..]
        .find(['|', ']', '['])
        .map_or(s.len(), |p| inner_start + p);
    let namespace = s[inner_start..head_end]
        .split_once(':')
        .map(|(ns, _)| ns.trim().to_lowercase());
    if let Some(ns) = namespace.as_deref() {
        if DROPPED_NAMESPACES.contains(&ns) {
            return balanced_link_end(s, start).map(|end| (LinkItem::Dropped, end));
        }
    }
    let close = s[inner_start..].find("]]")? + inner_start;
    let content = &s[inner_start..close];
    if content.contains("[[") {
        return None;
    }
    let end = close + 2;
    let (target_raw, surface_raw) = match content.find('|') {
        Some(p) => (&content[..p], Some(&content[p + 1..])),
        None => (content, None),
    };
    let target = target_raw.trim().trim_start_matches(':').trim();
    if target.is_empty() {
        return None;
    }
    if surface_raw.is_none() {
        if let Some(ns) = namespace.as_deref() {
            if ns != "w" && is_interlanguage(ns) && !target_raw.trim_start().starts_with(':') {
                return Some((LinkItem::Dropped, end));
            }
        }
    }
    let surface_raw = match surface_raw {
        Some(sfc) if !sfc.trim().is_empty() => String::from(sfc),
        Some(_) => String::from(target),
        None => String::from(target_raw.trim_start_matches(':')),
    };
    Some((LinkItem::Link { target: String::from(target), surface_raw }, end))
}

fn balanced_link_end(s: &str, start: usize) -> Option<usize> {
    let b = s.as_bytes();
    let mut depth = 0usize;
    let mut i = start;
    while i + 1 < b.len() {
        if b[i] == b'[' && b[i + 1] == b'[' {
            depth += 1;
            if depth > MAX_LINK_DEPTH {
                return None;
            }
            i += 2;
        } else if b[i] == b']' && b[i + 1] == b']' {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Some(i);
            }
        } else {
            i += 1;
        }
    }
    None
}

const URL_PREFIXES: &[&str] = &["http://", "https://", "//", "ftp://", "mailto:"];

/// `[url label]` external link; returns the label and the offset past `]`.
fn parse_external_link(s: &str, start: usize) -> Option<(&str, usize)> {
    let rest = &s[start + 1..];
    if !URL_PREFIXES.iter().any(|p| starts_with_ci(rest, 0, p)) {
        return None;
    }
    let close = rest.find(']')?;
    let inner = &rest[..close];
    if inner.contains('[') {
        return None;
    }
    let label = inner.split_once(char::is_whitespace).map_or("", |(_, l)| l);
    Some((label, start + 1 + close + 1))
}

/// Length of an HTML-like tag at `start` (`<br>`, `</small>`, `<span a="b">`).
fn html_tag_len(s: &str, start: usize) -> Option<(usize, bool)> {
    let rest = &s[start + 1..];
    let name_start = usize::from(rest.starts_with('/'));
    let mut name_chars = rest[name_start..].chars();
    if !name_chars.next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let close = rest.find('>')?;
    if rest[..close].contains('<') {
        return None;
    }
    let name: String = rest[name_start..close]
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    let is_break = name.eq_ignore_ascii_case("br");
    Some((close + 2, is_break))
}

fn decode_entity(s: &str, start: usize) -> Option<(char, usize)> {
    let rest = &s[start + 1..];
    let semi = rest.find(';').filter(|&p| p <= 10)?;
    let name = &rest[..semi];
    let c = if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(h) => u32::from_str_radix(h, 16).ok()?,
            None => num.parse::<u32>().ok()?,
        };
        char::from_u32(code)?
    } else {
        match name {
            "nbsp" => ' ',
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            "ndash" => '\u{2013}',
            "mdash" => '\u{2014}',
            "hellip" => '\u{2026}',
            _ => return None,
        }
    };
    Some((c, start + 1 + semi + 1))
}

/// Inline cleaning of already-preprocessed text. Returns the cleaned text
/// (whitespace collapsed, trimmed) and the internal links with byte spans into
/// it.
pub fn clean_inline(s: &str) -> (String, Vec<InternalLink>) {
    let mut out = Collapsed::new();
    let mut links = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'[' if b.get(i + 1) == Some(&b'[') => {
                if let Some((item, end)) = parse_wikilink(s, i) {
                    if let LinkItem::Link { target, surface_raw } = item {
                        push_link(&mut out, &mut links, target, &surface_raw);
                    }
                    i = end;
                } else {
                    out.push_str("[[");
                    i += 2;
                }
                continue;
            }
            b'[' => {
                if let Some((label, end)) = parse_external_link(s, i) {
                    let (text, _) = clean_inline(label);
                    out.push_str(&text);
                    i = end;
                    continue;
                }
            }
            b'\'' => {
                let run = b[i..].iter().take_while(|&&c| c == b'\'').count();
                let kept = match run {
                    1 => 1,
                    4 => 1,
                    n if n > 5 => n - 5,
                    _ => 0,
                };
                (0..kept).for_each(|_| out.push_char('\''));
                i += run;
                continue;
            }
            b'<' => {
                if let Some((len, is_break)) = html_tag_len(s, i) {
                    if is_break {
                        out.space();
                    }
                    i += len;
                    continue;
                }
            }
            b'&' => {
                if let Some((c, end)) = decode_entity(s, i) {
                    out.push_char(c);
                    i = end;
                    continue;
                }
            }
            b'_' if s[i..].starts_with("__") => {
                let word = s[i + 2..].bytes().take_while(|c| c.is_ascii_uppercase()).count();
                if word > 0 && s[i + 2 + word..].starts_with("__") {
                    i += word + 4;
                    continue;
                }
            }
            _ => {}
        }
        let c = s[i..].chars().next().expect("in bounds at char boundary");
        out.push_char(c);
        i += c.len_utf8();
    }
    (out.buf, links)
}

fn push_link(out: &mut Collapsed, links: &mut Vec<InternalLink>, target: String, surface_raw: &str) {
    let (surface, _) = clean_inline(surface_raw);
    if surface_raw.starts_with(char::is_whitespace) {
        out.space();
    }
    if !surface.is_empty() {
        out.flush_space();
        let start = out.buf.len();
        out.buf.push_str(&surface);
        links.push(InternalLink { target, surface, byte_span: (start, out.buf.len()) });
    }
    if surface_raw.ends_with(char::is_whitespace) {
        out.space();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_nested_templates_and_comments() {
        assert_eq!(preprocess("a{{x|{{y}}}}b<!-- c -->d"), "abd");
    }

    #[test]
    fn unclosed_constructs_are_literal() {
        assert_eq!(preprocess("a {{x b"), "a {{x b");
        assert_eq!(preprocess("a <!-- b"), "a <!-- b");
        assert_eq!(preprocess("a <ref>b"), "a <ref>b");
    }

    #[test]
    fn removes_refs() {
        assert_eq!(preprocess("x<ref name=\"a\">src</ref>y<ref name=b />z<REF>q</REF>"), "xyz");
        // <reference> is not a ref element
        assert_eq!(preprocess("<references/>"), "<references/>");
    }

    #[test]
    fn template_nesting_cap() {
        let deep_ok = alloc::format!("{}{}", "{{".repeat(16), "}}".repeat(16));
        assert_eq!(preprocess(&deep_ok), "");
        let too_deep = alloc::format!("{}{}", "{{".repeat(17), "}}".repeat(17));
        assert!(!preprocess(&too_deep).is_empty());
    }

    #[test]
    fn emphasis_is_stripped_but_apostrophes_stay() {
        assert_eq!(clean_inline("'''bold''' and ''it'' don't").0, "bold and it don't");
        assert_eq!(clean_inline("'''''both'''''").0, "both");
    }

    #[test]
    fn drops_files_and_categories() {
        let (t, l) = clean_inline("x [[File:a.jpg|thumb|cap [[Foo]]]] y [[Category:People]]");
        assert_eq!(t, "x y");
        assert!(l.is_empty());
    }

    #[test]
    fn drops_interlanguage_keeps_sister_links() {
        let (t, l) = clean_inline("[[de:Ronald Reagan]][[w:Berlin Wall|wall]]");
        assert_eq!(t, "wall");
        assert_eq!(l[0].target, "w:Berlin Wall");
    }

    #[test]
    fn external_links_keep_label() {
        assert_eq!(clean_inline("see [https://example.org the site] now").0, "see the site now");
        assert_eq!(clean_inline("see [https://example.org] now").0, "see now");
    }

    #[test]
    fn tags_and_entities() {
        assert_eq!(clean_inline("a<br/>b &amp; <small>c</small> &#65;").0, "a b & c A");
        assert_eq!(clean_inline("1 < 2 & 3").0, "1 < 2 & 3");
    }

    #[test]
    fn link_spans_respect_collapsed_whitespace() {
        let (t, l) = clean_inline("  on   [[Foo|  the   foo ]]   day ");
        assert_eq!(t, "on the foo day");
        assert_eq!(&t[l[0].byte_span.0..l[0].byte_span.1], "the foo");
    }
}
