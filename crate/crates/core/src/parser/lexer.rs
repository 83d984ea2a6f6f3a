//! Tokenizer shared by the `#Name#[(a, b, c), ...]` grammars.

use super::ParseError;

/// Characters the prompts forbid inside labels.
const FORBIDDEN: &[char] = &['\'', '"', '{', '}', '&', '*', '\\'];

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Item {
    /// `>>>NAME>>>`
    Marker(String),
    /// `#NAME#[body]`
    Section { name: String, body: String },
}

fn syntax(context: &str, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { context: context.to_string(), message: message.into() }
}

/// Literal `\n`, `\r`, `\t` escapes and backslash line continuations are
/// separators, same as real whitespace.
fn separator_len(rest: &str) -> usize {
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_whitespace() => c.len_utf8(),
        Some('\\') => match chars.next() {
            Some('n' | 'r' | 't') => 2,
            Some(c) if c.is_whitespace() => 1 + c.len_utf8(),
            None => 1,
            _ => 0,
        },
        _ => 0,
    }
}

fn skip_separators(text: &str, mut i: usize) -> usize {
    loop {
        let n = separator_len(&text[i..]);
        if n == 0 {
            return i;
        }
        i += n;
    }
}

pub(crate) fn items(text: &str) -> Result<Vec<Item>, ParseError> {
    let mut out = Vec::new();
    let mut i = skip_separators(text, 0);
    while i < text.len() {
        let rest = &text[i..];
        if let Some(after) = rest.strip_prefix(">>>") {
            let end = after
                .find(">>>")
                .ok_or_else(|| syntax("marker", format!("unterminated marker at offset {i}")))?;
            let name = after[..end].trim();
            if name.is_empty() {
                return Err(syntax("marker", format!("empty marker at offset {i}")));
            }
            out.push(Item::Marker(name.to_string()));
            i += 3 + end + 3;
        } else if let Some(after) = rest.strip_prefix('#') {
            let end = after
                .find('#')
                .ok_or_else(|| syntax("section", format!("unterminated section name at offset {i}")))?;
            let name = after[..end].trim();
            if name.is_empty() || name.contains(['[', ']', '(', ')', '\n']) {
                return Err(syntax("section", format!("bad section name '{}' at offset {i}", &after[..end])));
            }
            let open = skip_separators(text, i + 1 + end + 1);
            if !text[open..].starts_with('[') {
                return Err(syntax(name, "expected '[' after section name"));
            }
            let body_start = open + 1;
            let close = text[body_start..]
                .find(']')
                .ok_or_else(|| syntax(name, "unterminated '['"))?;
            let body = &text[body_start..body_start + close];
            if body.contains('[') {
                return Err(syntax(name, "nested '['"));
            }
            out.push(Item::Section { name: name.to_string(), body: body.to_string() });
            i = body_start + close + 1;
        } else if rest.starts_with(',') {
            // some models put commas between sections
            i += 1;
        } else {
            let c = rest.chars().next().unwrap_or(' ');
            return Err(syntax("document", format!("unexpected {c:?} at offset {i}")));
        }
        i = skip_separators(text, i);
    }
    Ok(out)
}

/// Splits a section body into tuples of trimmed fields.
pub(crate) fn tuples(body: &str, context: &str) -> Result<Vec<Vec<String>>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        i = skip_separators(body, i);
        while body[i..].starts_with(',') {
            i = skip_separators(body, i + 1);
        }
        if i >= body.len() {
            return Ok(out);
        }
        if !body[i..].starts_with('(') {
            let c = body[i..].chars().next().unwrap_or(' ');
            return Err(syntax(context, format!("expected '(' but found {c:?}")));
        }
        let close = body[i + 1..]
            .find(')')
            .ok_or_else(|| syntax(context, "unterminated '('"))?;
        let inner = &body[i + 1..i + 1 + close];
        if inner.contains('(') {
            return Err(syntax(context, "nested '('"));
        }
        out.push(inner.split(',').map(|f| clean_field(f)).collect());
        i = i + 1 + close + 1;
    }
}

fn clean_field(f: &str) -> String {
    let mut s = f.to_string();
    for esc in ["\\n", "\\r", "\\t"] {
        s = s.replace(esc, " ");
    }
    s.trim().to_string()
}

/// A label as it must appear in a tuple: non-empty, no whitespace-only text,
/// none of the characters the prompts tell the model to avoid.
pub(crate) fn check_label(raw: &str, context: &str) -> Result<String, ParseError> {
    let label = raw.trim();
    if label.is_empty() {
        return Err(syntax(context, "empty label"));
    }
    if let Some(c) = label.chars().find(|c| FORBIDDEN.contains(c) || c.is_control()) {
        return Err(syntax(context, format!("label {label:?} contains forbidden character {c:?}")));
    }
    Ok(label.to_string())
}

/// Trimmed label with whitespace runs and apostrophes turned into hyphens.
pub fn normalize_label(s: &str) -> String {
    let mut out = String::new();
    let mut pending = false;
    for c in s.trim().chars() {
        if c.is_whitespace() || c == '\'' {
            pending = true;
        } else {
            if pending && !out.is_empty() {
                out.push('-');
            }
            pending = false;
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_newlines_separate_sections() {
        let items = items(r"\n#A#[(0, x, 1)]\n#B#[]\n").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[1], Item::Section { name: "B".into(), body: String::new() });
    }

    #[test]
    fn markers_and_sections() {
        let items = items(">>>MEMBERS>>>#Father#[(0,a,1)]>>>HVAC>>>#Heating#\n[(0,b,2)]").unwrap();
        assert_eq!(items[0], Item::Marker("MEMBERS".into()));
        assert_eq!(items[3], Item::Section { name: "Heating".into(), body: "(0,b,2)".into() });
    }

    #[test]
    fn stray_text_is_rejected() {
        assert!(items("hello #A#[]").is_err());
        assert!(items("#A#[(0,a,1)").is_err());
        assert!(items("#A#[(0,[a],1)]").is_err());
    }

    #[test]
    fn tuple_fields_are_trimmed() {
        let t = tuples(" (0, Cold-clear, -5.0), (1,Cold-clear , -4.5),", "T").unwrap();
        assert_eq!(t, vec![vec!["0", "Cold-clear", "-5.0"], vec!["1", "Cold-clear", "-4.5"]]);
        assert!(tuples("(0, a", "T").is_err());
        assert!(tuples("0, a)", "T").is_err());
    }

    #[test]
    fn labels_reject_quotes() {
        assert!(check_label("Father's help", "x").is_err());
        assert!(check_label("Father-s-help", "x").is_ok());
        assert!(check_label("  ", "x").is_err());
    }

    #[test]
    fn normalization_hyphenates() {
        assert_eq!(normalize_label(" Foster Father "), "Foster-Father");
        assert_eq!(normalize_label("Father's"), "Father-s");
        assert_eq!(normalize_label("Step-Mother"), "Step-Mother");
    }
}
