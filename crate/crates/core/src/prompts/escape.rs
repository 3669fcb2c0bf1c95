//! Fencing for free text embedded in prompts.
//!
//! Environment and model text is wrapped in `«` / `»`. Inside the fence a
//! literal `«` or `»` is doubled, backslash is doubled, and line breaks are
//! written as `\n` / `\r`, so embedded text can neither close the fence nor
//! break the line structure of the template around it.

pub const OPEN: char = '«';
pub const CLOSE: char = '»';

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            OPEN => out.push_str("««"),
            CLOSE => out.push_str("»»"),
            c => out.push(c),
        }
    }
    out
}

pub fn fence(text: &str) -> String {
    format!("{OPEN}{}{CLOSE}", escape(text))
}

/// Inverse of [`fence`]; `None` if `fenced` is not a single well-formed fence.
pub fn unfence(fenced: &str) -> Option<String> {
    let inner = fenced.strip_prefix(OPEN)?.strip_suffix(CLOSE)?;
    let mut out = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next()? {
                '\\' => out.push('\\'),
                'n' => out.push('\n'),
                'r' => out.push('\r'),
                _ => return None,
            },
            OPEN | CLOSE => {
                if chars.next()? != c {
                    return None;
                }
                out.push(c);
            }
            c => out.push(c),
        }
    }
    Some(out)
}

/// First `max_chars` characters of `text`, with `...` appended when cut.
pub fn excerpt(text: &str, max_chars: usize) -> String {
    let mut it = text.chars();
    let head: String = it.by_ref().take(max_chars).collect();
    if it.next().is_some() {
        format!("{head}...")
    } else {
        head
    }
}
