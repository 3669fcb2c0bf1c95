//! Parsers for the free-text completions of each reflecting role.

use serde::{Deserialize, Serialize};

use crate::strategy::LocalStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Normalized,
    /// Neither completion named an action; the first local candidate was used.
    LocalFallback,
}

/// Strips a leading list marker: `1.`, `2)`, `(3)`, `-`, `*`, `•`.
fn strip_marker(line: &str) -> Option<&str> {
    let l = line.trim_start();
    for bullet in ["- ", "* ", "• "] {
        if let Some(rest) = l.strip_prefix(bullet) {
            return Some(rest.trim());
        }
    }
    let (open, body) = match l.strip_prefix('(') {
        Some(rest) => (true, rest),
        None => (false, l),
    };
    let digits = body.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return None;
    }
    let rest = &body[digits..];
    let rest = if open {
        rest.strip_prefix(')')?
    } else {
        rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?
    };
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    Some(rest.trim())
}

fn trim_item(s: &str) -> String {
    s.trim().trim_end_matches(['.', ';', ',']).trim().to_string()
}

/// Splits `(1) a (2) b` style inline enumerations.
fn inline_markers(text: &str) -> Vec<String> {
    let flat = text.replace(['\n', '\r'], " ");
    let mut starts = Vec::new();
    let bytes = flat.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'(' {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 1 && j < bytes.len() && bytes[j] == b')' {
                starts.push((i, j + 1));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    if starts.len() < 2 {
        return Vec::new();
    }
    starts
        .iter()
        .enumerate()
        .map(|(k, &(_, body))| {
            let end = starts.get(k + 1).map_or(flat.len(), |n| n.0);
            trim_item(&flat[body..end])
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Ordered sub-goals from a holistic completion, plus a flag set when the
/// text had no list structure and was kept whole.
pub fn parse_subgoals(text: &str) -> (Vec<String>, bool) {
    let listed: Vec<String> = text
        .lines()
        .filter_map(strip_marker)
        .map(trim_item)
        .filter(|s| !s.is_empty())
        .collect();
    if listed.len() >= 2 {
        return (listed, false);
    }
    let inline = inline_markers(text);
    if !inline.is_empty() {
        return (inline, false);
    }
    if !listed.is_empty() {
        return (listed, false);
    }
    let whole = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if whole.is_empty() {
        (Vec::new(), true)
    } else {
        (vec![whole], true)
    }
}

/// Case-fold, trim, collapse whitespace, drop surrounding quotes and
/// trailing sentence punctuation.
pub fn normalize(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed
        .trim_matches(|c| matches!(c, '"' | '\'' | '`'))
        .trim_end_matches(['.', ',', ';', ':', '!', '?', '"', '\'', '`'])
        .trim()
        .to_string()
}

fn suffix_match<'a>(line: &str, available: &'a [String]) -> Option<&'a String> {
    available
        .iter()
        .filter(|a| {
            let a = normalize(a);
            !a.is_empty()
                && line.ends_with(&a)
                && line[..line.len() - a.len()]
                    .chars()
                    .last()
                    .is_none_or(|c| !c.is_alphanumeric())
        })
        .max_by_key(|a| a.len())
}

/// Finds the action a completion names. Exact line matches win; otherwise
/// each line (last first) is normalized and compared for equality, then
/// for a suffix that starts at a word boundary.
pub fn match_action(text: &str, available: &[String]) -> Option<(String, MatchKind)> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    for line in &lines {
        if let Some(a) = available.iter().find(|a| a.as_str() == *line) {
            return Some((a.clone(), MatchKind::Exact));
        }
    }
    let whole = normalize(text);
    for line in lines.iter().rev() {
        let n = normalize(line);
        if let Some(a) = available.iter().find(|a| normalize(a) == n) {
            return Some((a.clone(), MatchKind::Normalized));
        }
    }
    for line in lines.iter().rev() {
        if let Some(a) = suffix_match(&normalize(line), available) {
            return Some((a.clone(), MatchKind::Normalized));
        }
    }
    suffix_match(&whole, available).map(|a| (a.clone(), MatchKind::Normalized))
}

fn strip_label<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let head = line.get(..label.len())?;
    if head.eq_ignore_ascii_case(label) {
        Some(line[label.len()..].trim())
    } else {
        None
    }
}

/// Local strategy from a completion: `Action:` lines and list items that
/// name an available action, plus `Guidance:` and `Alignment:` lines.
pub fn parse_local(text: &str, available: &[String]) -> LocalStrategy {
    let mut local = LocalStrategy::default();
    for raw in text.lines() {
        let line = raw.trim();
        let line = strip_marker(line).unwrap_or(line);
        if let Some(g) = strip_label(line, "guidance:") {
            local.guidance = g.to_string();
            continue;
        }
        if let Some(n) = strip_label(line, "alignment:") {
            local.alignment_note = n.to_string();
            continue;
        }
        let candidate = strip_label(line, "action:").unwrap_or(line);
        let n = normalize(candidate);
        if let Some(a) = available.iter().find(|a| normalize(a) == n) {
            if !local.candidate_actions.contains(a) {
                local.candidate_actions.push(a.clone());
            }
        }
    }
    local
}

/// Last integer in `0..=100`, ignoring negatives, decimals and the
/// denominator of `n/m`.
pub fn parse_score(text: &str) -> Option<u8> {
    let chars: Vec<char> = text.chars().collect();
    let mut best = None;
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let prev = start.checked_sub(1).map(|p| chars[p]);
        let next = chars.get(i).copied();
        let after_next = chars.get(i + 1).copied();
        let negative = prev == Some('-') && start.checked_sub(2).is_none_or(|p| !chars[p].is_alphanumeric());
        let fraction_tail = prev == Some('.') && start >= 2 && chars[start - 2].is_ascii_digit();
        let denominator = prev == Some('/');
        let decimal = next == Some('.') && after_next.is_some_and(|c| c.is_ascii_digit());
        if negative || fraction_tail || denominator || decimal {
            continue;
        }
        let digits: String = chars[start..i].iter().collect();
        if let Ok(v) = digits.parse::<u32>() {
            if v <= 100 {
                best = Some(v as u8);
            }
        }
    }
    best
}
