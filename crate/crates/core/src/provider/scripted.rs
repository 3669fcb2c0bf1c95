use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{CompletionRequest, CompletionResponse, Provider, ProviderError};

/// Replays canned completions keyed on the request digest.
///
/// A key matches a digest such as `score:step6:try1` when it equals the
/// digest or is a `:`-delimited prefix of it (`score:step6`, `score`). The
/// longest matching key wins.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    entries: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct FixtureLine {
    key: String,
    response: String,
}

impl ScriptedProvider {
    pub fn new<I, K, V>(entries: I) -> Result<Self, ProviderError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            let k = k.into();
            if k.is_empty() {
                return Err(ProviderError::Config("fixture key must not be empty".into()));
            }
            if map.insert(k.clone(), v.into()).is_some() {
                return Err(ProviderError::Config(format!("duplicate fixture key `{k}`")));
            }
        }
        Ok(ScriptedProvider { entries: map })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn resolve(&self, digest: &str) -> Option<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| {
                digest == k.as_str()
                    || (digest.starts_with(k.as_str()) && digest[k.len()..].starts_with(':'))
            })
            .max_by_key(|(k, _)| k.len())
            .map(|(_, v)| v.as_str())
    }

    fn nearest(&self, role: &str) -> Vec<String> {
        let same_role: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.split(':').next() == Some(role))
            .take(5)
            .cloned()
            .collect();
        if same_role.is_empty() {
            self.entries.keys().take(5).cloned().collect()
        } else {
            same_role
        }
    }
}

impl Provider for ScriptedProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        if request.messages.is_empty() {
            return Err(ProviderError::EmptyRequest);
        }
        let (digest, role, stage) = match &request.tag {
            Some(tag) => (tag.digest(), tag.role.as_str().to_string(), tag.stage()),
            None => ("untagged".to_string(), "untagged".to_string(), "-".to_string()),
        };
        match self.resolve(&digest) {
            Some(content) => Ok(CompletionResponse::estimated(request, content.to_string())),
            None => Err(ProviderError::ScriptedMiss {
                nearest: self.nearest(&role),
                role,
                stage,
                digest,
            }),
        }
    }
}

/// Parses a fixture document: one `{"key": ..., "response": ...}` object per
/// line. Blank lines and lines starting with `#` are skipped.
pub fn parse_fixture(text: &str) -> Result<ScriptedProvider, ProviderError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: FixtureLine = serde_json::from_str(trimmed)
            .map_err(|e| ProviderError::Config(format!("fixture line {}: {e}", i + 1)))?;
        entries.push((rec.key, rec.response));
    }
    ScriptedProvider::new(entries)
}

pub fn load_fixture(path: &Path) -> Result<ScriptedProvider, ProviderError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProviderError::Config(format!("cannot read fixture {}: {e}", path.display())))?;
    parse_fixture(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::PromptRole;
    use crate::provider::{ChatMessage, RequestTag};

    fn req(role: PromptRole, step: Option<usize>, attempt: u32) -> CompletionRequest {
        CompletionRequest::new("m", vec![ChatMessage::user("prompt")]).with_tag(RequestTag {
            role,
            step,
            attempt,
        })
    }

    #[test]
    fn resolves_longest_key() {
        let p = ScriptedProvider::new([
            ("score", "25"),
            ("score:step6", "50"),
            ("holistic:init", "(1) find it"),
        ])
        .unwrap();
        assert_eq!(p.complete(&req(PromptRole::Score, Some(6), 1)).unwrap().content, "50");
        assert_eq!(p.complete(&req(PromptRole::Score, Some(5), 1)).unwrap().content, "25");
        assert_eq!(p.complete(&req(PromptRole::Score, Some(6), 2)).unwrap().content, "50");
        assert_eq!(
            p.complete(&req(PromptRole::Holistic, None, 1)).unwrap().content,
            "(1) find it"
        );
    }

    #[test]
    fn step_prefix_does_not_bleed() {
        let p = ScriptedProvider::new([("score:step1", "10")]).unwrap();
        assert!(p.complete(&req(PromptRole::Score, Some(12), 1)).is_err());
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = parse_fixture(
            "{\"key\":\"local\",\"response\":\"a\"}\n{\"key\":\"local\",\"response\":\"b\"}\n",
        )
        .unwrap_err();
        assert!(matches!(err, ProviderError::Config(m) if m.contains("duplicate")));
    }

    #[test]
    fn miss_names_role_and_step() {
        let p = ScriptedProvider::new([("decision:step1", "go to desk 1")]).unwrap();
        let err = p.complete(&req(PromptRole::Decision, Some(4), 1)).unwrap_err();
        match &err {
            ProviderError::ScriptedMiss {
                role, stage, nearest, ..
            } => {
                assert_eq!(role, "decision");
                assert_eq!(stage, "step4");
                assert_eq!(nearest, &vec!["decision:step1".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("decision") && msg.contains("step4"));
    }

    #[test]
    fn deterministic_usage() {
        let p = ScriptedProvider::new([("local", "Action: go to desk 1")]).unwrap();
        let a = p.complete(&req(PromptRole::Local, Some(1), 1)).unwrap();
        let b = p.complete(&req(PromptRole::Local, Some(1), 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixture_comments_and_blank_lines() {
        let p = parse_fixture("# header\n\n{\"key\":\"score\",\"response\":\"7\"}\n").unwrap();
        assert_eq!(p.keys().collect::<Vec<_>>(), vec!["score"]);
    }
}
