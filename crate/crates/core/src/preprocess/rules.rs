//! Semantic mapping: replace synonymous words and phrases with a standard
//! token. Rules come from a TSV file (pattern, replacement, kind); literal
//! rules match at word boundaries, longest pattern first, and text produced
//! by one rule is never re-matched by a later one.

use regex::Regex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Literal,
    Regex,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub pattern: String,
    pub replacement: String,
    pub kind: RuleKind,
    compiled: Option<Regex>,
}

/// Ordered replacement rules. Literal rules are applied longest-pattern
/// first (file order breaks ties); regex rules follow in file order.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// The rule file shipped with the crate.
    pub fn default_rules() -> Result<Self> {
        Self::from_tsv_str(include_str!("../../assets/rules.tsv"), "<builtin>")
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let name = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path)?;
        Self::from_tsv_str(&text, &name)
    }

    /// Parse TSV: `pattern<TAB>replacement<TAB>kind`, kind one of
    /// literal|regex; '#' starts a comment line.
    pub fn from_tsv_str(text: &str, source: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (pattern, replacement, kind) = match (cols.next(), cols.next(), cols.next()) {
                (Some(p), Some(r), Some(k)) => (p.trim(), r.trim(), k.trim()),
                _ => {
                    return Err(Error::BadRule {
                        file: source.to_string(),
                        line: line_no,
                        message: "expected 3 tab-separated columns: pattern, replacement, kind"
                            .into(),
                    })
                }
            };
            if pattern.is_empty() {
                return Err(Error::BadRule {
                    file: source.to_string(),
                    line: line_no,
                    message: "empty pattern".into(),
                });
            }
            if replacement.is_empty() || replacement.contains(char::is_whitespace) {
                return Err(Error::BadRule {
                    file: source.to_string(),
                    line: line_no,
                    message: format!("replacement must be a single token, got {replacement:?}"),
                });
            }
            let kind = match kind {
                "literal" => RuleKind::Literal,
                "regex" => RuleKind::Regex,
                other => {
                    return Err(Error::BadRule {
                        file: source.to_string(),
                        line: line_no,
                        message: format!("unknown kind {other:?} (expected literal or regex)"),
                    })
                }
            };
            let compiled = match kind {
                RuleKind::Regex => Some(Regex::new(pattern).map_err(|e| Error::BadRule {
                    file: source.to_string(),
                    line: line_no,
                    message: format!("bad regex: {e}"),
                })?),
                RuleKind::Literal => None,
            };
            rules.push(Rule {
                pattern: pattern.to_string(),
                replacement: replacement.to_string(),
                kind,
                compiled,
            });
        }

        // Priority: literals longest first, then regexes; stable within a class.
        rules.sort_by_key(|r| match r.kind {
            RuleKind::Literal => (0usize, usize::MAX - r.pattern.len()),
            RuleKind::Regex => (1, 0),
        });
        Ok(Self { rules })
    }

    /// Apply every rule in priority order with a single left-to-right scan
    /// each. Replacement output is protected from later rules.
    pub fn apply(&self, text: &str) -> String {
        // (text, protected): protected segments hold replacement tokens.
        let mut segments: Vec<(String, bool)> = vec![(text.to_string(), false)];
        for rule in &self.rules {
            let mut next = Vec::with_capacity(segments.len());
            for (seg, protected) in segments {
                if protected {
                    next.push((seg, protected));
                    continue;
                }
                split_segment(&seg, rule, &mut next);
            }
            segments = next;
        }
        segments
            .into_iter()
            .map(|(s, _)| s)
            .collect::<Vec<_>>()
            .join("")
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Cut one unprotected segment around each match of `rule`, pushing
/// protected replacement segments in between.
fn split_segment(seg: &str, rule: &Rule, out: &mut Vec<(String, bool)>) {
    let mut cursor = 0;
    match rule.kind {
        RuleKind::Literal => {
            let pat = rule.pattern.as_bytes();
            let bytes = seg.as_bytes();
            let mut start = 0;
            while start + pat.len() <= bytes.len() {
                match find_at(bytes, pat, start) {
                    Some(pos) => {
                        let end = pos + pat.len();
                        let left_ok = pos == 0 || !is_word_byte(bytes[pos - 1]);
                        let right_ok = end == bytes.len() || !is_word_byte(bytes[end]);
                        if left_ok && right_ok {
                            if pos > cursor {
                                out.push((seg[cursor..pos].to_string(), false));
                            }
                            out.push((rule.replacement.clone(), true));
                            cursor = end;
                            start = end;
                        } else {
                            start = pos + 1;
                        }
                    }
                    None => break,
                }
            }
        }
        RuleKind::Regex => {
            let re = rule.compiled.as_ref().expect("compiled at load time");
            for m in re.find_iter(seg) {
                if m.start() < cursor || m.start() == m.end() {
                    continue;
                }
                if m.start() > cursor {
                    out.push((seg[cursor..m.start()].to_string(), false));
                }
                out.push((rule.replacement.clone(), true));
                cursor = m.end();
            }
        }
    }
    if cursor < seg.len() {
        out.push((seg[cursor..].to_string(), false));
    }
}

fn find_at(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    haystack[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// Apply a rule set to text (the semantic-mapping stage).
pub fn apply_semantic_map(text: &str, rules: &RuleSet) -> String {
    rules.apply(text)
}
