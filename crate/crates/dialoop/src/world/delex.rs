//! Surface-text delexicalization and its inverse.
//!
//! The world guarantees that every surface value string belongs to exactly
//! one slot name, so replacement needs no disambiguation: the longest match
//! wins and becomes `[value_<slot>]`.

use std::collections::BTreeMap;

use regex::Regex;

use super::World;

pub struct Delexicalizer {
    pattern: Regex,
    value_to_slot: BTreeMap<String, String>,
}

impl Delexicalizer {
    pub fn new(world: &World) -> Self {
        let value_to_slot = world.surface_values();
        let mut values: Vec<&String> = value_to_slot.keys().collect();
        // Longest first so "2 nights" beats "2" and full names beat their
        // parts; ties broken alphabetically for determinism.
        values.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let alternation = values
            .iter()
            .map(|v| regex::escape(v))
            .collect::<Vec<_>>()
            .join("|");
        let pattern = Regex::new(&format!(r"(?i)\b(?:{alternation})\b"))
            .expect("escaped alternation is a valid pattern");
        Delexicalizer { pattern, value_to_slot }
    }

    /// Replace every known value with its `[value_<slot>]` placeholder.
    /// Returns the new text and the number of replacements.
    pub fn delexicalize(&self, text: &str) -> (String, usize) {
        let mut count = 0;
        let out = self
            .pattern
            .replace_all(text, |caps: &regex::Captures<'_>| {
                count += 1;
                let matched = caps.get(0).expect("group 0").as_str().to_lowercase();
                let slot = self
                    .value_to_slot
                    .get(&matched)
                    .expect("pattern only matches known values");
                format!("[value_{slot}]")
            })
            .into_owned();
        (out, count)
    }
}

/// Fill `[value_<slot>]` placeholders via the caller's lookup (typically:
/// selected entity attribute, then belief value, then match count). Unknown
/// placeholders become the literal `unknown` and are counted.
pub fn lexicalize(text: &str, lookup: impl Fn(&str) -> Option<String>) -> (String, usize) {
    let mut unresolved = 0;
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        let slot = token
            .strip_prefix("[value_")
            .and_then(|t| t.strip_suffix(']'));
        match slot {
            Some(slot) => match lookup(slot) {
                Some(value) => out.push_str(&value),
                None => {
                    unresolved += 1;
                    out.push_str("unknown");
                }
            },
            None => out.push_str(token),
        }
    }
    (out, unresolved)
}
