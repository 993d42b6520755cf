//! Text span codec for belief states, dialog acts, and goal states.
//!
//! Models read and emit flat token sequences, so every structured object has
//! a canonical serialized form and a tolerant parser. Serialization is
//! deterministic: equal objects yield byte-identical text. Parsers are total:
//! they never fail, they skip tokens they cannot place and report how many
//! were skipped.
//!
//! Formats (full grammar in `docs/span-grammar.ebnf`):
//!
//! - belief: `[domain] slot value… slot value… [domain2] …`
//! - act: `[domain] [intent] slot slot [intent2] slot … [domain2] …`
//!   (slots only; act values are recovered from belief or goal state)
//! - goal state: `[domain] [inform] slot value… [book] slot value… [request] slot…`
//! - db result: a single token `<db_0>` .. `<db_3>`

use std::collections::BTreeMap;

use super::act::{ActItem, DialogAct, Intent};
use super::goal::{ConstraintKind, GoalState};
use super::state::BeliefState;

/// Vocabulary context for span work: canonical domain and slot order plus the
/// closed value list of every value-carrying slot. Built from the world's
/// ontology; parsers use it to tell slots, values, and noise apart.
#[derive(Debug, Clone, Default)]
pub struct SpanLexicon {
    domains: Vec<String>,
    /// domain -> all slot names in canonical order.
    slots: BTreeMap<String, Vec<String>>,
    /// domain -> slot -> tokenized values, longest first.
    values: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
}

impl SpanLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a domain; canonical domain order is registration order.
    pub fn push_domain(&mut self, domain: impl Into<String>) {
        let domain = domain.into();
        if !self.domains.contains(&domain) {
            self.slots.entry(domain.clone()).or_default();
            self.domains.push(domain);
        }
    }

    /// Register a slot under a domain; canonical slot order is registration
    /// order. The domain is registered implicitly if new.
    pub fn push_slot(&mut self, domain: &str, slot: impl Into<String>) {
        self.push_domain(domain);
        let slots = self.slots.get_mut(domain).expect("domain just registered");
        let slot = slot.into();
        if !slots.contains(&slot) {
            slots.push(slot);
        }
    }

    /// Register a legal value for a slot. Multi-word values are tokenized on
    /// whitespace.
    pub fn push_value(&mut self, domain: &str, slot: &str, value: &str) {
        self.push_slot(domain, slot);
        let tokens: Vec<String> = value.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return;
        }
        let list = self
            .values
            .entry(domain.to_string())
            .or_default()
            .entry(slot.to_string())
            .or_default();
        if !list.contains(&tokens) {
            list.push(tokens);
            list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        }
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn slots(&self, domain: &str) -> &[String] {
        self.slots.get(domain).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_domain(&self, domain: &str) -> bool {
        self.slots.contains_key(domain)
    }

    pub fn has_slot(&self, domain: &str, slot: &str) -> bool {
        self.slots(domain).iter().any(|s| s == slot)
    }

    /// Canonical rank: registration order, then the general domain, then
    /// anything unknown.
    pub fn domain_rank(&self, domain: &str) -> usize {
        if domain == super::act::GENERAL_DOMAIN {
            return self.domains.len();
        }
        self.domains
            .iter()
            .position(|d| d == domain)
            .unwrap_or(usize::MAX)
    }

    pub fn slot_rank(&self, domain: &str, slot: &str) -> usize {
        self.slots(domain)
            .iter()
            .position(|s| s == slot)
            .unwrap_or(usize::MAX)
    }

    /// Longest legal value of `(domain, slot)` that prefixes `tokens`.
    /// Returns the value joined with single spaces and the token count.
    pub fn match_value(&self, domain: &str, slot: &str, tokens: &[&str]) -> Option<(String, usize)> {
        let candidates = self.values.get(domain)?.get(slot)?;
        for value in candidates {
            if value.len() <= tokens.len()
                && value.iter().map(String::as_str).eq(tokens[..value.len()].iter().copied())
            {
                return Some((value.join(" "), value.len()));
            }
        }
        None
    }
}

fn bracket_name(token: &str) -> Option<&str> {
    token.strip_prefix('[').and_then(|t| t.strip_suffix(']'))
}

/// `[domain] slot value slot value …`, domains and slots in canonical order.
pub fn serialize_belief(belief: &BeliefState, lex: &SpanLexicon) -> String {
    let mut domains: Vec<_> = belief
        .domains
        .iter()
        .filter(|(_, slots)| !slots.is_empty())
        .collect();
    domains.sort_by_key(|(d, _)| (lex.domain_rank(d), d.as_str()));

    let mut parts: Vec<&str> = Vec::new();
    let mut headers: Vec<String> = Vec::new();
    for (domain, _) in &domains {
        headers.push(format!("[{domain}]"));
    }
    for ((domain, slots), header) in domains.iter().zip(&headers) {
        parts.push(header);
        let mut ordered: Vec<_> = slots.iter().collect();
        ordered.sort_by_key(|(s, _)| (lex.slot_rank(domain, s), s.as_str()));
        for (slot, value) in ordered {
            parts.push(slot);
            parts.push(value);
        }
    }
    parts.join(" ")
}

/// Tolerant inverse of [`serialize_belief`]. Returns the parsed state and the
/// number of tokens that could not be placed.
pub fn parse_belief(text: &str, lex: &SpanLexicon) -> (BeliefState, usize) {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut belief = BeliefState::default();
    let mut skipped = 0usize;
    let mut domain: Option<String> = None;
    let mut i = 0;
    while i < tokens.len() {
        let token = tokens[i];
        if let Some(name) = bracket_name(token) {
            if lex.has_domain(name) {
                domain = Some(name.to_string());
            } else {
                skipped += 1;
            }
            i += 1;
            continue;
        }
        let Some(d) = domain.as_deref() else {
            skipped += 1;
            i += 1;
            continue;
        };
        if lex.has_slot(d, token) {
            // Scan forward for this slot's value, skipping noise, stopping at
            // the next slot or bracket.
            let slot = token;
            let mut j = i + 1;
            let mut found = false;
            while j < tokens.len() && bracket_name(tokens[j]).is_none() && !lex.has_slot(d, tokens[j])
            {
                if let Some((value, len)) = lex.match_value(d, slot, &tokens[j..]) {
                    belief.set(d, slot, value);
                    j += len;
                    found = true;
                    break;
                }
                skipped += 1;
                j += 1;
            }
            if !found {
                skipped += 1; // the orphaned slot token
            }
            i = j;
        } else {
            skipped += 1;
            i += 1;
        }
    }
    (belief, skipped)
}

/// `[domain] [intent] slot slot [intent2] … [domain2] …` with canonical
/// ordering. Values are never serialized in acts.
pub fn serialize_act(act: &DialogAct, lex: &SpanLexicon) -> String {
    let mut sorted = act.clone();
    sorted.canonicalize(|d| lex.domain_rank(d), |d, s| lex.slot_rank(d, s));

    let mut parts: Vec<String> = Vec::new();
    let mut cur_domain: Option<&str> = None;
    let mut cur_intent: Option<Intent> = None;
    let mut prev_sig: Option<(&str, Intent, Option<&str>)> = None;
    for item in sorted.items() {
        let sig = item.signature();
        if prev_sig == Some(sig) {
            continue;
        }
        prev_sig = Some(sig);
        if cur_domain != Some(item.domain.as_str()) {
            parts.push(format!("[{}]", item.domain));
            cur_domain = Some(item.domain.as_str());
            cur_intent = None;
        }
        if cur_intent != Some(item.intent) {
            parts.push(format!("[{}]", item.intent.as_str()));
            cur_intent = Some(item.intent);
        }
        if let Some(slot) = &item.slot {
            parts.push(slot.clone());
        }
    }
    parts.join(" ")
}

/// Tolerant inverse of [`serialize_act`]. Slots are collected as written
/// (no ontology validation); items appear in reading order and parsed
/// inform/book items carry no value.
pub fn parse_act(text: &str) -> (DialogAct, usize) {
    let mut act = DialogAct::empty();
    let mut skipped = 0usize;
    let mut domain: Option<String> = None;
    let mut intent: Option<Intent> = None;
    for token in text.split_whitespace() {
        if let Some(name) = bracket_name(token) {
            if let Some(parsed) = Intent::from_str_opt(name) {
                match domain.as_deref() {
                    Some(d) => {
                        intent = Some(parsed);
                        if !parsed.carries_slot() {
                            // Slotless intents are complete at the header.
                            act.push(ActItem::new(d, parsed, None, None));
                        }
                    }
                    None => skipped += 1,
                }
            } else {
                domain = Some(name.to_string());
                intent = None;
            }
            continue;
        }
        match (domain.as_deref(), intent) {
            (Some(d), Some(it)) if it.carries_slot() => {
                act.push(ActItem::new(d, it, Some(token.to_string()), None));
            }
            _ => skipped += 1,
        }
    }
    (act, skipped)
}

/// `[domain] [inform] slot value… [book] slot value… [request] slot…` per
/// domain, canonical ordering, empty sections omitted.
pub fn serialize_goal_state(goal: &GoalState, lex: &SpanLexicon) -> String {
    let mut domains: Vec<_> = goal.domains.iter().filter(|(_, ds)| !ds.is_empty()).collect();
    domains.sort_by_key(|(d, _)| (lex.domain_rank(d), d.as_str()));

    let mut parts: Vec<String> = Vec::new();
    for (domain, state) in domains {
        parts.push(format!("[{domain}]"));
        for kind in [ConstraintKind::Inform, ConstraintKind::Book] {
            let mut entries: Vec<_> = state
                .constraints
                .iter()
                .filter(|(_, (_, k))| *k == kind)
                .collect();
            if entries.is_empty() {
                continue;
            }
            entries.sort_by_key(|(s, _)| (lex.slot_rank(domain, s), s.as_str()));
            parts.push(format!("[{}]", kind.intent().as_str()));
            for (slot, (value, _)) in entries {
                parts.push(slot.clone());
                parts.push(value.clone());
            }
        }
        if !state.requests.is_empty() {
            let mut requests: Vec<_> = state.requests.iter().collect();
            requests.sort_by_key(|s| (lex.slot_rank(domain, s), s.as_str()));
            parts.push(format!("[{}]", Intent::Request.as_str()));
            for slot in requests {
                parts.push(slot.clone());
            }
        }
    }
    parts.join(" ")
}

/// Tolerant inverse of [`serialize_goal_state`].
pub fn parse_goal_state(text: &str, lex: &SpanLexicon) -> (GoalState, usize) {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut goal = GoalState::default();
    let mut skipped = 0usize;
    let mut domain: Option<String> = None;
    let mut section: Option<Intent> = None;
    let mut i = 0;
    while i < tokens.len() {
        let token = tokens[i];
        if let Some(name) = bracket_name(token) {
            match Intent::from_str_opt(name) {
                Some(it @ (Intent::Inform | Intent::Book | Intent::Request)) => {
                    if domain.is_some() {
                        section = Some(it);
                    } else {
                        skipped += 1;
                    }
                }
                Some(_) => skipped += 1,
                None => {
                    if lex.has_domain(name) {
                        domain = Some(name.to_string());
                        section = None;
                    } else {
                        skipped += 1;
                    }
                }
            }
            i += 1;
            continue;
        }
        let (Some(d), Some(sec)) = (domain.as_deref(), section) else {
            skipped += 1;
            i += 1;
            continue;
        };
        if !lex.has_slot(d, token) {
            skipped += 1;
            i += 1;
            continue;
        }
        match sec {
            Intent::Request => {
                goal.domains.entry(d.to_string()).or_default().requests.insert(token.to_string());
                i += 1;
            }
            Intent::Inform | Intent::Book => {
                let slot = token;
                let kind = if sec == Intent::Book {
                    ConstraintKind::Book
                } else {
                    ConstraintKind::Inform
                };
                let mut j = i + 1;
                let mut found = false;
                while j < tokens.len()
                    && bracket_name(tokens[j]).is_none()
                    && !lex.has_slot(d, tokens[j])
                {
                    if let Some((value, len)) = lex.match_value(d, slot, &tokens[j..]) {
                        goal.domains
                            .entry(d.to_string())
                            .or_default()
                            .constraints
                            .insert(slot.to_string(), (value, kind));
                        j += len;
                        found = true;
                        break;
                    }
                    skipped += 1;
                    j += 1;
                }
                if !found {
                    skipped += 1;
                }
                i = j;
            }
            _ => unreachable!("section is only ever inform, book, or request"),
        }
    }
    (goal, skipped)
}

/// Database result bucket as a single vocabulary token.
pub fn db_token(bucket: u8) -> String {
    format!("<db_{bucket}>")
}

pub fn parse_db_token(token: &str) -> Option<u8> {
    let inner = token.strip_prefix("<db_")?.strip_suffix('>')?;
    let bucket: u8 = inner.parse().ok()?;
    (bucket <= 3).then_some(bucket)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> SpanLexicon {
        let mut lex = SpanLexicon::new();
        for (slot, values) in [
            ("food", vec!["italian", "chinese", "swedish"]),
            ("pricerange", vec!["cheap", "moderate", "expensive"]),
            ("area", vec!["north", "south", "centre"]),
            ("day", vec!["monday", "tuesday"]),
            ("people", vec!["2", "4"]),
        ] {
            for v in values {
                lex.push_value("restaurant", slot, v);
            }
        }
        for slot in ["name", "phone", "address"] {
            lex.push_slot("restaurant", slot);
        }
        lex.push_value("hotel", "stars", "two star");
        lex.push_value("hotel", "stars", "four star");
        lex.push_slot("hotel", "phone");
        lex
    }

    #[test]
    fn belief_fixture() {
        let lex = lexicon();
        let mut belief = BeliefState::default();
        belief.set("restaurant", "pricerange", "expensive");
        belief.set("restaurant", "area", "north");
        let text = serialize_belief(&belief, &lex);
        assert_eq!(text, "[restaurant] pricerange expensive area north");
        let (parsed, skipped) = parse_belief(&text, &lex);
        assert_eq!(parsed, belief);
        assert_eq!(skipped, 0);
        assert_eq!(serialize_belief(&BeliefState::default(), &lex), "");
    }

    #[test]
    fn belief_parse_skips_noise() {
        let lex = lexicon();
        let (parsed, skipped) = parse_belief("[restaurant] pricerange expensive garbage", &lex);
        assert_eq!(parsed.get("restaurant", "pricerange"), Some("expensive"));
        assert_eq!(parsed.domains["restaurant"].len(), 1);
        assert_eq!(skipped, 1);

        // A value belonging to the wrong slot is noise too.
        let (parsed, skipped) = parse_belief(
            "[restaurant] pricerange expensive area north food north",
            &lex,
        );
        assert_eq!(parsed.domains["restaurant"].len(), 2);
        assert_eq!(skipped, 2);
    }

    #[test]
    fn belief_multiword_value() {
        let lex = lexicon();
        let mut belief = BeliefState::default();
        belief.set("hotel", "stars", "two star");
        let text = serialize_belief(&belief, &lex);
        assert_eq!(text, "[hotel] stars two star");
        let (parsed, skipped) = parse_belief(&text, &lex);
        assert_eq!(parsed, belief);
        assert_eq!(skipped, 0);
    }

    #[test]
    fn act_fixtures() {
        let lex = lexicon();
        let inform = DialogAct::from_items([ActItem::inform("restaurant", "name", "x")]);
        assert_eq!(serialize_act(&inform, &lex), "[restaurant] [inform] name");

        let mixed = DialogAct::from_items([
            ActItem::request("restaurant", "food"),
            ActItem::nooffer("restaurant", "area"),
            ActItem::nooffer("restaurant", "food"),
        ]);
        assert_eq!(
            serialize_act(&mixed, &lex),
            "[restaurant] [nooffer] food area [request] food"
        );

        let (parsed, skipped) = parse_act("[restaurant] [nooffer] food area [request] food");
        assert_eq!(skipped, 0);
        assert_eq!(parsed.len(), 3);
        assert_eq!(serialize_act(&parsed, &lex), "[restaurant] [nooffer] food area [request] food");
    }

    #[test]
    fn act_parse_is_tolerant() {
        let (parsed, skipped) = parse_act("name [inform] [restaurant] [bye] what [inform] name");
        // "name" has no domain/intent, "[inform]" has no domain, "what" sits
        // under the slotless bye intent.
        assert_eq!(skipped, 3);
        assert_eq!(
            serialize_act(&parsed, &SpanLexicon::new()),
            "[restaurant] [inform] name [bye]"
        );
        let (empty, _) = parse_act("");
        assert!(empty.is_empty());
    }

    #[test]
    fn goal_state_fixture() {
        let lex = lexicon();
        let mut goal = GoalState::default();
        let ds = goal.domains.entry("restaurant".into()).or_default();
        ds.constraints.insert("area".into(), ("north".into(), ConstraintKind::Inform));
        ds.requests.insert("phone".into());
        let text = serialize_goal_state(&goal, &lex);
        assert_eq!(text, "[restaurant] [inform] area north [request] phone");
        let (parsed, skipped) = parse_goal_state(&text, &lex);
        assert_eq!(parsed, goal);
        assert_eq!(skipped, 0);
        assert_eq!(serialize_goal_state(&GoalState::default(), &lex), "");
    }

    #[test]
    fn goal_state_book_section_round_trips() {
        let lex = lexicon();
        let mut goal = GoalState::default();
        let ds = goal.domains.entry("restaurant".into()).or_default();
        ds.constraints.insert("food".into(), ("swedish".into(), ConstraintKind::Inform));
        ds.constraints.insert("day".into(), ("tuesday".into(), ConstraintKind::Book));
        ds.constraints.insert("people".into(), ("4".into(), ConstraintKind::Book));
        ds.requests.insert("address".into());
        ds.requests.insert("phone".into());
        let text = serialize_goal_state(&goal, &lex);
        assert_eq!(
            text,
            "[restaurant] [inform] food swedish [book] day tuesday people 4 [request] phone address"
        );
        let (parsed, skipped) = parse_goal_state(&text, &lex);
        assert_eq!(parsed, goal);
        assert_eq!(skipped, 0);
    }

    #[test]
    fn db_tokens() {
        assert_eq!(db_token(2), "<db_2>");
        assert_eq!(parse_db_token("<db_0>"), Some(0));
        assert_eq!(parse_db_token("<db_4>"), None);
        assert_eq!(parse_db_token("db_1"), None);
    }
}
