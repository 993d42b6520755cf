//! Rule NLU: recovering a system act from a delexicalized response by exact
//! lookup over the system template inventory.
//!
//! The response is split into sentences (a sentence ends at `.` or `?`), each
//! sentence is looked up verbatim, and misses are skipped, so arbitrary text
//! degrades to an empty act rather than an error. Recovered items carry no
//! values: placeholders name only the slot, which is all the agenda rules
//! need. The domain is not part of the lookup; content items take the
//! caller's context domain, protocol items (bye, greet, reqmore) the general
//! domain.

use std::collections::BTreeMap;

use crate::dialog::act::{ActItem, DialogAct, Intent, GENERAL_DOMAIN};

pub type SystemInverse = BTreeMap<String, (Intent, Option<String>)>;

/// Split into sentences on terminal punctuation tokens, keeping the
/// terminator inside the sentence (templates are stored that way).
fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for token in text.split_whitespace() {
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(token);
        if token == "." || token == "?" {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Recover the system act behind `response`. `context_domain` is the domain
/// the dialog is currently about (the user side tracks it from its own last
/// act); it fills the domain field of every content item.
pub fn rule_nlu(response: &str, context_domain: &str, inverse: &SystemInverse) -> DialogAct {
    let mut act = DialogAct::empty();
    for sentence in split_sentences(response) {
        let Some((intent, slot)) = inverse.get(&sentence) else {
            continue;
        };
        let domain = match intent {
            Intent::Bye | Intent::Greet | Intent::Reqmore => GENERAL_DOMAIN,
            _ => context_domain,
        };
        act.push(ActItem::new(domain, *intent, slot.clone(), None));
    }
    act
}
