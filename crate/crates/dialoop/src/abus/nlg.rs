//! Surface realization from template tables.
//!
//! User-side output is lexicalized (the act's values are substituted into the
//! `[value]` hole); system-side output keeps its `[value_<slot>]`
//! placeholders. Items are realized one sentence each and joined with single
//! spaces, so the inverse lookup can split on sentence-final punctuation.

use crate::dialog::act::{ActItem, DialogAct, Intent};
use crate::rng::Rng;
use rand::Rng as _;

use super::templates::TemplateTable;

/// Realization outcome: the text plus how many items fell back to generic
/// phrasing because the inventory had no matching template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realized {
    pub text: String,
    pub fallbacks: usize,
}

fn pick<'a>(variants: &'a [String], rng: &mut Rng) -> Option<&'a str> {
    if variants.is_empty() {
        None
    } else {
        Some(variants[rng.gen_range(0..variants.len())].as_str())
    }
}

/// Render one user item. "dontcare" answers use their own slot-keyed table
/// because the literal value never appears in surface text.
fn user_sentence(item: &ActItem, table: &TemplateTable, rng: &mut Rng) -> (String, bool) {
    let slot = item.slot.as_deref();
    if item.value.as_deref() == Some("dontcare") {
        if let Some(t) = slot.and_then(|s| pick(table.dontcare_variants(s), rng)) {
            return (t.to_string(), false);
        }
        return (
            format!("i do not mind the {} .", slot.unwrap_or("rest")),
            true,
        );
    }
    if let Some(t) = pick(table.user_variants(item.intent, slot), rng) {
        let text = match &item.value {
            Some(v) => t.replace("[value]", v),
            None => t.to_string(),
        };
        return (text, false);
    }
    let fallback = match (item.intent, slot, item.value.as_deref()) {
        (Intent::Inform | Intent::Book, Some(s), Some(v)) => {
            format!("the {s} should be {v} .")
        }
        (Intent::Request, Some(s), _) => format!("what is the {s} ?"),
        (Intent::Bye, ..) => "goodbye .".to_string(),
        _ => "okay .".to_string(),
    };
    (fallback, true)
}

fn system_sentence(item: &ActItem, table: &TemplateTable, rng: &mut Rng) -> (String, bool) {
    let slot = item.slot.as_deref();
    if let Some(t) = pick(table.system_variants(item.intent, slot), rng) {
        return (t.to_string(), false);
    }
    let fallback = match (item.intent, slot) {
        (Intent::Inform | Intent::Book, Some(s)) => format!("the {s} is [value_{s}] ."),
        (Intent::Request, Some(s)) => format!("what {s} do you need ?"),
        (Intent::Nooffer, Some(s)) => format!("i am sorry , no match for that {s} ."),
        (Intent::Offerbook, _) => "shall i book it ?".to_string(),
        (Intent::Bye, _) => "goodbye .".to_string(),
        _ => "okay .".to_string(),
    };
    (fallback, true)
}

/// Items are realized in the order they appear in the act; callers emit acts
/// in a meaningful order already (agenda pop order, wizard policy order).
fn realize(
    act: &DialogAct,
    table: &TemplateTable,
    rng: &mut Rng,
    sentence: fn(&ActItem, &TemplateTable, &mut Rng) -> (String, bool),
) -> Realized {
    let mut parts = Vec::with_capacity(act.len());
    let mut fallbacks = 0;
    for item in act.items() {
        let (text, fell_back) = sentence(item, table, rng);
        parts.push(text);
        fallbacks += fell_back as usize;
    }
    Realized { text: parts.join(" "), fallbacks }
}

/// Realize a user act as a lexicalized utterance.
pub fn template_nlg(act: &DialogAct, table: &TemplateTable, rng: &mut Rng) -> Realized {
    realize(act, table, rng, user_sentence)
}

/// Realize a system act as a delexicalized response.
pub fn system_nlg(act: &DialogAct, table: &TemplateTable, rng: &mut Rng) -> Realized {
    realize(act, table, rng, system_sentence)
}
