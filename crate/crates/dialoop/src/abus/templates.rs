//! Template inventory for the rule agents: user-side surface realization,
//! system-side delexicalized responses, and the inverse lookup that turns a
//! template sentence back into an act item.
//!
//! Keys are `(intent, slot)`; the domain comes from dialog context, which
//! works because every goal block opens with a domain-unique slot. User
//! templates carry a `[value]` hole filled with the act's value; system
//! templates keep their `[value_<slot>]` placeholders (system responses stay
//! delexicalized end to end).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dialog::act::Intent;

/// `"inform:food"` or `"bye"`; the JSON key form of `(intent, slot)`.
fn key(intent: Intent, slot: Option<&str>) -> String {
    match slot {
        Some(slot) => format!("{}:{slot}", intent.as_str()),
        None => intent.as_str().to_string(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateTable {
    /// User-side realizations; `[value]` is the substitution hole.
    pub user: BTreeMap<String, Vec<String>>,
    /// User-side phrasings for "dontcare" answers, keyed by slot.
    pub dontcare: BTreeMap<String, Vec<String>>,
    /// System-side delexicalized sentences.
    pub system: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad template file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("system template {text:?} appears under both {a} and {b}")]
    AmbiguousSystemTemplate { text: String, a: String, b: String },
}

impl TemplateTable {
    pub fn user_variants(&self, intent: Intent, slot: Option<&str>) -> &[String] {
        self.user.get(&key(intent, slot)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn dontcare_variants(&self, slot: &str) -> &[String] {
        self.dontcare.get(slot).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn system_variants(&self, intent: Intent, slot: Option<&str>) -> &[String] {
        self.system.get(&key(intent, slot)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// sentence -> (intent, slot) over the system inventory; the rule NLU.
    /// Fails when two different keys share a sentence.
    pub fn system_inverse(&self) -> Result<BTreeMap<String, (Intent, Option<String>)>, TemplateError> {
        let mut map = BTreeMap::new();
        for (k, variants) in &self.system {
            let (intent, slot) = parse_key(k);
            for text in variants {
                if let Some((prev_intent, prev_slot)) =
                    map.insert(text.clone(), (intent, slot.clone()))
                {
                    if (prev_intent, &prev_slot) != (intent, &slot) {
                        return Err(TemplateError::AmbiguousSystemTemplate {
                            text: text.clone(),
                            a: key(prev_intent, prev_slot.as_deref()),
                            b: k.clone(),
                        });
                    }
                }
            }
        }
        Ok(map)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), TemplateError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, TemplateError> {
        let table: TemplateTable = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        table.system_inverse()?;
        Ok(table)
    }
}

fn parse_key(k: &str) -> (Intent, Option<String>) {
    match k.split_once(':') {
        Some((intent, slot)) => (
            Intent::from_str_opt(intent).expect("valid intent in template key"),
            Some(slot.to_string()),
        ),
        None => (Intent::from_str_opt(k).expect("valid intent in template key"), None),
    }
}

/// The built-in inventory for the standard world.
pub fn builtin_templates() -> TemplateTable {
    let mut t = TemplateTable::default();
    let mut u = |k: &str, variants: &[&str]| {
        t.user.insert(k.to_string(), variants.iter().map(|s| s.to_string()).collect());
    };

    // User informs: constraint conveyance. The first slot of every domain
    // block is domain-unique (food, type, category, destination), so later
    // shared-slot informs inherit the domain from context.
    u("inform:food", &[
        "i am looking for a [value] restaurant .",
        "i want a restaurant serving [value] food .",
        "some [value] food would be great .",
    ]);
    u("inform:pricerange", &[
        "something [value] please .",
        "it should be [value] .",
        "i would prefer a [value] place .",
    ]);
    u("inform:area", &[
        "i want something in the [value] .",
        "it should be in the [value] .",
        "the [value] part of town works best .",
    ]);
    u("inform:type", &[
        "i am looking for a [value] to stay at .",
        "i need a [value] for my stay .",
        "a [value] would suit me .",
    ]);
    u("inform:stars", &[
        "it should be a [value] place .",
        "i want a [value] rating .",
        "[value] accommodation please .",
    ]);
    u("inform:category", &[
        "i would like to visit a [value] .",
        "is there a [value] i could go to ?",
        "i fancy seeing a [value] .",
    ]);
    u("inform:destination", &[
        "i need a train to [value] .",
        "i am traveling to [value] by train .",
        "i want to get to [value] .",
    ]);
    u("inform:day", &[
        "i want to travel on [value] .",
        "the trip should be on [value] .",
        "[value] is my travel day .",
    ]);
    u("inform:leave", &[
        "i would like to leave at [value] .",
        "the train should depart at [value] .",
        "departure around [value] please .",
    ]);

    // User booking details.
    u("book:day", &[
        "please book it for [value] .",
        "make the booking for [value] .",
        "i need the booking on [value] .",
    ]);
    u("book:time", &[
        "book a table at [value] .",
        "we will arrive at [value] .",
        "the reservation should be at [value] .",
    ]);
    u("book:people", &[
        "it will be for [value] people .",
        "book it for [value] people .",
        "there are [value] of us .",
    ]);
    u("book:stay", &[
        "we will stay [value] .",
        "i need it for [value] .",
        "the stay is [value] .",
    ]);

    // User requests.
    u("request:name", &[
        "what is it called ?",
        "could you give me the name ?",
        "what is the name of the place ?",
    ]);
    u("request:phone", &[
        "what is the phone number ?",
        "could i get the phone number ?",
        "do you have a phone number for it ?",
    ]);
    u("request:address", &[
        "what is the address ?",
        "where exactly is it ?",
        "could you tell me the address ?",
    ]);
    u("request:postcode", &[
        "what is the postcode ?",
        "could i have the postcode ?",
        "do you know the postcode ?",
    ]);
    u("request:entrancefee", &[
        "how much is the entrance fee ?",
        "what does it cost to get in ?",
        "is there an entrance fee ?",
    ]);
    u("request:trainid", &[
        "what is the train id ?",
        "which train is that ?",
        "could you give me the train id ?",
    ]);
    u("request:price", &[
        "how much is the ticket ?",
        "what is the price ?",
        "what does the ticket cost ?",
    ]);
    u("request:duration", &[
        "how long is the trip ?",
        "what is the travel time ?",
        "how long does it take ?",
    ]);

    u("bye", &[
        "thank you , goodbye .",
        "that is everything , goodbye .",
        "thanks a lot , bye .",
    ]);

    let mut dc = |slot: &str, variants: &[&str]| {
        t.dontcare.insert(slot.to_string(), variants.iter().map(|s| s.to_string()).collect());
    };
    dc("food", &["any kind of food is fine .", "i do not mind the cuisine ."]);
    dc("pricerange", &["any price range is fine .", "the price does not matter ."]);
    dc("area", &["anywhere in town is fine .", "the area does not matter ."]);
    dc("type", &["any sort of place to stay is fine .", "i do not mind the type ."]);
    dc("stars", &["the star rating does not matter .", "any rating is fine ."]);
    dc("category", &["any kind of attraction is fine .", "i do not mind what sort ."]);
    dc("destination", &["any destination works .", "i do not mind where it goes ."]);
    dc("day", &["any day works for me .", "the day does not matter ."]);
    dc("leave", &["any departure time is fine .", "i do not mind when it leaves ."]);

    let mut s = |k: &str, variants: &[&str]| {
        t.system.insert(k.to_string(), variants.iter().map(|s| s.to_string()).collect());
    };

    // Offers and answers. Responses stay delexicalized: the placeholders are
    // filled only for display.
    s("inform:name", &[
        "how about [value_name] ?",
        "i can recommend [value_name] .",
    ]);
    s("inform:trainid", &[
        "how about [value_trainid] ?",
        "[value_trainid] matches your trip .",
    ]);
    s("inform:choice", &[
        "there are [value_choice] options matching that .",
        "i found [value_choice] places for you .",
    ]);
    s("inform:phone", &[
        "the phone number is [value_phone] .",
        "you can call them on [value_phone] .",
    ]);
    s("inform:address", &[
        "the address is [value_address] .",
        "it is located at [value_address] .",
    ]);
    s("inform:postcode", &[
        "the postcode is [value_postcode] .",
        "its postcode is [value_postcode] .",
    ]);
    s("inform:entrancefee", &[
        "the entrance fee is [value_entrancefee] .",
        "it costs [value_entrancefee] to get in .",
    ]);
    s("inform:price", &[
        "the ticket costs [value_price] .",
        "the fare is [value_price] .",
    ]);
    s("inform:duration", &[
        "the trip takes [value_duration] .",
        "travel time is [value_duration] .",
    ]);

    // Narrowing questions when too many rows match.
    s("request:food", &[
        "what kind of food would you like ?",
        "do you have a cuisine in mind ?",
    ]);
    s("request:pricerange", &[
        "do you have a price range in mind ?",
        "how much would you like to spend ?",
    ]);
    s("request:area", &[
        "which area do you prefer ?",
        "which part of town should it be in ?",
    ]);
    s("request:type", &[
        "what type of place are you looking for ?",
        "would you prefer a particular type ?",
    ]);
    s("request:stars", &[
        "how many stars should it have ?",
        "do you care about the star rating ?",
    ]);
    s("request:category", &[
        "what kind of attraction interests you ?",
        "what sort of place would you like to visit ?",
    ]);
    s("request:destination", &[
        "where are you traveling to ?",
        "what is your destination ?",
    ]);
    s("request:day", &[
        "what day will that be ?",
        "which day do you have in mind ?",
    ]);
    s("request:leave", &[
        "when would you like to leave ?",
        "what departure time suits you ?",
    ]);
    // Booking details the system still needs before it can book.
    s("request:time", &[
        "what time should i book for ?",
        "at what time would you like it ?",
    ]);
    s("request:people", &[
        "for how many people ?",
        "how many people will that be ?",
    ]);
    s("request:stay", &[
        "how many nights will you stay ?",
        "for how many nights ?",
    ]);

    // No matching entity: one sentence per rejected constraint slot.
    s("nooffer:food", &[
        "i am sorry , nothing serves that kind of food .",
        "no place offers that cuisine , i am afraid .",
    ]);
    s("nooffer:pricerange", &[
        "i am sorry , nothing matches that price range .",
        "there is nothing at that price , i am afraid .",
    ]);
    s("nooffer:area", &[
        "i am sorry , there is nothing in that area .",
        "that part of town has no match , i am afraid .",
    ]);
    s("nooffer:type", &[
        "i am sorry , no place of that type is available .",
        "nothing of that type , i am afraid .",
    ]);
    s("nooffer:stars", &[
        "i am sorry , nothing has that star rating .",
        "no place with that rating , i am afraid .",
    ]);
    s("nooffer:category", &[
        "i am sorry , there is no attraction of that kind .",
        "nothing of that sort to visit , i am afraid .",
    ]);
    s("nooffer:destination", &[
        "i am sorry , no train goes there .",
        "there is no service to that destination , i am afraid .",
    ]);
    s("nooffer:day", &[
        "i am sorry , nothing runs on that day .",
        "no service that day , i am afraid .",
    ]);
    s("nooffer:leave", &[
        "i am sorry , nothing departs at that time .",
        "no departure at that time , i am afraid .",
    ]);

    s("offerbook", &[
        "shall i book it for you ?",
        "would you like me to make a booking ?",
    ]);
    s("book:ref", &[
        "booking done , the reference number is [value_ref] .",
        "all booked , your reference is [value_ref] .",
    ]);
    s("reqmore", &[
        "is there anything else i can help with ?",
        "can i help with anything else ?",
    ]);
    s("greet", &[
        "hello , how can i help you ?",
        "hi , what can i do for you ?",
    ]);
    s("bye", &[
        "you are welcome , goodbye .",
        "glad to help , goodbye .",
    ]);

    t
}
