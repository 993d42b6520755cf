//! The built-in four-domain world.
//!
//! Value sets are engineered so that no surface string maps to two different
//! slot names anywhere in the world: restaurant times are evening, train
//! departures are morning, hotel stays are written "2 nights" (never a bare
//! digit, which always means people), star ratings are written "three star",
//! and hotel types avoid the word "hotel". `World::finalize` asserts this
//! global uniqueness, which is what makes delexicalization unambiguous.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::entity::Entity;
use super::ontology::{DomainSpec, SlotKind, SlotSpec};
use super::World;
use crate::rng;

const DAYS: [&str; 7] = [
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];
const AREAS: [&str; 5] = ["north", "south", "east", "west", "centre"];
const PRICERANGES: [&str; 3] = ["cheap", "moderate", "expensive"];
const PEOPLE: [&str; 8] = ["1", "2", "3", "4", "5", "6", "7", "8"];

const FOODS: [&str; 8] = [
    "italian", "chinese", "indian", "british", "swedish", "french", "turkish", "korean",
];
const MEAL_TIMES: [&str; 7] = [
    "17:00", "17:30", "18:00", "18:30", "19:00", "19:30", "20:00",
];
const HOTEL_TYPES: [&str; 3] = ["guesthouse", "hostel", "resort"];
const STARS: [&str; 3] = ["two star", "three star", "four star"];
const STAYS: [&str; 5] = ["1 night", "2 nights", "3 nights", "5 nights", "7 nights"];
const CATEGORIES: [&str; 6] = ["museum", "park", "cinema", "theatre", "gallery", "zoo"];
const DESTINATIONS: [&str; 6] = [
    "cambridge", "london", "norwich", "ely", "peterborough", "stansted",
];
const LEAVES: [&str; 8] = [
    "06:00", "07:00", "08:00", "09:00", "10:00", "11:00", "12:00", "13:00",
];
const FEES: [&str; 4] = ["1 pound", "2 pounds", "5 pounds", "10 pounds"];

fn domain_specs() -> Vec<DomainSpec> {
    use SlotKind::*;
    vec![
        DomainSpec {
            name: "restaurant".into(),
            id_slot: "name".into(),
            slots: vec![
                SlotSpec::new("food", Informable, &FOODS),
                SlotSpec::new("pricerange", Informable, &PRICERANGES),
                SlotSpec::new("area", Informable, &AREAS),
                SlotSpec::new("day", Book, &DAYS),
                SlotSpec::new("time", Book, &MEAL_TIMES),
                SlotSpec::new("people", Book, &PEOPLE),
                SlotSpec::new("name", RequestOnly, &[]),
                SlotSpec::new("phone", RequestOnly, &[]),
                SlotSpec::new("address", RequestOnly, &[]),
                SlotSpec::new("postcode", RequestOnly, &[]),
            ],
        },
        DomainSpec {
            name: "hotel".into(),
            id_slot: "name".into(),
            slots: vec![
                SlotSpec::new("type", Informable, &HOTEL_TYPES),
                SlotSpec::new("stars", Informable, &STARS),
                SlotSpec::new("pricerange", Informable, &PRICERANGES),
                SlotSpec::new("area", Informable, &AREAS),
                SlotSpec::new("day", Book, &DAYS),
                SlotSpec::new("stay", Book, &STAYS),
                SlotSpec::new("people", Book, &PEOPLE),
                SlotSpec::new("name", RequestOnly, &[]),
                SlotSpec::new("phone", RequestOnly, &[]),
                SlotSpec::new("address", RequestOnly, &[]),
                SlotSpec::new("postcode", RequestOnly, &[]),
            ],
        },
        DomainSpec {
            name: "attraction".into(),
            id_slot: "name".into(),
            slots: vec![
                SlotSpec::new("category", Informable, &CATEGORIES),
                SlotSpec::new("area", Informable, &AREAS),
                SlotSpec::new("name", RequestOnly, &[]),
                SlotSpec::new("phone", RequestOnly, &[]),
                SlotSpec::new("address", RequestOnly, &[]),
                SlotSpec::new("entrancefee", RequestOnly, &[]),
            ],
        },
        DomainSpec {
            name: "train".into(),
            id_slot: "trainid".into(),
            slots: vec![
                SlotSpec::new("destination", Informable, &DESTINATIONS),
                SlotSpec::new("day", Informable, &DAYS),
                SlotSpec::new("leave", Informable, &LEAVES),
                SlotSpec::new("people", Book, &PEOPLE),
                SlotSpec::new("trainid", RequestOnly, &[]),
                SlotSpec::new("price", RequestOnly, &[]),
                SlotSpec::new("duration", RequestOnly, &[]),
            ],
        },
    ]
}

/// Unique two-word names: every adjective-noun combination once, in shuffled
/// order.
fn names(prefix: &str, adjs: &[&str], nouns: &[&str], n: usize, rng: &mut rng::Rng) -> Vec<String> {
    let mut combos: Vec<(usize, usize)> = (0..adjs.len())
        .flat_map(|a| (0..nouns.len()).map(move |b| (a, b)))
        .collect();
    combos.shuffle(rng);
    assert!(n <= combos.len(), "not enough name combinations");
    combos
        .into_iter()
        .take(n)
        .map(|(a, b)| {
            if prefix.is_empty() {
                format!("{} {}", adjs[a], nouns[b])
            } else {
                format!("{prefix} {} {}", adjs[a], nouns[b])
            }
        })
        .collect()
}

fn pick(rng: &mut rng::Rng, values: &[&str]) -> String {
    values.choose(rng).expect("non-empty value list").to_string()
}

fn phone(rng: &mut rng::Rng) -> String {
    format!("01223 {:06}", rng.gen_range(100000..1000000))
}

fn address(rng: &mut rng::Rng) -> String {
    const STREETS: [&str; 8] = [
        "mill road",
        "king street",
        "station road",
        "bridge lane",
        "market square",
        "castle hill",
        "rose avenue",
        "church way",
    ];
    format!("{} {}", rng.gen_range(1..60), STREETS.choose(rng).unwrap())
}

fn postcode(rng: &mut rng::Rng) -> String {
    const LETTERS: [char; 8] = ['a', 'b', 'd', 'f', 'h', 'j', 'q', 'u'];
    format!(
        "cb{}{}{}",
        rng.gen_range(1..6),
        LETTERS.choose(rng).unwrap(),
        LETTERS.choose(rng).unwrap(),
    )
}

fn entity(pairs: Vec<(&str, String)>) -> Entity {
    Entity {
        attrs: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    }
}

/// Build the standard world. Fully deterministic: entities come from a fixed
/// seed, so every call yields the same world.
pub fn builtin_world() -> World {
    let mut rng = rng::stream(0x6f6c6c6f, "builtin-world");
    let mut entities: BTreeMap<String, Vec<Entity>> = BTreeMap::new();

    const ADJS: [&str; 10] = [
        "golden", "silver", "jade", "royal", "rustic", "cosy", "grand", "little", "blue", "amber",
    ];
    let rest_names = names(
        "the",
        &ADJS,
        &["fork", "spoon", "table", "kitchen", "pantry", "garden", "lantern", "olive"],
        30,
        &mut rng,
    );
    entities.insert(
        "restaurant".into(),
        rest_names
            .into_iter()
            .map(|name| {
                entity(vec![
                    ("name", name),
                    ("food", pick(&mut rng, &FOODS)),
                    ("pricerange", pick(&mut rng, &PRICERANGES)),
                    ("area", pick(&mut rng, &AREAS)),
                    ("phone", phone(&mut rng)),
                    ("address", address(&mut rng)),
                    ("postcode", postcode(&mut rng)),
                ])
            })
            .collect(),
    );

    let hotel_names = names(
        "",
        &ADJS,
        &["lodge", "rooms", "retreat", "inn", "court", "villa", "haven"],
        24,
        &mut rng,
    );
    entities.insert(
        "hotel".into(),
        hotel_names
            .into_iter()
            .map(|name| {
                entity(vec![
                    ("name", name),
                    ("type", pick(&mut rng, &HOTEL_TYPES)),
                    ("stars", pick(&mut rng, &STARS)),
                    ("pricerange", pick(&mut rng, &PRICERANGES)),
                    ("area", pick(&mut rng, &AREAS)),
                    ("phone", phone(&mut rng)),
                    ("address", address(&mut rng)),
                    ("postcode", postcode(&mut rng)),
                ])
            })
            .collect(),
    );

    let attr_names = names(
        "the",
        &ADJS,
        &["hall", "tower", "gardens", "dome", "arch", "maze"],
        15,
        &mut rng,
    );
    entities.insert(
        "attraction".into(),
        attr_names
            .into_iter()
            .map(|name| {
                entity(vec![
                    ("name", name),
                    ("category", pick(&mut rng, &CATEGORIES)),
                    ("area", pick(&mut rng, &AREAS)),
                    ("phone", phone(&mut rng)),
                    ("address", address(&mut rng)),
                    ("entrancefee", pick(&mut rng, &FEES)),
                ])
            })
            .collect(),
    );

    let mut train_ids: Vec<String> = (0..42)
        .map(|i| format!("tr{:04}", 1000 + i * 97 % 9000))
        .collect();
    train_ids.shuffle(&mut rng);
    entities.insert(
        "train".into(),
        train_ids
            .into_iter()
            .map(|id| {
                entity(vec![
                    ("trainid", id),
                    ("destination", pick(&mut rng, &DESTINATIONS)),
                    ("day", pick(&mut rng, &DAYS)),
                    ("leave", pick(&mut rng, &LEAVES)),
                    (
                        "price",
                        format!("{}.{:02} pounds", rng.gen_range(8..31), rng.gen_range(0..100)),
                    ),
                    ("duration", format!("{} minutes", rng.gen_range(17..121))),
                ])
            })
            .collect(),
    );

    World::new(domain_specs(), entities)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_is_deterministic() {
        let a = builtin_world();
        let b = builtin_world();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn entity_counts() {
        let w = builtin_world();
        assert_eq!(w.entities["restaurant"].len(), 30);
        assert_eq!(w.entities["hotel"].len(), 24);
        assert_eq!(w.entities["attraction"].len(), 15);
        assert_eq!(w.entities["train"].len(), 42);
    }
}
