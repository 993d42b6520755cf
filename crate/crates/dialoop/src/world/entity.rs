//! Entities and database queries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One database row: `slot -> value` over the domain's informable and
/// request-only slots, plus `name` (or the domain's identifier slot).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Entity {
    pub attrs: BTreeMap<String, String>,
}

impl Entity {
    pub fn get(&self, slot: &str) -> Option<&str> {
        self.attrs.get(slot).map(String::as_str)
    }

    /// The identifying attribute (the domain's `id_slot`).
    pub fn id(&self, id_slot: &str) -> &str {
        self.get(id_slot).unwrap_or("")
    }
}

/// Collapse a match count into the four-way bucket exposed to the models as
/// a single `<db_k>` token: none, exactly one, a few, many.
pub fn db_bucket(count: usize) -> u8 {
    match count {
        0 => 0,
        1 => 1,
        2..=3 => 2,
        _ => 3,
    }
}

/// Outcome of a database query for one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DbResult {
    pub count: usize,
    pub bucket: u8,
    /// First match in name order; what an offer or booking refers to.
    pub selected: Option<Entity>,
}

impl DbResult {
    pub fn empty() -> Self {
        DbResult { count: 0, bucket: 0, selected: None }
    }
}

/// Entities satisfying every constraint. Constraint slots that are not
/// informable in this domain (booking details, noise) are ignored, as are
/// "dontcare" values: both act as no-filter.
pub fn query<'a>(
    entities: &'a [Entity],
    is_informable: impl Fn(&str) -> bool,
    constraints: &BTreeMap<String, String>,
) -> Vec<&'a Entity> {
    entities
        .iter()
        .filter(|e| {
            constraints
                .iter()
                .filter(|(slot, value)| is_informable(slot) && *value != "dontcare")
                .all(|(slot, value)| e.get(slot) == Some(value.as_str()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entity(pairs: &[(&str, &str)]) -> Entity {
        Entity {
            attrs: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    #[test]
    fn bucket_boundaries() {
        assert_eq!(db_bucket(0), 0);
        assert_eq!(db_bucket(1), 1);
        assert_eq!(db_bucket(2), 2);
        assert_eq!(db_bucket(3), 2);
        assert_eq!(db_bucket(4), 3);
        assert_eq!(db_bucket(100), 3);
    }

    #[test]
    fn query_filters_on_informables_only() {
        let rows = vec![
            entity(&[("name", "a"), ("food", "italian"), ("area", "north")]),
            entity(&[("name", "b"), ("food", "italian"), ("area", "south")]),
        ];
        let mut constraints = BTreeMap::new();
        constraints.insert("food".to_string(), "italian".to_string());
        constraints.insert("people".to_string(), "4".to_string());
        let hits = query(&rows, |s| s == "food" || s == "area", &constraints);
        assert_eq!(hits.len(), 2);

        constraints.insert("area".to_string(), "north".to_string());
        let hits = query(&rows, |s| s == "food" || s == "area", &constraints);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id("name"), "a");

        constraints.insert("area".to_string(), "dontcare".to_string());
        let hits = query(&rows, |s| s == "food" || s == "area", &constraints);
        assert_eq!(hits.len(), 2, "dontcare does not filter");
    }
}
