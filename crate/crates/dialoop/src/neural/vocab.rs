//! Word-level vocabulary. Tokens are whitespace-separated words; bracketed
//! markers (`[restaurant]`, `[inform]`, `[value_phone]`) and angle-bracket
//! specials (`<sos_b>`, `<db_2>`) are single tokens. The token set is closed
//! over everything the agents can read or emit: span-grammar markers, slot
//! names, ontology values, template words, and delexicalization placeholders.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abus::TemplateTable;
use crate::dialog::act::{Intent, GENERAL_DOMAIN};
use crate::dialog::spans::db_token;
use crate::world::World;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";

/// Segment delimiters, one pair per span kind: system belief, user belief
/// (perceived system act), goal state, dialog act, delex response, user
/// utterance.
pub const SEGMENTS: [(&str, &str); 6] = [
    ("<sos_b>", "<eos_b>"),
    ("<sos_bu>", "<eos_bu>"),
    ("<sos_g>", "<eos_g>"),
    ("<sos_a>", "<eos_a>"),
    ("<sos_r>", "<eos_r>"),
    ("<sos_u>", "<eos_u>"),
];

const ALL_INTENTS: [Intent; 8] = [
    Intent::Inform,
    Intent::Request,
    Intent::Book,
    Intent::Nooffer,
    Intent::Offerbook,
    Intent::Reqmore,
    Intent::Greet,
    Intent::Bye,
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, u32>,
}

impl Vocab {
    /// The closed token set for a world + template inventory.
    pub fn build(world: &World, templates: &TemplateTable) -> Vocab {
        let mut tokens: Vec<String> = Vec::new();
        let mut seen: BTreeMap<String, ()> = BTreeMap::new();
        let mut add = |tokens: &mut Vec<String>, t: &str| {
            if !t.is_empty() && seen.insert(t.to_string(), ()).is_none() {
                tokens.push(t.to_string());
            }
        };

        // Specials first so their ids are stable and small.
        add(&mut tokens, PAD);
        add(&mut tokens, UNK);
        for (open, close) in SEGMENTS {
            add(&mut tokens, open);
            add(&mut tokens, close);
        }
        for bucket in 0..=3u8 {
            add(&mut tokens, &db_token(bucket));
        }

        for domain in &world.domains {
            add(&mut tokens, &format!("[{}]", domain.name));
        }
        add(&mut tokens, &format!("[{GENERAL_DOMAIN}]"));
        for intent in ALL_INTENTS {
            add(&mut tokens, &format!("[{}]", intent.as_str()));
        }

        for domain in &world.domains {
            for slot in &domain.slots {
                add(&mut tokens, &slot.name);
                add(&mut tokens, &format!("[value_{}]", slot.name));
                for value in &slot.values {
                    for word in value.split_whitespace() {
                        add(&mut tokens, word);
                    }
                }
            }
        }
        // Act-level pseudo slots used by offers and bookings.
        for slot in ["choice", "ref"] {
            add(&mut tokens, slot);
            add(&mut tokens, &format!("[value_{slot}]"));
        }
        add(&mut tokens, "dontcare");

        let template_groups = [&templates.user, &templates.dontcare, &templates.system];
        for group in template_groups {
            for variants in group.values() {
                for variant in variants {
                    for word in variant.split_whitespace() {
                        if word != "[value]" {
                            add(&mut tokens, word);
                        }
                    }
                }
            }
        }
        // Words the template-miss fallback phrasings can introduce.
        for phrase in [
            "the should be . what is ? goodbye okay",
            "do you need i am sorry , no match for that",
            "i do not mind the rest",
        ] {
            for word in phrase.split_whitespace() {
                add(&mut tokens, word);
            }
        }

        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocab { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad(&self) -> u32 {
        0
    }

    pub fn unk(&self) -> u32 {
        1
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Panics on unknown tokens; for the fixed specials callers rely on.
    pub fn must_id(&self, token: &str) -> u32 {
        self.id(token).unwrap_or_else(|| panic!("token {token:?} not in vocabulary"))
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// Whitespace tokenization; unknown words become `<unk>`.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        text.split_whitespace().map(|w| self.id(w).unwrap_or_else(|| self.unk())).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        let words: Vec<&str> = ids.iter().map(|&i| self.token(i)).collect();
        words.join(" ")
    }

    /// Content hash; checkpoints embed it so a model is never paired with the
    /// wrong vocabulary.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for token in &self.tokens {
            hasher.update(token.as_bytes());
            hasher.update(b"\n");
        }
        format!("{:x}", hasher.finalize())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(&self.tokens)?)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Vocab> {
        let tokens: Vec<String> = serde_json::from_slice(&std::fs::read(path)?)?;
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Ok(Vocab { tokens, index })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abus::builtin_templates;
    use crate::world::builtin_world;

    fn vocab() -> Vocab {
        Vocab::build(&builtin_world(), &builtin_templates())
    }

    #[test]
    fn ids_are_dense_and_bijective() {
        let v = vocab();
        assert!(v.len() > 200, "vocabulary suspiciously small: {}", v.len());
        assert!(v.len() < 2000, "vocabulary suspiciously large: {}", v.len());
        assert_eq!(v.id(PAD), Some(0));
        assert_eq!(v.id(UNK), Some(1));
        for id in 0..v.len() as u32 {
            assert_eq!(v.id(v.token(id)), Some(id));
        }
    }

    #[test]
    fn covers_everything_the_corpus_generator_emits() {
        let world = builtin_world();
        let templates = crate::abus::TemplateSet::builtin();
        let v = Vocab::build(&world, &templates.table);
        let cfg = crate::corpus_gen::CorpusGenConfig {
            dialogs: 120,
            ..crate::corpus_gen::CorpusGenConfig::default()
        };
        let corpus = crate::corpus_gen::generate_corpus(&world, &templates, &cfg, 23);

        let lex = world.lexicon();
        let unk = v.unk();
        for dialog in &corpus {
            for turn in &dialog.turns {
                for text in [
                    turn.user_utt.as_str(),
                    turn.response.as_str(),
                    &crate::dialog::spans::serialize_belief(&turn.belief, lex),
                    &crate::dialog::spans::serialize_act(&turn.user_act, lex),
                    &crate::dialog::spans::serialize_act(&turn.sys_act, lex),
                    &crate::dialog::spans::serialize_goal_state(&turn.goal_state, lex),
                ] {
                    let ids = v.encode(text);
                    assert!(
                        !ids.contains(&unk),
                        "unknown token in {:?} ({})",
                        text,
                        dialog.id
                    );
                }
            }
        }
    }

    #[test]
    fn encode_decode_round_trip_and_unknowns() {
        let v = vocab();
        let text = "[restaurant] [inform] food area <db_2> <sos_a>";
        assert_eq!(v.decode(&v.encode(text)), text);
        let ids = v.encode("frobnicate the phone");
        assert_eq!(ids[0], v.unk());
        assert_ne!(ids[1], v.unk());
    }

    #[test]
    fn hash_tracks_content() {
        let v = vocab();
        assert_eq!(v.hash(), vocab().hash());
        let mut other = v.clone();
        other.tokens.push("extra".into());
        assert_ne!(v.hash(), other.hash());
    }

    #[test]
    fn save_load_round_trip() {
        let v = vocab();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.json");
        v.save(&path).unwrap();
        let loaded = Vocab::load(&path).unwrap();
        assert_eq!(loaded.hash(), v.hash());
        assert_eq!(loaded.id("[restaurant]"), v.id("[restaurant]"));
    }
}
