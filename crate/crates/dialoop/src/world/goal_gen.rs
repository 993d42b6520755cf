//! Random user goals drawn from the world.
//!
//! Satisfiable domain goals copy their constraint values from a real entity,
//! so they match at least one database row by construction. Unsatisfiable
//! ones (the no-offer trigger) are rejection-sampled until the database
//! returns nothing. Every domain gets at least one request so that success
//! is never vacuous.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::World;
use crate::dialog::goal::{ConstraintKind, DomainGoal, UserGoal};
use crate::rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalConfig {
    pub min_domains: usize,
    pub max_domains: usize,
    /// Probability that a domain goal matches no entity, forcing a no-offer
    /// and a goal change.
    pub p_unsatisfiable: f64,
    /// Probability that a domain with booking slots gets a booking part.
    pub p_book: f64,
    pub max_constraints: usize,
    pub max_requests: usize,
}

impl Default for GoalConfig {
    fn default() -> Self {
        GoalConfig {
            min_domains: 1,
            max_domains: 3,
            p_unsatisfiable: 0.1,
            p_book: 0.5,
            max_constraints: 3,
            max_requests: 3,
        }
    }
}

pub fn generate_goal(world: &World, cfg: &GoalConfig, rng: &mut rng::Rng) -> UserGoal {
    let max = cfg.max_domains.min(world.domains.len()).max(cfg.min_domains);
    let n_domains = rng.gen_range(cfg.min_domains..=max);
    let mut indices: Vec<usize> = (0..world.domains.len()).collect();
    indices.shuffle(rng);
    indices.truncate(n_domains);
    // Goals visit domains in canonical order; this is what lets the active
    // domain be recovered from belief diffs alone.
    indices.sort_unstable();

    let domains = indices
        .into_iter()
        .map(|i| domain_goal(world, &world.domains[i].name, cfg, rng))
        .collect();
    UserGoal { domains }
}

/// A deterministic batch: the shared goal lists used to compare models.
pub fn generate_goals(world: &World, cfg: &GoalConfig, count: usize, seed: u64) -> Vec<UserGoal> {
    let mut rng = rng::stream(seed, "goal-gen");
    (0..count).map(|_| generate_goal(world, cfg, &mut rng)).collect()
}

fn domain_goal(world: &World, domain: &str, cfg: &GoalConfig, rng: &mut rng::Rng) -> DomainGoal {
    let spec = world.domain(domain).expect("domain exists");
    let informables: Vec<_> = spec.informables().collect();
    let mut dg = DomainGoal::new(domain);

    let want_unsat = informables.len() >= 2 && rng.gen_bool(cfg.p_unsatisfiable);
    let mut satisfied = false;
    if want_unsat {
        'attempt: for _ in 0..50 {
            // Exactly two constraints: changing one value then has a real
            // chance of landing on an existing pair, so most no-offer
            // dialogs recover instead of abandoning the domain.
            let k = 2;
            let mut slots: Vec<_> = informables.clone();
            slots.shuffle(rng);
            slots.truncate(k);
            let candidate: Vec<(String, String)> = slots
                .iter()
                .map(|s| (s.name.clone(), s.values.choose(rng).unwrap().clone()))
                .collect();
            let constraints = candidate.iter().cloned().collect();
            if world.query(domain, &constraints).is_empty() {
                for (slot, value) in candidate {
                    dg.constraints.insert(slot, (value, ConstraintKind::Inform));
                }
                dg.satisfiable = false;
                satisfied = true;
                break 'attempt;
            }
        }
    }
    if !satisfied {
        let entity = world.entities[domain].choose(rng).expect("entities exist");
        let k = rng.gen_range(1..=cfg.max_constraints.min(informables.len()));
        let mut slots: Vec<_> = informables.clone();
        slots.shuffle(rng);
        slots.truncate(k);
        for slot in slots {
            let value = entity.get(&slot.name).expect("entity has informable").to_string();
            dg.constraints.insert(slot.name.clone(), (value, ConstraintKind::Inform));
        }
        dg.satisfiable = true;
    }

    let book_slots: Vec<_> = spec.book_slots().collect();
    if !book_slots.is_empty() && rng.gen_bool(cfg.p_book) {
        for slot in book_slots {
            let value = slot.values.choose(rng).unwrap().clone();
            dg.constraints.insert(slot.name.clone(), (value, ConstraintKind::Book));
        }
    }

    // The id slot (name, trainid) is excluded: the system volunteers it when
    // presenting an entity, so a user would never need to ask for it.
    let mut requestables: Vec<_> = spec
        .request_only()
        .filter(|s| s.name != spec.id_slot)
        .map(|s| s.name.clone())
        .collect();
    let k = rng.gen_range(1..=cfg.max_requests.min(requestables.len()));
    requestables.shuffle(rng);
    requestables.truncate(k);
    dg.requests = requestables.into_iter().collect();

    dg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::builtin_world;

    #[test]
    fn goals_are_well_formed_and_deterministic() {
        let world = builtin_world();
        let cfg = GoalConfig::default();
        let goals = generate_goals(&world, &cfg, 200, 11);
        assert_eq!(goals, generate_goals(&world, &cfg, 200, 11));

        let mut saw_unsat = false;
        let mut saw_multi = false;
        for goal in &goals {
            assert!(!goal.domains.is_empty() && goal.domains.len() <= 3);
            saw_multi |= goal.domains.len() > 1;
            // Canonical domain order.
            let ranks: Vec<_> = goal
                .domains
                .iter()
                .map(|d| world.lexicon().domain_rank(&d.domain))
                .collect();
            assert!(ranks.windows(2).all(|w| w[0] < w[1]));

            for dg in &goal.domains {
                assert!(!dg.requests.is_empty(), "every domain goal has a request");
                let inform: std::collections::BTreeMap<String, String> = dg
                    .inform_constraints()
                    .map(|(s, v)| (s.to_string(), v.to_string()))
                    .collect();
                assert!(!inform.is_empty());
                let matches = world.query(&dg.domain, &inform);
                assert_eq!(matches.is_empty(), !dg.satisfiable);
                saw_unsat |= !dg.satisfiable;
            }
        }
        assert!(saw_unsat, "some goals should be unsatisfiable");
        assert!(saw_multi, "some goals should span multiple domains");
    }
}
