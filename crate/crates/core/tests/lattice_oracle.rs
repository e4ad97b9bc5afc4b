mod common;

use anonybench_core::anonymizer::{search_optimal, SearchOutcome};
use anonybench_core::PrivacyConstraint;
use common::oracles::{exhaustive_optimum, Rule};
use common::{random_instance, Instance, LATTICE};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn to_constraint(rule: Rule) -> PrivacyConstraint {
    match rule {
        Rule::K(k) => PrivacyConstraint::KAnonymity { k },
        Rule::Distinct(l) => PrivacyConstraint::LDiversityDistinct {
            l,
            sensitive: "sa".into(),
        },
        Rule::EmdEqual(t) => PrivacyConstraint::TClosenessEmd {
            t,
            sensitive: "sa".into(),
            ground: None,
        },
        Rule::EmdOrdered(t) => PrivacyConstraint::TClosenessEmd {
            t,
            sensitive: "sn".into(),
            ground: None,
        },
        Rule::Lkc(l, k) => PrivacyConstraint::Lkc { l, k },
    }
}

fn random_rules(rng: &mut SmallRng, inst: &Instance) -> Vec<Rule> {
    let mut rules = vec![Rule::K(rng.random_range(1..=6))];
    match rng.random_range(0..5) {
        0 => rules.push(Rule::Distinct(rng.random_range(1..=3))),
        1 => rules.push(Rule::EmdEqual(rng.random_range(0.1..0.5))),
        2 => rules.push(Rule::EmdOrdered(rng.random_range(0.05..0.4))),
        3 => rules.push(Rule::Lkc(rng.random_range(1..=inst.trees.len()), rng.random_range(2..=8))),
        _ => {}
    }
    rules
}

fn chosen(inst: &Instance, rules: &[Rule], limit: f64, prune: bool) -> Option<(Vec<usize>, f64)> {
    let constraints: Vec<PrivacyConstraint> = rules.iter().map(|&r| to_constraint(r)).collect();
    match search_optimal(&inst.data, &inst.hs, &constraints, limit, prune).unwrap() {
        SearchOutcome::Found(r) => Some((r.chosen_node.levels.clone(), r.utility_report.utility)),
        SearchOutcome::Unsatisfiable(_) => None,
    }
}

#[test]
fn pruned_search_matches_exhaustive_argmax() {
    let mut mismatches = Vec::new();
    for seed in 0..50u64 {
        let inst = random_instance(1000 + seed, &LATTICE);
        assert!(inst.lattice_size() <= 500);
        let mut rng = SmallRng::seed_from_u64(seed);
        let rules = random_rules(&mut rng, &inst);
        let want = exhaustive_optimum(&inst, &rules, 0.0);
        for prune in [true, false] {
            let got = chosen(&inst, &rules, 0.0, prune);
            let same = match (&got, &want) {
                (None, None) => true,
                (Some((levels, u)), Some(b)) => *levels == b.levels && (u - b.utility).abs() <= 1e-12,
                _ => false,
            };
            if !same {
                mismatches.push((seed, prune, rules.clone(), got, want.clone()));
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn search_with_suppression_matches_exhaustive_argmax() {
    for seed in 0..50u64 {
        let inst = random_instance(5000 + seed, &LATTICE);
        let mut rng = SmallRng::seed_from_u64(seed);
        let k = rng.random_range(2..=6);
        let limit = [0.05, 0.1, 0.2, 0.5][rng.random_range(0..4)];
        let want = exhaustive_optimum(&inst, &[Rule::K(k)], limit);
        let got = chosen(&inst, &[Rule::K(k)], limit, true);
        match (&got, &want) {
            (None, None) => {}
            (Some((levels, u)), Some(b)) => {
                assert_eq!(*levels, b.levels, "seed {seed}");
                assert!((u - b.utility).abs() <= 1e-12, "seed {seed}: {u} vs {}", b.utility);
            }
            _ => panic!("seed {seed}: {got:?} vs {want:?}"),
        }
    }
}

