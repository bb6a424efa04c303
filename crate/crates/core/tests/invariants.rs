use std::collections::{BTreeMap, BTreeSet};

use nmlkit_core::ael::expansion_exists;
use nmlkit_core::dl::{extension_exists, stage_fixpoint};
use nmlkit_core::formula::{implies_bruteforce, parse_formula, sat_bruteforce, Atom, Basis, Formula, Mode};
use nmlkit_core::io::{parse_gr, parse_td, write_gr, write_td};
use nmlkit_core::limits::Limits;
use nmlkit_core::random::{random_ae_theory, random_formula, random_gamma, random_imp_pair, random_literal_theory};
use nmlkit_core::structures::Graph;
use nmlkit_core::treewidth::{exact_treewidth, heuristic_decomposition, is_valid, Heuristic};
use nmlkit_core::twdp::{dp_implication, dp_sat, entailment_oracle_with, OracleKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn graph() -> impl Strategy<Value = Graph> {
    (0usize..=12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e);
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluate_is_total(seed in any::<u64>(), bits in any::<u32>()) {
        let f = random_formula(&mut rng(seed), 4, 5);
        let total: BTreeMap<Atom, bool> =
            f.atoms().into_iter().enumerate().map(|(i, a)| (a, bits >> i & 1 == 1)).collect();
        let first = f.evaluate(&total).unwrap();
        prop_assert_eq!(f.evaluate(&total).unwrap(), first);
    }

    #[test]
    fn print_then_parse(seed in any::<u64>()) {
        let f = random_formula(&mut rng(seed), 4, 5);
        let back = parse_formula(&f.to_string(), Mode::Prop, &Basis::default()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert!(f.subformulae().len() <= f.node_count());
    }

    #[test]
    fn implication_is_per_conclusion_unsat(seed in any::<u64>()) {
        let limits = Limits::default();
        let (f, g) = random_imp_pair(&mut rng(seed), &Basis::default(), 10);
        let expected = g.iter().all(|c| {
            let mut probe = f.clone();
            probe.push(Formula::not(c.clone()));
            sat_bruteforce(&probe, &limits).unwrap().is_none()
        });
        prop_assert_eq!(implies_bruteforce(&f, &g, &limits).unwrap(), expected);
    }

    #[test]
    fn dp_matches_brute_force(seed in any::<u64>()) {
        let limits = Limits::default();
        let mut r = rng(seed);
        let gamma = random_gamma(&mut r, &Basis::default(), 14);
        prop_assert_eq!(dp_sat(&gamma, None, &limits).unwrap(), sat_bruteforce(&gamma, &limits).unwrap().is_some());
        let (f, g) = random_imp_pair(&mut r, &Basis::default(), 12);
        prop_assert_eq!(dp_implication(&f, &g, &limits).unwrap(), implies_bruteforce(&f, &g, &limits).unwrap());
    }

    #[test]
    fn heuristics_are_valid_and_bound_exact(g in graph()) {
        let (w, td) = exact_treewidth(&g, None, &Limits::default()).unwrap();
        prop_assert!(is_valid(&g, &td));
        for h in [Heuristic::MinFill, Heuristic::MinDegree] {
            let td = heuristic_decomposition(&g, h);
            prop_assert!(is_valid(&g, &td));
            prop_assert!(w <= td.width().unwrap());
        }
    }

    #[test]
    fn pace_formats_round_trip(g in graph()) {
        let text = write_gr(&g);
        prop_assert_eq!(write_gr(&parse_gr(&text).unwrap()), text.clone());
        let td = heuristic_decomposition(&g, Heuristic::MinFill);
        let td_text = write_td(&td, g.n());
        prop_assert_eq!(write_td(&parse_td(&td_text).unwrap().0, g.n()), td_text);
    }

    #[test]
    fn extension_witnesses_are_fixpoints(seed in any::<u64>()) {
        let limits = Limits::default();
        let t = random_literal_theory(&mut rng(seed), 4, 4);
        let brute = entailment_oracle_with(OracleKind::Brute, &limits);
        let twdp = entailment_oracle_with(OracleKind::Twdp, &limits);
        let a = extension_exists(&t, brute.as_ref(), &limits).unwrap();
        let b = extension_exists(&t, twdp.as_ref(), &limits).unwrap();
        for g in &a.1 {
            let (fixed, applied) = stage_fixpoint(&t, g, brute.as_ref()).unwrap();
            prop_assert!(fixed);
            prop_assert_eq!(&applied, g);
        }
        prop_assert_eq!(a, b);
    }

    #[test]
    fn stage_fixpoint_never_overshoots(seed in any::<u64>(), mask in any::<u8>()) {
        let limits = Limits::default();
        let t = random_literal_theory(&mut rng(seed), 4, 4);
        let oracle = entailment_oracle_with(OracleKind::Twdp, &limits);
        let candidate: BTreeSet<usize> = (0..t.d.len()).filter(|i| mask >> i & 1 == 1).collect();
        let (fixed, applied) = stage_fixpoint(&t, &candidate, oracle.as_ref()).unwrap();
        prop_assert_eq!(fixed, applied == candidate);
    }

    #[test]
    fn full_sets_fix_every_belief(seed in any::<u64>()) {
        let limits = Limits::default();
        let sigma = random_ae_theory(&mut rng(seed), 3, 10);
        let beliefs = sigma.belief_subformulae();
        let brute = entailment_oracle_with(OracleKind::Brute, &limits);
        let twdp = entailment_oracle_with(OracleKind::Twdp, &limits);
        let (exists, sets) = expansion_exists(&sigma, twdp.as_ref(), &limits).unwrap();
        prop_assert_eq!(exists, !sets.is_empty());
        for set in &sets {
            prop_assert_eq!(set.polarity.len(), beliefs.len());
        }
        prop_assert_eq!(expansion_exists(&sigma, brute.as_ref(), &limits).unwrap(), (exists, sets));
    }
}
