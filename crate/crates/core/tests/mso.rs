use nmlkit_core::ael::parse_ae_theory;
use nmlkit_core::dl::parse_default_theory;
use nmlkit_core::formula::{parse_formula, sat_bruteforce, Basis, Connective, Mode};
use nmlkit_core::limits::Limits;
use nmlkit_core::mso::{eval_mso, paper_formula, parse_mso, Env, PaperFormula, Variant};
use nmlkit_core::random::random_gamma;
use nmlkit_core::structures::{build_ael_structure, build_dl_structure, build_prop_structure, RelationalStructure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prop(gamma: &[&str], basis: &Basis) -> RelationalStructure {
    let gamma: Vec<_> = gamma
        .iter()
        .map(|f| parse_formula(f, Mode::Prop, basis).unwrap())
        .collect();
    build_prop_structure(&gamma, basis).unwrap()
}

fn holds(s: &RelationalStructure, name: PaperFormula, basis: &Basis) -> bool {
    eval_mso(s, &paper_formula(name, basis, Variant::Corrected), &Env::new()).unwrap()
}

#[test]
fn full_set_witness() {
    let s = prop(&["p", "q"], &Basis::default());
    assert_eq!(s.len(), 2);
    assert!(eval_mso(&s, &parse_mso("E M. A x. x in M").unwrap(), &Env::new()).unwrap());
}

#[test]
fn sat_on_small_sets() {
    let b = Basis::default();
    assert!(!holds(&prop(&["p & !p"], &b), PaperFormula::Sat, &b));
    assert!(holds(&prop(&["p | q"], &b), PaperFormula::Sat, &b));
}

#[test]
fn sat_over_or_not_matches_truth_tables() {
    let basis = Basis::new([Connective::Or, Connective::Not]).unwrap();
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let gamma = random_gamma(&mut rng, &basis, 8);
        let s = build_prop_structure(&gamma, &basis).unwrap();
        let expected = sat_bruteforce(&gamma, &limits).unwrap().is_some();
        assert_eq!(holds(&s, PaperFormula::Sat, &basis), expected, "{gamma:?}");
    }
}

#[test]
fn extension_of_a_single_normal_default() {
    let b = Basis::default();
    let t = parse_default_theory("d: T ; p ; q", &b).unwrap();
    assert!(holds(&build_dl_structure(&t, &b).unwrap(), PaperFormula::Extension, &b));
}

#[test]
fn no_full_set_for_self_undermining_belief() {
    let b = Basis::default();
    let sigma = parse_ae_theory("!L p -> p", &b).unwrap();
    assert!(!holds(
        &build_ael_structure(&sigma, &b).unwrap(),
        PaperFormula::FullExists,
        &b
    ));
}
