//! Seeded random instances for sweeps and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ael::AeTheory;
use crate::dl::{DefaultRule, DefaultTheory};
use crate::formula::{subformulae_of, Basis, Connective, Formula};
use crate::structures::Graph;

fn var(i: usize) -> Formula {
    Formula::var(format!("v{i}"))
}

/// A formula over `v0..v(vars-1)` using the full default basis.
pub fn random_formula(rng: &mut impl Rng, vars: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return var(rng.gen_range(0..vars));
    }
    let pick = rng.gen_range(0..6);
    let mut sub = || random_formula(rng, vars, depth - 1);
    match pick {
        0 => Formula::not(sub()),
        1 => Formula::and(sub(), sub()),
        2 => Formula::or(sub(), sub()),
        3 => Formula::imp(sub(), sub()),
        4 => Formula::xor(sub(), sub()),
        _ => Formula::xor3(sub(), sub(), sub()),
    }
}

/// A formula over the given leaves and the connectives of `basis`.
pub fn random_formula_over(rng: &mut impl Rng, leaves: &[Formula], basis: &Basis, depth: usize) -> Formula {
    let ops: Vec<Connective> = basis.iter().collect();
    if depth == 0 || rng.gen_bool(0.35) {
        let constants: Vec<Connective> = ops.iter().copied().filter(|c| c.arity() == 0).collect();
        if !constants.is_empty() && rng.gen_bool(0.1) {
            return match constants.choose(rng).unwrap() {
                Connective::True => Formula::constant(true),
                _ => Formula::constant(false),
            };
        }
        return leaves.choose(rng).expect("at least one leaf").clone();
    }
    let inner: Vec<Connective> = ops.into_iter().filter(|c| c.arity() > 0).collect();
    let Some(&op) = inner.choose(rng) else {
        return leaves.choose(rng).expect("at least one leaf").clone();
    };
    let args = (0..op.arity())
        .map(|_| random_formula_over(rng, leaves, basis, depth - 1))
        .collect();
    Formula::App(op, args)
}

/// Up to three formulas over at most three variables with at most
/// `max_sub` distinct subformulas in total.
pub fn random_gamma(rng: &mut impl Rng, basis: &Basis, max_sub: usize) -> Vec<Formula> {
    loop {
        let vars: Vec<Formula> = (0..rng.gen_range(1..=3)).map(var).collect();
        let gamma: Vec<Formula> = (0..rng.gen_range(1..=3))
            .map(|_| random_formula_over(rng, &vars, basis, 3))
            .collect();
        if subformulae_of(&gamma).len() <= max_sub {
            return gamma;
        }
    }
}

/// Premises and conclusions with at most `max_sub` joint distinct subformulas.
pub fn random_imp_pair(rng: &mut impl Rng, basis: &Basis, max_sub: usize) -> (Vec<Formula>, Vec<Formula>) {
    loop {
        let vars: Vec<Formula> = (0..rng.gen_range(1..=3)).map(var).collect();
        let f: Vec<Formula> = (0..rng.gen_range(0..=2))
            .map(|_| random_formula_over(rng, &vars, basis, 2))
            .collect();
        let g: Vec<Formula> = (0..rng.gen_range(1..=2))
            .map(|_| random_formula_over(rng, &vars, basis, 2))
            .collect();
        if subformulae_of(f.iter().chain(&g)).len() <= max_sub {
            return (f, g);
        }
    }
}

fn literal(rng: &mut impl Rng, vars: usize) -> Formula {
    let v = var(rng.gen_range(0..vars));
    match rng.gen_range(0..10) {
        0 => Formula::constant(true),
        1 => Formula::constant(false),
        2..=5 => Formula::not(v),
        _ => v,
    }
}

/// Defaults whose parts are literals or constants, with up to one literal in `W`.
pub fn random_literal_theory(rng: &mut impl Rng, max_rules: usize, vars: usize) -> DefaultTheory {
    let w = (0..rng.gen_range(0..=1)).map(|_| literal(rng, vars)).collect();
    let d = (0..rng.gen_range(0..=max_rules))
        .map(|_| {
            // A derivable prerequisite more often than not, so rules actually fire.
            let pre = if rng.gen_bool(0.4) {
                Formula::constant(true)
            } else {
                literal(rng, vars)
            };
            DefaultRule::new(pre, literal(rng, vars), literal(rng, vars))
        })
        .collect();
    DefaultTheory::new(w, d)
}

/// Σ over `v0, v1` with at most `max_beliefs` L-subformulas and
/// `max_sub` distinct subformulas.
pub fn random_ae_theory(rng: &mut impl Rng, max_beliefs: usize, max_sub: usize) -> AeTheory {
    let basis = Basis::new([Connective::Not, Connective::And, Connective::Or, Connective::Imp]).expect("nonempty");
    loop {
        let vars: Vec<Formula> = (0..2).map(var).collect();
        let mut leaves = vars.clone();
        for _ in 0..rng.gen_range(1..=2) {
            let inner = random_formula_over(rng, &vars, &basis, 1);
            leaves.push(Formula::believes(inner));
        }
        let sigma = AeTheory::new(
            (0..rng.gen_range(1..=2))
                .map(|_| random_formula_over(rng, &leaves, &basis, 2))
                .collect(),
        );
        let beliefs = sigma.belief_subformulae().len();
        if beliefs <= max_beliefs && subformulae_of(&sigma.sigma).len() <= max_sub {
            return sigma;
        }
    }
}

/// Erdős–Rényi graph on `n` vertices.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).expect("distinct vertices in range");
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let basis = Basis::parse("or,not").unwrap();
        for _ in 0..100 {
            let g = random_gamma(&mut rng, &basis, 8);
            assert!(subformulae_of(&g).len() <= 8);
            assert!(g.iter().all(|f| f.check_basis(&basis).is_ok()));
            let s = random_ae_theory(&mut rng, 3, 8);
            assert!(s.belief_subformulae().len() <= 3);
            let t = random_literal_theory(&mut rng, 3, 3);
            assert!(t.d.len() <= 3 && t.w.len() <= 1);
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = random_gamma(&mut ChaCha8Rng::seed_from_u64(7), &Basis::default(), 8);
        let b = random_gamma(&mut ChaCha8Rng::seed_from_u64(7), &Basis::default(), 8);
        assert_eq!(a, b);
    }
}
