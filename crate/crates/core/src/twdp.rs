//! Satisfiability and implication by dynamic programming over tree
//! decompositions, and the entailment oracles used by the nonmonotonic
//! semantics.
//!
//! The DP runs on a constraint graph with one vertex per distinct subformula,
//! where every connective node forms a clique with its arguments. Each local
//! constraint (`x ↔ f(y1, …)`, constants, and `x = true` for input formulas)
//! therefore lies inside some bag. Tables are bitsets over the assignments
//! to a bag.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{implies_bruteforce, sat_bruteforce, Circuit, Formula, Gate};
use crate::limits::Limits;
use crate::structures::Graph;
use crate::treewidth::{heuristic_decomposition, is_valid, make_nice, Heuristic, NiceKind, TreeDecomposition};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Constraint {
    /// `vertex ↔ op(args)`; vertices are 1-based.
    Gate {
        vertex: usize,
        op: crate::formula::Connective,
        args: Vec<usize>,
    },
    Fixed {
        vertex: usize,
        value: bool,
    },
}

impl Constraint {
    fn scope(&self) -> Vec<usize> {
        match self {
            Constraint::Gate { vertex, args, .. } => {
                let mut s = args.clone();
                s.push(*vertex);
                s
            }
            Constraint::Fixed { vertex, .. } => vec![*vertex],
        }
    }
}

/// Constraint graph of a formula set: vertex `i + 1` is circuit gate `i`.
#[derive(Debug, Clone)]
pub struct ConstraintGraph {
    circuit: Circuit,
    graph: Graph,
    constraints: Vec<Constraint>,
    by_vertex: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    pub fn build(formulas: &[Formula]) -> ConstraintGraph {
        let circuit = Circuit::compile(formulas);
        let n = circuit.gates.len();
        let mut graph = Graph::new(n);
        let mut constraints = Vec::new();
        for (i, gate) in circuit.gates.iter().enumerate() {
            let vertex = i + 1;
            match gate {
                Gate::Input(_) => {}
                Gate::Const(value) => constraints.push(Constraint::Fixed { vertex, value: *value }),
                Gate::Op(op, args) => {
                    let args: Vec<usize> = args.iter().map(|a| a + 1).collect();
                    let mut clique = args.clone();
                    clique.push(vertex);
                    for (x, &a) in clique.iter().enumerate() {
                        for &b in &clique[x + 1..] {
                            if a != b {
                                graph.add_edge(a, b).expect("gate ids are in range");
                            }
                        }
                    }
                    constraints.push(Constraint::Gate { vertex, op: *op, args });
                }
            }
        }
        for &r in &circuit.roots {
            constraints.push(Constraint::Fixed {
                vertex: r + 1,
                value: true,
            });
        }
        let mut by_vertex = vec![Vec::new(); n + 1];
        for (c, con) in constraints.iter().enumerate() {
            let mut scope = con.scope();
            scope.sort_unstable();
            scope.dedup();
            for v in scope {
                by_vertex[v].push(c);
            }
        }
        ConstraintGraph {
            circuit,
            graph,
            constraints,
            by_vertex,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn atom_count(&self) -> usize {
        self.circuit.atoms.len()
    }
}

/// Bitset over the `2^k` assignments of a `k`-vertex bag.
#[derive(Clone)]
struct Table {
    words: Vec<u64>,
}

impl Table {
    fn empty(size: usize) -> Table {
        Table {
            words: vec![0; (1usize << size).div_ceil(64)],
        }
    }

    fn insert(&mut self, m: usize) {
        self.words[m >> 6] |= 1 << (m & 63);
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some((w << 6) | b)
            })
        })
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

fn bit(m: usize, p: usize) -> bool {
    m >> p & 1 == 1
}

/// Decides satisfiability of `gamma` by DP over `td`, a decomposition of
/// `ConstraintGraph::build(gamma).graph()`; min-fill is used when absent.
pub fn dp_sat(gamma: &[Formula], td: Option<&TreeDecomposition>, limits: &Limits) -> Result<bool> {
    let cg = ConstraintGraph::build(gamma);
    dp_sat_on(&cg, td, limits)
}

pub fn dp_sat_on(cg: &ConstraintGraph, td: Option<&TreeDecomposition>, limits: &Limits) -> Result<bool> {
    let owned;
    let td = match td {
        Some(td) => {
            if !is_valid(&cg.graph, td) {
                return Err(Error::InvalidDecomposition(
                    "not a tree decomposition of the constraint graph".into(),
                ));
            }
            td
        }
        None => {
            owned = heuristic_decomposition(&cg.graph, Heuristic::MinFill);
            &owned
        }
    };
    let width = td.width()?;
    if width > limits.dp_width {
        return Err(Error::limit("DP decomposition width", limits.dp_width, width));
    }
    let nice = make_nice(td)?;

    // Position of each vertex in the bag currently being processed.
    let mut pos = vec![usize::MAX; cg.graph.n() + 1];
    let mut tables: Vec<Option<Table>> = vec![None; nice.nodes.len()];
    for (id, node) in nice.nodes.iter().enumerate() {
        let bag: Vec<usize> = node.bag.iter().copied().collect();
        let table = match node.kind {
            NiceKind::Leaf => {
                let mut t = Table::empty(0);
                t.insert(0);
                t
            }
            NiceKind::Introduce(v) => {
                let child = tables[node.children[0]].take().expect("child table");
                for (i, &u) in bag.iter().enumerate() {
                    pos[u] = i;
                }
                let p = pos[v];
                let low = (1usize << p) - 1;
                let checks: Vec<&Constraint> = cg.by_vertex[v]
                    .iter()
                    .map(|&c| &cg.constraints[c])
                    .filter(|c| c.scope().iter().all(|u| node.bag.contains(u)))
                    .collect();
                let mut t = Table::empty(bag.len());
                for m in child.iter() {
                    for b in 0..2 {
                        let nm = (m & low) | (b << p) | ((m >> p) << (p + 1));
                        if checks.iter().all(|c| satisfied(c, nm, &pos)) {
                            t.insert(nm);
                        }
                    }
                }
                t
            }
            NiceKind::Forget(v) => {
                let child_bag = &nice.nodes[node.children[0]].bag;
                let p = child_bag
                    .iter()
                    .position(|&u| u == v)
                    .expect("forgotten vertex in child bag");
                let child = tables[node.children[0]].take().expect("child table");
                let low = (1usize << p) - 1;
                let mut t = Table::empty(bag.len());
                for m in child.iter() {
                    t.insert((m & low) | ((m >> (p + 1)) << p));
                }
                t
            }
            NiceKind::Join => {
                let a = tables[node.children[0]].take().expect("child table");
                let b = tables[node.children[1]].take().expect("child table");
                Table {
                    words: a.words.iter().zip(&b.words).map(|(x, y)| x & y).collect(),
                }
            }
        };
        tables[id] = Some(table);
    }
    Ok(!tables[nice.root].take().expect("root table").is_empty())
}

fn satisfied(c: &Constraint, mask: usize, pos: &[usize]) -> bool {
    match c {
        Constraint::Fixed { vertex, value } => bit(mask, pos[*vertex]) == *value,
        Constraint::Gate { vertex, op, args } => {
            let vals: Vec<bool> = args.iter().map(|a| bit(mask, pos[*a])).collect();
            bit(mask, pos[*vertex]) == op.apply(&vals)
        }
    }
}

/// `F ⊨ G` as one unsatisfiability run of `F ∪ {¬g}` per `g ∈ G`.
pub fn dp_implication(f: &[Formula], g: &[Formula], limits: &Limits) -> Result<bool> {
    for gi in g {
        let mut probe = f.to_vec();
        probe.push(Formula::not(gi.clone()));
        if dp_sat(&probe, None, limits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Brute,
    Twdp,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Brute => "brute",
            OracleKind::Twdp => "twdp",
        })
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<OracleKind> {
        match s {
            "brute" => Ok(OracleKind::Brute),
            "twdp" => Ok(OracleKind::Twdp),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Satisfiability and entailment over formulas whose `L`-subformulas are atoms.
pub trait EntailmentOracle: Send + Sync {
    fn kind(&self) -> OracleKind;

    fn satisfiable(&self, formulas: &[Formula]) -> Result<bool>;

    fn entails(&self, premises: &[Formula], phi: &Formula) -> Result<bool> {
        let mut probe = premises.to_vec();
        probe.push(Formula::not(phi.clone()));
        Ok(!self.satisfiable(&probe)?)
    }
}

struct BruteOracle {
    limits: Limits,
}

impl EntailmentOracle for BruteOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::Brute
    }

    fn satisfiable(&self, formulas: &[Formula]) -> Result<bool> {
        Ok(sat_bruteforce(formulas, &self.limits)?.is_some())
    }

    fn entails(&self, premises: &[Formula], phi: &Formula) -> Result<bool> {
        implies_bruteforce(premises, std::slice::from_ref(phi), &self.limits)
    }
}

struct TwdpOracle {
    limits: Limits,
}

impl EntailmentOracle for TwdpOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::Twdp
    }

    fn satisfiable(&self, formulas: &[Formula]) -> Result<bool> {
        dp_sat(formulas, None, &self.limits)
    }
}

pub fn entailment_oracle(kind: OracleKind) -> Box<dyn EntailmentOracle> {
    entailment_oracle_with(kind, &Limits::default())
}

pub fn entailment_oracle_with(kind: OracleKind, limits: &Limits) -> Box<dyn EntailmentOracle> {
    let limits = *limits;
    match kind {
        OracleKind::Brute => Box::new(BruteOracle { limits }),
        OracleKind::Twdp => Box::new(TwdpOracle { limits }),
    }
}

/// `{x1, x1 → x2, …, x(m-1) → xm}`.
pub fn chain_family(m: usize) -> Vec<Formula> {
    let x = |i: usize| Formula::var(format!("x{i}"));
    let mut out = Vec::with_capacity(m);
    if m >= 1 {
        out.push(x(1));
    }
    out.extend((1..m).map(|i| Formula::imp(x(i), x(i + 1))));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Basis, Mode};
    use crate::random::random_formula;
    use crate::treewidth::{exact_treewidth, Heuristic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(s: &str) -> Formula {
        parse_formula(s, Mode::Prop, &Basis::default()).unwrap()
    }

    #[test]
    fn basic_examples() {
        let l = Limits::default();
        assert!(!dp_sat(&[f("p & !p")], None, &l).unwrap());
        assert!(dp_sat(&[], None, &l).unwrap());
        assert!(dp_sat(&[f("T")], None, &l).unwrap());
        assert!(!dp_sat(&[f("F")], None, &l).unwrap());
        assert!(dp_implication(&[f("p"), f("p -> q")], &[f("q")], &l).unwrap());
        assert!(!dp_implication(&[f("p | q")], &[f("p")], &l).unwrap());
        assert!(dp_implication(&[], &[f("p | !p")], &l).unwrap());
    }

    #[test]
    fn chain_family_is_narrow_and_satisfiable() {
        let l = Limits::default();
        let gamma = chain_family(50);
        let cg = ConstraintGraph::build(&gamma);
        let td = heuristic_decomposition(cg.graph(), Heuristic::MinFill);
        assert!(td.width().unwrap() <= 3);
        assert!(dp_sat(&gamma, Some(&td), &l).unwrap());
        assert_eq!(
            sat_bruteforce(&chain_family(10), &l).unwrap().is_some(),
            dp_sat(&chain_family(10), None, &l).unwrap()
        );
    }

    #[test]
    fn agrees_with_bruteforce() {
        let l = Limits::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let k = rng.gen_range(0..4);
            let vars = rng.gen_range(1..=6);
            let gamma: Vec<Formula> = (0..k).map(|_| random_formula(&mut rng, vars, 3)).collect();
            assert_eq!(
                dp_sat(&gamma, None, &l).unwrap(),
                sat_bruteforce(&gamma, &l).unwrap().is_some(),
                "{gamma:?}"
            );
        }
    }

    #[test]
    fn implication_agrees_with_bruteforce() {
        let l = Limits::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let vars = rng.gen_range(1..=5);
            let fs: Vec<Formula> = (0..rng.gen_range(0..3))
                .map(|_| random_formula(&mut rng, vars, 2))
                .collect();
            let gs: Vec<Formula> = (0..rng.gen_range(0..3))
                .map(|_| random_formula(&mut rng, vars, 2))
                .collect();
            assert_eq!(
                dp_implication(&fs, &gs, &l).unwrap(),
                implies_bruteforce(&fs, &gs, &l).unwrap()
            );
        }
    }

    #[test]
    fn verdict_independent_of_decomposition() {
        let l = Limits::default();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let vars = rng.gen_range(1..=5);
            let gamma: Vec<Formula> = (0..rng.gen_range(1..4))
                .map(|_| random_formula(&mut rng, vars, 3))
                .collect();
            let cg = ConstraintGraph::build(&gamma);
            let mut verdicts = Vec::new();
            for m in [Heuristic::MinDegree, Heuristic::MinFill] {
                verdicts.push(dp_sat_on(&cg, Some(&heuristic_decomposition(cg.graph(), m)), &l).unwrap());
            }
            if let Ok((_, td)) = exact_treewidth(cg.graph(), None, &l) {
                verdicts.push(dp_sat_on(&cg, Some(&td), &l).unwrap());
            }
            assert!(verdicts.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn rejects_wide_or_invalid_decompositions() {
        let l = Limits::default().with_overrides("dp_width=1").unwrap();
        let err = dp_sat(&[f("(a & b) | (c & d)")], None, &l).unwrap_err();
        assert!(err.is_resource_limit());
        let cg = ConstraintGraph::build(&[f("p & q")]);
        let bad = TreeDecomposition::from_parts([[1usize].into_iter().collect()], []);
        assert!(dp_sat_on(&cg, Some(&bad), &Limits::default()).is_err());
    }

    #[test]
    fn oracles_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let brute = entailment_oracle(OracleKind::Brute);
        let twdp = entailment_oracle(OracleKind::Twdp);
        for _ in 0..300 {
            let vars = rng.gen_range(1..=4);
            let prem: Vec<Formula> = (0..rng.gen_range(0..3))
                .map(|_| random_formula(&mut rng, vars, 2))
                .collect();
            let phi = random_formula(&mut rng, vars, 2);
            assert_eq!(brute.entails(&prem, &phi).unwrap(), twdp.entails(&prem, &phi).unwrap());
        }
        assert!(twdp.entails(&[], &f("p | !p")).unwrap());
    }

    #[test]
    fn beliefs_are_atoms() {
        let ae = |s: &str| parse_formula(s, Mode::Ae, &Basis::default()).unwrap();
        let o = entailment_oracle(OracleKind::Twdp);
        assert!(o.entails(&[ae("L p -> p"), ae("L p")], &ae("p")).unwrap());
        assert!(!o.entails(&[ae("L p -> p")], &ae("p")).unwrap());
        assert!(o.satisfiable(&[ae("L p"), ae("!p")]).unwrap());
    }
}
