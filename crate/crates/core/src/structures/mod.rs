//! Relational structures encoding formula sets, implication instances,
//! default theories and autoepistemic theories, and their Gaifman graphs.
//!
//! Universe elements are the structurally distinct subformulas of the input
//! (one element per distinct subtree, shared across all input formulas) plus,
//! for default theories, one element per rule. Relation symbols:
//!
//! * `var/1`, `repr/1`, `const_true/1`, `const_false/1`
//! * `conn_<f>_<i>/2`: `conn_<f>_<i>(x, y)` iff `x` is the `i`-th argument of
//!   the connective `f` at the root of `y`
//! * `reprPrem/1`, `reprConc/1` for implication instances
//! * `kb/1`, `default/1`, `prem/2`, `just/2`, `concl/2` for default theories
//! * `L/1` and `conn_L_1/2` for autoepistemic theories; `conn_L_1(x, y)` links
//!   `φ` to `Lφ`
//!
//! Default-theory and autoepistemic structures always carry `¬`, even if the
//! basis lacks it, because they materialise `¬β` and `¬Lφ`.

mod graph;

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::Serialize;

pub use graph::{Graph, VertexLabel};

use crate::ael::AeTheory;
use crate::dl::DefaultTheory;
use crate::error::{Error, Result};
use crate::formula::{Basis, Connective, Formula};

pub const VAR: &str = "var";
pub const REPR: &str = "repr";
pub const REPR_PREM: &str = "reprPrem";
pub const REPR_CONC: &str = "reprConc";
pub const KB: &str = "kb";
pub const DEFAULT: &str = "default";
pub const PREM: &str = "prem";
pub const JUST: &str = "just";
pub const CONCL: &str = "concl";
pub const BELIEF: &str = "L";
pub const BELIEF_ARG: &str = "conn_L_1";

pub fn conn_name(c: Connective, i: usize) -> String {
    format!("conn_{}_{}", c.name(), i)
}

pub fn const_name(c: Connective) -> String {
    format!("const_{}", c.name())
}

/// Which encoding a structure (and its vocabulary) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Prop,
    Imp,
    Dl,
    Ae,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    relations: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new(relations: Vec<(String, usize)>) -> Result<Vocabulary> {
        let mut seen = BTreeSet::new();
        for (name, arity) in &relations {
            if !seen.insert(name.as_str()) {
                return Err(Error::Invalid(format!("duplicate relation `{name}`")));
            }
            if !(1..=2).contains(arity) {
                return Err(Error::Invalid(format!("relation `{name}` has arity {arity}")));
            }
        }
        Ok(Vocabulary { relations })
    }

    /// Connective symbols of `basis`: `const_f/1` and `conn_f_i/2`.
    pub fn connectives(basis: &Basis) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for c in basis.iter() {
            if c.arity() == 0 {
                out.push((const_name(c), 1));
            } else {
                out.extend((1..=c.arity()).map(|i| (conn_name(c, i), 2)));
            }
        }
        out
    }

    pub fn for_kind(kind: StructureKind, basis: &Basis) -> Vocabulary {
        let basis = match kind {
            StructureKind::Dl | StructureKind::Ae => basis.with(Connective::Not),
            _ => basis.clone(),
        };
        let mut rels = Vocabulary::connectives(&basis);
        rels.push((VAR.into(), 1));
        rels.push((REPR.into(), 1));
        match kind {
            StructureKind::Prop => {}
            StructureKind::Imp => {
                rels.push((REPR_PREM.into(), 1));
                rels.push((REPR_CONC.into(), 1));
            }
            StructureKind::Dl => {
                for (n, a) in [(KB, 1), (DEFAULT, 1), (PREM, 2), (JUST, 2), (CONCL, 2)] {
                    rels.push((n.into(), a));
                }
            }
            StructureKind::Ae => {
                rels.push((BELIEF.into(), 1));
                rels.push((BELIEF_ARG.into(), 2));
            }
        }
        Vocabulary { relations: rels }
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ElementKind {
    Formula {
        formula: Formula,
    },
    /// Rule index into `D`, 0-based.
    Default {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Element {
    pub kind: ElementKind,
    pub description: String,
}

/// A finite relational structure; elements are identified by their index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationalStructure {
    pub kind: StructureKind,
    pub basis: Basis,
    vocabulary: Vocabulary,
    elements: Vec<Element>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl RelationalStructure {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn tuples(&self, relation: &str) -> impl Iterator<Item = &[usize]> + '_ {
        self.relations
            .get(relation)
            .into_iter()
            .flat_map(|set| set.iter().map(Vec::as_slice))
    }

    pub fn holds(&self, relation: &str, args: &[usize]) -> bool {
        self.relations.get(relation).is_some_and(|set| set.contains(args))
    }

    /// Elements in a unary relation, ascending.
    pub fn members(&self, relation: &str) -> Vec<usize> {
        self.tuples(relation).map(|t| t[0]).collect()
    }

    /// Element representing `f`, if present.
    pub fn element_of(&self, f: &Formula) -> Option<usize> {
        self.elements.iter().position(|e| match &e.kind {
            ElementKind::Formula { formula } => formula == f,
            _ => false,
        })
    }

    pub fn descriptions(&self) -> Vec<String> {
        self.elements.iter().map(|e| e.description.clone()).collect()
    }

    /// Checks arities, universe membership and the unique-argument condition.
    pub fn validate(&self) -> Result<()> {
        for (name, tuples) in &self.relations {
            let arity = self
                .vocabulary
                .arity(name)
                .ok_or_else(|| Error::Invalid(format!("relation `{name}` not in vocabulary")))?;
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::Invalid(format!("tuple {t:?} of `{name}` has wrong length")));
                }
                if let Some(bad) = t.iter().find(|&&x| x >= self.len()) {
                    return Err(Error::Invalid(format!("element {bad} of `{name}` outside universe")));
                }
            }
        }
        for (y, e) in self.elements.iter().enumerate() {
            if let ElementKind::Formula {
                formula: Formula::App(c, args),
            } = &e.kind
            {
                for i in 1..=args.len() {
                    let rel = conn_name(*c, i);
                    let count = self.tuples(&rel).filter(|t| t[1] == y).count();
                    if count != 1 {
                        return Err(Error::Invalid(format!(
                            "element `{}` has {count} arguments in `{rel}`",
                            e.description
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reorders the universe: new element `i` is old element `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> RelationalStructure {
        assert_eq!(perm.len(), self.len());
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        RelationalStructure {
            kind: self.kind,
            basis: self.basis.clone(),
            vocabulary: self.vocabulary.clone(),
            elements: perm.iter().map(|&old| self.elements[old].clone()).collect(),
            relations: self
                .relations
                .iter()
                .map(|(n, ts)| {
                    let ts = ts.iter().map(|t| t.iter().map(|&x| inverse[x]).collect()).collect();
                    (n.clone(), ts)
                })
                .collect(),
        }
    }
}

struct Builder {
    kind: StructureKind,
    basis: Basis,
    index: IndexMap<Formula, usize>,
    elements: Vec<Element>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Builder {
    fn new(kind: StructureKind, basis: &Basis) -> Builder {
        let vocab = Vocabulary::for_kind(kind, basis);
        Builder {
            kind,
            basis: basis.clone(),
            index: IndexMap::new(),
            elements: Vec::new(),
            relations: vocab
                .relations
                .iter()
                .map(|(n, _)| (n.clone(), BTreeSet::new()))
                .collect(),
        }
    }

    fn rel(&mut self, name: &str, tuple: Vec<usize>) {
        self.relations
            .get_mut(name)
            .unwrap_or_else(|| panic!("relation `{name}` missing from vocabulary"))
            .insert(tuple);
    }

    fn push(&mut self, kind: ElementKind, description: String) -> usize {
        self.elements.push(Element { kind, description });
        self.elements.len() - 1
    }

    /// Adds `f` and its subformulas (post-order) and returns its element.
    fn formula(&mut self, f: &Formula) -> Result<usize> {
        if let Some(&id) = self.index.get(f) {
            return Ok(id);
        }
        let id = match f {
            Formula::Var(_) => {
                let id = self.fresh(f);
                self.rel(VAR, vec![id]);
                id
            }
            Formula::Const(_) => {
                let c = f.root_connective().unwrap();
                self.check_basis(c)?;
                let id = self.fresh(f);
                self.rel(&const_name(c), vec![id]);
                id
            }
            Formula::App(c, args) => {
                self.check_basis(*c)?;
                let ids = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>>>()?;
                let id = self.fresh(f);
                for (i, arg) in ids.into_iter().enumerate() {
                    self.rel(&conn_name(*c, i + 1), vec![arg, id]);
                }
                id
            }
            Formula::Believes(inner) => {
                if self.kind != StructureKind::Ae {
                    return Err(Error::BeliefInPropositional);
                }
                let arg = self.formula(inner)?;
                let id = self.fresh(f);
                self.rel(BELIEF, vec![id]);
                self.rel(BELIEF_ARG, vec![arg, id]);
                // ¬Lφ is part of the universe for every Lφ.
                self.negation(id, f);
                id
            }
        };
        Ok(id)
    }

    fn negation(&mut self, base: usize, f: &Formula) -> usize {
        let neg = Formula::not(f.clone());
        if let Some(&id) = self.index.get(&neg) {
            return id;
        }
        let id = self.fresh(&neg);
        self.rel(&conn_name(Connective::Not, 1), vec![base, id]);
        id
    }

    fn check_basis(&self, c: Connective) -> Result<()> {
        let allowed = self.basis.contains(c)
            || (c == Connective::Not && matches!(self.kind, StructureKind::Dl | StructureKind::Ae));
        if allowed {
            Ok(())
        } else {
            Err(Error::ConnectiveNotInBasis(c.name().to_string()))
        }
    }

    fn fresh(&mut self, f: &Formula) -> usize {
        let id = self.push(ElementKind::Formula { formula: f.clone() }, f.to_string());
        self.index.insert(f.clone(), id);
        id
    }

    fn finish(self) -> RelationalStructure {
        RelationalStructure {
            kind: self.kind,
            vocabulary: Vocabulary::for_kind(self.kind, &self.basis),
            basis: self.basis,
            elements: self.elements,
            relations: self.relations,
        }
    }
}

/// `A_Γ`: subformulas of `gamma`, with `repr` marking the members of `gamma`.
pub fn build_prop_structure(gamma: &[Formula], basis: &Basis) -> Result<RelationalStructure> {
    let mut b = Builder::new(StructureKind::Prop, basis);
    for f in gamma {
        let id = b.formula(f)?;
        b.rel(REPR, vec![id]);
    }
    Ok(b.finish())
}

/// `A_{F,G}`: like `A_Γ` for `F ∪ G`, with `reprPrem`/`reprConc` marking the two sides.
pub fn build_imp_structure(
    premises: &[Formula],
    conclusions: &[Formula],
    basis: &Basis,
) -> Result<RelationalStructure> {
    let mut b = Builder::new(StructureKind::Imp, basis);
    for f in premises {
        let id = b.formula(f)?;
        b.rel(REPR, vec![id]);
        b.rel(REPR_PREM, vec![id]);
    }
    for f in conclusions {
        let id = b.formula(f)?;
        b.rel(REPR, vec![id]);
        b.rel(REPR_CONC, vec![id]);
    }
    Ok(b.finish())
}

/// `A_{(W,D)}`. Formula elements come first (`W`, then per rule `α`, `β`,
/// `¬β`, `γ`), followed by one element `d1..dm` per rule. `repr` marks every
/// top-level formula (the members of `W` and every `α`, `β`, `¬β`, `γ`).
pub fn build_dl_structure(theory: &DefaultTheory, basis: &Basis) -> Result<RelationalStructure> {
    let mut b = Builder::new(StructureKind::Dl, basis);
    for f in &theory.w {
        let id = b.formula(f)?;
        b.rel(REPR, vec![id]);
        b.rel(KB, vec![id]);
    }
    let mut parts = Vec::with_capacity(theory.d.len());
    for rule in &theory.d {
        let alpha = b.formula(&rule.prerequisite)?;
        let beta = b.formula(&rule.justification)?;
        let neg_beta = b.negation(beta, &rule.justification);
        let gamma = b.formula(&rule.conclusion)?;
        for id in [alpha, beta, neg_beta, gamma] {
            b.rel(REPR, vec![id]);
        }
        parts.push((alpha, beta, gamma));
    }
    for (i, (rule, (alpha, beta, gamma))) in theory.d.iter().zip(parts).enumerate() {
        let d = b.push(ElementKind::Default { index: i }, format!("d{}: {rule}", i + 1));
        b.rel(DEFAULT, vec![d]);
        b.rel(PREM, vec![alpha, d]);
        b.rel(JUST, vec![beta, d]);
        b.rel(CONCL, vec![gamma, d]);
    }
    Ok(b.finish())
}

/// `A_Σ`: subformulas of `Σ ∪ {¬Lφ | Lφ ∈ SF(Σ)}`; each `¬Lφ` follows its `Lφ`.
pub fn build_ael_structure(sigma: &AeTheory, basis: &Basis) -> Result<RelationalStructure> {
    let mut b = Builder::new(StructureKind::Ae, basis);
    for f in &sigma.sigma {
        let id = b.formula(f)?;
        b.rel(REPR, vec![id]);
    }
    Ok(b.finish())
}

/// One vertex per element (element `i` is vertex `i + 1`), one edge per pair
/// of distinct elements sharing a tuple.
pub fn gaifman_graph(s: &RelationalStructure) -> Graph {
    let mut g = Graph::new(s.len());
    for tuples in s.relations.values() {
        for t in tuples {
            for (i, &x) in t.iter().enumerate() {
                for &y in &t[i + 1..] {
                    if x != y {
                        g.add_edge(x + 1, y + 1).expect("tuple elements are in the universe");
                    }
                }
            }
        }
    }
    g.set_descriptions(s.descriptions())
        .expect("one description per element");
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{parse_default_theory, DefaultRule};
    use crate::formula::{parse_formula, Mode};

    fn f(s: &str) -> Formula {
        parse_formula(s, Mode::Prop, &Basis::default()).unwrap()
    }

    fn ae(s: &str) -> Formula {
        parse_formula(s, Mode::Ae, &Basis::default()).unwrap()
    }

    fn descs(s: &RelationalStructure, rel: &str) -> Vec<String> {
        s.members(rel)
            .into_iter()
            .map(|i| s.elements()[i].description.clone())
            .collect()
    }

    fn universe(s: &RelationalStructure) -> Vec<String> {
        s.descriptions()
    }

    #[test]
    fn prop_structure_of_disjunction() {
        let s = build_prop_structure(&[f("p | q")], &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["p", "q", "p | q"]);
        assert_eq!(descs(&s, VAR), vec!["p", "q"]);
        assert_eq!(descs(&s, REPR), vec!["p | q"]);
        assert!(s.holds("conn_or_1", &[0, 2]));
        assert!(s.holds("conn_or_2", &[1, 2]));
        assert_eq!(s.tuples("conn_or_1").count(), 1);
        s.validate().unwrap();
    }

    #[test]
    fn prop_structure_empty() {
        let s = build_prop_structure(&[], &Basis::default()).unwrap();
        assert!(s.is_empty());
        assert!(s.vocabulary().relations().iter().all(|(r, _)| s.tuples(r).count() == 0));
    }

    #[test]
    fn prop_structure_shares_subformulas() {
        let s = build_prop_structure(&[f("p"), f("!p")], &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["p", "!p"]);
        assert_eq!(descs(&s, REPR), vec!["p", "!p"]);
        assert!(s.holds("conn_not_1", &[0, 1]));
    }

    #[test]
    fn prop_structure_rejects_beliefs_and_foreign_connectives() {
        assert_eq!(
            build_prop_structure(&[ae("L p")], &Basis::default()),
            Err(Error::BeliefInPropositional)
        );
        let basis = Basis::parse("or").unwrap();
        assert!(build_prop_structure(&[f("p & q")], &basis).is_err());
    }

    #[test]
    fn imp_structure_maximal_sharing() {
        let s = build_imp_structure(&[f("p")], &[f("p")], &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["p"]);
        for r in [REPR_PREM, REPR_CONC, REPR, VAR] {
            assert_eq!(s.members(r), vec![0], "{r}");
        }
    }

    #[test]
    fn imp_structure_marks_sides() {
        let s = build_imp_structure(&[f("p -> q")], &[f("q")], &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["p", "q", "p -> q"]);
        assert_eq!(descs(&s, REPR_PREM), vec!["p -> q"]);
        assert_eq!(descs(&s, REPR_CONC), vec!["q"]);
        let empty = build_imp_structure(&[], &[], &Basis::default()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn dl_structure_single_rule() {
        let theory = parse_default_theory("d: T ; p ; q", &Basis::default()).unwrap();
        let s = build_dl_structure(&theory, &Basis::default()).unwrap();
        assert_eq!(universe(&s)[..4], ["T", "p", "!p", "q"]);
        assert!(s.elements()[4].description.starts_with("d1"));
        assert_eq!(s.members(DEFAULT), vec![4]);
        assert!(s.holds(PREM, &[0, 4]));
        assert!(s.holds(JUST, &[1, 4]));
        assert!(s.holds(CONCL, &[3, 4]));
        assert!(s.holds("conn_not_1", &[1, 2]));
        s.validate().unwrap();
    }

    #[test]
    fn dl_structure_knowledge_base_only() {
        let theory = DefaultTheory {
            w: vec![f("r")],
            d: vec![],
        };
        let s = build_dl_structure(&theory, &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["r"]);
        assert_eq!(s.members(KB), vec![0]);
    }

    #[test]
    fn dl_structure_gaifman_star() {
        let theory = DefaultTheory {
            w: vec![],
            d: vec![DefaultRule::new(f("x1"), f("y1"), f("F"))],
        };
        let s = build_dl_structure(&theory, &Basis::default()).unwrap();
        assert_eq!(universe(&s)[..4], ["x1", "y1", "!y1", "F"]);
        let g = gaifman_graph(&s);
        // x1=1, y1=2, !y1=3, F=4, d1=5
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 5), (2, 3), (2, 5), (4, 5)]);
    }

    #[test]
    fn dl_structure_uses_negation_outside_basis() {
        let basis = Basis::parse("or,false").unwrap();
        let theory = DefaultTheory {
            w: vec![],
            d: vec![DefaultRule::new(f("x"), f("y"), f("F"))],
        };
        let s = build_dl_structure(&theory, &basis).unwrap();
        assert!(s.vocabulary().arity("conn_not_1").is_some());
        assert!(s.element_of(&f("!y")).is_some());
    }

    #[test]
    fn ael_structure_adds_negated_beliefs() {
        let s = build_ael_structure(&AeTheory::new(vec![ae("L p -> p")]), &Basis::default()).unwrap();
        assert_eq!(universe(&s), vec!["p", "L p", "!L p", "L p -> p"]);
        assert_eq!(descs(&s, BELIEF), vec!["L p"]);
        assert_eq!(descs(&s, REPR), vec!["L p -> p"]);
        assert!(s.holds(BELIEF_ARG, &[0, 1]));
        s.validate().unwrap();
        let empty = build_ael_structure(&AeTheory::new(vec![]), &Basis::default()).unwrap();
        assert!(empty.is_empty());
        let plain = build_ael_structure(&AeTheory::new(vec![ae("x1 | x2")]), &Basis::default()).unwrap();
        assert_eq!(universe(&plain), vec!["x1", "x2", "x1 | x2"]);
        assert!(plain.members(BELIEF).is_empty());
    }

    #[test]
    fn gaifman_of_disjunction_is_path() {
        let s = build_prop_structure(&[f("p | q")], &Basis::default()).unwrap();
        let g = gaifman_graph(&s);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 3), (2, 3)]);
        let empty = build_prop_structure(&[], &Basis::default()).unwrap();
        assert_eq!(gaifman_graph(&empty).n(), 0);
    }

    #[test]
    fn gaifman_invariant_under_permutation() {
        let s = build_prop_structure(&[f("(p | q) & !r"), f("r -> p")], &Basis::default()).unwrap();
        let g = gaifman_graph(&s);
        let n = s.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let h = gaifman_graph(&s.permuted(&perm));
        let mapped: BTreeSet<(usize, usize)> = h
            .edges()
            .map(|(u, v)| {
                let (a, b) = (perm[u - 1] + 1, perm[v - 1] + 1);
                (a.min(b), a.max(b))
            })
            .collect();
        assert_eq!(mapped, g.edges().collect());
    }

    #[test]
    fn literal_defaults_have_degree_three_and_no_triangles() {
        let text = "d: x1 ; !x2 ; x3\nd: !x1 ; x2 ; !x3\nd: x2 ; x3 ; x1";
        let theory = parse_default_theory(text, &Basis::default()).unwrap();
        let s = build_dl_structure(&theory, &Basis::default()).unwrap();
        let g = gaifman_graph(&s);
        let adj = g.adjacency();
        for d in s.members(DEFAULT) {
            assert_eq!(adj[d + 1].len(), 3);
        }
        for (u, v) in g.edges() {
            for &w in &adj[u] {
                assert!(!(w != v && g.has_edge(v, w)), "triangle {u} {v} {w}");
            }
        }
    }
}
