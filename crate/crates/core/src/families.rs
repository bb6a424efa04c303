//! Generators for pseudo-cliques and the lower-bound instance families, and
//! a syntactic linter for the restricted instance classes.
//!
//! Hardness results are stated for classes of instances; the concrete
//! members generated here are representative choices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::ael::AeTheory;
use crate::dl::{DefaultRule, DefaultTheory};
use crate::error::{Error, Result};
use crate::formula::{Connective, Formula};
use crate::structures::{Graph, VertexLabel};

/// Main-node count and the edge-node path length of every pair `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoCliqueSpec {
    pub n: usize,
    pub lengths: BTreeMap<(usize, usize), usize>,
}

impl PseudoCliqueSpec {
    /// Exact cardinality `k`: every pair gets `k` edge-nodes.
    pub fn exact(n: usize, k: usize) -> PseudoCliqueSpec {
        PseudoCliqueSpec {
            n,
            lengths: pairs(n).map(|p| (p, k)).collect(),
        }
    }

    /// Independent lengths in `0..=k` per pair.
    pub fn random(n: usize, k: usize, rng: &mut impl Rng) -> PseudoCliqueSpec {
        PseudoCliqueSpec {
            n,
            lengths: pairs(n).map(|p| (p, rng.gen_range(0..=k))).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.lengths.values().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Invalid(format!("pseudo-clique needs n >= 2, got {}", self.n)));
        }
        if self.lengths.keys().ne(pairs(self.n).collect::<Vec<_>>().iter()) {
            return Err(Error::Invalid("one length per pair i < j is required".into()));
        }
        Ok(())
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
}

/// Main-nodes are `1..=n`; edge-nodes follow in `(i, j, r)` order. Vertices
/// carry `main`/`edge` labels and descriptions `i` or `d{r}_{i},{j}`.
pub fn gen_pseudo_clique(spec: &PseudoCliqueSpec) -> Graph {
    let total = spec.n + spec.lengths.values().sum::<usize>();
    let mut g = Graph::new(total);
    let mut labels = vec![VertexLabel::Main; spec.n];
    let mut descriptions: Vec<String> = (1..=spec.n).map(|i| i.to_string()).collect();
    let mut next = spec.n + 1;
    for (&(i, j), &k) in &spec.lengths {
        let mut prev = i;
        for r in 1..=k {
            g.add_edge(prev, next).expect("fresh vertex");
            labels.push(VertexLabel::Edge);
            descriptions.push(format!("d{r}_{i},{j}"));
            prev = next;
            next += 1;
        }
        g.add_edge(prev, j).expect("main-node in range");
    }
    g.set_labels(labels).expect("one label per vertex");
    g.set_descriptions(descriptions).expect("one description per vertex");
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DlVariant {
    /// `x_i : y_j / ⊥` for `1 ≤ i ≤ j ≤ n`.
    Printed,
    /// `x_i : x_j / ⊥` for `1 ≤ i ≤ j ≤ n`.
    Symmetric,
}

impl FromStr for DlVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<DlVariant> {
        match s {
            "printed" => Ok(DlVariant::Printed),
            "symmetric" => Ok(DlVariant::Symmetric),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

fn x(i: usize) -> Formula {
    Formula::var(format!("x{i}"))
}

pub fn gen_dl_lower(n: usize, variant: DlVariant) -> DefaultTheory {
    let mut d = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            let just = match variant {
                DlVariant::Printed => Formula::var(format!("y{j}")),
                DlVariant::Symmetric => x(j),
            };
            d.push(DefaultRule::new(x(i), just, Formula::constant(false)));
        }
    }
    DefaultTheory::new(Vec::new(), d)
}

/// `{x_i ∨ x_j | 1 ≤ i ≤ j ≤ k}`, including the `i = j` formulas.
pub fn gen_ael_lower(k: usize) -> AeTheory {
    let mut sigma = Vec::new();
    for i in 1..=k {
        for j in i..=k {
            sigma.push(Formula::or(x(i), x(j)));
        }
    }
    AeTheory::new(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpKind {
    Xor3,
    CnfDnf,
}

impl FromStr for ImpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ImpKind> {
        match s {
            "xor3" => Ok(ImpKind::Xor3),
            "cnf_dnf" | "cnf-dnf" => Ok(ImpKind::CnfDnf),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// A representative implication instance of the given class.
///
/// `xor3`: `F = {X3(x_i, x_{i+1}, x_{i+2})}`, `G = {X3(x_1, x_2, x_n)}`.
/// `cnf_dnf`: `F = {x_i ∨ x_j | i ≤ j}`, `G = {⋁_i (x_i ∧ x_{i+1})}`.
pub fn gen_imp_lower(kind: ImpKind, n: usize) -> (Vec<Formula>, Vec<Formula>) {
    match kind {
        ImpKind::Xor3 => {
            let f = (1..=n.saturating_sub(2))
                .map(|i| Formula::xor3(x(i), x(i + 1), x(i + 2)))
                .collect();
            let g = vec![Formula::xor3(x(1), x(2), x(n))];
            (f, g)
        }
        ImpKind::CnfDnf => {
            let mut f = Vec::new();
            for i in 1..=n {
                for j in i..=n {
                    f.push(Formula::or(x(i), x(j)));
                }
            }
            let dnf = (1..n)
                .map(|i| Formula::and(x(i), x(i + 1)))
                .reduce(Formula::or)
                .unwrap_or_else(|| x(1));
            (f, vec![dnf])
        }
    }
}

/// Restricted instance classes on which the problems stay hard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceClass {
    /// `W = ∅`, every default part a literal (or a constant).
    DlLiterals,
    /// `W` at most one proposition, every default part a proposition or `⊥`.
    DlPropsFalse,
    /// Every formula a disjunction of propositions or `L`-prefixed propositions.
    AeDisjunctions,
    /// Every formula built from `X3` only.
    ImpXor3,
    /// Premises in monotone 2-CNF, conclusions in DNF.
    ImpCnfDnf,
}

impl InstanceClass {
    pub const ALL: [InstanceClass; 5] = [
        InstanceClass::DlLiterals,
        InstanceClass::DlPropsFalse,
        InstanceClass::AeDisjunctions,
        InstanceClass::ImpXor3,
        InstanceClass::ImpCnfDnf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceClass::DlLiterals => "dl-literals",
            InstanceClass::DlPropsFalse => "dl-props-false",
            InstanceClass::AeDisjunctions => "ae-disjunctions",
            InstanceClass::ImpXor3 => "imp-xor3",
            InstanceClass::ImpCnfDnf => "imp-cnf-dnf",
        }
    }
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<InstanceClass> {
        InstanceClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

pub enum Instance<'a> {
    Dl(&'a DefaultTheory),
    Ae(&'a AeTheory),
    Imp(&'a [Formula], &'a [Formula]),
}

fn is_literal(f: &Formula) -> bool {
    match f {
        Formula::Var(_) => true,
        Formula::App(Connective::Not, args) => matches!(args[0], Formula::Var(_)),
        _ => false,
    }
}

/// Flattens nested applications of `c`.
fn operands(f: &Formula, c: Connective) -> Vec<&Formula> {
    match f {
        Formula::App(op, args) if *op == c => args.iter().flat_map(|a| operands(a, c)).collect(),
        _ => vec![f],
    }
}

fn xor3_only(f: &Formula) -> bool {
    match f {
        Formula::Var(_) => true,
        Formula::App(Connective::Xor3, args) => args.iter().all(xor3_only),
        _ => false,
    }
}

fn monotone_2cnf(f: &Formula) -> bool {
    operands(f, Connective::And).into_iter().all(|clause| {
        let lits = operands(clause, Connective::Or);
        lits.len() <= 2 && lits.iter().all(|l| matches!(l, Formula::Var(_)))
    })
}

fn dnf(f: &Formula) -> bool {
    operands(f, Connective::Or)
        .into_iter()
        .all(|term| operands(term, Connective::And).into_iter().all(is_literal))
}

/// `None` if the instance belongs to `class`, else the first offending part.
pub fn check_class(instance: &Instance<'_>, class: InstanceClass) -> Result<Option<String>> {
    let first = |fs: &mut dyn Iterator<Item = &Formula>, ok: &dyn Fn(&Formula) -> bool, what: &str| {
        for f in fs {
            if !ok(f) {
                return Some(format!("`{f}` is not {what}"));
            }
        }
        None
    };
    let verdict = match (class, instance) {
        (InstanceClass::DlLiterals, Instance::Dl(t)) => {
            if !t.w.is_empty() {
                Some("knowledge base is not empty".to_string())
            } else {
                let ok = |f: &Formula| is_literal(f) || matches!(f, Formula::Const(_));
                first(&mut t.d.iter().flat_map(|r| r.parts()), &ok, "a literal")
            }
        }
        (InstanceClass::DlPropsFalse, Instance::Dl(t)) => {
            if t.w.len() > 1 {
                Some(format!("knowledge base has {} formulas", t.w.len()))
            } else {
                let prop = |f: &Formula| matches!(f, Formula::Var(_));
                let part = |f: &Formula| prop(f) || *f == Formula::Const(false);
                first(&mut t.w.iter(), &prop, "a proposition")
                    .or_else(|| first(&mut t.d.iter().flat_map(|r| r.parts()), &part, "a proposition or F"))
            }
        }
        (InstanceClass::AeDisjunctions, Instance::Ae(s)) => {
            let ok = |f: &Formula| {
                operands(f, Connective::Or).into_iter().all(|d| match d {
                    Formula::Var(_) => true,
                    Formula::Believes(inner) => matches!(**inner, Formula::Var(_)),
                    _ => false,
                })
            };
            first(&mut s.sigma.iter(), &ok, "a disjunction of (L-prefixed) propositions")
        }
        (InstanceClass::ImpXor3, Instance::Imp(f, g)) => {
            first(&mut f.iter().chain(g.iter()), &xor3_only, "built from X3 only")
        }
        (InstanceClass::ImpCnfDnf, Instance::Imp(f, g)) => {
            first(&mut f.iter(), &monotone_2cnf, "in monotone 2-CNF").or_else(|| first(&mut g.iter(), &dnf, "in DNF"))
        }
        _ => {
            return Err(Error::Invalid(format!(
                "class {class} does not apply to this kind of instance"
            )))
        }
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::parse_default_theory;
    use crate::formula::Basis;
    use crate::treewidth::is_pseudo_clique;

    #[test]
    fn pseudo_clique_shapes() {
        let p = gen_pseudo_clique(&PseudoCliqueSpec::exact(2, 1));
        assert_eq!((p.n(), p.edge_count()), (3, 2));
        assert_eq!(p.labelled(VertexLabel::Main), vec![1, 2]);
        let fig = gen_pseudo_clique(&PseudoCliqueSpec::exact(4, 3));
        assert_eq!(fig.n(), 22);
        assert_eq!(fig.description(5), Some("d1_1,2"));
        let tri = gen_pseudo_clique(&PseudoCliqueSpec::exact(3, 0));
        assert_eq!(
            tri.edges().collect::<Vec<_>>(),
            Graph::complete(3).edges().collect::<Vec<_>>()
        );
    }

    #[test]
    fn generated_pseudo_cliques_are_recognised() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.gen_range(2..=6);
            let spec = PseudoCliqueSpec::random(n, 3, &mut rng);
            spec.validate().unwrap();
            let g = gen_pseudo_clique(&spec);
            assert!(is_pseudo_clique(&g, &(1..=n).collect()));
        }
        assert!(PseudoCliqueSpec::exact(1, 2).validate().is_err());
    }

    #[test]
    fn dl_lower_printed() {
        let t = gen_dl_lower(2, DlVariant::Printed);
        let expected =
            parse_default_theory("d: x1 ; y1 ; F\nd: x1 ; y2 ; F\nd: x2 ; y2 ; F", &Basis::default()).unwrap();
        assert_eq!(t, expected);
        assert_eq!(check_class(&Instance::Dl(&t), InstanceClass::DlLiterals).unwrap(), None);
        assert_eq!(
            check_class(&Instance::Dl(&t), InstanceClass::DlPropsFalse).unwrap(),
            None
        );
        let sym = gen_dl_lower(3, DlVariant::Symmetric);
        assert_eq!(sym.d.len(), 6);
        assert_eq!(sym.d[1].to_string(), "x1 : x2 / F");
    }

    #[test]
    fn ael_lower() {
        let s = gen_ael_lower(2);
        let shown: Vec<String> = s.sigma.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, vec!["x1 | x1", "x1 | x2", "x2 | x2"]);
        assert_eq!(
            check_class(&Instance::Ae(&s), InstanceClass::AeDisjunctions).unwrap(),
            None
        );
    }

    #[test]
    fn imp_lower() {
        let (f, g) = gen_imp_lower(ImpKind::CnfDnf, 3);
        assert_eq!(f.len(), 6);
        assert!(f
            .iter()
            .all(|c| matches!(c, Formula::App(Connective::Or, a) if a.iter().all(|v| matches!(v, Formula::Var(_))))));
        assert_eq!(
            check_class(&Instance::Imp(&f, &g), InstanceClass::ImpCnfDnf).unwrap(),
            None
        );
        let (f, g) = gen_imp_lower(ImpKind::Xor3, 4);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|c| c.root_connective() == Some(Connective::Xor3)));
        assert_eq!(
            check_class(&Instance::Imp(&f, &g), InstanceClass::ImpXor3).unwrap(),
            None
        );
        assert!(check_class(&Instance::Imp(&f, &g), InstanceClass::ImpCnfDnf)
            .unwrap()
            .is_some());
    }

    #[test]
    fn linter_rejects() {
        let t = parse_default_theory("w: p\nd: p & q ; r ; s", &Basis::default()).unwrap();
        assert!(check_class(&Instance::Dl(&t), InstanceClass::DlLiterals)
            .unwrap()
            .is_some());
        assert!(check_class(&Instance::Dl(&t), InstanceClass::DlPropsFalse)
            .unwrap()
            .is_some());
        assert!(check_class(&Instance::Dl(&t), InstanceClass::ImpXor3).is_err());
        let s = AeTheory::new(vec![Formula::or(
            Formula::var("p"),
            Formula::believes(Formula::not(Formula::var("q"))),
        )]);
        assert!(check_class(&Instance::Ae(&s), InstanceClass::AeDisjunctions)
            .unwrap()
            .is_some());
        assert_eq!("imp-xor3".parse::<InstanceClass>().unwrap(), InstanceClass::ImpXor3);
    }
}
