//! Propositional and autoepistemic formulas over an explicit connective basis.

mod circuit;
mod oracle;
mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circuit::{Circuit, Gate};
pub use oracle::{implies_bruteforce, sat_bruteforce};
pub use parse::{parse_formula, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    Not,
    And,
    Or,
    Imp,
    Iff,
    Xor,
    Xor3,
    True,
    False,
}

impl Connective {
    pub const ALL: [Connective; 9] = [
        Connective::Not,
        Connective::And,
        Connective::Or,
        Connective::Imp,
        Connective::Iff,
        Connective::Xor,
        Connective::Xor3,
        Connective::True,
        Connective::False,
    ];

    pub fn arity(self) -> usize {
        match self {
            Connective::True | Connective::False => 0,
            Connective::Not => 1,
            Connective::Xor3 => 3,
            _ => 2,
        }
    }

    /// Name used in relation symbols and basis lists.
    pub fn name(self) -> &'static str {
        match self {
            Connective::Not => "not",
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Imp => "imp",
            Connective::Iff => "iff",
            Connective::Xor => "xor",
            Connective::Xor3 => "xor3",
            Connective::True => "true",
            Connective::False => "false",
        }
    }

    pub fn from_name(name: &str) -> Option<Connective> {
        Connective::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn apply(self, args: &[bool]) -> bool {
        debug_assert_eq!(args.len(), self.arity());
        match self {
            Connective::Not => !args[0],
            Connective::And => args[0] && args[1],
            Connective::Or => args[0] || args[1],
            Connective::Imp => !args[0] || args[1],
            Connective::Iff => args[0] == args[1],
            Connective::Xor => args[0] ^ args[1],
            Connective::Xor3 => args[0] ^ args[1] ^ args[2],
            Connective::True => true,
            Connective::False => false,
        }
    }

    /// Same as [`Connective::apply`] on 64 assignments at once.
    pub fn apply_words(self, args: &[u64]) -> u64 {
        match self {
            Connective::Not => !args[0],
            Connective::And => args[0] & args[1],
            Connective::Or => args[0] | args[1],
            Connective::Imp => !args[0] | args[1],
            Connective::Iff => !(args[0] ^ args[1]),
            Connective::Xor => args[0] ^ args[1],
            Connective::Xor3 => args[0] ^ args[1] ^ args[2],
            Connective::True => !0,
            Connective::False => 0,
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite, nonempty set of connectives that formulas may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    connectives: BTreeSet<Connective>,
}

impl Default for Basis {
    fn default() -> Self {
        Basis {
            connectives: Connective::ALL.into_iter().collect(),
        }
    }
}

impl Basis {
    pub fn new(connectives: impl IntoIterator<Item = Connective>) -> Result<Basis> {
        let connectives: BTreeSet<_> = connectives.into_iter().collect();
        if connectives.is_empty() {
            return Err(Error::Invalid("basis must not be empty".into()));
        }
        Ok(Basis { connectives })
    }

    /// Parses a comma separated list of connective names, e.g. `not,and,or`.
    pub fn parse(list: &str) -> Result<Basis> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(Connective::from_name(name).ok_or_else(|| Error::UnknownName(name.to_string()))?);
        }
        Basis::new(out)
    }

    pub fn contains(&self, c: Connective) -> bool {
        self.connectives.contains(&c)
    }

    pub fn with(&self, c: Connective) -> Basis {
        let mut b = self.clone();
        b.connectives.insert(c);
        b
    }

    pub fn iter(&self) -> impl Iterator<Item = Connective> + '_ {
        self.connectives.iter().copied()
    }

    pub fn max_arity(&self) -> usize {
        self.iter().map(Connective::arity).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Var(String),
    Const(bool),
    App(Connective, Vec<Formula>),
    Believes(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn constant(value: bool) -> Formula {
        Formula::Const(value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::App(Connective::Not, vec![f])
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::App(Connective::And, vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::App(Connective::Or, vec![a, b])
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::App(Connective::Imp, vec![a, b])
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::App(Connective::Iff, vec![a, b])
    }

    pub fn xor(a: Formula, b: Formula) -> Formula {
        Formula::App(Connective::Xor, vec![a, b])
    }

    pub fn xor3(a: Formula, b: Formula, c: Formula) -> Formula {
        Formula::App(Connective::Xor3, vec![a, b, c])
    }

    pub fn believes(f: Formula) -> Formula {
        Formula::Believes(Box::new(f))
    }

    /// The connective at the root, with constants mapped to the 0-ary connectives.
    pub fn root_connective(&self) -> Option<Connective> {
        match self {
            Formula::App(c, _) => Some(*c),
            Formula::Const(true) => Some(Connective::True),
            Formula::Const(false) => Some(Connective::False),
            _ => None,
        }
    }

    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::App(_, args) => args,
            Formula::Believes(inner) => std::slice::from_ref(inner),
            _ => &[],
        }
    }

    pub fn is_autoepistemic(&self) -> bool {
        match self {
            Formula::Believes(_) => true,
            Formula::App(_, args) => args.iter().any(Formula::is_autoepistemic),
            _ => false,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Formula::node_count).sum::<usize>()
    }

    /// Fails if some connective is outside `basis`.
    pub fn check_basis(&self, basis: &Basis) -> Result<()> {
        if let Some(c) = self.root_connective() {
            if !basis.contains(c) {
                return Err(Error::ConnectiveNotInBasis(c.name().to_string()));
            }
        }
        self.children().iter().try_for_each(|c| c.check_basis(basis))
    }

    /// Variables and maximal `L`-subformulas; the latter are opaque.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Var(v) => {
                out.insert(Atom::Var(v.clone()));
            }
            Formula::Const(_) => {}
            Formula::App(_, args) => args.iter().for_each(|a| a.collect_atoms(out)),
            Formula::Believes(_) => {
                out.insert(Atom::Belief(self.clone()));
            }
        }
    }

    /// All subtrees, deduplicated, in post-order of first occurrence.
    pub fn subformulae(&self) -> Vec<Formula> {
        let mut seen = IndexSet::new();
        self.collect_subformulae(&mut seen);
        seen.into_iter().collect()
    }

    pub(crate) fn collect_subformulae(&self, seen: &mut IndexSet<Formula>) {
        if seen.contains(self) {
            return;
        }
        for c in self.children() {
            c.collect_subformulae(seen);
        }
        seen.insert(self.clone());
    }

    /// The `L`-rooted subformulas, in [`Formula::subformulae`] order.
    pub fn belief_subformulae(&self) -> Vec<Formula> {
        self.subformulae()
            .into_iter()
            .filter(|f| matches!(f, Formula::Believes(_)))
            .collect()
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        match self {
            Formula::Var(v) => assignment
                .get(&Atom::Var(v.clone()))
                .copied()
                .ok_or_else(|| Error::MissingAtom(v.clone())),
            Formula::Const(b) => Ok(*b),
            Formula::Believes(_) => {
                let atom = Atom::Belief(self.clone());
                assignment
                    .get(&atom)
                    .copied()
                    .ok_or_else(|| Error::MissingAtom(atom.to_string()))
            }
            Formula::App(c, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(a.evaluate(assignment)?);
                }
                Ok(c.apply(&vals))
            }
        }
    }
}

/// Subformulas of a set of formulas, deduplicated across the whole set.
pub fn subformulae_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Vec<Formula> {
    let mut seen = IndexSet::new();
    for f in formulas {
        f.collect_subformulae(&mut seen);
    }
    seen.into_iter().collect()
}

/// Atoms of a set of formulas.
pub fn atoms_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for f in formulas {
        f.collect_atoms(&mut out);
    }
    out
}

/// An evaluation atom: a variable, or an `L`-subformula treated as a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Var(String),
    Belief(Formula),
}

impl Atom {
    fn sort_key(&self) -> String {
        self.to_string()
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| match (self, other) {
                (Atom::Var(a), Atom::Var(b)) => a.cmp(b),
                (Atom::Belief(a), Atom::Belief(b)) => a.cmp(b),
                (Atom::Var(_), Atom::Belief(_)) => Ordering::Less,
                (Atom::Belief(_), Atom::Var(_)) => Ordering::Greater,
            })
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => f.write_str(v),
            Atom::Belief(b) => write!(f, "{b}"),
        }
    }
}

pub type Assignment = BTreeMap<Atom, bool>;

// Printing precedence, loosest first.
const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_XOR: u8 = 4;
const PREC_AND: u8 = 5;
const PREC_UNARY: u8 = 6;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::App(Connective::Iff, _) => PREC_IFF,
        Formula::App(Connective::Imp, _) => PREC_IMP,
        Formula::App(Connective::Or, _) => PREC_OR,
        Formula::App(Connective::Xor, _) => PREC_XOR,
        Formula::App(Connective::And, _) => PREC_AND,
        Formula::App(Connective::Not, _) | Formula::Believes(_) => PREC_UNARY,
        _ => u8::MAX,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, need_parens: bool) -> fmt::Result {
    if need_parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(v) => f.write_str(v),
            Formula::Const(true) => f.write_str("T"),
            Formula::Const(false) => f.write_str("F"),
            Formula::Believes(inner) => {
                f.write_str("L ")?;
                write_child(f, inner, precedence(inner) < PREC_UNARY)
            }
            Formula::App(Connective::Not, args) => {
                f.write_str("!")?;
                write_child(f, &args[0], precedence(&args[0]) < PREC_UNARY)
            }
            Formula::App(Connective::Xor3, args) => {
                write!(f, "X3({}, {}, {})", args[0], args[1], args[2])
            }
            Formula::App(Connective::True, _) => f.write_str("T"),
            Formula::App(Connective::False, _) => f.write_str("F"),
            Formula::App(c, args) => {
                let p = precedence(self);
                let sym = match c {
                    Connective::And => "&",
                    Connective::Or => "|",
                    Connective::Xor => "^",
                    Connective::Imp => "->",
                    Connective::Iff => "<->",
                    _ => unreachable!(),
                };
                // `->` associates to the right, everything else to the left.
                let (left_paren, right_paren) = if *c == Connective::Imp {
                    (precedence(&args[0]) <= p, precedence(&args[1]) < p)
                } else {
                    (precedence(&args[0]) < p, precedence(&args[1]) <= p)
                };
                write_child(f, &args[0], left_paren)?;
                write!(f, " {sym} ")?;
                write_child(f, &args[1], right_paren)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }

    fn assign(pairs: &[(&str, bool)]) -> Assignment {
        pairs.iter().map(|(a, v)| (Atom::Var(a.to_string()), *v)).collect()
    }

    #[test]
    fn evaluate_contradiction() {
        let f = Formula::and(p(), Formula::not(p()));
        assert!(!f.evaluate(&assign(&[("p", true)])).unwrap());
    }

    #[test]
    fn evaluate_belief_atomically() {
        let lp = Formula::believes(p());
        let f = Formula::imp(lp.clone(), p());
        let mut a = assign(&[("p", false)]);
        a.insert(Atom::Belief(lp), false);
        assert!(f.evaluate(&a).unwrap());
    }

    #[test]
    fn evaluate_parity() {
        let f = Formula::xor3(Formula::var("x"), Formula::var("y"), Formula::var("z"));
        let a = assign(&[("x", true), ("y", true), ("z", false)]);
        assert!(!f.evaluate(&a).unwrap());
    }

    #[test]
    fn evaluate_missing_atom() {
        let f = Formula::or(p(), q());
        assert_eq!(
            f.evaluate(&assign(&[("p", false)])),
            Err(Error::MissingAtom("q".into()))
        );
    }

    #[test]
    fn subformulae_dedup() {
        let f = Formula::and(p(), p());
        assert_eq!(f.subformulae(), vec![p(), f.clone()]);
    }

    #[test]
    fn subformulae_with_beliefs() {
        let lp = Formula::believes(p());
        let f = Formula::imp(lp.clone(), p());
        assert_eq!(f.subformulae(), vec![p(), lp.clone(), f.clone()]);
        assert_eq!(f.belief_subformulae(), vec![lp]);
    }

    #[test]
    fn subformulae_parity() {
        let (x, y, z) = (Formula::var("x"), Formula::var("y"), Formula::var("z"));
        let inner = Formula::xor3(x.clone(), y.clone(), z.clone());
        let f = Formula::not(inner.clone());
        assert_eq!(f.subformulae(), vec![x, y, z, inner, f.clone()]);
    }

    #[test]
    fn atoms_treat_beliefs_opaquely() {
        let f = Formula::imp(Formula::believes(Formula::and(p(), q())), p());
        let atoms: Vec<String> = f.atoms().iter().map(|a| a.to_string()).collect();
        assert_eq!(atoms, vec!["L (p & q)", "p"]);
    }

    #[test]
    fn basis_check() {
        let basis = Basis::parse("or,not").unwrap();
        assert!(Formula::or(p(), Formula::not(q())).check_basis(&basis).is_ok());
        assert_eq!(
            Formula::and(p(), q()).check_basis(&basis),
            Err(Error::ConnectiveNotInBasis("and".into()))
        );
        assert!(Basis::parse("").is_err());
        assert!(Basis::parse("nand").is_err());
    }

    #[test]
    fn display_minimal_parens() {
        let f = Formula::imp(Formula::imp(p(), q()), p());
        assert_eq!(f.to_string(), "(p -> q) -> p");
        let g = Formula::imp(p(), Formula::imp(q(), p()));
        assert_eq!(g.to_string(), "p -> q -> p");
        let h = Formula::and(p(), Formula::and(q(), p()));
        assert_eq!(h.to_string(), "p & (q & p)");
        let k = Formula::not(Formula::or(p(), q()));
        assert_eq!(k.to_string(), "!(p | q)");
    }
}
