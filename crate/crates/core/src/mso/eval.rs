//! Model checking by exhaustive quantifier expansion.
//!
//! The checker is exponential, but several sound rewrites keep the
//! extension and expansion encodings inside desk scale:
//!
//! * quantifiers are pushed inward over `&`, `|` and `->` (miniscoping);
//! * an element quantifier whose body is guarded by a relation atom on its
//!   variable only ranges over elements that can satisfy that atom;
//! * a set quantifier only enumerates the elements whose membership the body
//!   can observe, and `E C. (A x. (x in C <-> ψ) & …)` computes `C` directly;
//! * conjuncts that mention only the quantified set (such as `θ_assign(M)`)
//!   are solved once per formula by backtracking with three-valued pruning,
//!   and the set quantifier then ranges over those solutions;
//! * set quantifiers and quantified subformulas mentioning sets are memoised
//!   on the values of their free variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;

use super::MsoFormula;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::structures::RelationalStructure;

/// Largest universe the checker accepts; sets are 64-bit masks.
const MAX_UNIVERSE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Element(usize),
    Set(BTreeSet<usize>),
}

/// Bindings for free variables; elements are 0-based universe indices.
pub type Env = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    pub steps: u64,
    pub memo_entries: usize,
    pub guard_families: usize,
}

/// `s ⊨ phi` under `env`, with default limits.
pub fn eval_mso(s: &RelationalStructure, phi: &MsoFormula, env: &Env) -> Result<bool> {
    eval_mso_with(s, phi, env, &Limits::default()).map(|(v, _)| v)
}

pub fn eval_mso_with(
    s: &RelationalStructure,
    phi: &MsoFormula,
    env: &Env,
    limits: &Limits,
) -> Result<(bool, EvalStats)> {
    let n = s.len();
    if n > MAX_UNIVERSE {
        return Err(Error::limit("MSO universe size", MAX_UNIVERSE, n));
    }
    let phi = miniscope(phi.clone(), n > 0);
    let program = Program::compile(s, &phi, env)?;
    let mut state = State::new(&program, env, limits);
    let value = state.eval(&program, program.root)?;
    let stats = EvalStats {
        steps: state.steps,
        memo_entries: state.memo.len(),
        guard_families: state.families.len(),
    };
    Ok((value, stats))
}

// ---------------------------------------------------------------------------
// Miniscoping

fn flat(items: Vec<MsoFormula>, conj: bool) -> MsoFormula {
    let mut out = Vec::with_capacity(items.len());
    for f in items {
        match f {
            MsoFormula::And(fs) if conj => out.extend(fs),
            MsoFormula::Or(fs) if !conj => out.extend(fs),
            MsoFormula::True if conj => {}
            MsoFormula::False if !conj => {}
            f => out.push(f),
        }
    }
    if conj {
        super::build::and(out)
    } else {
        super::build::or(out)
    }
}

fn quant(forall: bool, set: bool, v: String, body: MsoFormula) -> MsoFormula {
    let body = Box::new(body);
    match (forall, set) {
        (true, false) => MsoFormula::ForallFo(v, body),
        (false, false) => MsoFormula::ExistsFo(v, body),
        (true, true) => MsoFormula::ForallSo(v, body),
        (false, true) => MsoFormula::ExistsSo(v, body),
    }
}

fn push_forall(v: String, body: MsoFormula, set: bool, can_drop: bool) -> MsoFormula {
    if can_drop && !body.free_vars().contains(&v) {
        return body;
    }
    match body {
        MsoFormula::And(cs) => flat(
            cs.into_iter()
                .map(|c| push_forall(v.clone(), c, set, can_drop))
                .collect(),
            true,
        ),
        MsoFormula::Imp(a, b) if !a.free_vars().contains(&v) => {
            MsoFormula::Imp(a, Box::new(push_forall(v, *b, set, can_drop)))
        }
        body => quant(true, set, v, body),
    }
}

fn push_exists(v: String, body: MsoFormula, set: bool, can_drop: bool) -> MsoFormula {
    if can_drop && !body.free_vars().contains(&v) {
        return body;
    }
    match body {
        MsoFormula::Or(cs) => flat(
            cs.into_iter()
                .map(|c| push_exists(v.clone(), c, set, can_drop))
                .collect(),
            false,
        ),
        MsoFormula::And(cs) => {
            let (inside, mut outside): (Vec<_>, Vec<_>) = cs.into_iter().partition(|c| c.free_vars().contains(&v));
            if outside.is_empty() {
                quant(false, set, v, MsoFormula::And(inside))
            } else {
                outside.push(push_exists(v, flat(inside, true), set, can_drop));
                flat(outside, true)
            }
        }
        body => quant(false, set, v, body),
    }
}

/// Pushes quantifiers inward. Vacuous element quantifiers are dropped only
/// over a nonempty universe.
fn miniscope(f: MsoFormula, nonempty: bool) -> MsoFormula {
    use MsoFormula::*;
    let m = |g: Box<MsoFormula>| Box::new(miniscope(*g, nonempty));
    match f {
        Not(g) => Not(m(g)),
        And(fs) => flat(fs.into_iter().map(|g| miniscope(g, nonempty)).collect(), true),
        Or(fs) => flat(fs.into_iter().map(|g| miniscope(g, nonempty)).collect(), false),
        Imp(a, b) => Imp(m(a), m(b)),
        Iff(a, b) => Iff(m(a), m(b)),
        Xor(a, b) => Xor(m(a), m(b)),
        ForallFo(v, g) => push_forall(v, miniscope(*g, nonempty), false, nonempty),
        ExistsFo(v, g) => push_exists(v, miniscope(*g, nonempty), false, nonempty),
        ForallSo(v, g) => push_forall(v, miniscope(*g, nonempty), true, true),
        ExistsSo(v, g) => push_exists(v, miniscope(*g, nonempty), true, true),
        atom => atom,
    }
}

// ---------------------------------------------------------------------------
// Compilation

type NodeId = usize;

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Rel(usize, Vec<usize>),
    Eq(usize, usize),
    In(usize, usize),
    Not(NodeId),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    Imp(NodeId, NodeId),
    Iff(NodeId, NodeId),
    Xor(NodeId, NodeId),
    Fo { exists: bool, slot: usize, body: NodeId },
    So { exists: bool, slot: usize, body: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Element,
    Set,
}

/// Relation as bit masks; binary relations keep rows and columns.
#[derive(Debug, Clone)]
struct RelData {
    arity: usize,
    unary: u64,
    rows: Vec<u64>,
    cols: Vec<u64>,
    proj0: u64,
    proj1: u64,
    diag: u64,
}

#[derive(Debug, Clone, Copy)]
enum GArg {
    Me,
    Wild,
    Outer(usize),
}

#[derive(Debug, Clone)]
struct Guard {
    rel: usize,
    args: Vec<GArg>,
}

#[derive(Debug, Clone, Default)]
struct Info {
    free_fo: Vec<usize>,
    free_so: Vec<usize>,
    has_so: bool,
}

#[derive(Debug, Clone, Default)]
struct SoPlan {
    /// `(x, ψ, rest)` for `E X. (A x. (x in X <-> ψ) & rest)`.
    definition: Option<(usize, NodeId, Vec<NodeId>)>,
    /// Conjuncts constraining only this set, free of set quantifiers.
    guards: Vec<NodeId>,
    guard_key: String,
    static_support: u64,
    dynamic_support: Vec<usize>,
}

struct Program {
    nodes: Vec<Node>,
    end: Vec<usize>,
    info: Vec<Info>,
    guards: Vec<Vec<Guard>>,
    plans: Vec<SoPlan>,
    rels: Vec<RelData>,
    all: u64,
    root: NodeId,
    fo_slots: usize,
    so_names: Vec<String>,
    env_fo: Vec<(usize, usize)>,
    env_so: Vec<(usize, u64)>,
}

struct Compiler<'a> {
    s: &'a RelationalStructure,
    rel_index: HashMap<String, usize>,
    rels: Vec<RelData>,
    nodes: Vec<Node>,
    end: Vec<usize>,
    scope: Vec<(String, Sort, usize)>,
    fo_slots: usize,
    fo_binder: Vec<Option<NodeId>>,
    so_names: Vec<String>,
    so_binder: Vec<Option<NodeId>>,
}

impl Compiler<'_> {
    fn relation(&mut self, name: &str, args: usize) -> Result<usize> {
        let arity = self
            .s
            .vocabulary()
            .arity(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))?;
        if arity != args {
            return Err(Error::Invalid(format!(
                "relation `{name}` has arity {arity}, used with {args} arguments"
            )));
        }
        if let Some(&i) = self.rel_index.get(name) {
            return Ok(i);
        }
        let n = self.s.len();
        let mut data = RelData {
            arity,
            unary: 0,
            rows: vec![0; n],
            cols: vec![0; n],
            proj0: 0,
            proj1: 0,
            diag: 0,
        };
        for t in self.s.tuples(name) {
            match *t {
                [a] => data.unary |= 1 << a,
                [a, b] => {
                    data.rows[a] |= 1 << b;
                    data.cols[b] |= 1 << a;
                    data.proj0 |= 1 << a;
                    data.proj1 |= 1 << b;
                    if a == b {
                        data.diag |= 1 << a;
                    }
                }
                _ => return Err(Error::Invalid(format!("relation `{name}` has arity {}", t.len()))),
            }
        }
        self.rels.push(data);
        self.rel_index.insert(name.to_string(), self.rels.len() - 1);
        Ok(self.rels.len() - 1)
    }

    fn lookup(&self, name: &str, sort: Sort) -> Result<usize> {
        let (_, found, slot) = self
            .scope
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))?;
        if *found != sort {
            let what = if sort == Sort::Set { "a set" } else { "an element" };
            return Err(Error::Invalid(format!("variable `{name}` is used as {what} variable")));
        }
        Ok(*slot)
    }

    fn bind(&mut self, name: &str, sort: Sort, binder: Option<NodeId>) -> usize {
        let slot = match sort {
            Sort::Element => {
                self.fo_slots += 1;
                self.fo_binder.push(binder);
                self.fo_slots - 1
            }
            Sort::Set => {
                self.so_names.push(name.to_string());
                self.so_binder.push(binder);
                self.so_names.len() - 1
            }
        };
        self.scope.push((name.to_string(), sort, slot));
        slot
    }

    fn compile(&mut self, f: &MsoFormula) -> Result<NodeId> {
        let id = self.nodes.len();
        self.nodes.push(Node::Const(false));
        self.end.push(0);
        let node = match f {
            MsoFormula::True => Node::Const(true),
            MsoFormula::False => Node::Const(false),
            MsoFormula::Rel(name, args) => {
                let rel = self.relation(name, args.len())?;
                let slots = args
                    .iter()
                    .map(|a| self.lookup(a, Sort::Element))
                    .collect::<Result<Vec<_>>>()?;
                Node::Rel(rel, slots)
            }
            MsoFormula::Eq(a, b) => Node::Eq(self.lookup(a, Sort::Element)?, self.lookup(b, Sort::Element)?),
            MsoFormula::In(a, b) => Node::In(self.lookup(a, Sort::Element)?, self.lookup(b, Sort::Set)?),
            MsoFormula::Not(g) => Node::Not(self.compile(g)?),
            MsoFormula::And(fs) => Node::And(fs.iter().map(|g| self.compile(g)).collect::<Result<_>>()?),
            MsoFormula::Or(fs) => Node::Or(fs.iter().map(|g| self.compile(g)).collect::<Result<_>>()?),
            MsoFormula::Imp(a, b) => Node::Imp(self.compile(a)?, self.compile(b)?),
            MsoFormula::Iff(a, b) => Node::Iff(self.compile(a)?, self.compile(b)?),
            MsoFormula::Xor(a, b) => Node::Xor(self.compile(a)?, self.compile(b)?),
            MsoFormula::ExistsFo(v, g)
            | MsoFormula::ForallFo(v, g)
            | MsoFormula::ExistsSo(v, g)
            | MsoFormula::ForallSo(v, g) => {
                let exists = matches!(f, MsoFormula::ExistsFo(..) | MsoFormula::ExistsSo(..));
                let sort = if matches!(f, MsoFormula::ExistsSo(..) | MsoFormula::ForallSo(..)) {
                    Sort::Set
                } else {
                    Sort::Element
                };
                let slot = self.bind(v, sort, Some(id));
                let body = self.compile(g)?;
                self.scope.pop();
                match sort {
                    Sort::Element => Node::Fo { exists, slot, body },
                    Sort::Set => Node::So { exists, slot, body },
                }
            }
        };
        self.nodes[id] = node;
        self.end[id] = self.nodes.len();
        Ok(id)
    }
}

fn children(node: &Node) -> Vec<NodeId> {
    match node {
        Node::Const(_) | Node::Rel(..) | Node::Eq(..) | Node::In(..) => vec![],
        Node::Not(a) => vec![*a],
        Node::And(cs) | Node::Or(cs) => cs.clone(),
        Node::Imp(a, b) | Node::Iff(a, b) | Node::Xor(a, b) => vec![*a, *b],
        Node::Fo { body, .. } | Node::So { body, .. } => vec![*body],
    }
}

impl Program {
    fn compile(s: &RelationalStructure, phi: &MsoFormula, env: &Env) -> Result<Program> {
        let mut c = Compiler {
            s,
            rel_index: HashMap::new(),
            rels: Vec::new(),
            nodes: Vec::new(),
            end: Vec::new(),
            scope: Vec::new(),
            fo_slots: 0,
            fo_binder: Vec::new(),
            so_names: Vec::new(),
            so_binder: Vec::new(),
        };
        let free = phi.free_vars();
        let mut env_fo = Vec::new();
        let mut env_so = Vec::new();
        for name in &free {
            let value = env.get(name).ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            let in_range = |e: &usize| {
                if *e < s.len() {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!(
                        "`{name}` is bound to element {e} outside the universe"
                    )))
                }
            };
            match value {
                Value::Element(e) => {
                    in_range(e)?;
                    let slot = c.bind(name, Sort::Element, None);
                    env_fo.push((slot, *e));
                }
                Value::Set(set) => {
                    set.iter().try_for_each(in_range)?;
                    let slot = c.bind(name, Sort::Set, None);
                    env_so.push((slot, set.iter().fold(0u64, |m, e| m | 1 << e)));
                }
            }
        }
        let root = c.compile(phi)?;
        let all = if s.len() == 64 { u64::MAX } else { (1u64 << s.len()) - 1 };
        let mut program = Program {
            info: vec![Info::default(); c.nodes.len()],
            guards: vec![Vec::new(); c.nodes.len()],
            plans: vec![SoPlan::default(); c.nodes.len()],
            nodes: c.nodes,
            end: c.end,
            rels: c.rels,
            all,
            root,
            fo_slots: c.fo_slots,
            so_names: c.so_names,
            env_fo,
            env_so,
        };
        program.analyse(&c.fo_binder);
        Ok(program)
    }

    fn analyse(&mut self, fo_binder: &[Option<NodeId>]) {
        for id in (0..self.nodes.len()).rev() {
            let mut fo = BTreeSet::new();
            let mut so = BTreeSet::new();
            let mut has_so = false;
            match &self.nodes[id] {
                Node::Rel(_, args) => fo.extend(args.iter().copied()),
                Node::Eq(a, b) => {
                    fo.insert(*a);
                    fo.insert(*b);
                }
                Node::In(a, b) => {
                    fo.insert(*a);
                    so.insert(*b);
                }
                _ => {}
            }
            for ch in children(&self.nodes[id]) {
                fo.extend(self.info[ch].free_fo.iter().copied());
                so.extend(self.info[ch].free_so.iter().copied());
                has_so |= self.info[ch].has_so;
            }
            match self.nodes[id] {
                Node::Fo { slot, .. } => {
                    fo.remove(&slot);
                }
                Node::So { slot, .. } => {
                    so.remove(&slot);
                    has_so = true;
                }
                _ => {}
            }
            self.info[id] = Info {
                free_fo: fo.into_iter().collect(),
                free_so: so.into_iter().collect(),
                has_so,
            };
        }
        for id in 0..self.nodes.len() {
            match self.nodes[id] {
                Node::Fo { exists, slot, body } => self.guards[id] = self.fo_guards(exists, slot, body),
                Node::So { exists, slot, body } => self.plans[id] = self.so_plan(id, exists, slot, body, fo_binder),
                _ => {}
            }
        }
    }

    fn conjuncts(&self, id: NodeId, out: &mut Vec<NodeId>) {
        match &self.nodes[id] {
            Node::And(cs) => cs.iter().for_each(|&c| self.conjuncts(c, out)),
            _ => out.push(id),
        }
    }

    fn fo_guards(&self, exists: bool, slot: usize, body: NodeId) -> Vec<Guard> {
        let mut inner = Vec::new();
        let mut cur = body;
        while let Node::Fo {
            exists: e,
            slot: s,
            body: b,
        } = self.nodes[cur]
        {
            if e != exists {
                break;
            }
            inner.push(s);
            cur = b;
        }
        let mut conj = Vec::new();
        match (&self.nodes[cur], exists) {
            (Node::Imp(a, _), false) => self.conjuncts(*a, &mut conj),
            (_, true) => self.conjuncts(cur, &mut conj),
            _ => {}
        }
        conj.into_iter()
            .filter_map(|c| match &self.nodes[c] {
                Node::Rel(rel, args) if args.contains(&slot) => Some(Guard {
                    rel: *rel,
                    args: args
                        .iter()
                        .map(|&a| {
                            if a == slot {
                                GArg::Me
                            } else if inner.contains(&a) {
                                GArg::Wild
                            } else {
                                GArg::Outer(a)
                            }
                        })
                        .collect(),
                }),
                _ => None,
            })
            .collect()
    }

    fn so_plan(&self, id: NodeId, exists: bool, slot: usize, body: NodeId, fo_binder: &[Option<NodeId>]) -> SoPlan {
        let mut plan = SoPlan::default();
        // Which elements can the body observe in the set?
        for n in body..self.end[body] {
            if let Node::In(t, s) = self.nodes[n] {
                if s != slot {
                    continue;
                }
                match fo_binder[t] {
                    Some(b) if b > id && b < self.end[id] => plan.static_support |= self.static_domain(b),
                    _ => plan.dynamic_support.push(t),
                }
            }
        }
        plan.dynamic_support.sort_unstable();
        plan.dynamic_support.dedup();

        let mut conj = Vec::new();
        match (&self.nodes[body], exists) {
            (Node::Imp(a, _), false) => self.conjuncts(*a, &mut conj),
            (_, true) => self.conjuncts(body, &mut conj),
            _ => {}
        }
        if exists {
            plan.definition = self.definition(slot, &conj);
        }
        plan.guards = conj
            .into_iter()
            .filter(|&c| {
                let info = &self.info[c];
                info.free_fo.is_empty() && info.free_so == [slot] && !info.has_so
            })
            .collect();
        plan.guard_key = plan
            .guards
            .iter()
            .map(|&g| self.canonical(g, slot))
            .collect::<Vec<_>>()
            .join(" & ");
        plan
    }

    fn definition(&self, slot: usize, conj: &[NodeId]) -> Option<(usize, NodeId, Vec<NodeId>)> {
        for (i, &c) in conj.iter().enumerate() {
            let Node::Fo {
                exists: false,
                slot: x,
                body,
            } = self.nodes[c]
            else {
                continue;
            };
            let Node::Iff(a, b) = self.nodes[body] else { continue };
            let is_member = |n: NodeId| matches!(self.nodes[n], Node::In(t, s) if t == x && s == slot);
            let psi = if is_member(a) {
                b
            } else if is_member(b) {
                a
            } else {
                continue;
            };
            if self.info[psi].free_so.contains(&slot) {
                continue;
            }
            let rest = conj
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &r)| r)
                .collect();
            return Some((x, psi, rest));
        }
        None
    }

    fn static_domain(&self, binder: NodeId) -> u64 {
        self.guards[binder]
            .iter()
            .fold(self.all, |d, g| d & self.guard_mask(g, &[], true))
    }

    fn guard_mask(&self, g: &Guard, fo: &[usize], wild_outer: bool) -> u64 {
        let r = &self.rels[g.rel];
        let outer = |a: &GArg| match a {
            GArg::Outer(s) if !wild_outer => Some(fo[*s]),
            _ => None,
        };
        match (r.arity, g.args.as_slice()) {
            (1, _) => r.unary,
            (_, [GArg::Me, GArg::Me]) => r.diag,
            (_, [GArg::Me, other]) => outer(other).map_or(r.proj0, |v| r.cols[v]),
            (_, [other, GArg::Me]) => outer(other).map_or(r.proj1, |v| r.rows[v]),
            _ => self.all,
        }
    }

    /// Text of a guard with the quantified set written `#` and bound
    /// variables numbered by first occurrence.
    fn canonical(&self, id: NodeId, set: usize) -> String {
        fn go(p: &Program, id: NodeId, set: usize, names: &mut HashMap<(bool, usize), usize>, out: &mut String) {
            let mut name = |sort: bool, s: usize| {
                let next = names.len();
                *names.entry((sort, s)).or_insert(next)
            };
            match &p.nodes[id] {
                Node::Const(b) => out.push_str(if *b { "T" } else { "F" }),
                Node::Rel(r, args) => {
                    out.push_str(&format!("R{r}("));
                    for &a in args {
                        out.push_str(&format!("v{},", name(false, a)));
                    }
                    out.push(')');
                }
                Node::Eq(a, b) => out.push_str(&format!("v{}=v{}", name(false, *a), name(false, *b))),
                Node::In(a, s) => {
                    let a = name(false, *a);
                    if *s == set {
                        out.push_str(&format!("v{a}in#"));
                    } else {
                        out.push_str(&format!("v{a}inS{}", name(true, *s)));
                    }
                }
                node => {
                    let tag = match node {
                        Node::Not(_) => "~".to_string(),
                        Node::And(_) => "&".to_string(),
                        Node::Or(_) => "|".to_string(),
                        Node::Imp(..) => ">".to_string(),
                        Node::Iff(..) => "=".to_string(),
                        Node::Xor(..) => "^".to_string(),
                        Node::Fo { exists, slot, .. } => {
                            format!("{}v{}", if *exists { "E" } else { "A" }, name(false, *slot))
                        }
                        Node::So { exists, slot, .. } => {
                            format!("{}S{}", if *exists { "E" } else { "A" }, name(true, *slot))
                        }
                        _ => unreachable!(),
                    };
                    out.push_str(&tag);
                    out.push('[');
                    for c in children(node) {
                        go(p, c, set, names, out);
                        out.push(',');
                    }
                    out.push(']');
                }
            }
        }
        let mut out = String::new();
        go(self, id, set, &mut HashMap::new(), &mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    fn from(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::False => Tri::True,
            Tri::True => Tri::False,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

/// A set that is only partly decided, for three-valued evaluation.
#[derive(Debug, Clone, Copy)]
struct Partial {
    slot: usize,
    known: u64,
    members: u64,
}

struct State<'l> {
    fo: Vec<usize>,
    so: Vec<u64>,
    memo: HashMap<(NodeId, Vec<u64>), bool>,
    families: HashMap<(String, u64), Rc<Vec<u64>>>,
    steps: u64,
    limits: &'l Limits,
    depth: usize,
    active: Vec<usize>,
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

impl<'l> State<'l> {
    fn new(p: &Program, _env: &Env, limits: &'l Limits) -> State<'l> {
        let mut fo = vec![0; p.fo_slots];
        let mut so = vec![0; p.so_names.len()];
        for &(s, v) in &p.env_fo {
            fo[s] = v;
        }
        for &(s, v) in &p.env_so {
            so[s] = v;
        }
        State {
            fo,
            so,
            memo: HashMap::new(),
            families: HashMap::new(),
            steps: 0,
            limits,
            depth: 0,
            active: Vec::new(),
        }
    }

    fn step(&mut self, p: &Program) -> Result<()> {
        self.steps += 1;
        if self.steps > self.limits.mso_steps {
            let inside = match self.active.last() {
                Some(&s) => format!(" inside the quantifier over `{}`", p.so_names[s]),
                None => String::new(),
            };
            return Err(Error::limit(
                format!("MSO evaluation steps{inside}"),
                self.limits.mso_steps as usize,
                self.steps as usize,
            ));
        }
        Ok(())
    }

    fn domain(&self, p: &Program, id: NodeId) -> u64 {
        p.guards[id]
            .iter()
            .fold(p.all, |d, g| d & p.guard_mask(g, &self.fo, false))
    }

    fn memo_key(&self, p: &Program, id: NodeId) -> Option<Vec<u64>> {
        let info = &p.info[id];
        let memoise = match p.nodes[id] {
            Node::So { .. } => true,
            Node::Fo { .. } => info.has_so || (info.free_fo.is_empty() && info.free_so.is_empty()),
            _ => false,
        };
        memoise.then(|| {
            info.free_fo
                .iter()
                .map(|&s| self.fo[s] as u64)
                .chain(info.free_so.iter().map(|&s| self.so[s]))
                .collect()
        })
    }

    fn eval(&mut self, p: &Program, id: NodeId) -> Result<bool> {
        self.step(p)?;
        let key = self.memo_key(p, id);
        if let Some(k) = &key {
            if let Some(&v) = self.memo.get(&(id, k.clone())) {
                return Ok(v);
            }
        }
        let value = match &p.nodes[id] {
            Node::Const(b) => *b,
            Node::Rel(r, args) => self.rel(p, *r, args),
            Node::Eq(a, b) => self.fo[*a] == self.fo[*b],
            Node::In(a, s) => self.so[*s] >> self.fo[*a] & 1 == 1,
            Node::Not(a) => !self.eval(p, *a)?,
            Node::And(cs) => {
                let mut v = true;
                for &c in cs {
                    if !self.eval(p, c)? {
                        v = false;
                        break;
                    }
                }
                v
            }
            Node::Or(cs) => {
                let mut v = false;
                for &c in cs {
                    if self.eval(p, c)? {
                        v = true;
                        break;
                    }
                }
                v
            }
            Node::Imp(a, b) => !self.eval(p, *a)? || self.eval(p, *b)?,
            Node::Iff(a, b) => self.eval(p, *a)? == self.eval(p, *b)?,
            Node::Xor(a, b) => self.eval(p, *a)? != self.eval(p, *b)?,
            &Node::Fo { exists, slot, body } => {
                let mut v = !exists;
                for e in bits(self.domain(p, id)) {
                    self.fo[slot] = e;
                    if self.eval(p, body)? == exists {
                        v = exists;
                        break;
                    }
                }
                v
            }
            &Node::So { exists, slot, body } => self.eval_so(p, id, exists, slot, body)?,
        };
        if let Some(k) = key {
            self.memo.insert((id, k), value);
        }
        Ok(value)
    }

    fn rel(&self, p: &Program, r: usize, args: &[usize]) -> bool {
        let data = &p.rels[r];
        match *args {
            [a] => data.unary >> self.fo[a] & 1 == 1,
            [a, b] => data.rows[self.fo[a]] >> self.fo[b] & 1 == 1,
            _ => false,
        }
    }

    fn eval_so(&mut self, p: &Program, id: NodeId, exists: bool, slot: usize, body: NodeId) -> Result<bool> {
        let plan = &p.plans[id];
        if let Some((x, psi, rest)) = &plan.definition {
            let mut set = 0u64;
            for e in bits(p.all) {
                self.fo[*x] = e;
                if self.eval(p, *psi)? {
                    set |= 1 << e;
                }
            }
            self.so[slot] = set;
            for &r in rest {
                if !self.eval(p, r)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let support = plan
            .dynamic_support
            .iter()
            .fold(plan.static_support, |m, &s| m | 1 << self.fo[s]);
        self.active.push(slot);
        let result = if plan.guards.is_empty() {
            self.enumerate(p, exists, slot, body, support)
        } else {
            self.over_family(p, id, exists, slot, body, support)
        };
        self.active.pop();
        result
    }

    fn enumerate(&mut self, p: &Program, exists: bool, slot: usize, body: NodeId, support: u64) -> Result<bool> {
        let size = support.count_ones() as usize;
        let limit = if self.depth == 0 {
            self.limits.mso_single
        } else {
            self.limits.mso_nested
        };
        if size > limit {
            let q = if exists { "E" } else { "A" };
            return Err(Error::limit(
                format!(
                    "elements under set quantifier `{q} {}` at nesting depth {}",
                    p.so_names[slot],
                    self.depth + 1
                ),
                limit,
                size,
            ));
        }
        self.depth += 1;
        let mut sub = 0u64;
        let mut result = !exists;
        loop {
            self.so[slot] = sub;
            match self.eval(p, body) {
                Ok(v) if v == exists => {
                    result = exists;
                    break;
                }
                Ok(_) => {}
                Err(e) => {
                    self.depth -= 1;
                    return Err(e);
                }
            }
            if sub == support {
                break;
            }
            sub = sub.wrapping_sub(support) & support;
        }
        self.depth -= 1;
        Ok(result)
    }

    fn over_family(
        &mut self,
        p: &Program,
        id: NodeId,
        exists: bool,
        slot: usize,
        body: NodeId,
        support: u64,
    ) -> Result<bool> {
        let plan = &p.plans[id];
        let key = (plan.guard_key.clone(), support);
        let family = match self.families.get(&key) {
            Some(f) => f.clone(),
            None => {
                let mut found = Vec::new();
                let order: Vec<usize> = bits(support).collect();
                let mut partial = Partial {
                    slot,
                    known: !support,
                    members: 0,
                };
                self.search(p, &plan.guards, &order, 0, &mut partial, &mut found)?;
                let f = Rc::new(found);
                self.families.insert(key, f.clone());
                f
            }
        };
        for &set in family.iter() {
            self.so[slot] = set;
            if self.eval(p, body)? == exists {
                return Ok(exists);
            }
        }
        Ok(!exists)
    }

    fn search(
        &mut self,
        p: &Program,
        guards: &[NodeId],
        order: &[usize],
        next: usize,
        partial: &mut Partial,
        found: &mut Vec<u64>,
    ) -> Result<()> {
        let mut verdict = Tri::True;
        for &g in guards {
            match self.eval3(p, g, partial)? {
                Tri::False => return Ok(()),
                Tri::Unknown => verdict = Tri::Unknown,
                Tri::True => {}
            }
        }
        if next == order.len() {
            if verdict == Tri::True {
                found.push(partial.members);
            }
            return Ok(());
        }
        let bit = 1u64 << order[next];
        partial.known |= bit;
        self.search(p, guards, order, next + 1, partial, found)?;
        partial.members |= bit;
        self.search(p, guards, order, next + 1, partial, found)?;
        partial.members &= !bit;
        partial.known &= !bit;
        Ok(())
    }

    /// Kleene evaluation with one partly known set. Only used on subformulas
    /// without set quantifiers.
    fn eval3(&mut self, p: &Program, id: NodeId, partial: &Partial) -> Result<Tri> {
        self.step(p)?;
        Ok(match &p.nodes[id] {
            Node::Const(b) => Tri::from(*b),
            Node::Rel(r, args) => Tri::from(self.rel(p, *r, args)),
            Node::Eq(a, b) => Tri::from(self.fo[*a] == self.fo[*b]),
            Node::In(a, s) => {
                let bit = 1u64 << self.fo[*a];
                if *s != partial.slot {
                    Tri::from(self.so[*s] & bit != 0)
                } else if partial.known & bit == 0 {
                    Tri::Unknown
                } else {
                    Tri::from(partial.members & bit != 0)
                }
            }
            Node::Not(a) => self.eval3(p, *a, partial)?.not(),
            Node::And(cs) => {
                let mut v = Tri::True;
                for &c in cs {
                    match self.eval3(p, c, partial)? {
                        Tri::False => return Ok(Tri::False),
                        Tri::Unknown => v = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                v
            }
            Node::Or(cs) => {
                let mut v = Tri::False;
                for &c in cs {
                    match self.eval3(p, c, partial)? {
                        Tri::True => return Ok(Tri::True),
                        Tri::Unknown => v = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                v
            }
            Node::Imp(a, b) => match self.eval3(p, *a, partial)? {
                Tri::False => Tri::True,
                av => match (av, self.eval3(p, *b, partial)?) {
                    (_, Tri::True) => Tri::True,
                    (Tri::True, bv) => bv,
                    _ => Tri::Unknown,
                },
            },
            Node::Iff(a, b) | Node::Xor(a, b) => {
                let (av, bv) = (self.eval3(p, *a, partial)?, self.eval3(p, *b, partial)?);
                if av == Tri::Unknown || bv == Tri::Unknown {
                    Tri::Unknown
                } else {
                    let same = av == bv;
                    Tri::from(if matches!(p.nodes[id], Node::Iff(..)) {
                        same
                    } else {
                        !same
                    })
                }
            }
            &Node::Fo { exists, slot, body } => {
                let mut v = Tri::from(!exists);
                for e in bits(self.domain(p, id)) {
                    self.fo[slot] = e;
                    match self.eval3(p, body, partial)? {
                        Tri::Unknown => v = Tri::Unknown,
                        b if b == Tri::from(exists) => return Ok(b),
                        _ => {}
                    }
                }
                v
            }
            Node::So { .. } => unreachable!("guards contain no set quantifiers"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Basis, Mode};
    use crate::mso::parse_mso;
    use crate::structures::build_prop_structure;

    fn structure(fs: &[&str]) -> RelationalStructure {
        let basis = Basis::default();
        let gamma: Vec<_> = fs
            .iter()
            .map(|f| parse_formula(f, Mode::Prop, &basis).unwrap())
            .collect();
        build_prop_structure(&gamma, &basis).unwrap()
    }

    fn check(s: &RelationalStructure, text: &str) -> bool {
        eval_mso(s, &parse_mso(text).unwrap(), &Env::new()).unwrap()
    }

    #[test]
    fn basics() {
        let s = structure(&["p | q"]);
        assert!(check(&s, "E M. A x. x in M"));
        assert!(check(&s, "A M. E N. A x. (x in M <-> ~x in N)"));
        assert!(!check(&s, "A M. E x. x in M"));
        assert!(check(&s, "E x. E y. (conn_or_1(x,y) & var(x))"));
        assert!(!check(&s, "E x. conn_or_1(x,x)"));
        assert!(check(&s, "A x. (repr(x) -> ~var(x))"));
        assert!(check(&s, "E X. (A x. (x in X <-> var(x)) & E y. (y in X & ~repr(y)))"));
        assert!(!check(&s, "E X. (A x. (x in X <-> var(x)) & E y. (y in X & repr(y)))"));
    }

    #[test]
    fn empty_universe() {
        let s = structure(&[]);
        assert!(check(&s, "A x. false"));
        assert!(!check(&s, "E x. true"));
        assert!(check(&s, "E X. A x. (x in X -> false)"));
        assert!(!check(&s, "E x. (var(x) | true)"));
    }

    #[test]
    fn env_bindings() {
        let s = structure(&["p | q"]);
        let f = parse_mso("x in M & var(x)").unwrap();
        let mut env = Env::new();
        env.insert("x".into(), Value::Element(0));
        env.insert("M".into(), Value::Set(BTreeSet::from([0])));
        assert!(eval_mso(&s, &f, &env).unwrap());
        env.insert("x".into(), Value::Element(2));
        assert!(!eval_mso(&s, &f, &env).unwrap());
        assert!(matches!(eval_mso(&s, &f, &Env::new()), Err(Error::UnboundVariable(_))));
        env.insert("x".into(), Value::Element(9));
        assert!(eval_mso(&s, &f, &env).is_err());
    }

    #[test]
    fn vocabulary_errors() {
        let s = structure(&["p"]);
        assert!(matches!(
            eval_mso(&s, &parse_mso("E x. nope(x)").unwrap(), &Env::new()),
            Err(Error::UnknownName(_))
        ));
        assert!(eval_mso(&s, &parse_mso("E x. var(x,x)").unwrap(), &Env::new()).is_err());
        assert!(eval_mso(&s, &parse_mso("E X. var(X)").unwrap(), &Env::new()).is_err());
    }

    #[test]
    fn set_quantifier_budget() {
        let s = structure(&["(a | b) & (c | d) & (e | f)"]);
        let limits = Limits {
            mso_single: 4,
            ..Limits::default()
        };
        let f = parse_mso("A X. E Y. A x. (x in X <-> ~x in Y)").unwrap();
        let err = eval_mso_with(&s, &f, &Env::new(), &limits).unwrap_err();
        assert!(err.is_resource_limit());
        assert!(err.to_string().contains("`A X`"), "{err}");
        let steps = Limits {
            mso_steps: 10,
            ..Limits::default()
        };
        assert!(eval_mso_with(&s, &f, &Env::new(), &steps)
            .unwrap_err()
            .is_resource_limit());
    }

    /// The rewrites must not change truth values: compare against a plain
    /// interpreter on small formulas.
    #[test]
    fn agrees_with_plain_semantics() {
        fn plain(
            s: &RelationalStructure,
            f: &MsoFormula,
            fo: &mut BTreeMap<String, usize>,
            so: &mut BTreeMap<String, u64>,
        ) -> bool {
            let n = s.len();
            match f {
                MsoFormula::True => true,
                MsoFormula::False => false,
                MsoFormula::Rel(r, args) => s.holds(r, &args.iter().map(|a| fo[a]).collect::<Vec<_>>()),
                MsoFormula::Eq(a, b) => fo[a] == fo[b],
                MsoFormula::In(a, b) => so[b] >> fo[a] & 1 == 1,
                MsoFormula::Not(g) => !plain(s, g, fo, so),
                MsoFormula::And(fs) => fs.iter().all(|g| plain(s, g, fo, so)),
                MsoFormula::Or(fs) => fs.iter().any(|g| plain(s, g, fo, so)),
                MsoFormula::Imp(a, b) => !plain(s, a, fo, so) || plain(s, b, fo, so),
                MsoFormula::Iff(a, b) => plain(s, a, fo, so) == plain(s, b, fo, so),
                MsoFormula::Xor(a, b) => plain(s, a, fo, so) != plain(s, b, fo, so),
                MsoFormula::ExistsFo(v, g) | MsoFormula::ForallFo(v, g) => {
                    let ex = matches!(f, MsoFormula::ExistsFo(..));
                    let old = fo.get(v).copied();
                    let mut r = !ex;
                    for e in 0..n {
                        fo.insert(v.clone(), e);
                        if plain(s, g, fo, so) == ex {
                            r = ex;
                            break;
                        }
                    }
                    match old {
                        Some(o) => fo.insert(v.clone(), o),
                        None => fo.remove(v),
                    };
                    r
                }
                MsoFormula::ExistsSo(v, g) | MsoFormula::ForallSo(v, g) => {
                    let ex = matches!(f, MsoFormula::ExistsSo(..));
                    let old = so.get(v).copied();
                    let mut r = !ex;
                    for m in 0..(1u64 << n) {
                        so.insert(v.clone(), m);
                        if plain(s, g, fo, so) == ex {
                            r = ex;
                            break;
                        }
                    }
                    match old {
                        Some(o) => so.insert(v.clone(), o),
                        None => so.remove(v),
                    };
                    r
                }
            }
        }
        let formulas = [
            "A X. (A x. (var(x) -> x in X) -> E y. (repr(y) & ~y in X))",
            "E X. (A x. (x in X <-> E y. conn_and_1(x,y)) & A z. (z in X -> var(z)))",
            "A x. A y. ((conn_and_1(y,x) & var(y)) -> E Z. (y in Z & ~x in Z))",
            "E M. (A x. (repr(x) -> x in M) & A x. A y. (conn_not_1(y,x) -> (x in M <-> ~y in M)))",
            "A M. ((A x. A y. (conn_not_1(y,x) -> (x in M <-> ~y in M))) -> E z. (z in M | var(z)))",
            "E x. (var(x) & A Y. (x in Y -> E z. (z in Y & E w. conn_or_2(z,w))))",
            "A X. E Y. A x. ((x in X & E y. conn_or_1(x,y)) <-> ~x in Y)",
        ];
        let s = structure(&["!p & (p | q)", "q"]);
        for text in formulas {
            let f = parse_mso(text).unwrap();
            let expected = plain(&s, &f, &mut BTreeMap::new(), &mut BTreeMap::new());
            assert_eq!(eval_mso(&s, &f, &Env::new()).unwrap(), expected, "{text}");
        }
    }
}
