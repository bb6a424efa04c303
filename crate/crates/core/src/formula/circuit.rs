use std::collections::HashMap;

use super::{Atom, Connective, Formula};

/// One node of a [`Circuit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    /// Index into [`Circuit::atoms`].
    Input(usize),
    Const(bool),
    Op(Connective, Vec<usize>),
}

/// A set of formulas compiled to a DAG of distinct subformulas.
///
/// `L`-subformulas become inputs. Gates are topologically ordered
/// (children before parents) and structurally equal subformulas share a gate.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub atoms: Vec<Atom>,
    pub gates: Vec<Gate>,
    pub roots: Vec<usize>,
}

impl Circuit {
    /// Compiles `formulas`; atoms are numbered in sorted order.
    pub fn compile<'a>(formulas: impl IntoIterator<Item = &'a Formula> + Clone) -> Circuit {
        let atoms: Vec<Atom> = super::atoms_of(formulas.clone()).into_iter().collect();
        let atom_index: HashMap<Atom, usize> = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut c = Circuit {
            atoms,
            gates: Vec::new(),
            roots: Vec::new(),
        };
        let mut memo: HashMap<Formula, usize> = HashMap::new();
        for f in formulas {
            let id = c.add(f, &atom_index, &mut memo);
            c.roots.push(id);
        }
        c
    }

    fn add(&mut self, f: &Formula, atoms: &HashMap<Atom, usize>, memo: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&id) = memo.get(f) {
            return id;
        }
        let gate = match f {
            Formula::Var(v) => Gate::Input(atoms[&Atom::Var(v.clone())]),
            Formula::Believes(_) => Gate::Input(atoms[&Atom::Belief(f.clone())]),
            Formula::Const(b) => Gate::Const(*b),
            Formula::App(c, args) => {
                let ids = args.iter().map(|a| self.add(a, atoms, memo)).collect();
                Gate::Op(*c, ids)
            }
        };
        let id = self.gates.len();
        self.gates.push(gate);
        memo.insert(f.clone(), id);
        id
    }

    /// Evaluates all gates on 64 input patterns at once.
    pub fn eval_words(&self, inputs: &[u64], values: &mut Vec<u64>) {
        values.clear();
        let mut args = [0u64; 3];
        for g in &self.gates {
            let v = match g {
                Gate::Input(i) => inputs[*i],
                Gate::Const(true) => !0,
                Gate::Const(false) => 0,
                Gate::Op(c, ch) => {
                    for (slot, &id) in args.iter_mut().zip(ch) {
                        *slot = values[id];
                    }
                    c.apply_words(&args[..ch.len()])
                }
            };
            values.push(v);
        }
    }
}
