//! Truth-table oracles. Deliberately exhaustive; 64 assignments per word.

use super::{Assignment, Circuit, Formula};
use crate::error::{Error, Result};
use crate::limits::Limits;

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Walks all assignments in counting order (first atom most significant,
/// false before true), one 64-lane block at a time.
struct Blocks {
    n: usize,
    blocks: u64,
    valid: u64,
}

impl Blocks {
    fn new(n: usize) -> Self {
        let (blocks, valid) = if n >= 6 {
            (1u64 << (n - 6), !0)
        } else {
            (1, (1u64 << (1u64 << n)) - 1)
        };
        Blocks { n, blocks, valid }
    }

    fn inputs(&self, block: u64, out: &mut Vec<u64>) {
        out.clear();
        for i in 0..self.n {
            let bit = self.n - 1 - i;
            out.push(if bit < 6 {
                LANE_PATTERNS[bit]
            } else if (block >> (bit - 6)) & 1 == 1 {
                !0
            } else {
                0
            });
        }
    }
}

fn check_cap(c: &Circuit, limits: &Limits) -> Result<()> {
    if c.atoms.len() > limits.atoms {
        return Err(Error::limit("brute-force atom count", limits.atoms, c.atoms.len()));
    }
    Ok(())
}

/// First satisfying assignment over the joint atoms, or `None`.
pub fn sat_bruteforce(gamma: &[Formula], limits: &Limits) -> Result<Option<Assignment>> {
    let c = Circuit::compile(gamma);
    check_cap(&c, limits)?;
    let n = c.atoms.len();
    let walk = Blocks::new(n);
    let (mut inputs, mut values) = (Vec::new(), Vec::new());
    for block in 0..walk.blocks {
        walk.inputs(block, &mut inputs);
        c.eval_words(&inputs, &mut values);
        let sat = c.roots.iter().fold(walk.valid, |acc, &r| acc & values[r]);
        if sat != 0 {
            let k = (block << 6) | sat.trailing_zeros() as u64;
            let assignment = c
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), (k >> (n - 1 - i)) & 1 == 1))
                .collect();
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

/// Whether every model of all of `premises` satisfies all of `conclusions`.
pub fn implies_bruteforce(premises: &[Formula], conclusions: &[Formula], limits: &Limits) -> Result<bool> {
    let all: Vec<Formula> = premises.iter().chain(conclusions).cloned().collect();
    let c = Circuit::compile(&all);
    check_cap(&c, limits)?;
    let walk = Blocks::new(c.atoms.len());
    let (prem_roots, concl_roots) = c.roots.split_at(premises.len());
    let (mut inputs, mut values) = (Vec::new(), Vec::new());
    for block in 0..walk.blocks {
        walk.inputs(block, &mut inputs);
        c.eval_words(&inputs, &mut values);
        let models = prem_roots.iter().fold(walk.valid, |acc, &r| acc & values[r]);
        let good = concl_roots.iter().fold(!0u64, |acc, &r| acc & values[r]);
        if models & !good != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}
