//! Autoepistemic logic through Σ-full sets.
//!
//! A stable expansion is represented by its full set `Λ`, which picks `Lφ` or
//! `¬Lφ` for every `Lφ ∈ SF_L(Σ)`. Entailment treats every `Lψ` as an atom.

use serde::Serialize;

use crate::dl::{parse_line_formula, strip_comment};
use crate::error::{Error, Result};
use crate::formula::{subformulae_of, Basis, Formula, Mode};
use crate::limits::Limits;
use crate::twdp::EntailmentOracle;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AeTheory {
    pub sigma: Vec<Formula>,
}

impl AeTheory {
    pub fn new(sigma: Vec<Formula>) -> AeTheory {
        AeTheory { sigma }
    }

    /// `SF_L(Σ)`: the `L`-rooted subformulas, in post-order of first occurrence.
    pub fn belief_subformulae(&self) -> Vec<Formula> {
        subformulae_of(&self.sigma)
            .into_iter()
            .filter(|f| matches!(f, Formula::Believes(_)))
            .collect()
    }

    pub fn to_ae(&self) -> String {
        self.sigma.iter().map(|f| format!("{f}\n")).collect()
    }
}

/// Parses the `.ae` format: one formula per line, `#` comments.
pub fn parse_ae_theory(text: &str, basis: &Basis) -> Result<AeTheory> {
    let mut sigma = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = strip_comment(raw);
        if !content.is_empty() {
            sigma.push(parse_line_formula(content, i + 1, Mode::Ae, basis)?);
        }
    }
    Ok(AeTheory { sigma })
}

/// One polarity per `Lφ`, aligned with `AeTheory::belief_subformulae`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullSetCandidate {
    pub polarity: Vec<(Formula, bool)>,
}

impl FullSetCandidate {
    /// Candidate `mask` over `beliefs`; bit `i` set means `Lφ_i` is positive.
    pub fn from_mask(beliefs: &[Formula], mask: u64) -> FullSetCandidate {
        FullSetCandidate {
            polarity: beliefs
                .iter()
                .enumerate()
                .map(|(i, b)| (b.clone(), mask >> i & 1 == 1))
                .collect(),
        }
    }

    /// The literals of `Λ`: `Lφ` or `¬Lφ`.
    pub fn literals(&self) -> Vec<Formula> {
        self.polarity
            .iter()
            .map(|(b, pos)| if *pos { b.clone() } else { Formula::not(b.clone()) })
            .collect()
    }

    pub fn positives(&self) -> impl Iterator<Item = &Formula> {
        self.polarity.iter().filter(|(_, p)| *p).map(|(b, _)| b)
    }
}

/// Whether `Σ ∪ Λ ⊨ φ` holds exactly for the positive `Lφ` of `lambda`.
pub fn is_full(sigma: &AeTheory, lambda: &FullSetCandidate, oracle: &dyn EntailmentOracle) -> Result<bool> {
    let beliefs = sigma.belief_subformulae();
    let covered = lambda.polarity.len() == beliefs.len() && lambda.polarity.iter().all(|(b, _)| beliefs.contains(b));
    if !covered {
        return Err(Error::Invalid(
            "candidate must give one polarity per L-subformula".into(),
        ));
    }
    let mut premises = sigma.sigma.clone();
    premises.extend(lambda.literals());
    for (belief, positive) in &lambda.polarity {
        let Formula::Believes(phi) = belief else {
            return Err(Error::Invalid(format!("`{belief}` is not L-rooted")));
        };
        if oracle.entails(&premises, phi)? != *positive {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All Σ-full sets, visited in binary counting order (negative = 0, `Lφ_i` as bit `i`).
pub fn expansion_exists(
    sigma: &AeTheory,
    oracle: &dyn EntailmentOracle,
    limits: &Limits,
) -> Result<(bool, Vec<FullSetCandidate>)> {
    let beliefs = sigma.belief_subformulae();
    if beliefs.len() > limits.ae_beliefs {
        return Err(Error::limit("L-subformulae", limits.ae_beliefs, beliefs.len()));
    }
    let mut found = Vec::new();
    for mask in 0u64..1 << beliefs.len() {
        let candidate = FullSetCandidate::from_mask(&beliefs, mask);
        if is_full(sigma, &candidate, oracle)? {
            found.push(candidate);
        }
    }
    Ok((!found.is_empty(), found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twdp::{entailment_oracle, OracleKind};

    fn ae(s: &str) -> AeTheory {
        parse_ae_theory(s, &Basis::default()).unwrap()
    }

    fn signs(c: &FullSetCandidate) -> Vec<bool> {
        c.polarity.iter().map(|(_, p)| *p).collect()
    }

    #[test]
    fn full_set_examples() {
        let o = entailment_oracle(OracleKind::Brute);
        let s = ae("L p -> p");
        let lp = s.belief_subformulae();
        assert!(is_full(&s, &FullSetCandidate::from_mask(&lp, 1), o.as_ref()).unwrap());
        assert!(is_full(&s, &FullSetCandidate::from_mask(&lp, 0), o.as_ref()).unwrap());
        let s = ae("!L p -> p");
        let lp = s.belief_subformulae();
        assert!(!is_full(&s, &FullSetCandidate::from_mask(&lp, 1), o.as_ref()).unwrap());
    }

    #[test]
    fn expansion_examples() {
        let o = entailment_oracle(OracleKind::Brute);
        let l = Limits::default();
        let (exists, fs) = expansion_exists(&ae("L p -> p"), o.as_ref(), &l).unwrap();
        assert!(exists);
        assert_eq!(fs.iter().map(signs).collect::<Vec<_>>(), vec![vec![false], vec![true]]);
        assert_eq!(
            expansion_exists(&ae("!L p -> p"), o.as_ref(), &l).unwrap(),
            (false, vec![])
        );
        let (exists, fs) = expansion_exists(&ae(""), o.as_ref(), &l).unwrap();
        assert!(exists);
        assert_eq!(fs, vec![FullSetCandidate { polarity: vec![] }]);
    }

    #[test]
    fn nested_beliefs() {
        // Σ = {L L p}: believing L p forces p, which Σ cannot derive.
        let o = entailment_oracle(OracleKind::Brute);
        let s = ae("L L p");
        assert_eq!(s.belief_subformulae().len(), 2);
        assert_eq!(
            expansion_exists(&s, o.as_ref(), &Limits::default()).unwrap(),
            (false, vec![])
        );
        // Σ = {p, L L p}: everything positive.
        let s = ae("p\nL L p");
        let (exists, fs) = expansion_exists(&s, o.as_ref(), &Limits::default()).unwrap();
        assert!(exists);
        assert_eq!(fs.iter().map(signs).collect::<Vec<_>>(), vec![vec![true, true]]);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_ae_theory("L p\n(p", &Basis::default()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }

    #[test]
    fn mismatched_candidate_rejected() {
        let o = entailment_oracle(OracleKind::Brute);
        let s = ae("L p -> p");
        assert!(is_full(&s, &FullSetCandidate { polarity: vec![] }, o.as_ref()).is_err());
    }
}
