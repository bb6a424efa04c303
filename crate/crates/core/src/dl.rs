//! Reiter's default logic: stage construction and stable-extension search.
//!
//! An extension `E = Th(W ∪ {γ_d | d ∈ G})` is represented by its set of
//! generating defaults `G`. Membership in `E` is always an entailment query.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{parse_formula, Basis, Formula, Mode};
use crate::limits::Limits;
use crate::twdp::EntailmentOracle;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DefaultRule {
    pub prerequisite: Formula,
    pub justification: Formula,
    pub conclusion: Formula,
}

impl DefaultRule {
    pub fn new(prerequisite: Formula, justification: Formula, conclusion: Formula) -> DefaultRule {
        DefaultRule {
            prerequisite,
            justification,
            conclusion,
        }
    }

    /// `α`, `β` and `γ`, in that order.
    pub fn parts(&self) -> [&Formula; 3] {
        [&self.prerequisite, &self.justification, &self.conclusion]
    }
}

impl fmt::Display for DefaultRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} : {} / {}",
            self.prerequisite, self.justification, self.conclusion
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DefaultTheory {
    pub w: Vec<Formula>,
    pub d: Vec<DefaultRule>,
}

impl DefaultTheory {
    pub fn new(w: Vec<Formula>, d: Vec<DefaultRule>) -> DefaultTheory {
        DefaultTheory { w, d }
    }

    /// Renders the theory in `.dt` syntax.
    pub fn to_dt(&self) -> String {
        let mut out = String::new();
        for f in &self.w {
            out.push_str(&format!("w: {f}\n"));
        }
        for r in &self.d {
            out.push_str(&format!(
                "d: {} ; {} ; {}\n",
                r.prerequisite, r.justification, r.conclusion
            ));
        }
        out
    }

    pub fn check_basis(&self, basis: &Basis) -> Result<()> {
        for f in self.w.iter().chain(self.d.iter().flat_map(|r| r.parts())) {
            f.check_basis(basis)?;
        }
        Ok(())
    }
}

/// Strips a trailing `#` comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub(crate) fn parse_line_formula(text: &str, line: usize, mode: Mode, basis: &Basis) -> Result<Formula> {
    parse_formula(text, mode, basis).map_err(|e| Error::Format {
        line,
        msg: e.to_string(),
    })
}

/// Parses the `.dt` format: `w: <formula>` and `d: <alpha> ; <beta> ; <gamma>` lines.
pub fn parse_default_theory(text: &str, basis: &Basis) -> Result<DefaultTheory> {
    let mut theory = DefaultTheory::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let (tag, rest) = content.split_once(':').ok_or_else(|| Error::Format {
            line,
            msg: "expected `w:` or `d:`".into(),
        })?;
        match tag.trim() {
            "w" => theory.w.push(parse_line_formula(rest, line, Mode::Prop, basis)?),
            "d" => {
                let parts: Vec<&str> = rest.split(';').collect();
                if parts.len() != 3 {
                    return Err(Error::Format {
                        line,
                        msg: format!("default needs three parts separated by `;`, found {}", parts.len()),
                    });
                }
                let mut fs = parts
                    .iter()
                    .map(|p| parse_line_formula(p, line, Mode::Prop, basis))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter();
                let (a, b, c) = (fs.next().unwrap(), fs.next().unwrap(), fs.next().unwrap());
                theory.d.push(DefaultRule::new(a, b, c));
            }
            other => {
                return Err(Error::Format {
                    line,
                    msg: format!("unknown line tag `{other}`"),
                })
            }
        }
    }
    Ok(theory)
}

/// Runs the stage construction relative to the candidate generating set.
///
/// With `C` the conclusions of `candidate`, a rule is applied once
/// `W ∪ concl(applied) ⊨ α` and `W ∪ C ⊭ ¬β`. Returns whether the applied
/// set at the fixpoint equals `candidate`, and that set.
pub fn stage_fixpoint(
    theory: &DefaultTheory,
    candidate: &BTreeSet<usize>,
    oracle: &dyn EntailmentOracle,
) -> Result<(bool, BTreeSet<usize>)> {
    if let Some(&bad) = candidate.iter().find(|&&i| i >= theory.d.len()) {
        return Err(Error::Invalid(format!("rule index {bad} out of range")));
    }
    let mut context = theory.w.clone();
    context.extend(candidate.iter().map(|&i| theory.d[i].conclusion.clone()));
    let mut justified = Vec::with_capacity(theory.d.len());
    for rule in &theory.d {
        let neg = Formula::not(rule.justification.clone());
        justified.push(!oracle.entails(&context, &neg)?);
    }

    let mut applied = BTreeSet::new();
    let mut known = theory.w.clone();
    loop {
        let mut grew = false;
        for (i, rule) in theory.d.iter().enumerate() {
            if applied.contains(&i) || !justified[i] {
                continue;
            }
            if oracle.entails(&known, &rule.prerequisite)? {
                applied.insert(i);
                known.push(rule.conclusion.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    Ok((applied == *candidate, applied))
}

/// All generating sets of stable extensions, as 0-based rule indices.
///
/// Candidates are visited in binary counting order with rule `i` as bit `i`.
pub fn extension_exists(
    theory: &DefaultTheory,
    oracle: &dyn EntailmentOracle,
    limits: &Limits,
) -> Result<(bool, Vec<BTreeSet<usize>>)> {
    let m = theory.d.len();
    if m > limits.dl_rules {
        return Err(Error::limit("default rules", limits.dl_rules, m));
    }
    let mut found = Vec::new();
    for mask in 0u64..1 << m {
        let candidate: BTreeSet<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if stage_fixpoint(theory, &candidate, oracle)?.0 {
            found.push(candidate);
        }
    }
    Ok((!found.is_empty(), found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twdp::{entailment_oracle, OracleKind};

    fn dt(s: &str) -> DefaultTheory {
        parse_default_theory(s, &Basis::default()).unwrap()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn parses_format() {
        let t = dt("# example\nw: r\n\nd: T ; p ; q  # trailing\n");
        assert_eq!(t.w.len(), 1);
        assert_eq!(t.d[0].to_string(), "T : p / q");
        assert_eq!(dt(""), DefaultTheory::default());
        let err = parse_default_theory("d: p ; q", &Basis::default()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }), "{err}");
        let err = parse_default_theory("w: r\nw: p &", &Basis::default()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn dt_roundtrip() {
        let t = dt("w: r -> s\nd: x1 ; !y1 ; F\nd: T ; p | q ; X3(a, b, c)");
        assert_eq!(dt(&t.to_dt()), t);
    }

    #[test]
    fn stage_examples() {
        let o = entailment_oracle(OracleKind::Brute);
        let t = dt("d: T ; p ; q");
        assert_eq!(stage_fixpoint(&t, &set(&[0]), o.as_ref()).unwrap(), (true, set(&[0])));
        let t = dt("d: T ; p ; !p");
        assert_eq!(stage_fixpoint(&t, &set(&[0]), o.as_ref()).unwrap(), (false, set(&[])));
        let t = dt("w: r");
        assert_eq!(stage_fixpoint(&t, &set(&[]), o.as_ref()).unwrap(), (true, set(&[])));
    }

    #[test]
    fn existence_examples() {
        let o = entailment_oracle(OracleKind::Brute);
        let l = Limits::default();
        assert_eq!(
            extension_exists(&dt("d: T ; p ; q"), o.as_ref(), &l).unwrap(),
            (true, vec![set(&[0])])
        );
        assert_eq!(
            extension_exists(&dt("d: T ; p ; !p"), o.as_ref(), &l).unwrap(),
            (false, vec![])
        );
        assert_eq!(
            extension_exists(&dt(""), o.as_ref(), &l).unwrap(),
            (true, vec![set(&[])])
        );
    }

    #[test]
    fn nixon_diamond_has_two_extensions() {
        let o = entailment_oracle(OracleKind::Brute);
        let t = dt("w: q & r\nd: q ; p ; p\nd: r ; !p ; !p");
        let (exists, ws) = extension_exists(&t, o.as_ref(), &Limits::default()).unwrap();
        assert!(exists);
        assert_eq!(ws, vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn ungrounded_candidate_is_rejected() {
        // {p} would be self-supporting; the stage construction never derives p.
        let o = entailment_oracle(OracleKind::Brute);
        let t = dt("d: p ; T ; p");
        let (exists, ws) = extension_exists(&t, o.as_ref(), &Limits::default()).unwrap();
        assert!(exists);
        assert_eq!(ws, vec![set(&[])]);
    }

    #[test]
    fn inconsistent_knowledge_base() {
        let o = entailment_oracle(OracleKind::Brute);
        let t = dt("w: F\nd: T ; p ; q");
        let (exists, ws) = extension_exists(&t, o.as_ref(), &Limits::default()).unwrap();
        assert!(exists);
        assert_eq!(ws, vec![set(&[])]);
    }

    #[test]
    fn rule_cap() {
        let o = entailment_oracle(OracleKind::Brute);
        let text = (0..21).map(|i| format!("d: T ; p{i} ; q{i}\n")).collect::<String>();
        let err = extension_exists(&dt(&text), o.as_ref(), &Limits::default()).unwrap_err();
        assert!(err.is_resource_limit());
    }
}
