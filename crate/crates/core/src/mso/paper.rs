//! The MSO sentences characterising satisfiability, implication, default
//! extensions and stable expansions.
//!
//! Each sentence comes in two variants. `AsPrinted` follows the reference
//! formulas symbol for symbol (bound variables are renamed where the literal
//! text would capture a parameter). `Corrected` repairs the parts that do not
//! express what they are meant to; the individual repairs are described on
//! the builders below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::build::{and, eq, exists, exists_set, forall, forall_set, iff, imp, mem, not, or, rel, xor};
use super::MsoFormula;
use crate::error::{Error, Result};
use crate::formula::{Basis, Connective};
use crate::structures::{
    conn_name, const_name, StructureKind, BELIEF, BELIEF_ARG, CONCL, DEFAULT, JUST, KB, PREM, REPR, REPR_CONC,
    REPR_PREM, VAR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaperFormula {
    Struc,
    Assign,
    Sat,
    Imp,
    Extension,
    FullExists,
}

impl PaperFormula {
    pub const ALL: [PaperFormula; 6] = [
        PaperFormula::Struc,
        PaperFormula::Assign,
        PaperFormula::Sat,
        PaperFormula::Imp,
        PaperFormula::Extension,
        PaperFormula::FullExists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PaperFormula::Struc => "struc",
            PaperFormula::Assign => "assign",
            PaperFormula::Sat => "sat",
            PaperFormula::Imp => "imp",
            PaperFormula::Extension => "extension",
            PaperFormula::FullExists => "full_exists",
        }
    }

    /// The structure kind the sentence is interpreted over.
    pub fn kind(self) -> StructureKind {
        match self {
            PaperFormula::Struc | PaperFormula::Assign | PaperFormula::Sat => StructureKind::Prop,
            PaperFormula::Imp => StructureKind::Imp,
            PaperFormula::Extension => StructureKind::Dl,
            PaperFormula::FullExists => StructureKind::Ae,
        }
    }
}

impl fmt::Display for PaperFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PaperFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<PaperFormula> {
        let s = s.replace('-', "_");
        PaperFormula::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AsPrinted,
    #[default]
    Corrected,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AsPrinted => "as_printed",
            Variant::Corrected => "corrected",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "as_printed" | "as-printed" => Ok(Variant::AsPrinted),
            "corrected" => Ok(Variant::Corrected),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// The sentence `name` over the vocabulary for `basis`. `Assign` is the open
/// formula `θ_assign(M)`.
pub fn paper_formula(name: PaperFormula, basis: &Basis, variant: Variant) -> MsoFormula {
    let kind = name.kind();
    match name {
        PaperFormula::Struc => theta_struc(basis, kind),
        PaperFormula::Assign => theta_assign(basis, "M"),
        PaperFormula::Sat => and(vec![
            theta_struc(basis, kind),
            exists_set("M", and(vec![theta_assign(basis, "M"), all_in(REPR, "M")])),
        ]),
        PaperFormula::Imp => and(vec![theta_struc(basis, kind), implies(basis)]),
        PaperFormula::Extension => {
            let dl = Dl {
                basis: basis.with(Connective::Not),
                variant,
            };
            and(vec![theta_struc(basis, kind), exists_set("G", dl.gd("G"))])
        }
        PaperFormula::FullExists => {
            let ae = Ae {
                basis: basis.with(Connective::Not),
                variant,
            };
            and(vec![theta_struc(basis, kind), exists_set("Lambda", ae.full("Lambda"))])
        }
    }
}

/// `∀x(rel(x) → x ∈ set)`.
fn all_in(relation: &str, set: &str) -> MsoFormula {
    forall("x", imp(rel(relation, &["x"]), mem("x", set)))
}

/// Well-formedness of the encoding: every element that is not a top-level
/// formula occurs as an argument, and every non-variable is a constant or
/// has exactly one argument per position of its connective.
///
/// Default-theory and autoepistemic structures also carry `¬`; rule elements
/// are exempt from both conjuncts, `¬Lφ` elements need not occur anywhere, and
/// `L` counts as a unary connective.
pub fn theta_struc(basis: &Basis, kind: StructureKind) -> MsoFormula {
    let basis = match kind {
        StructureKind::Dl | StructureKind::Ae => basis.with(Connective::Not),
        _ => basis.clone(),
    };
    let mut positions: Vec<(String, usize)> = basis
        .iter()
        .filter(|c| c.arity() > 0)
        .map(|c| (c.name().to_string(), c.arity()))
        .collect();
    if kind == StructureKind::Ae {
        positions.push((BELIEF.to_string(), 1));
    }
    let conn = |f: &str, i: usize| {
        if f == BELIEF {
            BELIEF_ARG.to_string()
        } else {
            conn_name(Connective::from_name(f).expect("basis connective"), i)
        }
    };

    let mut exempt = vec![not(rel(REPR, &["x"]))];
    match kind {
        StructureKind::Dl => exempt.push(not(rel(DEFAULT, &["x"]))),
        StructureKind::Ae => exempt.push(not(exists(
            "z",
            and(vec![rel(BELIEF, &["z"]), rel(&conn("not", 1), &["z", "x"])]),
        ))),
        _ => {}
    }
    let occurs = or(positions
        .iter()
        .flat_map(|(f, n)| (1..=*n).map(move |i| (f, i)))
        .map(|(f, i)| rel(&conn(f, i), &["x", "y"]))
        .collect());
    let first = forall(
        "x",
        imp(and(exempt), exists("y", and(vec![not(rel(VAR, &["y"])), occurs]))),
    );

    let constant = or(basis
        .iter()
        .filter(|c| c.arity() == 0)
        .map(|c| rel(&const_name(c), &["x"]))
        .collect());
    let unique_args = or(positions
        .iter()
        .map(|(f, n)| {
            and((1..=*n)
                .map(|i| {
                    let r = conn(f, i);
                    exists(
                        "y",
                        and(vec![
                            rel(&r, &["y", "x"]),
                            forall("z", imp(rel(&r, &["z", "x"]), eq("z", "y"))),
                        ]),
                    )
                })
                .collect())
        })
        .collect());
    let mut internal = vec![not(rel(VAR, &["x"]))];
    if kind == StructureKind::Dl {
        internal.push(not(rel(DEFAULT, &["x"])));
    }
    let second = forall("x", imp(and(internal), xor(constant, unique_args)));
    and(vec![first, second])
}

/// `M` is the set of subformulas made true by some assignment: constants
/// take their value and every connective node agrees with its arguments.
/// `L`-formulas are left unconstrained, like variables.
pub fn theta_assign(basis: &Basis, m: &str) -> MsoFormula {
    let n = basis.max_arity();
    let ys: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let mut clauses = Vec::new();
    for c in basis.iter().filter(|c| c.arity() == 0) {
        let value = if c.apply(&[]) {
            MsoFormula::True
        } else {
            MsoFormula::False
        };
        clauses.push(imp(rel(&const_name(c), &["x"]), iff(mem("x", m), value)));
    }
    for c in basis.iter().filter(|c| c.arity() > 0) {
        let args: Vec<MsoFormula> = ys[..c.arity()].iter().map(|y| mem(y, m)).collect();
        let linked = and((1..=c.arity())
            .map(|i| rel(&conn_name(c, i), &[ys[i - 1].as_str(), "x"]))
            .collect());
        clauses.push(imp(linked, iff(mem("x", m), apply(c, args))));
    }
    let mut body = and(clauses);
    for y in ys.iter().rev() {
        body = forall(y, body);
    }
    forall("x", body)
}

fn apply(c: Connective, mut args: Vec<MsoFormula>) -> MsoFormula {
    let mut next = || args.remove(0);
    match c {
        Connective::Not => not(next()),
        Connective::And => and(vec![next(), next()]),
        Connective::Or => or(vec![next(), next()]),
        Connective::Imp => imp(next(), next()),
        Connective::Iff => iff(next(), next()),
        Connective::Xor => xor(next(), next()),
        Connective::Xor3 => {
            let (a, b, c) = (next(), next(), next());
            xor(xor(a, b), c)
        }
        Connective::True => MsoFormula::True,
        Connective::False => MsoFormula::False,
    }
}

/// `∀M((θ_assign(M) ∧ θ_premise(M)) → θ_conclusion(M))`. The printed
/// `θ_conclusion` has an extra closing parenthesis; dropping it leaves one
/// reading, so both variants agree.
fn implies(basis: &Basis) -> MsoFormula {
    forall_set(
        "M",
        imp(
            and(vec![theta_assign(basis, "M"), all_in(REPR_PREM, "M")]),
            all_in(REPR_CONC, "M"),
        ),
    )
}

struct Dl {
    basis: Basis,
    variant: Variant,
}

impl Dl {
    fn assign(&self, m: &str) -> MsoFormula {
        theta_assign(&self.basis, m)
    }

    /// `φ̄` is equivalent to `¬φ` (`θ_struc` included as printed).
    fn isneg(&self, phi: &str, neg: &str) -> MsoFormula {
        and(vec![
            theta_struc(&self.basis, StructureKind::Dl),
            forall_set("M", imp(self.assign("M"), iff(mem(phi, "M"), not(mem(neg, "M"))))),
        ])
    }

    /// `χ(C, M, x) = (kb(x) ∨ C(x)) → M(x)`.
    fn chi(c: &str, m: &str, x: &str) -> MsoFormula {
        imp(or(vec![rel(KB, &[x]), mem(x, c)]), mem(x, m))
    }

    /// `W ∪ C ⊨ α`. As printed the `∀x` covers the implication, which makes
    /// it hold whenever a single element violates `χ`; corrected, `∀x χ` is
    /// the hypothesis.
    fn entails(&self, c: &str, alpha: &str) -> MsoFormula {
        let body = match self.variant {
            Variant::AsPrinted => forall("x", imp(Self::chi(c, "M", "x"), mem(alpha, "M"))),
            Variant::Corrected => imp(forall("x", Self::chi(c, "M", "x")), mem(alpha, "M")),
        };
        forall_set("M", imp(self.assign("M"), body))
    }

    /// `W ∪ C ⊨ ¬β`. The printed `∃β̄∃M(θ_assign(M) → …)` is satisfied by any
    /// `M` that is not an assignment; corrected, `β̄` is a negation of `β`
    /// true in every model of `W ∪ C`.
    fn entails_neg(&self, c: &str, beta: &str) -> MsoFormula {
        match self.variant {
            Variant::AsPrinted => exists(
                "nb",
                exists_set(
                    "M",
                    imp(
                        self.assign("M"),
                        forall(
                            "x",
                            and(vec![Self::chi(c, "M", "x"), mem("nb", "M"), self.isneg(beta, "nb")]),
                        ),
                    ),
                ),
            ),
            Variant::Corrected => exists(
                "nb",
                and(vec![
                    self.isneg(beta, "nb"),
                    forall_set(
                        "M",
                        imp(
                            and(vec![self.assign("M"), forall("x", Self::chi(c, "M", "x"))]),
                            mem("nb", "M"),
                        ),
                    ),
                ]),
            ),
        }
    }

    /// `∀x(C(x) ↔ ∃y(G(y) ∧ concl(x, y)))`: `C` is the set of conclusions of `G`.
    fn conclusions(c: &str, g: &str) -> MsoFormula {
        forall(
            "x",
            iff(
                mem("x", c),
                exists("y", and(vec![mem("y", g), rel(CONCL, &["x", "y"])])),
            ),
        )
    }

    fn app(&self, d: &str, g: &str) -> MsoFormula {
        exists(
            "a",
            exists(
                "b",
                exists_set(
                    "C",
                    and(vec![
                        rel(PREM, &["a", d]),
                        rel(JUST, &["b", d]),
                        Self::conclusions("C", g),
                        self.entails("C", "a"),
                        not(self.entails_neg("C", "b")),
                    ]),
                ),
            ),
        )
    }

    /// As printed, `default(d) ∧ …` under `∀d` fails on every non-rule
    /// element; corrected to `default(d) → …`.
    fn stable(&self, g: &str) -> MsoFormula {
        let member = iff(mem("d", g), self.app("d", g));
        let body = match self.variant {
            Variant::AsPrinted => and(vec![rel(DEFAULT, &["d"]), member]),
            Variant::Corrected => imp(rel(DEFAULT, &["d"]), member),
        };
        forall("d", body)
    }

    /// Generating sets. As printed, a stable `G` must have no stable proper
    /// subset, which admits self-supporting sets: for `W = {x}` and
    /// `D = {x:¬p/p, p:p/p}` the set `{p:p/p}` is stable with no stable proper
    /// subset, yet there is no extension. Corrected, `G` must be grounded: every subset `G'`
    /// closed under applying rules of `G` whose prerequisite follows from
    /// `W ∪ concl(G')` contains `G`.
    fn gd(&self, g: &str) -> MsoFormula {
        let second = match self.variant {
            Variant::AsPrinted => forall_set(
                "H",
                imp(
                    and(vec![
                        forall("z", imp(mem("z", "H"), mem("z", g))),
                        exists("z", and(vec![mem("z", g), not(mem("z", "H"))])),
                    ]),
                    not(self.stable("H")),
                ),
            ),
            Variant::Corrected => {
                let within = forall("z", imp(rel(DEFAULT, &["z"]), imp(mem("z", "H"), mem("z", g))));
                let triggered = exists(
                    "a",
                    exists_set(
                        "C",
                        and(vec![
                            rel(PREM, &["a", "d"]),
                            Self::conclusions("C", "H"),
                            self.entails("C", "a"),
                        ]),
                    ),
                );
                let closed = forall(
                    "d",
                    imp(and(vec![rel(DEFAULT, &["d"]), mem("d", g), triggered]), mem("d", "H")),
                );
                let covers = forall("z", imp(rel(DEFAULT, &["z"]), imp(mem("z", g), mem("z", "H"))));
                forall_set("H", imp(and(vec![within, closed]), covers))
            }
        };
        and(vec![self.stable(g), second])
    }
}

struct Ae {
    basis: Basis,
    variant: Variant,
}

impl Ae {
    /// `Σ ∪ Λ ⊨ φ`, with the same scope repair as for default entailment.
    fn entails(&self, lambda: &str, phi: &str) -> MsoFormula {
        let hyp = imp(or(vec![rel(REPR, &["w"]), mem("w", lambda)]), mem("w", "M"));
        let body = match self.variant {
            Variant::AsPrinted => forall("w", imp(hyp, mem(phi, "M"))),
            Variant::Corrected => imp(forall("w", hyp), mem(phi, "M")),
        };
        forall_set("M", imp(theta_assign(&self.basis, "M"), body))
    }

    /// `Λ` is Σ-full. As printed, `Lφ ∈ Λ` is compared with `Σ ∪ Λ ⊨ Lφ`;
    /// corrected, with `Σ ∪ Λ ⊨ φ` for the argument `φ` of `Lφ`, and `Λ` is
    /// confined to `L`-formulas and their negations.
    fn full(&self, lambda: &str) -> MsoFormula {
        let neg = conn_name(Connective::Not, 1);
        let exactly_one = forall(
            "x",
            imp(
                rel(BELIEF, &["x"]),
                xor(
                    mem("x", lambda),
                    exists("y", and(vec![rel(&neg, &["x", "y"]), mem("y", lambda)])),
                ),
            ),
        );
        match self.variant {
            Variant::AsPrinted => and(vec![
                exactly_one,
                forall(
                    "x",
                    imp(rel(BELIEF, &["x"]), iff(mem("x", lambda), self.entails(lambda, "x"))),
                ),
            ]),
            Variant::Corrected => and(vec![
                exactly_one,
                forall(
                    "x",
                    imp(
                        rel(BELIEF, &["x"]),
                        iff(
                            mem("x", lambda),
                            exists("p", and(vec![rel(BELIEF_ARG, &["p", "x"]), self.entails(lambda, "p")])),
                        ),
                    ),
                ),
                forall(
                    "x",
                    imp(
                        mem("x", lambda),
                        or(vec![
                            rel(BELIEF, &["x"]),
                            exists("z", and(vec![rel(BELIEF, &["z"]), rel(&neg, &["z", "x"])])),
                        ]),
                    ),
                ),
            ]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ael::parse_ae_theory;
    use crate::dl::parse_default_theory;
    use crate::formula::{parse_formula, Mode};
    use crate::mso::{eval_mso, parse_mso, Env};
    use crate::structures::{build_ael_structure, build_dl_structure, build_imp_structure, build_prop_structure};

    fn prop(fs: &[&str], basis: &Basis) -> Vec<crate::formula::Formula> {
        fs.iter()
            .map(|f| parse_formula(f, Mode::Prop, basis).unwrap())
            .collect()
    }

    fn holds(s: &crate::structures::RelationalStructure, phi: &MsoFormula) -> bool {
        eval_mso(s, phi, &Env::new()).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for p in PaperFormula::ALL {
            assert_eq!(p.name().parse::<PaperFormula>().unwrap(), p);
        }
        assert_eq!("full-exists".parse::<PaperFormula>().unwrap(), PaperFormula::FullExists);
        assert_eq!("as-printed".parse::<Variant>().unwrap(), Variant::AsPrinted);
        assert!("nope".parse::<Variant>().is_err());
    }

    #[test]
    fn printed_text_parses_back() {
        let basis = Basis::default();
        for p in PaperFormula::ALL {
            for v in [Variant::AsPrinted, Variant::Corrected] {
                let f = paper_formula(p, &basis, v);
                assert_eq!(parse_mso(&f.to_string()).unwrap(), f, "{p} {v}");
            }
        }
    }

    #[test]
    fn sat_examples() {
        let basis = Basis::default();
        let sat = paper_formula(PaperFormula::Sat, &basis, Variant::Corrected);
        assert!(!holds(
            &build_prop_structure(&prop(&["p & !p"], &basis), &basis).unwrap(),
            &sat
        ));
        assert!(holds(
            &build_prop_structure(&prop(&["p | q"], &basis), &basis).unwrap(),
            &sat
        ));
        assert!(holds(&build_prop_structure(&[], &basis).unwrap(), &sat));
    }

    #[test]
    fn imp_examples() {
        let basis = Basis::default();
        let imp = paper_formula(PaperFormula::Imp, &basis, Variant::Corrected);
        let s = build_imp_structure(&prop(&["p", "p -> q"], &basis), &prop(&["q"], &basis), &basis).unwrap();
        assert!(holds(&s, &imp));
        let s = build_imp_structure(&prop(&["p | q"], &basis), &prop(&["q"], &basis), &basis).unwrap();
        assert!(!holds(&s, &imp));
    }

    #[test]
    fn extension_examples() {
        let basis = Basis::default();
        let ext = paper_formula(PaperFormula::Extension, &basis, Variant::Corrected);
        let has = |text: &str| {
            let t = parse_default_theory(text, &basis).unwrap();
            holds(&build_dl_structure(&t, &basis).unwrap(), &ext)
        };
        assert!(has("d: T ; p ; q"));
        assert!(!has("d: T ; p ; !p"));
        assert!(!has("w: x\nd: x ; !p ; p\nd: p ; p ; p"));
        assert!(has("d: T ; a ; a\nd: a ; b ; b"));
        assert!(has(""));
    }

    #[test]
    fn full_exists_examples() {
        let basis = Basis::parse("not,and,or,imp").unwrap();
        let full = paper_formula(PaperFormula::FullExists, &basis, Variant::Corrected);
        let has = |text: &str| {
            let t = parse_ae_theory(text, &basis).unwrap();
            holds(&build_ael_structure(&t, &basis).unwrap(), &full)
        };
        assert!(!has("!L p -> p"));
        assert!(has("L p -> p"));
        assert!(has("p"));
    }

    #[test]
    fn struc_holds_on_built_structures() {
        let basis = Basis::default();
        let s = build_prop_structure(&prop(&["(p ^ q) | T", "!p"], &basis), &basis).unwrap();
        assert!(holds(&s, &theta_struc(&basis, StructureKind::Prop)));
        let t = parse_default_theory("w: a\nd: a ; b ; c", &basis).unwrap();
        let s = build_dl_structure(&t, &basis).unwrap();
        assert!(holds(&s, &theta_struc(&basis, StructureKind::Dl)));
        let t = parse_ae_theory("L p | q", &basis).unwrap();
        let s = build_ael_structure(&t, &basis).unwrap();
        assert!(holds(&s, &theta_struc(&basis, StructureKind::Ae)));
    }
}
