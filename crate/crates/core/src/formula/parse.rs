//! Recursive-descent parser for the textual formula syntax.
//!
//! ```text
//! formula := iff ; iff := imp ('<->' imp)* ; imp := or ('->' imp)?
//! or := xor ('|' xor)* ; xor := and ('^' and)* ; and := unary ('&' unary)*
//! unary := '!' unary | 'L' unary | atom
//! atom := 'T' | 'F' | ident | '(' formula ')' | 'X3' '(' formula ',' formula ',' formula ')'
//! ident := [a-z][a-zA-Z0-9_]*
//! ```
//!
//! Binary operators other than `->` associate to the left. `#` starts a comment.

use super::{Basis, Connective, Formula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Prop,
    Ae,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    Belief,
    True,
    False,
    Xor3,
    Ident(String),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Xor,
    Imp,
    Iff,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Not => "`!`".into(),
        Tok::Belief => "`L`".into(),
        Tok::True => "`T`".into(),
        Tok::False => "`F`".into(),
        Tok::Xor3 => "`X3`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Xor => "`^`".into(),
        Tok::Imp => "`->`".into(),
        Tok::Iff => "`<->`".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'!' => out.push((start, Tok::Not)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b',' => out.push((start, Tok::Comma)),
            b'&' => out.push((start, Tok::And)),
            b'|' => out.push((start, Tok::Or)),
            b'^' => out.push((start, Tok::Xor)),
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Imp));
                i += 2;
                continue;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                out.push((start, Tok::Iff));
                i += 3;
                continue;
            }
            b'X' if bytes.get(i + 1) == Some(&b'3') => {
                out.push((start, Tok::Xor3));
                i += 2;
                continue;
            }
            b'L' => out.push((start, Tok::Belief)),
            b'T' => out.push((start, Tok::True)),
            b'F' => out.push((start, Tok::False)),
            b'a'..=b'z' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    mode: Mode,
    basis: &'a Basis,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let msg = msg.into();
        let msg = match self.peek() {
            None => format!("{msg}, found end of input"),
            Some(t) => format!("{msg}, found {}", describe(t)),
        };
        Error::Syntax {
            pos: self.offset(),
            msg,
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", describe(&t))))
        }
    }

    fn app(&self, c: Connective, args: Vec<Formula>) -> Result<Formula> {
        if !self.basis.contains(c) {
            return Err(Error::ConnectiveNotInBasis(c.name().to_string()));
        }
        Ok(Formula::App(c, args))
    }

    fn left_assoc(&mut self, op: Tok, c: Connective, next: fn(&mut Self) -> Result<Formula>) -> Result<Formula> {
        let mut lhs = next(self)?;
        while self.eat(&op) {
            let rhs = next(self)?;
            lhs = self.app(c, vec![lhs, rhs])?;
        }
        Ok(lhs)
    }

    fn iff(&mut self) -> Result<Formula> {
        self.left_assoc(Tok::Iff, Connective::Iff, Self::imp)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Imp) {
            let rhs = self.imp()?;
            return self.app(Connective::Imp, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        self.left_assoc(Tok::Or, Connective::Or, Self::xor)
    }

    fn xor(&mut self) -> Result<Formula> {
        self.left_assoc(Tok::Xor, Connective::Xor, Self::and)
    }

    fn and(&mut self) -> Result<Formula> {
        self.left_assoc(Tok::And, Connective::And, Self::unary)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                let inner = self.unary()?;
                self.app(Connective::Not, vec![inner])
            }
            Some(Tok::Belief) => {
                if self.mode == Mode::Prop {
                    return Err(Error::BeliefInPropositional);
                }
                self.pos += 1;
                Ok(Formula::believes(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::True) => {
                self.pos += 1;
                self.app(Connective::True, vec![])?;
                Ok(Formula::Const(true))
            }
            Some(Tok::False) => {
                self.pos += 1;
                self.app(Connective::False, vec![])?;
                Ok(Formula::Const(false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Formula::Var(name))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Xor3) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let a = self.iff()?;
                self.expect(Tok::Comma)?;
                let b = self.iff()?;
                self.expect(Tok::Comma)?;
                let c = self.iff()?;
                self.expect(Tok::RParen)?;
                self.app(Connective::Xor3, vec![a, b, c])
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

/// Parses one formula. In [`Mode::Prop`] the belief operator is rejected.
pub fn parse_formula(text: &str, mode: Mode, basis: &Basis) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        mode,
        basis,
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error("expected end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prop(s: &str) -> Result<Formula> {
        parse_formula(s, Mode::Prop, &Basis::default())
    }

    #[test]
    fn conjunction_with_negation() {
        let f = prop("p & !q").unwrap();
        assert_eq!(f, Formula::and(Formula::var("p"), Formula::not(Formula::var("q"))));
    }

    #[test]
    fn belief_binds_tighter_than_implication() {
        let f = parse_formula("L p -> p", Mode::Ae, &Basis::default()).unwrap();
        assert_eq!(f, Formula::imp(Formula::believes(Formula::var("p")), Formula::var("p")));
    }

    #[test]
    fn incomplete_input() {
        match prop("p &") {
            Err(Error::Syntax { pos, msg }) => {
                assert_eq!(pos, 3);
                assert!(msg.contains("end of input"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn belief_rejected_in_prop_mode() {
        assert_eq!(prop("L p"), Err(Error::BeliefInPropositional));
    }

    #[test]
    fn connective_outside_basis() {
        let basis = Basis::parse("or,not").unwrap();
        assert_eq!(
            parse_formula("p & q", Mode::Prop, &basis),
            Err(Error::ConnectiveNotInBasis("and".into()))
        );
        assert_eq!(
            parse_formula("T", Mode::Prop, &basis),
            Err(Error::ConnectiveNotInBasis("true".into()))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let f = prop("a | b & c -> d -> e <-> f ^ g").unwrap();
        assert_eq!(f.to_string(), "a | b & c -> d -> e <-> f ^ g");
        let g = prop("a -> b -> c").unwrap();
        assert_eq!(
            g,
            Formula::imp(Formula::var("a"), Formula::imp(Formula::var("b"), Formula::var("c")))
        );
        let h = prop("a & b & c").unwrap();
        assert_eq!(
            h,
            Formula::and(Formula::and(Formula::var("a"), Formula::var("b")), Formula::var("c"))
        );
    }

    #[test]
    fn ternary_parity_and_comments() {
        let f = prop("X3(x, y, !z) # trailing comment").unwrap();
        assert_eq!(
            f,
            Formula::xor3(Formula::var("x"), Formula::var("y"), Formula::not(Formula::var("z")))
        );
    }

    #[test]
    fn constants_and_idents() {
        assert_eq!(prop("T").unwrap(), Formula::Const(true));
        assert_eq!(prop("x_1A").unwrap(), Formula::var("x_1A"));
        assert!(prop("P").is_err());
        assert!(prop("").is_err());
        assert!(prop("(p").is_err());
        assert!(prop("p q").is_err());
    }

    pub(crate) fn arb_formula(ae: bool) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop_oneof![Just("p"), Just("q"), Just("r"), Just("x1")].prop_map(Formula::var),
            any::<bool>().prop_map(Formula::Const),
        ];
        leaf.prop_recursive(5, 40, 3, move |inner| {
            let mut options = vec![
                inner.clone().prop_map(Formula::not).boxed(),
                (inner.clone(), inner.clone(), 0..5usize)
                    .prop_map(|(a, b, k)| {
                        let c = [
                            Connective::And,
                            Connective::Or,
                            Connective::Imp,
                            Connective::Iff,
                            Connective::Xor,
                        ][k];
                        Formula::App(c, vec![a, b])
                    })
                    .boxed(),
                (inner.clone(), inner.clone(), inner.clone())
                    .prop_map(|(a, b, c)| Formula::xor3(a, b, c))
                    .boxed(),
            ];
            if ae {
                options.push(inner.prop_map(Formula::believes).boxed());
            }
            proptest::strategy::Union::new(options)
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(f in arb_formula(true)) {
            let printed = f.to_string();
            let back = parse_formula(&printed, Mode::Ae, &Basis::default()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn subformulae_bounded_by_nodes(f in arb_formula(true)) {
            let sf = f.subformulae();
            prop_assert!(sf.len() <= f.node_count());
            prop_assert_eq!(sf.last(), Some(&f));
        }
    }
}
