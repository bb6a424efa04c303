//! Monadic second-order logic over relational structures.
//!
//! Text syntax, fully parenthesised as printed:
//!
//! ```text
//! true  false             constants
//! R(x,y)  R(x)            relation atoms
//! x = y                   equality of elements
//! x in X                  set membership
//! ~φ                      negation
//! (φ & ψ & …)  (φ | ψ | …)
//! (φ -> ψ)  (φ <-> ψ)  (φ ^ ψ)
//! E x. φ   A x. φ         element quantifiers
//! E X. φ   A X. φ         set quantifiers (variable starts upper-case)
//! ```
//!
//! A quantifier body extends as far right as possible. Identifiers are
//! `[A-Za-z_][A-Za-z0-9_']*`; relation names are identifiers followed by `(`.

mod eval;
mod paper;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use eval::{eval_mso, eval_mso_with, Env, EvalStats, Value};
pub use paper::{paper_formula, theta_assign, theta_struc, PaperFormula, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MsoFormula {
    True,
    False,
    Rel(String, Vec<String>),
    Eq(String, String),
    /// Element variable, set variable.
    In(String, String),
    Not(Box<MsoFormula>),
    And(Vec<MsoFormula>),
    Or(Vec<MsoFormula>),
    Imp(Box<MsoFormula>, Box<MsoFormula>),
    Iff(Box<MsoFormula>, Box<MsoFormula>),
    Xor(Box<MsoFormula>, Box<MsoFormula>),
    ExistsFo(String, Box<MsoFormula>),
    ForallFo(String, Box<MsoFormula>),
    ExistsSo(String, Box<MsoFormula>),
    ForallSo(String, Box<MsoFormula>),
}

/// Short constructors used by the formula builders.
pub mod build {
    use super::MsoFormula;

    pub fn rel(name: &str, args: &[&str]) -> MsoFormula {
        MsoFormula::Rel(name.to_string(), args.iter().map(|a| a.to_string()).collect())
    }

    pub fn eq(x: &str, y: &str) -> MsoFormula {
        MsoFormula::Eq(x.into(), y.into())
    }

    pub fn mem(x: &str, set: &str) -> MsoFormula {
        MsoFormula::In(x.into(), set.into())
    }

    pub fn not(f: MsoFormula) -> MsoFormula {
        MsoFormula::Not(Box::new(f))
    }

    /// Conjunction; the empty conjunction is `true`, a single conjunct is returned as is.
    pub fn and(mut fs: Vec<MsoFormula>) -> MsoFormula {
        match fs.len() {
            0 => MsoFormula::True,
            1 => fs.pop().unwrap(),
            _ => MsoFormula::And(fs),
        }
    }

    /// Disjunction; the empty disjunction is `false`.
    pub fn or(mut fs: Vec<MsoFormula>) -> MsoFormula {
        match fs.len() {
            0 => MsoFormula::False,
            1 => fs.pop().unwrap(),
            _ => MsoFormula::Or(fs),
        }
    }

    pub fn imp(a: MsoFormula, b: MsoFormula) -> MsoFormula {
        MsoFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: MsoFormula, b: MsoFormula) -> MsoFormula {
        MsoFormula::Iff(Box::new(a), Box::new(b))
    }

    pub fn xor(a: MsoFormula, b: MsoFormula) -> MsoFormula {
        MsoFormula::Xor(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, f: MsoFormula) -> MsoFormula {
        MsoFormula::ExistsFo(x.into(), Box::new(f))
    }

    pub fn forall(x: &str, f: MsoFormula) -> MsoFormula {
        MsoFormula::ForallFo(x.into(), Box::new(f))
    }

    pub fn exists_set(x: &str, f: MsoFormula) -> MsoFormula {
        MsoFormula::ExistsSo(x.into(), Box::new(f))
    }

    pub fn forall_set(x: &str, f: MsoFormula) -> MsoFormula {
        MsoFormula::ForallSo(x.into(), Box::new(f))
    }
}

impl MsoFormula {
    pub fn is_quantifier(&self) -> bool {
        matches!(
            self,
            MsoFormula::ExistsFo(..) | MsoFormula::ForallFo(..) | MsoFormula::ExistsSo(..) | MsoFormula::ForallSo(..)
        )
    }

    /// Free variables of either sort.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut add = |v: &String, bound: &Vec<&str>| {
            if !bound.contains(&v.as_str()) {
                out.insert(v.clone());
            }
        };
        match self {
            MsoFormula::True | MsoFormula::False => {}
            MsoFormula::Rel(_, args) => args.iter().for_each(|a| add(a, bound)),
            MsoFormula::Eq(a, b) | MsoFormula::In(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            MsoFormula::Not(f) => f.collect_free(bound, out),
            MsoFormula::And(fs) | MsoFormula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            MsoFormula::Imp(a, b) | MsoFormula::Iff(a, b) | MsoFormula::Xor(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            MsoFormula::ExistsFo(v, f)
            | MsoFormula::ForallFo(v, f)
            | MsoFormula::ExistsSo(v, f)
            | MsoFormula::ForallSo(v, f) => {
                bound.push(v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Maximum nesting of set quantifiers.
    pub fn so_depth(&self) -> usize {
        match self {
            MsoFormula::True | MsoFormula::False | MsoFormula::Rel(..) | MsoFormula::Eq(..) | MsoFormula::In(..) => 0,
            MsoFormula::Not(f) | MsoFormula::ExistsFo(_, f) | MsoFormula::ForallFo(_, f) => f.so_depth(),
            MsoFormula::ExistsSo(_, f) | MsoFormula::ForallSo(_, f) => 1 + f.so_depth(),
            MsoFormula::And(fs) | MsoFormula::Or(fs) => fs.iter().map(MsoFormula::so_depth).max().unwrap_or(0),
            MsoFormula::Imp(a, b) | MsoFormula::Iff(a, b) | MsoFormula::Xor(a, b) => a.so_depth().max(b.so_depth()),
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + match self {
            MsoFormula::True | MsoFormula::False | MsoFormula::Rel(..) | MsoFormula::Eq(..) | MsoFormula::In(..) => 0,
            MsoFormula::Not(f)
            | MsoFormula::ExistsFo(_, f)
            | MsoFormula::ForallFo(_, f)
            | MsoFormula::ExistsSo(_, f)
            | MsoFormula::ForallSo(_, f) => f.size(),
            MsoFormula::And(fs) | MsoFormula::Or(fs) => fs.iter().map(MsoFormula::size).sum(),
            MsoFormula::Imp(a, b) | MsoFormula::Iff(a, b) | MsoFormula::Xor(a, b) => a.size() + b.size(),
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_quantifier() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for MsoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, fs: &[MsoFormula], op: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                g.fmt_operand(f)?;
            }
            write!(f, ")")
        };
        match self {
            MsoFormula::True => write!(f, "true"),
            MsoFormula::False => write!(f, "false"),
            MsoFormula::Rel(r, args) => write!(f, "{r}({})", args.join(",")),
            MsoFormula::Eq(a, b) => write!(f, "{a} = {b}"),
            MsoFormula::In(a, b) => write!(f, "{a} in {b}"),
            MsoFormula::Not(g) => {
                write!(f, "~")?;
                g.fmt_operand(f)
            }
            MsoFormula::And(fs) => list(f, fs, "&"),
            MsoFormula::Or(fs) => list(f, fs, "|"),
            MsoFormula::Imp(a, b) => list(f, &[(**a).clone(), (**b).clone()], "->"),
            MsoFormula::Iff(a, b) => list(f, &[(**a).clone(), (**b).clone()], "<->"),
            MsoFormula::Xor(a, b) => list(f, &[(**a).clone(), (**b).clone()], "^"),
            MsoFormula::ExistsFo(v, g) | MsoFormula::ExistsSo(v, g) => write!(f, "E {v}. {g}"),
            MsoFormula::ForallFo(v, g) | MsoFormula::ForallSo(v, g) => write!(f, "A {v}. {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Tilde,
    And,
    Or,
    Imp,
    Iff,
    Xor,
    Eq,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '~' => Tok::Tilde,
            '&' => Tok::And,
            '|' => Tok::Or,
            '^' => Tok::Xor,
            '=' => Tok::Eq,
            '-' if text[i..].starts_with("->") => {
                i += 1;
                Tok::Imp
            }
            '<' if text[i..].starts_with("<->") => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn formula(&mut self) -> Result<MsoFormula> {
        let mut lhs = self.imp()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            lhs = build::iff(lhs, self.imp()?);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<MsoFormula> {
        let lhs = self.xor()?;
        if self.peek() == Some(&Tok::Imp) {
            self.pos += 1;
            return Ok(build::imp(lhs, self.imp()?));
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<MsoFormula> {
        let mut lhs = self.or()?;
        while self.peek() == Some(&Tok::Xor) {
            self.pos += 1;
            lhs = build::xor(lhs, self.or()?);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<MsoFormula> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            MsoFormula::Or(parts)
        })
    }

    fn and(&mut self) -> Result<MsoFormula> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            MsoFormula::And(parts)
        })
    }

    fn is_quantifier(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(q)) if q == "E" || q == "A")
            && matches!(self.peek_at(1), Some(Tok::Ident(_)))
            && self.peek_at(2) == Some(&Tok::Dot)
    }

    fn unary(&mut self) -> Result<MsoFormula> {
        if self.peek() == Some(&Tok::Tilde) {
            self.pos += 1;
            return Ok(build::not(self.unary()?));
        }
        if self.is_quantifier() {
            let q = self.ident()?;
            let v = self.ident()?;
            self.expect(Tok::Dot, "`.`")?;
            let body = Box::new(self.formula()?);
            let set = v.starts_with(|c: char| c.is_ascii_uppercase());
            return Ok(match (q.as_str(), set) {
                ("E", false) => MsoFormula::ExistsFo(v, body),
                ("A", false) => MsoFormula::ForallFo(v, body),
                ("E", true) => MsoFormula::ExistsSo(v, body),
                _ => MsoFormula::ForallSo(v, body),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<MsoFormula> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let f = self.formula()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        let name = self.ident()?;
        match (name.as_str(), self.peek()) {
            (_, Some(Tok::LParen)) => {
                self.pos += 1;
                let mut args = vec![self.ident()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.ident()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(MsoFormula::Rel(name, args))
            }
            (_, Some(Tok::Eq)) => {
                self.pos += 1;
                Ok(MsoFormula::Eq(name, self.ident()?))
            }
            (_, Some(Tok::Ident(kw))) if kw == "in" => {
                self.pos += 1;
                Ok(MsoFormula::In(name, self.ident()?))
            }
            ("true", _) => Ok(MsoFormula::True),
            ("false", _) => Ok(MsoFormula::False),
            _ => self.err("expected `(`, `=` or `in` after identifier"),
        }
    }
}

pub fn parse_mso(text: &str) -> Result<MsoFormula> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for MsoFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_mso(s)
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn parse_examples() {
        let f = parse_mso("E M. A x. x in M").unwrap();
        assert_eq!(f, exists_set("M", forall("x", mem("x", "M"))));
        let g = parse_mso("A x. (repr(x) -> E y. conn_or_1(x,y) & ~var(y))").unwrap();
        assert_eq!(
            g,
            forall(
                "x",
                imp(
                    rel("repr", &["x"]),
                    exists("y", and(vec![rel("conn_or_1", &["x", "y"]), not(rel("var", &["y"]))]))
                )
            )
        );
        assert!(parse_mso("A x.").is_err());
        assert!(parse_mso("R(x").is_err());
        assert!(parse_mso("x").is_err());
        assert!(parse_mso("true false").is_err());
    }

    #[test]
    fn display_round_trips() {
        let f = and(vec![
            not(exists("x", rel("L", &["x"]))),
            imp(forall_set("G'", mem("x", "G'")), xor(eq("x", "y"), MsoFormula::False)),
            iff(or(vec![MsoFormula::True, rel("p", &["x", "y"])]), not(mem("y", "X"))),
        ]);
        let text = f.to_string();
        assert_eq!(parse_mso(&text).unwrap(), f, "{text}");
    }

    #[test]
    fn free_vars_and_depth() {
        let f = parse_mso("E X. A Y. (x in X -> E z. R(z,y))").unwrap();
        assert_eq!(f.free_vars(), BTreeSet::from(["x".to_string(), "y".to_string()]));
        assert_eq!(f.so_depth(), 2);
    }
}
