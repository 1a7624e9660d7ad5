//! Morphism expressions of the free compact closed category on a net.
//!
//! Text syntax:
//!
//! ```text
//! id(u)   sym(u|v)   cup(u)   cap(u)   t[u|v]   A ; B   A * B   (A)
//! ```
//!
//! `;` binds loosest and both operators associate to the left. Object
//! strings use the letter syntax of [`ObjString`], e.g. `a b^-1`.

use std::fmt;

use thiserror::Error;

use crate::algebra::{is_identifier, ObjString, PlaceId, SignedMultiset};
use crate::net::{Net, TransitionId};

/// The places and transition interfaces a term is checked against.
pub trait Signature {
    fn has_place(&self, place: &PlaceId) -> bool;

    /// `(input, output)` of a generator.
    fn interface(&self, t: &TransitionId) -> Option<(&SignedMultiset, &SignedMultiset)>;
}

impl Signature for Net {
    fn has_place(&self, place: &PlaceId) -> bool {
        Net::has_place(self, place)
    }

    fn interface(&self, t: &TransitionId) -> Option<(&SignedMultiset, &SignedMultiset)> {
        self.transition(t).ok().map(|tr| (&tr.input, &tr.output))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Id(ObjString),
    Sym(ObjString, ObjString),
    /// `I -> u dual(u)`
    Cup(ObjString),
    /// `u dual(u) -> I`
    Cap(ObjString),
    Gen(TransitionId, ObjString, ObjString),
    Comp(Box<Term>, Box<Term>),
    Tensor(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermType {
    pub dom: ObjString,
    pub cod: ObjString,
}

impl fmt::Display for TermType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] -> [{}]", self.dom, self.cod)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("TypeMismatch: cannot compose, left codomain is [{left_cod}] but right domain is [{right_dom}]")]
    TypeMismatch {
        left_cod: ObjString,
        right_dom: ObjString,
    },
    #[error("BadGenerator: {transition}: {reason}")]
    BadGenerator {
        transition: TransitionId,
        reason: String,
    },
    #[error("unknown place {0}")]
    UnknownPlace(PlaceId),
}

impl Term {
    pub fn id(u: ObjString) -> Term {
        Term::Id(u)
    }

    pub fn gen(t: impl Into<TransitionId>, u: ObjString, v: ObjString) -> Term {
        Term::Gen(t.into(), u, v)
    }

    pub fn comp(self, next: Term) -> Term {
        Term::Comp(Box::new(self), Box::new(next))
    }

    pub fn tensor(self, right: Term) -> Term {
        Term::Tensor(Box::new(self), Box::new(right))
    }

    /// Left-nested composite of a non-empty sequence.
    pub fn comp_all(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::comp)
    }

    pub fn tensor_all(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::tensor)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Term::Comp(a, b) | Term::Tensor(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Generator occurrences, left to right.
    pub fn generators(&self) -> Vec<&TransitionId> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators<'a>(&'a self, out: &mut Vec<&'a TransitionId>) {
        match self {
            Term::Gen(t, _, _) => out.push(t),
            Term::Comp(a, b) | Term::Tensor(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
            _ => {}
        }
    }

    pub fn typecheck(&self, sig: &dyn Signature) -> Result<TermType, TermError> {
        let check_places = |strings: &[&ObjString]| -> Result<(), TermError> {
            for s in strings {
                for l in s.iter() {
                    if !sig.has_place(&l.place) {
                        return Err(TermError::UnknownPlace(l.place.clone()));
                    }
                }
            }
            Ok(())
        };
        match self {
            Term::Id(u) => {
                check_places(&[u])?;
                Ok(TermType {
                    dom: u.clone(),
                    cod: u.clone(),
                })
            }
            Term::Sym(u, v) => {
                check_places(&[u, v])?;
                Ok(TermType {
                    dom: u.concat(v),
                    cod: v.concat(u),
                })
            }
            Term::Cup(u) => {
                check_places(&[u])?;
                Ok(TermType {
                    dom: ObjString::unit(),
                    cod: u.concat(&u.dual()),
                })
            }
            Term::Cap(u) => {
                check_places(&[u])?;
                Ok(TermType {
                    dom: u.concat(&u.dual()),
                    cod: ObjString::unit(),
                })
            }
            Term::Gen(t, u, v) => {
                let Some((input, output)) = sig.interface(t) else {
                    return Err(TermError::BadGenerator {
                        transition: t.clone(),
                        reason: "no such transition".into(),
                    });
                };
                check_places(&[u, v])?;
                for (side, s, m) in [("domain", u, input), ("codomain", v, output)] {
                    let got = s.multiplicity();
                    if &got != m {
                        return Err(TermError::BadGenerator {
                            transition: t.clone(),
                            reason: format!("{side} [{s}] has multiplicity {got}, expected {m}"),
                        });
                    }
                }
                Ok(TermType {
                    dom: u.clone(),
                    cod: v.clone(),
                })
            }
            Term::Comp(a, b) => {
                let ta = a.typecheck(sig)?;
                let tb = b.typecheck(sig)?;
                if ta.cod != tb.dom {
                    return Err(TermError::TypeMismatch {
                        left_cod: ta.cod,
                        right_dom: tb.dom,
                    });
                }
                Ok(TermType {
                    dom: ta.dom,
                    cod: tb.cod,
                })
            }
            Term::Tensor(a, b) => {
                let ta = a.typecheck(sig)?;
                let tb = b.typecheck(sig)?;
                Ok(TermType {
                    dom: ta.dom.concat(&tb.dom),
                    cod: ta.cod.concat(&tb.cod),
                })
            }
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Id(u) => write!(f, "id({u})"),
            Term::Sym(u, v) => write!(f, "sym({u}|{v})"),
            Term::Cup(u) => write!(f, "cup({u})"),
            Term::Cap(u) => write!(f, "cap({u})"),
            Term::Gen(t, u, v) => write!(f, "{t}[{u}|{v}]"),
            Term::Comp(a, b) => {
                write!(f, "{a} ; ")?;
                write_operand(f, b, matches!(**b, Term::Comp(..)))
            }
            Term::Tensor(a, b) => {
                write_operand(f, a, matches!(**a, Term::Comp(..)))?;
                f.write_str(" * ")?;
                write_operand(f, b, matches!(**b, Term::Comp(..) | Term::Tensor(..)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl std::str::FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let term = p.composite()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(term)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn composite(&mut self) -> Result<Term, ParseError> {
        let mut term = self.product()?;
        while self.eat(';') {
            term = term.comp(self.product()?);
        }
        Ok(term)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut term = self.atom()?;
        while self.eat('*') {
            term = term.tensor(self.atom()?);
        }
        Ok(term)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.eat('(') {
            let inner = self.composite()?;
            self.expect(')')?;
            return Ok(inner);
        }
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || "()[]|;*".contains(c))
            .unwrap_or(self.rest().len());
        let name = &self.src[start..start + len];
        if name.is_empty() {
            return Err(self.error("expected a term"));
        }
        self.pos += len;
        if self.eat('[') {
            if !is_identifier(name) {
                self.pos = start;
                return Err(self.error(format!("invalid transition name `{name}`")));
            }
            let u = self.string_until(&['|'])?;
            self.expect('|')?;
            let v = self.string_until(&[']'])?;
            self.expect(']')?;
            return Ok(Term::Gen(TransitionId::new(name), u, v));
        }
        let keyword_at = start;
        self.expect('(')?;
        let term = match name {
            "id" => Term::Id(self.string_until(&[')'])?),
            "cup" => Term::Cup(self.string_until(&[')'])?),
            "cap" => Term::Cap(self.string_until(&[')'])?),
            "sym" => {
                let u = self.string_until(&['|'])?;
                self.expect('|')?;
                Term::Sym(u, self.string_until(&[')'])?)
            }
            other => {
                self.pos = keyword_at;
                return Err(self.error(format!("unknown constructor `{other}`")));
            }
        };
        self.expect(')')?;
        Ok(term)
    }

    fn string_until(&mut self, stops: &[char]) -> Result<ObjString, ParseError> {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| stops.contains(&c) || "()[]|;*".contains(c))
            .unwrap_or(self.rest().len());
        let text = &self.src[start..start + len];
        let s = text
            .parse()
            .map_err(|e: crate::algebra::StringParseError| self.error(e.to_string()))?;
        self.pos += len;
        Ok(s)
    }
}
