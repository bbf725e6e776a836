use super::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Diamond,
    Box,
    Mu,
    Nu,
    Dot,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '!' | '~' => {
                i += 1;
                Tok::Not
            }
            '&' => {
                i += 1;
                Tok::And
            }
            '|' => {
                i += 1;
                Tok::Or
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '<' if text[i..].starts_with("<>") => {
                i += 2;
                Tok::Diamond
            }
            '[' if text[i..].starts_with("[]") => {
                i += 2;
                Tok::Box
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                    i += 1;
                }
                match &text[start..i] {
                    "tt" => Tok::Top,
                    "ff" => Tok::Bottom,
                    "mu" => Tok::Mu,
                    "nu" => Tok::Nu,
                    id => Tok::Ident(id.to_string()),
                }
            }
            other => {
                return Err(Error::Syntax { offset: i, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let message = match self.peek() {
            Tok::End => format!("{} at end of input", message.into()),
            _ => message.into(),
        };
        Err(Error::Syntax { offset: self.offset(), message })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.prefix()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.prefix()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Diamond => {
                self.bump();
                Ok(Formula::diamond(self.prefix()?))
            }
            Tok::Box => {
                self.bump();
                Ok(Formula::boxed(self.prefix()?))
            }
            Tok::Mu | Tok::Nu => {
                let least = self.bump() == Tok::Mu;
                let var = match self.bump() {
                    Tok::Ident(x) => x,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected fixpoint variable");
                    }
                };
                self.expect(Tok::Dot, "`.` after fixpoint variable")?;
                self.bound.push(var.clone());
                let body = self.disjunction();
                self.bound.pop();
                let body = Box::new(body?);
                Ok(if least { Formula::Mu(var, body) } else { Formula::Nu(var, body) })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bottom => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(if self.bound.contains(&x) { Formula::Var(x) } else { Formula::Prop(x) })
            }
            Tok::Not => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(x) if self.bound.contains(&x) => {
                        self.err(format!("negated fixpoint variable `{x}` is not in negation normal form"))
                    }
                    Tok::Ident(x) => {
                        self.bump();
                        Ok(Formula::NegProp(x))
                    }
                    _ => self.err("negation applies to propositions only"),
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.disjunction()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.err("expected a formula"),
        }
    }
}

/// Parses the concrete syntax. Identifiers bound by an enclosing `mu`/`nu` are
/// variables; every other identifier is a proposition.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, bound: Vec::new() };
    let f = p.disjunction()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

/// Like [`parse_formula`] but additionally rejects any identifier in
/// `variables` that is used without an enclosing binder.
pub fn parse_closed(text: &str, variables: &[&str]) -> Result<Formula> {
    let f = parse_formula(text)?;
    if let Some(v) = f.props().into_iter().find(|p| variables.contains(&p.as_str())) {
        return Err(Error::UnboundVariable(v));
    }
    Ok(f)
}
