//! Negation-normal-form modal mu-calculus formulas.
//!
//! Negation only appears on proposition atoms. Identifiers that start with an
//! underscore are reserved for marker propositions (`_P1`, `_P2`, ...), which
//! tag the nodes of an interface tuple.

mod annotate;
pub(crate) mod closure;
mod parser;
pub(crate) mod tracking;

use std::collections::BTreeSet;
use std::fmt;

pub use annotate::{annotate, check_consistent, default_var_sequence, AnnotatedFormula, Polarity, VarSequence};
pub use closure::{cl, cl_set, closure_at, sub, sub_plus, FormulaSet, IndexedFormula, Position};
pub use parser::{parse_closed, parse_formula};
pub use tracking::{
    canonicalize_markers, cl_p, profile_transform, pt_variants, shrink, substitute_markers, wrap_box, wrap_diamond,
    MarkerSubst,
};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bottom,
    Prop(String),
    NegProp(String),
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

/// Prefix used for marker propositions in serialized formulas.
pub const MARKER_PREFIX: char = '_';

/// The `i`-th (1-based) marker of the family `family`, e.g. `marker("P", 2) == "_P2"`.
pub fn marker(family: &str, i: usize) -> String {
    format!("{MARKER_PREFIX}{family}{i}")
}

/// The list `_P1.._Pk`.
pub fn markers(family: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| marker(family, i)).collect()
}

pub fn is_marker(name: &str) -> bool {
    name.starts_with(MARKER_PREFIX)
}

impl Formula {
    pub fn prop(name: &str) -> Self {
        Formula::Prop(name.to_string())
    }
    pub fn neg(name: &str) -> Self {
        Formula::NegProp(name.to_string())
    }
    pub fn var(name: &str) -> Self {
        Formula::Var(name.to_string())
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn diamond(a: Formula) -> Self {
        Formula::Diamond(Box::new(a))
    }
    pub fn boxed(a: Formula) -> Self {
        Formula::Box(Box::new(a))
    }
    pub fn mu(var: &str, body: Formula) -> Self {
        Formula::Mu(var.to_string(), Box::new(body))
    }
    pub fn nu(var: &str, body: Formula) -> Self {
        Formula::Nu(var.to_string(), Box::new(body))
    }

    /// Direct children in position order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::Diamond(a) | Formula::Box(a) | Formula::Mu(_, a) | Formula::Nu(_, a) => vec![a],
            _ => Vec::new(),
        }
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::Diamond(_) | Formula::Box(_))
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Formula::Mu(..) | Formula::Nu(..))
    }

    /// Number of `<>`/`[]` occurrences.
    pub fn modal_count(&self) -> usize {
        usize::from(self.is_modal()) + self.children().iter().map(|c| c.modal_count()).sum::<usize>()
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Formula::Mu(x, b) | Formula::Nu(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in f.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn ensure_closed(&self) -> Result<()> {
        match self.free_vars().into_iter().next() {
            Some(x) => Err(Error::UnboundVariable(x)),
            None => Ok(()),
        }
    }

    /// Proposition names (positive or negated), markers included.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(p) | Formula::NegProp(p) => {
                out.insert(p.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_props(out);
                }
            }
        }
    }

    pub fn mentions(&self, prop: &str) -> bool {
        match self {
            Formula::Prop(p) | Formula::NegProp(p) => p == prop,
            _ => self.children().iter().any(|c| c.mentions(prop)),
        }
    }

    pub fn has_markers(&self) -> bool {
        self.props().iter().any(|p| is_marker(p))
    }

    /// Replaces every free occurrence of `var` by `by`.
    pub fn substitute(&self, var: &str, by: &Formula) -> Formula {
        match self {
            Formula::Var(x) if x == var => by.clone(),
            Formula::Mu(x, _) | Formula::Nu(x, _) if x == var => self.clone(),
            _ => self.map_children(|c| c.substitute(var, by)),
        }
    }

    pub(crate) fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::And(a, b) => Formula::and(f(a), f(b)),
            Formula::Or(a, b) => Formula::or(f(a), f(b)),
            Formula::Diamond(a) => Formula::diamond(f(a)),
            Formula::Box(a) => Formula::boxed(f(a)),
            Formula::Mu(x, a) => Formula::Mu(x.clone(), Box::new(f(a))),
            Formula::Nu(x, a) => Formula::Nu(x.clone(), Box::new(f(a))),
            leaf => leaf.clone(),
        }
    }

    /// Subformula at a tree path, if any.
    pub fn at(&self, path: &[u8]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i as usize)?;
        }
        Some(cur)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(c: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match c {
                Formula::And(..) | Formula::Or(..) | Formula::Mu(..) | Formula::Nu(..) => write!(f, "({c})"),
                _ => write!(f, "{c}"),
            }
        }
        match self {
            Formula::Top => write!(f, "tt"),
            Formula::Bottom => write!(f, "ff"),
            Formula::Prop(p) | Formula::Var(p) => write!(f, "{p}"),
            Formula::NegProp(p) => write!(f, "!{p}"),
            Formula::And(a, b) => {
                operand(a, f)?;
                write!(f, " & ")?;
                operand(b, f)
            }
            Formula::Or(a, b) => {
                operand(a, f)?;
                write!(f, " | ")?;
                operand(b, f)
            }
            Formula::Diamond(a) => {
                write!(f, "<>")?;
                operand(a, f)
            }
            Formula::Box(a) => {
                write!(f, "[]")?;
                operand(a, f)
            }
            Formula::Mu(x, a) => write!(f, "mu {x}. {a}"),
            Formula::Nu(x, a) => write!(f, "nu {x}. {a}"),
        }
    }
}
