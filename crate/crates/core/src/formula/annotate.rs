//! Variable sequences, consistency and priority annotation.

use serde::{Deserialize, Serialize};

use super::{Formula, IndexedFormula};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Mu,
    Nu,
}

/// Ordered fixpoint variables `Z_1..Z_n` with a fixed polarity each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarSequence {
    pub vars: Vec<(String, Polarity)>,
}

impl VarSequence {
    pub fn new(vars: Vec<(String, Polarity)>) -> Result<Self> {
        for (i, (x, _)) in vars.iter().enumerate() {
            if vars[..i].iter().any(|(y, _)| y == x) {
                return Err(Error::Input(format!("variable `{x}` listed twice")));
            }
        }
        Ok(VarSequence { vars })
    }

    pub fn empty() -> Self {
        VarSequence { vars: Vec::new() }
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|(x, _)| x == var)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Reorders the binders of `phi` according to the names in `order`
    /// (e.g. from `--vars "X,Y"`), taking each polarity from the formula.
    pub fn from_names(phi: &Formula, order: &[&str]) -> Result<Self> {
        let found = default_var_sequence(phi)?;
        let mut vars = Vec::new();
        for name in order {
            let pol = found
                .vars
                .iter()
                .find(|(x, _)| x == name)
                .map(|(_, p)| *p)
                .ok_or_else(|| Error::Input(format!("variable `{name}` is not bound in the formula")))?;
            vars.push((name.to_string(), pol));
        }
        VarSequence::new(vars)
    }
}

fn binders(f: &Formula, out: &mut Vec<(String, Polarity)>) {
    match f {
        Formula::Mu(x, _) => out.push((x.clone(), Polarity::Mu)),
        Formula::Nu(x, _) => out.push((x.clone(), Polarity::Nu)),
        _ => {}
    }
    for c in f.children() {
        binders(c, out);
    }
}

/// Variables in order of first binding, with the polarity of that binding.
pub fn default_var_sequence(phi: &Formula) -> Result<VarSequence> {
    let mut all = Vec::new();
    binders(phi, &mut all);
    let mut vars: Vec<(String, Polarity)> = Vec::new();
    for (x, p) in all {
        match vars.iter().find(|(y, _)| *y == x) {
            Some((_, q)) if *q != p => {
                return Err(Error::Inconsistent(format!("`{x}` is bound by both mu and nu")));
            }
            Some(_) => {}
            None => vars.push((x, p)),
        }
    }
    Ok(VarSequence { vars })
}

fn consistency_violation(phi: &Formula, zs: &VarSequence) -> Option<String> {
    let mut all = Vec::new();
    binders(phi, &mut all);
    for (x, p) in &all {
        match zs.vars.iter().find(|(y, _)| y == x) {
            None => return Some(format!("`{x}` is not in the variable sequence")),
            Some((_, q)) if q != p => return Some(format!("`{x}` is bound with the wrong polarity")),
            _ => {}
        }
    }
    fn fix_scan(f: &Formula, zs: &VarSequence) -> Option<String> {
        if let Formula::Mu(x, _) | Formula::Nu(x, _) = f {
            let j = zs.index_of(x)?;
            for y in f.free_vars() {
                match zs.index_of(&y) {
                    Some(i) if i < j => {}
                    _ => return Some(format!("`{y}` occurs free under the binder of `{x}` but is not earlier")),
                }
            }
        }
        f.children().into_iter().find_map(|c| fix_scan(c, zs))
    }
    fix_scan(phi, zs)
}

/// True iff every binder of `phi` is a listed variable of matching polarity
/// and free variables inside a binder of `Z_j` are all some `Z_i` with `i < j`.
pub fn check_consistent(phi: &Formula, zs: &VarSequence) -> bool {
    consistency_violation(phi, zs).is_none()
}

/// Formula with a priority for each listed variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedFormula {
    pub formula: Formula,
    pub varseq: VarSequence,
    pub priorities: Vec<u32>,
    pub max_priority: u32,
}

/// Smallest strictly increasing priorities with odd values exactly on mu-variables.
pub fn annotate(phi: &Formula, zs: &VarSequence) -> Result<AnnotatedFormula> {
    if let Some(why) = consistency_violation(phi, zs) {
        return Err(Error::Inconsistent(why));
    }
    phi.ensure_closed()?;
    let mut priorities = Vec::with_capacity(zs.len());
    let mut next = 0u32;
    for (_, pol) in &zs.vars {
        let want_odd = *pol == Polarity::Mu;
        if (next % 2 == 1) != want_odd {
            next += 1;
        }
        priorities.push(next);
        next += 1;
    }
    let max_priority = priorities.last().copied().unwrap_or(0);
    Ok(AnnotatedFormula { formula: phi.clone(), varseq: zs.clone(), priorities, max_priority })
}

impl AnnotatedFormula {
    /// Annotates another formula (e.g. a closure element) under the same sequence.
    pub fn reannotate(&self, psi: &Formula) -> Result<AnnotatedFormula> {
        let mut a = annotate(psi, &self.varseq)?;
        a.max_priority = self.max_priority;
        Ok(a)
    }

    pub fn priority_of(&self, var: &str) -> Option<u32> {
        self.varseq.index_of(var).map(|i| self.priorities[i])
    }

    /// Priority of a game node labelled by `f`.
    pub fn node_priority(&self, f: &Formula) -> u32 {
        match f {
            Formula::Mu(x, _) | Formula::Nu(x, _) => self.priority_of(x).unwrap_or(self.max_priority),
            _ => self.max_priority,
        }
    }

    /// Distinct priorities a game for this formula can use.
    pub fn priority_values(&self) -> Vec<u32> {
        let mut v = self.priorities.clone();
        v.push(self.max_priority);
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Minimum priority of the fixpoints enclosing `chi` inside `psi` (the
    /// node at `chi`'s position counts when it is itself a fixpoint);
    /// `max_priority` when there is none.
    pub fn prio(&self, psi: &IndexedFormula, chi: &IndexedFormula) -> u32 {
        let mut cur = &psi.formula;
        let mut best = self.node_priority(cur);
        for &i in &chi.position.0 {
            cur = cur.children()[i as usize];
            best = best.min(self.node_priority(cur));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Position};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn seq(v: &[(&str, Polarity)]) -> VarSequence {
        VarSequence::new(v.iter().map(|(x, p)| (x.to_string(), *p)).collect()).unwrap()
    }

    #[test]
    fn consistency_examples() {
        let phi = p("mu X. nu Y. <>X | <>Y");
        assert!(check_consistent(&phi, &seq(&[("X", Polarity::Mu), ("Y", Polarity::Nu)])));
        assert!(!check_consistent(&phi, &seq(&[("Y", Polarity::Nu), ("X", Polarity::Mu)])));
        let mixed = p("(mu X. <>X) | (nu X. []X)");
        assert!(!check_consistent(&mixed, &seq(&[("X", Polarity::Mu)])));
        assert!(default_var_sequence(&mixed).is_err());
    }

    #[test]
    fn greedy_priorities() {
        let phi = p("mu X. nu Y. <>X | <>Y");
        let a = annotate(&phi, &seq(&[("X", Polarity::Mu), ("Y", Polarity::Nu)])).unwrap();
        assert_eq!(a.priorities, vec![1, 2]);
        assert_eq!(a.max_priority, 2);
        let a = annotate(&p("nu Y. <>Y"), &seq(&[("Y", Polarity::Nu)])).unwrap();
        assert_eq!(a.priorities, vec![0]);
        let a = annotate(&Formula::Top, &VarSequence::empty()).unwrap();
        assert!(a.priorities.is_empty());
        assert_eq!(a.max_priority, 0);
    }

    #[test]
    fn annotate_rejects_inconsistent() {
        let phi = p("mu X. nu Y. <>X | <>Y");
        assert!(matches!(
            annotate(&phi, &seq(&[("Y", Polarity::Nu), ("X", Polarity::Mu)])),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn prio_examples() {
        let phi = p("mu X. nu Y. <>X | <>Y");
        let a = annotate(&phi, &seq(&[("X", Polarity::Mu), ("Y", Polarity::Nu)])).unwrap();
        let root = IndexedFormula { formula: phi.clone(), position: Position::root() };
        let dx = IndexedFormula { formula: Formula::diamond(Formula::var("X")), position: Position(vec![0, 0, 0]) };
        assert_eq!(a.prio(&root, &dx), 1);

        let psi = IndexedFormula { formula: p("<>(mu X. <>X)"), position: Position(vec![0]) };
        let me = IndexedFormula { formula: psi.formula.clone(), position: Position::root() };
        let b = annotate(&p("mu X. <>X"), &seq(&[("X", Polarity::Mu)])).unwrap();
        assert_eq!(b.prio(&psi, &me), b.max_priority);

        let psi = IndexedFormula { formula: p("nu Y. <>(mu X. nu Y. <>X | <>Y) | <>Y"), position: Position(vec![0]) };
        // innermost <>Y: nuY(root) . or . diamond . muX . nuY . or . <>Y
        let chi =
            IndexedFormula { formula: Formula::diamond(Formula::var("Y")), position: Position(vec![0, 0, 0, 0, 0, 1]) };
        assert_eq!(psi.formula.at(&chi.position.0), Some(&Formula::diamond(Formula::var("Y"))));
        assert_eq!(a.prio(&psi, &chi), 1);
    }
}
