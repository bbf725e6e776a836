//! Indexed subformulas and the Fischer-Ladner style closure.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Formula;

/// Tree path from the root of a context formula (child indices).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }
    pub fn child(&self, i: u8) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

/// A subformula occurrence: equal only if both formula and position agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexedFormula {
    pub formula: Formula,
    pub position: Position,
}

/// Plain formula set (closure of a set of formulas drops positions).
pub type FormulaSet = BTreeSet<Formula>;

/// All non-variable subformula occurrences, in pre-order.
pub fn sub(phi: &Formula) -> Vec<IndexedFormula> {
    fn go(f: &Formula, pos: Position, out: &mut Vec<IndexedFormula>) {
        if !matches!(f, Formula::Var(_)) {
            out.push(IndexedFormula { formula: f.clone(), position: pos.clone() });
        }
        for (i, c) in f.children().into_iter().enumerate() {
            go(c, pos.child(i as u8), out);
        }
    }
    let mut out = Vec::new();
    go(phi, Position::root(), &mut out);
    out
}

pub fn sub_plus(phi: &Formula) -> Vec<IndexedFormula> {
    sub(phi).into_iter().filter(|o| o.position != Position::root()).collect()
}

/// Resolved view of the positions of a closed formula: variable occurrences
/// point at their binder, and every closure element is addressable by id.
#[derive(Clone, Debug)]
pub(crate) struct Positions {
    pub root: Formula,
    pub paths: Vec<Position>,
    pub index: HashMap<Position, usize>,
    /// Binder position id for every variable occurrence (keyed by its path).
    pub binder: HashMap<Position, usize>,
}

impl Positions {
    pub fn new(phi: &Formula) -> Self {
        let occurrences = sub(phi);
        let paths: Vec<Position> = occurrences.iter().map(|o| o.position.clone()).collect();
        let index: HashMap<Position, usize> = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut binder = HashMap::new();
        fn go(
            f: &Formula,
            pos: Position,
            scope: &mut Vec<(String, Position)>,
            index: &HashMap<Position, usize>,
            binder: &mut HashMap<Position, usize>,
        ) {
            match f {
                Formula::Var(x) => {
                    if let Some((_, b)) = scope.iter().rev().find(|(y, _)| y == x) {
                        binder.insert(pos, index[b]);
                    }
                }
                Formula::Mu(x, body) | Formula::Nu(x, body) => {
                    scope.push((x.clone(), pos.clone()));
                    go(body, pos.child(0), scope, index, binder);
                    scope.pop();
                }
                _ => {
                    for (i, c) in f.children().into_iter().enumerate() {
                        go(c, pos.child(i as u8), scope, index, binder);
                    }
                }
            }
        }
        go(phi, Position::root(), &mut Vec::new(), &index, &mut binder);
        Positions { root: phi.clone(), paths, index, binder }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn formula(&self, id: usize) -> &Formula {
        self.root.at(&self.paths[id].0).expect("position inside formula")
    }

    /// Game successor of a child path: a variable resolves to its binder.
    pub fn resolve(&self, path: &Position) -> usize {
        match self.index.get(path) {
            Some(&i) => i,
            None => self.binder[path],
        }
    }

    pub fn child_ids(&self, id: usize) -> Vec<usize> {
        let n = self.formula(id).children().len();
        (0..n).map(|i| self.resolve(&self.paths[id].child(i as u8))).collect()
    }

    /// Renders the closed formula at `id`, calling `on_node` on every rendered
    /// non-variable node with its origin id and the origin ids of the fixpoints
    /// enclosing it along the rendering (the node itself excluded). The hook
    /// may rewrite the rendered node.
    pub fn render_closed(&self, id: usize, on_node: &mut dyn FnMut(usize, &[usize], Formula) -> Formula) -> Formula {
        self.render_from(id, &self.paths[id].clone(), &mut Vec::new(), on_node)
    }

    fn render_from(
        &self,
        id: usize,
        render_root: &Position,
        enclosing: &mut Vec<usize>,
        on_node: &mut dyn FnMut(usize, &[usize], Formula) -> Formula,
    ) -> Formula {
        let f = self.formula(id);
        let fix = f.is_fixpoint();
        if fix {
            enclosing.push(id);
        }
        let mut kids = Vec::new();
        for i in 0..f.children().len() {
            let cpath = self.paths[id].child(i as u8);
            let rendered = match self.index.get(&cpath) {
                Some(&cid) => self.render_from(cid, render_root, enclosing, on_node),
                None => {
                    let b = self.binder[&cpath];
                    if render_root.is_prefix_of(&self.paths[b]) {
                        f.children()[i].clone()
                    } else {
                        let broot = self.paths[b].clone();
                        self.render_from(b, &broot, enclosing, on_node)
                    }
                }
            };
            kids.push(rendered);
        }
        if fix {
            enclosing.pop();
        }
        let mut it = kids.into_iter();
        let node = f.map_children(|_| it.next().expect("arity"));
        on_node(id, enclosing, node)
    }
}

/// Closes the occurrence by replacing free variables with their definitions.
pub fn closure_at(phi: &Formula, occ: &IndexedFormula) -> IndexedFormula {
    let pos = Positions::new(phi);
    let id = pos.index[&occ.position];
    IndexedFormula { formula: pos.render_closed(id, &mut |_, _, f| f), position: occ.position.clone() }
}

/// `CL(phi)`: the closure of every indexed subformula, positions kept.
pub fn cl(phi: &Formula) -> Vec<IndexedFormula> {
    let pos = Positions::new(phi);
    (0..pos.len())
        .map(|id| IndexedFormula { formula: pos.render_closed(id, &mut |_, _, f| f), position: pos.paths[id].clone() })
        .collect()
}

/// `CL(L)` for a set of formulas; positions dropped.
pub fn cl_set<'a>(ls: impl IntoIterator<Item = &'a Formula>) -> FormulaSet {
    ls.into_iter().flat_map(|f| cl(f).into_iter().map(|o| o.formula)).collect()
}
