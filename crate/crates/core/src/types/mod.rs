//! Types: the closure formulas a node satisfies under a marker colouring,
//! and their composition across a directed separation.

mod compose;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula::{cl_p, cl_set, Formula, FormulaSet};
use crate::games::eval_set;
use crate::structures::{color, Structure};

pub use compose::{compose_right_type, compose_types, ptype_from_type, Composition, Target};

/// Largest closure universe a type computation accepts.
pub const CLOSURE_GUARD: usize = 1 << 16;

/// The set of closure formulas true at a node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MuType(pub BTreeSet<Formula>);

impl MuType {
    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains(f)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fails unless every member lies in `universe`.
    pub fn check_within(&self, universe: &FormulaSet) -> Result<()> {
        match self.0.iter().find(|f| !universe.contains(*f)) {
            Some(f) => Err(Error::WrongClosure(f.to_string())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for MuType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Types of a set of nodes over one shared closure universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTable {
    pub closure: Vec<Formula>,
    pub markers: Vec<String>,
    pub anchors: Vec<usize>,
    pub rows: BTreeMap<usize, MuType>,
}

impl TypeTable {
    /// JSON with the closure listing and one bitset string per node, bit `i`
    /// standing for `closure[i]`.
    pub fn to_json(&self, m: &Structure) -> Value {
        let types: serde_json::Map<String, Value> = self
            .rows
            .iter()
            .map(|(&v, t)| {
                let bits: String = self.closure.iter().map(|f| if t.contains(f) { '1' } else { '0' }).collect();
                (m.id(v).to_string(), Value::String(bits))
            })
            .collect();
        json!({
            "markers": self.markers,
            "anchors": self.anchors.iter().map(|&v| m.id(v)).collect::<Vec<_>>(),
            "closure": self.closure.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "types": types,
        })
    }
}

/// The marker-tracking closure of `ls`, refusing universes beyond the guard.
pub fn closure_universe(ls: &[Formula], ps: &[String]) -> Result<FormulaSet> {
    let bare = cl_set(ls.iter());
    let mut estimate: usize = 0;
    for f in &bare {
        let bits = f.modal_count().saturating_mul(ps.len());
        if bits >= 32 {
            return Err(Error::SizeGuard(format!("closure of {f} over {} markers", ps.len())));
        }
        estimate = estimate.saturating_add(1usize << bits);
    }
    if estimate > CLOSURE_GUARD {
        return Err(Error::SizeGuard(format!("closure universe of about {estimate} formulas exceeds {CLOSURE_GUARD}")));
    }
    Ok(cl_p(ls.iter(), ps))
}

/// Types of every node of `m` with the anchors `xs` coloured by `ps`.
pub fn compute_types(m: &Structure, xs: &[usize], ls: &[Formula], ps: &[String]) -> Result<TypeTable> {
    let universe = closure_universe(ls, ps)?;
    let colored = color(m, xs, ps)?.structure;
    let closure: Vec<Formula> = universe.into_iter().collect();
    let columns = crate::par::map(closure.iter().collect(), |f| eval_set(&colored, f));
    let rows = (0..m.len())
        .map(|v| {
            let t = closure.iter().zip(&columns).filter(|(_, col)| col[v]).map(|(f, _)| f.clone()).collect();
            (v, MuType(t))
        })
        .collect();
    Ok(TypeTable { closure, markers: ps.to_vec(), anchors: xs.to_vec(), rows })
}

/// The type of `v` in `m` with the anchors `xs` coloured by `ps`.
pub fn compute_type(m: &Structure, v: usize, xs: &[usize], ls: &[Formula], ps: &[String]) -> Result<MuType> {
    if v >= m.len() {
        return Err(Error::UnknownNode(format!("#{v}")));
    }
    let mut table = compute_types(m, xs, ls, ps)?;
    Ok(table.rows.remove(&v).unwrap_or_default())
}

/// Types over `qs` (anchored at `ys`, nodes of the left part) of every node
/// of `m`, computed by composition along the directed separation `sep`:
/// the right part only contributes the types of its nodes within itself.
pub fn compose_along(
    m: &Structure,
    sep: &crate::structures::Separation,
    ls: &[Formula],
    ps: &[String],
    qs: &[String],
    ys: &[usize],
) -> Result<BTreeMap<usize, MuType>> {
    if !sep.is_directed(m) {
        return Err(Error::InvalidSeparation("not a directed separation".into()));
    }
    let (m1, to1) = m.induced(&sep.left);
    let (m2, to2) = m.induced(&sep.right);
    let xs1: Vec<usize> = sep.interface.iter().map(|x| to1[x]).collect();
    let xs2: Vec<usize> = sep.interface.iter().map(|x| to2[x]).collect();
    let right = compute_types(&m2, &xs2, ls, ps)?;
    let interface_types: Vec<MuType> = xs2.iter().map(|x| right.rows[x].clone()).collect();
    let x: BTreeSet<usize> = sep.interface.iter().copied().collect();
    let cross_edges: Vec<(usize, MuType)> = m
        .edges()
        .filter(|(u, v)| sep.left.contains(u) && !x.contains(u) && !sep.left.contains(v))
        .map(|(u, v)| (to1[&u], right.rows[&to2[&v]].clone()))
        .collect();
    let targets = ys
        .iter()
        .map(|y| {
            to1.get(y)
                .map(|&v| Target::Node(v))
                .ok_or_else(|| Error::UnknownNode(format!("target {} outside the left part", m.id(*y))))
        })
        .collect::<Result<Vec<_>>>()?;
    let c = Composition {
        ls,
        ps,
        qs,
        m1: &m1,
        xs: &xs1,
        ys: &targets,
        interface_types: &interface_types,
        cross_edges: &cross_edges,
    };
    let table = compose_types(&c)?;
    let from1: BTreeMap<usize, usize> = to1.iter().map(|(&a, &b)| (b, a)).collect();
    let mut out: BTreeMap<usize, MuType> = table.rows.into_iter().map(|(v, t)| (from1[&v], t)).collect();
    for &w in sep.right.iter().filter(|w| !sep.left.contains(w)) {
        out.insert(w, compose_right_type(&c, &right.rows[&to2[&w]])?);
    }
    Ok(out)
}
