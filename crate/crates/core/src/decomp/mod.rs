//! Kelly and DAG decompositions: validation, normalization and the
//! model-checking drivers built on them.

mod dag;
pub(crate) mod glue;
mod kelly;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structures::Structure;

pub use dag::{dag_modelcheck, dag_modelcheck_stats, is_nice, nicefy, validate_dag, DagDecomposition};
pub use kelly::{kelly_modelcheck, kelly_modelcheck_stats, root_kelly_at, validate_kelly, KellyDecomposition};
pub use search::{
    branch_dag, dag_from_order, kelly_from_order, min_width_order, order_width, shortcut_kelly, SEARCH_LIMIT,
};

/// The minimal set guarding `w`: successors of `w` outside it.
pub fn guard_of(g: &Structure, w: &BTreeSet<usize>) -> BTreeSet<usize> {
    w.iter().flat_map(|&u| g.succ(u).iter().copied()).filter(|v| !w.contains(v)).collect()
}

/// Whether `u` guards `w`.
pub fn guards(g: &Structure, u: &BTreeSet<usize>, w: &BTreeSet<usize>) -> bool {
    u.is_disjoint(w) && guard_of(g, w).is_subset(u)
}

/// A failed condition of a decomposition, with the offending items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: String,
    pub witnesses: Vec<String>,
}

impl Violation {
    fn new(condition: &str, witnesses: impl IntoIterator<Item = String>) -> Self {
        Violation { condition: condition.to_string(), witnesses: witnesses.into_iter().collect() }
    }
}

/// Outcome of validating a decomposition.
pub type Validation = std::result::Result<usize, Vec<Violation>>;

pub fn violations_error(vs: &[Violation]) -> Error {
    let text: Vec<String> = vs.iter().map(|v| format!("{} [{}]", v.condition, v.witnesses.join(", "))).collect();
    Error::InvalidDecomposition(text.join("; "))
}

/// The DAG underlying a decomposition, with named nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dag {
    pub names: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl Dag {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for &(a, b) in &self.edges {
            if !ch[a].contains(&b) {
                ch[a].push(b);
            }
        }
        ch
    }

    pub fn parents(&self) -> Vec<Vec<usize>> {
        let mut pa = vec![Vec::new(); self.len()];
        for &(a, b) in &self.edges {
            if !pa[b].contains(&a) {
                pa[b].push(a);
            }
        }
        pa
    }

    pub fn sources(&self) -> Vec<usize> {
        let pa = self.parents();
        (0..self.len()).filter(|&d| pa[d].is_empty()).collect()
    }

    /// Nodes with every child before its parents, or `None` on a cycle.
    pub fn bottom_up(&self) -> Option<Vec<usize>> {
        let ch = self.children();
        let mut out_deg: Vec<usize> = ch.iter().map(Vec::len).collect();
        let pa = self.parents();
        let mut ready: Vec<usize> = (0..self.len()).filter(|&d| out_deg[d] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(d) = ready.pop() {
            order.push(d);
            for &p in &pa[d] {
                out_deg[p] -= 1;
                if out_deg[p] == 0 {
                    ready.push(p);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    /// `below[d]`: every node reachable from `d`, including `d`.
    pub fn below(&self) -> Option<Vec<BTreeSet<usize>>> {
        let ch = self.children();
        let order = self.bottom_up()?;
        let mut below = vec![BTreeSet::new(); self.len()];
        for d in order {
            let mut s: BTreeSet<usize> = BTreeSet::from([d]);
            for &c in &ch[d] {
                s.extend(below[c].iter().copied());
            }
            below[d] = s;
        }
        Some(below)
    }

    fn check_edges(&self) -> Result<()> {
        match self.edges.iter().find(|(a, b)| *a >= self.len() || *b >= self.len()) {
            Some(e) => Err(Error::InvalidDecomposition(format!("edge {e:?} out of range"))),
            None => Ok(()),
        }
    }
}

/// JSON plumbing shared by the two formats.
pub(crate) mod json {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize)]
    pub struct DagJson {
        pub nodes: Vec<String>,
        #[serde(default)]
        pub edges: Vec<(String, String)>,
    }

    pub fn read_dag(d: &DagJson) -> Result<(Dag, BTreeMap<String, usize>)> {
        let mut dag = Dag::default();
        let mut index = BTreeMap::new();
        for n in &d.nodes {
            if index.insert(n.clone(), dag.add_node(n.clone())).is_some() {
                return Err(Error::Input(format!("duplicate decomposition node `{n}`")));
            }
        }
        for (a, b) in &d.edges {
            dag.edges.push((dag_index(&index, a)?, dag_index(&index, b)?));
        }
        dag.check_edges()?;
        Ok((dag, index))
    }

    pub fn write_dag(dag: &Dag) -> DagJson {
        DagJson {
            nodes: dag.names.clone(),
            edges: dag.edges.iter().map(|&(a, b)| (dag.names[a].clone(), dag.names[b].clone())).collect(),
        }
    }

    pub fn dag_index(index: &BTreeMap<String, usize>, name: &str) -> Result<usize> {
        index.get(name).copied().ok_or_else(|| Error::Input(format!("unknown decomposition node `{name}`")))
    }

    pub fn node_set(g: &Structure, ids: &[String]) -> Result<BTreeSet<usize>> {
        ids.iter().map(|s| g.node(s)).collect()
    }

    pub fn names(g: &Structure, s: &BTreeSet<usize>) -> Vec<String> {
        s.iter().map(|&v| g.id(v).to_string()).collect()
    }

    /// Per decomposition node, the structure nodes listed under its name.
    pub fn bag_map(
        g: &Structure,
        dag: &Dag,
        index: &BTreeMap<String, usize>,
        m: &BTreeMap<String, Vec<String>>,
    ) -> Result<Vec<BTreeSet<usize>>> {
        let mut out = vec![BTreeSet::new(); dag.len()];
        for (name, ids) in m {
            out[dag_index(index, name)?] = node_set(g, ids)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
