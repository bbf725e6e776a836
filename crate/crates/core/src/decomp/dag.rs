//! DAG decompositions, their nice normal form, and the driver over them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::glue::{glue, verdict, Ctx, Part};
use super::json::{bag_map, names, read_dag, write_dag, DagJson};
use super::{guard_of, violations_error, Dag, Validation, Violation};
use crate::error::{Error, Result};
use crate::formula::{annotate, check_consistent, Formula, VarSequence};
use crate::structures::Structure;

/// A DAG with a bag of structure nodes per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagDecomposition {
    pub dag: Dag,
    pub bags: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DagDecompJson {
    dag: DagJson,
    bags: BTreeMap<String, Vec<String>>,
}

impl DagDecomposition {
    pub fn from_json(g: &Structure, text: &str) -> Result<Self> {
        let j: DagDecompJson =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("dag decomposition: {e}")))?;
        let (dag, index) = read_dag(&j.dag)?;
        let bags = bag_map(g, &dag, &index, &j.bags)?;
        Ok(DagDecomposition { dag, bags })
    }

    pub fn to_json(&self, g: &Structure) -> serde_json::Value {
        let j = DagDecompJson {
            dag: write_dag(&self.dag),
            bags: (0..self.dag.len()).map(|d| (self.dag.names[d].clone(), names(g, &self.bags[d]))).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// `X_{⪰d}` for every node: the union of the bags reachable from it.
    pub fn cone(&self) -> Option<Vec<BTreeSet<usize>>> {
        let below = self.dag.below()?;
        Some(below.iter().map(|s| s.iter().flat_map(|&d| self.bags[d].iter().copied()).collect()).collect())
    }
}

/// Checks every condition of a DAG decomposition of `g`; returns the width.
///
/// Besides coverage, connectivity and edge guarding, each source's cone
/// must be closed under successors, so that the sources together describe
/// the whole structure.
pub fn validate_dag(g: &Structure, d: &DagDecomposition) -> Validation {
    let nd = d.dag.len();
    let name = |t: usize| d.dag.names[t].clone();
    if d.bags.len() != nd {
        return Err(vec![Violation::new("shape", ["bags do not match the DAG".to_string()])]);
    }
    let (Some(below), Some(cone)) = (d.dag.below(), d.cone()) else {
        return Err(vec![Violation::new("acyclic", ["the decomposition graph has a cycle".to_string()])]);
    };
    let mut bad = Vec::new();
    let covered: BTreeSet<usize> = d.bags.iter().flatten().copied().collect();
    let missing: Vec<String> = (0..g.len()).filter(|v| !covered.contains(v)).map(|v| g.id(v).to_string()).collect();
    if !missing.is_empty() {
        bad.push(Violation::new("bags cover the nodes", missing));
    }
    for a in 0..nd {
        for &c in &below[a] {
            let shared: BTreeSet<usize> = d.bags[a].intersection(&d.bags[c]).copied().collect();
            if shared.is_empty() {
                continue;
            }
            for b in (0..nd).filter(|&b| below[a].contains(&b) && below[b].contains(&c)) {
                let lost: BTreeSet<usize> = shared.difference(&d.bags[b]).copied().collect();
                if !lost.is_empty() {
                    bad.push(Violation::new(
                        "connectivity",
                        [name(a), name(b), name(c)].into_iter().chain(names(g, &lost)),
                    ));
                }
            }
        }
    }
    for &(a, b) in &d.dag.edges {
        let sep: BTreeSet<usize> = d.bags[a].intersection(&d.bags[b]).copied().collect();
        let w: BTreeSet<usize> = cone[b].difference(&d.bags[a]).copied().collect();
        let leak: BTreeSet<usize> = guard_of(g, &w).difference(&sep).copied().collect();
        if !leak.is_empty() {
            bad.push(Violation::new("edge guarding", [name(a), name(b)].into_iter().chain(names(g, &leak))));
        }
    }
    for r in d.dag.sources() {
        let leak = guard_of(g, &cone[r]);
        if !leak.is_empty() {
            bad.push(Violation::new("source cone is closed", std::iter::once(name(r)).chain(names(g, &leak))));
        }
    }
    if bad.is_empty() {
        Ok(d.width())
    } else {
        Err(bad)
    }
}

/// Unique source, at most two children, branch nodes equal to both
/// children, and unary steps adding or removing exactly one node.
pub fn is_nice(d: &DagDecomposition) -> bool {
    if d.dag.sources().len() != 1 {
        return false;
    }
    d.dag.children().iter().enumerate().all(|(p, ch)| match ch.as_slice() {
        [] => true,
        [c] => d.bags[p].symmetric_difference(&d.bags[*c]).count() == 1,
        [a, b] => d.bags[p] == d.bags[*a] && d.bags[p] == d.bags[*b],
        _ => false,
    })
}

struct Builder {
    dag: Dag,
    bags: Vec<BTreeSet<usize>>,
}

impl Builder {
    fn node(&mut self, bag: BTreeSet<usize>) -> usize {
        let n = self.dag.add_node(format!("n{}", self.dag.len()));
        self.bags.push(bag);
        n
    }

    /// Links `from` to `to` through single-node steps: forget first, then
    /// introduce, so no intermediate bag is larger than the ends.
    fn interpolate(&mut self, from: usize, to: usize) {
        let mut cur = from;
        let mut bag = self.bags[from].clone();
        let target = self.bags[to].clone();
        let drop: Vec<usize> = bag.difference(&target).copied().collect();
        let add: Vec<usize> = target.difference(&bag).copied().collect();
        let steps = drop.len() + add.len();
        let mut done = 0;
        for v in drop.into_iter().map(|v| (v, false)).chain(add.into_iter().map(|v| (v, true))) {
            done += 1;
            if done == steps {
                break;
            }
            if v.1 {
                bag.insert(v.0);
            } else {
                bag.remove(&v.0);
            }
            let n = self.node(bag.clone());
            self.dag.edges.push((cur, n));
            cur = n;
        }
        self.dag.edges.push((cur, to));
    }

    /// A copy of `me`'s bag leading to `k`, or `k` itself when equal.
    fn leg(&mut self, me: usize, k: usize) -> usize {
        if self.bags[k] == self.bags[me] {
            return k;
        }
        let copy = self.node(self.bags[me].clone());
        self.interpolate(copy, k);
        copy
    }

    /// Connects `me` to `kids`: one child by interpolation, several by a
    /// chain of binary branch nodes that all carry `me`'s bag.
    fn attach(&mut self, me: usize, kids: &[usize]) {
        match kids {
            [] => {}
            [k] => self.interpolate(me, *k),
            _ => {
                let mut at = me;
                for i in 0..kids.len() - 1 {
                    let left = self.leg(me, kids[i]);
                    let right =
                        if i + 2 == kids.len() { self.leg(me, kids[i + 1]) } else { self.node(self.bags[me].clone()) };
                    self.dag.edges.push((at, left));
                    self.dag.edges.push((at, right));
                    at = right;
                }
            }
        }
    }
}

/// The nice form of a valid decomposition, of equal width (an empty-bag
/// source is added when there are several sources).
pub fn nicefy(g: &Structure, d: &DagDecomposition) -> Result<DagDecomposition> {
    validate_dag(g, d).map_err(|vs| violations_error(&vs))?;
    // contract unary edges between equal bags
    let mut alias: Vec<usize> = (0..d.dag.len()).collect();
    let order = d.dag.bottom_up().expect("validated");
    let children = d.dag.children();
    for &p in &order {
        if let [c] = children[p].as_slice() {
            if d.bags[p] == d.bags[*c] {
                alias[p] = alias[*c];
            }
        }
    }
    let mut b = Builder { dag: Dag::default(), bags: Vec::new() };
    let mut image: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in &order {
        if alias[p] == p {
            image.insert(p, b.node(d.bags[p].clone()));
        }
    }
    let img = |x: usize, image: &BTreeMap<usize, usize>| image[&alias[x]];
    for &p in &order {
        if alias[p] != p {
            continue;
        }
        let me = image[&p];
        let kids: Vec<usize> = {
            let mut k: Vec<usize> = children[p].iter().map(|&c| img(c, &image)).collect();
            k.sort_unstable();
            k.dedup();
            k
        };
        b.attach(me, &kids);
    }
    let sources = b.dag.sources();
    if sources.len() > 1 {
        let s = b.node(BTreeSet::new());
        b.attach(s, &sources);
    }
    let out = DagDecomposition { dag: b.dag, bags: b.bags };
    validate_dag(g, &out).map_err(|vs| violations_error(&vs))?;
    Ok(out)
}

/// Decides `g, v0 ⊨ phi` over a DAG decomposition of `g`.
pub fn dag_modelcheck(g: &Structure, v0: usize, phi: &Formula, zs: &VarSequence, d: &DagDecomposition) -> Result<bool> {
    Ok(dag_modelcheck_stats(g, v0, phi, zs, d)?.0)
}

/// Like [`dag_modelcheck`], also returning the number of ptype entries
/// written to the table.
pub fn dag_modelcheck_stats(
    g: &Structure,
    v0: usize,
    phi: &Formula,
    zs: &VarSequence,
    d: &DagDecomposition,
) -> Result<(bool, usize)> {
    if v0 >= g.len() {
        return Err(Error::UnknownNode(format!("#{v0}")));
    }
    if !check_consistent(phi, zs) {
        return Err(Error::Inconsistent(phi.to_string()));
    }
    let ann = annotate(phi, zs)?;
    let nice = nicefy(g, d)?;
    let ctx = Ctx::new(g, &ann);
    let children = nice.dag.children();
    let mut table: Vec<Option<Part>> = vec![None; nice.dag.len()];
    let mut stored = 0;
    for t in nice.dag.bottom_up().expect("validated") {
        let mut explicit = nice.bags[t].clone();
        for &c in &children[t] {
            explicit.extend(nice.bags[c].iter().copied());
        }
        let parts: Vec<&Part> = children[t].iter().map(|&c| table[c].as_ref().expect("children first")).collect();
        let part = glue(&ctx, &explicit, &parts, nice.bags[t].iter().copied().collect())?;
        stored += part.size();
        table[t] = Some(part);
    }
    let root = nice.dag.sources()[0];
    let top = glue(&ctx, &nice.bags[root], &[table[root].as_ref().expect("filled")], Vec::new())?;
    Ok((verdict(&top, v0)?, stored))
}
