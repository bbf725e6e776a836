//! Kelly decompositions and the model-checking driver over them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::glue::{glue, verdict, Ctx, Part};
use super::json::{bag_map, dag_index, names, read_dag, write_dag, DagJson};
use super::{guard_of, violations_error, Dag, Validation, Violation};
use crate::error::{Error, Result};
use crate::formula::{annotate, check_consistent, Formula, VarSequence};
use crate::structures::Structure;

/// A DAG with a bag `beta` and a guard `gamma` per node, plus the child and
/// root orders witnessing the ordering conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KellyDecomposition {
    pub dag: Dag,
    pub beta: Vec<BTreeSet<usize>>,
    pub gamma: Vec<BTreeSet<usize>>,
    pub child_order: Vec<Vec<usize>>,
    pub root_order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct KellyJson {
    dag: DagJson,
    beta: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    gamma: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    child_order: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    root_order: Vec<String>,
}

impl KellyDecomposition {
    /// Reads the JSON format. Missing child or root orders are searched for
    /// (up to 8 children per node).
    pub fn from_json(g: &Structure, text: &str) -> Result<Self> {
        let j: KellyJson = serde_json::from_str(text).map_err(|e| Error::Input(format!("kelly decomposition: {e}")))?;
        let (dag, index) = read_dag(&j.dag)?;
        let beta = bag_map(g, &dag, &index, &j.beta)?;
        let gamma = bag_map(g, &dag, &index, &j.gamma)?;
        let mut child_order: Vec<Vec<usize>> = dag.children();
        let mut given = vec![false; dag.len()];
        for (name, kids) in &j.child_order {
            let d = dag_index(&index, name)?;
            child_order[d] = kids.iter().map(|k| dag_index(&index, k)).collect::<Result<_>>()?;
            given[d] = true;
        }
        let root_order: Vec<usize> = j.root_order.iter().map(|k| dag_index(&index, k)).collect::<Result<_>>()?;
        let mut d = KellyDecomposition { dag, beta, gamma, child_order, root_order };
        let roots_given = !j.root_order.is_empty();
        d.complete_orders(&given, roots_given)?;
        Ok(d)
    }

    pub fn to_json(&self, g: &Structure) -> serde_json::Value {
        let n = |d: usize| self.dag.names[d].clone();
        let j = KellyJson {
            dag: write_dag(&self.dag),
            beta: (0..self.dag.len()).map(|d| (n(d), names(g, &self.beta[d]))).collect(),
            gamma: (0..self.dag.len()).map(|d| (n(d), names(g, &self.gamma[d]))).collect(),
            child_order: (0..self.dag.len())
                .filter(|&d| !self.child_order[d].is_empty())
                .map(|d| (n(d), self.child_order[d].iter().map(|&c| n(c)).collect()))
                .collect(),
            root_order: self.root_order.iter().map(|&r| n(r)).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn width(&self) -> usize {
        (0..self.dag.len()).map(|d| self.beta[d].union(&self.gamma[d]).count()).max().unwrap_or(0)
    }

    /// `B↓_t` for every node: the union of `beta` below it.
    pub fn down(&self) -> Option<Vec<BTreeSet<usize>>> {
        let below = self.dag.below()?;
        Some(below.iter().map(|s| s.iter().flat_map(|&d| self.beta[d].iter().copied()).collect()).collect())
    }

    fn complete_orders(&mut self, given: &[bool], roots_given: bool) -> Result<()> {
        let Some(down) = self.down() else {
            return Ok(()); // reported by validation
        };
        for (s, &fixed) in given.iter().enumerate() {
            if fixed || self.child_order[s].len() < 2 {
                continue;
            }
            let base: BTreeSet<usize> = self.beta[s].union(&self.gamma[s]).copied().collect();
            if let Some(order) = find_order(&self.child_order[s], &base, &self.gamma, &down)? {
                self.child_order[s] = order;
            }
        }
        if !roots_given {
            let roots = self.dag.sources();
            self.root_order = find_order(&roots, &BTreeSet::new(), &self.gamma, &down)?.unwrap_or(roots);
        }
        Ok(())
    }
}

fn order_ok(order: &[usize], base: &BTreeSet<usize>, gamma: &[BTreeSet<usize>], down: &[BTreeSet<usize>]) -> bool {
    let mut seen = base.clone();
    for &t in order {
        if !gamma[t].is_subset(&seen) {
            return false;
        }
        seen.extend(down[t].iter().copied());
    }
    true
}

fn find_order(
    items: &[usize],
    base: &BTreeSet<usize>,
    gamma: &[BTreeSet<usize>],
    down: &[BTreeSet<usize>],
) -> Result<Option<Vec<usize>>> {
    if order_ok(items, base, gamma, down) {
        return Ok(Some(items.to_vec()));
    }
    if items.len() > 8 {
        return Err(Error::InvalidDecomposition(format!("no order given for {} children", items.len())));
    }
    Ok(items.iter().copied().permutations(items.len()).find(|o| order_ok(o, base, gamma, down)))
}

/// Checks every condition of a Kelly decomposition of `g`; returns the width.
pub fn validate_kelly(g: &Structure, d: &KellyDecomposition) -> Validation {
    let mut bad = Vec::new();
    let nd = d.dag.len();
    let name = |t: usize| d.dag.names[t].clone();
    if d.beta.len() != nd || d.gamma.len() != nd || d.child_order.len() != nd {
        return Err(vec![Violation::new("shape", ["per-node maps do not match the DAG".to_string()])]);
    }
    let Some(down) = d.down() else {
        return Err(vec![Violation::new("acyclic", ["the decomposition graph has a cycle".to_string()])]);
    };
    let mut owner: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for t in 0..nd {
        for &v in &d.beta[t] {
            owner[v].push(t);
        }
    }
    for (v, ts) in owner.iter().enumerate() {
        if ts.len() != 1 {
            bad.push(Violation::new(
                "beta partitions the nodes",
                std::iter::once(g.id(v).to_string()).chain(ts.iter().map(|&t| name(t))),
            ));
        }
    }
    for (t, below) in down.iter().enumerate() {
        if !d.gamma[t].is_disjoint(below) {
            let both: BTreeSet<usize> = d.gamma[t].intersection(below).copied().collect();
            bad.push(Violation::new(
                "gamma is disjoint from the nodes below",
                std::iter::once(name(t)).chain(names(g, &both)),
            ));
        }
        let missing: BTreeSet<usize> = guard_of(g, below).difference(&d.gamma[t]).copied().collect();
        if !missing.is_empty() {
            bad.push(Violation::new(
                "gamma guards the nodes below",
                std::iter::once(name(t)).chain(names(g, &missing)),
            ));
        }
    }
    let children = d.dag.children();
    for (s, kids) in children.iter().enumerate() {
        let mut a = d.child_order[s].clone();
        let mut b = kids.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            bad.push(Violation::new("child order lists the children", [name(s)]));
            continue;
        }
        let base: BTreeSet<usize> = d.beta[s].union(&d.gamma[s]).copied().collect();
        if !order_ok(&d.child_order[s], &base, &d.gamma, &down) {
            bad.push(Violation::new("child ordering condition", [name(s)]));
        }
    }
    let mut roots = d.dag.sources();
    let mut given = d.root_order.clone();
    roots.sort_unstable();
    given.sort_unstable();
    if roots != given {
        bad.push(Violation::new("root order lists the roots", d.root_order.iter().map(|&r| name(r))));
    } else if !order_ok(&d.root_order, &BTreeSet::new(), &d.gamma, &down) {
        bad.push(Violation::new("root ordering condition", d.root_order.iter().map(|&r| name(r))));
    }
    if bad.is_empty() {
        Ok(d.width())
    } else {
        Err(bad)
    }
}

/// A decomposition with a single root whose bag holds `v`, of width at most
/// one more. `v` moves into a fresh root above the old roots and joins the
/// guard of every node that had it below.
pub fn root_kelly_at(g: &Structure, d: &KellyDecomposition, v: usize) -> Result<KellyDecomposition> {
    validate_kelly(g, d).map_err(|vs| violations_error(&vs))?;
    if d.root_order.len() == 1 && d.beta[d.root_order[0]].contains(&v) {
        return Ok(d.clone());
    }
    let down = d.down().expect("validated");
    let home =
        (0..d.dag.len()).find(|&t| d.beta[t].contains(&v)).ok_or_else(|| Error::UnknownNode(g.id(v).to_string()))?;
    let mut out = d.clone();
    out.beta[home].remove(&v);
    let below = d.dag.below().expect("validated");
    for t in 0..d.dag.len() {
        if below[t].contains(&home) && down[t].contains(&v) {
            out.gamma[t].insert(v);
        }
    }
    let mut name = "root".to_string();
    while out.dag.names.contains(&name) {
        name.push('\'');
    }
    let r = out.dag.add_node(name);
    for &old in &d.root_order {
        out.dag.edges.push((r, old));
    }
    out.beta.push(BTreeSet::from([v]));
    out.gamma.push(BTreeSet::new());
    out.child_order.push(d.root_order.clone());
    out.root_order = vec![r];
    validate_kelly(g, &out).map_err(|vs| violations_error(&vs))?;
    Ok(out)
}

struct KellyRun<'a> {
    ctx: Ctx<'a>,
    d: &'a KellyDecomposition,
    down: Vec<BTreeSet<usize>>,
    memo: HashMap<(usize, Vec<usize>), std::rc::Rc<Part>>,
    stored: usize,
}

impl KellyRun<'_> {
    /// The part over `B↓_t ∪ γ(t)` anchored at `γ(t) ∪ extra`.
    fn part(&mut self, t: usize, extra: &BTreeSet<usize>) -> Result<std::rc::Rc<Part>> {
        let key = (t, extra.iter().copied().collect::<Vec<_>>());
        if let Some(p) = self.memo.get(&key) {
            return Ok(p.clone());
        }
        let d = self.d;
        let mut keep: BTreeSet<usize> = d.beta[t].union(&d.gamma[t]).copied().collect();
        keep.extend(extra.iter().copied());
        let target: Vec<usize> = d.gamma[t].union(extra).copied().collect();
        let kids = &d.child_order[t];
        let mut acc: Option<std::rc::Rc<Part>> = None;
        let mut earlier: BTreeSet<usize> = BTreeSet::new();
        for (i, &s) in kids.iter().enumerate() {
            let later: BTreeSet<usize> = kids[i + 1..].iter().flat_map(|&c| d.gamma[c].iter().copied()).collect();
            let child_extra: BTreeSet<usize> =
                self.down[s].iter().copied().filter(|w| later.contains(w) || keep.contains(w)).collect();
            let child = self.part(s, &child_extra)?;
            earlier.extend(self.down[s].iter().copied());
            let last = i + 1 == kids.len();
            let anchors: Vec<usize> = if last {
                target.clone()
            } else {
                keep.iter()
                    .copied()
                    .chain(earlier.intersection(&later).copied())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            };
            let mut explicit = keep.clone();
            explicit.extend(child.anchors.iter().copied());
            if let Some(a) = &acc {
                explicit.extend(a.anchors.iter().copied());
            }
            let parts: Vec<&Part> = acc.iter().map(|a| a.as_ref()).chain(std::iter::once(child.as_ref())).collect();
            let p = glue(&self.ctx, &explicit, &parts, anchors)?;
            self.stored += p.size();
            acc = Some(std::rc::Rc::new(p));
        }
        let part = match acc {
            Some(p) => p,
            None => std::rc::Rc::new(glue(&self.ctx, &keep, &[], target)?),
        };
        self.memo.insert(key, part.clone());
        Ok(part)
    }
}

/// Decides `g, v ⊨ phi` over a Kelly decomposition of `g`.
pub fn kelly_modelcheck(
    g: &Structure,
    v: usize,
    phi: &Formula,
    zs: &VarSequence,
    d: &KellyDecomposition,
) -> Result<bool> {
    Ok(kelly_modelcheck_stats(g, v, phi, zs, d)?.0)
}

/// Like [`kelly_modelcheck`], also returning the number of ptype entries
/// stored along the way.
pub fn kelly_modelcheck_stats(
    g: &Structure,
    v: usize,
    phi: &Formula,
    zs: &VarSequence,
    d: &KellyDecomposition,
) -> Result<(bool, usize)> {
    if v >= g.len() {
        return Err(Error::UnknownNode(format!("#{v}")));
    }
    if !check_consistent(phi, zs) {
        return Err(Error::Inconsistent(phi.to_string()));
    }
    let ann = annotate(phi, zs)?;
    let rooted = root_kelly_at(g, d, v)?;
    let root = rooted.root_order[0];
    let down = rooted.down().expect("validated");
    let mut run = KellyRun { ctx: Ctx::new(g, &ann), d: &rooted, down, memo: HashMap::new(), stored: 0 };
    let top = run.part(root, &BTreeSet::new())?;
    if !top.anchors.is_empty() {
        return Err(Error::InvalidDecomposition("the root has a non-empty guard".into()));
    }
    Ok((verdict(&top, v)?, run.stored))
}
