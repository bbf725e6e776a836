//! Decompositions read off a linear order of the nodes, and an exhaustive
//! search for the order of least width on small graphs.

use std::collections::BTreeSet;

use itertools::Itertools;

use super::dag::DagDecomposition;
use super::kelly::KellyDecomposition;
use super::{guard_of, Dag};
use crate::error::{Error, Result};
use crate::structures::Structure;

/// Largest graph the exhaustive search accepts.
pub const SEARCH_LIMIT: usize = 8;

/// Bags `{v_i} ∪ guard({v_i, ..., v_n})` of the path decomposition along
/// `order`.
fn path_bags(g: &Structure, order: &[usize]) -> Vec<(BTreeSet<usize>, BTreeSet<usize>)> {
    (0..order.len())
        .map(|i| {
            let tail: BTreeSet<usize> = order[i..].iter().copied().collect();
            (BTreeSet::from([order[i]]), guard_of(g, &tail))
        })
        .collect()
}

/// Width of the path decompositions along `order`.
pub fn order_width(g: &Structure, order: &[usize]) -> usize {
    path_bags(g, order).iter().map(|(b, c)| b.len() + c.len()).max().unwrap_or(0)
}

fn check_order(g: &Structure, order: &[usize]) -> Result<()> {
    let mut seen: Vec<usize> = order.to_vec();
    seen.sort_unstable();
    if seen != (0..g.len()).collect::<Vec<_>>() {
        return Err(Error::Input("the order must list every node once".into()));
    }
    Ok(())
}

/// The path-shaped Kelly decomposition along `order`: node `t_i` holds
/// `v_i` and is guarded by the successors of `v_i, ..., v_n` outside them.
pub fn kelly_from_order(g: &Structure, order: &[usize]) -> Result<KellyDecomposition> {
    check_order(g, order)?;
    let bags = path_bags(g, order);
    let mut dag = Dag::default();
    for i in 0..order.len() {
        dag.add_node(format!("t{i}"));
    }
    dag.edges = (1..order.len()).map(|i| (i - 1, i)).collect();
    let child_order = (0..order.len()).map(|i| if i + 1 < order.len() { vec![i + 1] } else { vec![] }).collect();
    Ok(KellyDecomposition {
        dag,
        beta: bags.iter().map(|(b, _)| b.clone()).collect(),
        gamma: bags.iter().map(|(_, c)| c.clone()).collect(),
        child_order,
        root_order: if order.is_empty() { vec![] } else { vec![0] },
    })
}

/// The path-shaped DAG decomposition along `order`, with bags
/// `{v_i} ∪ guard({v_i, ..., v_n})`.
pub fn dag_from_order(g: &Structure, order: &[usize]) -> Result<DagDecomposition> {
    check_order(g, order)?;
    let bags = path_bags(g, order);
    let mut dag = Dag::default();
    for i in 0..order.len() {
        dag.add_node(format!("d{i}"));
    }
    dag.edges = (1..order.len()).map(|i| (i - 1, i)).collect();
    Ok(DagDecomposition { dag, bags: bags.into_iter().map(|(b, c)| b.union(&c).copied().collect()).collect() })
}

/// An order of least path width, by trying every permutation.
pub fn min_width_order(g: &Structure) -> Result<Vec<usize>> {
    if g.len() > SEARCH_LIMIT {
        return Err(Error::SizeGuard(format!("exhaustive search needs at most {SEARCH_LIMIT} nodes, got {}", g.len())));
    }
    let best = (0..g.len()).permutations(g.len()).min_by_key(|o| order_width(g, o)).unwrap_or_default();
    Ok(best)
}

/// Adds DAG edges `t_j -> t_i` (placed after the existing child) to a path
/// decomposition; subtrees then share descendants. Edges that would break
/// validity are skipped.
pub fn shortcut_kelly(g: &Structure, d: &KellyDecomposition, extra: &[(usize, usize)]) -> KellyDecomposition {
    let mut out = d.clone();
    for &(a, b) in extra {
        if a >= b || b >= out.dag.len() || out.dag.edges.contains(&(a, b)) {
            continue;
        }
        let mut trial = out.clone();
        trial.dag.edges.push((a, b));
        trial.child_order[a].push(b);
        if super::validate_kelly(g, &trial).is_ok() {
            out = trial;
        }
    }
    out
}

/// Duplicates the part of a path decomposition below node `at` into two
/// parallel branches that rejoin at their common tail, producing a branch
/// node and shared descendants.
pub fn branch_dag(g: &Structure, d: &DagDecomposition, at: usize) -> DagDecomposition {
    let n = d.dag.len();
    if at + 2 >= n {
        return d.clone();
    }
    let mut out = d.clone();
    let copy = out.dag.add_node(format!("{}'", d.dag.names[at + 1]));
    out.bags.push(d.bags[at + 1].clone());
    out.dag.edges.push((at, copy));
    out.dag.edges.push((copy, at + 2));
    if super::validate_dag(g, &out).is_ok() {
        out
    } else {
        d.clone()
    }
}
