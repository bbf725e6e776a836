//! Parity games with the min-parity condition, partial games and positional
//! strategies. Player 0 is the existential player (◇), player 1 the universal
//! player (□); a player without a move loses.

pub(crate) mod mc;
mod zielonka;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mc::{build_mc_game, build_partial_mc_game, eval_naive, eval_set, McGame, McNode};
pub use zielonka::{attractor, solve, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Diamond,
    Box,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Diamond => Player::Box,
            Player::Box => Player::Diamond,
        }
    }

    /// The player favoured by priority `p`.
    pub fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Diamond
        } else {
            Player::Box
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl ParityGame {
    pub fn new() -> Self {
        ParityGame::default()
    }

    pub fn add_node(&mut self, owner: Player, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !self.succ[u].contains(&v) {
            self.succ[u].push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn pred(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (u, vs) in self.succ.iter().enumerate() {
            for &v in vs {
                p[v].push(u);
            }
        }
        p
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    /// Owner/priority/edge dump for golden tests and debugging.
    pub fn to_json(&self, labels: Option<&[String]>) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = (0..self.len())
            .map(|v| {
                let mut o = serde_json::json!({ "id": v, "owner": self.owner[v], "priority": self.priority[v] });
                if let Some(l) = labels {
                    o["label"] = serde_json::Value::String(l[v].clone());
                }
                o
            })
            .collect();
        let edges: Vec<(usize, usize)> =
            self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v))).collect();
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }
}

/// A parity game with an interface at which the existential player may
/// stop and win.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialParityGame {
    pub game: ParityGame,
    pub interface: BTreeSet<usize>,
}

/// Moves of the existential player at some of its nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionalStrategy {
    pub moves: BTreeMap<usize, usize>,
}

impl PositionalStrategy {
    pub fn get(&self, v: usize) -> Option<usize> {
        self.moves.get(&v).copied()
    }
}

/// Adds a universal node `⊤` without moves and an edge to it from every
/// existential interface node. Returns the closed game and `⊤`.
pub fn close_partial(p: &PartialParityGame) -> (ParityGame, usize) {
    let mut g = p.game.clone();
    let top = g.add_node(Player::Box, p.game.max_priority());
    for &u in &p.interface {
        if g.owner[u] == Player::Diamond {
            g.add_edge(u, top);
        }
    }
    (g, top)
}

/// Nodes reachable from `v` when the existential player follows `pi`
/// (interface nodes without a move stop the play).
fn conforming_succ(p: &PartialParityGame, pi: &PositionalStrategy, u: usize) -> Result<Vec<usize>> {
    let g = &p.game;
    match g.owner[u] {
        Player::Box => Ok(g.succ[u].clone()),
        Player::Diamond => match pi.get(u) {
            Some(w) if g.succ[u].contains(&w) => Ok(vec![w]),
            Some(w) => Err(Error::InvalidStrategy(format!("{u} -> {w} is not an edge"))),
            None if p.interface.contains(&u) || g.succ[u].is_empty() => Ok(Vec::new()),
            None => Err(Error::InvalidStrategy(format!("no move at node {u}"))),
        },
    }
}

/// Checks that `pi` wins every conforming play from `v`, where plays may end
/// at existential interface nodes without a move.
pub fn is_partial_winning(p: &PartialParityGame, v: usize, pi: &PositionalStrategy) -> Result<bool> {
    let g = &p.game;
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    let mut edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    while let Some(u) = stack.pop() {
        let next = conforming_succ(p, pi, u)?;
        if next.is_empty() && g.owner[u] == Player::Diamond && !p.interface.contains(&u) {
            return Ok(false);
        }
        for &w in &next {
            if seen.insert(w) {
                stack.push(w);
            }
        }
        edges.insert(u, next);
    }
    let odd: BTreeSet<u32> = seen.iter().map(|&u| g.priority[u]).filter(|q| q % 2 == 1).collect();
    for q in odd {
        let keep: BTreeSet<usize> = seen.iter().copied().filter(|&u| g.priority[u] >= q).collect();
        for scc in sccs(&keep, &edges) {
            let cyclic = scc.len() > 1 || edges[&scc[0]].contains(&scc[0]);
            if cyclic && scc.iter().any(|&u| g.priority[u] == q) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Strongly connected components of the subgraph induced by `keep`.
pub(crate) fn sccs(keep: &BTreeSet<usize>, edges: &BTreeMap<usize, Vec<usize>>) -> Vec<Vec<usize>> {
    struct T<'a> {
        keep: &'a BTreeSet<usize>,
        edges: &'a BTreeMap<usize, Vec<usize>>,
        index: BTreeMap<usize, usize>,
        low: BTreeMap<usize, usize>,
        on: BTreeSet<usize>,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    impl T<'_> {
        fn visit(&mut self, u: usize) {
            let i = self.index.len();
            self.index.insert(u, i);
            self.low.insert(u, i);
            self.stack.push(u);
            self.on.insert(u);
            for &w in self.edges.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if !self.keep.contains(&w) {
                    continue;
                }
                if !self.index.contains_key(&w) {
                    self.visit(w);
                    let l = self.low[&u].min(self.low[&w]);
                    self.low.insert(u, l);
                } else if self.on.contains(&w) {
                    let l = self.low[&u].min(self.index[&w]);
                    self.low.insert(u, l);
                }
            }
            if self.low[&u] == self.index[&u] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on.remove(&w);
                    comp.push(w);
                    if w == u {
                        break;
                    }
                }
                self.out.push(comp);
            }
        }
    }
    let mut t = T {
        keep,
        edges,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        on: BTreeSet::new(),
        stack: Vec::new(),
        out: Vec::new(),
    };
    for &u in keep {
        if !t.index.contains_key(&u) {
            t.visit(u);
        }
    }
    t.out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(owner: Player, prio: u32, self_loop: bool) -> ParityGame {
        let mut g = ParityGame::new();
        let v = g.add_node(owner, prio);
        if self_loop {
            g.add_edge(v, v);
        }
        g
    }

    #[test]
    fn close_adds_top() {
        let mut g = one(Player::Diamond, 1, false);
        g.add_node(Player::Box, 2);
        let p = PartialParityGame { game: g.clone(), interface: BTreeSet::new() };
        let (c, top) = close_partial(&p);
        assert_eq!(c.len(), 3);
        assert!(c.succ[top].is_empty());
        assert_eq!(c.edge_count(), 0);
        let p = PartialParityGame { game: g, interface: BTreeSet::from([0, 1]) };
        let (c, top) = close_partial(&p);
        assert_eq!(c.edge_count(), 1);
        assert_eq!(c.succ[0], vec![top]);
        assert_eq!(c.owner[top], Player::Box);
    }

    #[test]
    fn partial_winning_examples() {
        let p = PartialParityGame { game: one(Player::Diamond, 1, false), interface: BTreeSet::from([0]) };
        assert_eq!(is_partial_winning(&p, 0, &PositionalStrategy::default()), Ok(true));
        let p = PartialParityGame { game: one(Player::Diamond, 1, true), interface: BTreeSet::new() };
        let pi = PositionalStrategy { moves: BTreeMap::from([(0, 0)]) };
        assert_eq!(is_partial_winning(&p, 0, &pi), Ok(false));
        assert!(is_partial_winning(&p, 0, &PositionalStrategy::default()).is_err());
    }
}
