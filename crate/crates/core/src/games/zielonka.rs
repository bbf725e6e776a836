//! Recursive attractor-decomposition solver with positional strategies.

use std::collections::VecDeque;

use super::{ParityGame, Player, PositionalStrategy};

/// Winner of every node plus a positional winning move for the winner at
/// each of its own nodes (none at dead ends of the loser).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub moves: Vec<Option<usize>>,
}

impl Solution {
    pub fn diamond_wins(&self, v: usize) -> bool {
        self.winner[v] == Player::Diamond
    }

    pub fn region(&self, p: Player) -> Vec<usize> {
        (0..self.winner.len()).filter(|&v| self.winner[v] == p).collect()
    }

    /// The winner's moves restricted to nodes owned and won by `p`.
    pub fn strategy(&self, g: &ParityGame, p: Player) -> PositionalStrategy {
        PositionalStrategy {
            moves: (0..g.len())
                .filter(|&v| g.owner[v] == p && self.winner[v] == p)
                .filter_map(|v| self.moves[v].map(|w| (v, w)))
                .collect(),
        }
    }
}

struct Ctx<'a> {
    g: &'a ParityGame,
    pred: Vec<Vec<usize>>,
    moves: Vec<Option<usize>>,
}

/// Attractor of `target` for `p` inside the node set `sub` (a mask).
/// Returns the attractor as a list and records attracting moves in `moves`.
fn attr(ctx: &mut Ctx<'_>, sub: &[bool], target: &[usize], p: Player, moves: bool) -> Vec<usize> {
    let g = ctx.g;
    let mut inside = vec![false; g.len()];
    let mut count: Vec<usize> = vec![0; g.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut out = Vec::new();
    for &t in target {
        if sub[t] && !inside[t] {
            inside[t] = true;
            queue.push_back(t);
            out.push(t);
        }
    }
    let mut counted = vec![false; g.len()];
    while let Some(w) = queue.pop_front() {
        for &u in &ctx.pred[w] {
            if !sub[u] || inside[u] {
                continue;
            }
            let pull = if g.owner[u] == p {
                if moves {
                    ctx.moves[u] = Some(w);
                }
                true
            } else {
                if !counted[u] {
                    counted[u] = true;
                    count[u] = g.succ[u].iter().filter(|&&x| sub[x]).count();
                }
                count[u] -= 1;
                count[u] == 0
            };
            if pull {
                inside[u] = true;
                queue.push_back(u);
                out.push(u);
            }
        }
    }
    out
}

/// Attractor of `target` for player `p` in the whole game.
pub fn attractor(g: &ParityGame, target: &[usize], p: Player) -> Vec<usize> {
    let mut ctx = Ctx { g, pred: g.pred(), moves: vec![None; g.len()] };
    let all = vec![true; g.len()];
    attr(&mut ctx, &all, target, p, false)
}

fn minus(sub: &[bool], gone: &[usize]) -> Vec<bool> {
    let mut s = sub.to_vec();
    for &v in gone {
        s[v] = false;
    }
    s
}

/// Solves the subgame `sub` (no dead ends, every node keeps a successor in
/// `sub`). Returns the node lists won by ◇ and by □.
fn zielonka(ctx: &mut Ctx<'_>, sub: &[bool]) -> [Vec<usize>; 2] {
    let g = ctx.g;
    let nodes: Vec<usize> = (0..g.len()).filter(|&v| sub[v]).collect();
    let Some(p) = nodes.iter().map(|&v| g.priority[v]).min() else {
        return [Vec::new(), Vec::new()];
    };
    let alpha = Player::of_priority(p);
    let idx = |pl: Player| if pl == Player::Diamond { 0 } else { 1 };
    let top: Vec<usize> = nodes.iter().copied().filter(|&v| g.priority[v] == p).collect();
    let a = attr(ctx, sub, &top, alpha, true);
    let rest = minus(sub, &a);
    let w1 = zielonka(ctx, &rest);
    if w1[idx(alpha.opponent())].is_empty() {
        for &v in &top {
            if g.owner[v] == alpha {
                ctx.moves[v] = g.succ[v].iter().copied().find(|&w| sub[w]);
            }
        }
        let mut res = [Vec::new(), Vec::new()];
        res[idx(alpha)] = nodes;
        return res;
    }
    let b = attr(ctx, sub, &w1[idx(alpha.opponent())], alpha.opponent(), true);
    let w2 = zielonka(ctx, &minus(sub, &b));
    let mut res = w2;
    res[idx(alpha.opponent())].extend(b);
    res
}

/// Solves a parity game under the min-parity condition.
pub fn solve(g: &ParityGame) -> Solution {
    let n = g.len();
    let mut ctx = Ctx { g, pred: g.pred(), moves: vec![None; n] };
    let mut winner = vec![Player::Diamond; n];
    let all = vec![true; n];
    let stuck = |p: Player| -> Vec<usize> { (0..n).filter(|&v| g.owner[v] == p && g.succ[v].is_empty()).collect() };
    let lost_d = attr(&mut ctx, &all, &stuck(Player::Diamond), Player::Box, true);
    for &v in &lost_d {
        winner[v] = Player::Box;
    }
    let sub = minus(&all, &lost_d);
    let box_stuck: Vec<usize> = stuck(Player::Box).into_iter().filter(|&v| sub[v]).collect();
    let won_d = attr(&mut ctx, &sub, &box_stuck, Player::Diamond, true);
    let sub = minus(&sub, &won_d);
    let [_, wb] = zielonka(&mut ctx, &sub);
    for v in wb {
        winner[v] = Player::Box;
    }
    let mut moves = ctx.moves;
    for v in 0..n {
        if g.owner[v] != winner[v] {
            moves[v] = None;
        }
    }
    Solution { winner, moves }
}
