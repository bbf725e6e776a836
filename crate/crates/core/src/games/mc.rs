//! Semantics by fixpoint iteration and the model-checking game.

use std::collections::{BTreeSet, HashMap};

use super::{ParityGame, PartialParityGame, Player};
use crate::formula::closure::Positions;
use crate::formula::{AnnotatedFormula, Formula};
use crate::structures::Structure;

/// Set of nodes satisfying `phi` under the variable assignment `env`.
fn eval(m: &Structure, f: &Formula, env: &mut HashMap<String, Vec<bool>>) -> Vec<bool> {
    let n = m.len();
    match f {
        Formula::Top => vec![true; n],
        Formula::Bottom => vec![false; n],
        Formula::Prop(p) => (0..n).map(|v| m.holds(v, p)).collect(),
        Formula::NegProp(p) => (0..n).map(|v| !m.holds(v, p)).collect(),
        Formula::Var(x) => env.get(x).cloned().unwrap_or_else(|| vec![false; n]),
        Formula::And(a, b) => {
            let (a, b) = (eval(m, a, env), eval(m, b, env));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Formula::Or(a, b) => {
            let (a, b) = (eval(m, a, env), eval(m, b, env));
            a.iter().zip(&b).map(|(x, y)| *x || *y).collect()
        }
        Formula::Diamond(a) => {
            let s = eval(m, a, env);
            (0..n).map(|v| m.succ(v).iter().any(|&w| s[w])).collect()
        }
        Formula::Box(a) => {
            let s = eval(m, a, env);
            (0..n).map(|v| m.succ(v).iter().all(|&w| s[w])).collect()
        }
        Formula::Mu(x, body) | Formula::Nu(x, body) => {
            let mut cur = vec![matches!(f, Formula::Nu(..)); n];
            let saved = env.get(x).cloned();
            loop {
                env.insert(x.clone(), cur.clone());
                let next = eval(m, body, env);
                if next == cur {
                    break;
                }
                cur = next;
            }
            match saved {
                Some(s) => env.insert(x.clone(), s),
                None => env.remove(x),
            };
            cur
        }
    }
}

/// Nodes of `m` satisfying the closed formula `phi`.
pub fn eval_set(m: &Structure, phi: &Formula) -> Vec<bool> {
    eval(m, phi, &mut HashMap::new())
}

pub fn eval_naive(m: &Structure, v: usize, phi: &Formula) -> bool {
    eval_set(m, phi)[v]
}

/// A node of the model-checking game: structure node and position in `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct McNode {
    pub node: usize,
    pub pos: usize,
}

/// The model-checking game of a structure and an annotated formula. Game
/// node `v * positions + pos` is the pair `(v, pos)`.
#[derive(Clone, Debug)]
pub struct McGame {
    pub partial: PartialParityGame,
    pub(crate) positions: Positions,
    pub annotated: AnnotatedFormula,
    pub structure_size: usize,
}

impl McGame {
    pub fn game(&self) -> &ParityGame {
        &self.partial.game
    }

    pub fn position_count(&self) -> usize {
        self.positions.len()
    }

    pub fn id(&self, v: usize, pos: usize) -> usize {
        v * self.positions.len() + pos
    }

    pub fn label(&self, id: usize) -> McNode {
        McNode { node: id / self.positions.len(), pos: id % self.positions.len() }
    }

    /// Tree path of a position inside the game's formula.
    pub fn path_at(&self, pos: usize) -> &crate::formula::Position {
        &self.positions.paths[pos]
    }

    /// The subformula occurrence at a position.
    pub fn formula_at(&self, pos: usize) -> &Formula {
        self.positions.formula(pos)
    }

    pub fn labels(&self, m: &Structure) -> Vec<String> {
        (0..self.game().len())
            .map(|i| {
                let l = self.label(i);
                format!("({}, {})", m.id(l.node), self.positions.paths[l.pos])
            })
            .collect()
    }
}

/// Owner of `(v, ψ)`: the universal player at true literals, conjunctions
/// and boxes; the existential player elsewhere.
pub(crate) fn owner(m: &Structure, v: usize, f: &Formula) -> Player {
    let universal = match f {
        Formula::Top | Formula::And(..) | Formula::Box(_) => true,
        Formula::Prop(p) => m.holds(v, p),
        Formula::NegProp(p) => !m.holds(v, p),
        _ => false,
    };
    if universal {
        Player::Box
    } else {
        Player::Diamond
    }
}

pub(crate) fn mc_game_with(m: &Structure, phi: &AnnotatedFormula, positions: Positions, x: &BTreeSet<usize>) -> McGame {
    let k = positions.len();
    let mut g = ParityGame::new();
    for v in 0..m.len() {
        for pos in 0..k {
            let f = positions.formula(pos);
            g.add_node(owner(m, v, f), phi.node_priority(f));
        }
    }
    let mut interface = BTreeSet::new();
    for pos in 0..k {
        let f = positions.formula(pos);
        let kids = positions.child_ids(pos);
        for v in 0..m.len() {
            let id = v * k + pos;
            if f.is_modal() {
                for &w in m.succ(v) {
                    g.add_edge(id, w * k + kids[0]);
                }
                if x.contains(&v) {
                    interface.insert(id);
                }
            } else {
                for &c in &kids {
                    g.add_edge(id, v * k + c);
                }
            }
        }
    }
    McGame {
        partial: PartialParityGame { game: g, interface },
        positions,
        annotated: phi.clone(),
        structure_size: m.len(),
    }
}

pub fn build_mc_game(m: &Structure, phi: &AnnotatedFormula) -> McGame {
    build_partial_mc_game(&BTreeSet::new(), m, phi)
}

/// Like [`build_mc_game`] with every modal node over `x` in the interface.
pub fn build_partial_mc_game(x: &BTreeSet<usize>, m: &Structure, phi: &AnnotatedFormula) -> McGame {
    mc_game_with(m, phi, Positions::new(&phi.formula), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{annotate, default_var_sequence, parse_formula};
    use crate::games::solve;

    fn loop_a() -> Structure {
        let mut m = Structure::new();
        m.add_node::<&str>("a", &[]);
        m.add_edge(0, 0);
        m
    }

    fn ann(s: &str) -> AnnotatedFormula {
        let f = parse_formula(s).unwrap();
        annotate(&f, &default_var_sequence(&f).unwrap()).unwrap()
    }

    #[test]
    fn naive_examples() {
        let m = loop_a();
        assert!(eval_naive(&m, 0, &parse_formula("nu Y. <>Y").unwrap()));
        assert!(!eval_naive(&m, 0, &parse_formula("mu X. <>X").unwrap()));
        let mut p = loop_a();
        p.add_node("a", &["P"]);
        assert!(eval_naive(&p, 0, &parse_formula("P & <>tt").unwrap()));
    }

    #[test]
    fn mc_game_examples() {
        let m = loop_a();
        let g = build_mc_game(&m, &ann("mu X. <>X"));
        assert_eq!(g.game().len(), 2);
        assert_eq!(g.game().edge_count(), 2);
        assert!(g.game().priority.iter().all(|&p| p == 1));
        assert!(g.game().owner.iter().all(|&o| o == Player::Diamond));
        assert!(!solve(g.game()).diamond_wins(g.id(0, 0)));

        let g = build_mc_game(&m, &ann("nu Y. <>Y"));
        assert!(g.game().priority.iter().all(|&p| p == 0));
        assert!(solve(g.game()).diamond_wins(0));

        let mut s = Structure::new();
        s.add_node("a", &["P"]);
        let g = build_mc_game(&s, &ann("P"));
        assert_eq!(g.game().owner[0], Player::Box);
        assert!(solve(g.game()).diamond_wins(0));
    }

    #[test]
    fn partial_interface_examples() {
        let mut m = Structure::new();
        m.add_node::<&str>("a", &[]);
        m.add_node::<&str>("x", &[]);
        m.add_edge(0, 1);
        let phi = ann("<><>tt");
        assert!(build_partial_mc_game(&BTreeSet::new(), &m, &phi).partial.interface.is_empty());
        let g = build_partial_mc_game(&BTreeSet::from([1]), &m, &phi);
        // positions: 0 = <><>tt, 1 = <>tt, 2 = tt
        assert_eq!(g.partial.interface, BTreeSet::from([g.id(1, 0), g.id(1, 1)]));
        assert!(!g.partial.interface.contains(&g.id(0, 0)));
        let all = build_partial_mc_game(&BTreeSet::from([0, 1]), &m, &ann("<>tt"));
        assert_eq!(all.partial.interface.len(), 2);
    }
}
