//! Seeded random structures and formulas.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::formula::Formula;
use crate::structures::{Separation, Structure};

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Proposition names used by generated instances.
pub const PROPS: [&str; 2] = ["p", "q"];

/// A structure with nodes `n0..n{n-1}`, each edge present with probability
/// `density`, each proposition with probability one half.
pub fn random_structure(rng: &mut Rng8, n: usize, density: f64) -> Structure {
    let mut m = Structure::new();
    for v in 0..n {
        let props: Vec<&str> = PROPS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        m.add_node(&format!("n{v}"), &props);
    }
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) {
                m.add_edge(u, v);
            }
        }
    }
    m
}

/// Limits for [`random_formula`].
#[derive(Clone, Copy, Debug)]
pub struct FormulaShape {
    pub max_fixpoints: usize,
    pub max_modal: usize,
    pub max_depth: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape { max_fixpoints: 2, max_modal: 3, max_depth: 6 }
    }
}

struct Budget {
    fix: usize,
    modal: usize,
    next_var: usize,
}

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

/// A closed formula whose binders use distinct variables, so it is
/// consistent with its first-binding variable order.
pub fn random_formula(rng: &mut Rng8, shape: FormulaShape) -> Formula {
    let mut b = Budget { fix: shape.max_fixpoints.min(VARS.len()), modal: shape.max_modal, next_var: 0 };
    grow(rng, shape.max_depth, &mut Vec::new(), &mut b)
}

fn leaf(rng: &mut Rng8, scope: &[String]) -> Formula {
    let p = *PROPS.choose(rng).expect("props");
    match rng.gen_range(0..10) {
        0 => Formula::Top,
        1 => Formula::Bottom,
        2..=4 if !scope.is_empty() => Formula::Var(scope.choose(rng).expect("scope").clone()),
        2..=6 => Formula::prop(p),
        _ => Formula::neg(p),
    }
}

fn grow(rng: &mut Rng8, depth: usize, scope: &mut Vec<String>, b: &mut Budget) -> Formula {
    if depth == 0 {
        return leaf(rng, scope);
    }
    match rng.gen_range(0..10) {
        0 | 1 => leaf(rng, scope),
        2 => Formula::and(grow(rng, depth - 1, scope, b), grow(rng, depth - 1, scope, b)),
        3 => Formula::or(grow(rng, depth - 1, scope, b), grow(rng, depth - 1, scope, b)),
        4..=6 if b.modal > 0 => {
            b.modal -= 1;
            let body = grow(rng, depth - 1, scope, b);
            if rng.gen_bool(0.5) {
                Formula::diamond(body)
            } else {
                Formula::boxed(body)
            }
        }
        7..=9 if b.fix > 0 => {
            b.fix -= 1;
            let x = VARS[b.next_var].to_string();
            b.next_var += 1;
            scope.push(x.clone());
            let body = grow(rng, depth - 1, scope, b);
            scope.pop();
            if rng.gen_bool(0.5) {
                Formula::mu(&x, body)
            } else {
                Formula::nu(&x, body)
            }
        }
        _ => leaf(rng, scope),
    }
}

/// Like [`random_formula`] but retried until it has at least one modal
/// operator and one fixpoint (when the budget allows).
pub fn interesting_formula(rng: &mut Rng8, shape: FormulaShape) -> Formula {
    for _ in 0..64 {
        let f = random_formula(rng, shape);
        let fix = sub_count(&f, &|g| g.is_fixpoint());
        if f.modal_count() > 0 && (fix > 0 || shape.max_fixpoints == 0) {
            return f;
        }
    }
    random_formula(rng, shape)
}

fn sub_count(f: &Formula, pred: &dyn Fn(&Formula) -> bool) -> usize {
    usize::from(pred(f)) + f.children().into_iter().map(|c| sub_count(c, pred)).sum::<usize>()
}

/// `k` distinct nodes chosen uniformly.
pub fn random_anchors(rng: &mut Rng8, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k.min(n));
    all
}

/// A chain of blocks `v_0 <-> v_1 <-> ... <-> v_{n-1}`; `p` holds at every
/// third node. The path decomposition along the chain has width 2.
pub fn block_chain(n: usize) -> Structure {
    let mut m = Structure::new();
    for v in 0..n {
        let props: &[&str] = if v % 3 == 0 { &["p"] } else { &[] };
        m.add_node(&format!("n{v}"), props);
    }
    for v in 1..n {
        m.add_edge(v - 1, v);
        m.add_edge(v, v - 1);
    }
    m
}

/// A structure with a directed separation: every node is left-only,
/// interface or right-only, and edges from right-only to left-only nodes
/// are omitted. The interface has at most `max_interface` nodes.
pub fn random_separation(rng: &mut Rng8, n: usize, density: f64, max_interface: usize) -> (Structure, Separation) {
    let mut side: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let mut seen = 0;
    for s in side.iter_mut() {
        if *s == 1 {
            seen += 1;
            if seen > max_interface {
                *s = 2;
            }
        }
    }
    let mut m = Structure::new();
    for v in 0..n {
        let props: Vec<&str> = PROPS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        m.add_node(&format!("n{v}"), &props);
    }
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) && !(side[u] == 2 && side[v] == 0) {
                m.add_edge(u, v);
            }
        }
    }
    let sep = Separation {
        left: (0..n).filter(|&v| side[v] < 2).collect(),
        right: (0..n).filter(|&v| side[v] > 0).collect(),
        interface: (0..n).filter(|&v| side[v] == 1).collect(),
    };
    (m, sep)
}

/// A structure with a weak directed separation: every node is left-only,
/// interface, shared (in both parts but not in the interface) or
/// right-only. Right-only and shared nodes have no edge into the left-only
/// part. The interface has at most `max_interface` nodes.
pub fn random_weak_separation(rng: &mut Rng8, n: usize, density: f64, max_interface: usize) -> (Structure, Separation) {
    let mut side: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    let mut seen = 0;
    for s in side.iter_mut().filter(|s| **s == 1) {
        seen += 1;
        if seen > max_interface {
            *s = 3;
        }
    }
    let mut m = Structure::new();
    for v in 0..n {
        let props: Vec<&str> = PROPS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        m.add_node(&format!("n{v}"), &props);
    }
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) && !(side[u] >= 2 && side[v] == 0) {
                m.add_edge(u, v);
            }
        }
    }
    let sep = Separation {
        left: (0..n).filter(|&v| side[v] != 2).collect(),
        right: (0..n).filter(|&v| side[v] != 0).collect(),
        interface: (0..n).filter(|&v| side[v] == 1).collect(),
    };
    (m, sep)
}
