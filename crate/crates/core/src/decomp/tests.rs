use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::*;
use crate::formula::annotate;
use crate::formula::{default_var_sequence, parse_formula};
use crate::games::{build_mc_game, eval_naive, solve};
use crate::gen::{self, FormulaShape};

fn chain(n: usize, back: bool) -> Structure {
    let mut g = Structure::new();
    for i in 0..n {
        g.add_node::<&str>(&format!("v{i}"), &[]);
    }
    for i in 0..n.saturating_sub(1) {
        g.add_edge(i, i + 1);
        if back {
            g.add_edge(i + 1, i);
        }
    }
    g
}

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

#[test]
fn guards_follow_edges() {
    let g = chain(3, false);
    assert_eq!(guard_of(&g, &set(&[1])), set(&[2]));
    assert_eq!(guard_of(&g, &BTreeSet::new()), BTreeSet::new());
    let mut l = Structure::new();
    let a = l.add_node::<&str>("a", &[]);
    l.add_edge(a, a);
    assert!(guard_of(&l, &set(&[a])).is_empty());
    // oracle: scan the edge list
    let mut rng = gen::rng(3);
    for _ in 0..50 {
        let g = gen::random_structure(&mut rng, 6, 0.3);
        let w: BTreeSet<usize> = (0..6).filter(|_| rng.gen_bool(0.5)).collect();
        let want: BTreeSet<usize> =
            g.edges().filter(|(u, v)| w.contains(u) && !w.contains(v)).map(|(_, v)| v).collect();
        assert_eq!(guard_of(&g, &w), want);
        assert!(guards(&g, &want, &w));
    }
}

fn single_bag(g: &Structure) -> KellyDecomposition {
    let mut dag = Dag::default();
    dag.add_node("t");
    KellyDecomposition {
        dag,
        beta: vec![(0..g.len()).collect()],
        gamma: vec![BTreeSet::new()],
        child_order: vec![vec![]],
        root_order: vec![0],
    }
}

#[test]
fn kelly_validation_examples() {
    let mut g = Structure::new();
    let a = g.add_node::<&str>("a", &[]);
    g.add_edge(a, a);
    assert_eq!(validate_kelly(&g, &single_bag(&g)), Ok(1));
    let c = chain(2, false);
    assert_eq!(validate_kelly(&c, &single_bag(&c)), Ok(2));
    // two nodes a -> b, t1 above t2 with b below: t2 needs no guard, t1 fine
    let mut d = kelly_from_order(&c, &[0, 1]).unwrap();
    assert_eq!(validate_kelly(&c, &d), Ok(1));
    // putting a node of B↓ into gamma breaks disjointness
    d.gamma[1].insert(1);
    let err = validate_kelly(&c, &d).unwrap_err();
    assert!(err.iter().any(|v| v.condition.contains("disjoint")));
}

#[test]
fn kelly_json_round_trip() {
    let g = chain(4, true);
    let d = kelly_from_order(&g, &[0, 1, 2, 3]).unwrap();
    let text = d.to_json(&g).to_string();
    assert_eq!(KellyDecomposition::from_json(&g, &text).unwrap(), d);
    let dd = dag_from_order(&g, &[0, 1, 2, 3]).unwrap();
    assert_eq!(DagDecomposition::from_json(&g, &dd.to_json(&g).to_string()).unwrap(), dd);
}

#[test]
fn rooting_keeps_validity() {
    let mut rng = gen::rng(11);
    for _ in 0..40 {
        let g = gen::random_structure(&mut rng, 6, 0.3);
        let mut order: Vec<usize> = (0..6).collect();
        order.shuffle(&mut rng);
        let d = kelly_from_order(&g, &order).unwrap();
        let w = validate_kelly(&g, &d).unwrap();
        for v in 0..6 {
            let r = root_kelly_at(&g, &d, v).unwrap();
            let w2 = validate_kelly(&g, &r).unwrap();
            assert!(w2 <= w + 1);
            assert_eq!(r.root_order.len(), 1);
            assert!(r.beta[r.root_order[0]].contains(&v));
        }
        assert_eq!(root_kelly_at(&g, &d, order[0]).unwrap(), d);
    }
}

#[test]
fn dag_validation_examples() {
    let g = chain(2, false);
    let mut dag = Dag::default();
    dag.add_node("d1");
    dag.add_node("d2");
    dag.edges.push((0, 1));
    let d = DagDecomposition { dag: dag.clone(), bags: vec![set(&[0, 1]), set(&[1])] };
    assert_eq!(validate_dag(&g, &d), Ok(2));
    let bad = DagDecomposition { dag, bags: vec![set(&[1]), set(&[1])] };
    assert!(validate_dag(&g, &bad).unwrap_err().iter().any(|v| v.condition.contains("cover")));
}

#[test]
fn nicefy_examples() {
    let mut g = Structure::new();
    for id in ["a", "b", "c"] {
        g.add_node::<&str>(id, &[]);
    }
    let mut dag = Dag::default();
    dag.add_node("d1");
    dag.add_node("d2");
    dag.edges.push((0, 1));
    let d = DagDecomposition { dag, bags: vec![set(&[0, 1]), set(&[2])] };
    assert!(validate_dag(&g, &d).is_ok());
    assert!(!is_nice(&d));
    let n = nicefy(&g, &d).unwrap();
    assert!(is_nice(&n));
    assert_eq!(validate_dag(&g, &n), Ok(2));
    // unequal branch bags are not nice
    let mut dag = Dag::default();
    for i in 0..3 {
        dag.add_node(format!("d{i}"));
    }
    dag.edges = vec![(0, 1), (0, 2)];
    let b = DagDecomposition { dag, bags: vec![set(&[0]), set(&[0, 1]), set(&[0, 2])] };
    assert!(!is_nice(&b));
}

#[test]
fn nicefy_preserves_width() {
    let mut rng = gen::rng(5);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let g = gen::random_structure(&mut rng, n, 0.3);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut d = dag_from_order(&g, &order).unwrap();
        if n > 2 {
            d = branch_dag(&g, &d, rng.gen_range(0..n - 2));
        }
        let w = validate_dag(&g, &d).unwrap();
        let nice = nicefy(&g, &d).unwrap();
        assert!(is_nice(&nice));
        assert_eq!(validate_dag(&g, &nice), Ok(w));
    }
}

fn check_instance(rng: &mut gen::Rng8, n: usize) {
    let g = gen::random_structure(rng, n, 0.3);
    let phi = gen::random_formula(rng, FormulaShape::default());
    let zs = default_var_sequence(&phi).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let shortcuts: Vec<(usize, usize)> = (0..3).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let kd = shortcut_kelly(&g, &kelly_from_order(&g, &order).unwrap(), &shortcuts);
    let mut dd = dag_from_order(&g, &order).unwrap();
    if n > 2 {
        dd = branch_dag(&g, &dd, rng.gen_range(0..n - 2));
    }
    let game = solve(build_mc_game(&g, &annotate(&phi, &zs).unwrap()).game());
    let k = build_mc_game(&g, &annotate(&phi, &zs).unwrap()).position_count();
    for v in 0..n {
        let want = eval_naive(&g, v, &phi);
        assert_eq!(game.diamond_wins(v * k), want);
        assert_eq!(
            kelly_modelcheck(&g, v, &phi, &zs, &kd).unwrap(),
            want,
            "kelly {phi} at {v} on {:?}",
            g.edges().collect::<Vec<_>>()
        );
        assert_eq!(dag_modelcheck(&g, v, &phi, &zs, &dd).unwrap(), want, "dag {phi} at {v}");
    }
}

#[test]
fn drivers_match_naive() {
    let mut rng = gen::rng(2024);
    for _ in 0..60 {
        let n = rng.gen_range(1..=6);
        check_instance(&mut rng, n);
    }
}

#[test]
fn trivial_decompositions() {
    let mut rng = gen::rng(9);
    for _ in 0..20 {
        let g = gen::random_structure(&mut rng, 5, 0.3);
        let phi = gen::random_formula(&mut rng, FormulaShape::default());
        let zs = default_var_sequence(&phi).unwrap();
        let mut dag = Dag::default();
        dag.add_node("d");
        let dd = DagDecomposition { dag, bags: vec![(0..5).collect()] };
        for v in 0..5 {
            let want = eval_naive(&g, v, &phi);
            assert_eq!(kelly_modelcheck(&g, v, &phi, &zs, &single_bag(&g)).unwrap(), want);
            assert_eq!(dag_modelcheck(&g, v, &phi, &zs, &dd).unwrap(), want);
        }
    }
}

#[test]
fn cycle_has_infinite_paths() {
    let mut g = chain(4, false);
    g.add_edge(3, 0);
    let phi = parse_formula("nu Y. <>Y").unwrap();
    let zs = default_var_sequence(&phi).unwrap();
    let d = kelly_from_order(&g, &[0, 1, 2, 3]).unwrap();
    assert_eq!(validate_kelly(&g, &d), Ok(2));
    for v in 0..4 {
        assert!(kelly_modelcheck(&g, v, &phi, &zs, &d).unwrap());
        assert!(eval_naive(&g, v, &phi));
    }
}
