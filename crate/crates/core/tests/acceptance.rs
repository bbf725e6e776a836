//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use mudecomp::cli::{decide, random_bundle, Decomposition, Mode};
use mudecomp::decomp::{kelly_from_order, kelly_modelcheck, order_width};
use mudecomp::formula::{
    annotate, check_consistent, cl, cl_p, default_var_sequence, markers, parse_formula, profile_transform,
    AnnotatedFormula, Formula, IndexedFormula, Position,
};
use mudecomp::games::{build_mc_game, eval_naive, solve, ParityGame};
use mudecomp::gen::{
    block_chain, interesting_formula, random_anchors, random_formula, random_separation, random_structure,
    random_weak_separation, rng, FormulaShape, Rng8,
};
use mudecomp::profiles::{
    anchored_game, build_small_game, profile_universe, ptype_enum, ptype_of, replace_subgame, PType, ProfileKey,
    StartRule,
};
use mudecomp::structures::{bisimilar, color, weak_to_proper, Separation, Structure};
use mudecomp::types::{compose_along, compute_types};
use mudecomp::Error;
use rand::Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

const SMALL: FormulaShape = FormulaShape { max_fixpoints: 2, max_modal: 2, max_depth: 5 };

fn annotated(f: &Formula) -> AnnotatedFormula {
    annotate(f, &default_var_sequence(f).expect("generated formulas are consistent")).expect("consistent")
}

fn four_routes() -> Verdict {
    let mut counts = [0usize; 2];
    for seed in 0..500u64 {
        let b = random_bundle(seed, 8, 3).map_err(|e| format!("seed {seed}: {e}"))?;
        let (g, v, f, zs) = (&b.structure, b.node, &b.formula, &b.vars);
        let run = |mode, d| decide(mode, g, v, f, zs, d).map(|r| r.0).map_err(|e| format!("seed {seed} {mode:?}: {e}"));
        let got = [
            run(Mode::Naive, Decomposition::None)?,
            run(Mode::Game, Decomposition::None)?,
            run(Mode::Kelly, Decomposition::Kelly(&b.kelly))?,
            run(Mode::Dag, Decomposition::Dag(&b.dag))?,
        ];
        if got.iter().any(|&x| x != got[0]) {
            return Err(format!("seed {seed}: {f} at {} gives naive/game/kelly/dag = {got:?}", g.id(v)));
        }
        counts[usize::from(got[0])] += 1;
    }
    Ok(format!("500 bundles agree ({} true, {} false)", counts[1], counts[0]))
}

fn transform_matches_enumeration() -> Verdict {
    let mut r = rng(326);
    let (mut samples, mut tuples, mut refused) = (0, 0, 0);
    while samples < 200 {
        let n = r.gen_range(1..=5);
        let m = random_structure(&mut r, n, 0.35);
        let phi = annotated(&interesting_formula(&mut r, SMALL));
        let k = r.gen_range(0..=2);
        let xs = random_anchors(&mut r, n, k);
        let ps = markers("P", xs.len());
        let colored = color(&m, &xs, &ps).map_err(|e| e.to_string())?.structure;
        let closure = cl(&phi.formula);
        let id = r.gen_range(0..closure.len());
        let v = r.gen_range(0..n);
        let (game, keys) = anchored_game(&m, &phi, &xs).map_err(|e| e.to_string())?;
        let t = match ptype_enum(&game.partial, &keys, game.id(v, id)) {
            Ok(t) => t,
            Err(Error::SizeGuard(_)) => {
                refused += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let modal: Vec<usize> = (0..closure.len()).filter(|&o| game.formula_at(o).is_modal()).collect();
        let pkeys: Vec<ProfileKey> =
            (0..xs.len()).flat_map(|i| modal.iter().map(move |&o| ProfileKey::new(i, o))).collect();
        let universe = profile_universe(&pkeys, &phi.priority_values());
        for _ in 0..8 {
            let y = &universe[r.gen_range(0..universe.len())];
            let psi_y = profile_transform(&phi, &closure[id], y, &ps).map_err(|e| e.to_string())?;
            if eval_naive(&colored, v, &psi_y) != t.admits(y) {
                return Err(format!("{} at {}: y = {y}, ptype {t}, transform {psi_y}", closure[id].formula, m.id(v)));
            }
            tuples += 1;
        }
        samples += 1;
    }
    Ok(format!("{samples} samples, {tuples} profiles checked, draws over the enumeration guard: {refused}"))
}

/// Replaces the right half of the game by the small game; returns the
/// number of entry ptypes confirmed by enumeration and those refused.
fn simulate(m: &Structure, sep: &Separation, phi: &AnnotatedFormula) -> Result<(usize, usize), String> {
    let whole = build_mc_game(m, phi);
    let k = whole.position_count();
    let (m2, map) = m.induced(&sep.right);
    let xs: Vec<usize> = sep.interface.iter().map(|x| map[x]).collect();
    let (g2, keys2) = anchored_game(&m2, phi, &xs).map_err(|e| e.to_string())?;
    let modal: Vec<usize> = (0..k).filter(|&o| whole.formula_at(o).is_modal()).collect();
    let mut iface = BTreeMap::new();
    for (i, &x) in xs.iter().enumerate() {
        for &o in &modal {
            iface.insert(ProfileKey::new(i, o), ptype_of(&g2.partial, &keys2, g2.id(x, o), StartRule::Continue));
        }
    }
    let mut entries = BTreeMap::new();
    for (&v, &v2) in &map {
        for o in 0..k {
            entries.insert((v, o), ptype_of(&g2.partial, &keys2, g2.id(v2, o), StartRule::Visit));
        }
    }
    let list: Vec<PType> = entries.values().cloned().collect();
    let sg = build_small_game(phi, xs.len(), &iface, &list).map_err(|e| e.to_string())?;
    let q: BTreeSet<usize> = entries.keys().map(|&(v, o)| whole.id(v, o)).collect();
    let u: BTreeSet<usize> =
        sep.interface.iter().flat_map(|&x| modal.iter().map(move |&o| (x, o))).map(|(x, o)| whole.id(x, o)).collect();
    let mut fmap = BTreeMap::new();
    for (&(v, o), t) in &entries {
        let img = match sep.interface.iter().position(|&x| x == v) {
            Some(i) if whole.formula_at(o).is_modal() => sg.v4[&ProfileKey::new(i, o)],
            _ => sg.v1[t],
        };
        fmap.insert(whole.id(v, o), img);
    }
    let (replaced, image) = replace_subgame(whole.game(), &q, &u, &sg.partial, &fmap).map_err(|e| e.to_string())?;
    let (before, after) = (solve(whole.game()), solve(&replaced));
    for id in (0..whole.game().len()).filter(|id| !q.contains(id) || u.contains(id)) {
        if before.winner[id] != after.winner[image[id]] {
            return Err(format!("{}: winner changes at game node {id}", phi.formula));
        }
    }
    let (mut confirmed, mut refused) = (0, 0);
    for t in list.iter().collect::<BTreeSet<_>>() {
        match ptype_enum(&sg.partial, &sg.keys, sg.v1[t]) {
            Ok(got) if &got == t => confirmed += 1,
            Ok(got) => return Err(format!("{}: entry built from {t} enumerates to {got}", phi.formula)),
            Err(Error::SizeGuard(_)) => refused += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok((confirmed, refused))
}

fn small_game_simulates() -> Verdict {
    let mut r = rng(333);
    let (mut confirmed, mut refused) = (0, 0);
    for _ in 0..100 {
        let n = r.gen_range(2..=5);
        let (m, sep) = random_separation(&mut r, n, 0.35, 2);
        let phi = annotated(&interesting_formula(&mut r, SMALL));
        let (c, f) = simulate(&m, &sep, &phi)?;
        confirmed += c;
        refused += f;
    }
    if confirmed == 0 {
        return Err("no entry ptype could be enumerated".into());
    }
    Ok(format!(
        "100 separations, winners preserved, {confirmed} entry ptypes reproduced, {refused} over the enumeration guard"
    ))
}

/// Adds a copy of the right-only node `w`. With `unfold` the copy takes
/// over a random subset of the edges into `w`; otherwise it receives all of
/// them as extra edges.
fn mutate(r: &mut Rng8, m: &Structure, sep: &Separation, w: usize, unfold: bool) -> (Structure, Separation) {
    let mut out = Structure::new();
    for v in 0..m.len() {
        let props: Vec<String> = m.props(v).iter().cloned().collect();
        out.add_node(m.id(v), &props);
    }
    let props: Vec<String> = m.props(w).iter().cloned().collect();
    let c = out.add_node(&format!("{}'", m.id(w)), &props);
    for (u, v) in m.edges() {
        if v == w && unfold && r.gen_bool(0.5) {
            out.add_edge(u, c);
        } else {
            out.add_edge(u, v);
            if v == w && !unfold {
                out.add_edge(u, c);
            }
        }
    }
    for &s in m.succ(w) {
        out.add_edge(c, s);
    }
    let mut sep2 = sep.clone();
    sep2.right.insert(c);
    (out, sep2)
}

fn invariance() -> Verdict {
    let mut r = rng(36);
    let (mut pairs, mut guarded) = (0, 0);
    while pairs < 100 {
        let n = r.gen_range(2..=5);
        let (m, sep) = random_separation(&mut r, n, 0.35, 2);
        let right_only: Vec<usize> = sep.right.difference(&sep.left).copied().collect();
        if right_only.is_empty() || sep.left.is_empty() {
            continue;
        }
        let w = right_only[r.gen_range(0..right_only.len())];
        let unfold = r.gen_bool(0.5);
        let (m2, sep2) = mutate(&mut r, &m, &sep, w, unfold);
        let ls = vec![interesting_formula(&mut r, SMALL)];
        let left: Vec<usize> = sep.left.iter().copied().collect();
        let ys: Vec<usize> = (0..r.gen_range(0..=1usize)).map(|_| left[r.gen_range(0..left.len())]).collect();
        let ps = markers("P", sep.interface.len());
        let qs = markers("Q", ys.len());
        let (a, b) = match (compose_along(&m, &sep, &ls, &ps, &qs, &ys), compose_along(&m2, &sep2, &ls, &ps, &qs, &ys))
        {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::SizeGuard(_)), _) | (_, Err(Error::SizeGuard(_))) => {
                guarded += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.to_string()),
        };
        for v in &sep.left {
            if a[v] != b[v] {
                let kind = if unfold { "unfolding" } else { "duplication" };
                return Err(format!("{} after {kind} of {}: row of {} differs", ls[0], m.id(w), m.id(*v)));
            }
        }
        pairs += 1;
    }
    Ok(format!("{pairs} mutated pairs give identical left rows (draws over the closure guard: {guarded})"))
}

fn weak_separations() -> Verdict {
    let mut r = rng(42);
    let mut checked = 0;
    for _ in 0..100 {
        let n = r.gen_range(1..=6);
        let (m, sep) = random_weak_separation(&mut r, n, 0.35, 2);
        let d = weak_to_proper(&m, &sep).map_err(|e| e.to_string())?;
        if !d.separation.is_directed(&d.structure) {
            return Err(format!("split of {sep:?} is not directed"));
        }
        let ls = vec![interesting_formula(&mut r, SMALL)];
        let ps = markers("P", sep.interface.len());
        let xs2: Vec<usize> = sep.interface.iter().map(|x| d.pi1[x]).collect();
        let c1 = color(&m, &sep.interface, &ps).map_err(|e| e.to_string())?.structure;
        let c2 = color(&d.structure, &xs2, &ps).map_err(|e| e.to_string())?.structure;
        let t1 = compute_types(&m, &sep.interface, &ls, &ps).map_err(|e| e.to_string())?;
        let t2 = compute_types(&d.structure, &xs2, &ls, &ps).map_err(|e| e.to_string())?;
        for pi in [&d.pi1, &d.pi2] {
            for (&v, &img) in pi {
                if !bisimilar(&c1, v, &c2, img) {
                    return Err(format!("{} and its image are not bisimilar", m.id(v)));
                }
                if t1.rows[&v] != t2.rows[&img] {
                    return Err(format!("{}: type of {} changes under the split", ls[0], m.id(v)));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("100 weak separations, {checked} node images bisimilar with equal types"))
}

fn closure_laws() -> Verdict {
    let mut r = rng(348);
    for i in 0..100 {
        let phi = random_formula(&mut r, FormulaShape::default());
        let ps = markers("P", i % 3);
        let once = cl_p([&phi], &ps);
        if cl_p(once.iter(), &ps) != once {
            return Err(format!("tracked closure of {phi} is not idempotent"));
        }
        let zs = default_var_sequence(&phi).map_err(|e| e.to_string())?;
        if let Some(bad) = cl(&phi).into_iter().find(|o| !check_consistent(&o.formula, &zs)) {
            return Err(format!("{} in the closure of {phi} is inconsistent", bad.formula));
        }
    }
    Ok("100 formulas: tracked closure idempotent, consistency kept by the closure".into())
}

fn path_minima(g: &ParityGame, start: usize) -> Vec<BTreeSet<u32>> {
    let mut seen = vec![BTreeSet::new(); g.len()];
    let mut todo = vec![(start, g.priority[start])];
    seen[start].insert(g.priority[start]);
    while let Some((v, p)) = todo.pop() {
        for &w in &g.succ[v] {
            let q = p.min(g.priority[w]);
            if seen[w].insert(q) {
                todo.push((w, q));
            }
        }
    }
    seen
}

fn path_priorities() -> Verdict {
    let mut r = rng(330);
    let (mut samples, mut targets) = (0, 0);
    while samples < 100 {
        let n = r.gen_range(1..=5);
        let m = random_structure(&mut r, n, 0.35);
        let phi = annotated(&interesting_formula(&mut r, FormulaShape::default()));
        let closure = cl(&phi.formula);
        let psi = &closure[r.gen_range(0..closure.len())];
        let game = build_mc_game(&m, &phi.reannotate(&psi.formula).map_err(|e| e.to_string())?);
        let v = r.gen_range(0..n);
        let root = IndexedFormula { formula: psi.formula.clone(), position: Position::root() };
        let reach = path_minima(game.game(), game.id(v, 0));
        for (id, ps) in reach.iter().enumerate().filter(|(_, ps)| !ps.is_empty()) {
            let pos = game.label(id).pos;
            let chi = IndexedFormula { formula: game.formula_at(pos).clone(), position: game.path_at(pos).clone() };
            let want = phi.prio(&root, &chi);
            if ps.iter().any(|&p| p != want) {
                return Err(format!("{} to {}: minima {ps:?}, expected {want}", psi.formula, chi.formula));
            }
            targets += 1;
        }
        samples += 1;
    }
    Ok(format!("{samples} samples, {targets} reachable targets with a single path minimum"))
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn scaling() -> Verdict {
    let phi = parse_formula("nu Y. <>Y").map_err(|e| e.to_string())?;
    let zs = default_var_sequence(&phi).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for n in [50usize, 100, 200] {
        let g = block_chain(n);
        let order: Vec<usize> = (0..n).collect();
        if order_width(&g, &order) != 2 {
            return Err(format!("block chain of {n} nodes has width {}", order_width(&g, &order)));
        }
        let d = kelly_from_order(&g, &order).map_err(|e| e.to_string())?;
        let mut times = Vec::new();
        for _ in 0..5 {
            let start = Instant::now();
            let holds = kelly_modelcheck(&g, n / 2, &phi, &zs, &d).map_err(|e| e.to_string())?;
            times.push(start.elapsed());
            if !holds {
                return Err(format!("nu Y. <>Y fails on the block chain of {n} nodes"));
            }
        }
        rows.push((n, median(times)));
    }
    let c = rows[0].1.as_secs_f64() / 50f64.powi(3);
    let report: Vec<String> = rows.iter().map(|(n, t)| format!("n={n}: {:.1} ms", t.as_secs_f64() * 1e3)).collect();
    for &(n, t) in &rows {
        let bound = 3.0 * c * (n as f64).powi(3);
        if t.as_secs_f64() > bound {
            return Err(format!("{} exceeds 3*C*n^3 = {:.1} ms at n={n}", report.join(", "), bound * 1e3));
        }
    }
    if rows[2].1 >= Duration::from_secs(60) {
        return Err(format!("{}: n=200 takes over 60 s", report.join(", ")));
    }
    Ok(report.join(", "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("four-route agreement", four_routes),
        ("profile transform versus strategy enumeration", transform_matches_enumeration),
        ("small game simulation", small_game_simulates),
        ("type invariance under mutations", invariance),
        ("weak separations", weak_separations),
        ("closure laws", closure_laws),
        ("path priorities", path_priorities),
        ("scaling on block chains", scaling),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
