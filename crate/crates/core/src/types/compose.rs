//! Composition of types across a directed separation `(M1, M2)`.
//!
//! Only `M1` is explicit. The right part is known through the types of the
//! interface nodes and of the targets of edges leaving `M1`. For every
//! target formula a hybrid game is solved: the model-checking game over the
//! left part glued to the small game realizing the right part's ptypes,
//! which are read off the given types through the profile transform.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{closure_universe, MuType, TypeTable};
use crate::error::{Error, Result};
use crate::formula::closure::Positions;
use crate::formula::tracking::{split_wrapper, transform_at};
use crate::formula::{
    annotate, canonicalize_markers, check_consistent, default_var_sequence, substitute_markers, AnnotatedFormula,
    Formula, FormulaSet, MarkerSubst, VarSequence,
};
use crate::games::{build_mc_game, solve, ParityGame};
use crate::profiles::{build_small_game, minimal_profiles, PType, ProfileKey, StartRule};
use crate::structures::Structure;

/// Where a target marker `Q_j` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// At a node of `M1` (possibly an interface node).
    Node(usize),
    /// Wherever the right types' marker `P_i` holds.
    Marker(usize),
}

/// Inputs of a composition step.
#[derive(Clone, Copy, Debug)]
pub struct Composition<'a> {
    pub ls: &'a [Formula],
    /// Markers of the given types; the first `xs.len()` anchor the interface.
    pub ps: &'a [String],
    /// Markers of the composed types.
    pub qs: &'a [String],
    pub m1: &'a Structure,
    pub xs: &'a [usize],
    pub ys: &'a [Target],
    /// Type of `xs[i]` within `M2`.
    pub interface_types: &'a [MuType],
    /// Edges from a non-interface node of `M1` into `M2`, given by the type
    /// of their target within `M2`.
    pub cross_edges: &'a [(usize, MuType)],
}

impl Composition<'_> {
    fn validate(&self) -> Result<FormulaSet> {
        let n = self.m1.len();
        let k = self.xs.len();
        if k > self.ps.len() {
            return Err(Error::Input(format!("{k} interface nodes but {} markers", self.ps.len())));
        }
        if self.interface_types.len() != k {
            return Err(Error::Input(format!(
                "{} interface types for {k} interface nodes",
                self.interface_types.len()
            )));
        }
        if self.ys.len() > self.qs.len() {
            return Err(Error::Input(format!("{} targets but {} markers", self.ys.len(), self.qs.len())));
        }
        let distinct: BTreeSet<_> = self.xs.iter().collect();
        if distinct.len() != k {
            return Err(Error::InvalidSeparation("repeated interface node".into()));
        }
        if let Some(x) = self.xs.iter().find(|&&x| x >= n) {
            return Err(Error::UnknownNode(format!("#{x}")));
        }
        for y in self.ys {
            match *y {
                Target::Node(v) if v >= n => return Err(Error::UnknownNode(format!("#{v}"))),
                Target::Marker(i) if i >= self.ps.len() => {
                    return Err(Error::UnknownProfileKey(format!("marker index {i} of {}", self.ps.len())))
                }
                _ => {}
            }
        }
        if let Some(q) = self.qs.iter().find(|q| self.ps.contains(q)) {
            return Err(Error::MarkerCollision(q.clone()));
        }
        let sig = self.m1.signature();
        if let Some(q) = self.qs.iter().chain(self.ps).find(|q| sig.contains(*q)) {
            return Err(Error::MarkerCollision(q.clone()));
        }
        for l in self.ls {
            if let Some(q) = self.qs.iter().chain(self.ps).find(|q| l.mentions(q)) {
                return Err(Error::MarkerPresent(q.clone()));
            }
        }
        for (v, _) in self.cross_edges {
            if *v >= n {
                return Err(Error::UnknownNode(format!("#{v}")));
            }
            if self.xs.contains(v) {
                return Err(Error::InvalidSeparation(format!(
                    "edge into the right part from interface node {}",
                    self.m1.id(*v)
                )));
            }
        }
        let universe = closure_universe(self.ls, self.ps)?;
        for t in self.interface_types.iter().chain(self.cross_edges.iter().map(|(_, t)| t)) {
            t.check_within(&universe)?;
        }
        Ok(universe)
    }

    /// `Q_j` read inside the right part: the interface marker it coincides
    /// with, or false.
    fn right_subst(&self) -> MarkerSubst {
        self.qs
            .iter()
            .enumerate()
            .map(|(j, q)| {
                let r = match self.ys.get(j) {
                    Some(Target::Node(v)) => self.xs.iter().position(|x| x == v).map(|i| self.ps[i].clone()),
                    Some(Target::Marker(i)) => Some(self.ps[*i].clone()),
                    None => None,
                };
                (q.clone(), r)
            })
            .collect()
    }

    /// `M1` with every `Q_j` placed where it holds on the left.
    fn left_structure(&self) -> Structure {
        let mut s = self.m1.clone();
        for (q, y) in self.qs.iter().zip(self.ys) {
            let at = match *y {
                Target::Node(v) => Some(v),
                Target::Marker(i) => self.xs.get(i).copied(),
            };
            if let Some(v) = at {
                s.add_prop(v, q);
            }
        }
        s
    }
}

/// The ptype at position `id` of `phi` of a right-part node whose type is
/// `t`, via membership of the profile transforms. `subst` moves target
/// markers into the right part's marker space. Under
/// [`StartRule::Continue`] the start node's own decoration is dropped.
#[allow(clippy::too_many_arguments)]
pub fn ptype_from_type(
    t: &MuType,
    phi: &AnnotatedFormula,
    id: usize,
    k: usize,
    ps: &[String],
    subst: &MarkerSubst,
    rule: StartRule,
    universe: &FormulaSet,
) -> Result<PType> {
    let pos = Positions::new(&phi.formula);
    ptype_at(t, phi, &pos, id, &ps[..k], subst, rule, universe)
}

#[allow(clippy::too_many_arguments)]
fn ptype_at(
    t: &MuType,
    phi: &AnnotatedFormula,
    pos: &Positions,
    id: usize,
    anchors: &[String],
    subst: &MarkerSubst,
    rule: StartRule,
    universe: &FormulaSet,
) -> Result<PType> {
    let modal: Vec<usize> = (0..pos.len()).filter(|&o| pos.formula(o).is_modal()).collect();
    let keys: Vec<ProfileKey> =
        (0..anchors.len()).flat_map(|i| modal.iter().map(move |&o| ProfileKey::new(i, o))).collect();
    let failure = RefCell::new(None);
    let result = minimal_profiles(&keys, &phi.priority_values(), |y| {
        let mut f = transform_at(phi, pos, id, y, anchors);
        if rule == StartRule::Continue {
            if let Some((_, bare)) = split_wrapper(&f) {
                f = bare.clone();
            }
        }
        let g = canonicalize_markers(&substitute_markers(&f, subst));
        if !universe.contains(&g) {
            failure.borrow_mut().get_or_insert(Error::WrongClosure(g.to_string()));
            return false;
        }
        t.contains(&g)
    });
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Source {
    Interface(usize),
    Cross(usize),
    Extra(usize),
}

#[derive(Clone, Debug)]
enum Slot {
    Left(usize),
    Anchor(ProfileKey),
    Entry(PType),
}

/// Verdicts for one target formula: per node of `M1`, then per extra type.
fn verdicts(
    c: &Composition<'_>,
    seqs: &[VarSequence],
    universe: &FormulaSet,
    theta: &Formula,
    extras: &[&MuType],
) -> Result<(Vec<bool>, Vec<bool>)> {
    let ann = annotate_member(theta, seqs)?;
    let left = c.left_structure();
    let mc = build_mc_game(&left, &ann);
    let pos = &mc.positions;
    let k = c.xs.len();
    let anchors = &c.ps[..k];
    let subst = c.right_subst();
    let anchor_of: HashMap<usize, usize> = c.xs.iter().enumerate().map(|(i, &x)| (x, i)).collect();

    let cache: RefCell<HashMap<(Source, usize, StartRule), PType>> = RefCell::new(HashMap::new());
    let ptype = |src: Source, id: usize, rule: StartRule| -> Result<PType> {
        if let Some(p) = cache.borrow().get(&(src, id, rule)) {
            return Ok(p.clone());
        }
        let t = match src {
            Source::Interface(i) => &c.interface_types[i],
            Source::Cross(e) => &c.cross_edges[e].1,
            Source::Extra(e) => extras[e],
        };
        let p = ptype_at(t, &ann, pos, id, anchors, &subst, rule, universe)?;
        cache.borrow_mut().insert((src, id, rule), p.clone());
        Ok(p)
    };
    // where a play entering `(w, id)` from the left continues
    let slot_of = |w: usize, id: usize| -> Result<Slot> {
        Ok(match anchor_of.get(&w) {
            None => Slot::Left(mc.id(w, id)),
            Some(&i) if pos.formula(id).is_modal() => Slot::Anchor(ProfileKey::new(i, id)),
            Some(&i) => Slot::Entry(ptype(Source::Interface(i), id, StartRule::Visit)?),
        })
    };

    let g0 = mc.game();
    let lefts: Vec<usize> = (0..c.m1.len()).filter(|v| !anchor_of.contains_key(v)).collect();
    let mut edges: Vec<(Slot, Slot)> = Vec::new();
    for &v in &lefts {
        for id in 0..pos.len() {
            let n = mc.id(v, id);
            for &s in &g0.succ[n] {
                let l = mc.label(s);
                edges.push((Slot::Left(n), slot_of(l.node, l.pos)?));
            }
        }
    }
    for (e, (v, _)) in c.cross_edges.iter().enumerate() {
        for id in (0..pos.len()).filter(|&id| pos.formula(id).is_modal()) {
            let child = pos.child_ids(id)[0];
            let target = Slot::Entry(ptype(Source::Cross(e), child, StartRule::Visit)?);
            edges.push((Slot::Left(mc.id(*v, id)), target));
        }
    }
    let modal: Vec<usize> = (0..pos.len()).filter(|&o| pos.formula(o).is_modal()).collect();
    for (i, &x) in c.xs.iter().enumerate() {
        for &o in &modal {
            for &s in &g0.succ[mc.id(x, o)] {
                let l = mc.label(s);
                if !anchor_of.contains_key(&l.node) {
                    edges.push((Slot::Anchor(ProfileKey::new(i, o)), Slot::Left(s)));
                }
            }
        }
    }
    let mut roots: Vec<Slot> = Vec::new();
    for v in 0..c.m1.len() {
        roots.push(slot_of(v, 0)?);
    }
    for e in 0..extras.len() {
        roots.push(Slot::Entry(ptype(Source::Extra(e), 0, StartRule::Visit)?));
    }

    let mut interface = BTreeMap::new();
    for i in 0..k {
        for &o in &modal {
            interface.insert(ProfileKey::new(i, o), ptype(Source::Interface(i), o, StartRule::Continue)?);
        }
    }
    let entries: Vec<PType> = edges
        .iter()
        .flat_map(|(a, b)| [a, b])
        .chain(&roots)
        .filter_map(|s| match s {
            Slot::Entry(t) => Some(t.clone()),
            _ => None,
        })
        .collect();
    let small = build_small_game(&ann, k, &interface, &entries)?;

    let mut g: ParityGame = small.partial.game.clone();
    let mut left_node: HashMap<usize, usize> = HashMap::new();
    for &v in &lefts {
        for id in 0..pos.len() {
            let n = mc.id(v, id);
            left_node.insert(n, g.add_node(g0.owner[n], g0.priority[n]));
        }
    }
    let node = |s: &Slot| -> usize {
        match s {
            Slot::Left(n) => left_node[n],
            Slot::Anchor(key) => small.v4[key],
            Slot::Entry(t) => small.entry(t).expect("entry ptype registered"),
        }
    };
    for (a, b) in &edges {
        g.add_edge(node(a), node(b));
    }
    let sol = solve(&g);
    let wins: Vec<bool> = roots.iter().map(|r| sol.diamond_wins(node(r))).collect();
    let (rows, rest) = wins.split_at(c.m1.len());
    Ok((rows.to_vec(), rest.to_vec()))
}

/// Annotates a closure member with the variable order of the formula it
/// came from, restricted to its own binders. Closure members unfold
/// fixpoints, so their textual binder order may differ from the original.
fn annotate_member(theta: &Formula, seqs: &[VarSequence]) -> Result<AnnotatedFormula> {
    fn bound(f: &Formula, out: &mut BTreeSet<String>) {
        if let Formula::Mu(x, _) | Formula::Nu(x, _) = f {
            out.insert(x.clone());
        }
        for c in f.children() {
            bound(c, out);
        }
    }
    let mut names = BTreeSet::new();
    bound(theta, &mut names);
    for seq in seqs {
        let vars: Vec<_> = seq.vars.iter().filter(|(x, _)| names.contains(x)).cloned().collect();
        if vars.len() != names.len() {
            continue;
        }
        let zs = VarSequence::new(vars)?;
        if check_consistent(theta, &zs) {
            return annotate(theta, &zs);
        }
    }
    annotate(theta, &default_var_sequence(theta)?)
}

fn run(c: &Composition<'_>, extras: &[&MuType]) -> Result<(TypeTable, Vec<MuType>)> {
    let universe = c.validate()?;
    let seqs = c.ls.iter().map(default_var_sequence).collect::<Result<Vec<_>>>()?;
    for t in extras {
        t.check_within(&universe)?;
    }
    let targets: Vec<Formula> = closure_universe(c.ls, c.qs)?.into_iter().collect();
    let results = crate::par::map(targets.iter().collect(), |theta| verdicts(c, &seqs, &universe, theta, extras));
    let mut rows: BTreeMap<usize, MuType> = (0..c.m1.len()).map(|v| (v, MuType::default())).collect();
    let mut extra_types = vec![MuType::default(); extras.len()];
    for (theta, r) in targets.iter().zip(results) {
        let (left, right) = r?;
        for (v, &b) in left.iter().enumerate() {
            if b {
                rows.get_mut(&v).expect("row").0.insert(theta.clone());
            }
        }
        for (e, &b) in right.iter().enumerate() {
            if b {
                extra_types[e].0.insert(theta.clone());
            }
        }
    }
    let anchors =
        c.ys.iter()
            .filter_map(|y| match *y {
                Target::Node(v) => Some(v),
                Target::Marker(i) => c.xs.get(i).copied(),
            })
            .collect();
    let table = TypeTable { closure: targets, markers: c.qs.to_vec(), anchors, rows };
    Ok((table, extra_types))
}

/// Types, over the markers `qs`, of every node of `M1` within the glued
/// structure.
pub fn compose_types(c: &Composition<'_>) -> Result<TypeTable> {
    Ok(run(c, &[])?.0)
}

/// Type within the glued structure of a right-part node whose type within
/// `M2` is `w_type`.
pub fn compose_right_type(c: &Composition<'_>, w_type: &MuType) -> Result<MuType> {
    Ok(run(c, &[w_type])?.1.remove(0))
}
