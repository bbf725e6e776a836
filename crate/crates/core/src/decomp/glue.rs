//! The composition step shared by both drivers.
//!
//! A part is an induced substructure `G[N]` with ordered anchors `S ⊆ N`,
//! summarized by the ptype of every interior position (node of `N \ S`
//! paired with a position of the formula) in its model-checking game, where
//! the modal positions at anchors form the interface. Gluing keeps a set of
//! nodes explicit, replaces each part's interior by the gadget of its
//! ptypes, and reads the ptypes of the union off the hybrid game.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::formula::closure::Positions;
use crate::formula::AnnotatedFormula;
use crate::games::mc::owner;
use crate::games::{ParityGame, PartialParityGame, Player};
use crate::profiles::{ptype_of, Keying, PType, Profile, ProfileKey, StartRule};
use crate::structures::Structure;

/// Formula data shared by every step of a run.
pub(crate) struct Ctx<'a> {
    pub g: &'a Structure,
    pub phi: &'a AnnotatedFormula,
    pub pos: Positions,
    kids: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    pub fn new(g: &'a Structure, phi: &'a AnnotatedFormula) -> Self {
        let pos = Positions::new(&phi.formula);
        let kids = (0..pos.len()).map(|i| pos.child_ids(i)).collect();
        Ctx { g, phi, pos, kids }
    }

    fn modal(&self, id: usize) -> bool {
        self.pos.formula(id).is_modal()
    }
}

/// A summarized part. `table[v][id]` indexes into `ptypes`.
#[derive(Clone, Debug)]
pub(crate) struct Part {
    pub nodes: BTreeSet<usize>,
    pub anchors: Vec<usize>,
    pub ptypes: Vec<PType>,
    pub table: BTreeMap<usize, Vec<usize>>,
}

impl Part {
    pub fn ptype(&self, v: usize, id: usize) -> Option<&PType> {
        self.table.get(&v).map(|row| &self.ptypes[row[id]])
    }

    /// Number of stored ptype entries.
    pub fn size(&self) -> usize {
        self.table.len() * self.table.values().next().map_or(0, Vec::len)
    }
}

/// Glues `parts` together with the `explicit` nodes, anchoring the result
/// at `anchors`.
///
/// Requirements: every part anchor and every new anchor is explicit, no new
/// anchor lies inside a part, and inside the union no edge leaves a part's
/// interior except into the part itself. Interiors may overlap each other
/// and the explicit set.
pub(crate) fn glue(ctx: &Ctx<'_>, explicit: &BTreeSet<usize>, parts: &[&Part], anchors: Vec<usize>) -> Result<Part> {
    let np = ctx.pos.len();
    let mut union = explicit.clone();
    for p in parts {
        union.extend(&p.nodes);
    }
    for &a in &anchors {
        if !explicit.contains(&a) || parts.iter().any(|p| p.table.contains_key(&a)) {
            return Err(Error::InvalidDecomposition(format!("anchor {} is not explicit", ctx.g.id(a))));
        }
    }
    for p in parts {
        if let Some(&a) = p.anchors.iter().find(|a| !explicit.contains(a)) {
            return Err(Error::InvalidDecomposition(format!("part anchor {} is not explicit", ctx.g.id(a))));
        }
        for &v in p.table.keys() {
            if let Some(&w) = ctx.g.succ(v).iter().find(|w| union.contains(w) && !p.nodes.contains(w)) {
                return Err(Error::InvalidDecomposition(format!(
                    "edge {} -> {} leaves a part that is not guarded",
                    ctx.g.id(v),
                    ctx.g.id(w)
                )));
            }
        }
    }

    let mut game = ParityGame::new();
    let mut keys: Keying = Vec::new();
    let top = ctx.phi.max_priority;
    let mut node: HashMap<(usize, usize), usize> = HashMap::new();
    let anchor_index: HashMap<usize, usize> = anchors.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    for &x in explicit {
        for id in 0..np {
            let f = ctx.pos.formula(id);
            node.insert((x, id), game.add_node(owner(ctx.g, x, f), ctx.phi.node_priority(f)));
            let key = anchor_index.get(&x).filter(|_| f.is_modal()).map(|&i| ProfileKey::new(i, id));
            keys.push(key);
        }
    }
    // gadget of each part: one node per ptype, per profile, per (key, value)
    let mut entry: Vec<Vec<usize>> = Vec::new();
    for p in parts {
        let mut v2: BTreeMap<&Profile, usize> = BTreeMap::new();
        let mut v3: BTreeMap<(ProfileKey, u32), usize> = BTreeMap::new();
        let mut v1 = Vec::with_capacity(p.ptypes.len());
        for t in &p.ptypes {
            let n1 = game.add_node(Player::Diamond, top);
            keys.push(None);
            for y in &t.0 {
                let n2 = *v2.entry(y).or_insert_with(|| {
                    keys.push(None);
                    game.add_node(Player::Box, top)
                });
                game.add_edge(n1, n2);
                for (&kk, &prio) in &y.0 {
                    let n3 = *v3.entry((kk, prio)).or_insert_with(|| {
                        keys.push(None);
                        let n = game.add_node(Player::Diamond, prio);
                        game.add_edge(n, node[&(p.anchors[kk.anchor], kk.pos)]);
                        n
                    });
                    game.add_edge(n2, n3);
                }
            }
            v1.push(n1);
        }
        entry.push(v1);
    }
    let lookup = |w: usize, id: usize| -> usize {
        if let Some(&n) = node.get(&(w, id)) {
            return n;
        }
        let (j, p) = parts.iter().enumerate().find(|(_, p)| p.table.contains_key(&w)).expect("node covered by a part");
        entry[j][p.table[&w][id]]
    };
    for &x in explicit {
        for id in 0..np {
            let n = node[&(x, id)];
            if ctx.modal(id) {
                let c = ctx.kids[id][0];
                for &w in ctx.g.succ(x).iter().filter(|w| union.contains(w)) {
                    game.add_edge(n, lookup(w, c));
                }
            } else {
                for &c in &ctx.kids[id] {
                    game.add_edge(n, node[&(x, c)]);
                }
            }
        }
    }
    let interface = keys.iter().enumerate().filter(|(_, k)| k.is_some()).map(|(i, _)| i).collect();
    let partial = PartialParityGame { game, interface };

    let inner: Vec<usize> = explicit.iter().copied().filter(|x| !anchor_index.contains_key(x)).collect();
    let mut starts: Vec<usize> = inner.iter().flat_map(|&x| (0..np).map(move |id| (x, id))).map(|k| node[&k]).collect();
    starts.extend(entry.iter().flatten());
    let solved = crate::par::map(starts.clone(), |s| ptype_of(&partial, &keys, s, StartRule::Visit));

    let mut ptypes: Vec<PType> = Vec::new();
    let mut intern: HashMap<PType, usize> = HashMap::new();
    let mut index_of = HashMap::new();
    for (s, t) in starts.iter().zip(solved) {
        let i = *intern.entry(t.clone()).or_insert_with(|| {
            ptypes.push(t);
            ptypes.len() - 1
        });
        index_of.insert(*s, i);
    }
    let mut table: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &x in &inner {
        table.insert(x, (0..np).map(|id| index_of[&node[&(x, id)]]).collect());
    }
    for (j, p) in parts.iter().enumerate() {
        for (&v, row) in &p.table {
            table.entry(v).or_insert_with(|| row.iter().map(|&t| index_of[&entry[j][t]]).collect());
        }
    }
    Ok(Part { nodes: union, anchors, ptypes, table })
}

/// Whether `phi` holds at `v` according to an unanchored part.
pub(crate) fn verdict(part: &Part, v: usize) -> Result<bool> {
    debug_assert!(part.anchors.is_empty());
    part.ptype(v, 0)
        .map(|t| !t.is_losing())
        .ok_or_else(|| Error::InvalidDecomposition("node not covered by the decomposition".into()))
}
