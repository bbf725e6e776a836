//! The layered game that simulates a model-checking game from the ptypes of
//! its interface nodes, and subgame replacement.

use std::collections::{BTreeMap, BTreeSet};

use super::order::{Profile, ProfileKey};
use super::ptype::{Keying, PType};
use crate::error::{Error, Result};
use crate::formula::closure::Positions;
use crate::formula::AnnotatedFormula;
use crate::games::{ParityGame, PartialParityGame, Player};

/// The four-layer game. Layer 1 holds one existential node per ptype, layer
/// 2 one universal node per profile, layer 3 one node per (key, priority)
/// carrying that priority, layer 4 the interface pairs.
#[derive(Clone, Debug)]
pub struct SmallGame {
    pub partial: PartialParityGame,
    pub keys: Keying,
    pub v1: BTreeMap<PType, usize>,
    pub v2: BTreeMap<Profile, usize>,
    pub v3: BTreeMap<(ProfileKey, u32), usize>,
    pub v4: BTreeMap<ProfileKey, usize>,
}

impl SmallGame {
    pub fn entry(&self, t: &PType) -> Option<usize> {
        self.v1.get(t).copied()
    }
}

/// Builds the small game for anchors `0..k`. `interface` gives, for every
/// pair `(i, pos)` of an anchor and a modal position, the ptype of that
/// interface node when the play continues from it; `entries` are extra
/// ptypes to materialize as layer-1 nodes.
pub fn build_small_game(
    phi: &AnnotatedFormula,
    k: usize,
    interface: &BTreeMap<ProfileKey, PType>,
    entries: &[PType],
) -> Result<SmallGame> {
    let pos = Positions::new(&phi.formula);
    for i in 0..k {
        for o in (0..pos.len()).filter(|&o| pos.formula(o).is_modal()) {
            if !interface.contains_key(&ProfileKey::new(i, o)) {
                return Err(Error::MissingPType(format!("({i}, {o})")));
            }
        }
    }
    let top = phi.max_priority;
    let mut g = ParityGame::new();
    let mut keys: Keying = Vec::new();
    let add = |g: &mut ParityGame, keys: &mut Keying, owner: Player, prio: u32, key: Option<ProfileKey>| {
        keys.push(key);
        g.add_node(owner, prio)
    };
    let mut v4 = BTreeMap::new();
    for &kk in interface.keys() {
        if kk.anchor >= k || kk.pos >= pos.len() {
            return Err(Error::UnknownProfileKey(format!("({}, {})", kk.anchor, kk.pos)));
        }
        let owner = if matches!(pos.formula(kk.pos), crate::formula::Formula::Diamond(_)) {
            Player::Diamond
        } else {
            Player::Box
        };
        v4.insert(kk, add(&mut g, &mut keys, owner, top, Some(kk)));
    }
    let ptypes: BTreeSet<&PType> = interface.values().chain(entries).collect();
    let mut v1 = BTreeMap::new();
    for t in &ptypes {
        v1.insert((*t).clone(), add(&mut g, &mut keys, Player::Diamond, top, None));
    }
    let mut v2 = BTreeMap::new();
    for y in ptypes.iter().flat_map(|t| t.0.iter()) {
        if !v2.contains_key(y) {
            v2.insert(y.clone(), add(&mut g, &mut keys, Player::Box, top, None));
        }
    }
    let mut v3 = BTreeMap::new();
    for y in v2.keys() {
        for (&kk, &p) in &y.0 {
            let Some(&target) = v4.get(&kk) else {
                return Err(Error::UnknownProfileKey(format!("({}, {})", kk.anchor, kk.pos)));
            };
            let n = *v3.entry((kk, p)).or_insert_with(|| add(&mut g, &mut keys, Player::Diamond, p, None));
            g.add_edge(n, target);
        }
    }
    for (t, &n) in &v1 {
        for y in &t.0 {
            g.add_edge(n, v2[y]);
        }
    }
    for (y, &n) in &v2 {
        for (&kk, &p) in &y.0 {
            g.add_edge(n, v3[&(kk, p)]);
        }
    }
    for (kk, t) in interface {
        g.add_edge(v4[kk], v1[t]);
    }
    let partial = PartialParityGame { game: g, interface: v4.values().copied().collect() };
    Ok(SmallGame { partial, keys, v1, v2, v3, v4 })
}

/// Replaces the induced subgame on `q` (which contains the interface `u`)
/// by `qprime`. Edges into a removed node `v` are redirected to `f[v]`;
/// interface nodes become their images and keep their edges leaving `q`.
/// Returns the new game and the image of every node of `p`.
pub fn replace_subgame(
    p: &ParityGame,
    q: &BTreeSet<usize>,
    u: &BTreeSet<usize>,
    qprime: &PartialParityGame,
    f: &BTreeMap<usize, usize>,
) -> Result<(ParityGame, Vec<usize>)> {
    if !u.is_subset(q) {
        return Err(Error::InvalidSeparation("interface outside the replaced subgame".into()));
    }
    for &v in q {
        if !u.contains(&v) && p.succ[v].iter().any(|w| !q.contains(w)) {
            return Err(Error::InvalidSeparation(format!("edge leaves the subgame at {v}")));
        }
        match f.get(&v) {
            Some(&w) if w < qprime.game.len() => {}
            _ => return Err(Error::InvalidSeparation(format!("no image for node {v}"))),
        }
    }
    let image_u: BTreeSet<usize> = u.iter().map(|v| f[v]).collect();
    if image_u != qprime.interface {
        return Err(Error::InvalidSeparation("interface mismatch".into()));
    }
    let mut g = qprime.game.clone();
    let mut image = vec![usize::MAX; p.len()];
    for v in 0..p.len() {
        image[v] = if q.contains(&v) { f[&v] } else { g.add_node(p.owner[v], p.priority[v]) };
    }
    for v in 0..p.len() {
        if q.contains(&v) && !u.contains(&v) {
            continue;
        }
        for &w in &p.succ[v] {
            if u.contains(&v) && q.contains(&w) {
                continue;
            }
            g.add_edge(image[v], image[w]);
        }
    }
    Ok((g, image))
}
