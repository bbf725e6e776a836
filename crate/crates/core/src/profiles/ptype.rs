//! Profiles of strategies, ptypes by enumeration and by a product-game
//! oracle with monotone dualization.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::order::{profile_leq, reward_sorted, Profile, ProfileKey};
use crate::error::{Error, Result};
use crate::games::{is_partial_winning, solve, ParityGame, PartialParityGame, Player, PositionalStrategy};

/// How the start node of a play is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StartRule {
    /// The start is a visit like any other: an interface start is recorded
    /// and the existential player may stop there.
    Visit,
    /// The play has just entered through the start: nothing is recorded
    /// there and the owner must move.
    Continue,
}

/// The ⊑-minimal profiles achievable from a node. Empty means losing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PType(pub BTreeSet<Profile>);

impl PType {
    pub fn losing() -> Self {
        PType(BTreeSet::new())
    }

    /// `{∅}`: winning without ever touching the interface.
    pub fn trivially_winning() -> Self {
        PType(BTreeSet::from([Profile::empty()]))
    }

    /// Keeps the ⊑-minimal members.
    pub fn minimize(profiles: impl IntoIterator<Item = Profile>) -> Self {
        let all: BTreeSet<Profile> = profiles.into_iter().collect();
        let keep = all.iter().filter(|y| !all.iter().any(|z| z != *y && profile_leq(z, y))).cloned().collect();
        PType(keep)
    }

    pub fn is_antichain(&self) -> bool {
        self.0.iter().all(|y| !self.0.iter().any(|z| z != y && profile_leq(z, y)))
    }

    /// True iff some member is at least as good as `y`.
    pub fn admits(&self, y: &Profile) -> bool {
        self.0.iter().any(|m| profile_leq(m, y))
    }

    pub fn is_losing(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, y) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{y}")?;
        }
        write!(f, "}}")
    }
}

/// Profile key of every interface node (others map to `None`).
pub type Keying = Vec<Option<ProfileKey>>;

/// Keys `(u, 0)` for a plain partial game.
pub fn node_keying(p: &PartialParityGame) -> Keying {
    (0..p.game.len()).map(|u| p.interface.contains(&u).then_some(ProfileKey::new(u, 0))).collect()
}

/// Profile of a positional partial strategy from `v`: the worst minimum
/// priority along conforming paths to each interface position at which
/// the play may leave (universal interface nodes, and existential ones
/// where `pi` stops).
pub fn compute_profile(
    p: &PartialParityGame,
    keys: &Keying,
    pi: &PositionalStrategy,
    v: usize,
    rule: StartRule,
) -> Result<Profile> {
    if !is_partial_winning(p, v, pi)? {
        return Err(Error::InvalidStrategy("strategy is not partially winning".into()));
    }
    let g = &p.game;
    if rule == StartRule::Continue && g.owner[v] == Player::Diamond && pi.get(v).is_none() {
        return Err(Error::InvalidStrategy("no move at the start".into()));
    }
    let mut y = Profile::empty();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    match rule {
        StartRule::Visit => queue.push_back((v, g.priority[v])),
        StartRule::Continue => {
            let first = match g.owner[v] {
                Player::Diamond => vec![pi.get(v).expect("checked above")],
                Player::Box => g.succ[v].clone(),
            };
            for w in first {
                queue.push_back((w, g.priority[v].min(g.priority[w])));
            }
        }
    }
    while let Some((u, m)) = queue.pop_front() {
        if !seen.insert((u, m)) {
            continue;
        }
        let stops = g.owner[u] == Player::Diamond && pi.get(u).is_none();
        if let Some(k) = keys[u].filter(|_| p.interface.contains(&u)) {
            if g.owner[u] == Player::Box || stops {
                y.record(k, m);
            }
        }
        if stops {
            continue;
        }
        let next = match g.owner[u] {
            Player::Diamond => vec![pi.get(u).expect("not stopping")],
            Player::Box => g.succ[u].clone(),
        };
        for w in next {
            queue.push_back((w, m.min(g.priority[w])));
        }
    }
    Ok(y)
}

fn reachable(g: &ParityGame, v: usize) -> Vec<usize> {
    let mut seen = vec![false; g.len()];
    let mut out = vec![v];
    seen[v] = true;
    let mut i = 0;
    while i < out.len() {
        for &w in &g.succ[out[i]] {
            if !seen[w] {
                seen[w] = true;
                out.push(w);
            }
        }
        i += 1;
    }
    out
}

/// Upper bound on positional strategies enumerated by [`ptype_enum`].
pub const ENUM_GUARD: u64 = 1 << 20;

/// ptype of `v` (start rule [`StartRule::Visit`]) by enumerating every
/// positional partial strategy on the nodes reachable from `v`.
pub fn ptype_enum(p: &PartialParityGame, keys: &Keying, v: usize) -> Result<PType> {
    let g = &p.game;
    let dnodes: Vec<usize> = reachable(g, v).into_iter().filter(|&u| g.owner[u] == Player::Diamond).collect();
    let options: Vec<Vec<Option<usize>>> = dnodes
        .iter()
        .map(|&u| {
            let mut o: Vec<Option<usize>> = g.succ[u].iter().map(|&w| Some(w)).collect();
            if p.interface.contains(&u) || o.is_empty() {
                o.push(None);
            }
            o
        })
        .collect();
    let total = options.iter().try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64).filter(|t| *t <= ENUM_GUARD));
    if total.is_none() {
        return Err(Error::SizeGuard(format!("more than {ENUM_GUARD} positional strategies")));
    }
    let mut found = Vec::new();
    let mut choice = vec![0usize; dnodes.len()];
    loop {
        let pi = PositionalStrategy {
            moves: dnodes.iter().enumerate().filter_map(|(i, &u)| options[i][choice[i]].map(|w| (u, w))).collect(),
        };
        if is_partial_winning(p, v, &pi)? {
            found.push(compute_profile(p, keys, &pi, v, StartRule::Visit)?);
        }
        let mut i = 0;
        loop {
            if i == dnodes.len() {
                return Ok(PType::minimize(found));
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Decides "some partial winning strategy has profile ⊑ y" for many `y`
/// by solving a game over pairs (node, minimum priority so far).
pub struct ProfileOracle<'a> {
    p: &'a PartialParityGame,
    keys: &'a Keying,
    prios: Vec<u32>,
    /// product nodes: (game node, index into `prios`); `None` is the start copy
    nodes: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    start: usize,
    start_is_copy: bool,
    cache: HashMap<Profile, bool>,
}

impl<'a> ProfileOracle<'a> {
    pub fn new(p: &'a PartialParityGame, keys: &'a Keying, v: usize, rule: StartRule) -> Self {
        let g = &p.game;
        let mut prios: Vec<u32> = g.priority.clone();
        prios.sort_unstable();
        prios.dedup();
        let pidx = |q: u32| prios.binary_search(&q).expect("known priority");
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |n: (usize, usize),
                          nodes: &mut Vec<(usize, usize)>,
                          succ: &mut Vec<Vec<usize>>,
                          queue: &mut VecDeque<usize>|
         -> usize {
            *index.entry(n).or_insert_with(|| {
                nodes.push(n);
                succ.push(Vec::new());
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            })
        };
        let (start, start_is_copy) = match rule {
            StartRule::Visit => (intern((v, pidx(g.priority[v])), &mut nodes, &mut succ, &mut queue), false),
            StartRule::Continue => {
                nodes.push((v, pidx(g.priority[v])));
                succ.push(Vec::new());
                queue.push_back(0);
                (0, true)
            }
        };
        while let Some(i) = queue.pop_front() {
            let (u, m) = nodes[i];
            let next: Vec<usize> = g.succ[u]
                .iter()
                .map(|&w| intern((w, m.min(pidx(g.priority[w]))), &mut nodes, &mut succ, &mut queue))
                .collect();
            succ[i] = next;
        }
        ProfileOracle { p, keys, prios, nodes, succ, start, start_is_copy, cache: HashMap::new() }
    }

    /// Interface keys that some play from the start can record.
    pub fn relevant_keys(&self) -> BTreeSet<ProfileKey> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| !(self.start_is_copy && *i == self.start))
            .filter_map(|(_, &(u, _))| self.keys[u].filter(|_| self.p.interface.contains(&u)))
            .collect()
    }

    pub fn priorities(&self) -> &[u32] {
        &self.prios
    }

    pub fn product_size(&self) -> usize {
        self.nodes.len()
    }

    /// True iff some partial winning strategy has profile ⊑ `y`.
    pub fn wins(&mut self, y: &Profile) -> bool {
        if let Some(&b) = self.cache.get(y) {
            return b;
        }
        let g = &self.p.game;
        let mut q = ParityGame::new();
        for (i, &(u, _)) in self.nodes.iter().enumerate() {
            q.add_node(g.owner[u], g.priority[u]);
            q.succ[i] = self.succ[i].clone();
        }
        let win = q.add_node(Player::Box, 0);
        for (i, &(u, m)) in self.nodes.iter().enumerate() {
            if self.start_is_copy && i == self.start {
                continue;
            }
            let Some(k) = self.keys[u].filter(|_| self.p.interface.contains(&u)) else { continue };
            let allowed = y.allows(k, self.prios[m]);
            match g.owner[u] {
                Player::Box if !allowed => {
                    q.owner[i] = Player::Diamond;
                    q.succ[i].clear();
                }
                Player::Diamond if allowed => q.add_edge(i, win),
                _ => {}
            }
        }
        let b = solve(&q).diamond_wins(self.start);
        self.cache.insert(y.clone(), b);
        b
    }
}

/// Levels per key: 0 is "absent", then priorities from best to worst.
struct Lattice {
    keys: Vec<ProfileKey>,
    levels: Vec<u32>,
}

impl Lattice {
    fn profile(&self, point: &[usize]) -> Profile {
        Profile(
            self.keys
                .iter()
                .zip(point)
                .filter(|(_, &l)| l > 0)
                .map(|(k, &l)| (*k, self.levels[l - 1]))
                .collect::<BTreeMap<_, _>>(),
        )
    }
}

/// ptype of the oracle's start node.
pub fn ptype_solve(oracle: &mut ProfileOracle<'_>) -> PType {
    let keys: Vec<ProfileKey> = oracle.relevant_keys().into_iter().collect();
    let levels = reward_sorted(oracle.priorities());
    minimal_profiles(&keys, &levels, |y| oracle.wins(y))
}

/// The ⊑-minimal profiles over `keys` and priority values `levels` for a
/// monotone predicate `wins`, found by descending from each maximal point
/// not yet above a known minimal profile.
pub fn minimal_profiles(keys: &[ProfileKey], levels: &[u32], mut wins: impl FnMut(&Profile) -> bool) -> PType {
    let lat = Lattice { keys: keys.to_vec(), levels: reward_sorted(levels) };
    let top_level = lat.levels.len();
    let dims = lat.keys.len();
    let mut cache: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut wins = |pt: &[usize]| *cache.entry(pt.to_vec()).or_insert_with(|| wins(&lat.profile(pt)));
    let mut minimal: Vec<Vec<usize>> = Vec::new();
    // maximal points outside the up-set of `minimal`, with a tested flag
    let mut frontier: Vec<(Vec<usize>, bool)> = vec![(vec![top_level; dims], false)];
    while let Some(i) = frontier.iter().position(|(_, tested)| !tested) {
        let d = frontier[i].0.clone();
        if !wins(&d) {
            frontier[i].1 = true;
            continue;
        }
        let mut m = d;
        for k in 0..dims {
            let (mut lo, mut hi) = (0usize, m[k]);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let mut t = m.clone();
                t[k] = mid;
                if wins(&t) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            m[k] = hi;
        }
        let mut next: Vec<(Vec<usize>, bool)> = Vec::new();
        for (f, tested) in frontier.drain(..) {
            if f.iter().zip(&m).all(|(a, b)| a >= b) {
                for k in 0..dims {
                    if m[k] > 0 {
                        let mut c = f.clone();
                        c[k] = m[k] - 1;
                        next.push((c, false));
                    }
                }
            } else {
                next.push((f, tested));
            }
        }
        next.sort();
        next.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 |= a.1;
                true
            } else {
                false
            }
        });
        let pts: Vec<Vec<usize>> = next.iter().map(|(p, _)| p.clone()).collect();
        frontier = next
            .into_iter()
            .filter(|(p, _)| !pts.iter().any(|q| q != p && q.iter().zip(p).all(|(a, b)| a >= b)))
            .collect();
        minimal.push(m);
    }
    PType(minimal.iter().map(|m| lat.profile(m)).collect())
}

/// ptype of `v` in `p` via [`ProfileOracle`] and [`ptype_solve`].
pub fn ptype_of(p: &PartialParityGame, keys: &Keying, v: usize, rule: StartRule) -> PType {
    ptype_solve(&mut ProfileOracle::new(p, keys, v, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn game(nodes: &[(Player, u32)], edges: &[(usize, usize)], interface: &[usize]) -> PartialParityGame {
        let mut g = ParityGame::new();
        for &(o, p) in nodes {
            g.add_node(o, p);
        }
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        PartialParityGame { game: g, interface: interface.iter().copied().collect() }
    }

    fn key(u: usize) -> ProfileKey {
        ProfileKey::new(u, 0)
    }

    #[test]
    fn profile_examples() {
        let p = game(&[(Player::Diamond, 2), (Player::Diamond, 1)], &[(0, 1)], &[1]);
        let keys = node_keying(&p);
        let pi = PositionalStrategy { moves: BTreeMap::from([(0, 1)]) };
        let y = compute_profile(&p, &keys, &pi, 0, StartRule::Visit).unwrap();
        assert_eq!(y, [(key(1), 1)].into_iter().collect());

        let p = game(&[(Player::Diamond, 0), (Player::Diamond, 1)], &[(0, 0), (0, 1)], &[1]);
        let pi = PositionalStrategy { moves: BTreeMap::from([(0, 0)]) };
        assert_eq!(compute_profile(&p, &node_keying(&p), &pi, 0, StartRule::Visit).unwrap(), Profile::empty());

        // two routes into u = 3: through priority 0 and through priority 1
        let p = game(
            &[(Player::Box, 2), (Player::Diamond, 0), (Player::Diamond, 1), (Player::Diamond, 2)],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
            &[3],
        );
        let pi = PositionalStrategy { moves: BTreeMap::from([(1, 3), (2, 3)]) };
        assert_eq!(
            compute_profile(&p, &node_keying(&p), &pi, 0, StartRule::Visit).unwrap(),
            [(key(3), 1)].into_iter().collect()
        );
    }

    #[test]
    fn enum_examples() {
        let p = game(&[(Player::Diamond, 0)], &[], &[]);
        assert_eq!(ptype_enum(&p, &node_keying(&p), 0).unwrap(), PType::losing());
        let p = game(&[(Player::Diamond, 0)], &[(0, 0)], &[]);
        assert_eq!(ptype_enum(&p, &node_keying(&p), 0).unwrap(), PType::trivially_winning());
    }

    #[test]
    fn continue_rule_forces_a_move() {
        // interface diamond start with an odd self-loop: under Visit it may stop
        let p = game(&[(Player::Diamond, 1)], &[(0, 0)], &[0]);
        let keys = node_keying(&p);
        assert_eq!(
            ptype_of(&p, &keys, 0, StartRule::Visit),
            PType(BTreeSet::from([[(key(0), 1)].into_iter().collect()]))
        );
        assert_eq!(
            ptype_of(&p, &keys, 0, StartRule::Continue),
            PType(BTreeSet::from([[(key(0), 1)].into_iter().collect()]))
        );
        let q = game(&[(Player::Diamond, 1), (Player::Box, 1)], &[(0, 1)], &[0]);
        assert_eq!(ptype_of(&q, &node_keying(&q), 0, StartRule::Continue), PType::trivially_winning());
        let r = game(&[(Player::Diamond, 1)], &[], &[0]);
        assert_eq!(ptype_of(&r, &node_keying(&r), 0, StartRule::Continue), PType::losing());
    }

    pub(crate) fn arb_partial() -> impl Strategy<Value = PartialParityGame> {
        (1usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec((any::<bool>(), 0u32..4, any::<bool>()), n),
                prop::collection::vec(prop::collection::vec(0..n, 0..3), n),
            )
                .prop_map(|(nodes, succ)| {
                    let mut g = ParityGame::new();
                    let mut interface = BTreeSet::new();
                    for (i, (d, p, u)) in nodes.into_iter().enumerate() {
                        g.add_node(if d { Player::Diamond } else { Player::Box }, p);
                        if u {
                            interface.insert(i);
                        }
                    }
                    for (u, vs) in succ.into_iter().enumerate() {
                        for v in vs {
                            g.add_edge(u, v);
                        }
                    }
                    PartialParityGame { game: g, interface }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn oracle_matches_enumeration(p in arb_partial()) {
            let keys = node_keying(&p);
            for v in 0..p.game.len() {
                let e = ptype_enum(&p, &keys, v).unwrap();
                prop_assert!(e.is_antichain());
                prop_assert_eq!(ptype_of(&p, &keys, v, StartRule::Visit), e);
            }
        }
    }
}
