//! The reward order on priorities and the induced order on profiles.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Rank of a priority in the reward order `0 < 2 < 4 < ... < 5 < 3 < 1`.
/// Smaller is better for the existential player.
pub fn reward_rank(p: u32) -> (u8, i64) {
    if p.is_multiple_of(2) {
        (0, p as i64)
    } else {
        (1, -(p as i64))
    }
}

/// `a ⊑ b` in the reward order.
pub fn reward_leq(a: u32, b: u32) -> bool {
    reward_rank(a) <= reward_rank(b)
}

pub fn reward_cmp(a: u32, b: u32) -> Ordering {
    reward_rank(a).cmp(&reward_rank(b))
}

/// Worse of two priorities for the existential player.
pub fn reward_max(a: u32, b: u32) -> u32 {
    if reward_leq(a, b) {
        b
    } else {
        a
    }
}

/// Priorities in `values` sorted best first.
pub fn reward_sorted(values: &[u32]) -> Vec<u32> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| reward_cmp(*a, *b));
    v.dedup();
    v
}

/// An interface position of a partial game: anchor index and a local node
/// label (the modal position for model-checking games).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileKey {
    pub anchor: usize,
    pub pos: usize,
}

impl ProfileKey {
    pub fn new(anchor: usize, pos: usize) -> Self {
        ProfileKey { anchor, pos }
    }
}

/// Worst priority seen before reaching each interface position. A missing
/// key means the position is never reached, which is the best case.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile(pub BTreeMap<ProfileKey, u32>);

impl Profile {
    pub fn empty() -> Self {
        Profile(BTreeMap::new())
    }

    pub fn get(&self, k: ProfileKey) -> Option<u32> {
        self.0.get(&k).copied()
    }

    /// Records a visit, keeping the worse priority.
    pub fn record(&mut self, k: ProfileKey, p: u32) {
        let e = self.0.entry(k).or_insert(p);
        *e = reward_max(*e, p);
    }

    /// True iff reaching `k` with minimum priority `p` is tolerated.
    pub fn allows(&self, k: ProfileKey, p: u32) -> bool {
        self.get(k).is_some_and(|q| reward_leq(p, q))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(ProfileKey, u32)> for Profile {
    fn from_iter<I: IntoIterator<Item = (ProfileKey, u32)>>(iter: I) -> Self {
        let mut p = Profile::empty();
        for (k, v) in iter {
            p.record(k, v);
        }
        p
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, p)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({},{}):{}", k.anchor, k.pos, p)?;
        }
        write!(f, "}}")
    }
}

/// `y ⊑ z`: every key of `y` is in `z` with a priority at least as bad.
pub fn profile_leq(y: &Profile, z: &Profile) -> bool {
    y.0.iter().all(|(k, p)| z.allows(*k, *p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_chain() {
        let chain = [0, 2, 4, 5, 3, 1];
        for (i, a) in chain.iter().enumerate() {
            for (j, b) in chain.iter().enumerate() {
                assert_eq!(reward_leq(*a, *b), i <= j, "{a} vs {b}");
            }
        }
        assert_eq!(reward_sorted(&[1, 4, 3, 0]), vec![0, 4, 3, 1]);
    }

    #[test]
    fn profile_order() {
        let k = ProfileKey::new(0, 3);
        let y: Profile = [(k, 2)].into_iter().collect();
        let z: Profile = [(k, 1)].into_iter().collect();
        assert!(profile_leq(&Profile::empty(), &y));
        assert!(profile_leq(&y, &z));
        assert!(!profile_leq(&z, &y));
        assert!(!profile_leq(&y, &Profile::empty()));
    }

    #[test]
    fn record_keeps_worse() {
        let k = ProfileKey::new(1, 0);
        let mut y = Profile::empty();
        y.record(k, 2);
        y.record(k, 0);
        assert_eq!(y.get(k), Some(2));
        y.record(k, 3);
        assert_eq!(y.get(k), Some(3));
    }
}
