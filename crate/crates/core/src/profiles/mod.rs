//! Profiles and ptypes of partial parity games.

mod order;
mod ptype;
mod route;
mod small;

pub use order::{profile_leq, reward_cmp, reward_leq, reward_max, reward_rank, reward_sorted, Profile, ProfileKey};
pub use ptype::{
    compute_profile, minimal_profiles, node_keying, ptype_enum, ptype_of, ptype_solve, Keying, PType, ProfileOracle,
    StartRule, ENUM_GUARD,
};
pub use route::{anchored_game, mc_keying, mc_ptype, profile_universe};
pub use small::{build_small_game, replace_subgame, SmallGame};
