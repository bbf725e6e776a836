//! Profiles of model-checking games and their formula counterparts.

use std::collections::BTreeSet;

use super::order::{Profile, ProfileKey};
use super::ptype::{ptype_of, Keying, PType, StartRule};
use crate::error::{Error, Result};
use crate::formula::AnnotatedFormula;
use crate::games::{build_partial_mc_game, McGame};
use crate::structures::Structure;

/// Keys `(i, pos)` for the interface node `(x_i, pos)`.
pub fn mc_keying(g: &McGame, xs: &[usize]) -> Keying {
    (0..g.game().len())
        .map(|id| {
            let l = g.label(id);
            xs.iter()
                .position(|&x| x == l.node)
                .filter(|_| g.partial.interface.contains(&id))
                .map(|i| ProfileKey::new(i, l.pos))
        })
        .collect()
}

/// The partial model-checking game over the anchors `xs` (distinct nodes).
pub fn anchored_game(m: &Structure, phi: &AnnotatedFormula, xs: &[usize]) -> Result<(McGame, Keying)> {
    let set: BTreeSet<usize> = xs.iter().copied().collect();
    if set.len() != xs.len() {
        return Err(Error::Input("anchors must be distinct".into()));
    }
    if let Some(x) = xs.iter().find(|&&x| x >= m.len()) {
        return Err(Error::UnknownNode(format!("#{x}")));
    }
    let g = build_partial_mc_game(&set, m, phi);
    let keys = mc_keying(&g, xs);
    Ok((g, keys))
}

/// ptype of the game node `(v, pos)` over the anchors `xs`.
pub fn mc_ptype(
    m: &Structure,
    phi: &AnnotatedFormula,
    xs: &[usize],
    v: usize,
    pos: usize,
    rule: StartRule,
) -> Result<PType> {
    let (g, keys) = anchored_game(m, phi, xs)?;
    Ok(ptype_of(&g.partial, &keys, g.id(v, pos), rule))
}

/// Every profile over `keys` with values from `prios`.
pub fn profile_universe(keys: &[ProfileKey], prios: &[u32]) -> Vec<Profile> {
    let mut out = vec![Profile::empty()];
    for &k in keys {
        let mut next = Vec::with_capacity(out.len() * (prios.len() + 1));
        for y in &out {
            next.push(y.clone());
            for &p in prios {
                let mut z = y.clone();
                z.0.insert(k, p);
                next.push(z);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::closure::Positions;
    use crate::formula::tracking::transform_at;
    use crate::formula::{annotate, default_var_sequence, markers};
    use crate::games::eval_naive;
    use crate::gen::{interesting_formula, random_anchors, random_structure, rng, FormulaShape};
    use crate::structures::color;
    use rand::Rng;

    /// The transform of every closure element is true exactly when the
    /// game ptype admits the profile.
    #[test]
    fn transform_agrees_with_game() {
        let mut r = rng(2026);
        let mut checked = 0;
        for _ in 0..40 {
            let n = r.gen_range(1..=4);
            let m = random_structure(&mut r, n, 0.35);
            let f = interesting_formula(&mut r, FormulaShape { max_fixpoints: 2, max_modal: 2, max_depth: 5 });
            let phi = annotate(&f, &default_var_sequence(&f).unwrap()).unwrap();
            let k = r.gen_range(0..=2);
            let xs = random_anchors(&mut r, n, k);
            let ps = markers("P", xs.len());
            let colored = color(&m, &xs, &ps).unwrap().structure;
            let pos = Positions::new(&phi.formula);
            let modal: Vec<usize> = (0..pos.len()).filter(|&i| pos.formula(i).is_modal()).collect();
            let keys: Vec<ProfileKey> =
                (0..xs.len()).flat_map(|i| modal.iter().map(move |&o| ProfileKey::new(i, o))).collect();
            let universe = profile_universe(&keys, &phi.priority_values());
            for v in 0..n {
                for id in 0..pos.len() {
                    let t = mc_ptype(&m, &phi, &xs, v, id, StartRule::Visit).unwrap();
                    for y in universe.iter().step_by(1 + universe.len() / 24) {
                        let psi_y = transform_at(&phi, &pos, id, y, &ps);
                        assert_eq!(
                            eval_naive(&colored, v, &psi_y),
                            t.admits(y),
                            "phi = {}, v = {v}, pos = {id}, y = {y}, ptype = {t}",
                            phi.formula
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }
}
