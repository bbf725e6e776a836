//! Priority-tracking variants, the profile transform and marker renaming.
//!
//! A modal occurrence may be decorated with a set of markers: a diamond as
//! `(R1 | R2 | ...) | <>chi` and a box as `(!R1 & !R2 & ...) & []chi`. The
//! marker part is a right fold in marker order; an empty set leaves the
//! occurrence untouched.

use std::collections::{BTreeMap, BTreeSet};

use super::closure::Positions;
use super::{cl_set, is_marker, AnnotatedFormula, Formula, FormulaSet, IndexedFormula, MARKER_PREFIX};
use crate::error::{Error, Result};
use crate::profiles::{Profile, ProfileKey};

/// Sort key for markers: family then numeric index.
fn marker_key(name: &str) -> (String, usize, String) {
    let body = name.trim_start_matches(MARKER_PREFIX);
    let digits = body.len() - body.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (fam, idx) = body.split_at(body.len() - digits);
    (fam.to_string(), idx.parse().unwrap_or(0), name.to_string())
}

fn sorted_markers<'a>(ms: impl IntoIterator<Item = &'a String>) -> Vec<String> {
    let mut v: Vec<String> = ms.into_iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    v.sort_by_key(|m| marker_key(m));
    v
}

/// `(R1 | ... | Rk) | body` for a diamond `body`; `body` itself when empty.
pub fn wrap_diamond<'a>(markers: impl IntoIterator<Item = &'a String>, body: Formula) -> Formula {
    let ms = sorted_markers(markers);
    match ms.iter().rev().map(|m| Formula::Prop(m.clone())).reduce(|acc, m| Formula::or(m, acc)) {
        Some(d) => Formula::or(d, body),
        None => body,
    }
}

/// `(!R1 & ... & !Rk) & body` for a box `body`; `body` itself when empty.
pub fn wrap_box<'a>(markers: impl IntoIterator<Item = &'a String>, body: Formula) -> Formula {
    let ms = sorted_markers(markers);
    match ms.iter().rev().map(|m| Formula::NegProp(m.clone())).reduce(|acc, m| Formula::and(m, acc)) {
        Some(c) => Formula::and(c, body),
        None => body,
    }
}

fn marker_disjuncts(f: &Formula, out: &mut Vec<String>) -> bool {
    match f {
        Formula::Prop(m) if is_marker(m) => {
            out.push(m.clone());
            true
        }
        Formula::Or(a, b) => marker_disjuncts(a, out) && marker_disjuncts(b, out),
        _ => false,
    }
}

fn marker_conjuncts(f: &Formula, out: &mut Vec<String>) -> bool {
    match f {
        Formula::NegProp(m) if is_marker(m) => {
            out.push(m.clone());
            true
        }
        Formula::And(a, b) => marker_conjuncts(a, out) && marker_conjuncts(b, out),
        _ => false,
    }
}

/// Splits a decorated modal node into its markers and the bare modal
/// formula. Nested decorations are flattened.
pub(crate) fn split_wrapper(f: &Formula) -> Option<(Vec<String>, &Formula)> {
    match f {
        Formula::Diamond(_) | Formula::Box(_) => Some((Vec::new(), f)),
        Formula::Or(a, b) => {
            let mut ms = Vec::new();
            if !marker_disjuncts(a, &mut ms) {
                return None;
            }
            let (mut inner, modal) = split_wrapper(b)?;
            if !matches!(modal, Formula::Diamond(_)) {
                return None;
            }
            ms.append(&mut inner);
            Some((ms, modal))
        }
        Formula::And(a, b) => {
            let mut ms = Vec::new();
            if !marker_conjuncts(a, &mut ms) {
                return None;
            }
            let (mut inner, modal) = split_wrapper(b)?;
            if !matches!(modal, Formula::Box(_)) {
                return None;
            }
            ms.append(&mut inner);
            Some((ms, modal))
        }
        _ => None,
    }
}

fn rewrap(markers: &[String], modal: Formula) -> Formula {
    match modal {
        Formula::Diamond(_) => wrap_diamond(markers, modal),
        _ => wrap_box(markers, modal),
    }
}

/// Removes every marker decoration.
pub(crate) fn strip_markers(f: &Formula) -> Formula {
    match split_wrapper(f) {
        Some((ms, modal)) if !ms.is_empty() => strip_markers(modal),
        _ => f.map_children(strip_markers),
    }
}

/// Puts every decoration into canonical form (sorted, deduplicated, flat).
pub fn canonicalize_markers(f: &Formula) -> Formula {
    match split_wrapper(f) {
        Some((ms, modal)) if !ms.is_empty() => rewrap(&ms, modal.map_children(canonicalize_markers)),
        _ => f.map_children(canonicalize_markers),
    }
}

/// Marker renaming: `Some(new)` renames, `None` makes the marker false.
pub type MarkerSubst = BTreeMap<String, Option<String>>;

/// Applies `subst` to every marker. Decorations stay canonical: a marker
/// made false simply leaves its decoration, so no `ff` disjunct remains.
pub fn substitute_markers(f: &Formula, subst: &MarkerSubst) -> Formula {
    let map = |m: &String| match subst.get(m) {
        Some(r) => r.clone(),
        None => Some(m.clone()),
    };
    if let Some((ms, modal)) = split_wrapper(f) {
        if !ms.is_empty() {
            let kept: Vec<String> = ms.iter().filter_map(map).collect();
            return rewrap(&kept, modal.map_children(|c| substitute_markers(c, subst)));
        }
    }
    match f {
        Formula::Prop(m) if is_marker(m) => map(m).map_or(Formula::Bottom, Formula::Prop),
        Formula::NegProp(m) if is_marker(m) => map(m).map_or(Formula::Top, Formula::NegProp),
        _ => f.map_children(|c| substitute_markers(c, subst)),
    }
}

fn subsets(ps: &[String]) -> Vec<Vec<String>> {
    (0u64..(1u64 << ps.len()))
        .map(|mask| ps.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect())
        .collect()
}

/// All priority-tracking variants of `phi` over the markers `ps`.
pub fn pt_variants(phi: &Formula, ps: &[String]) -> FormulaSet {
    fn go(f: &Formula, choices: &[Vec<String>]) -> Vec<Formula> {
        let kids = f.children();
        let mut acc: Vec<Vec<Formula>> = vec![Vec::new()];
        for c in &kids {
            let vs = go(c, choices);
            acc = acc.iter().flat_map(|pre| vs.iter().map(move |v| [pre.clone(), vec![v.clone()]].concat())).collect();
        }
        let rebuilt = acc.into_iter().map(|ks| {
            let mut it = ks.into_iter();
            f.map_children(|_| it.next().expect("arity"))
        });
        if f.is_modal() {
            rebuilt.flat_map(|node| choices.iter().map(move |q| rewrap(q, node.clone()))).collect()
        } else {
            rebuilt.collect()
        }
    }
    let choices = subsets(ps);
    go(&strip_markers(phi), &choices).into_iter().collect()
}

/// `CL_P(L)`: every tracking variant of every closure element.
pub fn cl_p<'a>(ls: impl IntoIterator<Item = &'a Formula>, ps: &[String]) -> FormulaSet {
    let bare: Vec<Formula> = ls.into_iter().map(strip_markers).collect();
    cl_set(bare.iter()).iter().flat_map(|f| pt_variants(f, ps)).collect()
}

/// The transform `psi^y`: each modal occurrence is decorated with the
/// markers of the anchors at which the profile settles the play in the
/// existential player's favour. For `<>chi` that is every anchor `i` whose
/// entry tolerates the path priority; for `[]chi` every anchor whose entry
/// does not.
pub fn profile_transform(phi: &AnnotatedFormula, psi: &IndexedFormula, y: &Profile, ps: &[String]) -> Result<Formula> {
    let pos = Positions::new(&phi.formula);
    for k in y.0.keys() {
        if k.anchor >= ps.len() || k.pos >= pos.len() || !pos.formula(k.pos).is_modal() {
            return Err(Error::UnknownProfileKey(format!("({},{})", k.anchor, k.pos)));
        }
    }
    let id =
        *pos.index.get(&psi.position).ok_or_else(|| Error::UnknownProfileKey(format!("position {}", psi.position)))?;
    Ok(transform_at(phi, &pos, id, y, ps))
}

pub(crate) fn transform_at(phi: &AnnotatedFormula, pos: &Positions, id: usize, y: &Profile, ps: &[String]) -> Formula {
    pos.render_closed(id, &mut |origin, enclosing, node| {
        if !node.is_modal() {
            return node;
        }
        let prio = enclosing.iter().map(|&e| phi.node_priority(pos.formula(e))).fold(phi.max_priority, u32::min);
        let diamond = matches!(node, Formula::Diamond(_));
        let chosen: Vec<String> = ps
            .iter()
            .enumerate()
            .filter(|(i, _)| y.allows(ProfileKey::new(*i, origin), prio) == diamond)
            .map(|(_, m)| m.clone())
            .collect();
        rewrap(&chosen, node)
    })
}

/// Renames `P_j` to `P_{j-1}` for `j > i` in family `family`.
pub fn shrink_family(psi: &Formula, family: &str, i: usize) -> Result<Formula> {
    let gone = super::marker(family, i);
    if psi.mentions(&gone) {
        return Err(Error::MarkerPresent(gone));
    }
    let subst: MarkerSubst = psi
        .props()
        .into_iter()
        .filter_map(|m| {
            let (fam, j, _) = marker_key(&m);
            (is_marker(&m) && fam == family && j > i).then(|| (m, Some(super::marker(family, j - 1))))
        })
        .collect();
    Ok(canonicalize_markers(&substitute_markers(psi, &subst)))
}

/// [`shrink_family`] on the default family `P`.
pub fn shrink(psi: &Formula, i: usize) -> Result<Formula> {
    shrink_family(psi, "P", i)
}
