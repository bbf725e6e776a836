//! Finite transition systems, marker colourings and directed separations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite structure over a single edge relation. Nodes are addressed by
/// dense indices; the string ids are kept for I/O.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<usize>>,
    props: Vec<BTreeSet<String>>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: String,
    #[serde(default)]
    props: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    nodes: Vec<NodeJson>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

impl Structure {
    pub fn new() -> Self {
        Structure { ids: Vec::new(), index: HashMap::new(), succ: Vec::new(), props: Vec::new() }
    }

    /// Makes `p` hold at `v`.
    pub fn add_prop(&mut self, v: usize, p: &str) {
        self.props[v].insert(p.to_string());
    }

    /// Adds a node (or returns the existing one) with the given propositions.
    pub fn add_node<S: AsRef<str>>(&mut self, id: &str, props: &[S]) -> usize {
        let v = match self.index.get(id) {
            Some(&v) => v,
            None => {
                self.ids.push(id.to_string());
                self.succ.push(Vec::new());
                self.props.push(BTreeSet::new());
                self.index.insert(id.to_string(), self.ids.len() - 1);
                self.ids.len() - 1
            }
        };
        self.props[v].extend(props.iter().map(|p| p.as_ref().to_string()));
        v
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !self.succ[u].contains(&v) {
            self.succ[u].push(v);
            self.succ[u].sort_unstable();
        }
    }

    pub fn add_edge_by_id(&mut self, u: &str, v: &str) -> Result<()> {
        let (a, b) = (self.node(u)?, self.node(v)?);
        self.add_edge(a, b);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn node(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn succ(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn props(&self, v: usize) -> &BTreeSet<String> {
        &self.props[v]
    }

    pub fn holds(&self, v: usize, p: &str) -> bool {
        self.props[v].contains(p)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    pub fn signature(&self) -> BTreeSet<String> {
        self.props.iter().flatten().cloned().collect()
    }

    /// Predecessor lists.
    pub fn pred(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (u, v) in self.edges() {
            p[v].push(u);
        }
        p
    }

    /// Induced substructure on `nodes`; returns it with the old-to-new map.
    pub fn induced(&self, nodes: &BTreeSet<usize>) -> (Structure, BTreeMap<usize, usize>) {
        let mut s = Structure::new();
        let mut map = BTreeMap::new();
        for &v in nodes {
            map.insert(v, s.add_node(&self.ids[v], &self.props[v].iter().collect::<Vec<_>>()));
        }
        for &u in nodes {
            for &v in &self.succ[u] {
                if let Some(&w) = map.get(&v) {
                    s.add_edge(map[&u], w);
                }
            }
        }
        (s, map)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: StructureJson = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        let mut s = Structure::new();
        for n in &j.nodes {
            if s.index.contains_key(&n.id) {
                return Err(Error::Input(format!("duplicate node `{}`", n.id)));
            }
            s.add_node(&n.id, &n.props);
        }
        for (u, v) in &j.edges {
            s.add_edge_by_id(u, v)?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = StructureJson {
            nodes: (0..self.len())
                .map(|v| NodeJson { id: self.ids[v].clone(), props: self.props[v].iter().cloned().collect() })
                .collect(),
            edges: self.edges().map(|(u, v)| (self.ids[u].clone(), self.ids[v].clone())).collect(),
        };
        serde_json::to_value(j).expect("structure serializes")
    }
}

impl Default for Structure {
    fn default() -> Self {
        Structure::new()
    }
}

/// A structure with marker `P_i` true exactly at the anchor `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedStructure {
    pub structure: Structure,
    pub markers: Vec<String>,
    pub anchors: Vec<usize>,
}

/// Colours the anchors `xs` with the markers `ps`. Markers past the end of
/// `xs` hold nowhere.
pub fn color(m: &Structure, xs: &[usize], ps: &[String]) -> Result<MarkedStructure> {
    if let Some(&x) = xs.iter().find(|&&x| x >= m.len()) {
        return Err(Error::UnknownNode(format!("#{x}")));
    }
    if xs.len() > ps.len() {
        return Err(Error::Input(format!("{} anchors but only {} markers", xs.len(), ps.len())));
    }
    let sig = m.signature();
    if let Some(p) = ps.iter().find(|p| sig.contains(*p)) {
        return Err(Error::MarkerCollision(p.clone()));
    }
    let mut s = m.clone();
    for (x, p) in xs.iter().zip(ps) {
        s.props[*x].insert(p.clone());
    }
    Ok(MarkedStructure { structure: s, markers: ps.to_vec(), anchors: xs.to_vec() })
}

/// Two overlapping node sets covering a structure, with an ordered interface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub left: BTreeSet<usize>,
    pub right: BTreeSet<usize>,
    pub interface: Vec<usize>,
}

impl Separation {
    fn covers(&self, m: &Structure) -> bool {
        (0..m.len()).all(|v| self.left.contains(&v) || self.right.contains(&v))
            && self.left.iter().chain(&self.right).all(|&v| v < m.len())
    }

    pub fn overlap(&self) -> BTreeSet<usize> {
        self.left.intersection(&self.right).copied().collect()
    }

    /// Directed separation: the overlap is exactly the interface and no edge
    /// leads from the right part back into the left part.
    pub fn is_directed(&self, m: &Structure) -> bool {
        let x: BTreeSet<usize> = self.interface.iter().copied().collect();
        self.covers(m)
            && x.len() == self.interface.len()
            && self.overlap() == x
            && m.edges().all(|(u, v)| {
                !(self.right.contains(&u) && !x.contains(&u) && self.left.contains(&v) && !x.contains(&v))
            })
    }

    /// Weak directed separation: the interface lies in the overlap, nothing
    /// leaves the right-only part towards the left-only part, and overlap
    /// nodes outside the interface have no edge into the left-only part.
    pub fn is_weak(&self, m: &Structure) -> bool {
        let ov = self.overlap();
        let x: BTreeSet<usize> = self.interface.iter().copied().collect();
        let left_only = |v: usize| self.left.contains(&v) && !self.right.contains(&v);
        let right_only = |v: usize| self.right.contains(&v) && !self.left.contains(&v);
        self.covers(m)
            && x.len() == self.interface.len()
            && x.is_subset(&ov)
            && m.edges().all(|(u, v)| !(right_only(u) && left_only(v)))
            && m.edges().all(|(u, v)| !(ov.contains(&u) && !x.contains(&u) && left_only(v)))
    }
}

/// Result of splitting the overlap of a weak separation.
#[derive(Clone, Debug)]
pub struct Duplicated {
    pub structure: Structure,
    pub separation: Separation,
    /// Image of each left node (indexed by old node).
    pub pi1: BTreeMap<usize, usize>,
    /// Image of each right node.
    pub pi2: BTreeMap<usize, usize>,
}

/// Turns a weak separation into a directed one by duplicating every overlap
/// node outside the interface into copies `1:c` and `2:c`. Every edge from
/// a left node to a right node becomes an edge between their images.
pub fn weak_to_proper(m: &Structure, s: &Separation) -> Result<Duplicated> {
    if !s.is_weak(m) {
        return Err(Error::InvalidSeparation("not a weak directed separation".into()));
    }
    let x: BTreeSet<usize> = s.interface.iter().copied().collect();
    let ov = s.overlap();
    let mut out = Structure::new();
    let mut pi1 = BTreeMap::new();
    let mut pi2 = BTreeMap::new();
    let props = |v: usize| m.props(v).iter().cloned().collect::<Vec<_>>();
    for v in 0..m.len() {
        if x.contains(&v) || !ov.contains(&v) {
            let w = out.add_node(m.id(v), &props(v));
            if s.left.contains(&v) {
                pi1.insert(v, w);
            }
            if s.right.contains(&v) {
                pi2.insert(v, w);
            }
        } else {
            pi1.insert(v, out.add_node(&format!("1:{}", m.id(v)), &props(v)));
            pi2.insert(v, out.add_node(&format!("2:{}", m.id(v)), &props(v)));
        }
    }
    for (u, v) in m.edges() {
        if let (Some(&a), Some(&b)) = (pi1.get(&u), pi1.get(&v)) {
            out.add_edge(a, b);
        }
        if let (Some(&a), Some(&b)) = (pi2.get(&u), pi2.get(&v)) {
            out.add_edge(a, b);
        }
        if let (Some(&a), Some(&b)) = (pi1.get(&u), pi2.get(&v)) {
            out.add_edge(a, b);
        }
    }
    let separation = Separation {
        left: pi1.values().copied().collect(),
        right: pi2.values().copied().collect(),
        interface: s.interface.iter().map(|v| pi1[v]).collect(),
    };
    Ok(Duplicated { structure: out, separation, pi1, pi2 })
}

/// Bisimilarity of two pointed structures by signature refinement on the
/// disjoint union.
pub fn bisimilar(m1: &Structure, v1: usize, m2: &Structure, v2: usize) -> bool {
    let n1 = m1.len();
    let n = n1 + m2.len();
    let succ = |v: usize| -> Vec<usize> {
        if v < n1 {
            m1.succ(v).to_vec()
        } else {
            m2.succ(v - n1).iter().map(|w| w + n1).collect()
        }
    };
    let label = |v: usize| if v < n1 { m1.props(v) } else { m2.props(v - n1) };
    let mut classes: HashMap<&BTreeSet<String>, usize> = HashMap::new();
    let mut block: Vec<usize> = (0..n)
        .map(|v| {
            let k = classes.len();
            *classes.entry(label(v)).or_insert(k)
        })
        .collect();
    let mut count = classes.len();
    loop {
        let mut sigs: HashMap<(usize, BTreeSet<usize>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|v| {
                let sig = (block[v], succ(v).into_iter().map(|w| block[w]).collect());
                let k = sigs.len();
                *sigs.entry(sig).or_insert(k)
            })
            .collect();
        let stable = sigs.len() == count;
        count = sigs.len();
        block = next;
        if stable {
            break;
        }
    }
    block[v1] == block[v2 + n1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(edges: &[(&str, &str)], nodes: &[(&str, &[&str])]) -> Structure {
        let mut s = Structure::new();
        for (id, ps) in nodes {
            s.add_node(id, ps);
        }
        for (u, v) in edges {
            s.add_edge_by_id(u, v).unwrap();
        }
        s
    }

    fn set(m: &Structure, ids: &[&str]) -> BTreeSet<usize> {
        ids.iter().map(|i| m.node(i).unwrap()).collect()
    }

    #[test]
    fn color_examples() {
        let m = chain(&[], &[("a", &[])]);
        let c = color(&m, &[0], &["_P1".to_string()]).unwrap();
        assert!(c.structure.holds(0, "_P1"));
        let c = color(&m, &[], &["_P1".into(), "_P2".into()]).unwrap();
        assert!(c.structure.props(0).is_empty());
        let m = chain(&[], &[("a", &["Q"])]);
        assert!(matches!(color(&m, &[0], &["Q".into()]), Err(Error::MarkerCollision(_))));
    }

    #[test]
    fn separation_examples() {
        let m = chain(&[("a", "x"), ("x", "b")], &[("a", &[]), ("x", &[]), ("b", &[])]);
        let s = Separation { left: set(&m, &["a", "x"]), right: set(&m, &["x", "b"]), interface: vec![1] };
        assert!(s.is_directed(&m) && s.is_weak(&m));
        let mut back = m.clone();
        back.add_edge_by_id("b", "a").unwrap();
        assert!(!s.is_directed(&back));

        let m = chain(&[("c", "b")], &[("x", &[]), ("c", &[]), ("a", &[]), ("b", &[])]);
        let s = Separation { left: set(&m, &["x", "c", "a"]), right: set(&m, &["x", "c", "b"]), interface: vec![0] };
        assert!(s.is_weak(&m));
        assert!(!s.is_directed(&m));
    }

    #[test]
    fn duplication_splits_overlap() {
        let m = chain(&[("a", "c"), ("c", "b"), ("x", "c")], &[("x", &[]), ("c", &["Q"]), ("a", &[]), ("b", &[])]);
        let s = Separation { left: set(&m, &["x", "c", "a"]), right: set(&m, &["x", "c", "b"]), interface: vec![0] };
        let d = weak_to_proper(&m, &s).unwrap();
        assert_eq!(d.structure.len(), 5);
        assert!(d.structure.node("1:c").is_ok() && d.structure.node("2:c").is_ok());
        assert!(d.separation.is_directed(&d.structure));
        for v in 0..m.len() {
            for pi in [&d.pi1, &d.pi2] {
                if let Some(&w) = pi.get(&v) {
                    assert!(bisimilar(&m, v, &d.structure, w));
                }
            }
        }
    }

    #[test]
    fn bisimulation_examples() {
        let lp = chain(&[("a", "a")], &[("a", &[])]);
        let cyc = chain(&[("u", "w"), ("w", "u")], &[("u", &[]), ("w", &[])]);
        assert!(bisimilar(&lp, 0, &cyc, 0));
        let p = chain(&[], &[("a", &["P"])]);
        let q = chain(&[], &[("a", &[])]);
        assert!(!bisimilar(&p, 0, &q, 0));
        assert!(bisimilar(&cyc, 1, &cyc, 1));
    }

    #[test]
    fn json_round_trip() {
        let m = chain(&[("a", "b")], &[("a", &["P"]), ("b", &[])]);
        let back = Structure::from_json(&m.to_json().to_string()).unwrap();
        assert_eq!(back, m);
        assert!(Structure::from_json(r#"{"nodes":[{"id":"a"}],"edges":[["a","z"]]}"#).is_err());
    }
}
