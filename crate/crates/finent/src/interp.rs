//! Finite interpretations and their semantics: model checking with
//! witnessed verdicts, transitive closure, neighbourhood views and their
//! isomorphism, and path boundedness.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::kb::{ConceptId, Ind, KnowledgeBase, NormalCi, RoleId, UnaryType};

/// A finite interpretation. Every element carries a full unary type, so
/// complementary pairs are consistent by construction; role extensions
/// are stored for named roles, the inverse direction is the converse.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    /// Unary type of each element; the domain is `0..types.len()`.
    pub types: Vec<UnaryType>,
    /// Named-role extensions, `base role → set of (source, target)`.
    pub roles: BTreeMap<u32, BTreeSet<(u32, u32)>>,
    /// Standard names: individual → element (injective).
    pub names: BTreeMap<Ind, u32>,
}

impl Interpretation {
    pub fn size(&self) -> usize {
        self.types.len()
    }

    pub fn has_edge(&self, r: RoleId, from: u32, to: u32) -> bool {
        let pair = if r.is_inverse() { (to, from) } else { (from, to) };
        self.roles.get(&r.base()).map_or(false, |s| s.contains(&pair))
    }

    pub fn add_edge(&mut self, r: RoleId, from: u32, to: u32) {
        let pair = if r.is_inverse() { (to, from) } else { (from, to) };
        self.roles.entry(r.base()).or_default().insert(pair);
    }

    /// Directed edges of a role, respecting direction.
    pub fn edges(&self, r: RoleId) -> Vec<(u32, u32)> {
        match self.roles.get(&r.base()) {
            None => vec![],
            Some(s) => {
                if r.is_inverse() {
                    s.iter().map(|&(a, b)| (b, a)).collect()
                } else {
                    s.iter().cloned().collect()
                }
            }
        }
    }

    pub fn successors(&self, r: RoleId, from: u32) -> Vec<u32> {
        self.edges(r).into_iter().filter(|&(a, _)| a == from).map(|(_, b)| b).collect()
    }

    pub fn in_concept(&self, c: ConceptId, d: u32) -> bool {
        self.types[d as usize].contains(c)
    }

    pub fn named_element(&self, a: Ind) -> Option<u32> {
        self.names.get(&a).cloned()
    }

    /// Individual mapped to an element, if any.
    pub fn name_of(&self, d: u32) -> Option<Ind> {
        self.names.iter().find(|&(_, &e)| e == d).map(|(&a, _)| a)
    }

    /// Elements that are nominals of `kb`.
    pub fn nominal_elements(&self, kb: &KnowledgeBase) -> BTreeSet<u32> {
        kb.sig.nominals().iter().filter_map(|&a| self.named_element(a)).collect()
    }

    /// Keeps only the pairs `0..pairs` of every type; used to compare
    /// against a smaller signature.
    pub fn restrict_pairs(&self, pairs: usize) -> Interpretation {
        let mask = if pairs >= 64 { u64::MAX } else { (1u64 << pairs) - 1 };
        Interpretation {
            types: self.types.iter().map(|t| UnaryType(t.0 & mask)).collect(),
            roles: self.roles.clone(),
            names: self.names.clone(),
        }
    }

    /// Induced subinterpretation; `keep` is the sorted set of surviving
    /// elements. Returns the mapping old → new alongside.
    pub fn induced(&self, keep: &BTreeSet<u32>) -> (Interpretation, BTreeMap<u32, u32>) {
        let map: BTreeMap<u32, u32> =
            keep.iter().enumerate().map(|(new, &old)| (old, new as u32)).collect();
        let mut out = Interpretation {
            types: keep.iter().map(|&d| self.types[d as usize]).collect(),
            roles: BTreeMap::new(),
            names: self
                .names
                .iter()
                .filter_map(|(&a, &d)| map.get(&d).map(|&n| (a, n)))
                .collect(),
        };
        for (&base, edges) in &self.roles {
            let kept: BTreeSet<(u32, u32)> = edges
                .iter()
                .filter_map(|&(a, b)| Some((*map.get(&a)?, *map.get(&b)?)))
                .collect();
            if !kept.is_empty() {
                out.roles.insert(base, kept);
            }
        }
        (out, map)
    }
}

/// A single violated axiom with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Quantifier-free CI fails at an element.
    Qf { ci: NormalCi, elem: u32 },
    /// Nominal equality fails: extension of the name is not `{a}`.
    NominalEq { concept: ConceptId, ind: Ind, elem: Option<u32> },
    /// `A ⊑ ∀ρ.B` fails along an edge.
    Value { ci: NormalCi, from: u32, to: u32 },
    /// `A ⊑ ∃ρ.B` has no witness at an element.
    Exist { ci: NormalCi, elem: u32 },
    /// A missing composed pair for a transitive role.
    Transitivity { base: u32, via: (u32, u32, u32) },
    /// Two successors under a functional role.
    Functionality { role: RoleId, elem: u32, succs: (u32, u32) },
    /// Concept assertion not satisfied.
    Assertion { ind: Ind, concept: ConceptId },
    /// Role assertion not satisfied.
    RoleAssertion { base: u32, from: Ind, to: Ind },
    /// An individual has no element.
    Unnamed { ind: Ind },
}

/// Checks `i ⊨ kb`; the empty list means the interpretation is a model.
pub fn check_model(i: &Interpretation, kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in kb.sig.individuals() {
        if i.named_element(a).is_none() {
            out.push(Violation::Unnamed { ind: a });
        }
    }
    for ci in &kb.tbox {
        match ci {
            NormalCi::Subsume(conj, disj) => {
                for d in 0..i.size() as u32 {
                    if !kb.type_satisfies_qf(i.types[d as usize], conj, disj) {
                        out.push(Violation::Qf { ci: ci.clone(), elem: d });
                    }
                }
            }
            NormalCi::NominalEq(c, a) => {
                let named = i.named_element(*a);
                for d in 0..i.size() as u32 {
                    let inside = i.in_concept(*c, d);
                    if inside != (Some(d) == named) {
                        out.push(Violation::NominalEq { concept: *c, ind: *a, elem: Some(d) });
                    }
                }
            }
            NormalCi::ValueRestr(a, r, b) => {
                for (from, to) in i.edges(*r) {
                    if i.in_concept(*a, from) && !i.in_concept(*b, to) {
                        out.push(Violation::Value { ci: ci.clone(), from, to });
                    }
                }
            }
            NormalCi::ExistRestr(a, r, b) => {
                for d in 0..i.size() as u32 {
                    if i.in_concept(*a, d)
                        && !i.successors(*r, d).iter().any(|&e| i.in_concept(*b, e))
                    {
                        out.push(Violation::Exist { ci: ci.clone(), elem: d });
                    }
                }
            }
        }
    }
    for (base, decl) in (0..).zip(kb.sig.roles_iter()) {
        let edges: Vec<(u32, u32)> = i.edges(RoleId::named(base));
        if decl.transitive {
            let set: BTreeSet<(u32, u32)> = edges.iter().cloned().collect();
            'outer: for &(a, b) in &edges {
                for &(b2, c) in &edges {
                    if b == b2 && !set.contains(&(a, c)) {
                        out.push(Violation::Transitivity { base, via: (a, b, c) });
                        break 'outer;
                    }
                }
            }
        }
        for dir in 0..2u32 {
            if decl.functional[dir as usize] {
                let role = RoleId(base << 1 | dir);
                for d in 0..i.size() as u32 {
                    let succs = i.successors(role, d);
                    if succs.len() > 1 {
                        out.push(Violation::Functionality {
                            role,
                            elem: d,
                            succs: (succs[0], succs[1]),
                        });
                    }
                }
            }
        }
    }
    for &(a, c) in &kb.abox_concepts {
        match i.named_element(a) {
            Some(d) if i.in_concept(c, d) => {}
            Some(_) => out.push(Violation::Assertion { ind: a, concept: c }),
            None => {}
        }
    }
    for &(base, a, b) in &kb.abox_roles {
        match (i.named_element(a), i.named_element(b)) {
            (Some(d), Some(e)) if i.has_edge(RoleId::named(base), d, e) => {}
            (Some(_), Some(_)) => out.push(Violation::RoleAssertion { base, from: a, to: b }),
            _ => {}
        }
    }
    out
}

/// `I*`: the interpretation with every transitive role transitively
/// closed; other roles untouched.
pub fn transitive_closure(i: &Interpretation, kb: &KnowledgeBase) -> Interpretation {
    let mut out = i.clone();
    for (base, decl) in (0..).zip(kb.sig.roles_iter()) {
        if !decl.transitive {
            continue;
        }
        if let Some(edges) = out.roles.get_mut(&base) {
            let n = i.size();
            // BFS from every source over the original adjacency.
            let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
            for &(a, b) in edges.iter() {
                adj[a as usize].push(b);
            }
            let mut closed = BTreeSet::new();
            for s in 0..n as u32 {
                if adj[s as usize].is_empty() {
                    continue;
                }
                let mut seen = vec![false; n];
                let mut queue: VecDeque<u32> = adj[s as usize].iter().cloned().collect();
                while let Some(t) = queue.pop_front() {
                    if seen[t as usize] {
                        continue;
                    }
                    seen[t as usize] = true;
                    closed.insert((s, t));
                    for &u in &adj[t as usize] {
                        queue.push_back(u);
                    }
                }
            }
            *edges = closed;
        }
    }
    out
}

/// Undirected adjacency over all roles, restricted to `domain`.
fn adjacency(i: &Interpretation, domain: &BTreeSet<u32>) -> BTreeMap<u32, BTreeSet<u32>> {
    let mut adj: BTreeMap<u32, BTreeSet<u32>> =
        domain.iter().map(|&d| (d, BTreeSet::new())).collect();
    for edges in i.roles.values() {
        for &(a, b) in edges {
            if domain.contains(&a) && domain.contains(&b) {
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
            }
        }
    }
    adj
}

/// A neighbourhood view: the subinterpretation induced by the nominals
/// and a ball around the centre, with the centre marked.
#[derive(Clone, Debug)]
pub struct NeighbourhoodView {
    /// Global ids of the elements, sorted.
    pub elements: Vec<u32>,
    /// Index of the centre within `elements`.
    pub center: usize,
    pub types: Vec<UnaryType>,
    pub colours: Option<Vec<u32>>,
    /// Individual attached to each element, if any.
    pub named: Vec<Option<Ind>>,
    /// Local directed edges per named base role.
    pub edges: BTreeMap<u32, BTreeSet<(u32, u32)>>,
}

/// The ball of radius `n` around `d` in `I \ Nom(K)` (graph distance over
/// the undirected union of roles), or just the nominals when `d` is one.
pub fn neighbourhood(
    i: &Interpretation,
    kb: &KnowledgeBase,
    colours: Option<&[u32]>,
    d: u32,
    n: u32,
) -> NeighbourhoodView {
    let nominals = i.nominal_elements(kb);
    let mut keep: BTreeSet<u32> = nominals.clone();
    if !nominals.contains(&d) {
        let domain: BTreeSet<u32> = (0..i.size() as u32).filter(|e| !nominals.contains(e)).collect();
        let adj = adjacency(i, &domain);
        let mut dist: BTreeMap<u32, u32> = BTreeMap::new();
        dist.insert(d, 0);
        let mut queue = VecDeque::from([d]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            if dx == n {
                continue;
            }
            for &y in &adj[&x] {
                if !dist.contains_key(&y) {
                    dist.insert(y, dx + 1);
                    queue.push_back(y);
                }
            }
        }
        keep.extend(dist.keys());
    }
    keep.insert(d);
    let elements: Vec<u32> = keep.iter().cloned().collect();
    let index: BTreeMap<u32, u32> =
        elements.iter().enumerate().map(|(k, &e)| (e, k as u32)).collect();
    let mut edges: BTreeMap<u32, BTreeSet<(u32, u32)>> = BTreeMap::new();
    for (&base, es) in &i.roles {
        let kept: BTreeSet<(u32, u32)> = es
            .iter()
            .filter_map(|&(a, b)| Some((*index.get(&a)?, *index.get(&b)?)))
            .collect();
        if !kept.is_empty() {
            edges.insert(base, kept);
        }
    }
    NeighbourhoodView {
        center: elements.iter().position(|&e| e == d).unwrap(),
        types: elements.iter().map(|&e| i.types[e as usize]).collect(),
        colours: colours.map(|cs| elements.iter().map(|&e| cs[e as usize]).collect()),
        named: elements.iter().map(|&e| i.name_of(e)).collect(),
        elements,
        edges,
    }
}

impl NeighbourhoodView {
    /// A cheap isomorphism-invariant fingerprint.
    pub fn fingerprint(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let n = self.elements.len();
        // Wl-style refinement on (type, colour, named, centre) seeds.
        let mut lab: Vec<u64> = (0..n)
            .map(|k| {
                let mut h = DefaultHasher::new();
                self.types[k].hash(&mut h);
                self.colours.as_ref().map(|c| c[k]).hash(&mut h);
                self.named[k].hash(&mut h);
                (k == self.center).hash(&mut h);
                h.finish()
            })
            .collect();
        for _ in 0..n {
            let mut next = vec![0u64; n];
            for k in 0..n {
                let mut sig: Vec<(u32, bool, u64)> = Vec::new();
                for (&base, es) in &self.edges {
                    for &(a, b) in es {
                        if a as usize == k {
                            sig.push((base, true, lab[b as usize]));
                        }
                        if b as usize == k {
                            sig.push((base, false, lab[a as usize]));
                        }
                    }
                }
                sig.sort_unstable();
                let mut h = DefaultHasher::new();
                lab[k].hash(&mut h);
                sig.hash(&mut h);
                next[k] = h.finish();
            }
            lab = next;
        }
        let mut sorted = lab;
        sorted.sort_unstable();
        let mut h = DefaultHasher::new();
        sorted.hash(&mut h);
        self.elements.len().hash(&mut h);
        h.finish()
    }

    fn compatible(&self, other: &NeighbourhoodView, a: usize, b: usize) -> bool {
        self.types[a] == other.types[b]
            && self.colours.as_ref().map(|c| c[a]) == other.colours.as_ref().map(|c| c[b])
            && self.named[a] == other.named[b]
            && (a == self.center) == (b == other.center)
    }
}

/// Exact isomorphism of neighbourhood views: a bijection preserving
/// types, colours, the centre, every role edge in both directions, and
/// fixing individuals. Returns the mapping (local indices of `v1` →
/// local indices of `v2`) when one exists.
pub fn views_isomorphism(v1: &NeighbourhoodView, v2: &NeighbourhoodView) -> Option<Vec<usize>> {
    let n = v1.elements.len();
    if n != v2.elements.len() {
        return None;
    }
    if v1.edges.keys().collect::<Vec<_>>() != v2.edges.keys().collect::<Vec<_>>() {
        return None;
    }
    for (base, es) in &v1.edges {
        if es.len() != v2.edges[base].len() {
            return None;
        }
    }
    // Backtracking with per-element candidate lists.
    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn edges_ok(v1: &NeighbourhoodView, v2: &NeighbourhoodView, mapping: &[usize], k: usize) -> bool {
        for (base, es) in &v1.edges {
            let other = &v2.edges[base];
            for &(a, b) in es {
                let (a, b) = (a as usize, b as usize);
                if (a == k || b == k) && mapping[a] != usize::MAX && mapping[b] != usize::MAX {
                    if !other.contains(&(mapping[a] as u32, mapping[b] as u32)) {
                        return false;
                    }
                }
            }
            for &(a, b) in other {
                let (a, b) = (a as usize, b as usize);
                // Surjectivity of edges: preimage pairs must exist.
                let pa = mapping.iter().position(|&m| m == a);
                let pb = mapping.iter().position(|&m| m == b);
                if let (Some(pa), Some(pb)) = (pa, pb) {
                    if !es.contains(&(pa as u32, pb as u32)) {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn rec(
        v1: &NeighbourhoodView,
        v2: &NeighbourhoodView,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        k: usize,
    ) -> bool {
        if k == mapping.len() {
            return true;
        }
        for b in 0..mapping.len() {
            if !used[b] && v1.compatible(v2, k, b) {
                mapping[k] = b;
                used[b] = true;
                if edges_ok(v1, v2, mapping, k) && rec(v1, v2, mapping, used, k + 1) {
                    return true;
                }
                mapping[k] = usize::MAX;
                used[b] = false;
            }
        }
        false
    }
    if rec(v1, v2, &mut mapping, &mut used, 0) {
        Some(mapping)
    } else {
        None
    }
}

pub fn views_isomorphic(v1: &NeighbourhoodView, v2: &NeighbourhoodView) -> bool {
    views_isomorphism(v1, v2).is_some()
}

/// True iff no transitive role of `kb` has a simple path of length
/// `l + 1` in `i` (length counted in edges).
pub fn is_l_bounded(i: &Interpretation, kb: &KnowledgeBase, l: u32) -> bool {
    for (base, decl) in (0..).zip(kb.sig.roles_iter()) {
        if !decl.transitive {
            continue;
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); i.size()];
        for (a, b) in i.edges(RoleId::named(base)) {
            adj[a as usize].push(b);
        }
        fn dfs(adj: &[Vec<u32>], visited: &mut Vec<bool>, at: u32, len: u32, l: u32) -> bool {
            if len > l {
                return true;
            }
            for &b in &adj[at as usize] {
                if !visited[b as usize] {
                    visited[b as usize] = true;
                    if dfs(adj, visited, b, len + 1, l) {
                        return true;
                    }
                    visited[b as usize] = false;
                }
            }
            false
        }
        for s in 0..i.size() as u32 {
            let mut visited = vec![false; i.size()];
            visited[s as usize] = true;
            if dfs(&adj, &mut visited, s, 0, l) {
                return false;
            }
        }
    }
    true
}

/// A homomorphism `from → to`: preserves types positively on all pairs,
/// preserves edges, fixes individuals.
pub fn find_homomorphism(
    from: &Interpretation,
    to: &Interpretation,
    pairs: usize,
) -> Option<Vec<u32>> {
    let n = from.size();
    let mut map: Vec<Option<u32>> = vec![None; n];
    for (&a, &d) in &from.names {
        map[d as usize] = Some(*to.names.get(&a)?);
    }
    fn ok_edges(from: &Interpretation, to: &Interpretation, map: &[Option<u32>]) -> bool {
        for (&base, es) in &from.roles {
            for &(a, b) in es {
                if let (Some(x), Some(y)) = (map[a as usize], map[b as usize]) {
                    if !to.has_edge(RoleId::named(base), x, y) {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn rec(
        from: &Interpretation,
        to: &Interpretation,
        pairs: usize,
        map: &mut Vec<Option<u32>>,
        k: usize,
    ) -> bool {
        if k == map.len() {
            return true;
        }
        if map[k].is_some() {
            return rec(from, to, pairs, map, k + 1);
        }
        for e in 0..to.size() as u32 {
            // positive membership must be preserved
            let tf = from.types[k];
            let tt = to.types[e as usize];
            let keep = (0..pairs as u32).all(|p| (tf.0 >> p) & 1 == 0 || (tt.0 >> p) & 1 == 1);
            if keep {
                map[k] = Some(e);
                if ok_edges(from, to, map) && rec(from, to, pairs, map, k + 1) {
                    return true;
                }
                map[k] = None;
            }
        }
        false
    }
    if !ok_edges(from, to, &map) {
        return None;
    }
    if rec(from, to, pairs, &mut map, 0) {
        Some(map.into_iter().map(Option::unwrap).collect())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::Signature;

    fn kb_r(transitive: bool, functional: bool) -> KnowledgeBase {
        let mut sig = Signature::new();
        let r = sig.add_role("r").unwrap();
        if transitive {
            sig.set_transitive(r);
        }
        if functional {
            sig.set_functional(r);
        }
        KnowledgeBase { sig, ..Default::default() }
    }

    fn chain(n: usize) -> Interpretation {
        let mut i = Interpretation { types: vec![UnaryType(0); n], ..Default::default() };
        for k in 0..n - 1 {
            i.add_edge(RoleId::named(0), k as u32, k as u32 + 1);
        }
        i
    }

    #[test]
    fn empty_kb_single_element_is_model() {
        let kb = KnowledgeBase::default();
        let i = Interpretation { types: vec![UnaryType(0)], ..Default::default() };
        assert!(check_model(&i, &kb).is_empty());
    }

    #[test]
    fn transitivity_violation_reports_missing_pair() {
        let kb = kb_r(true, false);
        let i = chain(3);
        let v = check_model(&i, &kb);
        assert!(matches!(v.as_slice(), [Violation::Transitivity { base: 0, via: (0, 1, 2) }]));
    }

    #[test]
    fn functionality_violation_reports_conflicting_successors() {
        let kb = kb_r(false, true);
        let mut i = Interpretation { types: vec![UnaryType(0); 3], ..Default::default() };
        i.add_edge(RoleId::named(0), 0, 1);
        i.add_edge(RoleId::named(0), 0, 2);
        let v = check_model(&i, &kb);
        assert!(matches!(v.as_slice(), [Violation::Functionality { elem: 0, .. }]));
    }

    #[test]
    fn closure_of_chain_and_cycle() {
        let kb = kb_r(true, false);
        let closed = transitive_closure(&chain(3), &kb);
        assert_eq!(
            closed.roles[&0],
            BTreeSet::from([(0, 1), (1, 2), (0, 2)])
        );
        // a 3-cycle closes to all 9 pairs
        let mut cyc = Interpretation { types: vec![UnaryType(0); 3], ..Default::default() };
        cyc.add_edge(RoleId::named(0), 0, 1);
        cyc.add_edge(RoleId::named(0), 1, 2);
        cyc.add_edge(RoleId::named(0), 2, 0);
        let closed = transitive_closure(&cyc, &kb);
        assert_eq!(closed.roles[&0].len(), 9);
        // non-transitive roles untouched
        let kb2 = kb_r(false, false);
        assert_eq!(transitive_closure(&chain(3), &kb2), chain(3));
    }

    #[test]
    fn closure_is_idempotent() {
        let kb = kb_r(true, false);
        let once = transitive_closure(&chain(4), &kb);
        assert_eq!(transitive_closure(&once, &kb), once);
    }

    #[test]
    fn neighbourhood_of_chain_center() {
        let kb = kb_r(false, false);
        let i = chain(3);
        let v = neighbourhood(&i, &kb, None, 1, 1);
        assert_eq!(v.elements, vec![0, 1, 2]);
        assert_eq!(v.center, 1);
        let v0 = neighbourhood(&i, &kb, None, 1, 0);
        assert_eq!(v0.elements, vec![1]);
    }

    #[test]
    fn neighbourhood_contains_nominals() {
        let mut kb = kb_r(false, false);
        let a = kb.sig.add_individual("a").unwrap();
        kb.sig.mark_nominal(a);
        let mut i = chain(4);
        i.names.insert(a, 3);
        // 3 is adjacent to all? no, just include: every neighbourhood contains it.
        for d in 0..3 {
            let v = neighbourhood(&i, &kb, None, d, 0);
            assert!(v.elements.contains(&3), "nominal must be in every view");
        }
    }

    #[test]
    fn identical_views_isomorphic_different_colours_not() {
        let kb = kb_r(false, false);
        let i = chain(3);
        let colours1 = vec![0, 1, 2];
        let colours2 = vec![0, 1, 3];
        let v1 = neighbourhood(&i, &kb, Some(&colours1), 1, 1);
        let v1b = neighbourhood(&i, &kb, Some(&colours1), 1, 1);
        let v2 = neighbourhood(&i, &kb, Some(&colours2), 1, 1);
        assert!(views_isomorphic(&v1, &v1b));
        assert!(!views_isomorphic(&v1, &v2));
    }

    #[test]
    fn l_bounded_chain() {
        let kb = kb_r(true, false);
        let i = chain(4); // 3 edges
        assert!(is_l_bounded(&i, &kb, 3));
        assert!(!is_l_bounded(&i, &kb, 2));
        let empty = Interpretation { types: vec![UnaryType(0); 2], ..Default::default() };
        assert!(is_l_bounded(&empty, &kb, 0));
    }
}
