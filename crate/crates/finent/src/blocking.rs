//! The coloured-blocking machinery: proper colourings, neighbourhood
//! links, folding of tree-shaped interpretations into finite ones, and
//! the pull-back of query matches through links.
//!
//! A colouring is *n-proper* when the elements of every n-neighbourhood
//! all have different colours. Over an n-properly coloured tree, an
//! element whose n-ball looks exactly like an earlier one on the same
//! branch can absorb that branch's continuation: the tree is cut there
//! and the dangling edge redirected backwards. Finitely many ball shapes
//! exist, so every infinite branch is cut eventually and the result is
//! finite. The pull-back theorem is what makes this query-safe: a match
//! that uses redirected edges can be retracted, link by link, to a match
//! of the original interpretation, so no new query matches appear as
//! long as the radius comfortably exceeds the query size.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::interp::{
    neighbourhood, views_isomorphism, Interpretation, NeighbourhoodView,
};
use crate::kb::{KnowledgeBase, RoleId};
use crate::query::Cq;

/// An interpretation with a colouring (one colour index per element).
#[derive(Clone, Debug)]
pub struct Coloured {
    pub interp: Interpretation,
    pub colours: Vec<u32>,
    pub colour_count: u32,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BlockingError {
    #[error("element {elem} has degree {degree}, above the declared bound {bound}")]
    DegreeAboveBound { elem: u32, degree: usize, bound: usize },
    #[error("link level {level} exceeds properness level {proper}")]
    LevelAboveProperness { level: u32, proper: u32 },
    #[error("colouring is not {0}-proper")]
    NotProper(u32),
    #[error("query has {atoms} binary atoms but the radius is {n}; need n ≥ atoms²")]
    RadiusTooSmall { atoms: usize, n: u32 },
    #[error("mapped edge ({from},{to}) is not a link of the base: no witnessing neighbour")]
    NotALink { from: u32, to: u32 },
    #[error("pulled component escapes the witnessing ball (claim step broken at element {0})")]
    ComponentEscapesBall(u32),
    #[error("intermediate assignment is not a homomorphism at level {level} (atom {atom})")]
    NotHomomorphism { level: u32, atom: usize },
    #[error("claim application did not reduce the number of used links")]
    NoProgress,
    #[error("prefix too shallow: branch reached the frontier before any cut")]
    NeedDeeperPrefix,
    #[error("base does not have the shape the cut unit requires: {0}")]
    BadShape(String),
}

/// Greedy colouring: processes elements in index order and gives each the
/// smallest colour unused in its 2n-ball. The result is n-proper and uses
/// at most `max |N_2n|` colours.
pub fn greedy_colouring(
    i: &Interpretation,
    kb: &KnowledgeBase,
    n: u32,
    declared_degree: Option<usize>,
) -> Result<Coloured, BlockingError> {
    let nominals = i.nominal_elements(kb);
    if let Some(bound) = declared_degree {
        for d in 0..i.size() as u32 {
            if nominals.contains(&d) {
                continue;
            }
            let mut degree = 0;
            for es in i.roles.values() {
                degree += es
                    .iter()
                    .filter(|&&(a, b)| {
                        (a == d && !nominals.contains(&b)) || (b == d && !nominals.contains(&a))
                    })
                    .count();
            }
            if degree > bound {
                return Err(BlockingError::DegreeAboveBound { elem: d, degree, bound });
            }
        }
    }
    let mut colours = vec![u32::MAX; i.size()];
    let mut colour_count = 0;
    let mut max_ball = 1usize;
    for d in 0..i.size() as u32 {
        let ball = neighbourhood(i, kb, None, d, 2 * n);
        max_ball = max_ball.max(ball.elements.len());
        let used: BTreeSet<u32> = ball
            .elements
            .iter()
            .map(|&e| colours[e as usize])
            .filter(|&c| c != u32::MAX)
            .collect();
        let mut c = 0;
        while used.contains(&c) {
            c += 1;
        }
        colours[d as usize] = c;
        colour_count = colour_count.max(c + 1);
    }
    debug_assert!(colour_count as usize <= max_ball);
    Ok(Coloured { interp: i.clone(), colours, colour_count })
}

/// Checks the properness condition directly: within every n-ball all
/// colours are distinct.
pub fn is_proper(c: &Coloured, kb: &KnowledgeBase, n: u32) -> bool {
    for d in 0..c.interp.size() as u32 {
        let ball = neighbourhood(&c.interp, kb, None, d, n);
        let mut seen = BTreeSet::new();
        for &e in &ball.elements {
            if !seen.insert(c.colours[e as usize]) {
                return false;
            }
        }
    }
    true
}

/// Neighbourhood-view cache with fingerprint prefiltering.
pub struct Analyzer<'a> {
    pub base: &'a Coloured,
    pub kb: &'a KnowledgeBase,
    views: HashMap<(u32, u32), (u64, NeighbourhoodView)>,
}

impl<'a> Analyzer<'a> {
    pub fn new(base: &'a Coloured, kb: &'a KnowledgeBase) -> Self {
        Analyzer { base, kb, views: HashMap::new() }
    }

    pub fn view(&mut self, d: u32, radius: u32) -> &(u64, NeighbourhoodView) {
        let base = self.base;
        let kb = self.kb;
        self.views.entry((d, radius)).or_insert_with(|| {
            let v = neighbourhood(&base.interp, kb, Some(&base.colours), d, radius);
            (v.fingerprint(), v)
        })
    }

    pub fn iso(&mut self, a: u32, b: u32, radius: u32) -> bool {
        self.iso_map(a, b, radius).is_some()
    }

    /// Global-element mapping of the ball of `a` onto the ball of `b`.
    pub fn iso_map(&mut self, a: u32, b: u32, radius: u32) -> Option<BTreeMap<u32, u32>> {
        if a == b {
            let (_, va) = self.view(a, radius);
            return Some(va.elements.iter().map(|&e| (e, e)).collect());
        }
        let (fa, _) = *self.view(a, radius);
        let (fb, _) = *self.view(b, radius);
        if fa != fb {
            return None;
        }
        let va = self.view(a, radius).1.clone();
        let (_, vb) = self.view(b, radius);
        let mapping = views_isomorphism(&va, vb)?;
        Some(
            mapping
                .iter()
                .enumerate()
                .map(|(k, &m)| (va.elements[k], vb.elements[m]))
                .collect(),
        )
    }

    /// Is `(d, e)` an `level`-link along `role`? Either `d` has a
    /// role-successor whose ball matches `e`'s, or `e` has a
    /// role-predecessor whose ball matches `d`'s.
    pub fn is_link(&mut self, role: RoleId, d: u32, e: u32, level: u32) -> bool {
        self.link_witness(role, d, e, level).is_some()
    }

    /// The witness for a link, preferring the successor side.
    pub fn link_witness(&mut self, role: RoleId, d: u32, e: u32, level: u32) -> Option<LinkWitness> {
        for succ in self.base.interp.successors(role, d) {
            if self.iso(succ, e, level) {
                return Some(LinkWitness::SuccessorSide(succ));
            }
        }
        for pred in self.base.interp.successors(role.inverse(), e) {
            if self.iso(pred, d, level) {
                return Some(LinkWitness::PredecessorSide(pred));
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkWitness {
    /// `e'`: a role-successor of the source with a ball matching the target's.
    SuccessorSide(u32),
    /// `d'`: a role-predecessor of the target with a ball matching the source's.
    PredecessorSide(u32),
}

/// The interpretation `I_n^i`: the base extended with every `i`-link,
/// together with the added edges.
pub fn build_linked(
    c: &Coloured,
    kb: &KnowledgeBase,
    proper_level: u32,
    level: u32,
) -> Result<(Interpretation, Vec<(RoleId, u32, u32)>), BlockingError> {
    if level > proper_level {
        return Err(BlockingError::LevelAboveProperness { level, proper: proper_level });
    }
    let mut an = Analyzer::new(c, kb);
    let mut out = c.interp.clone();
    let mut links = Vec::new();
    let roles: Vec<u32> = c.interp.roles.keys().cloned().collect();
    for base in roles {
        let role = RoleId::named(base);
        for d in 0..c.interp.size() as u32 {
            for e in 0..c.interp.size() as u32 {
                if c.interp.has_edge(role, d, e) {
                    continue;
                }
                if an.is_link(role, d, e, level) {
                    out.add_edge(role, d, e);
                    links.push((role, d, e));
                }
            }
        }
    }
    Ok((out, links))
}

/// Structural node kinds for fold input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Element,
    /// Clique over a transitive base role.
    Clique(u32),
    TrBag,
    NtBag,
}

/// Where a branch may be cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutUnit {
    /// Plain tree nodes; cut-witness is the element itself.
    ElementNode,
    /// Clique-forest nodes; cut-witness is the entry element.
    CliqueForestNode,
    /// Single-edge transitive bags; cut-witness is the element shared
    /// with the parent, and the bag's inner edge is redirected.
    SingleEdgeTrBag,
}

/// One structural node of a forest-shaped interpretation.
#[derive(Clone, Debug)]
pub struct ShapeNode {
    pub elements: Vec<u32>,
    pub kind: NodeKind,
    /// `(parent node, source element, role, target element)`; the target
    /// lies in this node.
    pub parent: Option<(usize, u32, RoleId, u32)>,
    pub children: Vec<usize>,
}

/// A forest shape over the non-nominal part of an interpretation.
#[derive(Clone, Debug, Default)]
pub struct ForestShape {
    pub nodes: Vec<ShapeNode>,
    pub roots: Vec<usize>,
    /// Nodes whose children were truncated by a depth bound.
    pub frontier: BTreeSet<usize>,
}

/// Result of folding: the finite interpretation, the element renaming,
/// and the redirected edges (the links the construction introduced).
#[derive(Clone, Debug)]
pub struct FoldResult {
    pub interp: Interpretation,
    pub old_to_new: BTreeMap<u32, u32>,
    /// `(role, from, to)` in old element ids, plus the dropped original
    /// target.
    pub redirects: Vec<Redirect>,
    pub cuts: usize,
}

#[derive(Clone, Debug)]
pub struct Redirect {
    pub role: RoleId,
    pub from_old: u32,
    pub to_old: u32,
    pub dropped_old: u32,
}

/// Folds a forest-shaped coloured interpretation: walking each branch
/// top-down, the first node whose cut-witness ball matches an earlier one
/// on the same branch is cut away and its incoming edge redirected to the
/// earlier node. Fails with [`BlockingError::NeedDeeperPrefix`] when a
/// branch reaches the truncation frontier uncut.
pub fn fold(
    c: &Coloured,
    kb: &KnowledgeBase,
    shape: &ForestShape,
    n: u32,
    unit: CutUnit,
) -> Result<FoldResult, BlockingError> {
    let mut an = Analyzer::new(c, kb);
    // Distance from every element to the frontier region, to know which
    // balls are computed on complete data.
    let clearance = frontier_clearance(c, kb, shape);
    let witness_of = |node: &ShapeNode| -> Result<Option<u32>, BlockingError> {
        match unit {
            CutUnit::ElementNode => {
                if node.elements.len() != 1 {
                    return Err(BlockingError::BadShape(
                        "element-node cut requires single-element nodes".into(),
                    ));
                }
                Ok(Some(node.elements[0]))
            }
            CutUnit::CliqueForestNode => Ok(node.parent.map(|(_, _, _, entry)| entry)),
            CutUnit::SingleEdgeTrBag => {
                if node.kind == NodeKind::TrBag && node.elements.len() == 2 {
                    Ok(node.parent.map(|(_, _, _, entry)| entry))
                } else {
                    Ok(None)
                }
            }
        }
    };
    let trusted = |w: u32, clearance: &BTreeMap<u32, u32>| clearance.get(&w).map_or(true, |&c| c > n);

    let mut kept_nodes: BTreeSet<usize> = BTreeSet::new();
    let mut redirects: Vec<Redirect> = Vec::new();
    // Stack carries (node, ancestors with their witnesses).
    let mut stack: Vec<(usize, Vec<(usize, u32)>)> =
        shape.roots.iter().map(|&r| (r, Vec::new())).collect();
    let mut cuts = 0;
    while let Some((v, anc)) = stack.pop() {
        let node = &shape.nodes[v];
        let wit = witness_of(node)?;
        let mut cut = false;
        // Cuts may only rely on balls whose radius lies fully inside the
        // prefix; compromised candidates are skipped, and a branch that
        // then runs into the frontier reports that a deeper prefix is
        // needed.
        if let (Some(w), Some(_)) = (wit, node.parent) {
            for &(_, wu) in &anc {
                if !trusted(w, &clearance) || !trusted(wu, &clearance) {
                    continue;
                }
                if an.iso(w, wu, n) {
                    // cut here
                    match unit {
                        CutUnit::ElementNode | CutUnit::CliqueForestNode => {
                            let (_, src, role, _) = node.parent.unwrap();
                            redirects.push(Redirect {
                                role,
                                from_old: src,
                                to_old: wu,
                                dropped_old: w,
                            });
                        }
                        CutUnit::SingleEdgeTrBag => {
                            // Redirect the bag's inner edge to the image
                            // of its fresh endpoint under the ball
                            // isomorphism.
                            let (role, other) = bag_inner_edge(c, node, w)?;
                            let g = an.iso_map(w, wu, n).expect("iso already verified");
                            let target = *g
                                .get(&other)
                                .ok_or(BlockingError::ComponentEscapesBall(other))?;
                            redirects.push(Redirect {
                                role,
                                from_old: w,
                                to_old: target,
                                dropped_old: other,
                            });
                        }
                    }
                    cuts += 1;
                    cut = true;
                    break;
                }
            }
        }
        if cut {
            continue;
        }
        if shape.frontier.contains(&v) {
            return Err(BlockingError::NeedDeeperPrefix);
        }
        kept_nodes.insert(v);
        let mut anc2 = anc.clone();
        if let Some(w) = wit {
            // Only nodes with a parent edge may serve as redirect targets
            // for clique and bag cuts; for element cuts every node may.
            if node.parent.is_some() || unit == CutUnit::ElementNode {
                anc2.push((v, w));
            }
        }
        for &ch in &node.children {
            stack.push((ch, anc2.clone()));
        }
    }

    // Assemble: kept elements plus the whole nominal block.
    let nominals = c.interp.nominal_elements(kb);
    let mut keep: BTreeSet<u32> = nominals.clone();
    for &v in &kept_nodes {
        keep.extend(shape.nodes[v].elements.iter());
    }
    let (mut interp, old_to_new) = c.interp.induced(&keep);
    for r in &redirects {
        let from = old_to_new[&r.from_old];
        let to = old_to_new[&r.to_old];
        interp.add_edge(r.role, from, to);
    }
    Ok(FoldResult { interp, old_to_new, redirects, cuts })
}

/// The single inner edge of a two-element transitive bag, oriented away
/// from the shared element `w`: returns `(role, other-endpoint)`.
fn bag_inner_edge(c: &Coloured, node: &ShapeNode, w: u32) -> Result<(RoleId, u32), BlockingError> {
    let other = *node
        .elements
        .iter()
        .find(|&&e| e != w)
        .ok_or_else(|| BlockingError::BadShape("two-element bag expected".into()))?;
    for (&base, es) in &c.interp.roles {
        if es.contains(&(w, other)) {
            return Ok((RoleId::named(base), other));
        }
        if es.contains(&(other, w)) {
            return Ok((RoleId::inverse_of(base), other));
        }
    }
    Err(BlockingError::BadShape("bag has no inner edge".into()))
}

/// Per-element distance to the nearest frontier-node element in the
/// undirected graph of `I \ Nom`; elements with no path to the frontier
/// are absent (unbounded clearance).
fn frontier_clearance(
    c: &Coloured,
    kb: &KnowledgeBase,
    shape: &ForestShape,
) -> BTreeMap<u32, u32> {
    let nominals = c.interp.nominal_elements(kb);
    let mut dist: BTreeMap<u32, u32> = BTreeMap::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &f in &shape.frontier {
        for &e in &shape.nodes[f].elements {
            dist.insert(e, 0);
            queue.push_back(e);
        }
    }
    let mut adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for es in c.interp.roles.values() {
        for &(a, b) in es {
            if !nominals.contains(&a) && !nominals.contains(&b) {
                adj.entry(a).or_default().insert(b);
                adj.entry(b).or_default().insert(a);
            }
        }
    }
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if let Some(next) = adj.get(&x) {
            for &y in next {
                if !dist.contains_key(&y) {
                    dist.insert(y, dx + 1);
                    queue.push_back(y);
                }
            }
        }
    }
    dist
}

/// Outcome of a successful pull-back.
#[derive(Clone, Debug)]
pub struct PullBack {
    pub assignment: Vec<u32>,
    pub claim_applications: usize,
}

/// Pulls a match of `p` in `I_n^n` back to a match in `I_n` itself,
/// applying the retraction claim once per used link. Asserts the
/// neighbourhood-preservation guarantee `N_{n−k²}(h(x)) ≃ N_{n−k²}(h'(x))`
/// before returning.
pub fn pull_back(
    p: &Cq,
    h: &[u32],
    c: &Coloured,
    kb: &KnowledgeBase,
    n: u32,
) -> Result<PullBack, BlockingError> {
    let k = p.binary_atom_count() as u32;
    if n < k * k {
        return Err(BlockingError::RadiusTooSmall { atoms: k as usize, n });
    }
    let mut an = Analyzer::new(c, kb);
    let nominals = c.interp.nominal_elements(kb);
    let mut current: Vec<u32> = h.to_vec();
    let mut level = n;
    let mut applications = 0;

    let used_links = |assign: &[u32]| -> Vec<usize> {
        p.role_atoms
            .iter()
            .enumerate()
            .filter(|&(_, &(base, x, y))| {
                !c.interp.has_edge(RoleId::named(base), assign[x as usize], assign[y as usize])
            })
            .map(|(idx, _)| idx)
            .collect()
    };

    loop {
        let links = used_links(&current);
        if links.is_empty() {
            break;
        }
        if applications as u32 >= k || level < k {
            return Err(BlockingError::NoProgress);
        }
        let atom = links[0];
        let (base, x, y) = p.role_atoms[atom];
        let role = RoleId::named(base);
        let (d, e) = (current[x as usize], current[y as usize]);
        // Find the witness at the current level and the component to pull.
        let witness = an
            .link_witness(role, d, e, level)
            .ok_or(BlockingError::NotALink { from: d, to: e })?;
        let (anchor, g) = match witness {
            LinkWitness::SuccessorSide(e2) => {
                (e, an.iso_map(e, e2, level).expect("witness checked"))
            }
            LinkWitness::PredecessorSide(d2) => {
                (d, an.iso_map(d, d2, level).expect("witness checked"))
            }
        };
        // Connected component of the anchor inside h(P) ∩ (I_n \ Nom).
        let comp = match_component(p, &current, &c.interp, &nominals, anchor);
        // Apply g to the component.
        let mut next = current.clone();
        for (var, tgt) in next.iter_mut().enumerate() {
            if comp.contains(tgt) {
                *tgt = *g
                    .get(tgt)
                    .ok_or(BlockingError::ComponentEscapesBall(current[var]))?;
            }
        }
        level -= k;
        applications += 1;
        // Verify: concept atoms still hold and every edge is real or an
        // `level`-link.
        for &(concept, var) in &p.concept_atoms {
            if !c.interp.in_concept(concept, next[var as usize]) {
                return Err(BlockingError::NotHomomorphism { level, atom: usize::MAX });
            }
        }
        for (idx, &(base, x, y)) in p.role_atoms.iter().enumerate() {
            let role = RoleId::named(base);
            let (a, b) = (next[x as usize], next[y as usize]);
            if !c.interp.has_edge(role, a, b) && !an.is_link(role, a, b, level) {
                return Err(BlockingError::NotHomomorphism { level, atom: idx });
            }
        }
        let links_after = used_links(&next);
        if links_after.len() >= links.len() {
            return Err(BlockingError::NoProgress);
        }
        current = next;
    }

    // Neighbourhood preservation at radius n − k².
    let radius = n - k * k;
    for x in 0..p.vars as usize {
        if !an.iso(h[x], current[x], radius) {
            return Err(BlockingError::NotHomomorphism { level: radius, atom: x });
        }
    }
    Ok(PullBack { assignment: current, claim_applications: applications })
}

/// The connected component of `anchor` in the subinterpretation of the
/// base induced by the match image, keeping only real (non-link) edges
/// between non-nominal elements.
fn match_component(
    p: &Cq,
    assign: &[u32],
    base: &Interpretation,
    nominals: &BTreeSet<u32>,
    anchor: u32,
) -> BTreeSet<u32> {
    let mut adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(b, x, y) in &p.role_atoms {
        let (dx, dy) = (assign[x as usize], assign[y as usize]);
        if base.has_edge(RoleId::named(b), dx, dy)
            && !nominals.contains(&dx)
            && !nominals.contains(&dy)
        {
            adj.entry(dx).or_default().insert(dy);
            adj.entry(dy).or_default().insert(dx);
        }
    }
    let mut comp = BTreeSet::from([anchor]);
    let mut stack = vec![anchor];
    while let Some(v) = stack.pop() {
        if let Some(next) = adj.get(&v) {
            for &w in next {
                if comp.insert(w) {
                    stack.push(w);
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Signature, UnaryType};
    use crate::query::match_cq;

    fn kb_one_role(transitive: bool) -> KnowledgeBase {
        let mut sig = Signature::new();
        let r = sig.add_role("r").unwrap();
        if transitive {
            sig.set_transitive(r);
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

    fn chain_shape(n: usize, frontier_last: bool) -> ForestShape {
        let mut shape = ForestShape::default();
        for k in 0..n {
            shape.nodes.push(ShapeNode {
                elements: vec![k as u32],
                kind: NodeKind::Element,
                parent: if k == 0 {
                    None
                } else {
                    Some((k - 1, k as u32 - 1, RoleId::named(0), k as u32))
                },
                children: if k + 1 < n { vec![k + 1] } else { vec![] },
            });
        }
        shape.roots.push(0);
        if frontier_last {
            shape.frontier.insert(n - 1);
        }
        shape
    }

    #[test]
    fn single_element_one_colour() {
        let kb = kb_one_role(false);
        let i = Interpretation { types: vec![UnaryType(0)], ..Default::default() };
        let c = greedy_colouring(&i, &kb, 3, None).unwrap();
        assert_eq!(c.colour_count, 1);
    }

    #[test]
    fn five_chain_is_one_proper() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(5), &kb, 1, Some(2)).unwrap();
        assert!(is_proper(&c, &kb, 1));
    }

    #[test]
    fn isolated_elements_may_share_colour() {
        let kb = kb_one_role(false);
        let i = Interpretation { types: vec![UnaryType(0); 2], ..Default::default() };
        let c = greedy_colouring(&i, &kb, 1, None).unwrap();
        assert_eq!(c.colours, vec![0, 0]);
        assert!(is_proper(&c, &kb, 1));
    }

    #[test]
    fn degree_bound_is_enforced() {
        let kb = kb_one_role(false);
        let mut i = Interpretation { types: vec![UnaryType(0); 4], ..Default::default() };
        for t in 1..4 {
            i.add_edge(RoleId::named(0), 0, t);
        }
        assert!(matches!(
            greedy_colouring(&i, &kb, 1, Some(2)),
            Err(BlockingError::DegreeAboveBound { elem: 0, degree: 3, bound: 2 })
        ));
    }

    /// Two disjoint isomorphic 1-balls around e and e', with d → e'.
    /// Then (d, e) is a 1-link.
    #[test]
    fn hand_built_link_set() {
        let kb = kb_one_role(false);
        // 0 --r--> 1, and an isolated copy 2 of 1 (same colour, same ball)
        let mut i = Interpretation { types: vec![UnaryType(0); 3], ..Default::default() };
        i.add_edge(RoleId::named(0), 0, 1);
        // colour 2 like 1; balls of 1 and 2 must match, so give 2 a
        // partner carrying 0's colour.
        let mut i2 = i.clone();
        i2.types.push(UnaryType(0));
        i2.add_edge(RoleId::named(0), 3, 2);
        let c = Coloured { interp: i2, colours: vec![0, 1, 1, 0], colour_count: 2 };
        assert!(is_proper(&c, &kb, 1));
        let (linked, links) = build_linked(&c, &kb, 1, 1).unwrap();
        // (0,2) and (3,1) become links; nothing else.
        assert!(links.contains(&(RoleId::named(0), 0, 2)));
        assert!(links.contains(&(RoleId::named(0), 3, 1)));
        assert_eq!(links.len(), 2);
        assert!(linked.has_edge(RoleId::named(0), 0, 2));
        // link symmetry: (d,e) along r iff (e,d) along r⁻
        let mut an = Analyzer::new(&c, &kb);
        assert!(an.is_link(RoleId::named(0), 0, 2, 1));
        assert!(an.is_link(RoleId::named(0).inverse(), 2, 0, 1));
    }

    #[test]
    fn no_isomorphic_balls_no_links() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(4), &kb, 2, None).unwrap();
        let (linked, links) = build_linked(&c, &kb, 2, 2).unwrap();
        assert!(links.is_empty());
        assert_eq!(linked, c.interp);
    }

    #[test]
    fn level_above_properness_rejected() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(3), &kb, 1, None).unwrap();
        assert!(matches!(
            build_linked(&c, &kb, 1, 2),
            Err(BlockingError::LevelAboveProperness { .. })
        ));
    }

    #[test]
    fn fold_without_repetition_is_identity() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(3), &kb, 1, None).unwrap();
        let shape = chain_shape(3, false);
        let f = fold(&c, &kb, &shape, 1, CutUnit::ElementNode).unwrap();
        assert_eq!(f.cuts, 0);
        assert_eq!(f.interp.size(), 3);
    }

    #[test]
    fn long_chain_folds_to_lasso() {
        let kb = kb_one_role(false);
        // A long chain stands in for the regular infinite one; the
        // frontier mark at the end forces the cut to happen earlier.
        let len = 12;
        let c = greedy_colouring(&chain(len), &kb, 1, None).unwrap();
        let shape = chain_shape(len, true);
        let f = fold(&c, &kb, &shape, 1, CutUnit::ElementNode).unwrap();
        assert_eq!(f.cuts, 1);
        assert!(f.interp.size() < len);
        assert_eq!(f.redirects.len(), 1);
        // Every element still has an r-successor: the lasso closes.
        for d in 0..f.interp.size() as u32 {
            assert!(
                !f.interp.successors(RoleId::named(0), d).is_empty(),
                "element {d} lost its successor"
            );
        }
    }

    #[test]
    fn shallow_prefix_reports_need_deeper() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(3), &kb, 1, None).unwrap();
        let shape = chain_shape(3, true);
        assert!(matches!(
            fold(&c, &kb, &shape, 1, CutUnit::ElementNode),
            Err(BlockingError::NeedDeeperPrefix)
        ));
    }

    #[test]
    fn pull_back_without_links_is_identity() {
        let kb = kb_one_role(false);
        let c = greedy_colouring(&chain(4), &kb, 1, None).unwrap();
        let q = Cq { vars: 2, concept_atoms: vec![], role_atoms: vec![(0, 0, 1)] };
        let h = match_cq(&q, &c.interp).unwrap();
        let pb = pull_back(&q, &h, &c, &kb, 1).unwrap();
        assert_eq!(pb.claim_applications, 0);
        assert_eq!(pb.assignment, h);
    }

    #[test]
    fn pull_back_single_link_moves_to_witness() {
        let kb = kb_one_role(false);
        let mut i = Interpretation { types: vec![UnaryType(0); 4], ..Default::default() };
        i.add_edge(RoleId::named(0), 0, 1);
        i.add_edge(RoleId::named(0), 3, 2);
        let c = Coloured { interp: i, colours: vec![0, 1, 1, 0], colour_count: 2 };
        let (linked, links) = build_linked(&c, &kb, 1, 1).unwrap();
        assert!(links.contains(&(RoleId::named(0), 0, 2)));
        // match r(x,y) onto the link (0,2)
        let q = Cq { vars: 2, concept_atoms: vec![], role_atoms: vec![(0, 0, 1)] };
        assert!(linked.has_edge(RoleId::named(0), 0, 2));
        let h = vec![0u32, 2u32];
        let pb = pull_back(&q, &h, &c, &kb, 1).unwrap();
        assert_eq!(pb.claim_applications, 1);
        assert_eq!(pb.assignment, vec![0, 1], "y must move to the witnessing successor");
    }
}
