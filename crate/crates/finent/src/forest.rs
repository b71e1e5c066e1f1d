//! Clique-forest encodings of forest-shaped interpretations.
//!
//! A clique-forest splits the non-nominal part of an interpretation into
//! single-element nodes and transitive-role cliques, with exactly one
//! connecting edge between adjacent nodes. Node labels are unary types or
//! `(role, set of types)` pairs; edge labels are `(parent type, role,
//! child type)` triples, which pin down the endpoints because types do
//! not repeat inside a clique. Nominals are not represented: adjacency to
//! them is recovered from marker names in the element types.

use std::collections::{BTreeMap, BTreeSet};

use crate::blocking::{ForestShape, NodeKind, ShapeNode};
use crate::interp::Interpretation;
use crate::kb::{ConceptId, Ind, KnowledgeBase, NormalCi, RoleId, UnaryType};

/// Node alphabet: a single unary type, or a clique over a transitive
/// base role with pairwise distinct member types (kept sorted).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum NodeLabel {
    Element(UnaryType),
    Clique(u32, Vec<UnaryType>),
}

impl NodeLabel {
    pub fn types(&self) -> Vec<UnaryType> {
        match self {
            NodeLabel::Element(t) => vec![*t],
            NodeLabel::Clique(_, ts) => ts.clone(),
        }
    }
    pub fn carries(&self, t: UnaryType) -> bool {
        match self {
            NodeLabel::Element(u) => *u == t,
            NodeLabel::Clique(_, ts) => ts.contains(&t),
        }
    }
}

/// Edge alphabet: `(parent-side type, role, child-side type)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeLabel {
    pub parent_type: UnaryType,
    pub role: RoleId,
    pub child_type: UnaryType,
}

#[derive(Clone, Debug)]
pub struct EncNode {
    pub label: NodeLabel,
    /// Label of the edge from the parent; roots have none.
    pub parent_edge: Option<EdgeLabel>,
    pub children: Vec<usize>,
    /// Set when the node's subtree was truncated by a depth bound.
    pub truncated: bool,
}

/// A finite (prefix of a) clique-forest encoding. Tree `i` is rooted at
/// the `i`-th non-nominal individual in name order; extra trees are not
/// allowed.
#[derive(Clone, Debug, Default)]
pub struct CliqueForestEncoding {
    pub nodes: Vec<EncNode>,
    pub trees: Vec<usize>,
}

/// A regular forest: finitely many prototypes whose unfolding is an
/// infinite (or finite) clique-forest.
#[derive(Clone, Debug, Default)]
pub struct RegularForest {
    pub prototypes: Vec<(NodeLabel, Vec<(EdgeLabel, usize)>)>,
    pub roots: Vec<usize>,
}

impl RegularForest {
    pub fn prototype_count(&self) -> usize {
        self.prototypes.len()
    }

    /// Unfolds to the given node depth, marking cut nodes as truncated.
    pub fn unfold(&self, depth: usize) -> CliqueForestEncoding {
        let mut enc = CliqueForestEncoding::default();
        #[allow(clippy::too_many_arguments)]
        fn rec(
            rf: &RegularForest,
            enc: &mut CliqueForestEncoding,
            proto: usize,
            parent_edge: Option<EdgeLabel>,
            depth: usize,
        ) -> usize {
            let (label, children) = &rf.prototypes[proto];
            let idx = enc.nodes.len();
            enc.nodes.push(EncNode {
                label: label.clone(),
                parent_edge,
                children: vec![],
                truncated: depth == 0 && !children.is_empty(),
            });
            if depth > 0 {
                let mut kids = Vec::new();
                for (e, p) in children {
                    kids.push(rec(rf, enc, *p, Some(*e), depth - 1));
                }
                enc.nodes[idx].children = kids;
            }
            idx
        }
        for &r in &self.roots {
            let root = rec(self, &mut enc, r, None, depth);
            enc.trees.push(root);
        }
        enc
    }
}

/// A failed encoding invariant, with enough context to locate it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EncodingIssue {
    EdgeParentTypeMissing { node: usize, edge: EdgeLabel },
    EdgeChildTypeMissing { node: usize, edge: EdgeLabel },
    CliqueRepeatsType { node: usize },
    CliqueRoleNotTransitive { node: usize, base: u32 },
    RootIsClique { tree: usize },
    RootMissingAssertion { tree: usize, concept: ConceptId },
    RootHasParentEdge { tree: usize },
    TooManyTrees { count: usize, bound: usize },
    BranchingAboveBound { node: usize, count: usize, bound: usize },
}

/// Checks the encoding invariants; the empty list means valid.
pub fn validate_encoding(enc: &CliqueForestEncoding, kb: &KnowledgeBase) -> Vec<EncodingIssue> {
    let mut out = Vec::new();
    let bound = (kb.size() * kb.size()).max(2);
    let non_nominal: Vec<Ind> = kb
        .sig
        .individuals()
        .filter(|a| !kb.sig.is_nominal(*a))
        .collect();
    if enc.trees.len() > bound.max(non_nominal.len()) {
        out.push(EncodingIssue::TooManyTrees { count: enc.trees.len(), bound });
    }
    for (tree, &root) in enc.trees.iter().enumerate() {
        let node = &enc.nodes[root];
        if node.parent_edge.is_some() {
            out.push(EncodingIssue::RootHasParentEdge { tree });
        }
        match &node.label {
            NodeLabel::Element(t) => {
                if let Some(&a) = non_nominal.get(tree) {
                    for c in kb.asserted(a) {
                        if !t.contains(c) {
                            out.push(EncodingIssue::RootMissingAssertion { tree, concept: c });
                        }
                    }
                }
            }
            NodeLabel::Clique(..) => out.push(EncodingIssue::RootIsClique { tree }),
        }
    }
    for (idx, node) in enc.nodes.iter().enumerate() {
        if let NodeLabel::Clique(base, ts) = &node.label {
            let set: BTreeSet<UnaryType> = ts.iter().cloned().collect();
            if set.len() != ts.len() {
                out.push(EncodingIssue::CliqueRepeatsType { node: idx });
            }
            if !kb.sig.is_transitive(RoleId::named(*base)) {
                out.push(EncodingIssue::CliqueRoleNotTransitive { node: idx, base: *base });
            }
        }
        if node.children.len() > bound {
            out.push(EncodingIssue::BranchingAboveBound {
                node: idx,
                count: node.children.len(),
                bound,
            });
        }
        for &ch in &node.children {
            let edge = enc.nodes[ch]
                .parent_edge
                .expect("non-root nodes carry their parent edge");
            if !node.label.carries(edge.parent_type) {
                out.push(EncodingIssue::EdgeParentTypeMissing { node: idx, edge });
            }
            if !enc.nodes[ch].label.carries(edge.child_type) {
                out.push(EncodingIssue::EdgeChildTypeMissing { node: ch, edge });
            }
        }
    }
    out
}

/// Result of decoding: the interpretation, its forest shape (for the
/// folding machinery), and per-node element lists.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub interp: Interpretation,
    pub shape: ForestShape,
    pub node_elements: Vec<Vec<u32>>,
}

/// Materialises an encoding into an interpretation over `kb`'s
/// signature. The nominal block is reconstructed from the completed ABox
/// types; edges to and from nominals come from the adjacency markers.
pub fn decode(
    enc: &CliqueForestEncoding,
    kb: &KnowledgeBase,
    markers: &BTreeMap<(RoleId, Ind), ConceptId>,
) -> Decoded {
    let mut interp = Interpretation::default();
    // Nominal block first.
    let mut nominal_elem: BTreeMap<Ind, u32> = BTreeMap::new();
    for &a in kb.sig.nominals() {
        let ty = kb
            .abox_type(a)
            .expect("decode requires a nominal-completed ABox");
        let id = interp.types.len() as u32;
        interp.types.push(ty);
        interp.names.insert(a, id);
        nominal_elem.insert(a, id);
    }
    // Forest elements.
    let mut node_elements: Vec<Vec<u32>> = vec![Vec::new(); enc.nodes.len()];
    let mut shape = ForestShape::default();
    for (idx, node) in enc.nodes.iter().enumerate() {
        let mut elems = Vec::new();
        for t in node.label.types() {
            let id = interp.types.len() as u32;
            interp.types.push(t);
            elems.push(id);
        }
        if let NodeLabel::Clique(base, ts) = &node.label {
            // All pairs including self-loops: the members come from one
            // strongly connected component of a transitively closed
            // model, where every element loops onto itself.
            for (i, _) in ts.iter().enumerate() {
                for (j, _) in ts.iter().enumerate() {
                    interp.add_edge(RoleId::named(*base), elems[i], elems[j]);
                }
            }
        }
        node_elements[idx] = elems;
        if node.truncated {
            shape.frontier.insert(idx);
        }
    }
    // Tree roots are the non-nominal individuals in name order.
    let non_nominal: Vec<Ind> = kb
        .sig
        .individuals()
        .filter(|a| !kb.sig.is_nominal(*a))
        .collect();
    for (tree, &root) in enc.trees.iter().enumerate() {
        if let Some(&a) = non_nominal.get(tree) {
            interp.names.insert(a, node_elements[root][0]);
        }
    }
    // Edges between nodes, shape bookkeeping.
    let find_elem = |idx: usize, t: UnaryType, node_elements: &Vec<Vec<u32>>| -> u32 {
        let types = enc.nodes[idx].label.types();
        let k = types.iter().position(|&u| u == t).expect("edge endpoint type present");
        node_elements[idx][k]
    };
    for (idx, node) in enc.nodes.iter().enumerate() {
        let kind = match &node.label {
            NodeLabel::Element(_) => NodeKind::Element,
            NodeLabel::Clique(base, _) => NodeKind::Clique(*base),
        };
        let parent = node.parent_edge.map(|e| {
            let parent_idx = enc
                .nodes
                .iter()
                .enumerate()
                .find(|(_, n)| n.children.contains(&idx))
                .map(|(i, _)| i)
                .expect("non-root node has a parent");
            let src = find_elem(parent_idx, e.parent_type, &node_elements);
            let dst = find_elem(idx, e.child_type, &node_elements);
            (parent_idx, src, e.role, dst)
        });
        if let Some((_, src, role, dst)) = parent {
            interp.add_edge(role, src, dst);
        }
        shape.nodes.push(ShapeNode {
            elements: node_elements[idx].clone(),
            kind,
            parent,
            children: node.children.clone(),
        });
    }
    shape.roots = enc.trees.clone();
    // Marker-induced edges to nominals, from forest elements and from
    // other nominals alike.
    for d in 0..interp.types.len() as u32 {
        let ty = interp.types[d as usize];
        for (&(rho, a), &m) in markers {
            if ty.contains(m) {
                if let Some(&e) = nominal_elem.get(&a) {
                    interp.add_edge(rho, d, e);
                }
            }
        }
    }
    Decoded { interp, shape, node_elements }
}

/// Unravels a finite model into a safe clique-forest prefix: individuals
/// become roots; unsatisfied existential restrictions are witnessed by
/// copying model elements, with transitive witnesses expanded to a clique
/// over a minimal hitting set of the witness's strongly connected
/// component. Panics if `m` is not a model of `kb`.
pub fn unravel_to_counterexample(
    m: &Interpretation,
    kb: &KnowledgeBase,
    markers: &BTreeMap<(RoleId, Ind), ConceptId>,
    depth_bound: usize,
) -> CliqueForestEncoding {
    assert!(
        crate::interp::check_model(m, kb).is_empty(),
        "unravelling requires a model"
    );
    let nominals = m.nominal_elements(kb);
    let exists: Vec<(ConceptId, RoleId, ConceptId)> = kb
        .tbox
        .iter()
        .filter_map(|ci| match ci {
            NormalCi::ExistRestr(a, r, b) => Some((*a, *r, *b)),
            _ => None,
        })
        .collect();

    let mut enc = CliqueForestEncoding::default();
    // Worklist of (node index, element-of-m per member, depth).
    struct Pending {
        node: usize,
        originals: Vec<u32>,
        depth: usize,
    }
    let mut queue: Vec<Pending> = Vec::new();
    for a in kb.sig.individuals().filter(|a| !kb.sig.is_nominal(*a)) {
        let d = m.named_element(a).expect("model names every individual");
        let idx = enc.nodes.len();
        enc.nodes.push(EncNode {
            label: NodeLabel::Element(m.types[d as usize]),
            parent_edge: None,
            children: vec![],
            truncated: false,
        });
        enc.trees.push(idx);
        queue.push(Pending { node: idx, originals: vec![d], depth: 0 });
    }

    while let Some(p) = queue.pop() {
        if p.depth >= depth_bound {
            enc.nodes[p.node].truncated = true;
            continue;
        }
        let label = enc.nodes[p.node].label.clone();
        let types = label.types();
        for (k, &orig) in p.originals.iter().enumerate() {
            let tau = types[k];
            for &(a, rho, b) in &exists {
                if !tau.contains(a) {
                    continue;
                }
                if satisfied_in_node(&enc, p.node, k, &label, rho, b, kb, markers) {
                    continue;
                }
                // Witness in the model; prefer non-nominal ones.
                let witness = m
                    .successors(rho, orig)
                    .into_iter()
                    .filter(|e| m.in_concept(b, *e))
                    .min_by_key(|e| (nominals.contains(e), *e))
                    .expect("model satisfies the restriction");
                assert!(
                    !nominals.contains(&witness),
                    "nominal witnesses are marker-satisfied already"
                );
                let (child_label, child_originals, entry_type) =
                    if kb.sig.is_transitive(rho) {
                        // Clique over a minimal hitting set of the SCC.
                        let scc = scc_of(m, rho.base(), witness);
                        let x0 = minimal_hitting_set(m, kb, &scc, &nominals);
                        let f = *x0
                            .iter()
                            .find(|e| m.in_concept(b, **e))
                            .expect("hitting set covers the witness concept");
                        let ts: Vec<UnaryType> =
                            x0.iter().map(|&e| m.types[e as usize]).collect();
                        (
                            NodeLabel::Clique(rho.base(), ts),
                            x0.clone(),
                            m.types[f as usize],
                        )
                    } else {
                        (
                            NodeLabel::Element(m.types[witness as usize]),
                            vec![witness],
                            m.types[witness as usize],
                        )
                    };
                let child = enc.nodes.len();
                enc.nodes.push(EncNode {
                    label: child_label,
                    parent_edge: Some(EdgeLabel {
                        parent_type: tau,
                        role: rho,
                        child_type: entry_type,
                    }),
                    children: vec![],
                    truncated: false,
                });
                enc.nodes[p.node].children.push(child);
                queue.push(Pending { node: child, originals: child_originals, depth: p.depth + 1 });
            }
        }
    }
    enc
}

/// Mirrors the witness options a node offers one of its elements, short
/// of children: adjacency markers, clique siblings, and the parent edge.
#[allow(clippy::too_many_arguments)]
fn satisfied_in_node(
    enc: &CliqueForestEncoding,
    node: usize,
    member: usize,
    label: &NodeLabel,
    rho: RoleId,
    b: ConceptId,
    kb: &KnowledgeBase,
    markers: &BTreeMap<(RoleId, Ind), ConceptId>,
) -> bool {
    let tau = label.types()[member];
    // marker witness: an edge to a nominal whose type contains b
    for (&(mr, a), &mk) in markers {
        if mr == rho && tau.contains(mk) {
            if let Some(ty) = kb.abox_type(a) {
                if ty.contains(b) {
                    return true;
                }
            }
        }
    }
    if let NodeLabel::Clique(base, ts) = label {
        // Self-loops included: the member itself may witness.
        if rho.base() == *base && ts.iter().any(|t| t.contains(b)) {
            return true;
        }
    }
    if let Some(edge) = enc.nodes[node].parent_edge {
        if edge.child_type == tau && edge.role == rho.inverse() && edge.parent_type.contains(b) {
            return true;
        }
    }
    false
}

fn scc_of(m: &Interpretation, base: u32, elem: u32) -> BTreeSet<u32> {
    let fwd = reachable(m, RoleId::named(base), elem);
    let bwd = reachable(m, RoleId::inverse_of(base), elem);
    let mut out: BTreeSet<u32> = fwd.intersection(&bwd).cloned().collect();
    out.insert(elem);
    out
}

fn reachable(m: &Interpretation, r: RoleId, from: u32) -> BTreeSet<u32> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for y in m.successors(r, x) {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// Deterministic inclusion-minimal hitting set of the nonempty concept
/// extensions inside `scc \ nominals`: start from all candidates and drop
/// elements from the largest id down while every set stays hit.
fn minimal_hitting_set(
    m: &Interpretation,
    kb: &KnowledgeBase,
    scc: &BTreeSet<u32>,
    nominals: &BTreeSet<u32>,
) -> Vec<u32> {
    let candidates: Vec<u32> = scc.iter().filter(|e| !nominals.contains(e)).cloned().collect();
    let concepts: Vec<ConceptId> = kb.sig.concepts().collect();
    let targets: Vec<Vec<u32>> = concepts
        .iter()
        .map(|&c| candidates.iter().cloned().filter(|&e| m.in_concept(c, e)).collect())
        .filter(|v: &Vec<u32>| !v.is_empty())
        .collect();
    let mut keep: BTreeSet<u32> = candidates.iter().cloned().collect();
    for &e in candidates.iter().rev() {
        let hits = |keep: &BTreeSet<u32>| {
            targets.iter().all(|t| t.iter().any(|x| keep.contains(x)))
        };
        keep.remove(&e);
        if !hits(&keep) {
            keep.insert(e);
        }
    }
    keep.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::check_model;
    use crate::kb::preprocess_soi;
    use crate::textio::parse_kb;

    fn simple_enc(kb: &KnowledgeBase, t: UnaryType) -> CliqueForestEncoding {
        let _ = kb;
        CliqueForestEncoding {
            nodes: vec![EncNode { label: NodeLabel::Element(t), parent_edge: None, children: vec![], truncated: false }],
            trees: vec![0],
        }
    }

    #[test]
    fn single_root_of_right_type_is_valid() {
        let kb = parse_kb("CONCEPT A\nINDIVIDUAL i\nA(i)\n").unwrap();
        let t = UnaryType(0).with(kb.sig.concept_by_name("A").unwrap());
        let enc = simple_enc(&kb, t);
        assert!(validate_encoding(&enc, &kb).is_empty());
        // and with the assertion missing from the root type:
        let bad = simple_enc(&kb, UnaryType(0));
        assert!(matches!(
            validate_encoding(&bad, &kb).as_slice(),
            [EncodingIssue::RootMissingAssertion { .. }]
        ));
    }

    #[test]
    fn edge_label_mismatch_is_reported() {
        let kb = parse_kb("CONCEPT A\nROLE r\nINDIVIDUAL i\n").unwrap();
        let a = kb.sig.concept_by_name("A").unwrap();
        let (t0, t1) = (UnaryType(0), UnaryType(0).with(a));
        let mut enc = simple_enc(&kb, t0);
        enc.nodes.push(EncNode {
            label: NodeLabel::Element(t0),
            parent_edge: Some(EdgeLabel {
                parent_type: t1, // not the root's type
                role: kb.sig.role_by_name("r").unwrap(),
                child_type: t0,
            }),
            children: vec![],
            truncated: false,
        });
        enc.nodes[0].children.push(1);
        assert!(matches!(
            validate_encoding(&enc, &kb).as_slice(),
            [EncodingIssue::EdgeParentTypeMissing { node: 0, .. }]
        ));
    }

    #[test]
    fn clique_with_duplicate_type_is_invalid() {
        let kb = parse_kb("CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL i\n").unwrap();
        let mut enc = simple_enc(&kb, UnaryType(0));
        enc.nodes.push(EncNode {
            label: NodeLabel::Clique(0, vec![UnaryType(1), UnaryType(1)]),
            parent_edge: Some(EdgeLabel {
                parent_type: UnaryType(0),
                role: kb.sig.role_by_name("r").unwrap(),
                child_type: UnaryType(1),
            }),
            children: vec![],
            truncated: false,
        });
        enc.nodes[0].children.push(1);
        let issues = validate_encoding(&enc, &kb);
        assert!(issues.contains(&EncodingIssue::CliqueRepeatsType { node: 1 }));
    }

    #[test]
    fn decode_reconstructs_cliques_and_marker_edges() {
        let kb = parse_kb(
            "CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL i\nINDIVIDUAL o\nCI A EQUIV {o}\nCI A SUBCLASSOF some r. A\n",
        )
        .unwrap();
        let pre = preprocess_soi(&kb).unwrap();
        // pick a completion where o ∈ A (they all have it: NominalEq)
        let completed = &pre.completions[0];
        let r = completed.sig.role_by_name("r").unwrap();
        let marker = pre.markers[&(r, completed.sig.individual_by_name("o").unwrap())];
        let all = completed.unary_types();
        // a forest type carrying the marker towards o
        let t = all
            .iter()
            .cloned()
            .find(|t| t.contains(marker) && !t.contains(completed.sig.concept_by_name("A").unwrap()))
            .unwrap();
        let enc = CliqueForestEncoding {
            nodes: vec![
                EncNode { label: NodeLabel::Element(t), parent_edge: None, children: vec![1], truncated: false },
                EncNode {
                    label: NodeLabel::Clique(r.base(), vec![UnaryType(0), UnaryType(0).with(ConceptId(0))]),
                    parent_edge: Some(EdgeLabel { parent_type: t, role: r, child_type: UnaryType(0) }),
                    children: vec![],
                    truncated: false,
                },
            ],
            trees: vec![0],
        };
        let dec = decode(&enc, completed, &pre.markers);
        // clique of 2 → mutual edges
        let elems = &dec.node_elements[1];
        assert!(dec.interp.has_edge(r, elems[0], elems[1]));
        assert!(dec.interp.has_edge(r, elems[1], elems[0]));
        // marker edge from the root element to the nominal
        let root = dec.node_elements[0][0];
        let o = dec.interp.named_element(completed.sig.individual_by_name("o").unwrap()).unwrap();
        assert!(dec.interp.has_edge(r, root, o));
    }

    #[test]
    fn unravel_single_point_no_cis() {
        let kb = parse_kb("CONCEPT A\nINDIVIDUAL i\n").unwrap();
        let m = Interpretation {
            types: vec![UnaryType(0)],
            names: BTreeMap::from([(Ind(0), 0)]),
            ..Default::default()
        };
        let enc = unravel_to_counterexample(&m, &kb, &BTreeMap::new(), 4);
        assert_eq!(enc.nodes.len(), 1);
        assert_eq!(enc.trees, vec![0]);
        assert!(validate_encoding(&enc, &kb).is_empty());
    }

    #[test]
    fn transitive_cycle_unravels_to_cliques_not_chains() {
        // 2-cycle in transitive r, everything in A, CI A ⊑ ∃r.A
        let kb = parse_kb("CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL i\nCI A SUBCLASSOF some r. A\nA(i)\n").unwrap();
        let a = kb.sig.concept_by_name("A").unwrap();
        let mut m = Interpretation {
            types: vec![UnaryType(0).with(a), UnaryType(0).with(a)],
            names: BTreeMap::from([(Ind(0), 0)]),
            ..Default::default()
        };
        let r = kb.sig.role_by_name("r").unwrap();
        m.add_edge(r, 0, 1);
        m.add_edge(r, 1, 0);
        m.add_edge(r, 0, 0);
        m.add_edge(r, 1, 1);
        let enc = unravel_to_counterexample(&m, &kb, &BTreeMap::new(), 5);
        assert!(validate_encoding(&enc, &kb).is_empty());
        // Every non-root node is a clique over r with ≤ 2 member types,
        // and clique members need no further children (witness inside).
        for (idx, node) in enc.nodes.iter().enumerate() {
            if idx != enc.trees[0] {
                match &node.label {
                    NodeLabel::Clique(0, ts) => assert!(ts.len() <= 2),
                    other => panic!("expected r-cliques only, got {other:?}"),
                }
                assert!(node.children.is_empty(), "clique satisfies its members internally");
            }
        }
        assert!(enc.nodes.len() >= 2);
    }

    #[test]
    fn decoded_prefix_passes_local_checks() {
        let kb = parse_kb("CONCEPT A\nCONCEPT B\nROLE r\nINDIVIDUAL i\nCI A SUBCLASSOF some r. B\nA(i)\n").unwrap();
        let a = kb.sig.concept_by_name("A").unwrap();
        let b = kb.sig.concept_by_name("B").unwrap();
        let mut m = Interpretation {
            types: vec![UnaryType(0).with(a), UnaryType(0).with(b)],
            names: BTreeMap::from([(Ind(0), 0)]),
            ..Default::default()
        };
        m.add_edge(kb.sig.role_by_name("r").unwrap(), 0, 1);
        let enc = unravel_to_counterexample(&m, &kb, &BTreeMap::new(), 6);
        assert!(validate_encoding(&enc, &kb).is_empty());
        let dec = decode(&enc, &kb, &BTreeMap::new());
        // the decoded prefix is a full model here (finite unravelling)
        assert!(check_model(&dec.interp, &kb).is_empty());
        // and homomorphically equivalent to the input prefix
        assert!(crate::interp::find_homomorphism(&dec.interp, &m, kb.sig.pair_count()).is_some());
    }
}
