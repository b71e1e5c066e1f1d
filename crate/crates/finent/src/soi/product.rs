//! The product automaton over clique-forest encodings: encoding
//! consistency, TBox/ABox satisfaction, query refutation, safety, and —
//! for functional roles — the functionality components, all presented
//! bottom-up to the emptiness engine.
//!
//! A state packs, per node, the label of the edge to its parent (or the
//! root type), one set of partial query matches per conjunct of the
//! rewritten query, the found-bits of the nominal-witness scanners, and
//! saturating counters for functionality bookkeeping. Everything else —
//! quantifier-free and value restrictions, existential witnesses,
//! functionality of ordinary elements — is checked locally while closing
//! a node, against label tables precomputed here.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automata::ForestAutomaton;
use crate::forest::{EdgeLabel, NodeLabel};
use crate::kb::{ConceptId, Ind, KnowledgeBase, NormalCi, RoleId, UnaryType};
use crate::soi::rewrite::RewrittenCq;

/// Per-variable value inside a match function. Packed: low 16 bits the
/// code (0 = undefined, 1 = other, 2 + k = reachable successor with
/// provenance code k), high 8 bits the sibling class.
type FnVec = Vec<u32>;

const UNDEF: u32 = 0;
const OTHER: u32 = 1;

fn code_of(v: u32) -> u32 {
    v & 0xffff
}
fn class_of(v: u32) -> u32 {
    (v >> 16) & 0xff
}
fn with_class(code: u32, class: u32) -> u32 {
    code | (class << 16)
}

#[derive(Default)]
struct Intern {
    succ: Vec<(RoleId, UnaryType)>,
    succ_ids: HashMap<(RoleId, UnaryType), u32>,
    sets: Vec<BTreeSet<FnVec>>,
    set_ids: HashMap<BTreeSet<FnVec>, u32>,
    psi: HashMap<(usize, NodeLabel), Vec<FnVec>>,
    finq: HashMap<(usize, NodeLabel, Option<EdgeLabel>, u32), Option<u32>>,
    merge: HashMap<(usize, u32, u32, u32), u32>,
}

impl Intern {
    fn succ_code(&mut self, role: RoleId, side: UnaryType) -> u32 {
        if let Some(&k) = self.succ_ids.get(&(role, side)) {
            return 2 + k;
        }
        let k = self.succ.len() as u32;
        self.succ.push((role, side));
        self.succ_ids.insert((role, side), k);
        2 + k
    }
    fn succ_info(&self, code: u32) -> Option<(RoleId, UnaryType)> {
        if code >= 2 {
            Some(self.succ[(code - 2) as usize])
        } else {
            None
        }
    }
    fn set(&mut self, s: BTreeSet<FnVec>) -> u32 {
        if let Some(&id) = self.set_ids.get(&s) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.sets.push(s.clone());
        self.set_ids.insert(s, id);
        id
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SoiState {
    /// `Some(edge)` for inner nodes, `None` for roots.
    entry: Option<EdgeLabel>,
    /// Root type, for root admission.
    root_type: Option<UnaryType>,
    /// Per-conjunct match-set id (finalized codes).
    q: Vec<u32>,
    /// Scanner found-bits.
    scan: u64,
    /// Saturating per-tracker occurrence counts.
    fncnt: Vec<u8>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SoiBundle {
    /// Per-conjunct merged sibling match sets (extended codes + classes).
    g: Vec<u32>,
    /// Distinct child edge labels.
    edges: Vec<EdgeLabel>,
    /// Multiplicities of child edges whose role is functional.
    fn_edges: Vec<(EdgeLabel, u8)>,
    scan: u64,
    fncnt: Vec<u8>,
    arity: u8,
}

struct Scanner {
    witness_types: BTreeSet<UnaryType>,
}

/// A functionality tracker: occurrences of `marker` across the whole
/// forest must not exceed one (an edge from a nominal with no other
/// successor recorded in the ABox).
struct FnTracker {
    marker: ConceptId,
}

pub struct KbAutomaton {
    pub kb: KnowledgeBase,
    labels: Vec<NodeLabel>,
    edges_by_child: HashMap<UnaryType, Vec<EdgeLabel>>,
    tree_inds: Vec<Ind>,
    root_masks: Vec<(u64, u64)>, // (care mask over pairs, required bits)
    comps: Vec<RewrittenCq>,
    scanners: Vec<Scanner>,
    trackers: Vec<FnTracker>,
    fn_roles: Vec<RoleId>,
    exists: Vec<(ConceptId, RoleId, ConceptId)>,
    /// per (type, CI index): witnessed by a nominal marker
    marker_witness: HashMap<(UnaryType, usize), bool>,
    markers: BTreeMap<(RoleId, Ind), ConceptId>,
    colocated: BTreeSet<(UnaryType, UnaryType)>,
    clique_colocated: BTreeSet<(u32, UnaryType, UnaryType)>,
    useful_edges: BTreeSet<EdgeLabel>,
    /// Per type: the most existential slots any label carrying it offers.
    max_slots: HashMap<UnaryType, u8>,
    safety_active: bool,
    arity_cap: u8,
    /// The completion is inconsistent or the query trivially matches:
    /// accept nothing.
    pub rejects_everything: bool,
    intern: RefCell<Intern>,
}

/// Safety guide: tracks the current unbroken transitive chain along the
/// branch. `Free` and freshly started chains are marked; continuing an
/// old chain is not, so a branch that eventually only continues one chain
/// fails the Büchi condition.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SafetyGuide {
    Free,
    Chain { role: RoleId, at: UnaryType, fresh: bool },
}

pub struct BuildOptions {
    pub safety: bool,
    pub functional: bool,
    pub type_restriction: Option<crate::soi::TypeRestriction>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { safety: true, functional: false, type_restriction: None }
    }
}

impl KbAutomaton {
    pub fn new(
        kb: &KnowledgeBase,
        markers: &BTreeMap<(RoleId, Ind), ConceptId>,
        comps: Vec<RewrittenCq>,
        opts: &BuildOptions,
    ) -> KbAutomaton {
        let pairs = kb.sig.pair_count();
        let mut rejects_everything = false;

        // Quantifier-free viability plus marker-related prohibitions.
        let value_restrs: Vec<(ConceptId, RoleId, ConceptId)> = kb
            .tbox
            .iter()
            .filter_map(|ci| match ci {
                NormalCi::ValueRestr(a, r, b) => Some((*a, *r, *b)),
                _ => None,
            })
            .collect();
        let exists: Vec<(ConceptId, RoleId, ConceptId)> = kb
            .tbox
            .iter()
            .filter_map(|ci| match ci {
                NormalCi::ExistRestr(a, r, b) => Some((*a, *r, *b)),
                _ => None,
            })
            .collect();
        let nominal_types: BTreeMap<Ind, UnaryType> = kb
            .sig
            .nominals()
            .iter()
            .filter_map(|&a| kb.abox_type(a).map(|t| (a, t)))
            .collect();
        let fn_roles: Vec<RoleId> = if opts.functional {
            (0..kb.sig.role_count() as u32)
                .flat_map(|b| [RoleId::named(b), RoleId::inverse_of(b)])
                .filter(|r| kb.sig.is_functional(*r))
                .collect()
        } else {
            Vec::new()
        };

        let mut allowed: Vec<UnaryType> = kb
            .anonymous_types()
            .into_iter()
            .filter(|ty| opts.type_restriction.as_ref().map_or(true, |r| r.admits(*ty)))
            .filter(|ty| {
                // value restrictions across marker edges
                value_restrs.iter().all(|&(a, rho, b)| {
                    // edge to a nominal: τ ∋ a ∧ A_{ρ,n} ∈ τ → b ∈ tp(n)
                    let fwd = nominal_types.iter().all(|(&n, tn)| {
                        let m = markers[&(rho, n)];
                        !(ty.contains(a) && ty.contains(m)) || tn.contains(b)
                    });
                    // edge from a nominal: a ∈ tp(n) ∧ A_{ρ⁻,n} ∈ τ → b ∈ τ
                    let bwd = nominal_types.iter().all(|(&n, tn)| {
                        let m = markers[&(rho.inverse(), n)];
                        !(tn.contains(a) && ty.contains(m)) || ty.contains(b)
                    });
                    fwd && bwd
                })
            })
            .collect();
        // Functionality: a nominal with an ABox-recorded successor admits
        // no further forest successors.
        for &rho in &fn_roles {
            for (&n, tn) in &nominal_types {
                let abox_succs = nominal_types
                    .keys()
                    .filter(|&&b| tn.contains(markers[&(rho, b)]))
                    .count();
                if abox_succs >= 2 {
                    rejects_everything = true;
                }
                if abox_succs == 1 {
                    let m = markers[&(rho.inverse(), n)];
                    allowed.retain(|ty| !ty.contains(m));
                }
            }
        }

        // Tree-edge roles: occurring directions; no inverse tree edges
        // when the fragment forbids inverses in inclusions.
        let mut tree_roles: BTreeSet<RoleId> = kb.occurring_roles();
        if opts.functional {
            tree_roles.retain(|r| !r.is_inverse());
        }

        // Edge alphabet.
        let mut all_edges = Vec::new();
        for &rho in &tree_roles {
            for &tf in &allowed {
                for &tt in &allowed {
                    let ok = value_restrs.iter().all(|&(a, r2, b)| {
                        if r2 == rho {
                            !tf.contains(a) || tt.contains(b)
                        } else if r2 == rho.inverse() {
                            !tt.contains(a) || tf.contains(b)
                        } else {
                            true
                        }
                    });
                    if ok {
                        all_edges.push(EdgeLabel { parent_type: tf, role: rho, child_type: tt });
                    }
                }
            }
        }

        // Clique labels per transitive occurring role.
        let mut labels: Vec<NodeLabel> =
            allowed.iter().map(|&t| NodeLabel::Element(t)).collect();
        let trans_bases: BTreeSet<u32> = tree_roles
            .iter()
            .filter(|r| kb.sig.is_transitive(**r))
            .map(|r| r.base())
            .collect();
        let clique_cap = kb.size().min(2 * pairs).max(2);
        for &base in &trans_bases {
            // pairwise compatibility under all value restrictions on this
            // base role, self-pairs included (cliques carry self-loops)
            let compat = |x: UnaryType, y: UnaryType| {
                value_restrs
                    .iter()
                    .filter(|(_, r, _)| r.base() == base)
                    .all(|&(a, _, b)| !x.contains(a) || y.contains(b))
            };
            // Only irredundant member sets can arise: a clique copied
            // from a minimal hitting set of a strongly connected
            // component gives every member a concept name no other
            // member carries.
            let irredundant = |ts: &[UnaryType]| {
                ts.iter().enumerate().all(|(i, t)| {
                    (0..2 * pairs as u32).any(|c| {
                        let c = ConceptId(c);
                        t.contains(c) && ts.iter().enumerate().all(|(j, u)| i == j || !u.contains(c))
                    })
                })
            };
            let ok_self: Vec<UnaryType> =
                allowed.iter().cloned().filter(|&t| compat(t, t)).collect();
            let mut stack: Vec<Vec<UnaryType>> = ok_self.iter().map(|&t| vec![t]).collect();
            while let Some(cur) = stack.pop() {
                if cur.len() >= 2 && irredundant(&cur) {
                    labels.push(NodeLabel::Clique(base, cur.clone()));
                }
                if cur.len() >= clique_cap {
                    continue;
                }
                let last = *cur.last().unwrap();
                for &t in ok_self.iter().filter(|&&t| t > last) {
                    let mut next = cur.clone();
                    next.push(t);
                    // prune branches that can never become irredundant:
                    // a member whose every concept is shared stays shared
                    if cur.iter().all(|&u| compat(u, t) && compat(t, u)) && extendable(&next, pairs)
                    {
                        stack.push(next);
                    }
                }
            }
        }

        let mut edges_by_child: HashMap<UnaryType, Vec<EdgeLabel>> = HashMap::new();
        for e in &all_edges {
            edges_by_child.entry(e.child_type).or_default().push(*e);
        }
        // Minimal witnesses only hang a child when its edge directly
        // witnesses an existential obligation of the parent-side element;
        // other children are only kept for scanner payloads below them.
        let useful_edges: BTreeSet<EdgeLabel> = all_edges
            .iter()
            .cloned()
            .filter(|e| {
                exists.iter().any(|&(a, rho, b)| {
                    rho == e.role && e.parent_type.contains(a) && e.child_type.contains(b)
                })
            })
            .collect();
        // Pairs of types some label co-carries; sibling bundles whose
        // child edges leave two parent types never co-carried are dead.
        let mut colocated: BTreeSet<(UnaryType, UnaryType)> = BTreeSet::new();
        let mut clique_colocated: BTreeSet<(u32, UnaryType, UnaryType)> = BTreeSet::new();
        for l in &labels {
            let ts = l.types();
            for &a in &ts {
                for &b in &ts {
                    colocated.insert((a, b));
                    if let NodeLabel::Clique(base, _) = l {
                        clique_colocated.insert((*base, a, b));
                    }
                }
            }
        }

        // Existential witnesses through nominal markers, per (type, CI).
        let mut marker_witness = HashMap::new();
        for &ty in &allowed {
            for (idx, &(_, rho, b)) in exists.iter().enumerate() {
                let w = nominal_types
                    .iter()
                    .any(|(&n, tn)| ty.contains(markers[&(rho, n)]) && tn.contains(b));
                marker_witness.insert((ty, idx), w);
            }
        }

        // Scanners: existential obligations of nominals with no nominal
        // witness must be satisfied somewhere in the forest.
        let mut scanners = Vec::new();
        for (&n, tn) in &nominal_types {
            for &(a, rho, b) in &exists {
                if !tn.contains(a) {
                    continue;
                }
                let nominal_witness = nominal_types
                    .iter()
                    .any(|(&m, tm)| tn.contains(markers[&(rho, m)]) && tm.contains(b));
                if nominal_witness {
                    continue;
                }
                let back = markers[&(rho.inverse(), n)];
                let witness_types: BTreeSet<UnaryType> = allowed
                    .iter()
                    .cloned()
                    .filter(|ty| ty.contains(b) && ty.contains(back))
                    .collect();
                if witness_types.is_empty() {
                    rejects_everything = true;
                }
                scanners.push(Scanner { witness_types });
            }
        }
        assert!(scanners.len() <= 64, "scanner bitset limit");

        // Functionality trackers: nominal ρ-edges into the forest.
        let mut trackers = Vec::new();
        for &rho in &fn_roles {
            for (&n, tn) in &nominal_types {
                let abox_succs = nominal_types
                    .keys()
                    .filter(|&&b| tn.contains(markers[&(rho, b)]))
                    .count();
                if abox_succs == 0 {
                    trackers.push(FnTracker { marker: markers[&(rho.inverse(), n)] });
                }
            }
        }

        let tree_inds: Vec<Ind> = {
            let mut v: Vec<Ind> = kb
                .sig
                .individuals()
                .filter(|a| !kb.sig.is_nominal(*a))
                .collect();
            v.sort_by_key(|&a| kb.sig.individual_name(a).to_string());
            v
        };
        let root_masks: Vec<(u64, u64)> = tree_inds
            .iter()
            .map(|&a| {
                let mut care = 0u64;
                let mut req = 0u64;
                for c in kb.asserted(a) {
                    care |= 1 << c.pair();
                    if c.is_positive() {
                        req |= 1 << c.pair();
                    }
                }
                (care, req)
            })
            .collect();

        let max_members = labels
            .iter()
            .map(|l| match l {
                NodeLabel::Element(_) => 1,
                NodeLabel::Clique(_, ts) => ts.len(),
            })
            .max()
            .unwrap_or(1);
        let arity_cap =
            ((max_members * exists.len().max(1) + scanners.len()).min(250)).max(1) as u8;
        // minimal witnesses never hang more children off a node than its
        // elements have existential obligations, plus scanner detours
        let slots_of = |l: &NodeLabel| -> usize {
            l.types()
                .iter()
                .map(|t| exists.iter().filter(|(a, _, _)| t.contains(*a)).count())
                .sum()
        };
        let mut max_slots: HashMap<UnaryType, u8> = HashMap::new();
        for l in &labels {
            let slots = (slots_of(l) + scanners.len()).min(250) as u8;
            for t in l.types() {
                let e = max_slots.entry(t).or_insert(0);
                *e = (*e).max(slots);
            }
        }

        let safety_active = opts.safety && !trans_bases.is_empty();
        KbAutomaton {
            labels,
            edges_by_child,
            tree_inds,
            root_masks,
            colocated,
            clique_colocated,
            useful_edges,
            max_slots,
            comps,
            scanners,
            trackers,
            fn_roles,
            exists,
            marker_witness,
            markers: markers.clone(),
            safety_active,
            arity_cap,
            rejects_everything,
            intern: RefCell::new(Intern::default()),
            kb: kb.clone(),
        }
    }

    pub fn tree_individuals(&self) -> &[Ind] {
        &self.tree_inds
    }

    fn label_types(label: &NodeLabel) -> Vec<UnaryType> {
        label.types()
    }

    /// Valid single-node assignments of query variables for conjunct `ci`
    /// into the elements of `label`.
    fn psi(&self, ci: usize, label: &NodeLabel) -> Vec<FnVec> {
        if let Some(v) = self.intern.borrow().psi.get(&(ci, label.clone())) {
            return v.clone();
        }
        let v = self.psi_uncached(ci, label);
        self.intern.borrow_mut().psi.insert((ci, label.clone()), v.clone());
        v
    }

    fn psi_uncached(&self, ci: usize, label: &NodeLabel) -> Vec<FnVec> {
        let comp = &self.comps[ci];
        let vars = comp.cq.vars as usize;
        let members = Self::label_types(label);
        let clique_base = match label {
            NodeLabel::Clique(b, _) => Some(*b),
            NodeLabel::Element(_) => None,
        };
        // assignment per var: None or member index
        let mut out = Vec::new();
        let mut cur: Vec<Option<usize>> = vec![None; vars];
        fn rec(
            comp: &RewrittenCq,
            members: &[UnaryType],
            clique_base: Option<u32>,
            cur: &mut Vec<Option<usize>>,
            v: usize,
            out: &mut Vec<Vec<Option<usize>>>,
        ) {
            if v == cur.len() {
                out.push(cur.clone());
                return;
            }
            // leave unassigned
            cur[v] = None;
            rec(comp, members, clique_base, cur, v + 1, out);
            'member: for (k, &ty) in members.iter().enumerate() {
                for &c in &comp.tp[v] {
                    if !ty.contains(c) {
                        continue 'member;
                    }
                }
                cur[v] = Some(k);
                // role atoms with both endpoints assigned so far
                for &(r, x, y) in &comp.cq.role_atoms {
                    let (x, y) = (x as usize, y as usize);
                    if x <= v && y <= v {
                        if let (Some(_), Some(_)) = (cur[x], cur[y]) {
                            match clique_base {
                                Some(b) if b == r => {}
                                _ => {
                                    cur[v] = None;
                                    continue 'member;
                                }
                            }
                        }
                    }
                }
                rec(comp, members, clique_base, cur, v + 1, out);
                cur[v] = None;
            }
        }
        let mut raw = Vec::new();
        rec(comp, &members, clique_base, &mut cur, 0, &mut raw);
        for assign in raw {
            // encode h as member indices, marked with the sentinel class
            let f: FnVec = assign
                .iter()
                .map(|m| match m {
                    None => UNDEF,
                    Some(k) => with_class(2 + *k as u32, 0), // local member index, class fixed later
                })
                .collect();
            out.push(f);
        }
        out
    }

    /// Compatibility and relabelling of one `(h, g)` pair; returns the
    /// finalized function or `None`.
    #[allow(clippy::too_many_arguments)]
    fn combine(
        &self,
        ci: usize,
        label: &NodeLabel,
        ctx: Option<&EdgeLabel>,
        members: &[UnaryType],
        h: &FnVec,
        g: &FnVec,
    ) -> Option<FnVec> {
        let comp = &self.comps[ci];
        let intern = self.intern.borrow();
        let clique_base = match label {
            NodeLabel::Clique(b, _) => Some(*b),
            NodeLabel::Element(_) => None,
        };
        let vars = comp.cq.vars as usize;
        // disjoint domains
        for v in 0..vars {
            if h[v] != UNDEF && g[v] != UNDEF {
                return None;
            }
        }
        // pairwise conditions per role atom
        for &(r, x, y) in &comp.cq.role_atoms {
            let (x, y) = (x as usize, y as usize);
            let named = RoleId::named(r);
            let hx = h[x] != UNDEF;
            let hy = h[y] != UNDEF;
            let gx = g[x] != UNDEF;
            let gy = g[y] != UNDEF;
            if hx && gy {
                // x at this node, y below some child: need y reachable
                // from x's element via r
                let (role, side) = intern.succ_info(code_of(g[y]))?;
                if role != named {
                    return None;
                }
                let tx = members[(code_of(h[x]) - 2) as usize];
                let through_clique =
                    clique_base == Some(named.base()) && self.kb.sig.is_transitive(named);
                if !(side == tx || through_clique) {
                    return None;
                }
            }
            if hy && gx {
                let (role, side) = intern.succ_info(code_of(g[x]))?;
                if role != named.inverse() {
                    return None;
                }
                let ty = members[(code_of(h[y]) - 2) as usize];
                let through_clique =
                    clique_base == Some(named.base()) && self.kb.sig.is_transitive(named);
                if !(side == ty || through_clique) {
                    return None;
                }
            }
            if gx && gy && class_of(g[x]) != class_of(g[y]) {
                // across different children: up with r⁻, across, down with r
                if !self.kb.sig.is_transitive(named) {
                    return None;
                }
                let (rx, sx) = intern.succ_info(code_of(g[x]))?;
                let (ry, sy) = intern.succ_info(code_of(g[y]))?;
                if rx != named.inverse() || ry != named {
                    return None;
                }
                let through_clique = clique_base == Some(named.base());
                if !(sx == sy || through_clique) {
                    return None;
                }
            }
        }
        // relabel into the parent's vocabulary
        let mut f = vec![UNDEF; vars];
        for v in 0..vars {
            if h[v] != UNDEF {
                let member_ty = members[(code_of(h[v]) - 2) as usize];
                f[v] = self.relabel_h(ctx, label, member_ty);
            } else if g[v] != UNDEF {
                let code = code_of(g[v]);
                if code == OTHER {
                    f[v] = OTHER;
                } else {
                    let (role, side) = intern.succ_info(code).unwrap();
                    f[v] = self.relabel_g(ctx, label, role, side);
                }
            }
        }
        Some(f)
    }

    /// Value of a variable mapped to an element of this node, seen from
    /// the parent.
    fn relabel_h(&self, ctx: Option<&EdgeLabel>, label: &NodeLabel, member: UnaryType) -> u32 {
        let Some(edge) = ctx else { return OTHER };
        let r = edge.role;
        match label {
            NodeLabel::Element(_) => 2, // the entry element itself
            NodeLabel::Clique(base, _) => {
                if member == edge.child_type {
                    2
                } else if r.base() == *base {
                    // entry --clique--> member composes with the parent
                    // edge because the clique role is transitive
                    2
                } else {
                    OTHER
                }
            }
        }
    }

    /// Value of a variable mapped below one of this node's children, seen
    /// from the parent.
    fn relabel_g(
        &self,
        ctx: Option<&EdgeLabel>,
        label: &NodeLabel,
        role: RoleId,
        side: UnaryType,
    ) -> u32 {
        let Some(edge) = ctx else { return OTHER };
        let r = edge.role;
        if !self.kb.sig.is_transitive(r) || role != r {
            return OTHER;
        }
        match label {
            NodeLabel::Element(_) => 2, // side is the single element
            NodeLabel::Clique(base, _) => {
                if side == edge.child_type || r.base() == *base {
                    2
                } else {
                    OTHER
                }
            }
        }
    }

    /// Closes one conjunct's match set; `None` when a total match forms.
    fn finalize_query(
        &self,
        ci: usize,
        label: &NodeLabel,
        ctx: Option<&EdgeLabel>,
        gset: u32,
    ) -> Option<u32> {
        let key = (ci, label.clone(), ctx.cloned(), gset);
        if let Some(v) = self.intern.borrow().finq.get(&key) {
            return *v;
        }
        let v = self.finalize_query_uncached(ci, label, ctx, gset);
        self.intern.borrow_mut().finq.insert(key, v);
        v
    }

    fn finalize_query_uncached(
        &self,
        ci: usize,
        label: &NodeLabel,
        ctx: Option<&EdgeLabel>,
        gset: u32,
    ) -> Option<u32> {
        let members = Self::label_types(label);
        let hs = self.psi(ci, label);
        let gs = self.intern.borrow().sets[gset as usize].clone();
        let vars = self.comps[ci].cq.vars as usize;
        let mut out: BTreeSet<FnVec> = BTreeSet::new();
        for g in &gs {
            for h in &hs {
                if let Some(f) = self.combine(ci, label, ctx, &members, h, g) {
                    if f.iter().all(|&v| v != UNDEF) && vars > 0 {
                        return None; // a full match of the conjunct
                    }
                    out.insert(f);
                }
            }
        }
        Some(self.intern.borrow_mut().set(out))
    }

    fn empty_gsets(&self) -> Vec<u32> {
        let mut intern = self.intern.borrow_mut();
        self.comps
            .iter()
            .map(|c| {
                let empty: FnVec = vec![UNDEF; c.cq.vars as usize];
                intern.set(BTreeSet::from([empty]))
            })
            .collect()
    }

    fn scan_bits(&self, label: &NodeLabel) -> u64 {
        let mut bits = 0u64;
        for (k, sc) in self.scanners.iter().enumerate() {
            if Self::label_types(label).iter().any(|t| sc.witness_types.contains(t)) {
                bits |= 1 << k;
            }
        }
        bits
    }

    fn tracker_counts(&self, label: &NodeLabel) -> Vec<u8> {
        self.trackers
            .iter()
            .map(|t| {
                Self::label_types(label)
                    .iter()
                    .filter(|ty| ty.contains(t.marker))
                    .count()
                    .min(2) as u8
            })
            .collect()
    }

    /// The local checks a genuine (non-truncated) node must pass:
    /// existential witnesses and functional out-degrees per element.
    fn local_checks(&self, label: &NodeLabel, ctx: Option<&EdgeLabel>, b: &SoiBundle) -> bool {
        let members = Self::label_types(label);
        let clique = match label {
            NodeLabel::Clique(base, ts) => Some((*base, ts.clone())),
            NodeLabel::Element(_) => None,
        };
        for (k, &tau) in members.iter().enumerate() {
            let _ = k;
            for (idx, &(a, rho, bb)) in self.exists.iter().enumerate() {
                if !tau.contains(a) {
                    continue;
                }
                if *self.marker_witness.get(&(tau, idx)).unwrap_or(&false) {
                    continue;
                }
                let in_clique = clique.as_ref().map_or(false, |(base, ts)| {
                    rho.base() == *base && ts.iter().any(|t| t.contains(bb))
                });
                if in_clique {
                    continue;
                }
                let via_child = b
                    .edges
                    .iter()
                    .any(|e| e.parent_type == tau && e.role == rho && e.child_type.contains(bb));
                if via_child {
                    continue;
                }
                let via_parent = ctx.map_or(false, |e| {
                    e.child_type == tau && e.role == rho.inverse() && e.parent_type.contains(bb)
                });
                if via_parent {
                    continue;
                }
                return false;
            }
            // functional out-degree per direction
            for &rho in &self.fn_roles {
                let mut count = 0usize;
                for (e, c) in &b.fn_edges {
                    if e.parent_type == tau && e.role == rho {
                        count += *c as usize;
                    }
                }
                for (&(mr, _), &m) in &self.markers {
                    if mr == rho && tau.contains(m) {
                        count += 1;
                    }
                }
                if let Some(e) = ctx {
                    if e.child_type == tau && e.role == rho.inverse() {
                        count += 1;
                    }
                }
                if count > 1 {
                    return false;
                }
            }
        }
        true
    }

    fn assemble(
        &self,
        label: &NodeLabel,
        ctx: Option<&EdgeLabel>,
        b: &SoiBundle,
        enforce_local: bool,
    ) -> Option<SoiState> {
        if self.rejects_everything {
            return None;
        }
        // structural: child edges and parent context match the label
        for e in &b.edges {
            if !label.carries(e.parent_type) {
                return None;
            }
        }
        if let Some(e) = ctx {
            if !label.carries(e.child_type) {
                return None;
            }
        }
        if ctx.is_none() && !matches!(label, NodeLabel::Element(_)) {
            return None;
        }
        if enforce_local && !self.local_checks(label, ctx, b) {
            return None;
        }
        let mut q = Vec::with_capacity(self.comps.len());
        for ci in 0..self.comps.len() {
            q.push(self.finalize_query(ci, label, ctx, b.g[ci])?);
        }
        let scan = b.scan | self.scan_bits(label);
        let mut fncnt = b.fncnt.clone();
        for (k, own) in self.tracker_counts(label).into_iter().enumerate() {
            fncnt[k] = fncnt[k].saturating_add(own).min(2);
            if fncnt[k] >= 2 {
                return None;
            }
        }
        let (entry, root_type) = match ctx {
            Some(e) => (Some(*e), None),
            None => match label {
                NodeLabel::Element(t) => (None, Some(*t)),
                NodeLabel::Clique(..) => return None,
            },
        };
        Some(SoiState { entry, root_type, q, scan, fncnt })
    }
}

impl ForestAutomaton for KbAutomaton {
    type State = SoiState;
    type Bundle = SoiBundle;
    type NodeLabel = NodeLabel;
    type EdgeLabel = EdgeLabel;
    type Guide = SafetyGuide;

    fn node_labels(&self) -> Vec<NodeLabel> {
        if self.rejects_everything {
            return Vec::new();
        }
        self.labels.clone()
    }
    fn parent_edges(&self, node: &NodeLabel) -> Vec<EdgeLabel> {
        let mut out = Vec::new();
        for t in node.types() {
            if let Some(es) = self.edges_by_child.get(&t) {
                out.extend(es.iter().cloned());
            }
        }
        out
    }
    fn allow_root(&self, node: &NodeLabel) -> bool {
        matches!(node, NodeLabel::Element(_))
    }
    fn node_candidates(&self, b: &SoiBundle) -> Option<Vec<NodeLabel>> {
        let parents: BTreeSet<UnaryType> = b.edges.iter().map(|e| e.parent_type).collect();
        match parents.len() {
            0 => None,
            1 => {
                let t = *parents.iter().next().unwrap();
                Some(
                    self.labels
                        .iter()
                        .filter(|l| l.carries(t))
                        .cloned()
                        .collect(),
                )
            }
            _ => Some(
                self.labels
                    .iter()
                    .filter(|l| parents.iter().all(|t| l.carries(*t)))
                    .cloned()
                    .collect(),
            ),
        }
    }

    fn empty_bundle(&self) -> SoiBundle {
        SoiBundle {
            g: self.empty_gsets(),
            edges: Vec::new(),
            fn_edges: Vec::new(),
            scan: 0,
            fncnt: vec![0; self.trackers.len()],
            arity: 0,
        }
    }

    fn extend(&self, b: &SoiBundle, edge: &EdgeLabel, child: &SoiState) -> Option<SoiBundle> {
        if child.entry.as_ref() != Some(edge) {
            return None;
        }
        if b.arity >= self.arity_cap {
            return None;
        }
        if !self.useful_edges.contains(edge) && child.scan == 0 {
            return None; // witnesses nothing and carries nothing
        }
        // no label that could close this bundle needs that many children
        let tight = b
            .edges
            .iter()
            .chain(std::iter::once(edge))
            .map(|e| self.max_slots.get(&e.parent_type).cloned().unwrap_or(0))
            .min()
            .unwrap_or(self.arity_cap);
        if b.arity >= tight {
            return None;
        }
        let mut g = Vec::with_capacity(self.comps.len());
        for ci in 0..self.comps.len() {
            let succ = self.intern.borrow_mut().succ_code(edge.role, edge.parent_type);
            let key = (ci, b.g[ci], child.q[ci], succ);
            if let Some(&id) = self.intern.borrow().merge.get(&key) {
                g.push(id);
                continue;
            }
            let (gset, child_set) = {
                let intern = self.intern.borrow();
                (
                    intern.sets[b.g[ci] as usize].clone(),
                    intern.sets[child.q[ci] as usize].clone(),
                )
            };
            let mut merged: BTreeSet<FnVec> = BTreeSet::new();
            for gf in &gset {
                'child: for cf in &child_set {
                    // fresh class: 1 + max class used in gf
                    let fresh = gf
                        .iter()
                        .filter(|&&v| v != UNDEF)
                        .map(|&v| class_of(v) + 1)
                        .max()
                        .unwrap_or(0);
                    debug_assert!(fresh <= 250, "class space bounded by the arity cap");
                    let mut out = gf.clone();
                    for v in 0..out.len() {
                        if cf[v] == UNDEF {
                            continue;
                        }
                        if out[v] != UNDEF {
                            continue 'child; // overlapping domains
                        }
                        let code = match code_of(cf[v]) {
                            OTHER => OTHER,
                            _ => succ, // child-level successors re-anchor at this edge
                        };
                        out[v] = with_class(code, fresh);
                    }
                    if !self.cross_child_viable(ci, &out) {
                        continue 'child;
                    }
                    merged.insert(canonical_classes(out));
                }
            }
            let id = self.intern.borrow_mut().set(merged);
            self.intern.borrow_mut().merge.insert(key, id);
            g.push(id);
        }
        let mut edges = b.edges.clone();
        if !edges.contains(edge) {
            for e in &edges {
                if !self.colocated.contains(&(e.parent_type, edge.parent_type)) {
                    return None; // no label carries both parent types
                }
            }
            edges.push(*edge);
            edges.sort();
        }
        let mut fn_edges = b.fn_edges.clone();
        if self.fn_roles.contains(&edge.role) {
            match fn_edges.iter_mut().find(|(e, _)| e == edge) {
                Some((_, c)) => *c = c.saturating_add(1).min(3),
                None => {
                    fn_edges.push((*edge, 1));
                    fn_edges.sort();
                }
            }
        }
        let mut fncnt = b.fncnt.clone();
        for (k, c) in child.fncnt.iter().enumerate() {
            fncnt[k] = fncnt[k].saturating_add(*c).min(2);
        }
        Some(SoiBundle {
            g,
            edges,
            fn_edges,
            scan: b.scan | child.scan,
            fncnt,
            arity: b.arity + 1,
        })
    }

    fn finalize(
        &self,
        node: &NodeLabel,
        parent: Option<&EdgeLabel>,
        b: &SoiBundle,
    ) -> Option<SoiState> {
        self.assemble(node, parent, b, true)
    }

    fn free_leaf(&self, node: &NodeLabel, parent: Option<&EdgeLabel>) -> Option<SoiState> {
        self.assemble(node, parent, &self.empty_bundle(), false)
    }

    fn child_edges(&self, q: &SoiState) -> Vec<EdgeLabel> {
        match &q.entry {
            Some(e) => vec![*e],
            None => Vec::new(),
        }
    }

    fn guide_root(&self) -> SafetyGuide {
        SafetyGuide::Free
    }

    fn guide_step(&self, g: &SafetyGuide, node: &NodeLabel, edge: &EdgeLabel) -> SafetyGuide {
        if !self.safety_active {
            return SafetyGuide::Free;
        }
        if !self.kb.sig.is_transitive(edge.role) {
            return SafetyGuide::Free;
        }
        let continues = match g {
            SafetyGuide::Chain { role, at, .. } if *role == edge.role => {
                edge.parent_type == *at
                    || matches!(node, NodeLabel::Clique(b, _) if *b == edge.role.base())
            }
            _ => false,
        };
        SafetyGuide::Chain { role: edge.role, at: edge.child_type, fresh: !continues }
    }

    fn marked(&self, _q: &SoiState, g: &SafetyGuide) -> bool {
        match g {
            SafetyGuide::Free => true,
            SafetyGuide::Chain { fresh, .. } => *fresh,
        }
    }

    fn weak(&self) -> bool {
        !self.safety_active
    }

    fn tree_count(&self) -> usize {
        self.tree_inds.len()
    }

    fn root_ok(&self, tree: usize, q: &SoiState) -> bool {
        match q.root_type {
            Some(t) => {
                let (care, req) = self.root_masks[tree];
                (t.0 & care) == (req & care)
            }
            None => false,
        }
    }

    fn forest_ok(&self, roots: &[&SoiState]) -> bool {
        // scanners: each must be found in some tree
        let mut bits = 0u64;
        for r in roots {
            bits |= r.scan;
        }
        for k in 0..self.scanners.len() {
            if bits & (1 << k) == 0 {
                return false;
            }
        }
        // functionality trackers: at most one occurrence forest-wide
        for k in 0..self.trackers.len() {
            let total: u32 = roots.iter().map(|r| r.fncnt[k] as u32).sum();
            if total > 1 {
                return false;
            }
        }
        // queries: no conjunct may assemble a full match across trees
        let intern = self.intern.borrow();
        for (ci, comp) in self.comps.iter().enumerate() {
            let vars = comp.cq.vars as usize;
            if vars == 0 {
                return false; // trivially matched conjunct
            }
            let sets: Vec<&BTreeSet<FnVec>> =
                roots.iter().map(|r| &intern.sets[r.q[ci] as usize]).collect();
            if cross_tree_match(comp, &sets, vars) {
                return false;
            }
        }
        true
    }
}

/// Does some selection of one partial function per tree, with pairwise
/// disjoint domains covering all variables and all role atoms kept
/// inside a single tree, assemble a match?
fn cross_tree_match(comp: &RewrittenCq, sets: &[&BTreeSet<FnVec>], vars: usize) -> bool {
    // assignment of each variable to a tree index
    fn rec(
        comp: &RewrittenCq,
        sets: &[&BTreeSet<FnVec>],
        vars: usize,
        tree: usize,
        covered: &mut Vec<Option<usize>>,
    ) -> bool {
        if tree == sets.len() {
            return covered.iter().all(|c| c.is_some());
        }
        'cand: for f in sets[tree] {
            for v in 0..vars {
                if f[v] != UNDEF && covered[v].is_some() {
                    continue 'cand; // overlap
                }
            }
            let mut touched = Vec::new();
            for v in 0..vars {
                if f[v] != UNDEF {
                    covered[v] = Some(tree);
                    touched.push(v);
                }
            }
            // role atoms must stay within one tree
            let ok = comp.cq.role_atoms.iter().all(|&(_, x, y)| {
                match (covered[x as usize], covered[y as usize]) {
                    (Some(a), Some(b)) => a == b,
                    _ => true,
                }
            });
            if ok && rec(comp, sets, vars, tree + 1, covered) {
                return true;
            }
            for v in touched {
                covered[v] = None;
            }
        }
        false
    }
    let mut covered = vec![None; vars];
    rec(comp, sets, vars, 0, &mut covered)
}



impl KbAutomaton {
    /// Kind-independent part of the cross-sibling compatibility rules,
    /// checked as soon as two children are merged: a role atom whose
    /// endpoints sit under different children needs a transitive role,
    /// the right edge directions, and parent-side anchors that are equal
    /// or at least co-carried by some clique over that role. The exact
    /// per-label condition is re-checked when the node is closed.
    fn cross_child_viable(&self, ci: usize, g: &FnVec) -> bool {
        let comp = &self.comps[ci];
        let intern = self.intern.borrow();
        for &(r, x, y) in &comp.cq.role_atoms {
            let (x, y) = (x as usize, y as usize);
            if g[x] == UNDEF || g[y] == UNDEF || class_of(g[x]) == class_of(g[y]) {
                continue;
            }
            let named = RoleId::named(r);
            if !self.kb.sig.is_transitive(named) {
                return false;
            }
            let Some((rx, sx)) = intern.succ_info(code_of(g[x])) else { return false };
            let Some((ry, sy)) = intern.succ_info(code_of(g[y])) else { return false };
            if rx != named.inverse() || ry != named {
                return false;
            }
            if sx != sy && !self.clique_colocated.contains(&(named.base(), sx, sy)) {
                return false;
            }
        }
        true
    }
}

/// A member set can still become irredundant only if no member's every
/// concept name is already carried by another member.
fn extendable(ts: &[UnaryType], pairs: usize) -> bool {
    ts.iter().enumerate().all(|(i, t)| {
        (0..2 * pairs as u32).any(|c| {
            let c = ConceptId(c);
            t.contains(c) && ts.iter().enumerate().all(|(j, u)| i == j || !u.contains(c))
        })
    })
}

/// Canonical class renumbering: classes appear in increasing order of
/// their first variable.
fn canonical_classes(mut f: FnVec) -> FnVec {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut next = 0u32;
    for v in f.iter_mut() {
        if *v == UNDEF {
            continue;
        }
        let cls = class_of(*v);
        let new = *map.entry(cls).or_insert_with(|| {
            let n = next;
            next += 1;
            n
        });
        *v = with_class(code_of(*v), new);
    }
    f
}

impl KbAutomaton {
    /// Runs a single query component over a finite encoding: true iff the
    /// component admits a run, i.e. no full match of the conjunct forms in
    /// the closure of the decoded forest part, including across trees.
    pub fn query_component_accepts(&self, ci: usize, enc: &crate::forest::CliqueForestEncoding) -> bool {
        // bottom-up over nodes
        let mut memo: Vec<Option<u32>> = vec![None; enc.nodes.len()];
        fn eval(
            a: &KbAutomaton,
            ci: usize,
            enc: &crate::forest::CliqueForestEncoding,
            idx: usize,
            memo: &mut Vec<Option<u32>>,
        ) -> Option<u32> {
            if let Some(v) = memo[idx] {
                return Some(v);
            }
            let node = &enc.nodes[idx];
            // merged sibling set over the children
            let empty: FnVec = vec![UNDEF; a.comps[ci].cq.vars as usize];
            let mut gset: BTreeSet<FnVec> = BTreeSet::from([empty]);
            for &ch in &node.children {
                let child_q = eval(a, ci, enc, ch, memo)?;
                let edge = enc.nodes[ch].parent_edge.expect("child has a parent edge");
                let child_set = a.intern.borrow().sets[child_q as usize].clone();
                let succ = a.intern.borrow_mut().succ_code(edge.role, edge.parent_type);
                let mut merged = BTreeSet::new();
                for gf in &gset {
                    'c: for cf in &child_set {
                        let fresh = gf
                            .iter()
                            .filter(|&&v| v != UNDEF)
                            .map(|&v| class_of(v) + 1)
                            .max()
                            .unwrap_or(0);
                        let mut out = gf.clone();
                        for v in 0..out.len() {
                            if cf[v] == UNDEF {
                                continue;
                            }
                            if out[v] != UNDEF {
                                continue 'c;
                            }
                            let code = match code_of(cf[v]) {
                                OTHER => OTHER,
                                _ => succ,
                            };
                            out[v] = with_class(code, fresh);
                        }
                        merged.insert(canonical_classes(out));
                    }
                }
                gset = merged;
            }
            let gid = a.intern.borrow_mut().set(gset);
            let ctx = node.parent_edge;
            a.finalize_query(ci, &node.label, ctx.as_ref(), gid)?;
            let v = a.finalize_query(ci, &node.label, ctx.as_ref(), gid).unwrap();
            memo[idx] = Some(v);
            Some(v)
        }
        let mut roots = Vec::new();
        for &r in &enc.trees {
            match eval(self, ci, enc, r, &mut memo) {
                Some(v) => roots.push(v),
                None => return false,
            }
        }
        // cross-tree assembly
        let intern = self.intern.borrow();
        let comp = &self.comps[ci];
        let vars = comp.cq.vars as usize;
        if vars == 0 {
            return false;
        }
        let sets: Vec<&BTreeSet<FnVec>> = roots.iter().map(|&q| &intern.sets[q as usize]).collect();
        !cross_tree_match(comp, &sets, vars)
    }

    pub fn conjunct_count(&self) -> usize {
        self.comps.len()
    }

    pub fn conjunct(&self, ci: usize) -> &crate::query::Cq {
        &self.comps[ci].cq
    }

    /// Viable labels and edges, exposed for encoding generators in tests.
    pub fn alphabet(&self) -> (Vec<NodeLabel>, Vec<EdgeLabel>) {
        let mut edges = Vec::new();
        for es in self.edges_by_child.values() {
            edges.extend(es.iter().cloned());
        }
        edges.sort();
        edges.dedup();
        (self.labels.clone(), edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{CliqueForestEncoding, EncNode};
    use crate::kb::preprocess_soi;
    use crate::query::match_cq;
    use crate::soi::rewrite::rewrite_query_nominal_free;
    use crate::textio::{parse_kb, parse_query};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Random valid encoding over the automaton's alphabet.
    pub(crate) fn random_encoding(
        aut: &KbAutomaton,
        kb: &KnowledgeBase,
        rng: &mut ChaCha8Rng,
        max_depth: usize,
    ) -> Option<CliqueForestEncoding> {
        let (labels, edges) = aut.alphabet();
        if labels.is_empty() {
            return None;
        }
        let mut enc = CliqueForestEncoding::default();
        #[allow(clippy::too_many_arguments)]
        fn grow(
            enc: &mut CliqueForestEncoding,
            labels: &[NodeLabel],
            edges: &[EdgeLabel],
            rng: &mut ChaCha8Rng,
            label: NodeLabel,
            parent_edge: Option<EdgeLabel>,
            depth: usize,
        ) -> usize {
            let idx = enc.nodes.len();
            enc.nodes.push(EncNode { label: label.clone(), parent_edge, children: vec![], truncated: false });
            if depth > 0 {
                let kids = rng.gen_range(0..=2);
                for _ in 0..kids {
                    let candidates: Vec<&EdgeLabel> =
                        edges.iter().filter(|e| label.carries(e.parent_type)).collect();
                    if candidates.is_empty() {
                        break;
                    }
                    let e = **candidates.choose(rng).unwrap();
                    let child_labels: Vec<&NodeLabel> =
                        labels.iter().filter(|l| l.carries(e.child_type)).collect();
                    if child_labels.is_empty() {
                        continue;
                    }
                    let cl = (*child_labels.choose(rng).unwrap()).clone();
                    let c = grow(enc, labels, edges, rng, cl, Some(e), depth - 1);
                    enc.nodes[idx].children.push(c);
                }
            }
            idx
        }
        for t in 0..aut.tree_count() {
            let roots: Vec<&NodeLabel> = labels
                .iter()
                .filter(|l| {
                    matches!(l, NodeLabel::Element(ty)
                        if kb.asserted(aut.tree_individuals()[t]).iter().all(|c| ty.contains(*c)))
                })
                .collect();
            let root = (*roots.choose(rng)?).clone();
            let r = grow(&mut enc, &labels, &edges, rng, root, None, max_depth);
            enc.trees.push(r);
        }
        Some(enc)
    }

    /// Does the conjunct match the closure of the decoded forest part?
    pub(crate) fn matches_decoded_closure(
        aut: &KbAutomaton,
        ci: usize,
        enc: &CliqueForestEncoding,
        kb: &KnowledgeBase,
        markers: &BTreeMap<(RoleId, Ind), ConceptId>,
    ) -> bool {
        let dec = crate::forest::decode(enc, kb, markers);
        let nominals = dec.interp.nominal_elements(kb);
        let keep: BTreeSet<u32> =
            (0..dec.interp.size() as u32).filter(|d| !nominals.contains(d)).collect();
        let (forest_part, _) = dec.interp.induced(&keep);
        let closed = crate::interp::transitive_closure(&forest_part, kb);
        match_cq(aut.conjunct(ci), &closed).is_some()
    }

    #[test]
    fn query_component_agrees_with_direct_matching() {
        let kbs = [
            "CONCEPT A\nCONCEPT B\nROLE r\nINDIVIDUAL i\nCI A SUBCLASSOF some r. B\nA(i)\n",
            "CONCEPT A\nROLE s TRANSITIVE\nINDIVIDUAL i\nCI A SUBCLASSOF some s. A\nA(i)\n",
            "CONCEPT A\nROLE s TRANSITIVE\nROLE r\nINDIVIDUAL i\nINDIVIDUAL o\nCI A EQUIV {o}\nCI top SUBCLASSOF some r. A\n",
        ];
        let queries = [
            "Q <- r(x,y), B(y)\n",
            "Q <- s(x,y), s(y,z)\n",
            "Q <- s(x,x)\n",
            "Q <- A(x), B(y)\n",
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0usize;
        let mut matched = 0usize;
        for kb_text in kbs {
            let kb = parse_kb(kb_text).unwrap();
            let pre = preprocess_soi(&kb).unwrap();
            let completion = &pre.completions[0];
            for q_text in queries {
                let q = match parse_query(q_text, &kb.sig) {
                    Ok(q) => q,
                    Err(_) => continue, // query names something this KB lacks
                };
                let rw = rewrite_query_nominal_free(&q, completion, &pre.markers);
                if rw.trivially_matched {
                    continue;
                }
                let aut = KbAutomaton::new(
                    completion,
                    &pre.markers,
                    rw.cqs,
                    &BuildOptions::default(),
                );
                for _ in 0..30 {
                    let Some(enc) = random_encoding(&aut, completion, &mut rng, 3) else {
                        continue;
                    };
                    assert!(crate::forest::validate_encoding(&enc, completion).is_empty());
                    for ci in 0..aut.conjunct_count() {
                        let accepts = aut.query_component_accepts(ci, &enc);
                        let has_match =
                            matches_decoded_closure(&aut, ci, &enc, completion, &pre.markers);
                        checked += 1;
                        if has_match {
                            matched += 1;
                        }
                        assert_eq!(
                            accepts, !has_match,
                            "component {ci} of {q_text:?} on {kb_text:?} disagrees; enc={enc:?}"
                        );
                    }
                }
            }
        }
        assert!(checked > 200, "only {checked} checks ran");
        assert!(matched > 10, "only {matched} encodings had matches");
    }
}
