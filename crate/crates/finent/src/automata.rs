//! Büchi automata over forests of bounded-branching trees with labelled
//! edges, and their emptiness problem.
//!
//! Forests are processed top-down conceptually, but the transition
//! relation is *presented* bottom-up: an automaton tells the engine how
//! to accumulate a multiset of `(edge label, child state)` pairs into a
//! sibling bundle and how to close a bundle into a parent state under a
//! node label and a parent-edge context. This presentation is what makes
//! the KB product automata tractable: their query components are
//! deterministic from below (a state records exactly the partial matches
//! realised in the subtree), so enumerating child states for a given
//! parent — as a textbook top-down emptiness check would — is the one
//! direction that cannot be generated efficiently.
//!
//! Emptiness runs in three phases. *Discovery* saturates the set of
//! constructible states: every state realised by some finite tree, which
//! by monotone stabilisation includes every state realised by an infinite
//! tree (any bottom-up-deterministic coordinate settles on a deep enough
//! finite truncation). *Pruning* is the standard two-nested fixpoint for
//! Büchi tree automata over the discovered transition hypergraph: the
//! greatest fixpoint of "some transition keeps every child productive and
//! every branch can reach a marked state again", with branch-sensitive
//! data (the Büchi component) carried as a top-down deterministic
//! `Guide` refined against each state. *Root search* then looks for a
//! root-state tuple the automaton accepts as a forest, including
//! cross-tree conditions. A surviving tuple yields a regular witness with
//! one prototype per productive (state, guide) pair.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

/// A Büchi forest automaton in bottom-up presentation.
///
/// `extend` must be insensitive to the order in which siblings are added
/// (the engine explores bundles as canonical values). `Guide` is a
/// top-down deterministic overlay for branch properties; automata without
/// one use `()`.
pub trait ForestAutomaton {
    type State: Clone + Eq + Hash + Debug;
    type Bundle: Clone + Eq + Hash + Debug;
    type NodeLabel: Clone + Eq + Hash + Debug;
    type EdgeLabel: Clone + Eq + Hash + Debug;
    type Guide: Clone + Eq + Hash + Debug;

    /// The node alphabet (viable labels only; the engine tries them all).
    fn node_labels(&self) -> Vec<Self::NodeLabel>;
    /// Parent-edge labels under which a node with this label can hang.
    fn parent_edges(&self, node: &Self::NodeLabel) -> Vec<Self::EdgeLabel>;
    /// May a node with this label be a tree root?
    fn allow_root(&self, node: &Self::NodeLabel) -> bool;
    /// Node labels worth trying for a bundle; `None` means all.
    fn node_candidates(&self, b: &Self::Bundle) -> Option<Vec<Self::NodeLabel>> {
        let _ = b;
        None
    }

    fn empty_bundle(&self) -> Self::Bundle;
    /// Adds one child under its edge label; `None` when incompatible
    /// (wrong edge for the child state, arity exhausted, …).
    fn extend(
        &self,
        b: &Self::Bundle,
        edge: &Self::EdgeLabel,
        child: &Self::State,
    ) -> Option<Self::Bundle>;
    /// Closes a bundle into the parent state; `None` when no transition
    /// exists for this node label / parent context / child set.
    fn finalize(
        &self,
        node: &Self::NodeLabel,
        parent: Option<&Self::EdgeLabel>,
        b: &Self::Bundle,
    ) -> Option<Self::State>;
    /// Edge labels under which a state may appear as a child.
    fn child_edges(&self, q: &Self::State) -> Vec<Self::EdgeLabel>;

    /// Bottom-up coordinates of a *truncation leaf*: the state a node
    /// takes when its children have been cut away. Discovery seeds the
    /// state space with these so that states realised only on infinite
    /// trees are found (bottom-up-deterministic coordinates stabilise on
    /// deep enough finite truncations). Such seeds carry no transition,
    /// so the pruning phase never treats them as accepting on their own.
    /// The default — genuine leaf transitions — suits automata whose
    /// every state is realised by some finite tree.
    fn free_leaf(
        &self,
        node: &Self::NodeLabel,
        parent: Option<&Self::EdgeLabel>,
    ) -> Option<Self::State> {
        self.finalize(node, parent, &self.empty_bundle())
    }

    fn guide_root(&self) -> Self::Guide;
    fn guide_step(
        &self,
        g: &Self::Guide,
        node: &Self::NodeLabel,
        edge: &Self::EdgeLabel,
    ) -> Self::Guide;
    /// Büchi marking of a configuration.
    fn marked(&self, q: &Self::State, g: &Self::Guide) -> bool;
    /// Weak promise: along every run branch, once marked always marked.
    fn weak(&self) -> bool;

    /// Number of trees in accepted forests.
    fn tree_count(&self) -> usize;
    /// Per-tree root admission.
    fn root_ok(&self, tree: usize, q: &Self::State) -> bool;
    /// Cross-tree admission of a full root tuple.
    fn forest_ok(&self, roots: &[&Self::State]) -> bool {
        let _ = roots;
        true
    }
}

/// Synchronous product of a weak automaton with an arbitrary Büchi one.
/// A configuration is marked when both coordinates are; because the
/// first automaton is weak, this recognises exactly the intersection.
/// The product is itself weak iff the second automaton is.
pub struct Product<A, B> {
    pub left: A,
    pub right: B,
}

impl<A, B> Product<A, B>
where
    A: ForestAutomaton,
    B: ForestAutomaton<NodeLabel = A::NodeLabel, EdgeLabel = A::EdgeLabel>,
{
    pub fn new(left: A, right: B) -> Self {
        assert!(left.weak(), "product construction requires the left automaton to be weak");
        assert_eq!(left.tree_count(), right.tree_count(), "alphabet/arity mismatch");
        Product { left, right }
    }
}

impl<A, B> ForestAutomaton for Product<A, B>
where
    A: ForestAutomaton,
    B: ForestAutomaton<NodeLabel = A::NodeLabel, EdgeLabel = A::EdgeLabel>,
{
    type State = (A::State, B::State);
    type Bundle = (A::Bundle, B::Bundle);
    type NodeLabel = A::NodeLabel;
    type EdgeLabel = A::EdgeLabel;
    type Guide = (A::Guide, B::Guide);

    fn node_labels(&self) -> Vec<Self::NodeLabel> {
        let rs = self.right.node_labels();
        self.left.node_labels().into_iter().filter(|n| rs.contains(n)).collect()
    }
    fn parent_edges(&self, node: &Self::NodeLabel) -> Vec<Self::EdgeLabel> {
        let rs = self.right.parent_edges(node);
        self.left.parent_edges(node).into_iter().filter(|e| rs.contains(e)).collect()
    }
    fn allow_root(&self, node: &Self::NodeLabel) -> bool {
        self.left.allow_root(node) && self.right.allow_root(node)
    }
    fn empty_bundle(&self) -> Self::Bundle {
        (self.left.empty_bundle(), self.right.empty_bundle())
    }
    fn extend(
        &self,
        b: &Self::Bundle,
        edge: &Self::EdgeLabel,
        child: &Self::State,
    ) -> Option<Self::Bundle> {
        Some((
            self.left.extend(&b.0, edge, &child.0)?,
            self.right.extend(&b.1, edge, &child.1)?,
        ))
    }
    fn finalize(
        &self,
        node: &Self::NodeLabel,
        parent: Option<&Self::EdgeLabel>,
        b: &Self::Bundle,
    ) -> Option<Self::State> {
        Some((
            self.left.finalize(node, parent, &b.0)?,
            self.right.finalize(node, parent, &b.1)?,
        ))
    }
    fn child_edges(&self, q: &Self::State) -> Vec<Self::EdgeLabel> {
        let rs = self.right.child_edges(&q.1);
        self.left.child_edges(&q.0).into_iter().filter(|e| rs.contains(e)).collect()
    }
    fn free_leaf(
        &self,
        node: &Self::NodeLabel,
        parent: Option<&Self::EdgeLabel>,
    ) -> Option<Self::State> {
        Some((self.left.free_leaf(node, parent)?, self.right.free_leaf(node, parent)?))
    }
    fn guide_root(&self) -> Self::Guide {
        (self.left.guide_root(), self.right.guide_root())
    }
    fn guide_step(
        &self,
        g: &Self::Guide,
        node: &Self::NodeLabel,
        edge: &Self::EdgeLabel,
    ) -> Self::Guide {
        (self.left.guide_step(&g.0, node, edge), self.right.guide_step(&g.1, node, edge))
    }
    fn marked(&self, q: &Self::State, g: &Self::Guide) -> bool {
        self.left.marked(&q.0, &g.0) && self.right.marked(&q.1, &g.1)
    }
    fn weak(&self) -> bool {
        self.right.weak()
    }
    fn tree_count(&self) -> usize {
        self.left.tree_count()
    }
    fn root_ok(&self, tree: usize, q: &Self::State) -> bool {
        self.left.root_ok(tree, &q.0) && self.right.root_ok(tree, &q.1)
    }
    fn forest_ok(&self, roots: &[&Self::State]) -> bool {
        let ls: Vec<&A::State> = roots.iter().map(|q| &q.0).collect();
        let rs: Vec<&B::State> = roots.iter().map(|q| &q.1).collect();
        self.left.forest_ok(&ls) && self.right.forest_ok(&rs)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("state-space discovery exceeded the cap of {0} states")]
    StateCap(usize),
    #[error("sibling-bundle discovery exceeded the cap of {0} bundles")]
    BundleCap(usize),
    #[error("root-tuple search exceeded the cap of {0} combinations")]
    RootCap(usize),
}

/// A regular forest over the automaton's alphabets: finitely many
/// prototypes, each with a node label and edge-labelled children. The
/// accepting run is carried along (`states[p]` is the run's state at
/// every occurrence of prototype `p`), so the witness can be re-validated
/// without solving for a run again.
#[derive(Clone, Debug)]
pub struct RegularWitness<N, E, S> {
    pub prototypes: Vec<(N, Vec<(E, usize)>)>,
    pub roots: Vec<usize>,
    pub states: Vec<S>,
}

impl<N, E, S> RegularWitness<N, E, S> {
    pub fn prototype_count(&self) -> usize {
        self.prototypes.len()
    }
}

#[derive(Clone, Debug)]
pub struct EmptinessReport<N, E, S> {
    pub empty: bool,
    pub witness: Option<RegularWitness<N, E, S>>,
    pub states_discovered: usize,
    pub bundles_discovered: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_states: usize,
    pub max_bundles: usize,
    pub max_root_tuples: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_states: 2_000_000, max_bundles: 2_000_000, max_root_tuples: 5_000_000 }
    }
}

struct Interner<T: Clone + Eq + Hash> {
    items: Vec<T>,
    ids: HashMap<T, usize>,
}

impl<T: Clone + Eq + Hash> Interner<T> {
    fn new() -> Self {
        Interner { items: Vec::new(), ids: HashMap::new() }
    }
    fn intern(&mut self, t: T) -> (usize, bool) {
        if let Some(&id) = self.ids.get(&t) {
            return (id, false);
        }
        let id = self.items.len();
        self.items.push(t.clone());
        self.ids.insert(t, id);
        (id, true)
    }
    fn len(&self) -> usize {
        self.items.len()
    }
}

/// The discovered transition hypergraph plus fixpoint results.
pub struct Explored<A: ForestAutomaton> {
    states: Interner<A::State>,
    bundles: Interner<A::Bundle>,
    /// bundle → derivations `(smaller bundle, edge, child state)`.
    bderiv: Vec<Vec<(usize, A::EdgeLabel, usize)>>,
    /// state → sources `(node label, parent edge context, bundle)`.
    sources: Vec<Vec<(A::NodeLabel, Option<A::EdgeLabel>, usize)>>,
    /// states finalised with no parent edge.
    root_states: BTreeSet<usize>,
}

/// Discovers every constructible state and bundle (finite-tree
/// saturation plus free truncation leaves).
fn discover<A: ForestAutomaton>(a: &A, limits: &Limits) -> Result<Explored<A>, AutomatonError> {
    let node_labels = a.node_labels();
    let mut ex = Explored::<A> {
        states: Interner::new(),
        bundles: Interner::new(),
        bderiv: Vec::new(),
        sources: Vec::new(),
        root_states: BTreeSet::new(),
    };
    let (empty_b, _) = ex.bundles.intern(a.empty_bundle());
    ex.bderiv.push(Vec::new());
    let mut new_bundles: VecDeque<usize> = VecDeque::from([empty_b]);
    let mut new_states: VecDeque<usize> = VecDeque::new();

    // Free-leaf seeds: coordinates of truncation cuts.
    for n in &node_labels {
        let mut ctxs: Vec<Option<A::EdgeLabel>> =
            a.parent_edges(n).into_iter().map(Some).collect();
        if a.allow_root(n) {
            ctxs.push(None);
        }
        for ctx in ctxs {
            if let Some(q) = a.free_leaf(n, ctx.as_ref()) {
                let (qid, fresh) = ex.states.intern(q);
                if fresh {
                    ex.sources.push(Vec::new());
                    new_states.push_back(qid);
                    if ex.states.len() > limits.max_states {
                        return Err(AutomatonError::StateCap(limits.max_states));
                    }
                }
            }
        }
    }

    let try_finalize = |ex: &mut Explored<A>,
                            bid: usize,
                            new_states: &mut VecDeque<usize>|
     -> Result<(), AutomatonError> {
        let bundle = ex.bundles.items[bid].clone();
        let candidates = a.node_candidates(&bundle).unwrap_or_else(|| node_labels.clone());
        for n in &candidates {
            let mut ctxs: Vec<Option<A::EdgeLabel>> =
                a.parent_edges(n).into_iter().map(Some).collect();
            if a.allow_root(n) {
                ctxs.push(None);
            }
            for ctx in ctxs {
                if let Some(q) = a.finalize(n, ctx.as_ref(), &bundle) {
                    let (qid, fresh) = ex.states.intern(q);
                    if fresh {
                        ex.sources.push(Vec::new());
                        new_states.push_back(qid);
                        if ex.states.len() > limits.max_states {
                            return Err(AutomatonError::StateCap(limits.max_states));
                        }
                    }
                    ex.sources[qid].push((n.clone(), ctx.clone(), bid));
                    if ctx.is_none() {
                        ex.root_states.insert(qid);
                    }
                }
            }
        }
        Ok(())
    };

    let try_extend = |ex: &mut Explored<A>,
                          bid: usize,
                          qid: usize,
                          new_bundles: &mut VecDeque<usize>|
     -> Result<(), AutomatonError> {
        let bundle = ex.bundles.items[bid].clone();
        let state = ex.states.items[qid].clone();
        for e in a.child_edges(&state) {
            if let Some(b2) = a.extend(&bundle, &e, &state) {
                let (b2id, fresh) = ex.bundles.intern(b2);
                if fresh {
                    ex.bderiv.push(Vec::new());
                    new_bundles.push_back(b2id);
                    if ex.bundles.len() > limits.max_bundles {
                        return Err(AutomatonError::BundleCap(limits.max_bundles));
                    }
                }
                let deriv = (bid, e, qid);
                if !ex.bderiv[b2id].contains(&deriv) {
                    ex.bderiv[b2id].push(deriv);
                }
            }
        }
        Ok(())
    };

    let verbose = std::env::var_os("FINENT_TRACE").is_some();
    let mut steps = 0u64;
    loop {
        steps += 1;
        if verbose && steps % 1000 == 0 {
            eprintln!(
                "discovery: {} states, {} bundles, {} queued",
                ex.states.len(),
                ex.bundles.len(),
                new_bundles.len() + new_states.len()
            );
        }
        if let Some(bid) = new_bundles.pop_front() {
            try_finalize(&mut ex, bid, &mut new_states)?;
            for qid in 0..ex.states.len() {
                try_extend(&mut ex, bid, qid, &mut new_bundles)?;
            }
        } else if let Some(qid) = new_states.pop_front() {
            for bid in 0..ex.bundles.len() {
                try_extend(&mut ex, bid, qid, &mut new_bundles)?;
            }
        } else {
            break;
        }
    }
    if verbose {
        eprintln!("discovery done: {} states, {} bundles", ex.states.len(), ex.bundles.len());
    }
    Ok(ex)
}

/// Key of a configuration in the fixpoint phase: a state together with
/// the guide value and the context (root or the edge it hangs under).
type Cfg = (usize, usize, usize); // (state id, guide id, ctx id)

struct Fixpoint<A: ForestAutomaton> {
    guides: Interner<A::Guide>,
    ctxs: Interner<Option<A::EdgeLabel>>,
    /// all reachable configurations
    reach: HashSet<Cfg>,
}

impl<A: ForestAutomaton> Fixpoint<A> {
    fn ctx_of(&mut self, e: Option<A::EdgeLabel>) -> usize {
        let (id, _) = self.ctxs.intern(e);
        id
    }
}

impl<A: ForestAutomaton> Explored<A> {
    /// Sources of a state usable in a given context.
    fn sources_for(
        &self,
        qid: usize,
        ctx: &Option<A::EdgeLabel>,
    ) -> Vec<(A::NodeLabel, usize)> {
        self.sources[qid]
            .iter()
            .filter(|(_, c, _)| c == ctx)
            .map(|(n, _, b)| (n.clone(), *b))
            .collect()
    }

    /// All configurations reachable downward from admissible roots.
    fn reachable(&mut self, a: &A) -> Fixpoint<A> {
        let mut fx = Fixpoint::<A> {
            guides: Interner::new(),
            ctxs: Interner::new(),
            reach: HashSet::new(),
        };
        let (g0, _) = fx.guides.intern(a.guide_root());
        let root_ctx = fx.ctx_of(None);
        let mut queue: VecDeque<Cfg> = VecDeque::new();
        for &qid in &self.root_states {
            let admissible =
                (0..a.tree_count()).any(|t| a.root_ok(t, &self.states.items[qid]));
            if admissible && fx.reach.insert((qid, g0, root_ctx)) {
                queue.push_back((qid, g0, root_ctx));
            }
        }
        // Walk bundle derivations; memoise visited (bundle, guide, label).
        let mut seen_bundle: HashSet<(usize, usize, usize)> = HashSet::new();
        let mut label_ids: Interner<A::NodeLabel> = Interner::new();
        while let Some((qid, gid, ctxid)) = queue.pop_front() {
            let ctx = fx.ctxs.items[ctxid].clone();
            for (n, bid) in self.sources_for(qid, &ctx) {
                let (nid, _) = label_ids.intern(n.clone());
                let mut stack = vec![bid];
                while let Some(b) = stack.pop() {
                    if !seen_bundle.insert((b, gid, nid)) {
                        continue;
                    }
                    for (b2, e, qc) in self.bderiv[b].clone() {
                        let g = fx.guides.items[gid].clone();
                        let gc = a.guide_step(&g, &n, &e);
                        let (gcid, _) = fx.guides.intern(gc);
                        let cid = fx.ctx_of(Some(e.clone()));
                        if fx.reach.insert((qc, gcid, cid)) {
                            queue.push_back((qc, gcid, cid));
                        }
                        stack.push(b2);
                    }
                }
            }
        }
        fx
    }
}

/// Inner least fixpoint: which configurations can spread a finite run
/// fragment whose branches all terminate or reach a marked surviving
/// configuration. Returns the surviving set and, optionally, ranks.
#[allow(clippy::too_many_arguments)]
fn good_set<A: ForestAutomaton>(
    a: &A,
    ex: &Explored<A>,
    fx: &mut Fixpoint<A>,
    alive: &HashSet<Cfg>,
    ranks: Option<&mut HashMap<Cfg, usize>>,
) -> HashSet<Cfg> {
    // Node of the and-or graph: either a configuration or a bundle task
    // (bundle, guide, node-label-id). Bundle tasks succeed when the
    // bundle decomposes into children that are marked-alive or good.
    let mut label_ids: Interner<A::NodeLabel> = Interner::new();
    let mut good: HashSet<Cfg> = HashSet::new();
    let mut good_bundle: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut rank_map: HashMap<Cfg, usize> = HashMap::new();
    let mut stage = 0usize;
    loop {
        stage += 1;
        let mut changed = false;
        for &(qid, gid, ctxid) in alive {
            let g = fx.guides.items[gid].clone();
            let ctx = fx.ctxs.items[ctxid].clone();
            for (n, bid) in ex.sources_for(qid, &ctx) {
                let (nid, _) = label_ids.intern(n.clone());
                // evaluate this bundle task bottom-up along derivations
                let mut stack = vec![bid];
                let mut order = Vec::new();
                let mut seen = HashSet::new();
                while let Some(b) = stack.pop() {
                    if !seen.insert(b) {
                        continue;
                    }
                    order.push(b);
                    for &(b2, _, _) in &ex.bderiv[b] {
                        stack.push(b2);
                    }
                }
                order.reverse(); // smaller bundles first
                for &b in &order {
                    if good_bundle.contains(&(b, gid, nid)) {
                        continue;
                    }
                    let ok = if ex.bderiv[b].is_empty() {
                        true // the empty bundle
                    } else {
                        ex.bderiv[b].iter().any(|(b2, e, qc)| {
                            if !good_bundle.contains(&(*b2, gid, nid)) {
                                return false;
                            }
                            let gc = a.guide_step(&g, &n, e);
                            let (gcid, _) = fx.guides.intern(gc.clone());
                            let cid = fx.ctx_of(Some(e.clone()));
                            let cfg = (*qc, gcid, cid);
                            alive.contains(&cfg)
                                && (a.marked(&ex.states.items[*qc], &gc) || good.contains(&cfg))
                        })
                    };
                    if ok && good_bundle.insert((b, gid, nid)) {
                        changed = true;
                    }
                }
                if good_bundle.contains(&(bid, gid, nid)) && !good.contains(&(qid, gid, ctxid)) {
                    good.insert((qid, gid, ctxid));
                    rank_map.insert((qid, gid, ctxid), stage);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(r) = ranks {
        *r = rank_map;
    }
    good
}

/// Decides emptiness; on non-emptiness extracts a regular witness.
pub fn is_empty<A: ForestAutomaton>(
    a: &A,
    limits: &Limits,
) -> Result<EmptinessReport<A::NodeLabel, A::EdgeLabel, A::State>, AutomatonError> {
    let mut ex = discover(a, limits)?;
    let mut fx = ex.reachable(a);
    let mut alive: HashSet<Cfg> = fx.reach.clone();
    // Outer greatest fixpoint.
    loop {
        let good = good_set(a, &ex, &mut fx, &alive, None);
        let next: HashSet<Cfg> = alive.intersection(&good).cloned().collect();
        if next.len() == alive.len() {
            break;
        }
        alive = next;
    }
    // Root search.
    let (g0, _) = fx.guides.intern(a.guide_root());
    let root_ctx = fx.ctx_of(None);
    let trees = a.tree_count();
    let mut per_tree: Vec<Vec<usize>> = Vec::with_capacity(trees);
    for t in 0..trees {
        let opts: Vec<usize> = ex
            .root_states
            .iter()
            .cloned()
            .filter(|&qid| {
                alive.contains(&(qid, g0, root_ctx)) && a.root_ok(t, &ex.states.items[qid])
            })
            .collect();
        if opts.is_empty() {
            return Ok(EmptinessReport {
                empty: true,
                witness: None,
                states_discovered: ex.states.len(),
                bundles_discovered: ex.bundles.len(),
            });
        }
        per_tree.push(opts);
    }
    // Depth-first tuple search with a budget.
    let mut tuple: Vec<usize> = Vec::new();
    let mut budget = limits.max_root_tuples;
    fn search<A: ForestAutomaton>(
        a: &A,
        ex: &Explored<A>,
        per_tree: &[Vec<usize>],
        tuple: &mut Vec<usize>,
        budget: &mut usize,
    ) -> Result<bool, AutomatonError> {
        if tuple.len() == per_tree.len() {
            let refs: Vec<&A::State> = tuple.iter().map(|&q| &ex.states.items[q]).collect();
            return Ok(a.forest_ok(&refs));
        }
        for &q in &per_tree[tuple.len()] {
            if *budget == 0 {
                return Err(AutomatonError::RootCap(0));
            }
            *budget -= 1;
            tuple.push(q);
            if search(a, ex, per_tree, tuple, budget)? {
                return Ok(true);
            }
            tuple.pop();
        }
        Ok(false)
    }
    let found = search(a, &ex, &per_tree, &mut tuple, &mut budget)?;
    if !found {
        return Ok(EmptinessReport {
            empty: true,
            witness: None,
            states_discovered: ex.states.len(),
            bundles_discovered: ex.bundles.len(),
        });
    }
    // Witness extraction from the final fixpoint.
    let witness = extract_witness(a, &ex, &mut fx, &alive, &tuple);
    Ok(EmptinessReport {
        empty: false,
        witness: Some(witness),
        states_discovered: ex.states.len(),
        bundles_discovered: ex.bundles.len(),
    })
}

/// Builds one prototype per needed (state, guide) configuration, choosing
/// for each a rank-minimal transition from the final fixpoint.
fn extract_witness<A: ForestAutomaton>(
    a: &A,
    ex: &Explored<A>,
    fx: &mut Fixpoint<A>,
    alive: &HashSet<Cfg>,
    roots: &[usize],
) -> RegularWitness<A::NodeLabel, A::EdgeLabel, A::State> {
    let (g0, _) = fx.guides.intern(a.guide_root());
    let root_ctx = fx.ctx_of(None);
    let mut proto_of: HashMap<Cfg, usize> = HashMap::new();
    let mut prototypes: Vec<(A::NodeLabel, Vec<(A::EdgeLabel, usize)>)> = Vec::new();
    let mut proto_states: Vec<A::State> = Vec::new();
    let mut queue: VecDeque<Cfg> = VecDeque::new();
    let mut root_ids = Vec::new();
    for &q in roots {
        let cfg = (q, g0, root_ctx);
        let id = *proto_of.entry(cfg).or_insert_with(|| {
            prototypes.push((ex.sources[q][0].0.clone(), Vec::new())); // placeholder
            proto_states.push(ex.states.items[q].clone());
            queue.push_back(cfg);
            prototypes.len() - 1
        });
        root_ids.push(id);
    }
    // Precompute ranks on the final fixpoint for rank-decreasing choices.
    let mut ranks: HashMap<Cfg, usize> = HashMap::new();
    let good = good_set(a, ex, fx, alive, Some(&mut ranks));
    debug_assert!(alive.iter().all(|c| good.contains(c)));
    while let Some((qid, gid, ctxid)) = queue.pop_front() {
        let g = fx.guides.items[gid].clone();
        let ctx = fx.ctxs.items[ctxid].clone();
        // choose the source whose bundle decomposes with minimal ranks
        let mut best: Option<(usize, A::NodeLabel, Vec<(A::EdgeLabel, Cfg)>)> = None;
        for (n, bid) in ex.sources_for(qid, &ctx) {
            if let Some(children) = decompose(a, ex, fx, alive, &ranks, &g, &n, bid) {
                let score: usize = children
                    .iter()
                    .map(|(_, c)| ranks.get(c).cloned().unwrap_or(usize::MAX / 2))
                    .max()
                    .unwrap_or(0);
                if best.as_ref().map_or(true, |(s, _, _)| score < *s) {
                    best = Some((score, n, children));
                }
            }
        }
        let (_, label, children) = best.expect("alive configuration must decompose");
        let pid = proto_of[&(qid, gid, ctxid)];
        prototypes[pid].0 = label;
        let mut kids = Vec::new();
        for (e, cfg) in children {
            let id = *proto_of.entry(cfg).or_insert_with(|| {
                prototypes.push((ex.sources[cfg.0][0].0.clone(), Vec::new()));
                proto_states.push(ex.states.items[cfg.0].clone());
                queue.push_back(cfg);
                prototypes.len() - 1
            });
            kids.push((e, id));
        }
        prototypes[pid].1 = kids;
    }
    RegularWitness { prototypes, roots: root_ids, states: proto_states }
}

/// Decomposes a bundle into concrete `(edge, child configuration)` pairs
/// all of which are alive, preferring marked or low-rank children.
/// Backtracks over derivations, so a failure means no alive decomposition
/// exists at all.
#[allow(clippy::too_many_arguments)]
fn decompose<A: ForestAutomaton>(
    a: &A,
    ex: &Explored<A>,
    fx: &mut Fixpoint<A>,
    alive: &HashSet<Cfg>,
    ranks: &HashMap<Cfg, usize>,
    g: &A::Guide,
    n: &A::NodeLabel,
    bid: usize,
) -> Option<Vec<(A::EdgeLabel, Cfg)>> {
    if ex.bderiv[bid].is_empty() {
        return Some(Vec::new());
    }
    let mut options: Vec<(usize, usize, A::EdgeLabel, Cfg)> = Vec::new();
    for (b2, e, qc) in ex.bderiv[bid].clone() {
        let gc = a.guide_step(g, n, &e);
        let (gcid, _) = fx.guides.intern(gc.clone());
        let cid = fx.ctx_of(Some(e.clone()));
        let cfg = (qc, gcid, cid);
        if !alive.contains(&cfg) {
            continue;
        }
        let marked = a.marked(&ex.states.items[qc], &gc);
        let rank = if marked { 0 } else { ranks.get(&cfg).cloned().unwrap_or(usize::MAX / 2) };
        options.push((rank, b2, e, cfg));
    }
    options.sort_by_key(|(r, _, _, _)| *r);
    for (_, b2, e, cfg) in options {
        if let Some(mut rest) = decompose(a, ex, fx, alive, ranks, g, n, b2) {
            rest.push((e, cfg));
            return Some(rest);
        }
    }
    None
}

/// Cross-check for weak automata: a marked core (greatest fixpoint over
/// marked configurations) followed by one least fixpoint.
pub fn is_empty_weak<A: ForestAutomaton>(
    a: &A,
    limits: &Limits,
) -> Result<bool, AutomatonError> {
    assert!(a.weak(), "cross-check applies to weak automata only");
    let mut ex = discover(a, limits)?;
    let mut fx = ex.reachable(a);
    let reach = fx.reach.clone();
    // Greatest fixpoint: marked configurations that can stay in the core.
    let mut core: HashSet<Cfg> = reach
        .iter()
        .cloned()
        .filter(|&(q, g, _)| a.marked(&ex.states.items[q], &fx.guides.items[g]))
        .collect();
    loop {
        let keep: HashSet<Cfg> = core
            .iter()
            .cloned()
            .filter(|&(qid, gid, ctxid)| {
                let g = fx.guides.items[gid].clone();
                let ctx = fx.ctxs.items[ctxid].clone();
                ex.sources_for(qid, &ctx)
                    .iter()
                    .any(|(n, bid)| bundle_within(a, &ex, &mut fx, &core, &g, n, *bid))
            })
            .collect();
        if keep.len() == core.len() {
            break;
        }
        core = keep;
    }
    // Least fixpoint towards the core.
    let mut acc = core.clone();
    loop {
        let mut changed = false;
        for &(qid, gid, ctxid) in &reach {
            if acc.contains(&(qid, gid, ctxid)) {
                continue;
            }
            let g = fx.guides.items[gid].clone();
            let ctx = fx.ctxs.items[ctxid].clone();
            let ok = ex
                .sources_for(qid, &ctx)
                .iter()
                .any(|(n, bid)| bundle_within(a, &ex, &mut fx, &acc, &g, n, *bid));
            if ok {
                acc.insert((qid, gid, ctxid));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Root tuple search over acc.
    let (g0, _) = fx.guides.intern(a.guide_root());
    let root_ctx = fx.ctx_of(None);
    let trees = a.tree_count();
    let mut per_tree: Vec<Vec<usize>> = Vec::new();
    for t in 0..trees {
        let opts: Vec<usize> = ex
            .root_states
            .iter()
            .cloned()
            .filter(|&q| acc.contains(&(q, g0, root_ctx)) && a.root_ok(t, &ex.states.items[q]))
            .collect();
        if opts.is_empty() {
            return Ok(true);
        }
        per_tree.push(opts);
    }
    let mut tuple = Vec::new();
    fn search<A: ForestAutomaton>(
        a: &A,
        ex: &Explored<A>,
        per_tree: &[Vec<usize>],
        tuple: &mut Vec<usize>,
    ) -> bool {
        if tuple.len() == per_tree.len() {
            let refs: Vec<&A::State> = tuple.iter().map(|&q| &ex.states.items[q]).collect();
            return a.forest_ok(&refs);
        }
        for &q in &per_tree[tuple.len()] {
            tuple.push(q);
            if search(a, ex, per_tree, tuple) {
                return true;
            }
            tuple.pop();
        }
        false
    }
    Ok(!search(a, &ex, &per_tree, &mut tuple))
}

/// Does the bundle decompose into children all inside `set`?
fn bundle_within<A: ForestAutomaton>(
    a: &A,
    ex: &Explored<A>,
    fx: &mut Fixpoint<A>,
    set: &HashSet<Cfg>,
    g: &A::Guide,
    n: &A::NodeLabel,
    bid: usize,
) -> bool {
    let mut memo: HashMap<usize, bool> = HashMap::new();
    fn rec<A: ForestAutomaton>(
        a: &A,
        ex: &Explored<A>,
        fx: &mut Fixpoint<A>,
        set: &HashSet<Cfg>,
        g: &A::Guide,
        n: &A::NodeLabel,
        b: usize,
        memo: &mut HashMap<usize, bool>,
    ) -> bool {
        if let Some(&v) = memo.get(&b) {
            return v;
        }
        let v = if ex.bderiv[b].is_empty() {
            true
        } else {
            ex.bderiv[b].clone().iter().any(|(b2, e, qc)| {
                let gc = a.guide_step(g, n, e);
                let (gcid, _) = fx.guides.intern(gc);
                let cid = fx.ctx_of(Some(e.clone()));
                set.contains(&(*qc, gcid, cid)) && rec(a, ex, fx, set, g, n, *b2, memo)
            })
        };
        memo.insert(b, v);
        v
    }
    rec(a, ex, fx, set, g, n, bid, &mut memo)
}

/// Independent re-validation of an extracted witness: every prototype's
/// transition re-assembles under the automaton, roots are admissible, and
/// every cycle of the prototype graph passes through a marked
/// configuration (so each infinite branch is marked infinitely often).
pub fn verify_witness<A: ForestAutomaton>(
    a: &A,
    w: &RegularWitness<A::NodeLabel, A::EdgeLabel, A::State>,
) -> bool {
    if w.states.len() != w.prototypes.len() {
        return false;
    }
    // Which edge does each prototype hang under (None = root only)?
    let mut parent_edge: Vec<Option<A::EdgeLabel>> = vec![None; w.prototypes.len()];
    for (_, children) in &w.prototypes {
        for (e, c) in children {
            parent_edge[*c] = Some(e.clone());
        }
    }
    // Local consistency: the carried state re-assembles from the
    // children's carried states under the automaton's own transition map.
    for (i, (n, children)) in w.prototypes.iter().enumerate() {
        let mut b = a.empty_bundle();
        for (e, c) in children {
            match a.extend(&b, e, &w.states[*c]) {
                Some(b2) => b = b2,
                None => return false,
            }
        }
        let ctx = if w.roots.contains(&i) { None } else { parent_edge[i].clone() };
        match a.finalize(n, ctx.as_ref(), &b) {
            Some(q) if q == w.states[i] => {}
            _ => return false,
        }
    }
    let states: Vec<Option<A::State>> = w.states.iter().cloned().map(Some).collect();
    // Root admission.
    if w.roots.len() != a.tree_count() {
        return false;
    }
    for (t, &r) in w.roots.iter().enumerate() {
        if !a.root_ok(t, states[r].as_ref().unwrap()) {
            return false;
        }
    }
    let refs: Vec<&A::State> = w.roots.iter().map(|&r| states[r].as_ref().unwrap()).collect();
    if !a.forest_ok(&refs) {
        return false;
    }
    // Büchi recurrence: in the configuration graph (prototype × guide),
    // the subgraph of unmarked configurations must be acyclic — then any
    // infinite branch passes marked configurations infinitely often.
    let mut guides: Interner<A::Guide> = Interner::new();
    let (g0, _) = guides.intern(a.guide_root());
    let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut stack: Vec<(usize, usize)> = w.roots.iter().map(|&r| (r, g0)).collect();
    while let Some((p, gid)) = stack.pop() {
        if !seen.insert((p, gid)) {
            continue;
        }
        let g = guides.items[gid].clone();
        let (n, children) = &w.prototypes[p];
        for (e, c) in children {
            let gc = a.guide_step(&g, n, e);
            let (gcid, _) = guides.intern(gc);
            edges.entry((p, gid)).or_default().push((*c, gcid));
            stack.push((*c, gcid));
        }
    }
    let unmarked: HashSet<(usize, usize)> = seen
        .iter()
        .cloned()
        .filter(|&(p, g)| !a.marked(states[p].as_ref().unwrap(), &guides.items[g]))
        .collect();
    // cycle detection restricted to unmarked configurations
    let mut colour: HashMap<(usize, usize), u8> = HashMap::new();
    fn acyclic(
        v: (usize, usize),
        edges: &HashMap<(usize, usize), Vec<(usize, usize)>>,
        unmarked: &HashSet<(usize, usize)>,
        colour: &mut HashMap<(usize, usize), u8>,
    ) -> bool {
        match colour.get(&v) {
            Some(1) => return false, // grey: cycle
            Some(2) => return true,
            _ => {}
        }
        colour.insert(v, 1);
        if let Some(next) = edges.get(&v) {
            for &w in next {
                if unmarked.contains(&w) && !acyclic(w, edges, unmarked, colour) {
                    return false;
                }
            }
        }
        colour.insert(v, 2);
        true
    }
    for &v in &unmarked {
        if !acyclic(v, &edges, &unmarked, &mut colour) {
            return false;
        }
    }
    true
}



#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// A table-driven automaton over unary trees (every node has at most
    /// one child): states, labels and edges are small integers.
    #[derive(Clone, Debug)]
    struct Unary {
        labels: Vec<u8>,
        edges: Vec<u8>,
        /// (label, parent edge or 255) → leaf state
        leaf: HashMap<(u8, u8), u8>,
        /// (label, parent edge or 255, child edge, child state) → state
        step: HashMap<(u8, u8, u8, u8), u8>,
        marked: BTreeSet<u8>,
        weak: bool,
        roots: BTreeSet<u8>,
        /// allow truncation seeds (all leaf coordinates)
        free: bool,
    }

    impl Unary {
        fn ctx(parent: Option<&u8>) -> u8 {
            parent.cloned().unwrap_or(255)
        }
    }

    impl ForestAutomaton for Unary {
        type State = u8;
        type Bundle = Option<(u8, u8)>;
        type NodeLabel = u8;
        type EdgeLabel = u8;
        type Guide = ();

        fn node_labels(&self) -> Vec<u8> {
            self.labels.clone()
        }
        fn parent_edges(&self, _node: &u8) -> Vec<u8> {
            self.edges.clone()
        }
        fn allow_root(&self, _node: &u8) -> bool {
            true
        }
        fn empty_bundle(&self) -> Self::Bundle {
            None
        }
        fn extend(&self, b: &Self::Bundle, edge: &u8, child: &u8) -> Option<Self::Bundle> {
            if b.is_some() {
                return None; // unary trees
            }
            Some(Some((*edge, *child)))
        }
        fn finalize(&self, node: &u8, parent: Option<&u8>, b: &Self::Bundle) -> Option<u8> {
            match b {
                None => self.leaf.get(&(*node, Self::ctx(parent))).cloned(),
                Some((e, q)) => self.step.get(&(*node, Self::ctx(parent), *e, *q)).cloned(),
            }
        }
        fn child_edges(&self, _q: &u8) -> Vec<u8> {
            self.edges.clone()
        }
        fn free_leaf(&self, node: &u8, parent: Option<&u8>) -> Option<u8> {
            if self.free {
                // every state is a possible truncation coordinate
                let _ = (node, parent);
                None // seeds provided through leaf entries instead
            } else {
                self.finalize(node, parent, &None)
            }
        }
        fn guide_root(&self) {}
        fn guide_step(&self, _g: &(), _n: &u8, _e: &u8) {}
        fn marked(&self, q: &u8, _g: &()) -> bool {
            self.marked.contains(q)
        }
        fn weak(&self) -> bool {
            self.weak
        }
        fn tree_count(&self) -> usize {
            1
        }
        fn root_ok(&self, _tree: usize, q: &u8) -> bool {
            self.roots.contains(q)
        }
    }

    fn universal() -> Unary {
        // one state 0, marked, accepts any unary tree over label 0 / edge 0
        Unary {
            labels: vec![0],
            edges: vec![0],
            leaf: HashMap::from([((0, 255), 0), ((0, 0), 0)]),
            step: HashMap::from([((0, 255, 0, 0), 0), ((0, 0, 0, 0), 0)]),
            marked: BTreeSet::from([0]),
            weak: true,
            roots: BTreeSet::from([0]),
            free: false,
        }
    }

    #[test]
    fn no_initial_states_means_empty() {
        let mut a = universal();
        a.roots.clear();
        let r = is_empty(&a, &Limits::default()).unwrap();
        assert!(r.empty);
    }

    #[test]
    fn marked_self_loop_is_nonempty() {
        // only infinite unary chains are accepted: no leaf transitions
        let mut a = universal();
        a.leaf.clear();
        // free-leaf seeds stand in for truncated subtrees
        a.leaf.insert((0, 255), 0);
        a.leaf.insert((0, 0), 0);
        let with_leaves = is_empty(&a, &Limits::default()).unwrap();
        assert!(!with_leaves.empty);
        // now make the leaf entries truncation-only by removing genuine
        // leaves: model this as an automaton whose finalize rejects empty
        // bundles but whose free_leaf still yields 0.
        #[derive(Clone, Debug)]
        struct InfiniteOnly(Unary);
        impl ForestAutomaton for InfiniteOnly {
            type State = u8;
            type Bundle = Option<(u8, u8)>;
            type NodeLabel = u8;
            type EdgeLabel = u8;
            type Guide = ();
            fn node_labels(&self) -> Vec<u8> {
                self.0.node_labels()
            }
            fn parent_edges(&self, n: &u8) -> Vec<u8> {
                self.0.parent_edges(n)
            }
            fn allow_root(&self, n: &u8) -> bool {
                self.0.allow_root(n)
            }
            fn empty_bundle(&self) -> Self::Bundle {
                None
            }
            fn extend(&self, b: &Self::Bundle, e: &u8, q: &u8) -> Option<Self::Bundle> {
                self.0.extend(b, e, q)
            }
            fn finalize(&self, n: &u8, p: Option<&u8>, b: &Self::Bundle) -> Option<u8> {
                match b {
                    None => None, // no finite branches
                    _ => self.0.finalize(n, p, b),
                }
            }
            fn child_edges(&self, q: &u8) -> Vec<u8> {
                self.0.child_edges(q)
            }
            fn free_leaf(&self, _n: &u8, _p: Option<&u8>) -> Option<u8> {
                Some(0)
            }
            fn guide_root(&self) {}
            fn guide_step(&self, _g: &(), _n: &u8, _e: &u8) {}
            fn marked(&self, q: &u8, g: &()) -> bool {
                self.0.marked(q, g)
            }
            fn weak(&self) -> bool {
                true
            }
            fn tree_count(&self) -> usize {
                1
            }
            fn root_ok(&self, t: usize, q: &u8) -> bool {
                self.0.root_ok(t, q)
            }
        }
        let inf = InfiniteOnly(a.clone());
        let r = is_empty(&inf, &Limits::default()).unwrap();
        assert!(!r.empty, "the infinite marked chain is accepting");
        // with the state unmarked, the Büchi condition rejects the chain
        let mut un = inf;
        un.0.marked.clear();
        let r = is_empty(&un, &Limits::default()).unwrap();
        assert!(r.empty, "an unmarked infinite chain must be rejected");
    }

    #[test]
    fn marked_sink_behind_forbidden_label_is_unreachable() {
        // states: 0 (unmarked, loops), 1 (marked sink) reachable only via
        // label 1, which the alphabet does not contain.
        let a = Unary {
            labels: vec![0],
            edges: vec![0],
            leaf: HashMap::from([((1, 255), 1), ((1, 0), 1)]),
            step: HashMap::from([((0, 255, 0, 0), 0), ((0, 0, 0, 0), 0), ((0, 255, 0, 1), 0)]),
            marked: BTreeSet::from([1]),
            weak: true,
            roots: BTreeSet::from([0, 1]),
            free: false,
        };
        let r = is_empty(&a, &Limits::default()).unwrap();
        assert!(r.empty);
        // cross-check by bounded enumeration: every unary forest over
        // label 0 of depth ≤ 4 indeed has no accepting run (finite runs
        // need a leaf transition, which only label 1 provides).
        for depth in 0..4 {
            let mut ok = false;
            // a chain of `depth` nodes labelled 0: find any run
            // bottom-up: leaf state for label 0 does not exist
            let mut states: Vec<u8> = vec![]; // states possible at the leaf
            for s in 0..2u8 {
                if a.leaf.contains_key(&(0, if depth == 0 { 255 } else { 0 })) && s == 0 {
                    states.push(s);
                }
            }
            if !states.is_empty() {
                ok = true;
            }
            assert!(!ok, "no run at depth {depth}");
        }
    }

    #[test]
    fn product_with_universal_preserves_language() {
        let u = universal();
        let mut b = universal();
        b.marked.clear(); // b rejects the infinite chain but keeps leaves
        let p = Product::new(u.clone(), b.clone());
        let pe = is_empty(&p, &Limits::default()).unwrap();
        let be = is_empty(&b, &Limits::default()).unwrap();
        assert_eq!(pe.empty, be.empty);
        // and with a genuinely empty right side
        let mut c = universal();
        c.roots.clear();
        let pc = Product::new(u, c);
        assert!(is_empty(&pc, &Limits::default()).unwrap().empty);
    }

    #[test]
    fn product_of_trivial_acceptance_automata_is_weak() {
        let u = universal();
        let v = universal();
        let p = Product::new(u, v);
        assert!(p.weak());
    }

    fn random_automaton(rng: &mut ChaCha8Rng, force_weak: bool) -> Unary {
        let states: Vec<u8> = (0..rng.gen_range(1..=3)).collect();
        let labels: Vec<u8> = (0..rng.gen_range(1..=2)).collect();
        let edges: Vec<u8> = vec![0];
        let mut marked = BTreeSet::new();
        for &s in &states {
            if rng.gen_bool(0.5) {
                marked.insert(s);
            }
        }
        let mut leaf = HashMap::new();
        let mut step = HashMap::new();
        for &l in &labels {
            for ctx in [255u8, 0] {
                if rng.gen_bool(0.5) {
                    leaf.insert((l, ctx), *states.choose(rng).unwrap());
                }
                for &q in &states {
                    if rng.gen_bool(0.6) {
                        let to = *states.choose(rng).unwrap();
                        if force_weak && marked.contains(&to) && !marked.contains(&q) {
                            continue; // keep the weak promise
                        }
                        step.insert((l, ctx, 0, q), to);
                    }
                }
            }
        }
        let mut roots = BTreeSet::new();
        for &s in &states {
            if rng.gen_bool(0.7) {
                roots.insert(s);
            }
        }
        Unary { labels, edges, leaf, step, marked, weak: force_weak, roots, free: false }
    }

    #[test]
    fn product_emptiness_follows_factor_emptiness() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut interesting = 0;
        for _ in 0..120 {
            let mut a = random_automaton(&mut rng, true);
            a.marked = a.step.values().cloned().chain(a.leaf.values().cloned()).collect();
            a.weak = true; // effectively trivial acceptance
            let b = random_automaton(&mut rng, false);
            let ea = is_empty(&a, &Limits::default()).unwrap().empty;
            let eb = is_empty(&b, &Limits::default()).unwrap().empty;
            let p = Product::new(a, b);
            let ep = is_empty(&p, &Limits::default()).unwrap().empty;
            if ea || eb {
                assert!(ep, "product of an empty factor must be empty");
                interesting += 1;
            }
        }
        assert!(interesting > 5);
    }

    #[test]
    fn weak_emptiness_crosscheck() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..150 {
            let a = random_automaton(&mut rng, true);
            let full = is_empty(&a, &Limits::default()).unwrap().empty;
            let weak = is_empty_weak(&a, &Limits::default()).unwrap();
            assert_eq!(full, weak, "disagreement on weak automaton #{k}: {a:?}");
        }
    }

    #[test]
    fn witnesses_revalidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut produced = 0;
        for _ in 0..150 {
            let force_weak = rng.gen_bool(0.5);
            let a = random_automaton(&mut rng, force_weak);
            let r = is_empty(&a, &Limits::default()).unwrap();
            if let Some(w) = r.witness {
                produced += 1;
                assert!(verify_witness(&a, &w), "witness failed re-validation: {a:?} {w:?}");
            }
        }
        assert!(produced > 20, "suite produced too few witnesses ({produced})");
    }

    #[test]
    fn two_prototype_witness_for_layered_language() {
        // label 0 must sit at the root, label 1 below, leaves at label 1
        let a = Unary {
            labels: vec![0, 1],
            edges: vec![0],
            leaf: HashMap::from([((1, 0), 1)]),
            step: HashMap::from([((0, 255, 0, 1), 0), ((1, 0, 0, 1), 1)]),
            marked: BTreeSet::from([0, 1]),
            weak: true,
            roots: BTreeSet::from([0]),
            free: false,
        };
        let r = is_empty(&a, &Limits::default()).unwrap();
        assert!(!r.empty);
        let w = r.witness.unwrap();
        assert!(verify_witness(&a, &w));
        assert_eq!(w.prototype_count(), 2);
        assert_eq!(w.prototypes[w.roots[0]].0, 0);
    }
}
