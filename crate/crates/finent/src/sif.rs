//! The decision procedure for transitive + inverse + functional roles
//! (no nominals): reasoning about the transitive and the non-transitive
//! side of a model is separated along a tree partition whose bags
//! alternate between the two kinds of roles, and the existence of such a
//! counter-model is decided by eliminating unary types against
//! per-side finite-model tests — the transitive side through the forest
//! procedure, the other side through a bounded exhaustive search behind
//! a pluggable interface.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::interp::{check_model, transitive_closure, Interpretation};
use crate::kb::{ConceptId, KnowledgeBase, NormalCi, RoleId, UnaryType};
use crate::oracle::{self, SearchBudget, SearchOutcome};
use crate::query::{eval_ucq, match_cq, Cq, Ucq};
use crate::soi::{decide_soi, SoiOptions, SoiOutcome};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Mu {
    Tr,
    Nt,
}

impl Mu {
    pub fn other(self) -> Mu {
        match self {
            Mu::Tr => Mu::Nt,
            Mu::Nt => Mu::Tr,
        }
    }
}

#[derive(Error, Debug)]
pub enum SifError {
    #[error(transparent)]
    Kb(#[from] crate::kb::KbError),
    #[error(transparent)]
    Soi(#[from] crate::soi::SoiError),
    #[error("query has a disconnected conjunct; decompose it first")]
    Disconnected,
    #[error("the ABox split enumeration exceeded the cap of {0} choices")]
    SplitCap(usize),
}

/// A conjunctive query together with its alternating bag structure.
#[derive(Clone, Debug)]
pub struct TreeQuery {
    pub cq: Cq,
    pub bags: Vec<Bag>,
    /// Bag-tree adjacency (undirected; the structure is a tree).
    pub adj: Vec<Vec<usize>>,
    /// Per variable: its transitive-side and non-transitive-side bag.
    pub bag_of: Vec<[usize; 2]>,
}

#[derive(Clone, Debug)]
pub struct Bag {
    pub kind: Mu,
    pub vars: BTreeSet<u32>,
}

/// Computes the alternating bag structure of a connected conjunct, if it
/// admits one: bags are the connected components of the per-kind atom
/// graphs, every variable lies in exactly one bag of each kind, adjacent
/// bags share exactly one variable, and the sharing graph is a tree.
pub fn bag_structure(cq: &Cq, kb: &KnowledgeBase) -> Option<TreeQuery> {
    let n = cq.vars as usize;
    if n == 0 {
        return None;
    }
    let mut bags: Vec<Bag> = Vec::new();
    let mut bag_of: Vec<[usize; 2]> = vec![[usize::MAX; 2]; n];
    for (slot, kind) in [(0, Mu::Tr), (1, Mu::Nt)] {
        // union-find over variables through atoms of this kind
        let mut parent: Vec<u32> = (0..cq.vars).collect();
        fn find(parent: &mut Vec<u32>, x: u32) -> u32 {
            if parent[x as usize] != x {
                let r = find(parent, parent[x as usize]);
                parent[x as usize] = r;
                r
            } else {
                x
            }
        }
        for &(r, x, y) in &cq.role_atoms {
            let tr = kb.sig.is_transitive(RoleId::named(r));
            if (kind == Mu::Tr) == tr {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a as usize] = b;
            }
        }
        let mut comp: BTreeMap<u32, usize> = BTreeMap::new();
        for x in 0..cq.vars {
            let root = find(&mut parent, x);
            let idx = *comp.entry(root).or_insert_with(|| {
                bags.push(Bag { kind, vars: BTreeSet::new() });
                bags.len() - 1
            });
            bags[idx].vars.insert(x);
            bag_of[x as usize][slot] = idx;
        }
    }
    // adjacency and the single-sharing condition
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); bags.len()];
    for x in 0..n {
        let [t, ntb] = bag_of[x];
        adj[t].insert(ntb);
        adj[ntb].insert(t);
    }
    let mut edge_count = 0;
    for (i, next) in adj.iter().enumerate() {
        for &j in next {
            if j > i {
                edge_count += 1;
                let shared: Vec<u32> =
                    bags[i].vars.intersection(&bags[j].vars).cloned().collect();
                if shared.len() != 1 {
                    return None;
                }
            }
        }
    }
    // tree = connected with |V| - 1 edges; connectedness follows from the
    // conjunct being connected
    if edge_count + 1 != bags.len() {
        return None;
    }
    Some(TreeQuery {
        cq: cq.clone(),
        adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        bags,
        bag_of,
    })
}

/// All non-isomorphic homomorphic images of the conjuncts that admit a
/// bag structure. Conjuncts must be connected.
pub fn treeify(q: &Ucq, kb: &KnowledgeBase) -> Result<Vec<TreeQuery>, SifError> {
    let mut seen: BTreeSet<Cq> = BTreeSet::new();
    let mut out = Vec::new();
    for cq in &q.cqs {
        if !cq.is_connected() {
            return Err(SifError::Disconnected);
        }
        for classes in set_partitions(cq.vars) {
            let image = cq.quotient(&classes);
            let canon = image.canonical();
            if !seen.insert(canon.clone()) {
                continue;
            }
            if let Some(tq) = bag_structure(&canon, kb) {
                out.push(tq);
            }
        }
    }
    Ok(out)
}

/// All partitions of `0..n` as class assignments (canonical first-seen
/// numbering).
fn set_partitions(n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    fn rec(n: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n as usize {
            out.push(cur.clone());
            return;
        }
        let used = cur.iter().cloned().max().map_or(0, |m| m + 1);
        for c in 0..=used {
            cur.push(c);
            rec(n, cur, out);
            cur.pop();
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

/// `Q_{μ,x}`: the subquery over all bags reachable from the μ-bag of `x`
/// without passing through the other bag of `x`. Returns the subquery
/// and the position of `x` in it.
pub fn subquery(tq: &TreeQuery, mu: Mu, x: u32) -> (Cq, u32) {
    let slot = if mu == Mu::Tr { 0 } else { 1 };
    let start = tq.bag_of[x as usize][slot];
    let blocked = tq.bag_of[x as usize][1 - slot];
    let mut reach = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(b) = queue.pop_front() {
        for &c in &tq.adj[b] {
            if c != blocked && reach.insert(c) {
                queue.push_back(c);
            }
        }
    }
    let vars: BTreeSet<u32> =
        reach.iter().flat_map(|&b| tq.bags[b].vars.iter().cloned()).collect();
    let restricted = tq.cq.restrict(&vars);
    let pos = vars.iter().position(|&v| v == x).unwrap() as u32;
    (restricted, pos)
}

/// `K_Q`: the KB extended with one fresh concept pair per query variable
/// and side. Returns the extended KB and the name table.
pub fn extend_kb(
    kb: &KnowledgeBase,
    queries: &[TreeQuery],
) -> (KnowledgeBase, BTreeMap<(usize, Mu, u32), ConceptId>) {
    let mut kq = kb.clone();
    let mut names = BTreeMap::new();
    for (i, tq) in queries.iter().enumerate() {
        for x in 0..tq.cq.vars {
            for mu in [Mu::Tr, Mu::Nt] {
                let c = kq.sig.fresh_concept("_S");
                names.insert((i, mu, x), c);
            }
        }
    }
    (kq, names)
}

/// A specialisation of a bag: the bag's atoms plus one literal
/// `A_{μ,x}(x)` or its complement per variable and side.
#[derive(Clone, Debug)]
pub struct Specialisation {
    pub cq: Cq,
    pub consistent: bool,
}

/// All `4^|vars|` specialisations of one bag, with the consistency flag:
/// a specialisation of a μ-bag is consistent when for every `x`, it
/// asserts `A_{μ,x}` exactly if it asserts `A_{ν,y}` for every other
/// variable `y` of the bag (ν the opposite side).
pub fn specialisations(
    tq: &TreeQuery,
    bag_idx: usize,
    query_idx: usize,
    names: &BTreeMap<(usize, Mu, u32), ConceptId>,
) -> Vec<Specialisation> {
    let bag = &tq.bags[bag_idx];
    let vars: Vec<u32> = bag.vars.iter().cloned().collect();
    let mu = bag.kind;
    // the bag as a query: its role atoms plus the conjunct's concept
    // atoms on its variables
    let mut base = Cq { vars: tq.cq.vars, concept_atoms: vec![], role_atoms: vec![] };
    for &(c, x) in &tq.cq.concept_atoms {
        if bag.vars.contains(&x) {
            base.concept_atoms.push((c, x));
        }
    }
    for &(r, x, y) in &tq.cq.role_atoms {
        if tq.bag_of[x as usize][if mu == Mu::Tr { 0 } else { 1 }] == bag_idx
            && tq.bag_of[y as usize][if mu == Mu::Tr { 0 } else { 1 }] == bag_idx
        {
            base.role_atoms.push((r, x, y));
        }
    }
    let keep: BTreeSet<u32> = bag.vars.clone();
    let mut out = Vec::new();
    for mask in 0u32..1 << (2 * vars.len()) {
        let mut cq = base.clone();
        let positive = |k: usize| (mask >> k) & 1 == 1;
        for (k, &x) in vars.iter().enumerate() {
            for (slot, m) in [(2 * k, Mu::Tr), (2 * k + 1, Mu::Nt)] {
                let name = names[&(query_idx, m, x)];
                cq.concept_atoms.push((if positive(slot) { name } else { name.complement() }, x));
            }
        }
        // consistency per definition
        let has = |x: u32, m: Mu| {
            let k = vars.iter().position(|&v| v == x).unwrap();
            positive(if m == Mu::Tr { 2 * k } else { 2 * k + 1 })
        };
        let nu = mu.other();
        let consistent = vars.iter().all(|&x| {
            let lhs = has(x, mu);
            let rhs = vars.iter().filter(|&&y| y != x).all(|&y| has(y, nu));
            lhs == rhs
        });
        let mut cq = cq.restrict(&keep);
        cq.concept_atoms.sort_unstable();
        cq.concept_atoms.dedup();
        out.push(Specialisation { cq, consistent });
    }
    out
}

/// The union of all inconsistent specialisations over all bags.
pub fn inconsistent_spec_query(
    queries: &[TreeQuery],
    names: &BTreeMap<(usize, Mu, u32), ConceptId>,
) -> Ucq {
    let mut out = Ucq::default();
    for (qi, tq) in queries.iter().enumerate() {
        for bi in 0..tq.bags.len() {
            for sp in specialisations(tq, bi, qi, names) {
                if !sp.consistent {
                    out.cqs.push(sp.cq);
                }
            }
        }
    }
    out
}

/// `K_Q` restricted to one side: drops restrictions, declarations and
/// role assertions of the other side's roles.
pub fn restrict_side(kq: &KnowledgeBase, mu: Mu, keep_abox: bool) -> KnowledgeBase {
    let mut out = kq.clone();
    let is_side = |r: RoleId, sig: &crate::kb::Signature| (sig.is_transitive(r)) == (mu == Mu::Tr);
    out.tbox = kq
        .tbox
        .iter()
        .filter(|ci| match ci {
            NormalCi::ValueRestr(_, r, _) | NormalCi::ExistRestr(_, r, _) => {
                is_side(*r, &kq.sig)
            }
            _ => true,
        })
        .cloned()
        .collect();
    for base in 0..out.sig.role_count() as u32 {
        let tr = out.sig.role_decl(base).transitive;
        if (mu == Mu::Tr) != tr {
            // other side: strip everything
            let d = RoleId::named(base);
            let _ = d;
            if mu == Mu::Tr {
                // dropping non-transitive roles drops their functionality
                out.sig.role_decl_mut(base).functional = [false; 2];
            }
        }
        if mu == Mu::Nt && tr {
            out.sig.role_decl_mut(base).transitive = false;
            // transitive roles disappear from this side entirely; their
            // CIs are already gone
        }
    }
    if keep_abox {
        out.abox_roles = kq
            .abox_roles
            .iter()
            .filter(|(base, _, _)| {
                (kq.sig.role_decl(*base).transitive) == (mu == Mu::Tr)
            })
            .cloned()
            .collect();
    } else {
        out.abox_concepts.clear();
        out.abox_roles.clear();
    }
    out
}

/// Answer of a bounded finite-model test.
#[derive(Clone, Debug)]
pub enum OracleAnswer {
    Model(Interpretation),
    /// No model up to the bound; not a certificate of non-existence.
    NoneUpTo(usize),
}

/// The pluggable non-transitive-side test: a finite model of the TBox
/// realising `realize` (if given), realising only `types`, and matching
/// no conjunct of `avoid`. The default is the exhaustive search.
pub trait NtOracle {
    fn finite_model(
        &self,
        kb: &KnowledgeBase,
        types: &BTreeSet<UnaryType>,
        avoid: &Ucq,
    ) -> OracleAnswer;
}

pub struct BruteForceNt {
    pub max_size: usize,
}

impl NtOracle for BruteForceNt {
    fn finite_model(
        &self,
        kb: &KnowledgeBase,
        types: &BTreeSet<UnaryType>,
        avoid: &Ucq,
    ) -> OracleAnswer {
        let budget = SearchBudget::sized(self.max_size).with_types(types.clone());
        match oracle::find_countermodel(kb, avoid, &budget) {
            SearchOutcome::CounterModelFound(m) => OracleAnswer::Model(m),
            SearchOutcome::NoCounterModelUpTo(n) => OracleAnswer::NoneUpTo(n),
            SearchOutcome::Inconclusive { complete_up_to } => {
                OracleAnswer::NoneUpTo(complete_up_to.unwrap_or(0))
            }
        }
    }
}

/// A counter-witness: the surviving type set plus the models that
/// certify it, ready for assembling a tree-partition prefix.
pub struct SifWitness {
    pub types: BTreeSet<UnaryType>,
    pub mu0: Mu,
    pub root: Interpretation,
    pub bag_models: BTreeMap<(Mu, UnaryType), Interpretation>,
}

#[derive(Debug)]
pub enum SifOutcome {
    NotEntailed(Box<SifWitness>),
    Entailed,
    /// Entailed modulo the bounded non-transitive-side tests: no
    /// counter-witness survives, but some elimination relied on a
    /// bounded "no model" answer.
    EntailedUpTo(usize),
}

impl SifOutcome {
    pub fn entailed(&self) -> bool {
        !matches!(self, SifOutcome::NotEntailed(_))
    }
}

pub struct SifOptions {
    pub oracle_bound: usize,
    /// Cap on the ABox-split choice enumeration.
    pub split_cap: usize,
    pub soi: SoiOptions,
}

impl Default for SifOptions {
    fn default() -> Self {
        SifOptions { oracle_bound: 4, split_cap: 4096, soi: SoiOptions::default() }
    }
}

/// One side's model-existence test, three-valued through `exact`.
#[allow(clippy::too_many_arguments)]
fn side_test(
    kq: &KnowledgeBase,
    mu: Mu,
    realize: Option<UnaryType>,
    types: &BTreeSet<UnaryType>,
    avoid: &Ucq,
    opts: &SifOptions,
    want_model: bool,
    exact: &mut bool,
) -> Result<Option<Interpretation>, SifError> {
    let mut side = restrict_side(kq, mu, realize.is_none());
    if let Some(tau) = realize {
        side.abox_concepts.clear();
        side.abox_roles.clear();
        let b = side.sig.fresh_individual("_b");
        for c in tau.members(kq.sig.pair_count()) {
            side.abox_concepts.insert((b, c));
        }
    }
    match mu {
        Mu::Tr => {
            let soi_opts = SoiOptions {
                type_restriction: Some(types.clone()),
                synthesize: want_model,
                safety: true,
                functional: false,
                ..opts.soi.clone()
            };
            match decide_soi(&side, avoid, &soi_opts)? {
                SoiOutcome::Entailed => Ok(None),
                SoiOutcome::NotEntailed { countermodel, .. } => {
                    Ok(Some(countermodel.unwrap_or_default()))
                }
            }
        }
        Mu::Nt => {
            let oracle = BruteForceNt { max_size: opts.oracle_bound.max(side.sig.individual_count()) };
            match oracle.finite_model(&side, types, avoid) {
                OracleAnswer::Model(m) => Ok(Some(m)),
                OracleAnswer::NoneUpTo(_) => {
                    *exact = false;
                    Ok(None)
                }
            }
        }
    }
}

/// Core procedure under both provisos: single-kind ABox, connected
/// conjuncts. Runs type elimination to the greatest fixpoint and checks
/// the root condition.
pub fn counter_witness(
    kb: &KnowledgeBase,
    q: &Ucq,
    opts: &SifOptions,
    elimination_order: Option<&[UnaryType]>,
) -> Result<(Option<Box<SifWitness>>, bool), SifError> {
    let queries = treeify(q, kb)?;
    let (kq, names) = extend_kb(kb, &queries);
    let qprime = inconsistent_spec_query(&queries, &names);
    let mut exact = true;

    // T₀: one side negative per variable, and quantifier-free viability.
    let global_vars: Vec<(usize, u32)> = queries
        .iter()
        .enumerate()
        .flat_map(|(i, tq)| (0..tq.cq.vars).map(move |x| (i, x)))
        .collect();
    let mut t: BTreeSet<UnaryType> = kq
        .unary_types()
        .into_iter()
        .filter(|ty| {
            global_vars.iter().all(|&(i, x)| {
                !ty.contains(names[&(i, Mu::Tr, x)]) || !ty.contains(names[&(i, Mu::Nt, x)])
            })
        })
        .filter(|&ty| {
            kq.tbox.iter().all(|ci| match ci {
                NormalCi::Subsume(conj, disj) => kq.type_satisfies_qf(ty, conj, disj),
                _ => true,
            })
        })
        .collect();

    // Greatest fixpoint of the elimination operator.
    loop {
        let order: Vec<UnaryType> = match elimination_order {
            Some(o) => o.iter().filter(|ty| t.contains(ty)).cloned().collect(),
            None => t.iter().cloned().collect(),
        };
        let mut eliminated = false;
        for tau in order {
            if !t.contains(&tau) {
                continue;
            }
            let mut stays = true;
            for mu in [Mu::Tr, Mu::Nt] {
                if side_test(&kq, mu, Some(tau), &t, &qprime, opts, false, &mut exact)?.is_none() {
                    stays = false;
                    break;
                }
            }
            if !stays {
                t.remove(&tau);
                eliminated = true;
                if elimination_order.is_some() {
                    break; // eager: restart the scan on the shrunk set
                }
            }
        }
        if !eliminated {
            break;
        }
    }

    // Root condition over the real ABox.
    let mu0 = abox_kind(kb).unwrap_or(Mu::Tr);
    let root = side_test(&kq, mu0, None, &t, &qprime, opts, true, &mut exact)?;
    match root {
        None => Ok((None, exact)),
        Some(root) => {
            // collect certifying bag models for the surviving types
            let mut bag_models = BTreeMap::new();
            for &tau in &t {
                for mu in [Mu::Tr, Mu::Nt] {
                    if let Some(m) =
                        side_test(&kq, mu, Some(tau), &t, &qprime, opts, true, &mut exact)?
                    {
                        bag_models.insert((mu, tau), m);
                    }
                }
            }
            Ok((Some(Box::new(SifWitness { types: t, mu0, root, bag_models })), exact))
        }
    }
}

/// The kind of roles the ABox uses, when single-kinded.
pub fn abox_kind(kb: &KnowledgeBase) -> Option<Mu> {
    let kinds: BTreeSet<Mu> = kb
        .abox_roles
        .iter()
        .map(|(base, _, _)| if kb.sig.role_decl(*base).transitive { Mu::Tr } else { Mu::Nt })
        .collect();
    match kinds.len() {
        0 => None,
        1 => kinds.into_iter().next(),
        _ => Some(Mu::Tr), // mixed; caller must split first
    }
}

fn abox_is_mixed(kb: &KnowledgeBase) -> bool {
    let kinds: BTreeSet<bool> = kb
        .abox_roles
        .iter()
        .map(|(base, _, _)| kb.sig.role_decl(*base).transitive)
        .collect();
    kinds.len() > 1
}

/// Decides `K ⊨fin Q` for the nominal-free fragment. Negative verdicts
/// are exact and certified; positive verdicts are exact unless a bounded
/// oracle answer was load-bearing, in which case they are qualified.
pub fn decide_sif(kb: &KnowledgeBase, q: &Ucq, opts: &SifOptions) -> Result<SifOutcome, SifError> {
    // Individuals get fully specified types, as for the forest procedure.
    let completions = complete_individuals(kb);
    let mut exact = true;
    for completion in &completions {
        let outcome = decide_split(&completion, q, opts)?;
        match outcome {
            SifOutcome::NotEntailed(w) => return Ok(SifOutcome::NotEntailed(w)),
            SifOutcome::EntailedUpTo(_) => exact = false,
            SifOutcome::Entailed => {}
        }
    }
    Ok(if exact { SifOutcome::Entailed } else { SifOutcome::EntailedUpTo(opts.oracle_bound) })
}

/// Handles the mixed-ABox reduction, then the connectedness reduction.
fn decide_split(kb: &KnowledgeBase, q: &Ucq, opts: &SifOptions) -> Result<SifOutcome, SifError> {
    if !abox_is_mixed(kb) {
        return decide_connected(kb, q, opts);
    }
    let instances = split_abox(kb, q, opts.split_cap)?;
    let mut exact = true;
    for (k1, q1, k2, q2) in instances {
        let r1 = decide_connected(&k1, &q1, opts)?;
        if r1.entailed() {
            if matches!(r1, SifOutcome::EntailedUpTo(_)) {
                exact = false;
            }
            continue;
        }
        let r2 = decide_connected(&k2, &q2, opts)?;
        match r2 {
            SifOutcome::NotEntailed(w) => return Ok(SifOutcome::NotEntailed(w)),
            SifOutcome::EntailedUpTo(_) => exact = false,
            SifOutcome::Entailed => {}
        }
    }
    Ok(if exact { SifOutcome::Entailed } else { SifOutcome::EntailedUpTo(opts.oracle_bound) })
}

/// Handles disconnected conjuncts: the query is not finitely entailed
/// iff some choice of one connected component per conjunct yields a
/// non-entailed union.
fn decide_connected(kb: &KnowledgeBase, q: &Ucq, opts: &SifOptions) -> Result<SifOutcome, SifError> {
    let decomposed = connected_decomposition(q);
    let mut exact = true;
    for choice in decomposed {
        match counter_witness(kb, &choice, opts, None)? {
            (Some(w), _) => return Ok(SifOutcome::NotEntailed(w)),
            (None, e) => exact &= e,
        }
    }
    Ok(if exact { SifOutcome::Entailed } else { SifOutcome::EntailedUpTo(opts.oracle_bound) })
}

/// All ways of picking one connected component from each conjunct.
pub fn connected_decomposition(q: &Ucq) -> Vec<Ucq> {
    let mut choices: Vec<Vec<Cq>> = Vec::new();
    for cq in &q.cqs {
        let comps = cq.components();
        choices.push(comps.into_iter().map(|vars| cq.restrict(&vars)).collect());
    }
    let mut out = vec![Ucq::default()];
    for per_cq in choices {
        let mut next = Vec::new();
        for partial in &out {
            for c in &per_cq {
                let mut u = partial.clone();
                u.cqs.push(c.clone());
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// The mixed-ABox reduction: split the ABox into its transitive-role and
/// non-transitive-role parts and enumerate, for every way of anchoring
/// and splitting each conjunct, which side refutes its half. Each choice
/// yields a pair of single-kind instances whose joint refutation
/// refutes the original.
pub fn split_abox(
    kb: &KnowledgeBase,
    q: &Ucq,
    cap: usize,
) -> Result<Vec<(KnowledgeBase, Ucq, KnowledgeBase, Ucq)>, SifError> {
    let mut k1 = kb.clone(); // non-transitive assertions only
    k1.abox_roles.retain(|(base, _, _)| !kb.sig.role_decl(*base).transitive);
    let mut k2 = kb.clone(); // transitive assertions only
    k2.abox_roles.retain(|(base, _, _)| kb.sig.role_decl(*base).transitive);

    // tuples (conjunct, V, h, partition)
    struct Tuple {
        p1: Cq,
        p2: Cq,
    }
    let inds: Vec<crate::kb::Ind> = kb.sig.individuals().collect();
    let mut tuples: Vec<Tuple> = Vec::new();
    for cq in &q.cqs {
        let vars: Vec<u32> = (0..cq.vars).collect();
        for vmask in 0u32..1 << vars.len() {
            let v: Vec<u32> = vars.iter().filter(|&&x| (vmask >> x) & 1 == 1).cloned().collect();
            let assignments = cartesian(inds.len(), v.len());
            for assign in assignments {
                // partition atoms into P1/P2 with shared vars ⊆ V
                let atoms = cq.size();
                for amask in 0u32..1 << atoms {
                    let (p1, p2) = split_atoms(cq, amask);
                    let shared: BTreeSet<u32> = p1.1.intersection(&p2.1).cloned().collect();
                    if !shared.iter().all(|x| v.contains(x)) {
                        continue;
                    }
                    // constants: replace anchored variables with fresh
                    // marker concepts asserted at the individual
                    let h: BTreeMap<u32, crate::kb::Ind> =
                        v.iter().cloned().zip(assign.iter().map(|&k| inds[k])).collect();
                    tuples.push(Tuple {
                        p1: anchor(&p1.0, &h, &mut k1),
                        p2: anchor(&p2.0, &h, &mut k2),
                    });
                    if tuples.len() > 24 {
                        return Err(SifError::SplitCap(cap));
                    }
                }
            }
        }
    }
    // choice functions
    let n = tuples.len() as u32;
    if (1u64 << n) > cap as u64 {
        return Err(SifError::SplitCap(cap));
    }
    let mut out = Vec::new();
    for mask in 0u64..1 << n {
        let mut q1 = Ucq::default();
        let mut q2 = Ucq::default();
        for (k, t) in tuples.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                q1.cqs.push(t.p1.clone());
            } else {
                q2.cqs.push(t.p2.clone());
            }
        }
        out.push((k1.clone(), q1, k2.clone(), q2));
    }
    Ok(out)
}

fn cartesian(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for v in &out {
            for k in 0..base {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn split_atoms(cq: &Cq, mask: u32) -> ((Cq, BTreeSet<u32>), (Cq, BTreeSet<u32>)) {
    let mut parts = [Cq { vars: cq.vars, concept_atoms: vec![], role_atoms: vec![] }, Cq {
        vars: cq.vars,
        concept_atoms: vec![],
        role_atoms: vec![],
    }];
    let mut k = 0;
    for &(c, x) in &cq.concept_atoms {
        parts[((mask >> k) & 1) as usize].concept_atoms.push((c, x));
        k += 1;
    }
    for &(r, x, y) in &cq.role_atoms {
        parts[((mask >> k) & 1) as usize].role_atoms.push((r, x, y));
        k += 1;
    }
    let vars = |p: &Cq| -> BTreeSet<u32> {
        p.concept_atoms
            .iter()
            .map(|&(_, x)| x)
            .chain(p.role_atoms.iter().flat_map(|&(_, x, y)| [x, y]))
            .collect()
    };
    let [p1, p2] = parts;
    let v1 = vars(&p1);
    let v2 = vars(&p2);
    ((p1, v1), (p2, v2))
}

/// Replaces anchored variables with fresh marker concepts asserted just
/// for the anchor individual, then restricts to used variables.
fn anchor(p: &Cq, h: &BTreeMap<u32, crate::kb::Ind>, kb: &mut KnowledgeBase) -> Cq {
    let mut cq = p.clone();
    for (&x, &a) in h {
        let marker = kb.sig.fresh_concept("_C");
        kb.abox_concepts.insert((a, marker));
        cq.concept_atoms.push((marker, x));
    }
    let used: BTreeSet<u32> = cq
        .concept_atoms
        .iter()
        .map(|&(_, x)| x)
        .chain(cq.role_atoms.iter().flat_map(|&(_, x, y)| [x, y]))
        .collect();
    cq.restrict(&used)
}

/// Full individual-type completions, coherent with assertions and the
/// quantifier-free inclusions.
fn complete_individuals(kb: &KnowledgeBase) -> Vec<KnowledgeBase> {
    let inds: Vec<crate::kb::Ind> = kb.sig.individuals().collect();
    if inds.is_empty() {
        return vec![kb.clone()];
    }
    let viable: Vec<Vec<UnaryType>> = inds
        .iter()
        .map(|&a| {
            let asserted = kb.asserted(a);
            kb.unary_types()
                .into_iter()
                .filter(|ty| {
                    asserted.iter().all(|&c| ty.contains(c))
                        && kb.tbox.iter().all(|ci| match ci {
                            NormalCi::Subsume(conj, disj) => kb.type_satisfies_qf(ty, conj, disj),
                            _ => true,
                        })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; inds.len()];
    'outer: loop {
        let mut k = kb.clone();
        for (i, &a) in inds.iter().enumerate() {
            if viable[i].is_empty() {
                break 'outer;
            }
            for c in viable[i][pick[i]].members(kb.sig.pair_count()) {
                k.abox_concepts.insert((a, c));
            }
        }
        out.push(k);
        let mut i = 0;
        loop {
            if i == inds.len() {
                break 'outer;
            }
            pick[i] += 1;
            if pick[i] < viable[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
    out
}

/// Assembles a two-level tree-partition prefix from a witness and
/// re-verifies the bag-local conditions: every bag models its side's
/// TBox, realises only witness types, avoids the inconsistent
/// specialisations, and shares exactly one element with its parent.
pub fn verify_witness_locally(
    w: &SifWitness,
    kq: &KnowledgeBase,
    qprime: &Ucq,
) -> bool {
    let pairs = kq.sig.pair_count();
    let types_of = |m: &Interpretation| -> BTreeSet<UnaryType> {
        m.types.iter().map(|t| UnaryType(t.0 & ((1u64 << pairs) - 1))).collect()
    };
    // the root models its side including the ABox
    let root_side = restrict_side(kq, w.mu0, true);
    if !check_model(&w.root, &root_side).is_empty() {
        return false;
    }
    if !types_of(&w.root).is_subset(&w.types) {
        return false;
    }
    if eval_ucq(qprime, &transitive_closure(&w.root, kq)) {
        return false;
    }
    // frontier elements obtain a bag of the other kind
    for (&(mu, tau), m) in &w.bag_models {
        let side = restrict_side(kq, mu, false);
        let mut tbox_only = side.clone();
        tbox_only.abox_concepts.clear();
        tbox_only.abox_roles.clear();
        // the certifying model satisfies the side TBox (ignore the fresh
        // anchor individual's naming)
        let mut anon = m.clone();
        anon.names.clear();
        if !check_model(&anon, &tbox_only).is_empty() {
            return false;
        }
        if !types_of(m).is_subset(&w.types) {
            return false;
        }
        if !types_of(m).contains(&tau) {
            return false;
        }
        if eval_ucq(qprime, &transitive_closure(m, kq)) {
            return false;
        }
    }
    // every type realised anywhere has bag models on both sides, so the
    // top-down assembly of Lemma-style prefixes never gets stuck
    let mut realised: BTreeSet<UnaryType> = types_of(&w.root);
    for m in w.bag_models.values() {
        realised.extend(types_of(m));
    }
    realised.iter().all(|t| {
        [Mu::Tr, Mu::Nt]
            .iter()
            .all(|&mu| w.bag_models.contains_key(&(mu, *t)))
    })
}
