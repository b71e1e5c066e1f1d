//! Ground truth by exhaustive finite-model enumeration.
//!
//! The search walks domain sizes upward. For each size it enumerates
//! unary-type assignments (with anonymous elements sorted by type, a
//! sound symmetry cut) and then witness choices for the existential
//! restrictions; transitive roles are built by closing the chosen
//! witness edges. A model found this way is re-verified from scratch, so
//! enumeration-time pruning can never smuggle in a wrong answer; absence
//! up to a size is a certificate because every model shrinks to a
//! witness-minimal one that the enumeration covers.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use crate::interp::{check_model, transitive_closure, Interpretation};
use crate::kb::{KnowledgeBase, NormalCi, RoleId, UnaryType};
use crate::query::{eval_ucq, Ucq};

#[derive(Clone, Debug)]
pub struct SearchBudget {
    pub max_domain_size: usize,
    pub time_limit: Duration,
    /// When set, every element's type must come from this set.
    pub type_restriction: Option<BTreeSet<UnaryType>>,
}

impl SearchBudget {
    pub fn sized(max_domain_size: usize) -> SearchBudget {
        SearchBudget { max_domain_size, time_limit: Duration::from_secs(600), type_restriction: None }
    }
    pub fn with_types(mut self, types: BTreeSet<UnaryType>) -> SearchBudget {
        self.type_restriction = Some(types);
        self
    }
    pub fn with_time_limit(mut self, limit: Duration) -> SearchBudget {
        self.time_limit = limit;
        self
    }
}

/// Result of a bounded counter-model search.
#[derive(Clone, Debug)]
pub enum SearchOutcome {
    /// A verified model of the KB whose transitive closure does not
    /// satisfy the query.
    CounterModelFound(Interpretation),
    /// No counter-model exists with domain size up to the bound.
    NoCounterModelUpTo(usize),
    /// The time limit struck; `complete_up_to` sizes were fully searched.
    Inconclusive { complete_up_to: Option<usize> },
}

impl SearchOutcome {
    pub fn model(&self) -> Option<&Interpretation> {
        match self {
            SearchOutcome::CounterModelFound(m) => Some(m),
            _ => None,
        }
    }
}

/// Searches for a finite model of `kb` that does not satisfy `q`
/// (evaluated after transitive closure — the model returned is already
/// closed). Exhaustive up to `budget.max_domain_size` modulo isomorphism.
pub fn find_countermodel(kb: &KnowledgeBase, q: &Ucq, budget: &SearchBudget) -> SearchOutcome {
    let deadline = Instant::now() + budget.time_limit;
    let min_size = kb.sig.individual_count().max(1);
    let mut complete: Option<usize> = None;
    if budget.max_domain_size < min_size {
        return SearchOutcome::NoCounterModelUpTo(budget.max_domain_size);
    }
    for size in min_size..=budget.max_domain_size {
        match search_size(kb, q, size, budget, deadline) {
            SizeResult::Found(m) => return SearchOutcome::CounterModelFound(m),
            SizeResult::Exhausted => complete = Some(size),
            SizeResult::TimedOut => return SearchOutcome::Inconclusive { complete_up_to: complete },
        }
    }
    SearchOutcome::NoCounterModelUpTo(budget.max_domain_size)
}

/// Certificate-flavoured wrapper over [`find_countermodel`].
pub fn entails_upto(kb: &KnowledgeBase, q: &Ucq, budget: &SearchBudget) -> SearchOutcome {
    find_countermodel(kb, q, budget)
}

enum SizeResult {
    Found(Interpretation),
    Exhausted,
    TimedOut,
}

struct Ctx<'a> {
    kb: &'a KnowledgeBase,
    q: &'a Ucq,
    size: usize,
    ind_count: usize,
    deadline: Instant,
    /// Existential obligations: `(concept, role, filler)` triples.
    exists: Vec<(crate::kb::ConceptId, RoleId, crate::kb::ConceptId)>,
    values: Vec<(crate::kb::ConceptId, RoleId, crate::kb::ConceptId)>,
}

fn search_size(
    kb: &KnowledgeBase,
    q: &Ucq,
    size: usize,
    budget: &SearchBudget,
    deadline: Instant,
) -> SizeResult {
    // Candidate types per element.
    let all = kb.unary_types();
    let restrict = |ty: &UnaryType| {
        budget.type_restriction.as_ref().map_or(true, |s| s.contains(ty))
    };
    let qf_ok = |ty: UnaryType| {
        kb.tbox.iter().all(|ci| match ci {
            NormalCi::Subsume(conj, disj) => kb.type_satisfies_qf(ty, conj, disj),
            _ => true,
        })
    };
    let mut cands: Vec<Vec<UnaryType>> = Vec::with_capacity(size);
    for d in 0..size {
        let named = if d < kb.sig.individual_count() { Some(crate::kb::Ind(d as u32)) } else { None };
        let types: Vec<UnaryType> = all
            .iter()
            .cloned()
            .filter(|&ty| {
                restrict(&ty)
                    && qf_ok(ty)
                    && kb.tbox.iter().all(|ci| match ci {
                        NormalCi::NominalEq(c, b) => ty.contains(*c) == (named == Some(*b)),
                        _ => true,
                    })
                    && named.map_or(true, |a| kb.asserted(a).iter().all(|&c| ty.contains(c)))
            })
            .collect();
        if types.is_empty() {
            return SizeResult::Exhausted;
        }
        cands.push(types);
    }
    let ctx = Ctx {
        kb,
        q,
        size,
        ind_count: kb.sig.individual_count(),
        deadline,
        exists: kb
            .tbox
            .iter()
            .filter_map(|ci| match ci {
                NormalCi::ExistRestr(a, r, b) => Some((*a, *r, *b)),
                _ => None,
            })
            .collect(),
        values: kb
            .tbox
            .iter()
            .filter_map(|ci| match ci {
                NormalCi::ValueRestr(a, r, b) => Some((*a, *r, *b)),
                _ => None,
            })
            .collect(),
    };
    let mut assignment: Vec<UnaryType> = Vec::with_capacity(size);
    match assign_types(&ctx, &cands, &mut assignment) {
        Some(m) => SizeResult::Found(m),
        None if Instant::now() > deadline => SizeResult::TimedOut,
        None => SizeResult::Exhausted,
    }
}

fn assign_types(ctx: &Ctx, cands: &[Vec<UnaryType>], acc: &mut Vec<UnaryType>) -> Option<Interpretation> {
    if Instant::now() > ctx.deadline {
        return None;
    }
    let d = acc.len();
    if d == ctx.size {
        return try_roles(ctx, acc);
    }
    for &ty in &cands[d] {
        // Anonymous elements in non-decreasing type order; sound because
        // they are interchangeable before roles are chosen.
        if d > ctx.ind_count {
            if let Some(&prev) = acc.last() {
                if d - 1 >= ctx.ind_count && ty.0 < prev.0 {
                    continue;
                }
            }
        }
        acc.push(ty);
        if let Some(m) = assign_types(ctx, cands, acc) {
            return Some(m);
        }
        acc.pop();
        if Instant::now() > ctx.deadline {
            return None;
        }
    }
    None
}

/// May an edge `from --r--> to` exist, given the value restrictions?
fn edge_allowed(
    values: &[(crate::kb::ConceptId, RoleId, crate::kb::ConceptId)],
    base: u32,
    tf: UnaryType,
    tt: UnaryType,
) -> bool {
    values.iter().all(|&(a, rho, b)| {
        if rho.base() != base {
            return true;
        }
        if rho.is_inverse() {
            !tt.contains(a) || tf.contains(b)
        } else {
            !tf.contains(a) || tt.contains(b)
        }
    })
}

fn try_roles(ctx: &Ctx, types: &[UnaryType]) -> Option<Interpretation> {
    let kb = ctx.kb;
    // Forced edges from the ABox.
    let mut forced: Vec<(u32, u32, u32)> = Vec::new();
    for &(base, a, b) in &kb.abox_roles {
        forced.push((base, a.0, b.0));
    }
    // Obligations: (element, role, filler concept) with candidate targets.
    let mut obligations: Vec<(u32, RoleId, Vec<u32>)> = Vec::new();
    for d in 0..ctx.size as u32 {
        for &(a, rho, b) in &ctx.exists {
            if !types[d as usize].contains(a) {
                continue;
            }
            let cands: Vec<u32> = (0..ctx.size as u32)
                .filter(|&e| {
                    types[e as usize].contains(b) && {
                        let (base, tf, tt) = if rho.is_inverse() {
                            (rho.base(), types[e as usize], types[d as usize])
                        } else {
                            (rho.base(), types[d as usize], types[e as usize])
                        };
                        edge_allowed(&ctx.values, base, tf, tt)
                    }
                })
                .collect();
            if cands.is_empty() {
                return None;
            }
            obligations.push((d, rho, cands));
        }
    }
    let mut tried: HashSet<BTreeSet<(u32, u32, u32)>> = HashSet::new();
    let mut choice = vec![0usize; obligations.len()];
    loop {
        if Instant::now() > ctx.deadline {
            return None;
        }
        // Materialise the edge set for this choice vector.
        let mut edges: BTreeSet<(u32, u32, u32)> = forced.iter().cloned().collect();
        for (k, &(d, rho, ref cands)) in obligations.iter().enumerate() {
            let e = cands[choice[k]];
            let (f, t) = if rho.is_inverse() { (e, d) } else { (d, e) };
            edges.insert((rho.base(), f, t));
        }
        if tried.insert(edges.clone()) {
            if let Some(m) = finish_candidate(ctx, types, &edges) {
                return Some(m);
            }
        }
        // Next choice vector.
        let mut k = 0;
        loop {
            if k == obligations.len() {
                return None;
            }
            choice[k] += 1;
            if choice[k] < obligations[k].2.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn finish_candidate(
    ctx: &Ctx,
    types: &[UnaryType],
    edges: &BTreeSet<(u32, u32, u32)>,
) -> Option<Interpretation> {
    let kb = ctx.kb;
    let mut i = Interpretation {
        types: types.to_vec(),
        names: (0..ctx.ind_count as u32).map(|d| (crate::kb::Ind(d), d)).collect(),
        ..Default::default()
    };
    for &(base, f, t) in edges {
        i.add_edge(RoleId::named(base), f, t);
    }
    let closed = transitive_closure(&i, kb);
    // Closure may create disallowed pairs; the full model check covers
    // value restrictions, functionality and everything else.
    if !check_model(&closed, kb).is_empty() {
        return None;
    }
    if eval_ucq(ctx.q, &closed) {
        return None;
    }
    Some(closed)
}

/// Reference enumerator without symmetry cuts or witness minimisation:
/// every type assignment and every raw edge set. Exponential; test use
/// only.
pub fn find_countermodel_naive(kb: &KnowledgeBase, q: &Ucq, max_size: usize) -> Option<Interpretation> {
    let min_size = kb.sig.individual_count().max(1);
    let base_count = kb.sig.role_count() as u32;
    for size in min_size..=max_size {
        let all = kb.unary_types();
        let mut assignment = vec![0usize; size];
        'types: loop {
            let types: Vec<UnaryType> = assignment.iter().map(|&k| all[k]).collect();
            // enumerate all edge sets over all base roles
            let slots: Vec<(u32, u32, u32)> = (0..base_count)
                .flat_map(|r| {
                    (0..size as u32).flat_map(move |a| (0..size as u32).map(move |b| (r, a, b)))
                })
                .collect();
            assert!(slots.len() <= 20, "naive enumeration limited to tiny instances");
            for mask in 0u32..1 << slots.len() {
                let mut i = Interpretation {
                    types: types.clone(),
                    names: (0..kb.sig.individual_count() as u32)
                        .map(|d| (crate::kb::Ind(d), d))
                        .collect(),
                    ..Default::default()
                };
                for (k, &(r, a, b)) in slots.iter().enumerate() {
                    if (mask >> k) & 1 == 1 {
                        i.add_edge(RoleId::named(r), a, b);
                    }
                }
                if check_model(&i, kb).is_empty() && !eval_ucq(q, &i) {
                    return Some(i);
                }
            }
            // next assignment
            let mut k = 0;
            loop {
                if k == size {
                    break 'types;
                }
                assignment[k] += 1;
                if assignment[k] < all.len() {
                    break;
                }
                assignment[k] = 0;
                k += 1;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse_kb;
    use crate::textio::parse_query;

    fn kb_simple() -> KnowledgeBase {
        parse_kb("CONCEPT A\nCONCEPT B\nCONCEPT C\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nA(a)\n").unwrap()
    }

    #[test]
    fn finds_size_two_countermodel() {
        let kb = kb_simple();
        let q = parse_query("Q <- C(x)\n", &kb.sig).unwrap();
        let out = find_countermodel(&kb, &q, &SearchBudget::sized(4));
        let m = out.model().expect("counter-model expected");
        assert!(m.size() <= 2);
        assert!(check_model(m, &kb).is_empty());
        assert!(!eval_ucq(&q, m));
        // With a disjointness axiom the one-element model disappears.
        let kb2 = parse_kb(
            "CONCEPT A\nCONCEPT B\nCONCEPT C\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nCI B SUBCLASSOF not A\nA(a)\n",
        )
        .unwrap();
        let q2 = parse_query("Q <- C(x)\n", &kb2.sig).unwrap();
        let m2 = find_countermodel(&kb2, &q2, &SearchBudget::sized(4));
        assert_eq!(m2.model().unwrap().size(), 2);
    }

    #[test]
    fn transitive_self_loop_query_has_no_small_countermodel() {
        let kb = parse_kb("CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some r. A\nA(a)\n").unwrap();
        let q = parse_query("Q <- r(x,x)\n", &kb.sig).unwrap();
        let out = find_countermodel(&kb, &q, &SearchBudget::sized(4));
        assert!(matches!(out, SearchOutcome::NoCounterModelUpTo(4)), "{out:?}");
    }

    #[test]
    fn unsatisfiable_kb_has_no_models_at_all() {
        let kb = parse_kb("CONCEPT A\nINDIVIDUAL a\nCI A SUBCLASSOF not top\nA(a)\n").unwrap();
        let q = Ucq::default();
        let out = find_countermodel(&kb, &q, &SearchBudget::sized(3));
        assert!(matches!(out, SearchOutcome::NoCounterModelUpTo(3)));
    }

    #[test]
    fn agrees_with_naive_enumeration_on_small_instances() {
        let kbs = [
            "CONCEPT A\nCONCEPT B\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nCI B SUBCLASSOF not A\nA(a)\n",
            "CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some r. A\nA(a)\n",
            "CONCEPT A\nROLE r FUNCTIONAL\nINDIVIDUAL a\nCI A SUBCLASSOF some r. A\nCI A SUBCLASSOF some r. not A\nA(a)\n",
        ];
        let queries = ["Q <- A(x)\n", "Q <- r(x,x)\n"];
        for kb_text in kbs {
            let kb = parse_kb(kb_text).unwrap();
            for q_text in queries {
                let q = parse_query(q_text, &kb.sig).unwrap();
                let fast = find_countermodel(&kb, &q, &SearchBudget::sized(3));
                let naive = find_countermodel_naive(&kb, &q, 3);
                assert_eq!(
                    fast.model().is_some(),
                    naive.is_some(),
                    "kb={kb_text} q={q_text}"
                );
            }
        }
    }

    #[test]
    fn type_restriction_is_respected() {
        let kb = kb_simple();
        let q = parse_query("Q <- C(x)\n", &kb.sig).unwrap();
        // forbid every type: no model can be built
        let out = find_countermodel(&kb, &q, &SearchBudget::sized(3).with_types(BTreeSet::new()));
        assert!(out.model().is_none());
    }
}
