//! Query preprocessing for the forest procedure.
//!
//! Matches of the original query live in the transitive closure of the
//! whole model, including the nominal block; the automaton sees only the
//! non-nominal forest. Two rewritings bridge the gap: subdividing
//! transitive atoms (so a match through a clique entry point can name
//! it) and absorbing variables into nominals (replacing atoms touching
//! an absorbed variable with adjacency-marker atoms).

use std::collections::{BTreeMap, BTreeSet};

use crate::kb::{ConceptId, Ind, KnowledgeBase, RoleId, UnaryType};
use crate::query::{Cq, Ucq};

/// One conjunct of the rewritten query, with bookkeeping needed by the
/// automaton components.
#[derive(Clone, Debug)]
pub struct RewrittenCq {
    pub cq: Cq,
    /// Concept atoms per variable, as a required-membership check.
    pub tp: Vec<Vec<ConceptId>>,
}

impl RewrittenCq {
    pub fn new(cq: Cq) -> Self {
        let mut tp = vec![Vec::new(); cq.vars as usize];
        for &(c, x) in &cq.concept_atoms {
            tp[x as usize].push(c);
        }
        RewrittenCq { cq, tp }
    }
}

/// Result of the nominal-free rewriting: the conjuncts to compile into
/// automaton components, plus whether some conjunct became trivially true
/// (all atoms absorbed), which forces entailment for this completion.
#[derive(Clone, Debug, Default)]
pub struct RewrittenQuery {
    pub cqs: Vec<RewrittenCq>,
    pub trivially_matched: bool,
    /// Sizes after the two rewriting steps, for bound assertions.
    pub after_subdivision: usize,
    pub after_absorption: usize,
}

/// Rewrites `q` so that, over models of the completed KB, the original
/// query matches the closure of the model iff the rewritten one matches
/// the closure of the model minus its nominals.
pub fn rewrite_query_nominal_free(
    q: &Ucq,
    kb: &KnowledgeBase,
    markers: &BTreeMap<(RoleId, Ind), ConceptId>,
) -> RewrittenQuery {
    let nominal_types: BTreeMap<Ind, UnaryType> = kb
        .sig
        .nominals()
        .iter()
        .filter_map(|&a| kb.abox_type(a).map(|t| (a, t)))
        .collect();

    // Step 1: subdivide subsets of transitive atoms.
    let mut seen: BTreeSet<Cq> = BTreeSet::new();
    let mut work: Vec<Cq> = Vec::new();
    for cq in &q.cqs {
        for sub in subdivisions(cq, kb) {
            let canon = sub.canonical();
            if seen.insert(canon.clone()) {
                work.push(canon);
            }
        }
    }
    let after_subdivision = work.len();

    // Step 2: absorb variables into nominals, to a fixpoint.
    let mut out: BTreeSet<Cq> = work.iter().cloned().collect();
    let mut queue: Vec<Cq> = work;
    let mut trivially_matched = false;
    while let Some(p) = queue.pop() {
        if p.vars == 0 {
            trivially_matched = true;
            continue;
        }
        for x in 0..p.vars {
            'nominals: for (&a, &ty) in &nominal_types {
                // the variable's required concepts must hold at the nominal
                for &(c, v) in &p.concept_atoms {
                    if v == x && !ty.contains(c) {
                        continue 'nominals;
                    }
                }
                // self-loop atoms need the matching loop on the nominal;
                // roles with no adjacency markers never reach nominals
                for &(r, v, w) in &p.role_atoms {
                    if v == x || w == x {
                        match markers.get(&(RoleId::named(r), a)) {
                            None => continue 'nominals,
                            Some(&m) if v == x && w == x && !ty.contains(m) => {
                                continue 'nominals
                            }
                            _ => {}
                        }
                    }
                }
                let absorbed = absorb(&p, x, a, markers);
                let canon = absorbed.canonical();
                if out.insert(canon.clone()) {
                    queue.push(canon);
                }
            }
        }
    }
    let cqs: Vec<RewrittenCq> = out.into_iter().map(RewrittenCq::new).collect();
    RewrittenQuery {
        after_subdivision,
        after_absorption: cqs.len(),
        trivially_matched: trivially_matched || cqs.iter().any(|c| c.cq.vars == 0),
        cqs,
    }
}

/// All ways of replacing a subset of transitive atoms `r(x,y)` with
/// `r(x,z), r(z,y)` for fresh `z`.
fn subdivisions(cq: &Cq, kb: &KnowledgeBase) -> Vec<Cq> {
    let trans_atoms: Vec<usize> = cq
        .role_atoms
        .iter()
        .enumerate()
        .filter(|(_, &(r, _, _))| kb.sig.is_transitive(RoleId::named(r)))
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << trans_atoms.len() {
        let mut new = cq.clone();
        for (k, &idx) in trans_atoms.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                let (r, x, y) = new.role_atoms[idx];
                let z = new.vars;
                new.vars += 1;
                new.role_atoms[idx] = (r, x, z);
                new.role_atoms.push((r, z, y));
            }
        }
        out.push(new);
    }
    out
}

/// Drops variable `x`, replacing its role atoms with adjacency-marker
/// concept atoms towards nominal `a`.
fn absorb(p: &Cq, x: u32, a: Ind, markers: &BTreeMap<(RoleId, Ind), ConceptId>) -> Cq {
    let mut concept_atoms: Vec<(ConceptId, u32)> =
        p.concept_atoms.iter().cloned().filter(|&(_, v)| v != x).collect();
    let mut role_atoms = Vec::new();
    for &(r, v, w) in &p.role_atoms {
        match (v == x, w == x) {
            (false, false) => role_atoms.push((r, v, w)),
            (false, true) => concept_atoms.push((markers[&(RoleId::named(r), a)], v)),
            (true, false) => concept_atoms.push((markers[&(RoleId::named(r).inverse(), a)], w)),
            (true, true) => {} // loop on the nominal, checked by the caller
        }
    }
    // renumber: drop x
    let map = |v: u32| if v > x { v - 1 } else { v };
    Cq {
        vars: p.vars - 1,
        concept_atoms: concept_atoms.into_iter().map(|(c, v)| (c, map(v))).collect(),
        role_atoms: role_atoms.into_iter().map(|(r, v, w)| (r, map(v), map(w))).collect(),
    }
}

/// Replaces each transitive atom `s(x,y)` by an `i`-fold composition for
/// every `i ≤ bound`, expanding into a union of conjunctive queries.
pub fn expand_transitive_query(q: &Ucq, kb: &KnowledgeBase, bound: u32) -> Ucq {
    assert!(bound >= 1);
    let mut out = Ucq::default();
    for cq in &q.cqs {
        let mut variants: Vec<Cq> = vec![Cq { vars: cq.vars, concept_atoms: cq.concept_atoms.clone(), role_atoms: vec![] }];
        for &(r, x, y) in &cq.role_atoms {
            let transitive = kb.sig.is_transitive(RoleId::named(r));
            let steps: Vec<u32> = if transitive { (1..=bound).collect() } else { vec![1] };
            let mut next = Vec::new();
            for base in &variants {
                for &i in &steps {
                    let mut v = base.clone();
                    let mut prev = x;
                    for k in 0..i {
                        let to = if k + 1 == i {
                            y
                        } else {
                            v.vars += 1;
                            v.vars - 1
                        };
                        v.role_atoms.push((r, prev, to));
                        prev = to;
                    }
                    next.push(v);
                }
            }
            variants = next;
        }
        out.cqs.extend(variants);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::preprocess_soi;
    use crate::oracle::{find_countermodel, SearchBudget};
    use crate::textio::{parse_kb, parse_query};

    #[test]
    fn no_transitive_atoms_no_nominals_identity() {
        let kb = parse_kb("CONCEPT A\nROLE r\nINDIVIDUAL i\nCI A SUBCLASSOF some r. A\n").unwrap();
        let pre = preprocess_soi(&kb).unwrap();
        let q = parse_query("Q <- r(x,y), A(y)\n", &kb.sig).unwrap();
        let rw = rewrite_query_nominal_free(&q, &pre.completions[0], &pre.markers);
        assert_eq!(rw.cqs.len(), 1);
        assert_eq!(rw.after_subdivision, 1);
        assert!(!rw.trivially_matched);
    }

    #[test]
    fn transitive_atom_is_subdivided() {
        let kb = parse_kb("CONCEPT A\nROLE s TRANSITIVE\nINDIVIDUAL i\nCI A SUBCLASSOF some s. A\n").unwrap();
        let pre = preprocess_soi(&kb).unwrap();
        let q = parse_query("Q <- s(x,y)\n", &kb.sig).unwrap();
        let rw = rewrite_query_nominal_free(&q, &pre.completions[0], &pre.markers);
        assert_eq!(rw.after_subdivision, 2, "original plus one subdivision");
        let sizes: BTreeSet<usize> = rw.cqs.iter().map(|c| c.cq.role_atoms.len()).collect();
        assert_eq!(sizes, BTreeSet::from([1, 2]));
    }

    #[test]
    fn absorption_adds_marker_variant_and_is_equivalent_on_a_small_model() {
        // one nominal o; P = r(x,y): the variant A_{r,o}(x) must appear
        let kb = parse_kb(
            "CONCEPT A\nROLE r\nINDIVIDUAL o\nCI A EQUIV {o}\nCI A SUBCLASSOF some r. A\n",
        )
        .unwrap();
        let pre = preprocess_soi(&kb).unwrap();
        let q = parse_query("Q <- r(x,y)\n", &kb.sig).unwrap();
        let completion = &pre.completions[0];
        let rw = rewrite_query_nominal_free(&q, completion, &pre.markers);
        assert!(rw.after_absorption > rw.after_subdivision);
        // Equivalence spot-check on a hand model of the completion:
        // I* ⊨ Q iff (I \ Nom)* ⊨ Q′. Build a model with only the nominal
        // and one anonymous element; here the match uses the nominal, so
        // Q matches I* while every Q′ conjunct must match the forest part.
        let budget = SearchBudget::sized(3);
        if let Some(m) = find_countermodel(completion, &Ucq::default(), &budget).model() {
            let closure = crate::interp::transitive_closure(m, completion);
            let q_holds = crate::query::eval_ucq(&q, &closure);
            // evaluate Q′ over the closure of the model minus nominals
            let nominals = closure.nominal_elements(completion);
            let keep: BTreeSet<u32> =
                (0..closure.size() as u32).filter(|d| !nominals.contains(d)).collect();
            let (forest_part, _) = closure.induced(&keep);
            let forest_closed = crate::interp::transitive_closure(&forest_part, completion);
            let qprime = Ucq { cqs: rw.cqs.iter().map(|c| c.cq.clone()).collect() };
            let qprime_holds =
                rw.trivially_matched || crate::query::eval_ucq(&qprime, &forest_closed);
            assert_eq!(q_holds, qprime_holds);
        }
    }

    #[test]
    fn expansion_counts() {
        let kb = parse_kb("CONCEPT A\nROLE s TRANSITIVE\nROLE r\nINDIVIDUAL i\n").unwrap();
        let q = parse_query("Q <- s(x,y), r(y,x)\n", &kb.sig).unwrap();
        // bound 1: unchanged modulo normalisation
        let e1 = expand_transitive_query(&q, &kb, 1);
        assert_eq!(e1.cqs.len(), 1);
        assert_eq!(e1.cqs[0].role_atoms.len(), 2);
        // one transitive atom, bound 2: two disjuncts
        let q2 = parse_query("Q <- s(x,y)\n", &kb.sig).unwrap();
        let e2 = expand_transitive_query(&q2, &kb, 2);
        assert_eq!(e2.cqs.len(), 2);
        // bound 3, two transitive atoms → ≤ 9 disjuncts of ≤ 6 binary atoms
        let q3 = parse_query("Q <- s(x,y), s(y,z)\n", &kb.sig).unwrap();
        let e3 = expand_transitive_query(&q3, &kb, 3);
        assert_eq!(e3.cqs.len(), 9);
        assert!(e3.cqs.iter().all(|c| c.role_atoms.len() <= 6));
    }
}
