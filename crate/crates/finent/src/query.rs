//! Boolean conjunctive queries, unions thereof, and homomorphism
//! matching against finite interpretations.

use std::collections::BTreeSet;

use crate::interp::Interpretation;
use crate::kb::ConceptId;

/// A Boolean conjunctive query over variables `0..vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cq {
    pub vars: u32,
    pub concept_atoms: Vec<(ConceptId, u32)>,
    /// `r(x, y)` over named base roles.
    pub role_atoms: Vec<(u32, u32, u32)>,
}

/// A union of conjunctive queries; the empty union is unsatisfiable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ucq {
    pub cqs: Vec<Cq>,
}

impl Cq {
    pub fn binary_atom_count(&self) -> usize {
        self.role_atoms.len()
    }

    pub fn size(&self) -> usize {
        self.concept_atoms.len() + self.role_atoms.len()
    }

    /// Variables adjacent to `x` through role atoms.
    pub fn neighbours(&self, x: u32) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for &(_, a, b) in &self.role_atoms {
            if a == x {
                out.insert(b);
            }
            if b == x {
                out.insert(a);
            }
        }
        out
    }

    /// Is the query graph connected (single component over variables)?
    pub fn is_connected(&self) -> bool {
        if self.vars <= 1 {
            return true;
        }
        let mut seen = vec![false; self.vars as usize];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in self.neighbours(x) {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Connected components as variable sets.
    pub fn components(&self) -> Vec<BTreeSet<u32>> {
        let mut seen = vec![false; self.vars as usize];
        let mut out = Vec::new();
        for s in 0..self.vars {
            if seen[s as usize] {
                continue;
            }
            let mut comp = BTreeSet::from([s]);
            seen[s as usize] = true;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in self.neighbours(x) {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        comp.insert(y);
                        stack.push(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// The subquery induced by a variable set, with variables renumbered.
    pub fn restrict(&self, keep: &BTreeSet<u32>) -> Cq {
        let map: std::collections::BTreeMap<u32, u32> =
            keep.iter().enumerate().map(|(n, &v)| (v, n as u32)).collect();
        Cq {
            vars: keep.len() as u32,
            concept_atoms: self
                .concept_atoms
                .iter()
                .filter_map(|&(c, x)| map.get(&x).map(|&x| (c, x)))
                .collect(),
            role_atoms: self
                .role_atoms
                .iter()
                .filter_map(|&(r, x, y)| Some((r, *map.get(&x)?, *map.get(&y)?)))
                .collect(),
        }
    }

    /// Applies a variable substitution and renumbers onto `0..n`.
    pub fn quotient(&self, class_of: &[u32]) -> Cq {
        let n = class_of.iter().cloned().max().map_or(0, |m| m + 1);
        let mut q = Cq {
            vars: n,
            concept_atoms: self
                .concept_atoms
                .iter()
                .map(|&(c, x)| (c, class_of[x as usize]))
                .collect(),
            role_atoms: self
                .role_atoms
                .iter()
                .map(|&(r, x, y)| (r, class_of[x as usize], class_of[y as usize]))
                .collect(),
        };
        q.concept_atoms.sort_unstable();
        q.concept_atoms.dedup();
        q.role_atoms.sort_unstable();
        q.role_atoms.dedup();
        q
    }

    /// A canonical representative up to variable renaming; small queries
    /// only (tries all permutations).
    pub fn canonical(&self) -> Cq {
        let n = self.vars as usize;
        assert!(n <= 8, "canonical form implemented for up to 8 variables");
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut best: Option<Cq> = None;
        permute(&mut perm, 0, &mut |p| {
            let q = self.quotient(p);
            if best.as_ref().map_or(true, |b| q < *b) {
                best = Some(q);
            }
        });
        best.unwrap_or_else(|| self.clone())
    }
}

fn permute(perm: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// Finds a match (total assignment satisfying every atom) of `q` in `i`,
/// by backtracking over variables ordered by constraint degree.
pub fn match_cq(q: &Cq, i: &Interpretation) -> Option<Vec<u32>> {
    let n = q.vars as usize;
    if n == 0 {
        return Some(vec![]);
    }
    // Candidates per variable from concept atoms.
    let mut cands: Vec<Vec<u32>> = Vec::with_capacity(n);
    for x in 0..n as u32 {
        let cs: Vec<ConceptId> =
            q.concept_atoms.iter().filter(|&&(_, v)| v == x).map(|&(c, _)| c).collect();
        let cand: Vec<u32> =
            (0..i.size() as u32).filter(|&d| cs.iter().all(|&c| i.in_concept(c, d))).collect();
        if cand.is_empty() {
            return None;
        }
        cands.push(cand);
    }
    // Order: most-constrained first.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&x| (cands[x as usize].len(), std::cmp::Reverse(q.neighbours(x).len())));
    let mut assign: Vec<Option<u32>> = vec![None; n];
    fn consistent(q: &Cq, i: &Interpretation, assign: &[Option<u32>]) -> bool {
        q.role_atoms.iter().all(|&(r, x, y)| {
            match (assign[x as usize], assign[y as usize]) {
                (Some(a), Some(b)) => i
                    .roles
                    .get(&r)
                    .map_or(false, |s| s.contains(&(a, b))),
                _ => true,
            }
        })
    }
    fn rec(
        q: &Cq,
        i: &Interpretation,
        order: &[u32],
        cands: &[Vec<u32>],
        assign: &mut Vec<Option<u32>>,
        k: usize,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let x = order[k] as usize;
        for &d in &cands[x] {
            assign[x] = Some(d);
            if consistent(q, i, assign) && rec(q, i, order, cands, assign, k + 1) {
                return true;
            }
            assign[x] = None;
        }
        false
    }
    if rec(q, i, &order, &cands, &mut assign, 0) {
        Some(assign.into_iter().map(Option::unwrap).collect())
    } else {
        None
    }
}

/// True iff some disjunct matches; the empty union never does.
pub fn eval_ucq(q: &Ucq, i: &Interpretation) -> bool {
    q.cqs.iter().any(|cq| match_cq(cq, i).is_some())
}

/// Exhaustive matcher used as an oracle in tests: enumerates all
/// `|Δ|^vars` assignments.
pub fn match_cq_exhaustive(q: &Cq, i: &Interpretation) -> Option<Vec<u32>> {
    let n = q.vars as usize;
    let size = i.size() as u32;
    if n == 0 {
        return Some(vec![]);
    }
    if size == 0 {
        return None;
    }
    let mut assign = vec![0u32; n];
    loop {
        let ok = q.concept_atoms.iter().all(|&(c, x)| i.in_concept(c, assign[x as usize]))
            && q.role_atoms.iter().all(|&(r, x, y)| {
                i.roles.get(&r).map_or(false, |s| {
                    s.contains(&(assign[x as usize], assign[y as usize]))
                })
            });
        if ok {
            return Some(assign);
        }
        let mut k = 0;
        loop {
            if k == n {
                return None;
            }
            assign[k] += 1;
            if assign[k] < size {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{RoleId, UnaryType};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn interp_with(types: Vec<u64>, edges: &[(u32, u32, u32)]) -> Interpretation {
        let mut i = Interpretation {
            types: types.into_iter().map(UnaryType).collect(),
            ..Default::default()
        };
        for &(r, a, b) in edges {
            i.add_edge(RoleId::named(r), a, b);
        }
        i
    }

    #[test]
    fn single_concept_atom() {
        let a = ConceptId(0);
        let i = interp_with(vec![0, 1], &[]);
        let q = Cq { vars: 1, concept_atoms: vec![(a, 0)], role_atoms: vec![] };
        assert_eq!(match_cq(&q, &i), Some(vec![1]));
    }

    #[test]
    fn self_loop_needs_reflexive_edge() {
        let i = interp_with(vec![0, 0], &[(0, 0, 1)]);
        let q = Cq { vars: 1, concept_atoms: vec![], role_atoms: vec![(0, 0, 0)] };
        assert_eq!(match_cq(&q, &i), None);
    }

    #[test]
    fn empty_union_is_false() {
        let i = interp_with(vec![0], &[]);
        assert!(!eval_ucq(&Ucq::default(), &i));
        let q = Cq { vars: 1, concept_atoms: vec![], role_atoms: vec![] };
        assert!(eval_ucq(&Ucq { cqs: vec![q] }, &i));
    }

    #[test]
    fn agrees_with_exhaustive_search_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let size = rng.gen_range(1..=5);
            let types: Vec<u64> = (0..size).map(|_| rng.gen_range(0..4)).collect();
            let mut edges = Vec::new();
            for a in 0..size as u32 {
                for b in 0..size as u32 {
                    for r in 0..2 {
                        if rng.gen_bool(0.3) {
                            edges.push((r, a, b));
                        }
                    }
                }
            }
            let i = interp_with(types, &edges);
            let vars = rng.gen_range(1..=4u32);
            let q = Cq {
                vars,
                concept_atoms: (0..rng.gen_range(0..3))
                    .map(|_| (ConceptId(rng.gen_range(0..4)), rng.gen_range(0..vars)))
                    .collect(),
                role_atoms: (0..rng.gen_range(0..3))
                    .map(|_| (rng.gen_range(0..2), rng.gen_range(0..vars), rng.gen_range(0..vars)))
                    .collect(),
            };
            assert_eq!(
                match_cq(&q, &i).is_some(),
                match_cq_exhaustive(&q, &i).is_some(),
                "q={q:?} i={i:?}"
            );
        }
    }

    #[test]
    fn homomorphism_preserves_ucq_satisfaction() {
        // If eval is true on i and h: i → j exists, eval is true on j.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..200 {
            let mk = |rng: &mut ChaCha8Rng| {
                let size = rng.gen_range(1..=4);
                let types: Vec<u64> = (0..size).map(|_| rng.gen_range(0..2)).collect();
                let mut edges = Vec::new();
                for a in 0..size as u32 {
                    for b in 0..size as u32 {
                        if rng.gen_bool(0.4) {
                            edges.push((0, a, b));
                        }
                    }
                }
                interp_with(types, &edges)
            };
            let i = mk(&mut rng);
            let j = mk(&mut rng);
            let hom = crate::interp::find_homomorphism(&i, &j, 1);
            let q = Cq {
                vars: 2,
                concept_atoms: vec![(ConceptId(0), 0)],
                role_atoms: vec![(0, 0, 1)],
            };
            if let Some(_h) = hom {
                if match_cq(&q, &i).is_some() {
                    checked += 1;
                    assert!(match_cq(&q, &j).is_some());
                }
            }
        }
        assert!(checked > 0, "suite never exercised the implication");
    }
}
