//! Knowledge-base syntax: signatures, concept expressions, normal-form
//! concept inclusions, and the preprocessing steps the decision
//! procedures rely on.
//!
//! Concept names come in complementary pairs. The complement of a name is
//! tracked structurally (ids `2p` and `2p+1` form pair `p`), so the
//! axioms `⊤ ⊑ A ⊔ Ā` and `A ⊓ Ā ⊑ ⊥` hold by construction in every
//! value of [`UnaryType`] and in every [`crate::interp::Interpretation`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A concept name. Even ids are the user-visible side of a pair, odd ids
/// the complementary name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConceptId(pub u32);

impl ConceptId {
    pub fn complement(self) -> ConceptId {
        ConceptId(self.0 ^ 1)
    }
    pub fn pair(self) -> u32 {
        self.0 >> 1
    }
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
}

/// A role with direction: `base << 1 | 1` is the inverse of base role
/// `base << 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RoleId(pub u32);

impl RoleId {
    pub fn named(base: u32) -> RoleId {
        RoleId(base << 1)
    }
    pub fn inverse_of(base: u32) -> RoleId {
        RoleId(base << 1 | 1)
    }
    pub fn inverse(self) -> RoleId {
        RoleId(self.0 ^ 1)
    }
    pub fn base(self) -> u32 {
        self.0 >> 1
    }
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }
}

/// An individual name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Ind(pub u32);

#[derive(Clone, Debug)]
pub struct RoleDecl {
    pub name: String,
    pub transitive: bool,
    /// Functionality per direction: `[Fn(r), Fn(r⁻)]`.
    pub functional: [bool; 2],
}

/// Signature of a knowledge base: concept-name pairs, roles with flags,
/// individuals, and the subset of individuals used as nominals.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    /// Names, two per pair; index = `ConceptId`.
    names: Vec<String>,
    roles: Vec<RoleDecl>,
    individuals: Vec<String>,
    nominals: BTreeSet<Ind>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("name `{0}` is already declared")]
    Duplicate(String),
    #[error("unknown concept name `{0}`")]
    UnknownConcept(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("role `{0}` is declared transitive, so neither it nor its inverse may be functional")]
    TransitiveFunctional(String),
    #[error("{0} concept inclusions contain inverse roles, which the functional-roles-with-nominals fragment forbids")]
    InverseInSof(String),
    #[error("nominal `{{{0}}}` is not allowed in the functional-roles-with-inverses fragment")]
    NominalInSif(String),
    #[error("the knowledge base combines nominals, inverses and functionality; no decision procedure applies")]
    OutsideFragments,
    #[error("signature supports at most 63 concept pairs, got {0}")]
    TooManyConcepts(usize),
    #[error("malformed inclusion: {0}")]
    Malformed(String),
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    /// Declares a concept-name pair; returns the positive id.
    pub fn add_concept(&mut self, name: &str) -> Result<ConceptId, KbError> {
        if self.concept_by_name(name).is_some() {
            return Err(KbError::Duplicate(name.to_string()));
        }
        let id = ConceptId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.names.push(format!("~{name}"));
        Ok(id)
    }

    /// Declares a fresh pair with a collision-checked generated name.
    pub fn fresh_concept(&mut self, prefix: &str) -> ConceptId {
        let mut n = self.names.len() / 2;
        loop {
            let cand = format!("{prefix}{n}");
            if self.concept_by_name(&cand).is_none() {
                return self.add_concept(&cand).unwrap();
            }
            n += 1;
        }
    }

    pub fn add_role(&mut self, name: &str) -> Result<RoleId, KbError> {
        if self.role_by_name(name).is_some() {
            return Err(KbError::Duplicate(name.to_string()));
        }
        self.roles.push(RoleDecl { name: name.to_string(), transitive: false, functional: [false; 2] });
        Ok(RoleId::named(self.roles.len() as u32 - 1))
    }

    pub fn add_individual(&mut self, name: &str) -> Result<Ind, KbError> {
        if self.individual_by_name(name).is_some() {
            return Err(KbError::Duplicate(name.to_string()));
        }
        self.individuals.push(name.to_string());
        Ok(Ind(self.individuals.len() as u32 - 1))
    }

    pub fn fresh_individual(&mut self, prefix: &str) -> Ind {
        let mut n = self.individuals.len();
        loop {
            let cand = format!("{prefix}{n}");
            if self.individual_by_name(&cand).is_none() {
                return self.add_individual(&cand).unwrap();
            }
            n += 1;
        }
    }

    pub fn concept_by_name(&self, name: &str) -> Option<ConceptId> {
        if let Some(stripped) = name.strip_prefix('~') {
            return self.concept_by_name(stripped).map(ConceptId::complement);
        }
        self.names.iter().position(|n| n == name).map(|i| ConceptId(i as u32))
    }
    pub fn role_by_name(&self, name: &str) -> Option<RoleId> {
        self.roles.iter().position(|r| r.name == name).map(|i| RoleId::named(i as u32))
    }
    pub fn individual_by_name(&self, name: &str) -> Option<Ind> {
        self.individuals.iter().position(|n| n == name).map(|i| Ind(i as u32))
    }

    pub fn concept_name(&self, c: ConceptId) -> &str {
        &self.names[c.0 as usize]
    }
    pub fn role_name(&self, r: RoleId) -> String {
        let d = &self.roles[r.base() as usize];
        if r.is_inverse() {
            format!("inv({})", d.name)
        } else {
            d.name.clone()
        }
    }
    pub fn individual_name(&self, a: Ind) -> &str {
        &self.individuals[a.0 as usize]
    }

    pub fn pair_count(&self) -> usize {
        self.names.len() / 2
    }
    pub fn role_count(&self) -> usize {
        self.roles.len()
    }
    pub fn individual_count(&self) -> usize {
        self.individuals.len()
    }
    pub fn individuals(&self) -> impl Iterator<Item = Ind> + '_ {
        (0..self.individuals.len() as u32).map(Ind)
    }
    pub fn concepts(&self) -> impl Iterator<Item = ConceptId> + '_ {
        (0..self.names.len() as u32).map(ConceptId)
    }

    pub fn nominals(&self) -> &BTreeSet<Ind> {
        &self.nominals
    }
    pub fn mark_nominal(&mut self, a: Ind) {
        self.nominals.insert(a);
    }
    pub fn is_nominal(&self, a: Ind) -> bool {
        self.nominals.contains(&a)
    }

    pub fn set_transitive(&mut self, r: RoleId) {
        self.roles[r.base() as usize].transitive = true;
    }
    pub fn set_functional(&mut self, r: RoleId) {
        self.roles[r.base() as usize].functional[r.0 as usize & 1] = true;
    }
    pub fn is_transitive(&self, r: RoleId) -> bool {
        self.roles[r.base() as usize].transitive
    }
    pub fn is_functional(&self, r: RoleId) -> bool {
        self.roles[r.base() as usize].functional[r.0 as usize & 1]
    }
    pub fn role_decl(&self, base: u32) -> &RoleDecl {
        &self.roles[base as usize]
    }
    pub fn roles_iter(&self) -> impl Iterator<Item = &RoleDecl> {
        self.roles.iter()
    }
    pub fn role_decl_mut(&mut self, base: u32) -> &mut RoleDecl {
        &mut self.roles[base as usize]
    }
}

/// A concept expression, as parsed from the input syntax.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ConceptExpr {
    Top,
    Atom(ConceptId),
    Not(Box<ConceptExpr>),
    And(Box<ConceptExpr>, Box<ConceptExpr>),
    Nominal(Ind),
    Exists(RoleId, Box<ConceptExpr>),
}

impl ConceptExpr {
    pub fn not(e: ConceptExpr) -> ConceptExpr {
        ConceptExpr::Not(Box::new(e))
    }
    pub fn and(a: ConceptExpr, b: ConceptExpr) -> ConceptExpr {
        ConceptExpr::And(Box::new(a), Box::new(b))
    }
    pub fn exists(r: RoleId, e: ConceptExpr) -> ConceptExpr {
        ConceptExpr::Exists(r, Box::new(e))
    }
}

/// A concept inclusion in one of the four normal forms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NormalCi {
    /// `A₁ ⊓ … ⊓ Aₙ ⊑ B₁ ⊔ … ⊔ Bₘ`; the empty conjunction is `⊤`, the
    /// empty disjunction `⊥`.
    Subsume(Vec<ConceptId>, Vec<ConceptId>),
    /// `A ≡ {a}`.
    NominalEq(ConceptId, Ind),
    /// `A ⊑ ∀ρ.B`.
    ValueRestr(ConceptId, RoleId, ConceptId),
    /// `A ⊑ ∃ρ.B`.
    ExistRestr(ConceptId, RoleId, ConceptId),
}

/// A set of concept names with exactly one member of every complementary
/// pair, as a bitmask over pairs (bit set = positive member present).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct UnaryType(pub u64);

impl UnaryType {
    pub fn contains(self, c: ConceptId) -> bool {
        let bit = (self.0 >> c.pair()) & 1 == 1;
        bit == c.is_positive()
    }
    pub fn with(self, c: ConceptId) -> UnaryType {
        if c.is_positive() {
            UnaryType(self.0 | 1 << c.pair())
        } else {
            UnaryType(self.0 & !(1 << c.pair()))
        }
    }
    pub fn positives(self, pairs: usize) -> impl Iterator<Item = ConceptId> {
        (0..pairs as u32).filter(move |p| (self.0 >> p) & 1 == 1).map(|p| ConceptId(p << 1))
    }
    /// All members, one per pair.
    pub fn members(self, pairs: usize) -> impl Iterator<Item = ConceptId> {
        (0..pairs as u32).map(move |p| {
            if (self.0 >> p) & 1 == 1 {
                ConceptId(p << 1)
            } else {
                ConceptId(p << 1 | 1)
            }
        })
    }
}

/// A knowledge base with a normalised TBox.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    pub sig: Signature,
    pub tbox: Vec<NormalCi>,
    pub abox_concepts: BTreeSet<(Ind, ConceptId)>,
    /// Role assertions `r(a, b)` over named roles (base index).
    pub abox_roles: BTreeSet<(u32, Ind, Ind)>,
}

impl KnowledgeBase {
    /// `|K| = |A| + |T|`, counting declarations as TBox items.
    pub fn size(&self) -> usize {
        let decls: usize = self
            .sig
            .roles
            .iter()
            .map(|r| r.transitive as usize + r.functional[0] as usize + r.functional[1] as usize)
            .sum();
        self.tbox.len() + decls + self.abox_concepts.len() + self.abox_roles.len()
    }

    /// Roles occurring in the KB, direction-sensitive. For fragments with
    /// inverses, transitive declarations count for both directions.
    pub fn occurring_roles(&self) -> BTreeSet<RoleId> {
        let mut out = BTreeSet::new();
        for ci in &self.tbox {
            match ci {
                NormalCi::ValueRestr(_, r, _) | NormalCi::ExistRestr(_, r, _) => {
                    out.insert(*r);
                }
                _ => {}
            }
        }
        for &(base, _, _) in &self.abox_roles {
            out.insert(RoleId::named(base));
        }
        let has_inverses = out.iter().any(|r| r.is_inverse());
        for (i, d) in self.sig.roles.iter().enumerate() {
            let named = RoleId::named(i as u32);
            if d.functional[0] {
                out.insert(named);
            }
            if d.functional[1] {
                out.insert(named.inverse());
            }
            if d.transitive && out.contains(&named) && has_inverses {
                out.insert(named.inverse());
            }
            if d.transitive && out.contains(&named.inverse()) {
                out.insert(named);
            }
        }
        out
    }

    /// Which syntactic features the TBox/ABox use.
    pub fn features(&self) -> Features {
        let mut f = Features::default();
        f.nominals = !self.sig.nominals.is_empty();
        for ci in &self.tbox {
            match ci {
                NormalCi::ValueRestr(_, r, _) | NormalCi::ExistRestr(_, r, _) => {
                    if r.is_inverse() {
                        f.inverses = true;
                    }
                    if self.sig.is_transitive(*r) {
                        f.transitive = true;
                    }
                }
                NormalCi::NominalEq(..) => f.nominals = true,
                _ => {}
            }
        }
        for d in &self.sig.roles {
            if d.transitive {
                f.transitive = true;
            }
            if d.functional[0] || d.functional[1] {
                f.functional = true;
            }
        }
        f
    }

    /// Checks the global role constraint: a transitive role is never
    /// functional in either direction.
    pub fn validate_roles(&self) -> Result<(), KbError> {
        for d in &self.sig.roles {
            if d.transitive && (d.functional[0] || d.functional[1]) {
                return Err(KbError::TransitiveFunctional(d.name.clone()));
            }
        }
        Ok(())
    }

    /// The KB with transitivity declarations dropped (`K*`).
    pub fn without_transitivity(&self) -> KnowledgeBase {
        let mut kb = self.clone();
        for d in &mut kb.sig.roles {
            d.transitive = false;
        }
        kb
    }

    /// All unary types over the signature: one member per complementary
    /// pair, `2^p` values.
    pub fn unary_types(&self) -> Vec<UnaryType> {
        let p = self.sig.pair_count();
        assert!(p <= 63, "too many concept pairs for type enumeration");
        (0..1u64 << p).map(UnaryType).collect()
    }

    /// Does `ty` satisfy a quantifier-free inclusion?
    pub fn type_satisfies_qf(&self, ty: UnaryType, conj: &[ConceptId], disj: &[ConceptId]) -> bool {
        !conj.iter().all(|&c| ty.contains(c)) || disj.iter().any(|&c| ty.contains(c))
    }

    /// Types usable for anonymous (non-nominal) elements: they satisfy all
    /// quantifier-free inclusions and contain no nominal-defining name.
    pub fn anonymous_types(&self) -> Vec<UnaryType> {
        self.unary_types()
            .into_iter()
            .filter(|&ty| {
                self.tbox.iter().all(|ci| match ci {
                    NormalCi::Subsume(conj, disj) => self.type_satisfies_qf(ty, conj, disj),
                    NormalCi::NominalEq(a, _) => !ty.contains(*a),
                    _ => true,
                })
            })
            .collect()
    }

    /// The asserted concept names of an individual.
    pub fn asserted(&self, a: Ind) -> BTreeSet<ConceptId> {
        self.abox_concepts.iter().filter(|&&(b, _)| b == a).map(|&(_, c)| c).collect()
    }

    /// The full unary type of an individual, if the ABox specifies one
    /// member of every pair.
    pub fn abox_type(&self, a: Ind) -> Option<UnaryType> {
        let mut ty = UnaryType(0);
        let mut seen = 0u64;
        for c in self.asserted(a) {
            ty = ty.with(c);
            seen |= 1 << c.pair();
        }
        if seen.count_ones() as usize == self.sig.pair_count() {
            Some(ty)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Features {
    pub nominals: bool,
    pub inverses: bool,
    pub transitive: bool,
    pub functional: bool,
}

/// Logic selection for the driver. `Auto` picks the weakest fragment the
/// input fits in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Logic {
    Auto,
    Alcoi,
    Soi,
    Sof,
    Alcif,
    Sif,
}

/// Which decision procedure applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Procedure {
    /// Forest-automaton procedure; `functional` selects the extra
    /// functionality components.
    Soi { functional: bool },
    /// Tree-partition / type-elimination procedure.
    Sif,
}

/// Validates the KB against the requested logic and picks a procedure.
pub fn select_procedure(kb: &KnowledgeBase, logic: Logic) -> Result<Procedure, KbError> {
    kb.validate_roles()?;
    let f = kb.features();
    let check_sof = || -> Result<(), KbError> {
        for ci in &kb.tbox {
            if let NormalCi::ValueRestr(_, r, _) | NormalCi::ExistRestr(_, r, _) = ci {
                if r.is_inverse() && !kb.sig.role_decl(r.base()).name.starts_with('_') {
                    return Err(KbError::InverseInSof(kb.sig.role_name(*r)));
                }
            }
        }
        Ok(())
    };
    match logic {
        Logic::Auto => {
            if !f.functional {
                Ok(Procedure::Soi { functional: false })
            } else if !f.inverses {
                check_sof()?;
                Ok(Procedure::Soi { functional: true })
            } else if !f.nominals {
                Ok(Procedure::Sif)
            } else {
                Err(KbError::OutsideFragments)
            }
        }
        Logic::Alcoi | Logic::Soi => {
            if f.functional {
                Err(KbError::OutsideFragments)
            } else {
                Ok(Procedure::Soi { functional: false })
            }
        }
        Logic::Sof => {
            check_sof()?;
            Ok(Procedure::Soi { functional: f.functional })
        }
        Logic::Alcif | Logic::Sif => {
            if f.nominals {
                Err(KbError::NominalInSif(
                    kb.sig
                        .nominals()
                        .iter()
                        .next()
                        .map(|&a| kb.sig.individual_name(a).to_string())
                        .unwrap_or_default(),
                ))
            } else {
                Ok(Procedure::Sif)
            }
        }
    }
}

/// Bottom-up structural transformation into the four normal forms.
///
/// Subexpressions are named polarity-aware: a defining inclusion is
/// emitted only in the direction the occurrence needs, so the output
/// matches what one would write by hand. Fresh names are generated
/// deterministically with prefix `_Q`.
pub struct Normalizer<'a> {
    sig: &'a mut Signature,
    out: Vec<NormalCi>,
    /// (expr, polarity) → name already introduced. Polarity 0 = needs
    /// `X ⊑ E`, 1 = needs `E ⊑ X`.
    memo: BTreeMap<(String, bool), ConceptId>,
}

impl<'a> Normalizer<'a> {
    pub fn new(sig: &'a mut Signature) -> Self {
        Normalizer { sig, out: Vec::new(), memo: BTreeMap::new() }
    }

    pub fn finish(self) -> Vec<NormalCi> {
        self.out
    }

    pub fn add_ci(&mut self, lhs: &ConceptExpr, rhs: &ConceptExpr) -> Result<(), KbError> {
        // Fast paths for shapes that are already normal.
        if let Some(conj) = as_literal_conj(lhs) {
            if let Some(disj) = as_literal_disj(rhs) {
                self.out.push(NormalCi::Subsume(conj, disj));
                return Ok(());
            }
            match rhs {
                ConceptExpr::Exists(r, e) => {
                    let a = self.conj_name(&conj);
                    let b = self.name(e, true)?;
                    self.out.push(NormalCi::ExistRestr(a, *r, b));
                    return Ok(());
                }
                // `not some r. E` is `∀r.¬E`.
                ConceptExpr::Not(inner) => {
                    if let ConceptExpr::Exists(r, e) = &**inner {
                        let a = self.conj_name(&conj);
                        let b = self.name(e, false)?;
                        self.out.push(NormalCi::ValueRestr(a, *r, b.complement()));
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        let l = self.name(lhs, false)?;
        let r = self.name(rhs, true)?;
        self.out.push(NormalCi::Subsume(vec![l], vec![r]));
        Ok(())
    }

    /// A name subsuming a conjunction of literals, for use on the left of
    /// a restriction: the empty conjunction gets a shared `⊤`-name.
    fn conj_name(&mut self, conj: &[ConceptId]) -> ConceptId {
        if conj.len() == 1 {
            return conj[0];
        }
        let key = (format!("conj{conj:?}"), false);
        if let Some(&c) = self.memo.get(&key) {
            return c;
        }
        let x = self.sig.fresh_concept("_Q");
        self.out.push(NormalCi::Subsume(conj.to_vec(), vec![x]));
        self.memo.insert(key, x);
        x
    }

    /// Returns a name `X` for `e`; if `upper`, emits `X ⊑ e`-style
    /// definitions (for occurrences on the right of `⊑`), otherwise
    /// `e ⊑ X`.
    fn name(&mut self, e: &ConceptExpr, upper: bool) -> Result<ConceptId, KbError> {
        if let Some(c) = as_literal(e) {
            return Ok(c);
        }
        let key = (format!("{e:?}"), upper);
        if let Some(&c) = self.memo.get(&key) {
            return Ok(c);
        }
        let x = match e {
            ConceptExpr::Top => {
                let x = self.sig.fresh_concept("_Q");
                // ⊤ ⊑ X covers both polarities.
                self.out.push(NormalCi::Subsume(vec![], vec![x]));
                self.memo.insert((key.0.clone(), !upper), x);
                x
            }
            ConceptExpr::Not(inner) => self.name(inner, !upper)?.complement(),
            ConceptExpr::Nominal(a) => {
                self.sig.mark_nominal(*a);
                let x = self.sig.fresh_concept("_Q");
                // NominalEq is an equivalence, so it serves both polarities.
                self.out.push(NormalCi::NominalEq(x, *a));
                self.memo.insert((key.0.clone(), !upper), x);
                x
            }
            ConceptExpr::And(a, b) => {
                let (na, nb) = (self.name(a, upper)?, self.name(b, upper)?);
                let x = self.sig.fresh_concept("_Q");
                if upper {
                    self.out.push(NormalCi::Subsume(vec![x], vec![na]));
                    self.out.push(NormalCi::Subsume(vec![x], vec![nb]));
                } else {
                    self.out.push(NormalCi::Subsume(vec![na, nb], vec![x]));
                }
                x
            }
            ConceptExpr::Exists(r, inner) => {
                let n = self.name(inner, upper)?;
                let x = self.sig.fresh_concept("_Q");
                if upper {
                    self.out.push(NormalCi::ExistRestr(x, *r, n));
                } else {
                    // ∃r.n ⊑ X  ⟺  X̄ ⊑ ∀r.n̄
                    self.out.push(NormalCi::ValueRestr(x.complement(), *r, n.complement()));
                }
                x
            }
            ConceptExpr::Atom(_) => unreachable!(),
        };
        self.memo.insert(key, x);
        Ok(x)
    }
}

fn as_literal(e: &ConceptExpr) -> Option<ConceptId> {
    match e {
        ConceptExpr::Atom(c) => Some(*c),
        ConceptExpr::Not(inner) => as_literal(inner).map(ConceptId::complement),
        _ => None,
    }
}

fn as_literal_conj(e: &ConceptExpr) -> Option<Vec<ConceptId>> {
    match e {
        ConceptExpr::Top => Some(vec![]),
        ConceptExpr::And(a, b) => {
            let mut l = as_literal_conj(a)?;
            l.extend(as_literal_conj(b)?);
            Some(l)
        }
        _ => as_literal(e).map(|c| vec![c]),
    }
}

fn as_literal_disj(e: &ConceptExpr) -> Option<Vec<ConceptId>> {
    // A disjunction is `¬(¬a ⊓ ¬b)`; `⊥` is `¬⊤`.
    match e {
        ConceptExpr::Not(inner) => match &**inner {
            ConceptExpr::Top => Some(vec![]),
            ConceptExpr::And(a, b) => {
                let mut l = as_literal_disj(&ConceptExpr::not((**a).clone()))?;
                l.extend(as_literal_disj(&ConceptExpr::not((**b).clone()))?);
                Some(l)
            }
            _ => as_literal(e).map(|c| vec![c]),
        },
        _ => as_literal(e).map(|c| vec![c]),
    }
}

/// Normalises raw inclusions into `kb.tbox`, extending the signature with
/// fresh names as needed. Already-normal inclusions pass through.
pub fn normalize(
    sig: &mut Signature,
    raw: &[(ConceptExpr, ConceptExpr)],
) -> Result<Vec<NormalCi>, KbError> {
    let mut n = Normalizer::new(sig);
    for (l, r) in raw {
        n.add_ci(l, r)?;
    }
    let out = n.finish();
    if sig.pair_count() > 63 {
        return Err(KbError::TooManyConcepts(sig.pair_count()));
    }
    Ok(out)
}

/// Output of [`preprocess_soi`]: the shared preprocessed core plus one
/// completed KB per coherent assignment of full nominal types.
pub struct SoiPreprocessed {
    /// The preprocessed KB before nominal completion.
    pub core: KnowledgeBase,
    /// One KB per nominal-type completion; ABoxes fully specify nominals.
    pub completions: Vec<KnowledgeBase>,
    /// Names `A_{ρ,a}`: `(role, nominal) → marker`.
    pub markers: BTreeMap<(RoleId, Ind), ConceptId>,
    /// Names `N_a` with `N_a ≡ {a}`.
    pub nominal_names: BTreeMap<Ind, ConceptId>,
}

/// Preprocessing for the forest-automaton procedure:
///
/// 1. ensures at least one individual exists;
/// 2. eliminates ABox role assertions through nominals (`r(a,b)` becomes
///    `N_a ⊑ ∃r.N_b` with `N_a ≡ {a}`, `N_b ≡ {b}`);
/// 3. for every `A ⊑ ∀ρ.B` with `ρ` transitive adds a propagating copy
///    `B'` with `A ⊑ ∀ρ.B'`, `B' ⊑ ∀ρ.B'`, `B' ⊑ B`;
/// 4. introduces nominal-adjacency markers `A_{ρ,a} ≡ ∃ρ.N_a` and
///    `N_a ⊑ ∀ρ.A_{ρ⁻,a}` for every occurring role direction;
/// 5. enumerates all coherent completions of the nominal types.
///
/// A completion is coherent when each nominal's full type satisfies the
/// quantifier-free inclusions, respects nominal-equality names, and the
/// markers are symmetric and compatible with the value restrictions.
pub fn preprocess_soi(kb: &KnowledgeBase) -> Result<SoiPreprocessed, KbError> {
    let mut kb = kb.clone();
    if kb.sig.individual_count() == 0 {
        kb.sig.fresh_individual("_anon");
    }

    // Step 2: role assertions → nominal inclusions.
    let mut nominal_names: BTreeMap<Ind, ConceptId> = BTreeMap::new();
    for ci in &kb.tbox {
        if let NormalCi::NominalEq(c, a) = ci {
            nominal_names.entry(*a).or_insert(*c);
        }
    }
    let assertions: Vec<_> = kb.abox_roles.iter().cloned().collect();
    for (base, a, b) in assertions {
        for ind in [a, b] {
            if !nominal_names.contains_key(&ind) {
                let name = kb.sig.fresh_concept("_O");
                kb.sig.mark_nominal(ind);
                kb.tbox.push(NormalCi::NominalEq(name, ind));
                nominal_names.insert(ind, name);
            }
        }
        kb.tbox.push(NormalCi::ExistRestr(nominal_names[&a], RoleId::named(base), nominal_names[&b]));
    }
    kb.abox_roles.clear();
    // Nominals mentioned only in `{a}` concepts also need their name.
    for a in kb.sig.nominals().clone() {
        if !nominal_names.contains_key(&a) {
            let name = kb.sig.fresh_concept("_O");
            kb.tbox.push(NormalCi::NominalEq(name, a));
            nominal_names.insert(a, name);
        }
    }

    // Step 3: propagation copies for transitive value restrictions,
    // one fresh name per (role, filler).
    let mut prop: BTreeMap<(RoleId, ConceptId), ConceptId> = BTreeMap::new();
    let targets: Vec<_> = kb
        .tbox
        .iter()
        .filter_map(|ci| match ci {
            NormalCi::ValueRestr(a, r, b) if kb.sig.is_transitive(*r) => Some((*a, *r, *b)),
            _ => None,
        })
        .collect();
    for (a, r, b) in targets {
        let bp = *prop.entry((r, b)).or_insert_with(|| kb.sig.fresh_concept("_T"));
        kb.tbox.push(NormalCi::ValueRestr(a, r, bp));
        if !kb.tbox.contains(&NormalCi::ValueRestr(bp, r, bp)) {
            kb.tbox.push(NormalCi::ValueRestr(bp, r, bp));
            kb.tbox.push(NormalCi::Subsume(vec![bp], vec![b]));
        }
    }

    // Step 4: nominal-adjacency markers over every occurring direction.
    let mut markers: BTreeMap<(RoleId, Ind), ConceptId> = BTreeMap::new();
    let mut dirs: BTreeSet<RoleId> = BTreeSet::new();
    for r in kb.occurring_roles() {
        dirs.insert(r);
        dirs.insert(r.inverse());
    }
    let noms: Vec<Ind> = kb.sig.nominals().iter().cloned().collect();
    for &a in &noms {
        for &rho in &dirs {
            let m = kb.sig.fresh_concept("_M");
            markers.insert((rho, a), m);
        }
    }
    for &a in &noms {
        let na = nominal_names[&a];
        for &rho in &dirs {
            let m = markers[&(rho, a)];
            kb.tbox.push(NormalCi::ExistRestr(m, rho, na));
            kb.tbox.push(NormalCi::ValueRestr(m.complement(), rho, na.complement()));
            kb.tbox.push(NormalCi::ValueRestr(na, rho, markers[&(rho.inverse(), a)]));
        }
    }

    if kb.sig.pair_count() > 63 {
        return Err(KbError::TooManyConcepts(kb.sig.pair_count()));
    }

    // Step 5: nominal completions.
    let completions = complete_nominals(&kb, &markers);
    Ok(SoiPreprocessed { completions, core: kb, markers, nominal_names })
}

/// Enumerates coherent full nominal types by backtracking; returns one KB
/// per completion, ABox extended accordingly.
fn complete_nominals(
    kb: &KnowledgeBase,
    markers: &BTreeMap<(RoleId, Ind), ConceptId>,
) -> Vec<KnowledgeBase> {
    let noms: Vec<Ind> = kb.sig.nominals().iter().cloned().collect();
    if noms.is_empty() {
        return vec![kb.clone()];
    }
    // Candidate types per nominal: satisfy QF inclusions, the asserted
    // concepts, and all nominal-equality names.
    let mut cand: Vec<Vec<UnaryType>> = Vec::new();
    for &a in &noms {
        let asserted = kb.asserted(a);
        let types: Vec<UnaryType> = kb
            .unary_types()
            .into_iter()
            .filter(|&ty| {
                asserted.iter().all(|&c| ty.contains(c))
                    && kb.tbox.iter().all(|ci| match ci {
                        NormalCi::Subsume(conj, disj) => kb.type_satisfies_qf(ty, conj, disj),
                        NormalCi::NominalEq(c, b) => ty.contains(*c) == (*b == a),
                        _ => true,
                    })
            })
            .collect();
        cand.push(types);
    }
    let value_restrs: Vec<(ConceptId, RoleId, ConceptId)> = kb
        .tbox
        .iter()
        .filter_map(|ci| match ci {
            NormalCi::ValueRestr(a, r, b) => Some((*a, *r, *b)),
            _ => None,
        })
        .collect();
    // Pairwise coherence between completed nominals i (earlier) and j:
    // marker symmetry and value restrictions across asserted edges.
    let coherent = |tys: &[UnaryType], i: usize, j: usize| -> bool {
        let (a, b) = (noms[i], noms[j]);
        let (ta, tb) = (tys[i], tys[j]);
        for (&(rho, tgt), &m) in markers {
            if tgt == b {
                // edge a --ρ--> b recorded on a must match b's view
                let back = markers[&(rho.inverse(), a)];
                if ta.contains(m) != tb.contains(back) {
                    return false;
                }
            }
            if tgt == a {
                let back = markers[&(rho.inverse(), b)];
                if tb.contains(m) != ta.contains(back) {
                    return false;
                }
            }
        }
        // A ⊑ ∀ρ.B over nominal-to-nominal edges, both orientations.
        for &(c, rho, d) in &value_restrs {
            for (dst, ts, td) in [(b, ta, tb), (a, tb, ta)] {
                let edge = ts.contains(markers[&(rho, dst)]);
                if edge && ts.contains(c) && !td.contains(d) {
                    return false;
                }
            }
        }
        true
    };
    // Self-coherence: marker self-loops and value restrictions on a --ρ--> a.
    let self_ok = |i: usize, ty: UnaryType| -> bool {
        let a = noms[i];
        for &(c, rho, d) in &value_restrs {
            if ty.contains(markers[&(rho, a)]) && ty.contains(c) && !ty.contains(d) {
                return false;
            }
        }
        // a --ρ--> a seen from both sides is the same edge.
        markers
            .iter()
            .filter(|((rho, tgt), _)| *tgt == a && !rho.is_inverse())
            .all(|((rho, _), &m)| ty.contains(m) == ty.contains(markers[&(rho.inverse(), a)]))
    };

    let mut out = Vec::new();
    let mut chosen: Vec<UnaryType> = Vec::new();
    fn rec(
        idx: usize,
        noms: &[Ind],
        cand: &[Vec<UnaryType>],
        chosen: &mut Vec<UnaryType>,
        self_ok: &dyn Fn(usize, UnaryType) -> bool,
        coherent: &dyn Fn(&[UnaryType], usize, usize) -> bool,
        out: &mut Vec<Vec<UnaryType>>,
    ) {
        if idx == noms.len() {
            out.push(chosen.clone());
            return;
        }
        for &ty in &cand[idx] {
            if !self_ok(idx, ty) {
                continue;
            }
            chosen.push(ty);
            if (0..idx).all(|j| coherent(chosen, j, idx)) {
                rec(idx + 1, noms, cand, chosen, self_ok, coherent, out);
            }
            chosen.pop();
        }
    }
    let mut sets = Vec::new();
    rec(0, &noms, &cand, &mut chosen, &self_ok, &coherent, &mut sets);
    for tys in sets {
        let mut k = kb.clone();
        for (i, &a) in noms.iter().enumerate() {
            for c in tys[i].members(k.sig.pair_count()) {
                k.abox_concepts.insert((a, c));
            }
        }
        out.push(k);
    }
    out
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::textio::write_kb(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_abc() -> (Signature, ConceptId, ConceptId, ConceptId, RoleId) {
        let mut sig = Signature::new();
        let a = sig.add_concept("A").unwrap();
        let b = sig.add_concept("B").unwrap();
        let c = sig.add_concept("C").unwrap();
        let r = sig.add_role("r").unwrap();
        (sig, a, b, c, r)
    }

    #[test]
    fn complement_is_involutive() {
        let c = ConceptId(4);
        assert_eq!(c.complement().complement(), c);
        assert_ne!(c.complement(), c);
    }

    #[test]
    fn empty_tbox_normalizes_to_empty() {
        let mut sig = Signature::new();
        let out = normalize(&mut sig, &[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(sig.pair_count(), 0);
    }

    #[test]
    fn negated_atom_uses_complement_name() {
        let (mut sig, a, b, _, _) = sig_abc();
        let raw = vec![(ConceptExpr::Atom(a), ConceptExpr::not(ConceptExpr::Atom(b)))];
        let before = sig.pair_count();
        let out = normalize(&mut sig, &raw).unwrap();
        assert_eq!(out, vec![NormalCi::Subsume(vec![a], vec![b.complement()])]);
        assert_eq!(sig.pair_count(), before, "complementation must not mint names");
    }

    #[test]
    fn exists_conjunction_introduces_one_name() {
        let (mut sig, a, b, c, r) = sig_abc();
        let raw = vec![(
            ConceptExpr::Atom(a),
            ConceptExpr::exists(r, ConceptExpr::and(ConceptExpr::Atom(b), ConceptExpr::Atom(c))),
        )];
        let out = normalize(&mut sig, &raw).unwrap();
        let x = sig.concept_by_name("_Q3").unwrap();
        assert_eq!(
            out,
            vec![
                NormalCi::Subsume(vec![x], vec![b]),
                NormalCi::Subsume(vec![x], vec![c]),
                NormalCi::ExistRestr(a, r, x),
            ]
        );
    }

    #[test]
    fn normalize_is_idempotent_on_its_output() {
        let (mut sig, a, b, c, r) = sig_abc();
        let raw = vec![(
            ConceptExpr::Atom(a),
            ConceptExpr::exists(r, ConceptExpr::and(ConceptExpr::Atom(b), ConceptExpr::Atom(c))),
        )];
        let out = normalize(&mut sig, &raw).unwrap();
        // Re-express each normal CI as raw and normalise again.
        let again: Vec<(ConceptExpr, ConceptExpr)> = out
            .iter()
            .map(|ci| match ci {
                NormalCi::Subsume(conj, disj) => {
                    let lhs = conj
                        .iter()
                        .map(|&c| ConceptExpr::Atom(c))
                        .reduce(ConceptExpr::and)
                        .unwrap_or(ConceptExpr::Top);
                    let rhs = disj
                        .iter()
                        .map(|&c| ConceptExpr::Atom(c))
                        .reduce(|x, y| ConceptExpr::not(ConceptExpr::and(ConceptExpr::not(x), ConceptExpr::not(y))))
                        .unwrap_or(ConceptExpr::not(ConceptExpr::Top));
                    (lhs, rhs)
                }
                NormalCi::ExistRestr(a, r, b) => {
                    (ConceptExpr::Atom(*a), ConceptExpr::exists(*r, ConceptExpr::Atom(*b)))
                }
                NormalCi::ValueRestr(a, r, b) => (
                    ConceptExpr::Atom(*a),
                    ConceptExpr::not(ConceptExpr::exists(*r, ConceptExpr::not(ConceptExpr::Atom(*b)))),
                ),
                NormalCi::NominalEq(a, i) => (ConceptExpr::Atom(*a), ConceptExpr::Nominal(*i)),
            })
            .collect();
        let mut sig2 = sig.clone();
        let out2 = normalize(&mut sig2, &again).unwrap();
        assert_eq!(out2.len(), out.len());
        assert_eq!(sig2.pair_count(), sig.pair_count());
    }

    #[test]
    fn unary_type_counts() {
        let (sig, ..) = sig_abc();
        let kb = KnowledgeBase { sig, ..Default::default() };
        assert_eq!(kb.unary_types().len(), 8);
        let kb0 = KnowledgeBase::default();
        assert_eq!(kb0.unary_types(), vec![UnaryType(0)]);
    }

    #[test]
    fn transitive_functional_conflict_detected() {
        let mut sig = Signature::new();
        let r = sig.add_role("r").unwrap();
        sig.set_transitive(r);
        sig.set_functional(r);
        let kb = KnowledgeBase { sig, ..Default::default() };
        assert!(matches!(kb.validate_roles(), Err(KbError::TransitiveFunctional(_))));
    }

    #[test]
    fn preprocess_no_nominals_is_singleton() {
        let (mut sig, a, b, _, r) = sig_abc();
        let tbox = normalize(&mut sig, &[(ConceptExpr::Atom(a), ConceptExpr::exists(r, ConceptExpr::Atom(b)))]).unwrap();
        let ind = sig.add_individual("i").unwrap();
        let mut kb = KnowledgeBase { sig, tbox, ..Default::default() };
        kb.abox_concepts.insert((ind, a));
        let pre = preprocess_soi(&kb).unwrap();
        assert_eq!(pre.completions.len(), 1);
        assert_eq!(pre.completions[0].tbox, kb.tbox);
    }

    #[test]
    fn preprocess_single_nominal_two_user_completions() {
        // One nominal, one user pair, no roles: completions differ only in A(a).
        let mut sig = Signature::new();
        let a = sig.add_concept("A").unwrap();
        let i = sig.add_individual("a").unwrap();
        let raw = vec![(ConceptExpr::Nominal(i), ConceptExpr::Top)];
        let tbox = normalize(&mut sig, &raw).unwrap();
        let kb = KnowledgeBase { sig, tbox, ..Default::default() };
        let pre = preprocess_soi(&kb).unwrap();
        assert_eq!(pre.completions.len(), 2);
        let with_a: Vec<bool> = pre
            .completions
            .iter()
            .map(|k| k.abox_concepts.contains(&(i, a)))
            .collect();
        assert!(with_a.contains(&true) && with_a.contains(&false));
    }

    #[test]
    fn preprocess_eliminates_role_assertions() {
        let (mut sig, a, _, _, _) = sig_abc();
        let r = sig.role_by_name("r").unwrap();
        let x = sig.add_individual("x").unwrap();
        let y = sig.add_individual("y").unwrap();
        let mut kb = KnowledgeBase { sig, ..Default::default() };
        kb.abox_concepts.insert((x, a));
        kb.abox_roles.insert((r.base(), x, y));
        let pre = preprocess_soi(&kb).unwrap();
        assert!(pre.core.abox_roles.is_empty());
        assert!(pre.core.sig.is_nominal(x) && pre.core.sig.is_nominal(y));
        assert!(pre
            .core
            .tbox
            .iter()
            .any(|ci| matches!(ci, NormalCi::ExistRestr(_, rr, _) if *rr == r)));
    }

    #[test]
    fn transitive_value_restriction_gets_propagation_copy() {
        let (mut sig, a, b, _, r) = sig_abc();
        sig.set_transitive(r);
        let raw = vec![(
            ConceptExpr::Atom(a),
            ConceptExpr::not(ConceptExpr::exists(r, ConceptExpr::not(ConceptExpr::Atom(b)))),
        )];
        let tbox = normalize(&mut sig, &raw).unwrap();
        assert_eq!(tbox, vec![NormalCi::ValueRestr(a, r, b)]);
        let mut kb = KnowledgeBase { sig, tbox, ..Default::default() };
        kb.sig.add_individual("i").unwrap();
        let pre = preprocess_soi(&kb).unwrap();
        let core = &pre.core;
        let bp = core.sig.concept_by_name("_T3").unwrap();
        assert!(core.tbox.contains(&NormalCi::ValueRestr(a, r, bp)));
        assert!(core.tbox.contains(&NormalCi::ValueRestr(bp, r, bp)));
        assert!(core.tbox.contains(&NormalCi::Subsume(vec![bp], vec![b])));
    }
}
