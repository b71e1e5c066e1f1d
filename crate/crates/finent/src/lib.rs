//! Finite query entailment for expressive description logics with
//! transitive roles.
//!
//! This crate decides whether a union of Boolean conjunctive queries is
//! entailed by a knowledge base over *finite* models only. Finite and
//! unrestricted entailment genuinely differ once transitive roles are
//! around: a TBox like `A ⊑ ∃r.A` with `Tr(r)` has only infinite models
//! avoiding an `r`-cycle, so a query asking for `r(x,x)` is finitely
//! entailed even though it is not entailed classically.
//!
//! The engine covers three fragments and their sub-fragments:
//!
//! * transitive roles + nominals + inverses ([`soi`]),
//! * transitive roles + nominals + functional roles (`soi` with
//!   functionality components),
//! * transitive roles + inverses + functional roles ([`sif`]).
//!
//! The decision procedures reduce entailment to emptiness of Büchi
//! automata over clique-forest encodings ([`forest`], [`automata`]) or to
//! a type-elimination fixpoint ([`sif`]). Negative verdicts are certified:
//! a regular counter-example is extracted from the automaton, made finite
//! by the coloured-blocking construction ([`blocking`]), and re-verified
//! model-theoretically ([`interp`]). A bounded exhaustive model finder
//! ([`oracle`]) provides ground truth at small scale and doubles as the
//! backend for the non-transitive side of the [`sif`] procedure.
//!
//! Input and output formats, and the command-line driver built on them,
//! live in [`textio`] and the `finent` binary.

pub mod automata;
pub mod blocking;
pub mod forest;
pub mod interp;
pub mod kb;
pub mod oracle;
pub mod query;
pub mod sif;
pub mod soi;
pub mod textio;

mod guide;

pub use kb::{KnowledgeBase, Logic, Signature};
pub use query::{Cq, Ucq};
