//! Engine for multi-modal K extended with refinement quantifiers, simulation
//! quantifiers, and the origin modality.
//!
//! The crate provides:
//!
//! * [`syntax`] — the formula AST, a concrete grammar with parser and
//!   printer, negation normal form, and the modal disjunctive/cover normal
//!   forms used by the elimination procedures.
//! * [`kripke`] — finite Kripke models, the mutual factual ignorance model,
//!   JSON (de)serialization, and exhaustive small-model enumeration.
//! * [`relations`] — largest bisimulation / simulation / refinement between
//!   two finite models by greatest-fixpoint pruning.
//! * [`semantics`] — model checking, including bounded witness search for
//!   the quantifier diamonds.
//! * [`reduce`] — elimination of the quantifier and origin modalities down
//!   to plain multi-modal K by reduction-axiom rewriting.
//! * [`tableau`] — satisfiability and validity for quantifier-free K.
//! * [`oracle`] — brute-force verification suites: axiom schema
//!   instantiation, preservation properties, and cross-checks between the
//!   independent pipelines.

pub mod kripke;
pub mod oracle;
pub mod reduce;
pub mod relations;
pub mod semantics;
pub mod syntax;
pub mod tableau;

pub use syntax::{AgentName, AtomName, Formula};
