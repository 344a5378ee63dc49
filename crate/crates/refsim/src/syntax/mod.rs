//! Formula AST, concrete grammar, printing, structural measures, and the
//! normal forms used by the elimination procedures.

mod formula;
mod normal;
mod parse;
mod print;

pub use formula::{AgentName, AtomName, Formula, NameError};
pub use normal::{modal_dnf, to_modal_dnf, CoverClause, DnfError, DnfForm, ModalClause};
pub use parse::{parse, ParseError};
