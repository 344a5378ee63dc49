use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Words that can never name an atom or an agent.
pub(crate) const RESERVED: [&str; 5] = ["true", "false", "ref", "sim", "orig"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NameError {
    #[error("empty name")]
    Empty,
    #[error("invalid name {0:?}: expected [a-z][a-zA-Z0-9_]*")]
    BadShape(String),
    #[error("{0:?} is a reserved word")]
    Reserved(String),
}

fn check_name(s: &str) -> Result<(), NameError> {
    let mut chars = s.chars();
    match chars.next() {
        None => return Err(NameError::Empty),
        Some(c) if !c.is_ascii_lowercase() => return Err(NameError::BadShape(s.to_string())),
        Some(_) => {}
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(NameError::BadShape(s.to_string()));
    }
    if RESERVED.contains(&s) {
        return Err(NameError::Reserved(s.to_string()));
    }
    Ok(())
}

/// A propositional variable name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomName(String);

impl AtomName {
    pub fn new(s: impl Into<String>) -> Result<Self, NameError> {
        let s = s.into();
        check_name(&s)?;
        Ok(AtomName(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AtomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An agent name. Atoms and agents live in distinct namespaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentName(String);

impl AgentName {
    pub fn new(s: impl Into<String>) -> Result<Self, NameError> {
        let s = s.into();
        check_name(&s)?;
        Ok(AgentName(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A formula of the full language: booleans, per-agent box/diamond, the
/// refinement and simulation quantifiers, and the origin modality.
///
/// `And`/`Or` are n-ary with at least two operands; the smart constructors
/// flatten, deduplicate, sort, and absorb constants, so two formulas built
/// through them are structurally equal whenever they are equal up to
/// associativity, commutativity and idempotence of the n-ary connectives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(AtomName),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// `[a]f`
    Box(AgentName, Box<Formula>),
    /// `<a>f`, definitionally `~[a]~f`
    Dia(AgentName, Box<Formula>),
    /// `[ref]f`: after any refinement, `f`
    RefBox(Box<Formula>),
    /// `<ref>f`, definitionally `~[ref]~f`
    RefDia(Box<Formula>),
    /// `[sim]f`: after any simulation, `f`
    SimBox(Box<Formula>),
    /// `<sim>f`, definitionally `~[sim]~f`
    SimDia(Box<Formula>),
    /// `[orig]f`: `f` holds in the mutual factual ignorance model
    Origin(Box<Formula>),
}

use Formula as F;

impl Formula {
    pub fn atom(name: AtomName) -> Self {
        F::Atom(name)
    }

    /// `~f`, with double negation and constants folded away.
    pub fn not(f: Formula) -> Self {
        match f {
            F::True => F::False,
            F::False => F::True,
            F::Not(g) => *g,
            other => F::Not(Box::new(other)),
        }
    }

    /// n-ary conjunction: flattens, sorts, deduplicates, absorbs constants.
    pub fn and(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut set = BTreeSet::new();
        for item in items {
            match item {
                F::True => {}
                F::False => return F::False,
                F::And(xs) => set.extend(xs),
                other => {
                    set.insert(other);
                }
            }
        }
        match set.len() {
            0 => F::True,
            1 => set.into_iter().next().unwrap(),
            _ => F::And(set.into_iter().collect()),
        }
    }

    /// n-ary disjunction: flattens, sorts, deduplicates, absorbs constants.
    pub fn or(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut set = BTreeSet::new();
        for item in items {
            match item {
                F::False => {}
                F::True => return F::True,
                F::Or(xs) => set.extend(xs),
                other => {
                    set.insert(other);
                }
            }
        }
        match set.len() {
            0 => F::False,
            1 => set.into_iter().next().unwrap(),
            _ => F::Or(set.into_iter().collect()),
        }
    }

    /// `f -> g`, desugared to `~f | g`.
    pub fn implies(f: Formula, g: Formula) -> Self {
        F::or([F::not(f), g])
    }

    /// `f <-> g`, desugared to `(f -> g) & (g -> f)`.
    pub fn iff(f: Formula, g: Formula) -> Self {
        F::and([
            F::implies(f.clone(), g.clone()),
            F::implies(g, f),
        ])
    }

    pub fn box_(agent: AgentName, f: Formula) -> Self {
        F::Box(agent, Box::new(f))
    }

    pub fn dia(agent: AgentName, f: Formula) -> Self {
        F::Dia(agent, Box::new(f))
    }

    pub fn ref_box(f: Formula) -> Self {
        F::RefBox(Box::new(f))
    }

    pub fn ref_dia(f: Formula) -> Self {
        F::RefDia(Box::new(f))
    }

    pub fn sim_box(f: Formula) -> Self {
        F::SimBox(Box::new(f))
    }

    pub fn sim_dia(f: Formula) -> Self {
        F::SimDia(Box::new(f))
    }

    pub fn origin(f: Formula) -> Self {
        F::Origin(Box::new(f))
    }

    /// The cover `∇_a Φ`: `⋀_{f∈Φ} <a>f & [a](⋁Φ)`. An empty `Φ` yields `[a]false`.
    pub fn cover(agent: AgentName, members: impl IntoIterator<Item = Formula>) -> Self {
        let members: Vec<Formula> = members.into_iter().collect();
        let mut conjuncts: Vec<Formula> = members
            .iter()
            .map(|f| F::dia(agent.clone(), f.clone()))
            .collect();
        conjuncts.push(F::box_(agent, F::or(members)));
        F::and(conjuncts)
    }

    /// Box-nesting depth: quantifiers and the origin modality are
    /// transparent, each `[a]`/`<a>` adds one.
    pub fn modal_depth(&self) -> u32 {
        match self {
            F::True | F::False | F::Atom(_) => 0,
            F::Not(g) | F::RefBox(g) | F::RefDia(g) | F::SimBox(g) | F::SimDia(g)
            | F::Origin(g) => g.modal_depth(),
            F::And(xs) | F::Or(xs) => xs.iter().map(|x| x.modal_depth()).max().unwrap_or(0),
            F::Box(_, g) | F::Dia(_, g) => g.modal_depth() + 1,
        }
    }

    /// Negation normal form: negation pushed to atoms, quantifier and
    /// origin modalities dualized through the defining abbreviations.
    pub fn to_nnf(&self) -> Formula {
        self.nnf(true)
    }

    fn nnf(&self, positive: bool) -> Formula {
        match self {
            F::True => {
                if positive {
                    F::True
                } else {
                    F::False
                }
            }
            F::False => {
                if positive {
                    F::False
                } else {
                    F::True
                }
            }
            F::Atom(_) => {
                if positive {
                    self.clone()
                } else {
                    F::Not(Box::new(self.clone()))
                }
            }
            F::Not(g) => g.nnf(!positive),
            F::And(xs) => {
                let mapped = xs.iter().map(|x| x.nnf(positive));
                if positive {
                    F::and(mapped)
                } else {
                    F::or(mapped)
                }
            }
            F::Or(xs) => {
                let mapped = xs.iter().map(|x| x.nnf(positive));
                if positive {
                    F::or(mapped)
                } else {
                    F::and(mapped)
                }
            }
            F::Box(a, g) => {
                if positive {
                    F::box_(a.clone(), g.nnf(true))
                } else {
                    F::dia(a.clone(), g.nnf(false))
                }
            }
            F::Dia(a, g) => {
                if positive {
                    F::dia(a.clone(), g.nnf(true))
                } else {
                    F::box_(a.clone(), g.nnf(false))
                }
            }
            F::RefBox(g) => {
                if positive {
                    F::ref_box(g.nnf(true))
                } else {
                    F::ref_dia(g.nnf(false))
                }
            }
            F::RefDia(g) => {
                if positive {
                    F::ref_dia(g.nnf(true))
                } else {
                    F::ref_box(g.nnf(false))
                }
            }
            F::SimBox(g) => {
                if positive {
                    F::sim_box(g.nnf(true))
                } else {
                    F::sim_dia(g.nnf(false))
                }
            }
            F::SimDia(g) => {
                if positive {
                    F::sim_dia(g.nnf(true))
                } else {
                    F::sim_box(g.nnf(false))
                }
            }
            // [orig]~f <-> ~[orig]f, so negation passes through.
            F::Origin(g) => F::origin(g.nnf(positive)),
        }
    }

    pub fn atoms(&self) -> BTreeSet<AtomName> {
        let mut acc = BTreeSet::new();
        self.collect_atoms(&mut acc);
        acc
    }

    fn collect_atoms(&self, acc: &mut BTreeSet<AtomName>) {
        match self {
            F::True | F::False => {}
            F::Atom(p) => {
                acc.insert(p.clone());
            }
            F::Not(g) | F::RefBox(g) | F::RefDia(g) | F::SimBox(g) | F::SimDia(g)
            | F::Origin(g) => g.collect_atoms(acc),
            F::And(xs) | F::Or(xs) => xs.iter().for_each(|x| x.collect_atoms(acc)),
            F::Box(_, g) | F::Dia(_, g) => g.collect_atoms(acc),
        }
    }

    pub fn agents(&self) -> BTreeSet<AgentName> {
        let mut acc = BTreeSet::new();
        self.collect_agents(&mut acc);
        acc
    }

    fn collect_agents(&self, acc: &mut BTreeSet<AgentName>) {
        match self {
            F::True | F::False | F::Atom(_) => {}
            F::Not(g) | F::RefBox(g) | F::RefDia(g) | F::SimBox(g) | F::SimDia(g)
            | F::Origin(g) => g.collect_agents(acc),
            F::And(xs) | F::Or(xs) => xs.iter().for_each(|x| x.collect_agents(acc)),
            F::Box(a, g) | F::Dia(a, g) => {
                acc.insert(a.clone());
                g.collect_agents(acc);
            }
        }
    }

    /// Purely propositional (no modalities of any kind).
    pub fn in_l0(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(g) => g.in_l0(),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_l0()),
            _ => false,
        }
    }

    /// Quantifier- and origin-free: only `[a]`/`<a>` modalities.
    pub fn in_lbox(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(g) => g.in_lbox(),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_lbox()),
            F::Box(_, g) | F::Dia(_, g) => g.in_lbox(),
            F::RefBox(_) | F::RefDia(_) | F::SimBox(_) | F::SimDia(_) | F::Origin(_) => false,
        }
    }

    /// `[a]`/`<a>` plus refinement quantifiers only.
    pub fn in_lbox_ref(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(g) => g.in_lbox_ref(),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_lbox_ref()),
            F::Box(_, g) | F::Dia(_, g) | F::RefBox(g) | F::RefDia(g) => g.in_lbox_ref(),
            F::SimBox(_) | F::SimDia(_) | F::Origin(_) => false,
        }
    }

    /// `[a]`/`<a>` plus simulation quantifiers only.
    pub fn in_lbox_sim(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(g) => g.in_lbox_sim(),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_lbox_sim()),
            F::Box(_, g) | F::Dia(_, g) | F::SimBox(g) | F::SimDia(g) => g.in_lbox_sim(),
            F::RefBox(_) | F::RefDia(_) | F::Origin(_) => false,
        }
    }

    /// `[a]`/`<a>` plus the origin modality only.
    pub fn in_lbox_orig(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(g) => g.in_lbox_orig(),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_lbox_orig()),
            F::Box(_, g) | F::Dia(_, g) | F::Origin(g) => g.in_lbox_orig(),
            F::RefBox(_) | F::RefDia(_) | F::SimBox(_) | F::SimDia(_) => false,
        }
    }

    /// The negative fragment `p | ~p | f&f | f|f | <a>f`, preserved along
    /// simulations.
    pub fn in_negative_fragment(&self) -> bool {
        match self {
            F::Atom(_) => true,
            F::Not(g) => matches!(**g, F::Atom(_)),
            F::And(xs) | F::Or(xs) => xs.iter().all(|x| x.in_negative_fragment()),
            F::Dia(_, g) => g.in_negative_fragment(),
            _ => false,
        }
    }

    /// Number of AST nodes; a coarse size measure for caps and tests.
    pub fn size(&self) -> usize {
        match self {
            F::True | F::False | F::Atom(_) => 1,
            F::Not(g) | F::RefBox(g) | F::RefDia(g) | F::SimBox(g) | F::SimDia(g)
            | F::Origin(g) => 1 + g.size(),
            F::And(xs) | F::Or(xs) => 1 + xs.iter().map(|x| x.size()).sum::<usize>(),
            F::Box(_, g) | F::Dia(_, g) => 1 + g.size(),
        }
    }

    /// Semantics-preserving cleanup: constant folding, idempotence,
    /// complement annihilation, absorption, `[a]true -> true`,
    /// `<a>false -> false`, and the constant cases of the quantifier and
    /// origin modalities. Runs bottom-up to a fixpoint.
    pub fn simplify(&self) -> Formula {
        let mut current = self.clone();
        for _ in 0..8 {
            let next = current.simplify_pass();
            if next == current {
                return next;
            }
            current = next;
        }
        current
    }

    fn simplify_pass(&self) -> Formula {
        match self {
            F::True | F::False | F::Atom(_) => self.clone(),
            F::Not(g) => F::not(g.simplify_pass()),
            F::And(xs) => {
                let items: Vec<Formula> = xs.iter().map(|x| x.simplify_pass()).collect();
                let flat = F::and(items);
                let F::And(items) = flat else { return flat };
                // complement pair: x & ~x -> false
                for x in &items {
                    if items.contains(&F::not(x.clone()).to_nnf()) {
                        return F::False;
                    }
                }
                // absorption: x & (x | y) -> x
                let kept: Vec<Formula> = items
                    .iter()
                    .filter(|x| match x {
                        F::Or(ds) => !ds.iter().any(|d| items.contains(d)),
                        _ => true,
                    })
                    .cloned()
                    .collect();
                F::and(kept)
            }
            F::Or(xs) => {
                let items: Vec<Formula> = xs.iter().map(|x| x.simplify_pass()).collect();
                let flat = F::or(items);
                let F::Or(items) = flat else { return flat };
                for x in &items {
                    if items.contains(&F::not(x.clone()).to_nnf()) {
                        return F::True;
                    }
                }
                let kept: Vec<Formula> = items
                    .iter()
                    .filter(|x| match x {
                        F::And(cs) => !cs.iter().any(|c| items.contains(c)),
                        _ => true,
                    })
                    .cloned()
                    .collect();
                F::or(kept)
            }
            F::Box(a, g) => match g.simplify_pass() {
                F::True => F::True,
                g => F::box_(a.clone(), g),
            },
            F::Dia(a, g) => match g.simplify_pass() {
                F::False => F::False,
                g => F::dia(a.clone(), g),
            },
            // <ref>/<sim> and their boxes fix the constants (RQ1/SQ1), and
            // [orig] does too (O1).
            F::RefBox(g) => match g.simplify_pass() {
                c @ (F::True | F::False) => c,
                g => F::ref_box(g),
            },
            F::RefDia(g) => match g.simplify_pass() {
                c @ (F::True | F::False) => c,
                g => F::ref_dia(g),
            },
            F::SimBox(g) => match g.simplify_pass() {
                c @ (F::True | F::False) => c,
                g => F::sim_box(g),
            },
            F::SimDia(g) => match g.simplify_pass() {
                c @ (F::True | F::False) => c,
                g => F::sim_dia(g),
            },
            F::Origin(g) => match g.simplify_pass() {
                c @ (F::True | F::False) => c,
                g => F::origin(g),
            },
        }
    }
}
