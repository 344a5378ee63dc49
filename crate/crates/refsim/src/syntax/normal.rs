//! Modal disjunctive normal form and the cover form.
//!
//! A quantifier-free formula in NNF is rewritten as a disjunction of
//! clauses `π & ⋀_a (<a>χ_1 & .. & <a>χ_l & [a]θ_1 & .. & [a]θ_k)` where
//! `π` is a conjunction of literals. Each clause is then converted to
//! cover form `π & ⋀_a ∇_a Φ_a` with
//! `Φ_a = {χ_1 & ⋀θ, .., χ_l & ⋀θ, ⋀θ}`. An agent with boxes but no
//! diamonds has no cover representation, so `[a]θ` is split as
//! `∇_a{θ} | ∇_a∅` (a K validity: either `a` has a successor or it does
//! not), which may multiply one clause into several.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::formula::{AgentName, AtomName, Formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DnfError {
    #[error("formula contains a quantifier or origin modality: {0}")]
    Quantified(String),
    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),
    #[error("clause cap {cap} exceeded")]
    ClauseCap { cap: usize },
}

/// One conjunctive clause of the modal DNF: a literal valuation plus, per
/// agent, the diamond bodies and box bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ModalClause {
    /// `π` as a map: atom -> polarity. Contradictory clauses are dropped
    /// during construction, so this is always consistent.
    pub lits: BTreeMap<AtomName, bool>,
    pub dias: BTreeMap<AgentName, BTreeSet<Formula>>,
    pub boxes: BTreeMap<AgentName, BTreeSet<Formula>>,
}

impl ModalClause {
    /// Merge two clauses; `None` when the literal parts clash.
    fn merge(mut self, other: ModalClause) -> Option<ModalClause> {
        for (atom, pol) in other.lits {
            match self.lits.insert(atom, pol) {
                Some(old) if old != pol => return None,
                _ => {}
            }
        }
        for (agent, set) in other.dias {
            self.dias.entry(agent).or_default().extend(set);
        }
        for (agent, set) in other.boxes {
            self.boxes.entry(agent).or_default().extend(set);
        }
        Some(self)
    }

    /// `π` as a formula.
    pub fn prop_part(&self) -> Formula {
        Formula::and(self.lits.iter().map(|(atom, pol)| {
            let lit = Formula::Atom(atom.clone());
            if *pol {
                lit
            } else {
                Formula::not(lit)
            }
        }))
    }

    pub fn to_formula(&self) -> Formula {
        let mut conjuncts = vec![self.prop_part()];
        for (agent, bodies) in &self.dias {
            conjuncts.extend(bodies.iter().map(|b| Formula::dia(agent.clone(), b.clone())));
        }
        for (agent, bodies) in &self.boxes {
            conjuncts.extend(bodies.iter().map(|b| Formula::box_(agent.clone(), b.clone())));
        }
        Formula::and(conjuncts)
    }
}

/// A clause in cover form: `π & ⋀_a ∇_a Φ_a & ⋀_{a∈empty} ∇_a ∅`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverClause {
    /// Consistent literal valuation, as in [`ModalClause`].
    pub lits: BTreeMap<AtomName, bool>,
    /// `Φ_a` per agent; every set is nonempty.
    pub covers: BTreeMap<AgentName, BTreeSet<Formula>>,
    /// Agents for which the clause asserts `∇_a ∅`, i.e. `[a]false`.
    pub empty_cover_agents: BTreeSet<AgentName>,
}

impl CoverClause {
    pub fn prop_part(&self) -> Formula {
        Formula::and(self.lits.iter().map(|(atom, pol)| {
            let lit = Formula::Atom(atom.clone());
            if *pol {
                lit
            } else {
                Formula::not(lit)
            }
        }))
    }

    pub fn to_formula(&self) -> Formula {
        let mut conjuncts = vec![self.prop_part()];
        for (agent, members) in &self.covers {
            conjuncts.push(Formula::cover(agent.clone(), members.iter().cloned()));
        }
        for agent in &self.empty_cover_agents {
            conjuncts.push(Formula::box_(agent.clone(), Formula::False));
        }
        Formula::and(conjuncts)
    }
}

/// Disjunction of cover clauses; an empty list denotes `false`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfForm {
    pub clauses: Vec<CoverClause>,
}

impl DnfForm {
    pub fn to_formula(&self) -> Formula {
        Formula::or(self.clauses.iter().map(|c| c.to_formula()))
    }
}

/// Rewrite a quantifier-free NNF formula as a list of modal clauses
/// (disjunction). Contradictory clauses are dropped; the empty list is
/// `false`, a single empty clause is `true`.
pub fn modal_dnf(f: &Formula, max_clauses: usize) -> Result<Vec<ModalClause>, DnfError> {
    let mut clauses = clauses_of(f, max_clauses)?;
    clauses.sort();
    clauses.dedup();
    Ok(clauses)
}

fn clauses_of(f: &Formula, cap: usize) -> Result<Vec<ModalClause>, DnfError> {
    let out = match f {
        Formula::True => vec![ModalClause::default()],
        Formula::False => vec![],
        Formula::Atom(p) => {
            let mut c = ModalClause::default();
            c.lits.insert(p.clone(), true);
            vec![c]
        }
        Formula::Not(g) => match &**g {
            Formula::Atom(p) => {
                let mut c = ModalClause::default();
                c.lits.insert(p.clone(), false);
                vec![c]
            }
            _ => return Err(DnfError::NotNnf(f.to_string())),
        },
        Formula::Box(a, g) => {
            let mut c = ModalClause::default();
            c.boxes.entry(a.clone()).or_default().insert((**g).clone());
            vec![c]
        }
        Formula::Dia(a, g) => {
            let mut c = ModalClause::default();
            c.dias.entry(a.clone()).or_default().insert((**g).clone());
            vec![c]
        }
        Formula::Or(xs) => {
            let mut all = Vec::new();
            for x in xs {
                all.extend(clauses_of(x, cap)?);
                if all.len() > cap {
                    return Err(DnfError::ClauseCap { cap });
                }
            }
            all
        }
        Formula::And(xs) => {
            let mut acc = vec![ModalClause::default()];
            for x in xs {
                let rhs = clauses_of(x, cap)?;
                let mut next = Vec::new();
                for left in &acc {
                    for right in &rhs {
                        if let Some(merged) = left.clone().merge(right.clone()) {
                            next.push(merged);
                        }
                        if next.len() > cap {
                            return Err(DnfError::ClauseCap { cap });
                        }
                    }
                }
                acc = next;
            }
            acc
        }
        Formula::RefBox(_)
        | Formula::RefDia(_)
        | Formula::SimBox(_)
        | Formula::SimDia(_)
        | Formula::Origin(_) => return Err(DnfError::Quantified(f.to_string())),
    };
    Ok(out)
}

/// Convert a modal clause to cover form. Agents with diamonds get
/// `Φ_a = {χ ∧ ⋀θ, .., ⋀θ}`; each box-only agent doubles the clause into a
/// `∇_a{θ}` variant and a `∇_a∅` variant.
pub fn cover_convert(clause: &ModalClause) -> Vec<CoverClause> {
    let mut base = CoverClause {
        lits: clause.lits.clone(),
        covers: BTreeMap::new(),
        empty_cover_agents: BTreeSet::new(),
    };
    let mut box_only: Vec<(&AgentName, Formula)> = Vec::new();
    for (agent, bodies) in &clause.boxes {
        let theta = Formula::and(bodies.iter().cloned());
        match clause.dias.get(agent) {
            Some(dias) => {
                let mut members: BTreeSet<Formula> = dias
                    .iter()
                    .map(|chi| Formula::and([chi.clone(), theta.clone()]))
                    .collect();
                members.insert(theta);
                base.covers.insert(agent.clone(), members);
            }
            None => box_only.push((agent, theta)),
        }
    }
    for (agent, dias) in &clause.dias {
        if !clause.boxes.contains_key(agent) {
            // no boxes: ⋀θ = true
            let mut members: BTreeSet<Formula> = dias.clone();
            members.insert(Formula::True);
            base.covers.insert(agent.clone(), members);
        }
    }
    let mut variants = vec![base];
    for (agent, theta) in box_only {
        let mut next = Vec::with_capacity(variants.len() * 2);
        for v in variants {
            let mut with_successor = v.clone();
            with_successor
                .covers
                .insert(agent.clone(), BTreeSet::from([theta.clone()]));
            next.push(with_successor);
            let mut without = v;
            without.empty_cover_agents.insert(agent.clone());
            next.push(without);
        }
        variants = next;
    }
    variants
}

/// Full pipeline: NNF is required; produces the cover-form DNF.
pub fn to_modal_dnf(f: &Formula, max_clauses: usize) -> Result<DnfForm, DnfError> {
    let clauses = modal_dnf(f, max_clauses)?;
    let mut out = Vec::new();
    for clause in &clauses {
        out.extend(cover_convert(clause));
        if out.len() > max_clauses {
            return Err(DnfError::ClauseCap { cap: max_clauses });
        }
    }
    out.sort();
    out.dedup();
    Ok(DnfForm { clauses: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn ag(s: &str) -> AgentName {
        AgentName::new(s).unwrap()
    }

    #[test]
    fn dia_and_box_make_one_clause() {
        // <a>x & [a]y: one clause, Φ_a = {x & y, y}
        let f = parse("<a>x & [a]y").unwrap();
        let dnf = to_modal_dnf(&f, 1000).unwrap();
        assert_eq!(dnf.clauses.len(), 1);
        let clause = &dnf.clauses[0];
        assert!(clause.lits.is_empty());
        let members = &clause.covers[&ag("a")];
        let x_and_y = parse("x & y").unwrap();
        let y = parse("y").unwrap();
        assert_eq!(members, &BTreeSet::from([x_and_y, y]));
    }

    #[test]
    fn box_only_splits_in_two() {
        // [a]y: Φ_a = {y} or ∇_a∅
        let f = parse("[a]y").unwrap();
        let dnf = to_modal_dnf(&f, 1000).unwrap();
        assert_eq!(dnf.clauses.len(), 2);
        let with_cover = dnf
            .clauses
            .iter()
            .find(|c| !c.covers.is_empty())
            .expect("∇_a{y} variant");
        assert_eq!(
            with_cover.covers[&ag("a")],
            BTreeSet::from([parse("y").unwrap()])
        );
        let empty = dnf
            .clauses
            .iter()
            .find(|c| !c.empty_cover_agents.is_empty())
            .expect("∇_a∅ variant");
        assert!(empty.covers.is_empty());
    }

    #[test]
    fn propositional_clause_has_no_covers() {
        let f = parse("p").unwrap();
        let dnf = to_modal_dnf(&f, 1000).unwrap();
        assert_eq!(dnf.clauses.len(), 1);
        assert!(dnf.clauses[0].covers.is_empty());
        assert_eq!(dnf.clauses[0].prop_part(), parse("p").unwrap());
    }

    #[test]
    fn contradictory_clause_dropped() {
        let f = parse("p & ~p").unwrap().to_nnf();
        assert_eq!(modal_dnf(&f, 1000).unwrap(), vec![]);
        // (p | q) & ~p keeps only the q clause
        let f = parse("(p | q) & ~p").unwrap().to_nnf();
        let clauses = modal_dnf(&f, 1000).unwrap();
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].lits.len(), 2);
    }

    #[test]
    fn rejects_quantifiers_and_non_nnf() {
        let f = parse("<ref>p").unwrap();
        assert!(matches!(modal_dnf(&f, 10), Err(DnfError::Quantified(_))));
        let f = Formula::not(parse("p & q").unwrap());
        assert!(matches!(modal_dnf(&f, 10), Err(DnfError::NotNnf(_))));
    }

    #[test]
    fn cap_enforced() {
        // (p|q) & (r|s) & (t|u) -> 8 clauses
        let f = parse("(p | q) & (r | s) & (t | u)").unwrap();
        assert!(matches!(
            modal_dnf(&f, 4),
            Err(DnfError::ClauseCap { cap: 4 })
        ));
        assert_eq!(modal_dnf(&f, 100).unwrap().len(), 8);
    }
}
