//! Satisfiability and validity for quantifier-free multi-modal K.
//!
//! A plain labeled tableau: conjunctions are expanded, disjunctions branch,
//! literal clashes close a branch, and each surviving diamond spawns a
//! successor node seeded with the body and the matching box bodies. K has
//! no frame conditions, so termination is structural (modal depth strictly
//! decreases into successors) and no loop check is needed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kripke::{KripkeModel, PointedModel, StateId};
use crate::reduce::{reduce_full, ReduceConfig, ReduceError};
use crate::syntax::{AgentName, AtomName, Formula};

pub const DEFAULT_NODE_CAP: u64 = 4_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    /// Resource failure; never a verdict.
    #[error("tableau node cap {cap} exceeded")]
    NodeCap { cap: u64 },
    #[error("tableau input is not quantifier-free: {0}")]
    Quantified(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidityError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Debug, Clone, Copy)]
pub struct TableauConfig {
    pub node_cap: u64,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig {
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

// Open branches yield a tree-shaped witness model.
struct WitnessNode {
    literals: BTreeMap<AtomName, bool>,
    children: Vec<(AgentName, WitnessNode)>,
}

struct Search {
    budget: u64,
    cap: u64,
}

impl Search {
    fn tick(&mut self) -> Result<(), TableauError> {
        if self.budget == 0 {
            return Err(TableauError::NodeCap { cap: self.cap });
        }
        self.budget -= 1;
        Ok(())
    }

    /// Saturate one node. `todo` holds NNF formulas still to process.
    fn solve(
        &mut self,
        mut todo: Vec<Formula>,
        mut literals: BTreeMap<AtomName, bool>,
        mut boxes: BTreeMap<AgentName, Vec<Formula>>,
        mut dias: Vec<(AgentName, Formula)>,
    ) -> Result<Option<WitnessNode>, TableauError> {
        while let Some(f) = todo.pop() {
            self.tick()?;
            match f {
                Formula::True => {}
                Formula::False => return Ok(None),
                Formula::Atom(p) => {
                    if let Some(old) = literals.insert(p, true) {
                        if !old {
                            return Ok(None);
                        }
                    }
                }
                Formula::Not(g) => match *g {
                    Formula::Atom(p) => {
                        if let Some(old) = literals.insert(p, false) {
                            if old {
                                return Ok(None);
                            }
                        }
                    }
                    other => {
                        // defensive: inputs are NNF, but renormalize rather
                        // than give a wrong verdict
                        todo.push(Formula::not(other).to_nnf());
                    }
                },
                Formula::And(xs) => todo.extend(xs),
                Formula::Or(xs) => {
                    for x in xs {
                        let mut branch_todo = todo.clone();
                        branch_todo.push(x);
                        if let Some(w) = self.solve(
                            branch_todo,
                            literals.clone(),
                            boxes.clone(),
                            dias.clone(),
                        )? {
                            return Ok(Some(w));
                        }
                    }
                    return Ok(None);
                }
                Formula::Box(a, g) => boxes.entry(a).or_default().push(*g),
                Formula::Dia(a, g) => dias.push((a, *g)),
                quantified => return Err(TableauError::Quantified(quantified.to_string())),
            }
        }
        // saturated: every diamond needs its own successor satisfying the
        // boxes of its agent
        let mut children = Vec::new();
        for (agent, body) in dias {
            let mut succ_todo = vec![body];
            if let Some(bs) = boxes.get(&agent) {
                succ_todo.extend(bs.iter().cloned());
            }
            match self.solve(succ_todo, BTreeMap::new(), BTreeMap::new(), Vec::new())? {
                None => return Ok(None),
                Some(child) => children.push((agent, child)),
            }
        }
        Ok(Some(WitnessNode { literals, children }))
    }
}

fn solve_nnf(f: &Formula, cfg: &TableauConfig) -> Result<Option<WitnessNode>, TableauError> {
    if !f.in_lbox() {
        return Err(TableauError::Quantified(f.to_string()));
    }
    let mut search = Search {
        budget: cfg.node_cap,
        cap: cfg.node_cap,
    };
    search.solve(
        vec![f.to_nnf()],
        BTreeMap::new(),
        BTreeMap::new(),
        Vec::new(),
    )
}

/// Satisfiability of a quantifier-free formula over class K.
pub fn is_satisfiable(f: &Formula) -> Result<bool, TableauError> {
    is_satisfiable_with(f, &TableauConfig::default())
}

pub fn is_satisfiable_with(f: &Formula, cfg: &TableauConfig) -> Result<bool, TableauError> {
    Ok(solve_nnf(f, cfg)?.is_some())
}

/// Satisfiability with a finite witness model (a tree of depth at most the
/// modal depth of `f`), pointed at its root.
pub fn satisfying_model(f: &Formula) -> Result<Option<PointedModel>, TableauError> {
    satisfying_model_with(f, &TableauConfig::default())
}

pub fn satisfying_model_with(
    f: &Formula,
    cfg: &TableauConfig,
) -> Result<Option<PointedModel>, TableauError> {
    let Some(root) = solve_nnf(f, cfg)? else {
        return Ok(None);
    };
    let mut atoms = f.atoms();
    let mut agents = f.agents();
    if agents.is_empty() {
        agents.insert(AgentName::new("a").expect("valid name"));
    }
    let mut states = Vec::new();
    let mut valuation = BTreeMap::new();
    let mut relations: BTreeMap<AgentName, std::collections::BTreeSet<(StateId, StateId)>> =
        agents.iter().map(|a| (a.clone(), Default::default())).collect();
    let mut queue = vec![(StateId::new("w0"), &root)];
    let mut counter = 0usize;
    while let Some((id, node)) = queue.pop() {
        states.push(id.clone());
        let val: std::collections::BTreeSet<AtomName> = node
            .literals
            .iter()
            .filter(|(_, pos)| **pos)
            .map(|(p, _)| p.clone())
            .collect();
        atoms.extend(val.iter().cloned());
        valuation.insert(id.clone(), val);
        for (agent, child) in &node.children {
            counter += 1;
            let child_id = StateId::new(format!("w{counter}"));
            relations
                .entry(agent.clone())
                .or_default()
                .insert((id.clone(), child_id.clone()));
            queue.push((child_id, child));
        }
    }
    let model = KripkeModel::new(states, atoms, agents, valuation, relations)
        .expect("witness construction is well-formed");
    Ok(Some(PointedModel::new(model, StateId::new("w0")).expect("root is a state")))
}

/// Validity of a formula of the full language: reduce to quantifier-free
/// form, then decide unsatisfiability of the negation.
pub fn is_valid(f: &Formula, cfg: &ReduceConfig) -> Result<bool, ValidityError> {
    is_valid_with(f, cfg, &TableauConfig::default())
}

pub fn is_valid_with(
    f: &Formula,
    cfg: &ReduceConfig,
    tcfg: &TableauConfig,
) -> Result<bool, ValidityError> {
    let reduced = reduce_full(f, cfg)?;
    let negated = Formula::not(reduced).to_nnf();
    Ok(!is_satisfiable_with(&negated, tcfg)?)
}

/// `f` and `g` are logically equivalent.
pub fn equivalent(f: &Formula, g: &Formula, cfg: &ReduceConfig) -> Result<bool, ValidityError> {
    is_valid(&Formula::iff(f.clone(), g.clone()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::check_base;
    use crate::syntax::parse;

    #[test]
    fn propositional_cases() {
        assert!(!is_satisfiable(&parse("p & ~p").unwrap()).unwrap());
        assert!(is_satisfiable(&parse("p | ~p").unwrap()).unwrap());
        assert!(is_satisfiable(&parse("p & ~q").unwrap()).unwrap());
        assert!(!is_satisfiable(&parse("false").unwrap()).unwrap());
    }

    #[test]
    fn k_has_no_seriality() {
        // a dead-end state satisfies [a]false
        assert!(is_satisfiable(&parse("[a]false").unwrap()).unwrap());
        assert!(is_satisfiable(&parse("[a]false & p").unwrap()).unwrap());
    }

    #[test]
    fn diamond_box_clash() {
        assert!(!is_satisfiable(&parse("<a>p & [a]~p").unwrap()).unwrap());
        assert!(is_satisfiable(&parse("<a>p & [a]p").unwrap()).unwrap());
        assert!(!is_satisfiable(&parse("<a>(p & ~p)").unwrap()).unwrap());
        // per-agent boxes do not leak across agents
        assert!(is_satisfiable(&parse("<a>p & [b]~p").unwrap()).unwrap());
    }

    #[test]
    fn witnesses_check_out() {
        for text in [
            "<a>p & [a](p | q)",
            "<a><b>p & [a]<b>p",
            "[a]false",
            "p & <a>~p & <a>p",
            "<a>[b]false & <b>(p & q)",
        ] {
            let f = parse(text).unwrap();
            let pm = satisfying_model(&f).unwrap().expect("satisfiable");
            assert!(check_base(&pm, &f).unwrap(), "witness fails for {text}");
        }
    }

    #[test]
    fn node_cap_is_a_resource_failure() {
        let f = parse("<a>p & <a>q & <a>(p&q) & [a](p|q)").unwrap();
        let tiny = TableauConfig { node_cap: 3 };
        assert_eq!(
            is_satisfiable_with(&f, &tiny),
            Err(TableauError::NodeCap { cap: 3 })
        );
    }

    #[test]
    fn rejects_quantifiers() {
        assert!(matches!(
            is_satisfiable(&parse("<ref>p").unwrap()),
            Err(TableauError::Quantified(_))
        ));
    }

    #[test]
    fn validity_basics() {
        let cfg = ReduceConfig::default();
        assert!(is_valid(&parse("[sim]p -> p").unwrap(), &cfg).unwrap());
        assert!(is_valid(&parse("[a](p -> q) -> ([a]p -> [a]q)").unwrap(), &cfg).unwrap());
        assert!(!is_valid(&parse("p -> [a]p").unwrap(), &cfg).unwrap());
        assert!(equivalent(
            &parse("<ref>(p | q)").unwrap(),
            &parse("<ref>p | <ref>q").unwrap(),
            &cfg
        )
        .unwrap());
        assert!(equivalent(
            &parse("[orig]~p").unwrap(),
            &parse("~[orig]p").unwrap(),
            &cfg
        )
        .unwrap());
        assert!(!equivalent(&parse("<sim>p").unwrap(), &parse("q").unwrap(), &cfg).unwrap());
    }
}
