//! Largest bisimulation, simulation, and refinement between two finite
//! models, computed by greatest-fixpoint pruning from the atom-compatible
//! full relation.
//!
//! Conventions: for a relation `Z ⊆ S_left × S_right`,
//!
//! * **atoms** — `V(s) = V'(s')` over the union of the two atom universes
//!   (atoms absent from a model are false there);
//! * **forth** — every left edge `s -a-> t` is matched by a right edge
//!   `s' -a-> t'` with `(t, t') ∈ Z`;
//! * **back** — every right edge `s' -a-> t'` is matched by a left edge
//!   `s -a-> t` with `(t, t') ∈ Z`.
//!
//! A simulation keeps atoms + forth, a refinement keeps atoms + back, a
//! bisimulation keeps all three. `largest_*` returns the union of all such
//! relations, which is itself one (or empty).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kripke::{KripkeModel, PointedModel, StateId};
use crate::syntax::AgentName;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelateError {
    #[error("mismatched agent sets: left has {left:?}, right has {right:?}")]
    MismatchedAgents {
        left: Vec<String>,
        right: Vec<String>,
    },
}

/// Which relation to compute or decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Simulation,
    Refinement,
    Bisimulation,
}

impl RelationKind {
    fn needs_forth(self) -> bool {
        matches!(self, RelationKind::Simulation | RelationKind::Bisimulation)
    }

    fn needs_back(self) -> bool {
        matches!(self, RelationKind::Refinement | RelationKind::Bisimulation)
    }
}

impl std::fmt::Display for RelationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RelationKind::Simulation => "sim",
            RelationKind::Refinement => "ref",
            RelationKind::Bisimulation => "bisim",
        })
    }
}

/// A set of state pairs between two models. For the `largest_*` results
/// this is the union of all relations of the requested kind, possibly
/// empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinRelation {
    pub pairs: BTreeSet<(StateId, StateId)>,
}

impl BinRelation {
    pub fn contains(&self, left: &StateId, right: &StateId) -> bool {
        self.pairs.contains(&(left.clone(), right.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

// Index-mapped view of a model pair used by the fixpoint loop.
struct Indexed {
    // successor lists per agent per state
    adj: Vec<Vec<Vec<usize>>>,
    states: Vec<StateId>,
    // valuation keys over the union atom universe, comparable across models
    val_keys: Vec<u64>,
}

fn index_model(m: &KripkeModel, atom_order: &[&crate::syntax::AtomName]) -> Indexed {
    let states: Vec<StateId> = m.states().to_vec();
    let positions: std::collections::BTreeMap<&StateId, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let agents: Vec<&AgentName> = m.agents().iter().collect();
    let mut adj = vec![vec![Vec::new(); states.len()]; agents.len()];
    for (ai, agent) in agents.iter().enumerate() {
        for (from, to) in m.relation(agent) {
            adj[ai][positions[from]].push(positions[to]);
        }
    }
    let val_keys = states
        .iter()
        .map(|s| {
            let val = m.valuation(s);
            atom_order
                .iter()
                .enumerate()
                .filter(|(_, a)| val.contains(**a))
                .fold(0u64, |acc, (i, _)| acc | (1 << i))
        })
        .collect();
    Indexed { adj, states, val_keys }
}

fn largest(
    kind: RelationKind,
    left: &KripkeModel,
    right: &KripkeModel,
) -> Result<BinRelation, RelateError> {
    if left.agents() != right.agents() {
        return Err(RelateError::MismatchedAgents {
            left: left.agents().iter().map(|a| a.to_string()).collect(),
            right: right.agents().iter().map(|a| a.to_string()).collect(),
        });
    }
    let union_atoms: BTreeSet<&crate::syntax::AtomName> =
        left.atoms().union(right.atoms()).collect();
    let atom_order: Vec<&crate::syntax::AtomName> = union_atoms.into_iter().collect();
    let li = index_model(left, &atom_order);
    let ri = index_model(right, &atom_order);
    let agent_count = left.agents().len();

    let nl = li.states.len();
    let nr = ri.states.len();
    // start from the atom-compatible full relation
    let mut rel = vec![false; nl * nr];
    for s in 0..nl {
        for t in 0..nr {
            rel[s * nr + t] = li.val_keys[s] == ri.val_keys[t];
        }
    }

    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..nl {
            for t in 0..nr {
                if !rel[s * nr + t] {
                    continue;
                }
                let mut ok = true;
                'agents: for ai in 0..agent_count {
                    if kind.needs_forth() {
                        for &s2 in &li.adj[ai][s] {
                            if !ri.adj[ai][t].iter().any(|&t2| rel[s2 * nr + t2]) {
                                ok = false;
                                break 'agents;
                            }
                        }
                    }
                    if kind.needs_back() {
                        for &t2 in &ri.adj[ai][t] {
                            if !li.adj[ai][s].iter().any(|&s2| rel[s2 * nr + t2]) {
                                ok = false;
                                break 'agents;
                            }
                        }
                    }
                }
                if !ok {
                    rel[s * nr + t] = false;
                    changed = true;
                }
            }
        }
    }

    let pairs = (0..nl)
        .flat_map(|s| (0..nr).map(move |t| (s, t)))
        .filter(|&(s, t)| rel[s * nr + t])
        .map(|(s, t)| (li.states[s].clone(), ri.states[t].clone()))
        .collect();
    Ok(BinRelation { pairs })
}

/// Largest bisimulation between the two models (atoms + forth + back).
pub fn largest_bisimulation(
    left: &KripkeModel,
    right: &KripkeModel,
) -> Result<BinRelation, RelateError> {
    largest(RelationKind::Bisimulation, left, right)
}

/// Largest simulation from `left` into `right` (atoms + forth): `right`
/// simulates `left`.
pub fn largest_simulation(
    left: &KripkeModel,
    right: &KripkeModel,
) -> Result<BinRelation, RelateError> {
    largest(RelationKind::Simulation, left, right)
}

/// Largest refinement relation (atoms + back): `right` refines `left`.
pub fn largest_refinement(
    left: &KripkeModel,
    right: &KripkeModel,
) -> Result<BinRelation, RelateError> {
    largest(RelationKind::Refinement, left, right)
}

pub fn largest_of_kind(
    kind: RelationKind,
    left: &KripkeModel,
    right: &KripkeModel,
) -> Result<BinRelation, RelateError> {
    largest(kind, left, right)
}

/// Decide the pointed relation: true iff the point pair lies in the
/// largest relation of the requested kind.
pub fn related(
    kind: RelationKind,
    left: &PointedModel,
    right: &PointedModel,
) -> Result<bool, RelateError> {
    let rel = largest(kind, &left.model, &right.model)?;
    Ok(rel.contains(&left.point, &right.point))
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::kripke::{enumerate_models, mfi_model, mfi_state_id};
    use crate::syntax::{AgentName, AtomName};

    fn atoms(names: &[&str]) -> BTreeSet<AtomName> {
        names.iter().map(|s| AtomName::new(*s).unwrap()).collect()
    }

    fn agents(names: &[&str]) -> BTreeSet<AgentName> {
        names.iter().map(|s| AgentName::new(*s).unwrap()).collect()
    }

    fn single_state(with_p: bool) -> KripkeModel {
        let s = StateId::new("s0");
        KripkeModel::new(
            vec![s.clone()],
            atoms(&["p"]),
            agents(&["a"]),
            BTreeMap::from([(s.clone(), if with_p { atoms(&["p"]) } else { BTreeSet::new() })]),
            BTreeMap::from([(AgentName::new("a").unwrap(), BTreeSet::new())]),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_a_bisimulation() {
        let m = mfi_model(&atoms(&["p"]), &agents(&["a"])).unwrap();
        let rel = largest_bisimulation(&m, &m).unwrap();
        for s in m.states() {
            assert!(rel.contains(s, s));
        }
    }

    #[test]
    fn atom_clash_gives_empty_relation() {
        let with_p = single_state(true);
        let without_p = single_state(false);
        assert!(largest_bisimulation(&with_p, &without_p).unwrap().is_empty());
        assert!(largest_simulation(&with_p, &without_p).unwrap().is_empty());
    }

    #[test]
    fn edgeless_pair_with_equal_atoms_is_simulated() {
        // forth is vacuous when the left state has no outgoing edges
        let m = single_state(true);
        let rel = largest_simulation(&m, &m).unwrap();
        assert!(rel.contains(&StateId::new("s0"), &StateId::new("s0")));
    }

    #[test]
    fn mismatched_agents_error() {
        let left = mfi_model(&atoms(&["p"]), &agents(&["a"])).unwrap();
        let right = mfi_model(&atoms(&["p"]), &agents(&["a", "b"])).unwrap();
        assert!(matches!(
            largest_bisimulation(&left, &right),
            Err(RelateError::MismatchedAgents { .. })
        ));
    }

    #[test]
    fn every_small_model_refines_mfi() {
        // Z = {(V(s), s)} is a refinement of the mutual factual ignorance
        // model, for every model.
        let at = atoms(&["p"]);
        let ag = agents(&["a"]);
        let mfi = mfi_model(&at, &ag).unwrap();
        for m in enumerate_models(2, &at, &ag, 1 << 20).unwrap() {
            let rel = largest_refinement(&mfi, &m).unwrap();
            for s in m.states() {
                let mfi_point = mfi_state_id(&m.valuation(s));
                assert!(
                    rel.contains(&mfi_point, s),
                    "missing ({mfi_point}, {s}) for {m:?}"
                );
            }
        }
    }

    #[test]
    fn simulation_is_transitive_on_points() {
        // spot-check transitivity by composing pointed claims over all
        // 1-atom 1-agent models with up to 2 states
        let at = atoms(&["p"]);
        let ag = agents(&["a"]);
        let models: Vec<KripkeModel> = enumerate_models(2, &at, &ag, 1 << 20).unwrap().collect();
        let mut count = 0usize;
        for m1 in &models {
            for m2 in &models {
                let z12 = largest_simulation(m1, m2).unwrap();
                if z12.is_empty() {
                    continue;
                }
                for m3 in &models {
                    let z23 = largest_simulation(m2, m3).unwrap();
                    let z13 = largest_simulation(m1, m3).unwrap();
                    for (s1, s2) in &z12.pairs {
                        for (s2b, s3) in &z23.pairs {
                            if s2 == s2b {
                                assert!(z13.contains(s1, s3));
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(count > 1000, "composition cases exercised: {count}");
    }
}
