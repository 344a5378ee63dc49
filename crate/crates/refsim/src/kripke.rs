//! Finite Kripke models, pointed models, the mutual factual ignorance
//! model, validation, JSON (de)serialization, and exhaustive small-model
//! enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{AgentName, AtomName};

/// Guard on `2^n` state blowup when building the mutual factual ignorance
/// model.
pub const DEFAULT_MFI_ATOM_CAP: usize = 10;

/// A state identifier within one model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub String);

impl StateId {
    pub fn new(s: impl Into<String>) -> Self {
        StateId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model has no states")]
    NoStates,
    #[error("model has no agents")]
    NoAgents,
    #[error("duplicate state id {0}")]
    DuplicateState(StateId),
    #[error("dangling endpoint {state} in relation of agent {agent}")]
    DanglingEndpoint { agent: AgentName, state: StateId },
    #[error("valuation of state {state} mentions undeclared atom {atom}")]
    UnknownAtom { state: StateId, atom: AtomName },
    #[error("relation given for undeclared agent {0}")]
    UnknownAgent(AgentName),
    #[error("no relation given for agent {0}")]
    MissingAgent(AgentName),
    #[error("point {0} is not a state of the model")]
    BadPoint(StateId),
    #[error("bad name: {0}")]
    BadName(#[from] crate::syntax::NameError),
    #[error("mutual factual ignorance model over {atoms} atoms exceeds cap {cap}")]
    MfiAtomCap { atoms: usize, cap: usize },
    #[error("enumeration cap of {cap} models exceeded")]
    EnumCap { cap: u64 },
    #[error("malformed model JSON: {0}")]
    Json(String),
}

/// A finite Kripke model: states, per-agent accessibility relations, and a
/// valuation. Class K: no frame conditions are imposed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    states: Vec<StateId>,
    atoms: BTreeSet<AtomName>,
    agents: BTreeSet<AgentName>,
    valuation: BTreeMap<StateId, BTreeSet<AtomName>>,
    relations: BTreeMap<AgentName, BTreeSet<(StateId, StateId)>>,
}

impl KripkeModel {
    /// Build a model and validate its invariants.
    pub fn new(
        states: Vec<StateId>,
        atoms: BTreeSet<AtomName>,
        agents: BTreeSet<AgentName>,
        valuation: BTreeMap<StateId, BTreeSet<AtomName>>,
        relations: BTreeMap<AgentName, BTreeSet<(StateId, StateId)>>,
    ) -> Result<Self, ModelError> {
        let model = KripkeModel {
            states,
            atoms,
            agents,
            valuation,
            relations,
        };
        model.validate()?;
        Ok(model)
    }

    /// Check every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        if self.agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let state_set: BTreeSet<&StateId> = self.states.iter().collect();
        if state_set.len() != self.states.len() {
            let mut seen = BTreeSet::new();
            for s in &self.states {
                if !seen.insert(s) {
                    return Err(ModelError::DuplicateState(s.clone()));
                }
            }
        }
        for (state, val) in &self.valuation {
            if !state_set.contains(state) {
                return Err(ModelError::BadPoint(state.clone()));
            }
            for atom in val {
                if !self.atoms.contains(atom) {
                    return Err(ModelError::UnknownAtom {
                        state: state.clone(),
                        atom: atom.clone(),
                    });
                }
            }
        }
        for agent in self.relations.keys() {
            if !self.agents.contains(agent) {
                return Err(ModelError::UnknownAgent(agent.clone()));
            }
        }
        for agent in &self.agents {
            let Some(pairs) = self.relations.get(agent) else {
                return Err(ModelError::MissingAgent(agent.clone()));
            };
            for (from, to) in pairs {
                for end in [from, to] {
                    if !state_set.contains(end) {
                        return Err(ModelError::DanglingEndpoint {
                            agent: agent.clone(),
                            state: end.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn atoms(&self) -> &BTreeSet<AtomName> {
        &self.atoms
    }

    pub fn agents(&self) -> &BTreeSet<AgentName> {
        &self.agents
    }

    pub fn valuation(&self, state: &StateId) -> BTreeSet<AtomName> {
        self.valuation.get(state).cloned().unwrap_or_default()
    }

    pub fn relation(&self, agent: &AgentName) -> &BTreeSet<(StateId, StateId)> {
        &self.relations[agent]
    }

    pub fn successors<'a>(
        &'a self,
        agent: &AgentName,
        from: &'a StateId,
    ) -> impl Iterator<Item = &'a StateId> + 'a {
        let from_cl = from.clone();
        self.relations[agent]
            .range((from.clone(), StateId::new(String::new()))..)
            .take_while(move |(f, _)| *f == from_cl)
            .map(|(_, t)| t)
    }

    pub fn contains_state(&self, state: &StateId) -> bool {
        self.states.contains(state)
    }

    /// Pair the model with a designated state.
    pub fn at(&self, point: &StateId) -> Result<PointedModel, ModelError> {
        PointedModel::new(self.clone(), point.clone())
    }
}

/// A model with a designated evaluation state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: StateId,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: StateId) -> Result<Self, ModelError> {
        if !model.contains_state(&point) {
            return Err(ModelError::BadPoint(point));
        }
        Ok(PointedModel { model, point })
    }
}

/// Canonical state id for a valuation subset: `{}`, `{p}`, `{p,q}`, ...
pub fn mfi_state_id(valuation: &BTreeSet<AtomName>) -> StateId {
    let names: Vec<&str> = valuation.iter().map(|a| a.as_str()).collect();
    StateId::new(format!("{{{}}}", names.join(",")))
}

/// The mutual factual ignorance model over a finite atom set: one state per
/// subset of `atoms`, `V(s) = s`, and every relation total.
pub fn mfi_model(
    atoms: &BTreeSet<AtomName>,
    agents: &BTreeSet<AgentName>,
) -> Result<KripkeModel, ModelError> {
    mfi_model_capped(atoms, agents, DEFAULT_MFI_ATOM_CAP)
}

pub fn mfi_model_capped(
    atoms: &BTreeSet<AtomName>,
    agents: &BTreeSet<AgentName>,
    atom_cap: usize,
) -> Result<KripkeModel, ModelError> {
    if agents.is_empty() {
        return Err(ModelError::NoAgents);
    }
    if atoms.len() > atom_cap {
        return Err(ModelError::MfiAtomCap {
            atoms: atoms.len(),
            cap: atom_cap,
        });
    }
    let atom_vec: Vec<&AtomName> = atoms.iter().collect();
    let mut states = Vec::new();
    let mut valuation = BTreeMap::new();
    for mask in 0u64..(1 << atom_vec.len()) {
        let subset: BTreeSet<AtomName> = atom_vec
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| (*a).clone())
            .collect();
        let id = mfi_state_id(&subset);
        states.push(id.clone());
        valuation.insert(id, subset);
    }
    states.sort();
    let total: BTreeSet<(StateId, StateId)> = states
        .iter()
        .flat_map(|s| states.iter().map(move |t| (s.clone(), t.clone())))
        .collect();
    let relations: BTreeMap<AgentName, BTreeSet<(StateId, StateId)>> = agents
        .iter()
        .map(|a| (a.clone(), total.clone()))
        .collect();
    KripkeModel::new(states, atoms.clone(), agents.clone(), valuation, relations)
}

/// The mutual factual ignorance model pointed at the given valuation
/// (restricted to the model's atoms).
pub fn mfi_pointed(
    atoms: &BTreeSet<AtomName>,
    agents: &BTreeSet<AgentName>,
    valuation: &BTreeSet<AtomName>,
) -> Result<PointedModel, ModelError> {
    let restricted: BTreeSet<AtomName> = valuation.intersection(atoms).cloned().collect();
    let model = mfi_model(atoms, agents)?;
    let point = mfi_state_id(&restricted);
    PointedModel::new(model, point)
}

/// Closed-form count of `enumerate_models(max_states, ..)`:
/// `Σ_{n=1..max} 2^(|atoms|·n) · 2^(|agents|·n²)`.
pub fn enumeration_count(max_states: usize, atoms: usize, agents: usize) -> u128 {
    (1..=max_states)
        .map(|n| {
            let bits = (atoms * n + agents * n * n) as u32;
            1u128 << bits
        })
        .sum()
}

/// Exhaustively enumerate every model with `1..=max_states` states over the
/// given atoms and agents, with canonical state names `s0..s(n-1)`. No
/// quotient by isomorphism is taken.
pub fn enumerate_models(
    max_states: usize,
    atoms: &BTreeSet<AtomName>,
    agents: &BTreeSet<AgentName>,
    cap: u64,
) -> Result<ModelEnumeration, ModelError> {
    let total = enumeration_count(max_states, atoms.len(), agents.len());
    if total > cap as u128 {
        return Err(ModelError::EnumCap { cap });
    }
    Ok(ModelEnumeration {
        atoms: atoms.iter().cloned().collect(),
        agents: agents.iter().cloned().collect(),
        max_states,
        n: 1,
        val_index: 0,
        rel_index: 0,
        state_names: (0..max_states.max(1))
            .map(|i| StateId::new(format!("s{i}")))
            .collect(),
    })
}

/// Iterator over all small models; see [`enumerate_models`].
pub struct ModelEnumeration {
    atoms: Vec<AtomName>,
    agents: Vec<AgentName>,
    max_states: usize,
    n: usize,
    val_index: u64,
    rel_index: u64,
    state_names: Vec<StateId>,
}

impl ModelEnumeration {
    fn build(&self) -> KripkeModel {
        let n = self.n;
        let states: Vec<StateId> = self.state_names[..n].to_vec();
        let mut valuation = BTreeMap::new();
        for (si, state) in states.iter().enumerate() {
            let subset: BTreeSet<AtomName> = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(ai, _)| self.val_index & (1 << (si * self.atoms.len() + ai)) != 0)
                .map(|(_, a)| a.clone())
                .collect();
            valuation.insert(state.clone(), subset);
        }
        let mut relations = BTreeMap::new();
        for (gi, agent) in self.agents.iter().enumerate() {
            let mut pairs = BTreeSet::new();
            for from in 0..n {
                for to in 0..n {
                    let bit = gi * n * n + from * n + to;
                    if self.rel_index & (1 << bit) != 0 {
                        pairs.insert((states[from].clone(), states[to].clone()));
                    }
                }
            }
            relations.insert(agent.clone(), pairs);
        }
        KripkeModel {
            states,
            atoms: self.atoms.iter().cloned().collect(),
            agents: self.agents.iter().cloned().collect(),
            valuation,
            relations,
        }
    }
}

impl Iterator for ModelEnumeration {
    type Item = KripkeModel;

    fn next(&mut self) -> Option<KripkeModel> {
        if self.n > self.max_states {
            return None;
        }
        let model = self.build();
        let val_bits = self.atoms.len() * self.n;
        let rel_bits = self.agents.len() * self.n * self.n;
        self.rel_index += 1;
        if self.rel_index >= (1u64 << rel_bits) {
            self.rel_index = 0;
            self.val_index += 1;
            if self.val_index >= (1u64 << val_bits) {
                self.val_index = 0;
                self.n += 1;
            }
        }
        Some(model)
    }
}

// Wire format per the external interface. Arrays are order-insensitive on
// read and canonically sorted on write.
#[derive(Serialize, Deserialize)]
struct ModelDoc {
    atoms: Vec<AtomName>,
    agents: Vec<AgentName>,
    states: Vec<StateDoc>,
    rel: BTreeMap<AgentName, Vec<(StateId, StateId)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<StateId>,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    id: StateId,
    val: Vec<AtomName>,
}

/// Parse a model from JSON; validation is implied. The optional `point`
/// field is returned separately.
pub fn read_model(text: &str) -> Result<(KripkeModel, Option<StateId>), ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    for atom in &doc.atoms {
        AtomName::new(atom.as_str())?;
    }
    for agent in &doc.agents {
        AgentName::new(agent.as_str())?;
    }
    let states: Vec<StateId> = doc.states.iter().map(|s| s.id.clone()).collect();
    let valuation: BTreeMap<StateId, BTreeSet<AtomName>> = doc
        .states
        .into_iter()
        .map(|s| (s.id, s.val.into_iter().collect()))
        .collect();
    let relations: BTreeMap<AgentName, BTreeSet<(StateId, StateId)>> = doc
        .rel
        .into_iter()
        .map(|(agent, pairs)| (agent, pairs.into_iter().collect()))
        .collect();
    let model = KripkeModel::new(
        states,
        doc.atoms.into_iter().collect(),
        doc.agents.into_iter().collect(),
        valuation,
        relations,
    )?;
    if let Some(point) = &doc.point {
        if !model.contains_state(point) {
            return Err(ModelError::BadPoint(point.clone()));
        }
    }
    Ok((model, doc.point))
}

/// Serialize a model (and optional point) to canonical JSON: all arrays
/// sorted, stable across round-trips.
pub fn write_model(model: &KripkeModel, point: Option<&StateId>) -> String {
    let mut states: Vec<StateDoc> = model
        .states
        .iter()
        .map(|id| StateDoc {
            id: id.clone(),
            val: model.valuation(id).into_iter().collect(),
        })
        .collect();
    states.sort_by(|a, b| a.id.cmp(&b.id));
    let doc = ModelDoc {
        atoms: model.atoms.iter().cloned().collect(),
        agents: model.agents.iter().cloned().collect(),
        states,
        rel: model
            .relations
            .iter()
            .map(|(agent, pairs)| (agent.clone(), pairs.iter().cloned().collect()))
            .collect(),
        point: point.cloned(),
    };
    serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(names: &[&str]) -> BTreeSet<AtomName> {
        names.iter().map(|s| AtomName::new(*s).unwrap()).collect()
    }

    fn agents(names: &[&str]) -> BTreeSet<AgentName> {
        names.iter().map(|s| AgentName::new(*s).unwrap()).collect()
    }

    #[test]
    fn mfi_two_states_for_one_atom() {
        let m = mfi_model(&atoms(&["p"]), &agents(&["a", "b"])).unwrap();
        assert_eq!(m.states().len(), 2);
        for agent in m.agents() {
            assert_eq!(m.relation(agent).len(), 4);
        }
        let p_state = mfi_state_id(&atoms(&["p"]));
        assert_eq!(m.valuation(&p_state), atoms(&["p"]));
    }

    #[test]
    fn mfi_degenerate_and_square_cases() {
        let m = mfi_model(&BTreeSet::new(), &agents(&["a"])).unwrap();
        assert_eq!(m.states().len(), 1);
        let s = m.states()[0].clone();
        assert_eq!(
            m.relation(&AgentName::new("a").unwrap()),
            &BTreeSet::from([(s.clone(), s)])
        );

        let m = mfi_model(&atoms(&["p", "q"]), &agents(&["a"])).unwrap();
        assert_eq!(m.states().len(), 4);
        assert_eq!(m.relation(&AgentName::new("a").unwrap()).len(), 16);
    }

    #[test]
    fn mfi_atom_cap() {
        let many: BTreeSet<AtomName> = (0..11)
            .map(|i| AtomName::new(format!("p{i}")).unwrap())
            .collect();
        assert!(matches!(
            mfi_model(&many, &agents(&["a"])),
            Err(ModelError::MfiAtomCap { atoms: 11, cap: 10 })
        ));
    }

    #[test]
    fn mfi_relations_are_equivalence_relations() {
        let m = mfi_model(&atoms(&["p", "q"]), &agents(&["a", "b"])).unwrap();
        for agent in m.agents() {
            let rel = m.relation(agent);
            for s in m.states() {
                assert!(rel.contains(&(s.clone(), s.clone())));
                for t in m.states() {
                    if rel.contains(&(s.clone(), t.clone())) {
                        assert!(rel.contains(&(t.clone(), s.clone())));
                        for u in m.states() {
                            if rel.contains(&(t.clone(), u.clone())) {
                                assert!(rel.contains(&(s.clone(), u.clone())));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn validate_reports_violations() {
        let ok = mfi_model(&atoms(&["p"]), &agents(&["a"])).unwrap();
        assert!(ok.validate().is_ok());

        let s0 = StateId::new("s0");
        let z = StateId::new("z");
        let bad = KripkeModel {
            states: vec![s0.clone()],
            atoms: atoms(&["p"]),
            agents: agents(&["a"]),
            valuation: BTreeMap::from([(s0.clone(), BTreeSet::new())]),
            relations: BTreeMap::from([(
                AgentName::new("a").unwrap(),
                BTreeSet::from([(s0.clone(), z.clone())]),
            )]),
        };
        assert_eq!(
            bad.validate(),
            Err(ModelError::DanglingEndpoint {
                agent: AgentName::new("a").unwrap(),
                state: z,
            })
        );

        let bad_atom = KripkeModel {
            states: vec![s0.clone()],
            atoms: BTreeSet::new(),
            agents: agents(&["a"]),
            valuation: BTreeMap::from([(s0.clone(), atoms(&["p"]))]),
            relations: BTreeMap::from([(AgentName::new("a").unwrap(), BTreeSet::new())]),
        };
        assert!(matches!(
            bad_atom.validate(),
            Err(ModelError::UnknownAtom { .. })
        ));
    }

    #[test]
    fn enumeration_counts_match_closed_form() {
        let count = |max, at: &[&str], ag: &[&str]| {
            enumerate_models(max, &atoms(at), &agents(ag), 1_000_000)
                .unwrap()
                .count() as u128
        };
        assert_eq!(count(1, &["p"], &["a"]), 4);
        assert_eq!(count(1, &[], &["a"]), 2);
        assert_eq!(count(2, &[], &["a"]), 18);
        assert_eq!(count(2, &["p"], &["a"]), enumeration_count(2, 1, 1));
        assert_eq!(count(3, &[], &["a"]), enumeration_count(3, 0, 1));
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all: Vec<KripkeModel> =
            enumerate_models(2, &atoms(&["p"]), &agents(&["a"]), 1_000_000)
                .unwrap()
                .collect();
        for (i, m) in all.iter().enumerate() {
            for other in &all[i + 1..] {
                assert_ne!(m, other);
            }
        }
        assert_eq!(all.len() as u128, enumeration_count(2, 1, 1));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_models(3, &atoms(&["p", "q"]), &agents(&["a", "b"]), 1000),
            Err(ModelError::EnumCap { cap: 1000 })
        ));
    }

    #[test]
    fn successors_iterate_one_source() {
        let m = mfi_model(&atoms(&["p"]), &agents(&["a"])).unwrap();
        let a = AgentName::new("a").unwrap();
        let first = m.states()[0].clone();
        let succ: Vec<&StateId> = m.successors(&a, &first).collect();
        assert_eq!(succ.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let m = mfi_model(&atoms(&["p"]), &agents(&["a", "b"])).unwrap();
        let text = write_model(&m, None);
        let (back, point) = read_model(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(point, None);
        // byte-identical under canonical ordering
        assert_eq!(write_model(&back, None), text);
    }

    #[test]
    fn json_point_and_errors() {
        let m = mfi_model(&atoms(&["p"]), &agents(&["a"])).unwrap();
        let p_state = mfi_state_id(&atoms(&["p"]));
        let text = write_model(&m, Some(&p_state));
        let (_, point) = read_model(&text).unwrap();
        assert_eq!(point, Some(p_state));

        assert!(matches!(read_model("not json"), Err(ModelError::Json(_))));
        let bad = r#"{"atoms":[],"agents":["a"],"states":[{"id":"s0","val":[]}],
                      "rel":{"a":[["s0","zz"]]}}"#;
        assert!(matches!(
            read_model(bad),
            Err(ModelError::DanglingEndpoint { .. })
        ));
    }
}
