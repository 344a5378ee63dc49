//! Quantifier and origin elimination: the term-rewriting engine.
//!
//! Every `<ref>`, `<sim>` and `[orig]` modality over a quantifier-free body
//! is provably equivalent to a quantifier-free formula; the rewrites below
//! establish that equivalence constructively, recursing on modal depth:
//!
//! * `<ref>` — the body is brought into cover-form DNF; per clause, `RQ3`
//!   pulls out the literal part and `RQ4` turns `<ref>⋀_a ∇_a Φ_a` into
//!   `⋀_a ⋀_{f∈Φ_a} <a><ref>f`, whose bodies have strictly smaller depth.
//! * `<sim>` — same normal form; in `cons` mode `SQ4_cons` rewrites the
//!   cover to `⋀_a [a](⋁_{f∈Φ_a} <sim>f)`, guarded by a tableau consistency
//!   check on every cover member (an unsatisfiable member falsifies the
//!   cover, so the clause rewrites to `false`); in `rosml` mode `SQ4` adds
//!   the conjunct `[orig](⋀_{f∈Φ_a} <a><ref>f)` instead of the guard.
//! * `[orig]` — the modality is pushed through the booleans (`O1`,
//!   `ODual`, `ODisj`); under `[orig]<a>·` all relations are total, so the
//!   modal conjuncts of a DNF clause are state-independent and float out
//!   one by one (`O5`/`OExch` reasoning), leaving `[orig]<a>π` which is
//!   `false` on a clashing literal set and `true` otherwise (`OFull`).

use std::collections::HashMap;

use thiserror::Error;

use crate::syntax::{modal_dnf, to_modal_dnf, AgentName, DnfError, Formula};
use crate::tableau::{is_satisfiable_with, TableauConfig, TableauError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Dnf(#[from] DnfError),
    #[error("consistency check failed: {0}")]
    Tableau(#[from] TableauError),
    #[error("reduction produced a quantified formula (internal error): {0}")]
    NotReduced(String),
}

/// Which simulation axiomatization drives `<sim>` elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// `SQ4_cons` with a tableau consistency gate on cover members.
    Cons,
    /// `SQ4`: no side condition; uses `<ref>` and `[orig]` instead.
    #[default]
    Rosml,
}

#[derive(Debug, Clone)]
pub struct ReduceConfig {
    pub sim_mode: SimMode,
    pub max_dnf_clauses: usize,
    pub trace: bool,
    pub tableau: TableauConfig,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            sim_mode: SimMode::Rosml,
            max_dnf_clauses: 50_000,
            trace: false,
            tableau: TableauConfig::default(),
        }
    }
}

/// One rewrite step, reported when tracing is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: &'static str,
    pub before: String,
    pub after: String,
}

/// Rewriting engine with a per-(operator, body) result cache.
pub struct Reducer {
    cfg: ReduceConfig,
    cache: HashMap<Formula, Formula>,
    trace: Vec<TraceStep>,
}

impl Reducer {
    pub fn new(cfg: ReduceConfig) -> Self {
        Reducer {
            cfg,
            cache: HashMap::new(),
            trace: Vec::new(),
        }
    }

    pub fn config(&self) -> &ReduceConfig {
        &self.cfg
    }

    pub fn take_trace(&mut self) -> Vec<TraceStep> {
        std::mem::take(&mut self.trace)
    }

    fn log(&mut self, rule: &'static str, before: &Formula, after: &Formula) {
        if self.cfg.trace && before != after {
            self.trace.push(TraceStep {
                rule,
                before: before.to_string(),
                after: after.to_string(),
            });
        }
    }

    /// Innermost-out elimination of every quantifier and origin modality.
    /// The result is quantifier- and origin-free and equivalent to `f`.
    pub fn reduce_full(&mut self, f: &Formula) -> Result<Formula, ReduceError> {
        let out = match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.reduce_full(g)?),
            Formula::And(xs) => Formula::and(
                xs.iter()
                    .map(|x| self.reduce_full(x))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Formula::Or(xs) => Formula::or(
                xs.iter()
                    .map(|x| self.reduce_full(x))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Formula::Box(a, g) => Formula::box_(a.clone(), self.reduce_full(g)?),
            Formula::Dia(a, g) => Formula::dia(a.clone(), self.reduce_full(g)?),
            Formula::RefDia(g) => {
                let body = self.reduce_full(g)?;
                self.eliminate_refinement_diamond(&body)?
            }
            Formula::RefBox(g) => {
                // [ref]f = ~<ref>~f
                let body = self.reduce_full(g)?;
                let dual = Formula::not(body).to_nnf();
                Formula::not(self.eliminate_refinement_diamond(&dual)?)
            }
            Formula::SimDia(g) => {
                let body = self.reduce_full(g)?;
                self.eliminate_simulation_diamond(&body)?
            }
            Formula::SimBox(g) => {
                let body = self.reduce_full(g)?;
                let dual = Formula::not(body).to_nnf();
                Formula::not(self.eliminate_simulation_diamond(&dual)?)
            }
            Formula::Origin(g) => {
                let body = self.reduce_full(g)?;
                self.eliminate_origin(&body)?
            }
        };
        debug_assert!(out.in_lbox(), "reduction left a quantifier in {out}");
        Ok(out)
    }

    /// `<ref>body -> equivalent quantifier-free formula`; `body` must be
    /// quantifier-free.
    pub fn eliminate_refinement_diamond(&mut self, body: &Formula) -> Result<Formula, ReduceError> {
        let key = Formula::ref_dia(body.clone());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let nnf = body.simplify().to_nnf();
        self.log("NNF", body, &nnf);
        let result = if nnf.modal_depth() == 0 {
            // <ref>f0 <-> f0 for propositional f0
            self.log("RQ1", &key, &nnf);
            nnf
        } else {
            let dnf = to_modal_dnf(&nnf, self.cfg.max_dnf_clauses)?;
            self.log("DNF", &nnf, &dnf.to_formula());
            let mut disjuncts = Vec::new();
            for clause in &dnf.clauses {
                // RQ3 pulls the literal part out of the quantifier; RQ4
                // rewrites the cover; an empty cover ∇_a∅ contributes the
                // empty conjunction (refinements may drop all a-edges).
                let mut conjuncts = vec![clause.prop_part()];
                for (agent, members) in &clause.covers {
                    for member in members {
                        let inner = self.eliminate_refinement_diamond(member)?;
                        conjuncts.push(Formula::dia(agent.clone(), inner));
                    }
                }
                let rewritten = Formula::and(conjuncts);
                self.log("RQ4", &Formula::ref_dia(clause.to_formula()), &rewritten);
                disjuncts.push(rewritten);
            }
            let joined = Formula::or(disjuncts);
            if dnf.clauses.len() > 1 {
                self.log("RQ2", &key, &joined);
            }
            joined
        };
        let result = result.simplify();
        self.log("SIMP", &key, &result);
        self.cache.insert(key, result.clone());
        Ok(result)
    }

    /// `<sim>body -> equivalent quantifier-free formula`; `body` must be
    /// quantifier-free.
    pub fn eliminate_simulation_diamond(&mut self, body: &Formula) -> Result<Formula, ReduceError> {
        self.simulation_rewrite(body, true)
    }

    /// The ungated `SQ4_cons` rewrite, skipping the consistency check on
    /// cover members. Unsound by design; kept for the regression suite that
    /// demonstrates why the side condition is necessary.
    pub fn eliminate_simulation_diamond_ungated(
        &mut self,
        body: &Formula,
    ) -> Result<Formula, ReduceError> {
        self.simulation_rewrite(body, false)
    }

    fn simulation_rewrite(&mut self, body: &Formula, gated: bool) -> Result<Formula, ReduceError> {
        let key = Formula::sim_dia(body.clone());
        if gated {
            if let Some(hit) = self.cache.get(&key) {
                return Ok(hit.clone());
            }
        }
        // the ungated variant must see the raw cover form, so do not
        // pre-simplify it away
        let nnf = if gated {
            body.simplify().to_nnf()
        } else {
            body.to_nnf()
        };
        self.log("NNF", body, &nnf);
        let result = if nnf.modal_depth() == 0 {
            self.log("SQ1", &key, &nnf);
            nnf
        } else {
            let dnf = to_modal_dnf(&nnf, self.cfg.max_dnf_clauses)?;
            self.log("DNF", &nnf, &dnf.to_formula());
            let mut disjuncts = Vec::new();
            'clauses: for clause in &dnf.clauses {
                // SQ3 pulls the literal part; per agent the cover is
                // rewritten by SQ4 (rosml) or SQ4_cons (cons). ∇_a∅ yields
                // the empty disjunction under the box: [a]false.
                let mut conjuncts = vec![clause.prop_part()];
                for (agent, members) in &clause.covers {
                    match (self.cfg.sim_mode, gated) {
                        (SimMode::Cons, true) => {
                            for member in members {
                                if !is_satisfiable_with(member, &self.cfg.tableau)? {
                                    // ∇_a Φ demands <a>member for an
                                    // unsatisfiable member, so the clause
                                    // is false; SQ4_cons does not apply.
                                    self.log(
                                        "SQ4cons",
                                        &Formula::sim_dia(clause.to_formula()),
                                        &Formula::False,
                                    );
                                    continue 'clauses;
                                }
                            }
                            conjuncts.push(self.sq4_cons_box(agent, members, gated)?);
                        }
                        (_, false) => {
                            conjuncts.push(self.sq4_cons_box(agent, members, gated)?);
                        }
                        (SimMode::Rosml, true) => {
                            conjuncts.push(self.sq4_cons_box(agent, members, gated)?);
                            let mut origin_body = Vec::new();
                            for member in members {
                                let refined = self.eliminate_refinement_diamond(member)?;
                                origin_body.push(Formula::dia(agent.clone(), refined));
                            }
                            conjuncts.push(self.eliminate_origin(&Formula::and(origin_body))?);
                        }
                    }
                }
                for agent in &clause.empty_cover_agents {
                    conjuncts.push(Formula::box_(agent.clone(), Formula::False));
                }
                let rewritten = Formula::and(conjuncts);
                let rule = match self.cfg.sim_mode {
                    SimMode::Cons => "SQ4cons",
                    SimMode::Rosml => "SQ4",
                };
                self.log(rule, &Formula::sim_dia(clause.to_formula()), &rewritten);
                disjuncts.push(rewritten);
            }
            let joined = Formula::or(disjuncts);
            if dnf.clauses.len() > 1 {
                self.log("SQ2", &key, &joined);
            }
            joined
        };
        let result = result.simplify();
        self.log("SIMP", &key, &result);
        if gated {
            self.cache.insert(key, result.clone());
        }
        Ok(result)
    }

    // `[a](⋁_{f∈Φ} <sim>f)` with the simulation diamonds eliminated.
    fn sq4_cons_box(
        &mut self,
        agent: &AgentName,
        members: &std::collections::BTreeSet<Formula>,
        gated: bool,
    ) -> Result<Formula, ReduceError> {
        let mut disjuncts = Vec::new();
        for member in members {
            disjuncts.push(self.simulation_rewrite(member, gated)?);
        }
        Ok(Formula::box_(agent.clone(), Formula::or(disjuncts)))
    }

    /// `[orig]body -> equivalent propositional formula`; `body` must be
    /// quantifier-free.
    pub fn eliminate_origin(&mut self, body: &Formula) -> Result<Formula, ReduceError> {
        let key = Formula::origin(body.clone());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let nnf = body.simplify().to_nnf();
        self.log("NNF", body, &nnf);
        let result = self.origin_eval(&nnf)?.simplify();
        self.log("SIMP", &key, &result);
        debug_assert!(result.in_l0(), "origin elimination left a modality in {result}");
        self.cache.insert(key, result.clone());
        Ok(result)
    }

    // Push [orig] through the booleans; literals pass unchanged (O1).
    fn origin_eval(&mut self, f: &Formula) -> Result<Formula, ReduceError> {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => {
                self.log("O1", &Formula::origin(f.clone()), f);
                Ok(f.clone())
            }
            Formula::Not(g) if matches!(**g, Formula::Atom(_)) => {
                self.log("O1", &Formula::origin(f.clone()), f);
                Ok(f.clone())
            }
            Formula::And(xs) => Ok(Formula::and(
                xs.iter()
                    .map(|x| self.origin_eval(x))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            Formula::Or(xs) => {
                let mapped = xs
                    .iter()
                    .map(|x| self.origin_eval(x))
                    .collect::<Result<Vec<_>, _>>()?;
                let out = Formula::or(mapped);
                self.log("ODisj", &Formula::origin(f.clone()), &out);
                Ok(out)
            }
            Formula::Dia(a, g) => self.origin_dia(a.clone(), g),
            Formula::Box(a, g) => {
                // [orig][a]f <-> ~[orig]<a>~f  (ODual)
                let dual = Formula::not((**g).clone()).to_nnf();
                let inner = self.origin_dia(a.clone(), &dual)?;
                let out = Formula::not(inner);
                self.log("ODual", &Formula::origin(f.clone()), &out);
                Ok(out)
            }
            other => Err(ReduceError::NotReduced(other.to_string())),
        }
    }

    // [orig]<a>g for quantifier-free NNF g. In the mutual factual
    // ignorance model all relations are total, so a modal conjunct's truth
    // does not depend on the evaluation state: each floats out of the
    // diamond on its own (the O5/OExch recursion), and the literal residue
    // is decided by OFull.
    fn origin_dia(&mut self, agent: AgentName, g: &Formula) -> Result<Formula, ReduceError> {
        let before = Formula::origin(Formula::dia(agent.clone(), g.clone()));
        let clauses = modal_dnf(&g.to_nnf(), self.cfg.max_dnf_clauses)?;
        let mut disjuncts = Vec::new();
        for clause in &clauses {
            // clause literal sets are consistent by construction, so the
            // residual [orig]<a>π is true (OFull); inconsistent clauses
            // were already dropped (the ⊥ case).
            let mut conjuncts = Vec::new();
            for (b, chis) in &clause.dias {
                for chi in chis {
                    conjuncts.push(self.origin_dia(b.clone(), chi)?);
                }
            }
            for (b, thetas) in &clause.boxes {
                let theta = Formula::and(thetas.iter().cloned());
                let dual = Formula::not(theta).to_nnf();
                let inner = self.origin_dia(b.clone(), &dual)?;
                conjuncts.push(Formula::not(inner));
            }
            disjuncts.push(Formula::and(conjuncts));
        }
        let out = Formula::or(disjuncts);
        self.log("OFull", &before, &out);
        Ok(out)
    }
}

/// Convenience wrapper: reduce with a fresh engine.
pub fn reduce_full(f: &Formula, cfg: &ReduceConfig) -> Result<Formula, ReduceError> {
    Reducer::new(cfg.clone()).reduce_full(f)
}

/// Reduce and return the rewrite trace.
pub fn reduce_full_traced(
    f: &Formula,
    cfg: &ReduceConfig,
) -> Result<(Formula, Vec<TraceStep>), ReduceError> {
    let mut reducer = Reducer::new(ReduceConfig {
        trace: true,
        ..cfg.clone()
    });
    let out = reducer.reduce_full(f)?;
    Ok((out, reducer.take_trace()))
}

/// Independent cross-check for [`Reducer::eliminate_origin`]: evaluate the
/// body at every state of the mutual factual ignorance model over its own
/// atoms and read off the true rows as a disjunction of full literal
/// descriptions.
pub fn eliminate_origin_semantic(body: &Formula) -> Result<Formula, OriginSemanticError> {
    if !body.in_lbox() {
        return Err(OriginSemanticError::Quantified(body.to_string()));
    }
    let atoms = body.atoms();
    let mut agents = body.agents();
    if agents.is_empty() {
        // relations are irrelevant for a propositional body
        agents.insert(AgentName::new("a").expect("valid name"));
    }
    let mfi = crate::kripke::mfi_model(&atoms, &agents)?;
    let mut rows = Vec::new();
    let mut all_true = true;
    for state in mfi.states() {
        let pm = mfi.at(state).expect("state of the model");
        if crate::semantics::check_base(&pm, body)? {
            let val = mfi.valuation(state);
            rows.push(Formula::and(atoms.iter().map(|p| {
                let lit = Formula::Atom(p.clone());
                if val.contains(p) {
                    lit
                } else {
                    Formula::not(lit)
                }
            })));
        } else {
            all_true = false;
        }
    }
    Ok(if all_true { Formula::True } else { Formula::or(rows) })
}

#[derive(Debug, Error)]
pub enum OriginSemanticError {
    #[error("body is not quantifier-free: {0}")]
    Quantified(String),
    #[error(transparent)]
    Model(#[from] crate::kripke::ModelError),
    #[error(transparent)]
    Semantics(#[from] crate::semantics::SemanticsError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::tableau::equivalent;

    fn reduce(text: &str) -> Formula {
        reduce_full(&parse(text).unwrap(), &ReduceConfig::default()).unwrap()
    }

    fn reduce_cons(text: &str) -> Formula {
        let cfg = ReduceConfig {
            sim_mode: SimMode::Cons,
            ..ReduceConfig::default()
        };
        reduce_full(&parse(text).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn refinement_diamond_cases() {
        assert_eq!(reduce("<ref>p"), parse("p").unwrap());
        assert_eq!(reduce("<ref>(p | q)"), parse("p | q").unwrap());
        // ∇_a{p}: <ref>(<a>p & [a]p) -> <a>p
        assert_eq!(reduce("<ref>(<a>p & [a]p)"), parse("<a>p").unwrap());
        // a refinement may drop all edges
        assert_eq!(reduce("<ref>[a]false"), Formula::True);
        assert_eq!(reduce("[ref]p"), parse("p").unwrap());
    }

    #[test]
    fn simulation_diamond_cases() {
        assert_eq!(reduce("<sim>p"), parse("p").unwrap());
        assert_eq!(reduce_cons("<sim>p"), parse("p").unwrap());
        // simulations preserve successor existence through forth
        assert_eq!(reduce("<sim>[a]false"), parse("[a]false").unwrap());
        assert_eq!(reduce_cons("<sim>[a]false"), parse("[a]false").unwrap());
        assert_eq!(reduce("<sim><sim>p"), parse("p").unwrap());
    }

    #[test]
    fn unsoundness_counterexample_is_gated() {
        // Φ = {true, false}: the naive rewrite is ⊤-equivalent, the gated
        // one is false.
        let body = parse("<a>true & <a>false").unwrap();
        assert_eq!(reduce("<sim>(<a>true & <a>false)"), Formula::False);
        assert_eq!(reduce_cons("<sim>(<a>true & <a>false)"), Formula::False);

        let cfg = ReduceConfig {
            sim_mode: SimMode::Cons,
            ..ReduceConfig::default()
        };
        let mut reducer = Reducer::new(cfg.clone());
        let naive = reducer.eliminate_simulation_diamond_ungated(&body).unwrap();
        assert!(equivalent(&naive, &Formula::True, &cfg).unwrap());
    }

    #[test]
    fn origin_cases() {
        assert_eq!(reduce("[orig]p"), parse("p").unwrap());
        assert_eq!(reduce("[orig](p | q)"), parse("p | q").unwrap());
        assert_eq!(reduce("[orig]<a>(p & ~p)"), Formula::False);
        assert_eq!(reduce("[orig]<a>(p & ~q)"), Formula::True);
        assert_eq!(reduce("[orig][a]p"), Formula::False);
        // OT instance
        assert_eq!(reduce("[orig]([a]p -> p)"), Formula::True);
    }

    #[test]
    fn origin_semantic_agrees_on_spec_cases() {
        for (text, expected) in [
            ("p", "p"),
            ("<a>~p", "true"),
            ("[a]p", "false"),
        ] {
            let body = parse(text).unwrap();
            let semantic = eliminate_origin_semantic(&body).unwrap();
            assert!(
                equivalent(&semantic, &parse(expected).unwrap(), &ReduceConfig::default())
                    .unwrap(),
                "{text} -> {semantic}, want {expected}"
            );
        }
    }

    #[test]
    fn nested_quantifiers_reduce_inside_out() {
        assert_eq!(reduce("[orig]([a]p -> [b]p)"), Formula::True);
        // McKinsey-ish shape fully reduces
        let out = reduce("[sim]<sim>p -> <sim>[sim]p");
        assert!(out.in_lbox());
        assert_eq!(out, Formula::True);
    }

    #[test]
    fn trace_names_rules() {
        let (out, trace) = reduce_full_traced(
            &parse("<ref>(<a>p & [a]p)").unwrap(),
            &ReduceConfig::default(),
        )
        .unwrap();
        assert_eq!(out, parse("<a>p").unwrap());
        let rules: Vec<&str> = trace.iter().map(|s| s.rule).collect();
        assert!(rules.contains(&"RQ4"), "rules: {rules:?}");
    }

    #[test]
    fn clause_cap_propagates() {
        let cfg = ReduceConfig {
            max_dnf_clauses: 2,
            ..ReduceConfig::default()
        };
        let f = parse("<ref>((p | q) & (r | s) & (t | u))").unwrap();
        assert!(matches!(
            reduce_full(&f, &cfg),
            Err(ReduceError::Dnf(DnfError::ClauseCap { .. }))
        ));
    }
}
