use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Finding, StateId, WorldDef2, WorldModel};
use crate::error::WorldError;
use crate::interval::{BoundSet, IntervalDistribution};
use crate::prob::{self, Prob};
use crate::signature::{Action, Coordinate, Observation, ScalarSignature};

/// A standard state together with the value of every variable of every state.
/// Variable `slot` of state `s` lives at `s * (m + u) + slot`; slots below `m`
/// are visible.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CumulativeState {
    pub standard: usize,
    pub assignment: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarRef {
    pub state: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOutcome {
    pub target: usize,
    pub effects: Vec<(VarRef, u32)>,
    pub lo: Prob,
    pub hi: Prob,
}

impl RuleOutcome {
    pub fn hundredths(target: usize, effects: Vec<(VarRef, u32)>, lo: u32, hi: u32) -> Self {
        RuleOutcome {
            target,
            effects,
            lo: prob::hundredths(lo),
            hi: prob::hundredths(hi),
        }
    }

    pub fn certain(target: usize, effects: Vec<(VarRef, u32)>) -> Self {
        RuleOutcome {
            target,
            effects,
            lo: prob::one(),
            hi: prob::one(),
        }
    }
}

/// Transition rule: from standard state `from`, on any action matching
/// `action`, when every guard variable holds its value.
#[derive(Clone, Debug)]
pub struct Def3Rule {
    pub from: usize,
    pub action: Vec<Option<u32>>,
    pub guard: Vec<(VarRef, u32)>,
    outcomes: Vec<RuleOutcome>,
    bounds: Arc<BoundSet>,
}

impl Def3Rule {
    pub fn new(
        from: usize,
        action: Vec<Option<u32>>,
        guard: Vec<(VarRef, u32)>,
        outcomes: Vec<RuleOutcome>,
    ) -> Result<Self, WorldError> {
        let bounds = BoundSet::new(
            outcomes.iter().map(|o| o.lo.clone()).collect(),
            outcomes.iter().map(|o| o.hi.clone()).collect(),
        )?;
        Ok(Def3Rule {
            from,
            action,
            guard,
            outcomes,
            bounds,
        })
    }

    pub fn outcomes(&self) -> &[RuleOutcome] {
        &self.outcomes
    }

    pub fn bounds(&self) -> &Arc<BoundSet> {
        &self.bounds
    }

    fn matches(&self, state: &CumulativeState, action: &Action, width: usize) -> bool {
        self.from == state.standard
            && self
                .action
                .iter()
                .zip(&action.0)
                .all(|(p, v)| p.is_none_or(|p| p == *v))
            && self
                .guard
                .iter()
                .all(|(r, v)| state.assignment[r.state * width + r.slot] == *v)
    }
}

/// A world over cumulative states: standard states plus `m` visible and `u`
/// invisible variables attached to every standard state. The first matching
/// rule defines a transition; no match means an incorrect move.
#[derive(Clone, Debug)]
pub struct WorldDef3 {
    signature: ScalarSignature,
    names: Vec<String>,
    invisible: Vec<Coordinate>,
    initial: CumulativeState,
    rules: Vec<Def3Rule>,
    by_state: Vec<Vec<usize>>,
}

impl WorldDef3 {
    pub fn new(
        signature: ScalarSignature,
        names: Vec<String>,
        invisible: Vec<Coordinate>,
        initial: CumulativeState,
    ) -> Result<Self, WorldError> {
        signature.check()?;
        if names.is_empty() {
            return Err(WorldError::MalformedWorld("a world needs at least one state".into()));
        }
        if invisible.iter().any(|c| c.cardinality() < 1) {
            return Err(WorldError::MalformedWorld("invisible variable with no values".into()));
        }
        let world = WorldDef3 {
            by_state: vec![Vec::new(); names.len()],
            signature,
            names,
            invisible,
            initial,
            rules: Vec::new(),
        };
        world.check_state(&world.initial)?;
        Ok(world)
    }

    /// The constants-only embedding of a Def2 world: every state carries its
    /// view as visible variables and nothing ever changes them.
    pub fn from_def2(world: &WorldDef2) -> Self {
        let names = world.state_names().to_vec();
        let assignment = (0..names.len())
            .flat_map(|s| world.view(StateId(s)).0.clone())
            .collect();
        let initial = CumulativeState {
            standard: world.initial_state().0,
            assignment,
        };
        let mut out = WorldDef3::new(world.signature().clone(), names, Vec::new(), initial)
            .expect("a valid Def2 world embeds");
        for (from, action, dist) in world.transitions() {
            let outcomes = dist
                .outcomes()
                .map(|o| RuleOutcome {
                    target: o.target.0,
                    effects: Vec::new(),
                    lo: o.lo,
                    hi: o.hi,
                })
                .collect();
            let rule = Def3Rule::new(from.0, action.0.iter().map(|v| Some(*v)).collect(), Vec::new(), outcomes)
                .expect("non-empty");
            out.push_rule(rule).expect("in range");
        }
        out
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn visible_count(&self) -> usize {
        self.signature.obs_dims()
    }

    pub fn invisible(&self) -> &[Coordinate] {
        &self.invisible
    }

    /// Variables per standard state, `m + u`.
    pub fn width(&self) -> usize {
        self.visible_count() + self.invisible.len()
    }

    pub fn variable_count(&self) -> usize {
        self.width() * self.state_count()
    }

    pub fn var_index(&self, r: VarRef) -> usize {
        r.state * self.width() + r.slot
    }

    pub fn var_domain(&self, slot: usize) -> &Coordinate {
        let m = self.visible_count();
        if slot < m {
            &self.signature.observations[slot]
        } else {
            &self.invisible[slot - m]
        }
    }

    /// Looks a slot up by variable name among visible, then invisible names.
    pub fn slot_by_name(&self, name: &str) -> Option<usize> {
        self.signature.obs_coord(name).or_else(|| {
            let wanted = crate::signature::normalize(name);
            self.invisible
                .iter()
                .position(|c| crate::signature::normalize(&c.name) == wanted)
                .map(|i| i + self.visible_count())
        })
    }

    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> &CumulativeState {
        &self.initial
    }

    pub fn rules(&self) -> &[Def3Rule] {
        &self.rules
    }

    pub fn check_state(&self, s: &CumulativeState) -> Result<(), WorldError> {
        if s.standard >= self.state_count() {
            return Err(WorldError::MalformedWorld(format!("standard state {} out of range", s.standard)));
        }
        if s.assignment.len() != self.variable_count() {
            return Err(WorldError::MalformedWorld(format!(
                "assignment has {} values, expected {}",
                s.assignment.len(),
                self.variable_count()
            )));
        }
        for (i, v) in s.assignment.iter().enumerate() {
            if *v >= self.var_domain(i % self.width()).cardinality() {
                return Err(WorldError::MalformedWorld(format!("variable {i} has out-of-range value {v}")));
            }
        }
        Ok(())
    }

    fn check_var(&self, r: VarRef, value: u32) -> Result<(), WorldError> {
        if r.state >= self.state_count() || r.slot >= self.width() {
            return Err(WorldError::MalformedWorld(format!("variable {r:?} out of range")));
        }
        if value >= self.var_domain(r.slot).cardinality() {
            return Err(WorldError::MalformedWorld(format!("value {value} out of range for {r:?}")));
        }
        Ok(())
    }

    pub fn push_rule(&mut self, rule: Def3Rule) -> Result<(), WorldError> {
        if rule.from >= self.state_count() {
            return Err(WorldError::MalformedWorld(format!("rule source {} out of range", rule.from)));
        }
        if rule.action.len() != self.signature.action_dims() {
            return Err(WorldError::MalformedWorld("rule action pattern has the wrong length".into()));
        }
        for (p, c) in rule.action.iter().zip(&self.signature.actions) {
            if p.is_some_and(|p| p >= c.cardinality()) {
                return Err(WorldError::MalformedWorld("rule action pattern out of range".into()));
            }
        }
        for (r, v) in &rule.guard {
            self.check_var(*r, *v)?;
        }
        for o in &rule.outcomes {
            if o.target >= self.state_count() {
                return Err(WorldError::MalformedWorld(format!("rule target {} out of range", o.target)));
            }
            for (r, v) in &o.effects {
                self.check_var(*r, *v)?;
            }
        }
        self.by_state[rule.from].push(self.rules.len());
        self.rules.push(rule);
        Ok(())
    }

    pub fn matching_rule(&self, state: &CumulativeState, action: &Action) -> Option<&Def3Rule> {
        let width = self.width();
        self.by_state
            .get(state.standard)?
            .iter()
            .map(|i| &self.rules[*i])
            .find(|r| r.matches(state, action, width))
    }

    fn apply(&self, state: &CumulativeState, outcome: &RuleOutcome) -> CumulativeState {
        let mut assignment = state.assignment.clone();
        for (r, v) in &outcome.effects {
            assignment[self.var_index(*r)] = *v;
        }
        CumulativeState {
            standard: outcome.target,
            assignment,
        }
    }

    pub fn validate(&self) -> Vec<Finding> {
        let mut findings = Vec::new();
        for (k, rule) in self.rules.iter().enumerate() {
            let dist = IntervalDistribution::from_parts(
                rule.outcomes
                    .iter()
                    .map(|o| {
                        let mut e = o.effects.clone();
                        e.sort();
                        e.dedup();
                        (o.target, e)
                    })
                    .collect::<Vec<_>>(),
                rule.bounds.clone(),
            )
            .expect("lengths agree");
            let report = crate::interval::validate_distribution(&dist);
            if !report.is_ok() {
                findings.push(Finding {
                    location: format!("rule {} from `{}`", k + 1, self.names[rule.from]),
                    report,
                });
            }
        }
        findings
    }

    /// The values of state `s`'s variables, visible then invisible.
    pub fn variables_of<'a>(&self, state: &'a CumulativeState, s: usize) -> &'a [u32] {
        let w = self.width();
        &state.assignment[s * w..(s + 1) * w]
    }

    pub fn format_state(&self, state: &CumulativeState) -> String {
        let vars: Vec<String> = (0..self.state_count())
            .map(|s| {
                let vals: Vec<&str> = self
                    .variables_of(state, s)
                    .iter()
                    .enumerate()
                    .map(|(slot, v)| self.var_domain(slot).value_name(*v))
                    .collect();
                format!("{}[{}]", self.names[s], vals.join(","))
            })
            .collect();
        format!("@{} {}", self.names[state.standard], vars.join(" "))
    }
}

impl WorldModel for WorldDef3 {
    type State = CumulativeState;

    fn signature(&self) -> &ScalarSignature {
        &self.signature
    }

    fn initial_state(&self) -> CumulativeState {
        self.initial.clone()
    }

    fn transition(
        &self,
        state: &CumulativeState,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<CumulativeState>>, WorldError> {
        let Some(rule) = self.matching_rule(state, action) else {
            return Ok(None);
        };
        let targets: Vec<CumulativeState> = rule.outcomes.iter().map(|o| self.apply(state, o)).collect();
        for (i, t) in targets.iter().enumerate() {
            if let Some(j) = targets[..i].iter().position(|u| u == t) {
                return Err(WorldError::CollidingOutcomes {
                    first: j + 1,
                    second: i + 1,
                });
            }
        }
        Ok(Some(IntervalDistribution::from_parts(targets, rule.bounds.clone())?))
    }

    fn is_correct(&self, state: &CumulativeState, action: &Action) -> Result<bool, WorldError> {
        Ok(self.matching_rule(state, action).is_some())
    }

    fn visible(&self, state: &CumulativeState) -> Observation {
        let m = self.visible_count();
        let start = state.standard * self.width();
        Observation(state.assignment[start..start + m].to_vec())
    }
}
