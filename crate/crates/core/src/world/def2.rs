use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Finding, WorldModel};
use crate::error::WorldError;
use crate::interval::{validate_distribution, IntervalDistribution};
use crate::signature::{Action, Observation, ScalarSignature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub usize);

/// A finite world with explicit states, a per-state view and a partial
/// multivalued transition table.
#[derive(Clone, Debug)]
pub struct WorldDef2 {
    signature: ScalarSignature,
    names: Vec<String>,
    initial: StateId,
    views: Vec<Observation>,
    transitions: BTreeMap<(usize, usize), IntervalDistribution<StateId>>,
}

impl WorldDef2 {
    pub fn new(
        signature: ScalarSignature,
        names: Vec<String>,
        initial: StateId,
        views: Vec<Observation>,
    ) -> Result<Self, WorldError> {
        signature.check()?;
        if names.is_empty() {
            return Err(WorldError::MalformedWorld("a world needs at least one state".into()));
        }
        if views.len() != names.len() {
            return Err(WorldError::MalformedWorld(format!(
                "{} states but {} views",
                names.len(),
                views.len()
            )));
        }
        if initial.0 >= names.len() {
            return Err(WorldError::MalformedWorld(format!("initial state {} out of range", initial.0)));
        }
        for v in &views {
            signature.check_observation(v)?;
        }
        Ok(WorldDef2 {
            signature,
            names,
            initial,
            views,
            transitions: BTreeMap::new(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(StateId)
    }

    pub fn view(&self, s: StateId) -> &Observation {
        &self.views[s.0]
    }

    pub fn set_transition(
        &mut self,
        from: StateId,
        action: &Action,
        dist: IntervalDistribution<StateId>,
    ) -> Result<(), WorldError> {
        let index = self.signature.action_index(action)?;
        if from.0 >= self.names.len() {
            return Err(WorldError::MalformedWorld(format!("state {} out of range", from.0)));
        }
        if let Some(t) = dist.targets().iter().find(|t| t.0 >= self.names.len()) {
            return Err(WorldError::MalformedWorld(format!("target state {} out of range", t.0)));
        }
        self.transitions.insert((from.0, index), dist);
        Ok(())
    }

    pub fn remove_transition(&mut self, from: StateId, action: &Action) -> Result<(), WorldError> {
        let index = self.signature.action_index(action)?;
        self.transitions.remove(&(from.0, index));
        Ok(())
    }

    /// Defined transitions in (state, action index) order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Action, &IntervalDistribution<StateId>)> + '_ {
        self.transitions
            .iter()
            .map(|((s, a), d)| (StateId(*s), self.signature.action_at(*a), d))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// Every distribution that breaks a constraint, with its location.
    pub fn validate(&self) -> Vec<Finding> {
        self.transitions()
            .filter_map(|(s, a, d)| {
                let report = validate_distribution(d);
                (!report.is_ok()).then(|| Finding {
                    location: format!(
                        "transition from `{}` on {}",
                        self.state_name(s),
                        self.signature.format_action(&a)
                    ),
                    report,
                })
            })
            .collect()
    }
}

impl WorldModel for WorldDef2 {
    type State = StateId;

    fn signature(&self) -> &ScalarSignature {
        &self.signature
    }

    fn initial_state(&self) -> StateId {
        self.initial
    }

    fn transition(
        &self,
        state: &StateId,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<StateId>>, WorldError> {
        let index = self.signature.action_index(action)?;
        Ok(self.transitions.get(&(state.0, index)).cloned())
    }

    fn is_correct(&self, state: &StateId, action: &Action) -> Result<bool, WorldError> {
        let index = self.signature.action_index(action)?;
        Ok(self.transitions.contains_key(&(state.0, index)))
    }

    fn visible(&self, state: &StateId) -> Observation {
        self.views[state.0].clone()
    }
}
