//! Action and observation spaces.

use serde::{Deserialize, Serialize};

use crate::error::WorldError;

/// One scalar coordinate of an action or observation vector.
/// Value index 0 is always the `Nothing` value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub values: Vec<String>,
}

impl Coordinate {
    pub fn new<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Coordinate {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn cardinality(&self) -> u32 {
        self.values.len() as u32
    }

    /// Resolves a value by name (case-, space- and underscore-insensitive),
    /// falling back to `#k` or a bare index when no name matches.
    pub fn value_index(&self, name: &str) -> Option<u32> {
        let wanted = normalize(name);
        if let Some(i) = self.values.iter().position(|v| normalize(v) == wanted) {
            return Some(i as u32);
        }
        let digits = name.trim().strip_prefix('#').unwrap_or(name.trim());
        digits.parse::<u32>().ok().filter(|i| *i < self.cardinality())
    }

    pub fn value_name(&self, index: u32) -> &str {
        self.values
            .get(index as usize)
            .map(String::as_str)
            .unwrap_or("?")
    }
}

pub(crate) fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action(pub Vec<u32>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Observation(pub Vec<u32>);

/// A cumulative move: the set of actions matching a per-coordinate pattern
/// (`None` is a wildcard).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveGroup {
    pub name: String,
    pub pattern: Vec<Option<u32>>,
}

impl MoveGroup {
    pub fn contains(&self, action: &Action) -> bool {
        self.pattern
            .iter()
            .zip(&action.0)
            .all(|(p, v)| p.is_none_or(|p| p == *v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarSignature {
    pub actions: Vec<Coordinate>,
    pub observations: Vec<Coordinate>,
    #[serde(default)]
    pub groups: Vec<MoveGroup>,
}

impl ScalarSignature {
    pub fn new(actions: Vec<Coordinate>, observations: Vec<Coordinate>) -> Result<Self, WorldError> {
        let sig = ScalarSignature {
            actions,
            observations,
            groups: Vec::new(),
        };
        sig.check()?;
        Ok(sig)
    }

    pub fn with_groups(mut self, groups: Vec<MoveGroup>) -> Result<Self, WorldError> {
        self.groups = groups;
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::MalformedSignature(m));
        if self.actions.is_empty() {
            return bad("at least one action coordinate is required".into());
        }
        if self.observations.is_empty() {
            return bad("at least one observation coordinate is required".into());
        }
        for c in self.actions.iter().chain(&self.observations) {
            if c.cardinality() < 2 {
                return bad(format!("coordinate `{}` needs at least two values", c.name));
            }
        }
        for g in &self.groups {
            if g.pattern.len() != self.actions.len() {
                return bad(format!("group `{}` pattern has the wrong length", g.name));
            }
            for (p, c) in g.pattern.iter().zip(&self.actions) {
                if p.is_some_and(|p| p >= c.cardinality()) {
                    return bad(format!("group `{}` uses an out-of-range value", g.name));
                }
            }
        }
        Ok(())
    }

    pub fn action_dims(&self) -> usize {
        self.actions.len()
    }

    pub fn obs_dims(&self) -> usize {
        self.observations.len()
    }

    /// Size of the action space.
    pub fn action_count(&self) -> usize {
        self.actions.iter().map(|c| c.cardinality() as usize).product()
    }

    pub fn check_action(&self, action: &Action) -> Result<(), WorldError> {
        if action.0.len() != self.actions.len() {
            return Err(WorldError::MalformedAction {
                action: action.0.clone(),
                reason: format!("expected {} coordinates", self.actions.len()),
            });
        }
        for (i, (v, c)) in action.0.iter().zip(&self.actions).enumerate() {
            if *v >= c.cardinality() {
                return Err(WorldError::MalformedAction {
                    action: action.0.clone(),
                    reason: format!("coordinate {i} (`{}`) has only {} values", c.name, c.cardinality()),
                });
            }
        }
        Ok(())
    }

    pub fn check_observation(&self, obs: &Observation) -> Result<(), WorldError> {
        let bad = |reason: String| {
            Err(WorldError::MalformedObservation {
                observation: obs.0.clone(),
                reason,
            })
        };
        if obs.0.len() != self.observations.len() {
            return bad(format!("expected {} coordinates", self.observations.len()));
        }
        for (v, c) in obs.0.iter().zip(&self.observations) {
            if *v >= c.cardinality() {
                return bad(format!("`{}` has only {} values", c.name, c.cardinality()));
            }
        }
        Ok(())
    }

    /// Mixed-radix index with the first coordinate most significant.
    pub fn action_index(&self, action: &Action) -> Result<usize, WorldError> {
        self.check_action(action)?;
        Ok(action
            .0
            .iter()
            .zip(&self.actions)
            .fold(0usize, |acc, (v, c)| acc * c.cardinality() as usize + *v as usize))
    }

    pub fn action_at(&self, mut index: usize) -> Action {
        let mut values = vec![0u32; self.actions.len()];
        for (slot, c) in values.iter_mut().zip(&self.actions).rev() {
            let k = c.cardinality() as usize;
            *slot = (index % k) as u32;
            index /= k;
        }
        Action(values)
    }

    pub fn all_actions(&self) -> impl Iterator<Item = Action> + '_ {
        (0..self.action_count()).map(|i| self.action_at(i))
    }

    /// The all-`Nothing` action that opens every history.
    pub fn nothing_action(&self) -> Action {
        Action(vec![0; self.actions.len()])
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        let wanted = normalize(name);
        self.groups.iter().position(|g| normalize(&g.name) == wanted)
    }

    pub fn action_coord(&self, name: &str) -> Option<usize> {
        let wanted = normalize(name);
        self.actions.iter().position(|c| normalize(&c.name) == wanted)
    }

    pub fn obs_coord(&self, name: &str) -> Option<usize> {
        let wanted = normalize(name);
        self.observations.iter().position(|c| normalize(&c.name) == wanted)
    }

    pub fn format_action(&self, action: &Action) -> String {
        let parts: Vec<_> = action
            .0
            .iter()
            .zip(&self.actions)
            .map(|(v, c)| c.value_name(*v).to_string())
            .collect();
        format!("<{}>", parts.join(", "))
    }
}
