use serde::{Deserialize, Serialize};

use crate::error::EventError;
use crate::event::StepTemplate;
use crate::history::History;
use crate::signature::ScalarSignature;
use crate::world::StepLetter;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingRule {
    /// `None` matches every group.
    pub from: Option<usize>,
    pub on: StepTemplate,
    pub to: usize,
}

/// A deterministic automaton over step letters whose states are the groups
/// of relative stability. The first matching rule fires; a letter no rule
/// matches leaves the group unchanged, so the automaton is total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingAutomaton {
    groups: Vec<String>,
    initial: usize,
    rules: Vec<GroupingRule>,
}

/// Serialized form: group names, the initial group and rules whose `on`
/// field is a `⟨...;...⟩` template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingSpec {
    pub groups: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub rules: Vec<GroupingRuleSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingRuleSpec {
    #[serde(default = "any_group")]
    pub from: String,
    pub on: String,
    pub to: String,
}

fn any_group() -> String {
    "*".into()
}

impl GroupingAutomaton {
    pub fn new(groups: Vec<String>, initial: usize, rules: Vec<GroupingRule>) -> Result<Self, EventError> {
        if groups.is_empty() || initial >= groups.len() {
            return Err(EventError::Semantic("grouping automaton needs a valid initial group".into()));
        }
        if rules.iter().any(|r| r.to >= groups.len() || r.from.is_some_and(|f| f >= groups.len())) {
            return Err(EventError::Semantic("grouping rule refers to an unknown group".into()));
        }
        Ok(GroupingAutomaton { groups, initial, rules })
    }

    /// One group, never left.
    pub fn single() -> Self {
        GroupingAutomaton {
            groups: vec!["all".into()],
            initial: 0,
            rules: Vec::new(),
        }
    }

    pub fn from_spec(spec: &GroupingSpec, signature: &ScalarSignature) -> Result<Self, EventError> {
        let index = |name: &str| {
            spec.groups
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| EventError::Semantic(format!("unknown group `{name}`")))
        };
        let rules = spec
            .rules
            .iter()
            .map(|r| {
                Ok(GroupingRule {
                    from: if r.from == "*" { None } else { Some(index(&r.from)?) },
                    on: StepTemplate::parse(&r.on, signature)?,
                    to: index(&r.to)?,
                })
            })
            .collect::<Result<Vec<_>, EventError>>()?;
        GroupingAutomaton::new(spec.groups.clone(), index(&spec.initial)?, rules)
    }

    pub fn to_spec(&self, signature: &ScalarSignature) -> GroupingSpec {
        GroupingSpec {
            groups: self.groups.clone(),
            initial: self.groups[self.initial].clone(),
            rules: self
                .rules
                .iter()
                .map(|r| GroupingRuleSpec {
                    from: r.from.map_or_else(any_group, |f| self.groups[f].clone()),
                    on: r.on.render(signature),
                    to: self.groups[r.to].clone(),
                })
                .collect(),
        }
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn rules(&self) -> &[GroupingRule] {
        &self.rules
    }

    pub fn step(&self, group: usize, letter: &StepLetter) -> usize {
        self.rules
            .iter()
            .find(|r| r.from.is_none_or(|f| f == group) && r.on.matches(letter))
            .map_or(group, |r| r.to)
    }

    pub fn run<'a>(&self, letters: impl IntoIterator<Item = &'a StepLetter>) -> usize {
        letters.into_iter().fold(self.initial, |g, l| self.step(g, l))
    }
}

/// The group after consuming every step of `history`.
pub fn classify_group(automaton: &GroupingAutomaton, history: &History) -> usize {
    automaton.run(history.steps())
}
