//! World models and their execution.
//!
//! Every world, whether table-driven ([`WorldDef2`], [`WorldDef3`],
//! [`WorldDef4`]) or programmatic (the chess world), implements
//! [`WorldModel`]: a partial multivalued transition over states, the true
//! values of the visible variables, and optional per-variable noise. An
//! undefined transition is an incorrect move.

mod def2;
mod def3;
mod def4;

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use def2::{StateId, WorldDef2};
pub use def3::{CumulativeState, Def3Rule, RuleOutcome, VarRef, WorldDef3};
pub use def4::{NoiseRule, WorldDef4};

use crate::chance::{sample_outcome, NoiseStream, Seeds, Streams};
use crate::error::WorldError;
use crate::interval::{IntervalDistribution, ValidationReport};
use crate::noise::NoiseDescriptor;
use crate::prob::{self, Prob};
use crate::signature::{Action, Observation, ScalarSignature};

pub trait WorldModel {
    type State: Clone + Eq + Ord + Hash + Debug;

    fn signature(&self) -> &ScalarSignature;

    fn initial_state(&self) -> Self::State;

    /// `Ok(None)` when the move is incorrect. `action` has already been
    /// checked against the signature.
    fn transition(
        &self,
        state: &Self::State,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<Self::State>>, WorldError>;

    fn is_correct(&self, state: &Self::State, action: &Action) -> Result<bool, WorldError> {
        Ok(self.transition(state, action)?.is_some())
    }

    /// True values of the visible variables.
    fn visible(&self, state: &Self::State) -> Observation;

    fn noise(&self, _state: &Self::State, _coord: usize) -> Option<&NoiseDescriptor> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult<S> {
    Moved(S),
    IncorrectMove,
}

impl<S> StepResult<S> {
    pub fn is_incorrect(&self) -> bool {
        matches!(self, StepResult::IncorrectMove)
    }
}

/// Executes one action. A malformed action is an error; an undefined
/// transition is [`StepResult::IncorrectMove`] and consumes no randomness.
pub fn step_world<W: WorldModel>(
    world: &W,
    current: &W::State,
    action: &Action,
    streams: &mut Streams,
) -> Result<StepResult<W::State>, WorldError> {
    world.signature().check_action(action)?;
    let Some(dist) = world.transition(current, action)? else {
        return Ok(StepResult::IncorrectMove);
    };
    let next = sample_outcome(&dist, &mut streams.predictable, &mut streams.unpredictable)?;
    Ok(StepResult::Moved(next.clone()))
}

/// One rendered coordinate and whether noise replaced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderedValue {
    pub value: u32,
    pub truth: u32,
    pub corrupted: bool,
}

pub fn render_view_traced<W: WorldModel>(
    world: &W,
    state: &W::State,
    noise: &mut NoiseStream,
) -> Vec<RenderedValue> {
    let truth = world.visible(state);
    truth
        .0
        .iter()
        .enumerate()
        .map(|(coord, &t)| match world.noise(state, coord) {
            Some(d) if !d.is_silent() => {
                let (value, corrupted) = d.sample(t, noise);
                RenderedValue {
                    value,
                    truth: t,
                    corrupted,
                }
            }
            _ => RenderedValue {
                value: t,
                truth: t,
                corrupted: false,
            },
        })
        .collect()
}

/// What the agent sees in `state`. Coordinates are corrupted independently.
pub fn render_view<W: WorldModel>(world: &W, state: &W::State, noise: &mut NoiseStream) -> Observation {
    Observation(
        render_view_traced(world, state, noise)
            .into_iter()
            .map(|r| r.value)
            .collect(),
    )
}

/// Every observation the state can produce, with its exact probability.
pub fn possible_views<W: WorldModel>(world: &W, state: &W::State) -> Vec<(Observation, Prob)> {
    let truth = world.visible(state);
    let mut views: Vec<(Vec<u32>, Prob)> = vec![(Vec::new(), prob::one())];
    for (coord, &t) in truth.0.iter().enumerate() {
        let outputs = match world.noise(state, coord) {
            Some(d) => d.possible_outputs(t),
            None => vec![(t, prob::one())],
        };
        views = views
            .into_iter()
            .flat_map(|(prefix, p)| {
                outputs.iter().map(move |(v, q)| {
                    let mut next = prefix.clone();
                    next.push(*v);
                    (next, &p * q)
                })
            })
            .collect();
    }
    debug_assert!(views.iter().map(|(_, p)| p).sum::<Prob>().is_one());
    views.into_iter().map(|(v, p)| (Observation(v), p)).collect()
}

/// A distribution that failed validation, and where it sits in the world.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub location: String,
    pub report: ValidationReport,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.report)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupFlags {
    pub all: bool,
    pub nobody: bool,
}

/// Which actions are correct at a moment, with `all`/`nobody` summaries for
/// every cumulative move of the signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Correctness {
    pub flags: Vec<bool>,
    pub groups: Vec<GroupFlags>,
}

impl Correctness {
    pub fn from_flags(signature: &ScalarSignature, flags: Vec<bool>) -> Self {
        let groups = signature
            .groups
            .iter()
            .map(|g| {
                let mut members = signature
                    .all_actions()
                    .zip(&flags)
                    .filter(|(a, _)| g.contains(a))
                    .map(|(_, ok)| *ok);
                let mut all = true;
                let mut nobody = true;
                for ok in members.by_ref() {
                    all &= ok;
                    nobody &= !ok;
                }
                GroupFlags { all, nobody }
            })
            .collect();
        Correctness { flags, groups }
    }

    pub fn correct_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// The group summaries agree with the per-action flags.
    pub fn is_consistent(&self, signature: &ScalarSignature) -> bool {
        Correctness::from_flags(signature, self.flags.clone()) == *self
    }
}

pub fn move_correctness<W: WorldModel>(world: &W, state: &W::State) -> Result<Correctness, WorldError> {
    let sig = world.signature();
    let flags = sig
        .all_actions()
        .map(|a| world.is_correct(state, &a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Correctness::from_flags(sig, flags))
}

/// One step of a history: the action taken, what was seen afterwards, and
/// which moves were correct at that moment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StepLetter {
    pub action: Action,
    pub observation: Observation,
    pub correctness: Correctness,
}

/// A running world: one state plus its chance streams. Single-owner; clone
/// it to run copies side by side.
#[derive(Clone, Debug)]
pub struct WorldRun<'w, W: WorldModel> {
    world: &'w W,
    state: W::State,
    streams: Streams,
}

impl<'w, W: WorldModel> WorldRun<'w, W> {
    pub fn new(world: &'w W, seeds: &Seeds) -> Self {
        WorldRun {
            world,
            state: world.initial_state(),
            streams: Streams::new(seeds),
        }
    }

    pub fn world(&self) -> &'w W {
        self.world
    }

    pub fn state(&self) -> &W::State {
        &self.state
    }

    /// Returns `false` on an incorrect move, leaving the state untouched.
    pub fn step(&mut self, action: &Action) -> Result<bool, WorldError> {
        match step_world(self.world, &self.state, action, &mut self.streams)? {
            StepResult::Moved(next) => {
                self.state = next;
                Ok(true)
            }
            StepResult::IncorrectMove => Ok(false),
        }
    }

    pub fn observe(&mut self) -> Observation {
        render_view(self.world, &self.state, &mut self.streams.noise)
    }

    pub fn correctness(&self) -> Result<Correctness, WorldError> {
        move_correctness(self.world, &self.state)
    }

    /// Steps, observes and records correctness; `None` on an incorrect move.
    pub fn letter(&mut self, action: Action) -> Result<Option<StepLetter>, WorldError> {
        if !self.step(&action)? {
            return Ok(None);
        }
        let observation = self.observe();
        let correctness = self.correctness()?;
        Ok(Some(StepLetter {
            action,
            observation,
            correctness,
        }))
    }
}

/// Seeded uniform choice among the currently correct moves.
#[derive(Clone, Debug)]
pub struct UniformPolicy(ChaCha8Rng);

impl UniformPolicy {
    pub fn new(seed: u64) -> Self {
        UniformPolicy(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn choose(&mut self, signature: &ScalarSignature, correctness: &Correctness) -> Option<Action> {
        let count = correctness.correct_count();
        if count == 0 {
            return None;
        }
        let pick = self.0.gen_range(0..count);
        let index = correctness
            .flags
            .iter()
            .enumerate()
            .filter(|(_, ok)| **ok)
            .nth(pick)
            .map(|(i, _)| i)?;
        Some(signature.action_at(index))
    }
}
