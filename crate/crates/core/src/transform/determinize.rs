use serde::{Deserialize, Serialize};

use crate::chance::{sample_index, BadGenerator, GoodGenerator, Seeds};
use crate::error::WorldError;
use crate::interval::IntervalDistribution;
use crate::signature::{Action, Observation, ScalarSignature};
use crate::world::{StateId, WorldDef2, WorldModel};

/// A state of the determinized world: the base state plus positions in the
/// two generator sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DetState {
    pub s: StateId,
    pub x: u64,
    pub y: u64,
}

/// A Def2 world made single-valued: every transition consults the cells at
/// `x` and `x + 1` and the value at `y`, then moves to `(s', x + 2, y + 1)`.
#[derive(Clone, Debug)]
pub struct DeterminizedWorld {
    base: WorldDef2,
    good: GoodGenerator,
    bad: BadGenerator,
}

pub fn def2_to_def1(world: &WorldDef2, seeds: &Seeds) -> DeterminizedWorld {
    DeterminizedWorld {
        base: world.clone(),
        good: GoodGenerator::new(seeds.predictable),
        bad: BadGenerator::uniform(seeds.unpredictable),
    }
}

impl DeterminizedWorld {
    pub fn base(&self) -> &WorldDef2 {
        &self.base
    }

    /// The unique successor, or `None` on an incorrect move.
    pub fn next(&self, state: &DetState, action: &Action) -> Result<Option<DetState>, WorldError> {
        let Some(dist) = self.base.transition(&state.s, action)? else {
            return Ok(None);
        };
        let index = sample_index(
            &dist,
            |phase, modulus| self.good.cell(state.x + phase as u64, modulus),
            || self.bad.value(state.y),
        )?;
        Ok(Some(DetState {
            s: dist.targets()[index],
            x: state.x + 2,
            y: state.y + 1,
        }))
    }
}

impl WorldModel for DeterminizedWorld {
    type State = DetState;

    fn signature(&self) -> &ScalarSignature {
        self.base.signature()
    }

    fn initial_state(&self) -> DetState {
        DetState {
            s: self.base.initial_state(),
            x: 0,
            y: 0,
        }
    }

    fn transition(
        &self,
        state: &DetState,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<DetState>>, WorldError> {
        Ok(self.next(state, action)?.map(IntervalDistribution::certain))
    }

    fn is_correct(&self, state: &DetState, action: &Action) -> Result<bool, WorldError> {
        self.base.is_correct(&state.s, action)
    }

    fn visible(&self, state: &DetState) -> Observation {
        self.base.visible(&state.s)
    }
}
