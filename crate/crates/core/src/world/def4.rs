use super::{CumulativeState, Finding, WorldDef3, WorldModel};
use crate::error::WorldError;
use crate::interval::IntervalDistribution;
use crate::noise::NoiseDescriptor;
use crate::signature::{Action, Observation, ScalarSignature};

/// Noise on visible variable `coord` of standard state `state`, optionally
/// only while that variable holds the true value `when`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRule {
    pub state: usize,
    pub coord: usize,
    pub when: Option<u32>,
    pub descriptor: NoiseDescriptor,
}

/// A Def3 world whose visible variables are read through noise. Without a
/// matching noise rule a variable is read exactly.
#[derive(Clone, Debug)]
pub struct WorldDef4 {
    base: WorldDef3,
    noise: Vec<NoiseRule>,
    by_cell: Vec<Vec<usize>>,
}

impl WorldDef4 {
    pub fn new(base: WorldDef3) -> Self {
        let cells = base.state_count() * base.visible_count();
        WorldDef4 {
            base,
            noise: Vec::new(),
            by_cell: vec![Vec::new(); cells],
        }
    }

    pub fn base(&self) -> &WorldDef3 {
        &self.base
    }

    pub fn noise_rules(&self) -> &[NoiseRule] {
        &self.noise
    }

    /// Rules are consulted in insertion order; the first match applies.
    pub fn push_noise(&mut self, rule: NoiseRule) -> Result<(), WorldError> {
        let m = self.base.visible_count();
        if rule.state >= self.base.state_count() || rule.coord >= m {
            return Err(WorldError::MalformedNoise(format!(
                "noise on state {} variable {} is out of range",
                rule.state, rule.coord
            )));
        }
        let k = self.base.signature().observations[rule.coord].cardinality() as usize;
        if rule.descriptor.spectrum().len() != k {
            return Err(WorldError::MalformedNoise(format!(
                "spectrum has {} entries, variable has {k} values",
                rule.descriptor.spectrum().len()
            )));
        }
        if rule.when.is_some_and(|w| w as usize >= k) {
            return Err(WorldError::MalformedNoise("`when` value out of range".into()));
        }
        self.by_cell[rule.state * m + rule.coord].push(self.noise.len());
        self.noise.push(rule);
        Ok(())
    }

    pub fn validate(&self) -> Vec<Finding> {
        self.base.validate()
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise.iter().all(|r| r.descriptor.is_silent())
    }
}

impl WorldModel for WorldDef4 {
    type State = CumulativeState;

    fn signature(&self) -> &ScalarSignature {
        self.base.signature()
    }

    fn initial_state(&self) -> CumulativeState {
        self.base.initial_state()
    }

    fn transition(
        &self,
        state: &CumulativeState,
        action: &Action,
    ) -> Result<Option<IntervalDistribution<CumulativeState>>, WorldError> {
        self.base.transition(state, action)
    }

    fn is_correct(&self, state: &CumulativeState, action: &Action) -> Result<bool, WorldError> {
        self.base.is_correct(state, action)
    }

    fn visible(&self, state: &CumulativeState) -> Observation {
        self.base.visible(state)
    }

    fn noise(&self, state: &CumulativeState, coord: usize) -> Option<&NoiseDescriptor> {
        let m = self.base.visible_count();
        let truth = state.assignment[state.standard * self.base.width() + coord];
        self.by_cell[state.standard * m + coord]
            .iter()
            .map(|i| &self.noise[*i])
            .find(|r| r.when.is_none_or(|w| w == truth))
            .map(|r| &r.descriptor)
    }
}
