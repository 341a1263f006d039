use std::collections::BTreeSet;

use super::EventPattern;
use crate::error::WorldError;
use crate::history::LocalHistory;
use crate::world::{move_correctness, possible_views, StepLetter, WorldModel};

#[derive(Clone, Copy, Debug)]
pub struct PropertyOptions {
    /// Steps per explored history, the opening `Nothing` step included.
    pub horizon: usize,
    /// Maximum number of complete histories to explore.
    pub cap: usize,
}

impl PropertyOptions {
    pub fn new(horizon: usize) -> Self {
        PropertyOptions { horizon, cap: 1_000_000 }
    }
}

/// States `s` reached at some moment of some possible history of at most
/// `horizon` steps where the event holds.
///
/// Histories are explored in full, from the first step, and only maximal
/// ones are checked: prepending to the past or appending to the future never
/// turns an event off.
pub fn experimental_property<W: WorldModel>(
    world: &W,
    event: &EventPattern,
    options: PropertyOptions,
) -> Result<BTreeSet<W::State>, WorldError> {
    let mut found = BTreeSet::new();
    if options.horizon == 0 {
        return Ok(found);
    }
    let mut search = Search {
        world,
        event,
        options,
        states: Vec::new(),
        letters: Vec::new(),
        explored: 0,
        found: &mut found,
    };
    let s0 = world.initial_state();
    let nothing = world.signature().nothing_action();
    if !world.is_correct(&s0, &nothing)? {
        return Err(WorldError::BlindStartRejected);
    }
    search.branch(&s0, &nothing)?;
    Ok(found)
}

struct Search<'a, W: WorldModel> {
    world: &'a W,
    event: &'a EventPattern,
    options: PropertyOptions,
    states: Vec<W::State>,
    letters: Vec<StepLetter>,
    explored: usize,
    found: &'a mut BTreeSet<W::State>,
}

impl<W: WorldModel> Search<'_, W> {
    fn branch(&mut self, from: &W::State, action: &crate::signature::Action) -> Result<(), WorldError> {
        let Some(dist) = self.world.transition(from, action)? else {
            return Ok(());
        };
        for (i, target) in dist.targets().iter().enumerate() {
            if !dist.is_possible(i) {
                continue;
            }
            let correctness = move_correctness(self.world, target)?;
            for (observation, _) in possible_views(self.world, target) {
                self.states.push(target.clone());
                self.letters.push(StepLetter {
                    action: action.clone(),
                    observation,
                    correctness: correctness.clone(),
                });
                self.extend()?;
                self.states.pop();
                self.letters.pop();
            }
        }
        Ok(())
    }

    fn extend(&mut self) -> Result<(), WorldError> {
        let here = self.states.last().expect("non-empty").clone();
        let correctness = self.letters.last().expect("non-empty").correctness.clone();
        if self.letters.len() < self.options.horizon && correctness.correct_count() > 0 {
            let sig = self.world.signature();
            for (index, ok) in correctness.flags.iter().enumerate() {
                if *ok {
                    self.branch(&here, &sig.action_at(index))?;
                }
            }
            return Ok(());
        }
        self.explored += 1;
        if self.explored > self.options.cap {
            return Err(WorldError::CapExceeded {
                what: "explored histories".into(),
                cap: self.options.cap,
            });
        }
        for q in 1..=self.letters.len() {
            let lh = LocalHistory::new(&self.letters[..q], &self.letters[q..], true);
            if self.event.holds(&lh).unwrap_or(false) {
                self.found.insert(self.states[q - 1].clone());
            }
        }
        Ok(())
    }
}
