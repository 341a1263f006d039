//! Episodes under the seeded uniform policy.

use crate::chance::Seeds;
use crate::error::WorldError;
use crate::history::History;
use crate::world::{StepLetter, UniformPolicy, WorldModel, WorldRun};

/// Runs one episode: the opening `Nothing` step, then up to `horizon` steps
/// chosen uniformly among the correct moves. Stops early at a state with no
/// correct move. `on_step` sees every letter as it is produced.
pub fn run_episode_with<W: WorldModel>(
    world: &W,
    seeds: &Seeds,
    horizon: usize,
    mut on_step: impl FnMut(&StepLetter),
) -> Result<History, WorldError> {
    let sig = world.signature();
    let mut run = WorldRun::new(world, seeds);
    let mut policy = UniformPolicy::new(seeds.policy);
    let mut history = History::new();
    let first = run
        .letter(sig.nothing_action())?
        .ok_or(WorldError::BlindStartRejected)?;
    on_step(&first);
    history.push(first).expect("opens with Nothing");
    for _ in 0..horizon {
        let correctness = &history.steps().last().expect("non-empty").correctness;
        let Some(action) = policy.choose(sig, correctness) else {
            break;
        };
        let letter = run
            .letter(action)?
            .expect("the policy only picks correct moves");
        on_step(&letter);
        history.push(letter).expect("not the first step");
    }
    Ok(history)
}

pub fn run_episode<W: WorldModel>(world: &W, seeds: &Seeds, horizon: usize) -> Result<History, WorldError> {
    run_episode_with(world, seeds, horizon, |_| {})
}

/// Episode `k` runs under `seeds.for_episode(k)`.
pub fn run_episodes<W: WorldModel>(
    world: &W,
    seeds: &Seeds,
    episodes: usize,
    horizon: usize,
) -> Result<Vec<History>, WorldError> {
    (0..episodes)
        .map(|k| run_episode(world, &seeds.for_episode(k as u64), horizon))
        .collect()
}
