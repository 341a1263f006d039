use std::collections::{HashMap, VecDeque};

use crate::error::WorldError;
use crate::interval::IntervalDistribution;
use crate::world::{StateId, WorldDef2, WorldDef3, WorldModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlattenOptions {
    /// Stop expanding at this breadth-first depth; `None` explores everything.
    pub reach_bound: Option<usize>,
    /// Maximum number of states before giving up.
    pub cap: usize,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions {
            reach_bound: None,
            cap: 1_000_000,
        }
    }
}

/// A Def2 world whose states are the reachable states of the source.
#[derive(Clone, Debug)]
pub struct Flattened<S> {
    pub world: WorldDef2,
    /// Source state of each output state.
    pub origin: Vec<S>,
    /// `false` when the reach bound cut the search short: states on the
    /// frontier then have no transitions in the output.
    pub closed: bool,
}

/// Breadth-first closure of a noise-free world from its initial state.
pub fn flatten<W: WorldModel>(
    world: &W,
    options: FlattenOptions,
    name: impl Fn(usize, &W::State) -> String,
) -> Result<Flattened<W::State>, WorldError> {
    let sig = world.signature().clone();
    let actions: Vec<_> = sig.all_actions().collect();
    let mut ids: HashMap<W::State, usize> = HashMap::new();
    let mut origin: Vec<W::State> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    let mut edges: Vec<(usize, usize, IntervalDistribution<StateId>)> = Vec::new();
    let mut closed = true;

    let s0 = world.initial_state();
    ids.insert(s0.clone(), 0);
    origin.push(s0);
    depth.push(0);
    queue.push_back(0);

    while let Some(id) = queue.pop_front() {
        let state = origin[id].clone();
        for coord in 0..sig.obs_dims() {
            if world.noise(&state, coord).is_some_and(|d| !d.is_silent()) {
                return Err(WorldError::MalformedWorld(
                    "flattening needs a noise-free world; remove the noise first".into(),
                ));
            }
        }
        if options.reach_bound.is_some_and(|b| depth[id] >= b) {
            closed &= actions.iter().all(|a| !world.is_correct(&state, a).unwrap_or(false));
            continue;
        }
        for (a, action) in actions.iter().enumerate() {
            let Some(dist) = world.transition(&state, action)? else {
                continue;
            };
            let mut targets = Vec::with_capacity(dist.len());
            for t in dist.targets() {
                let next = match ids.get(t) {
                    Some(&n) => n,
                    None => {
                        let n = origin.len();
                        if n >= options.cap {
                            return Err(WorldError::CapExceeded {
                                what: "reachable state count".into(),
                                cap: options.cap,
                            });
                        }
                        ids.insert(t.clone(), n);
                        origin.push(t.clone());
                        depth.push(depth[id] + 1);
                        queue.push_back(n);
                        n
                    }
                };
                targets.push(StateId(next));
            }
            edges.push((id, a, IntervalDistribution::from_parts(targets, dist.bounds().clone())?));
        }
    }

    let names = origin.iter().enumerate().map(|(i, s)| name(i, s)).collect();
    let views = origin.iter().map(|s| world.visible(s)).collect();
    let mut out = WorldDef2::new(sig.clone(), names, StateId(0), views)?;
    for (from, a, dist) in edges {
        out.set_transition(StateId(from), &sig.action_at(a), dist)?;
    }
    Ok(Flattened {
        world: out,
        origin,
        closed,
    })
}

/// Cumulative states become standard states.
pub fn def3_to_def2(
    world: &WorldDef3,
    options: FlattenOptions,
) -> Result<Flattened<crate::world::CumulativeState>, WorldError> {
    let name_of = |i: usize, _: &crate::world::CumulativeState| format!("c{i}");
    flatten(world, options, name_of)
}
