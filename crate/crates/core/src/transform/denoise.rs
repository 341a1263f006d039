use std::collections::{HashMap, VecDeque};

use num_traits::One;

use crate::error::WorldError;
use crate::interval::IntervalDistribution;
use crate::prob::{self, Prob};
use crate::signature::Observation;
use crate::world::{possible_views, CumulativeState, Def3Rule, RuleOutcome, WorldDef3, WorldDef4, WorldModel};

/// The noise-free image of a Def4 world.
#[derive(Clone, Debug)]
pub struct Denoised {
    pub world: WorldDef3,
    /// Source state and the view it was split on, per image state.
    pub origin: Vec<(CumulativeState, Observation)>,
}

/// Splits every reachable cumulative state into one state per possible view,
/// with that view stored as constant visible variables. An inbound interval
/// `[a, b]` becomes `[a·p, b·p]` where `p` is the view's probability.
pub fn def4_to_def3(world: &WorldDef4) -> Result<Denoised, WorldError> {
    def4_to_def3_capped(world, 1_000_000)
}

pub fn def4_to_def3_capped(world: &WorldDef4, cap: usize) -> Result<Denoised, WorldError> {
    let sig = world.signature().clone();
    let actions: Vec<_> = sig.all_actions().collect();

    // Reachable source states and their transitions.
    let mut ids: HashMap<CumulativeState, usize> = HashMap::new();
    let mut sources: Vec<CumulativeState> = Vec::new();
    let mut edges: Vec<Vec<(usize, IntervalDistribution<usize>)>> = Vec::new();
    let s0 = world.initial_state();
    ids.insert(s0.clone(), 0);
    sources.push(s0.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let state = sources[id].clone();
        let mut out = Vec::new();
        for (a, action) in actions.iter().enumerate() {
            let Some(dist) = world.transition(&state, action)? else {
                continue;
            };
            let mut targets = Vec::with_capacity(dist.len());
            for t in dist.targets() {
                let n = match ids.get(t) {
                    Some(&n) => n,
                    None => {
                        let n = sources.len();
                        if n >= cap {
                            return Err(WorldError::CapExceeded {
                                what: "reachable state count".into(),
                                cap,
                            });
                        }
                        ids.insert(t.clone(), n);
                        sources.push(t.clone());
                        queue.push_back(n);
                        n
                    }
                };
                targets.push(n);
            }
            out.push((a, IntervalDistribution::from_parts(targets, dist.bounds().clone())?));
        }
        edges.push(out);
    }

    // One image state per (source, view).
    let mut splits: Vec<Vec<(usize, Prob)>> = Vec::with_capacity(sources.len());
    let mut origin: Vec<(CumulativeState, Observation)> = Vec::new();
    let mut image_of: HashMap<(usize, Observation), usize> = HashMap::new();
    for (src, state) in sources.iter().enumerate() {
        let views = possible_views(world, state);
        let mass: Prob = views.iter().map(|(_, p)| p).sum();
        if !mass.is_one() {
            return Err(WorldError::MalformedNoise(format!(
                "view probabilities of a state sum to {}",
                prob::format(&mass)
            )));
        }
        let mut row = Vec::with_capacity(views.len());
        for (view, p) in views {
            let id = origin.len();
            image_of.insert((src, view.clone()), id);
            origin.push((state.clone(), view));
            row.push((id, p));
        }
        splits.push(row);
    }
    let initial_view = world.visible(&s0);
    let initial = match image_of.get(&(0, initial_view.clone())) {
        Some(&id) => id,
        None => {
            origin.push((s0.clone(), initial_view));
            origin.len() - 1
        }
    };

    let names: Vec<String> = origin
        .iter()
        .enumerate()
        .map(|(i, (_, v))| {
            let vals: Vec<String> = v.0.iter().map(u32::to_string).collect();
            format!("n{i}({})", vals.join(","))
        })
        .collect();
    let assignment: Vec<u32> = origin.iter().flat_map(|(_, v)| v.0.iter().copied()).collect();
    let source_of: Vec<usize> = origin.iter().map(|(s, _)| ids[s]).collect();
    let mut image = WorldDef3::new(
        sig.clone(),
        names,
        Vec::new(),
        CumulativeState {
            standard: initial,
            assignment,
        },
    )?;
    for (id, src) in source_of.iter().enumerate() {
        for (a, dist) in &edges[*src] {
            let mut outcomes = Vec::new();
            for (i, target) in dist.targets().iter().enumerate() {
                for (to, p) in &splits[*target] {
                    outcomes.push(RuleOutcome {
                        target: *to,
                        effects: Vec::new(),
                        lo: dist.lo(i) * p,
                        hi: dist.hi(i) * p,
                    });
                }
            }
            let pattern = sig.action_at(*a).0.into_iter().map(Some).collect();
            image.push_rule(Def3Rule::new(id, pattern, Vec::new(), outcomes)?)?;
        }
    }
    Ok(Denoised { world: image, origin })
}
