//! Constructions between the world definitions, and a statistical check
//! that two worlds produce the same traces.

mod denoise;
mod determinize;
mod flatten;
mod trace;

pub use denoise::{def4_to_def3, def4_to_def3_capped, Denoised};
pub use determinize::{def2_to_def1, DetState, DeterminizedWorld};
pub use flatten::{def3_to_def2, flatten, FlattenOptions, Flattened};
pub use trace::{trace_distance, Def1Family, EpisodeSource, TraceDistanceReport, TraceOptions};

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::chance::Seeds;
    use crate::interval::{validate_distribution, IntervalDistribution, IntervalOutcome};
    use crate::noise::NoiseDescriptor;
    use crate::prob::{hundredths, ratio};
    use crate::run::run_episode;
    use crate::signature::{Action, Coordinate, Observation, ScalarSignature};
    use crate::world::{
        CumulativeState, Def3Rule, NoiseRule, RuleOutcome, StateId, VarRef, WorldDef2, WorldDef3, WorldDef4,
        WorldModel,
    };

    fn sig(k: usize) -> ScalarSignature {
        ScalarSignature::new(
            vec![Coordinate::new("cmd", ["Nothing", "Go"])],
            vec![Coordinate::new("x", (0..k).map(|i| format!("v{i}")).collect::<Vec<_>>())],
        )
        .unwrap()
    }

    /// `Go` from `a` splits 50/50 between `a` and `b`; `b` is absorbing.
    fn coin() -> WorldDef2 {
        let views = vec![Observation(vec![0]), Observation(vec![1])];
        let mut w = WorldDef2::new(sig(2), vec!["a".into(), "b".into()], StateId(0), views).unwrap();
        let split = IntervalDistribution::new(vec![
            IntervalOutcome::hundredths(StateId(0), 50, 50),
            IntervalOutcome::hundredths(StateId(1), 50, 50),
        ])
        .unwrap();
        w.set_transition(StateId(0), &Action(vec![0]), IntervalDistribution::certain(StateId(0)))
            .unwrap();
        w.set_transition(StateId(0), &Action(vec![1]), split).unwrap();
        w.set_transition(StateId(1), &Action(vec![0]), IntervalDistribution::certain(StateId(1)))
            .unwrap();
        w
    }

    #[test]
    fn determinized_world_repeats_itself() {
        let w = coin();
        let seeds = Seeds::uniform(42);
        let d = def2_to_def1(&w, &seeds);
        let h1 = run_episode(&d, &seeds, 30).unwrap();
        let h2 = run_episode(&def2_to_def1(&w, &seeds), &seeds, 30).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn determinized_chance_free_world_follows_base() {
        let mut w = coin();
        w.set_transition(StateId(0), &Action(vec![1]), IntervalDistribution::certain(StateId(1)))
            .unwrap();
        for seed in 0..20 {
            let seeds = Seeds::uniform(seed);
            let base = run_episode(&w, &seeds, 10).unwrap();
            let det = run_episode(&def2_to_def1(&w, &seeds), &seeds, 10).unwrap();
            assert_eq!(base, det);
        }
    }

    #[test]
    fn determinized_frequencies_over_seeds() {
        let w = coin();
        let go = Action(vec![1]);
        let hits = (0..1000)
            .filter(|seed| {
                let d = def2_to_def1(&w, &Seeds::uniform(*seed));
                d.next(&d.initial_state(), &go).unwrap().unwrap().s == StateId(0)
            })
            .count();
        let f = hits as f64 / 1000.0;
        assert!((0.45..=0.55).contains(&f), "{f}");
    }

    #[test]
    fn determinized_state_advances_two_cells() {
        let w = coin();
        let d = def2_to_def1(&w, &Seeds::uniform(1));
        let next = d.next(&d.initial_state(), &Action(vec![0])).unwrap().unwrap();
        assert_eq!((next.x, next.y), (2, 1));
        assert!(d.next(&DetState { s: StateId(1), x: 0, y: 0 }, &Action(vec![1])).unwrap().is_none());
    }

    /// Two states, one visible counter per state; `Go` moves to the other
    /// state and bumps the counter of the state it leaves, up to 2.
    fn counters() -> WorldDef3 {
        let initial = CumulativeState {
            standard: 0,
            assignment: vec![0, 0],
        };
        let mut w = WorldDef3::new(sig(3), vec!["p".into(), "q".into()], vec![], initial).unwrap();
        for s in 0..2 {
            for c in 0..3u32 {
                let here = VarRef { state: s, slot: 0 };
                w.push_rule(
                    Def3Rule::new(
                        s,
                        vec![Some(1)],
                        vec![(here, c)],
                        vec![RuleOutcome::certain(1 - s, vec![(here, (c + 1).min(2))])],
                    )
                    .unwrap(),
                )
                .unwrap();
            }
            w.push_rule(Def3Rule::new(s, vec![Some(0)], vec![], vec![RuleOutcome::certain(s, vec![])]).unwrap())
                .unwrap();
        }
        w
    }

    #[test]
    fn flattening_enumerates_reachable_pairs() {
        let w = counters();
        let flat = def3_to_def2(&w, FlattenOptions::default()).unwrap();
        // Independent closure: walk the rules by hand.
        let mut seen = BTreeSet::new();
        let mut frontier = vec![(0usize, [0u32, 0u32])];
        while let Some((s, vars)) = frontier.pop() {
            if !seen.insert((s, vars)) {
                continue;
            }
            let mut next = vars;
            next[s] = (next[s] + 1).min(2);
            frontier.push((1 - s, next));
        }
        let got: BTreeSet<(usize, [u32; 2])> = flat
            .origin
            .iter()
            .map(|c| (c.standard, [c.assignment[0], c.assignment[1]]))
            .collect();
        assert_eq!(got, seen);
        assert!(flat.closed);
        assert!(flat.world.validate().is_empty());
    }

    #[test]
    fn flattening_respects_cap_and_bound() {
        let w = counters();
        let err = def3_to_def2(&w, FlattenOptions { reach_bound: None, cap: 3 });
        assert!(matches!(err, Err(crate::error::WorldError::CapExceeded { cap: 3, .. })));
        let bounded = def3_to_def2(
            &w,
            FlattenOptions {
                reach_bound: Some(1),
                cap: 100,
            },
        )
        .unwrap();
        assert!(!bounded.closed);
        assert_eq!(bounded.origin.len(), 2);
    }

    #[test]
    fn constants_embedding_round_trips() {
        let w = coin();
        let flat = def3_to_def2(&WorldDef3::from_def2(&w), FlattenOptions::default()).unwrap();
        assert_eq!(flat.world.state_count(), w.state_count());
        for (i, c) in flat.origin.iter().enumerate() {
            let s = StateId(c.standard);
            assert_eq!(flat.world.view(StateId(i)), w.view(s));
            for a in w.signature().all_actions() {
                let src = w.transition(&s, &a).unwrap();
                let img = flat.world.transition(&StateId(i), &a).unwrap();
                match (src, img) {
                    (None, None) => {}
                    (Some(x), Some(y)) => {
                        let mapped: Vec<StateId> =
                            y.targets().iter().map(|t| StateId(flat.origin[t.0].standard)).collect();
                        assert_eq!(mapped, x.targets());
                        assert!(std::sync::Arc::ptr_eq(x.bounds(), y.bounds()) || x.bounds().lo() == y.bounds().lo());
                    }
                    _ => panic!("correctness differs"),
                }
            }
        }
    }

    fn noisy_bool(volume: (u64, u64)) -> WorldDef4 {
        let initial = CumulativeState {
            standard: 0,
            assignment: vec![0, 1],
        };
        let mut base = WorldDef3::new(sig(2), vec!["off".into(), "on".into()], vec![], initial).unwrap();
        base.push_rule(Def3Rule::new(0, vec![None], vec![], vec![RuleOutcome::certain(1, vec![])]).unwrap())
            .unwrap();
        base.push_rule(
            Def3Rule::new(
                1,
                vec![None],
                vec![],
                vec![RuleOutcome::hundredths(0, vec![], 30, 30), RuleOutcome::hundredths(1, vec![], 70, 70)],
            )
            .unwrap(),
        )
        .unwrap();
        let mut w = WorldDef4::new(base);
        for state in 0..2 {
            w.push_noise(NoiseRule {
                state,
                coord: 0,
                when: None,
                descriptor: NoiseDescriptor::new(ratio(volume.0, volume.1), vec![ratio(1, 2), ratio(1, 2)]).unwrap(),
            })
            .unwrap();
        }
        w
    }

    #[test]
    fn zero_noise_image_is_a_renaming() {
        let w = noisy_bool((0, 1));
        let img = def4_to_def3(&w).unwrap();
        assert_eq!(img.world.state_count(), 2);
        for (c, v) in &img.origin {
            assert_eq!(&w.visible(c), v);
        }
    }

    #[test]
    fn noisy_split_rescales_bounds() {
        let w = noisy_bool((1, 2));
        let img = def4_to_def3(&w).unwrap();
        let on = img
            .origin
            .iter()
            .position(|(c, v)| c.standard == 1 && v.0 == vec![1])
            .unwrap();
        let state = CumulativeState {
            standard: on,
            assignment: img.world.initial().assignment.clone(),
        };
        let dist = img.world.transition(&state, &Action(vec![0])).unwrap().unwrap();
        let mut by_target: Vec<(usize, crate::prob::Prob)> = dist
            .targets()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.standard, dist.lo(i).clone()))
            .collect();
        by_target.sort();
        let find = |src: usize, bit: u32| {
            let id = img
                .origin
                .iter()
                .position(|(c, v)| c.standard == src && v.0 == vec![bit])
                .unwrap();
            by_target.iter().find(|(t, _)| *t == id).unwrap().1.clone()
        };
        // From `on`: 0.30 to `off` (true bit 0), 0.70 to `on` (true bit 1).
        assert_eq!(find(0, 0), hundredths(30) * ratio(3, 4));
        assert_eq!(find(0, 1), hundredths(30) * ratio(1, 4));
        assert_eq!(find(1, 1), hundredths(70) * ratio(3, 4));
        assert_eq!(find(1, 0), hundredths(70) * ratio(1, 4));
        for rule in img.world.rules() {
            let d = IntervalDistribution::from_parts(
                rule.outcomes().iter().map(|o| o.target).collect(),
                rule.bounds().clone(),
            )
            .unwrap();
            assert!(validate_distribution(&d).is_ok());
        }
    }

    #[test]
    fn image_keeps_correctness() {
        let w = noisy_bool((1, 10));
        let img = def4_to_def3(&w).unwrap();
        for (id, (c, _)) in img.origin.iter().enumerate() {
            let state = CumulativeState {
                standard: id,
                assignment: img.world.initial().assignment.clone(),
            };
            for a in w.signature().all_actions() {
                assert_eq!(w.is_correct(c, &a).unwrap(), img.world.is_correct(&state, &a).unwrap());
            }
        }
    }

    #[test]
    fn identical_worlds_are_close() {
        let w = coin();
        let r = trace_distance(
            &w,
            &w,
            TraceOptions {
                episodes: 5000,
                horizon: 3,
                seed: 1,
            },
        )
        .unwrap();
        assert!(r.distance < 0.05, "{r:?}");
        assert_eq!(r.per_step.len(), 4);
    }

    #[test]
    fn mismatched_signatures_are_rejected() {
        let a = coin();
        let b = WorldDef2::new(sig(3), vec!["z".into()], StateId(0), vec![Observation(vec![2])]).unwrap();
        let opts = TraceOptions {
            episodes: 1,
            horizon: 1,
            seed: 0,
        };
        assert!(matches!(
            trace_distance(&a, &b, opts),
            Err(crate::error::WorldError::SignatureMismatch(_))
        ));
    }
}
