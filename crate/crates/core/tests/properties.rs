//! Property tests for the invariants of the core types and operations.

use proptest::prelude::*;

use worldsim::chance::{sample_outcome, PredictableStream, Seeds, Streams, UnpredictableStream};
use worldsim::event::{EventKind, EventPattern};
use worldsim::history::{parse_log, write_log, History, LocalHistory};
use worldsim::interval::{validate_distribution, IntervalDistribution, IntervalOutcome};
use worldsim::prob;
use worldsim::run::run_episode;
use worldsim::signature::{Action, Coordinate, MoveGroup, Observation, ScalarSignature};
use worldsim::theory::{
    classify_group, combine_predictions, predict_from_experiment, GroupingAutomaton, GroupingRuleSpec,
    GroupingSpec, StatRecord, StatStore, Test, TheoryOutput,
};
use worldsim::transform::{def2_to_def1, DetState};
use worldsim::world::{
    move_correctness, step_world, Correctness, StateId, StepLetter, StepResult, WorldDef2, WorldModel,
};
use worldsim::worldfile::{parse_world, write_world, AnyWorld};
use worldsim::worlds::chess::{opponent_move, ChessConfig, ChessState, ChessWorld, Side};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

// Interval distributions ----------------------------------------------------

/// Hundredths bounds widened around a point of the simplex.
fn bounds() -> impl Strategy<Value = Vec<(u32, u32)>> {
    (2usize..=5)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(0u32..=100, k - 1),
                prop::collection::vec((0u32..=25, 0u32..=25), k),
            )
        })
        .prop_map(|(mut cuts, widen)| {
            cuts.sort_unstable();
            let mut prev = 0;
            cuts.into_iter()
                .chain([100])
                .zip(widen)
                .map(|(c, (down, up))| {
                    let p = c - prev;
                    prev = c;
                    (p.saturating_sub(down), (p + up).min(100))
                })
                .collect()
        })
}

/// Bounds that satisfy every constraint: lower bounds below a simplex point,
/// outcome `tight` at its largest allowed upper bound, the rest anywhere
/// between their lower and largest allowed upper bound.
fn valid_bounds() -> impl Strategy<Value = Vec<(u32, u32)>> {
    (bounds(), any::<prop::sample::Index>(), prop::collection::vec(0u32..=100, 5)).prop_map(|(b, tight, room)| {
        let sum_lo: u32 = b.iter().map(|x| x.0).sum();
        let tight = tight.index(b.len());
        b.iter()
            .zip(room)
            .enumerate()
            .map(|(i, (&(lo, _), r))| {
                let top = 100 - sum_lo + lo;
                (lo, if i == tight { top } else { (lo + r).min(top) })
            })
            .collect()
    })
}

fn distribution(b: &[(u32, u32)]) -> Option<IntervalDistribution<usize>> {
    IntervalDistribution::new(
        b.iter()
            .enumerate()
            .map(|(i, &(lo, hi))| IntervalOutcome::hundredths(i, lo, hi))
            .collect(),
    )
    .ok()
}

/// The four constraint families, in integer hundredths.
fn valid_by_hand(b: &[(u32, u32)]) -> bool {
    let sum_lo: u32 = b.iter().map(|x| x.0).sum();
    let sum_hi: u32 = b.iter().map(|x| x.1).sum();
    b.iter().all(|&(lo, hi)| lo <= hi && hi <= 100)
        && sum_lo <= 100
        && sum_hi >= 100
        && b.iter().all(|&(lo, hi)| hi + sum_lo <= 100 + lo)
        && b.iter().any(|&(lo, hi)| hi + sum_lo == 100 + lo)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn validation_matches_the_inequalities(b in bounds()) {
        let ok = distribution(&b).is_some_and(|d| validate_distribution(&d).is_ok());
        prop_assert_eq!(ok, valid_by_hand(&b));
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn samples_stay_in_their_intervals(b in valid_bounds(), seed in any::<u64>()) {
        prop_assert!(valid_by_hand(&b));
        let d = distribution(&b).unwrap();
        let n = 4_000;
        let mut good = PredictableStream::new(seed);
        let mut bad = UnpredictableStream::new(seed ^ 0x5555);
        let mut counts = vec![0u32; b.len()];
        for _ in 0..n {
            counts[*sample_outcome(&d, &mut good, &mut bad).unwrap()] += 1;
        }
        // Four standard deviations of a fair coin at this sample size.
        let eps = 4.0 * (0.25f64 / n as f64).sqrt();
        for (i, &(lo, hi)) in b.iter().enumerate() {
            let f = counts[i] as f64 / n as f64;
            prop_assert!(f >= lo as f64 / 100.0 - eps && f <= hi as f64 / 100.0 + eps, "outcome {} at {}", i, f);
            if hi == 0 {
                prop_assert_eq!(counts[i], 0);
            }
        }
    }
}

// Events ---------------------------------------------------------------------

fn small_signature() -> ScalarSignature {
    ScalarSignature::new(
        vec![Coordinate::new("act", ["x", "y"])],
        vec![Coordinate::new("obs", ["p", "q"])],
    )
    .unwrap()
    .with_groups(vec![MoveGroup {
        name: "ys".into(),
        pattern: vec![Some(1)],
    }])
    .unwrap()
}

fn letter_of(sig: &ScalarSignature, (a, o, fx, fy): (u32, u32, bool, bool)) -> StepLetter {
    StepLetter {
        action: Action(vec![a]),
        observation: Observation(vec![o]),
        correctness: Correctness::from_flags(sig, vec![fx, fy]),
    }
}

fn letters(max: usize) -> impl Strategy<Value = Vec<(u32, u32, bool, bool)>> {
    prop::collection::vec((0u32..2, 0u32..2, any::<bool>(), any::<bool>()), 0..=max)
}

fn template() -> impl Strategy<Value = String> {
    let act = prop_oneof![Just("*".to_string()), Just("act=x".to_string()), Just("y".to_string())];
    let obs = prop_oneof![
        Just("*".to_string()),
        Just("obs=p".to_string()),
        Just("q".to_string()),
        Just("nobody(ys)".to_string()),
        Just("all(ys)=false".to_string()),
    ];
    (act, obs).prop_map(|(a, o)| format!("⟨{a};{o}⟩"))
}

fn seq(min: usize, max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(template(), min..=max).prop_map(|v| v.concat())
}

/// A random event text of either kind.
fn event_text() -> impl Strategy<Value = String> {
    let future = prop_oneof![Just("ε".to_string()), seq(1, 2)];
    (0usize..9, seq(1, 3), future, 1usize..4, 0usize..4).prop_map(|(op, past, fut, n, m)| match op {
        0 => format!("A: ends({past}) / {fut}"),
        1 => format!("A: contains({past}) / {fut}"),
        2 => format!("A: {past} / {fut}"),
        3 => format!("B: ends({past}) / {fut}"),
        4 => format!("B: begins({past}) / {fut}"),
        5 => format!("B: contains({past}) / {fut}"),
        6 => format!("B: {past} / {fut}"),
        _ => format!("B: mod({past}, {}, {n}) / {fut}", m % n),
    })
}

fn holds(e: &EventPattern, past: &[StepLetter], future: &[StepLetter]) -> bool {
    e.holds(&LocalHistory::new(past, future, e.kind() == EventKind::B)).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn events_are_monotone(text in event_text(), past in letters(6), future in letters(4), extra in letters(3)) {
        prop_assume!(!past.is_empty());
        let sig = small_signature();
        let e = EventPattern::parse(&text, &sig).unwrap();
        let p: Vec<StepLetter> = past.iter().map(|l| letter_of(&sig, *l)).collect();
        let f: Vec<StepLetter> = future.iter().map(|l| letter_of(&sig, *l)).collect();
        let x: Vec<StepLetter> = extra.iter().map(|l| letter_of(&sig, *l)).collect();
        if holds(&e, &p, &f) {
            let longer: Vec<StepLetter> = f.iter().chain(&x).cloned().collect();
            prop_assert!(holds(&e, &p, &longer));
            if e.kind() == EventKind::A {
                let earlier: Vec<StepLetter> = x.iter().chain(&p).cloned().collect();
                prop_assert!(holds(&e, &earlier, &f));
            }
        }
    }

    #[test]
    fn reparsing_the_canonical_text_is_idempotent(text in event_text(), past in letters(6), future in letters(3)) {
        prop_assume!(!past.is_empty());
        let sig = small_signature();
        let e = EventPattern::parse(&text, &sig).unwrap();
        let again = EventPattern::parse(&e.to_string(), &sig).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), e.to_string());
        let p: Vec<StepLetter> = past.iter().map(|l| letter_of(&sig, *l)).collect();
        let f: Vec<StepLetter> = future.iter().map(|l| letter_of(&sig, *l)).collect();
        prop_assert_eq!(holds(&e, &p, &f), holds(&again, &p, &f));
    }

    #[test]
    fn kind_a_equals_kind_b_with_any_prefix(s in seq(1, 3), fut in prop_oneof![Just("ε".to_string()), seq(1, 2)],
                                            contains in any::<bool>(), past in letters(6), future in letters(3)) {
        prop_assume!(!past.is_empty());
        let sig = small_signature();
        let op = if contains { "contains" } else { "ends" };
        let a = EventPattern::parse(&format!("A: {op}({s}) / {fut}"), &sig).unwrap();
        let b = EventPattern::parse(&format!("B: {op}({s}) / {fut}"), &sig).unwrap();
        let p: Vec<StepLetter> = past.iter().map(|l| letter_of(&sig, *l)).collect();
        let f: Vec<StepLetter> = future.iter().map(|l| letter_of(&sig, *l)).collect();
        prop_assert_eq!(holds(&a, &p, &f), holds(&b, &p, &f));
    }

    #[test]
    fn tracker_agrees_with_whole_past(text in event_text(), past in letters(8)) {
        let sig = small_signature();
        let e = EventPattern::parse(&text, &sig).unwrap();
        let p: Vec<StepLetter> = past.iter().map(|l| letter_of(&sig, *l)).collect();
        let mut t = e.tracker();
        for (i, l) in p.iter().enumerate() {
            t.push(l);
            prop_assert_eq!(t.accepts(), e.past_accepts(&p[..=i]));
        }
    }

    #[test]
    fn test_values_read_only_the_present(cond in event_text(), a in letters(5), b in letters(5),
                                         now in (0u32..2, 0u32..2, any::<bool>(), any::<bool>())) {
        let sig = small_signature();
        let test = Test::parse("t", &cond, "obs=q", &sig).unwrap();
        let mk = |v: &[(u32, u32, bool, bool)]| -> Vec<StepLetter> {
            v.iter().chain([&now]).map(|l| letter_of(&sig, *l)).collect()
        };
        let (pa, pb) = (mk(&a), mk(&b));
        let read = |p: &[StepLetter]| {
            worldsim::theory::evaluate_test(&test, &LocalHistory::new(p, &[], true)).unwrap()
        };
        if let (Some(x), Some(y)) = (read(&pa), read(&pb)) {
            prop_assert_eq!(x, y);
            prop_assert_eq!(x, now.1 == 1);
        }
    }

    #[test]
    fn group_flags_follow_the_action_flags(flags in (any::<bool>(), any::<bool>())) {
        let sig = small_signature();
        let c = Correctness::from_flags(&sig, vec![flags.0, flags.1]);
        prop_assert!(c.is_consistent(&sig));
        let g = c.groups[0];
        prop_assert_eq!(g.all, flags.1);
        prop_assert_eq!(g.nobody, !flags.1);
        prop_assert!(!(g.all && g.nobody));
    }
}

// Grouping -------------------------------------------------------------------

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn classify_group_walks_the_table(
        rules in prop::collection::vec((0usize..4, template(), 0usize..3), 0..6),
        steps in letters(5),
    ) {
        let sig = small_signature();
        let names: Vec<String> = (0..3).map(|g| format!("g{g}")).collect();
        let spec = GroupingSpec {
            groups: names.clone(),
            initial: "g0".into(),
            rules: rules
                .iter()
                .map(|(from, on, to)| GroupingRuleSpec {
                    from: if *from == 3 { "*".into() } else { names[*from].clone() },
                    on: on.clone(),
                    to: names[*to].clone(),
                })
                .collect(),
        };
        let automaton = GroupingAutomaton::from_spec(&spec, &sig).unwrap();
        // A history opens with the Nothing action.
        let letters: Vec<StepLetter> = steps
            .iter()
            .enumerate()
            .map(|(i, l)| letter_of(&sig, if i == 0 { (0, l.1, l.2, l.3) } else { *l }))
            .collect();
        let history = History::from_steps(letters).unwrap();
        // The oracle re-parses every rule template as a one-letter event.
        let mut group = 0usize;
        for l in history.steps() {
            let fired = rules.iter().find(|(from, on, _)| {
                (*from == 3 || *from == group)
                    && EventPattern::parse(&format!("A: ends({on}) / ε"), &sig)
                        .unwrap()
                        .past_accepts(std::slice::from_ref(l))
            });
            if let Some((_, _, to)) = fired {
                group = *to;
            }
        }
        prop_assert_eq!(classify_group(&automaton, &history), group);
    }
}

// Theories -------------------------------------------------------------------

proptest! {
    #![proptest_config(config(512))]

    #[test]
    fn prediction_is_scale_free(n in 0u64..5_000, m in 0u64..5_000, k in 1u64..50) {
        prop_assume!(n + m > 0);
        let r = StatRecord { n, m };
        let s = StatRecord { n: k * n, m: k * m };
        prop_assert_eq!(r.prediction_exact(), s.prediction_exact());
        prop_assert_eq!(r.prediction_exact().unwrap(), prob::ratio(n, n + m));
        let (a, b) = (predict_from_experiment(&r, 10.0), predict_from_experiment(&s, 10.0));
        prop_assert_eq!(a.prediction, b.prediction);
        if k > 1 {
            prop_assert!(b.confidence > a.confidence);
        }
        prop_assert!((0.0..1.0).contains(&a.confidence));
    }

    #[test]
    fn combined_outputs_stay_in_range(outs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 0..6),
                                      extra in (0.0f64..=1.0, 0.0f64..1.0)) {
        let outs: Vec<TheoryOutput> =
            outs.iter().map(|&(p, c)| TheoryOutput { prediction: p, confidence: c }).collect();
        let c = combine_predictions(&outs);
        prop_assert!((0.0..=1.0).contains(&c.prediction) && (0.0..=1.0).contains(&c.confidence));
        let mut more = outs.clone();
        more.push(TheoryOutput { prediction: extra.0, confidence: extra.1 });
        prop_assert!(combine_predictions(&more).confidence >= c.confidence - 1e-12);
    }

    #[test]
    fn merging_stores_is_order_free(results in prop::collection::vec(prop::collection::vec((0usize..2, any::<bool>()), 0..20), 1..5),
                                    order in any::<usize>()) {
        let sig = small_signature();
        let exps = [
            EventPattern::parse("A: ends(⟨*;*⟩) / ε", &sig).unwrap(),
            EventPattern::parse("A: ends(⟨x;*⟩) / ε", &sig).unwrap(),
        ];
        let test = Test::parse("t", "A: ends(⟨*;*⟩) / ε", "obs=q", &sig).unwrap();
        let mut sequential = StatStore::new();
        let mut parts = Vec::new();
        for episode in &results {
            let mut part = StatStore::new();
            for &(e, yes) in episode {
                sequential.add(&exps[e], &test, 0, yes);
                part.add(&exps[e], &test, 0, yes);
            }
            parts.push(part);
        }
        let mut merged = StatStore::new();
        let len = parts.len();
        for i in 0..len {
            merged.merge(&parts[(i + order % len) % len]);
        }
        prop_assert_eq!(merged.iter().collect::<Vec<_>>(), sequential.iter().collect::<Vec<_>>());
    }
}

// Worlds ---------------------------------------------------------------------

fn random_def2() -> impl Strategy<Value = (Vec<Vec<(u32, u32)>>, Vec<u32>)> {
    (prop::collection::vec(bounds(), 6), prop::collection::vec(0u32..2, 3))
}

/// A 3-state world with two actions; rows that fail validation are left
/// undefined, which makes those moves incorrect.
fn build_def2(rows: &[Vec<(u32, u32)>], views: &[u32]) -> WorldDef2 {
    let sig = ScalarSignature::new(
        vec![Coordinate::new("act", ["Nothing", "Go"])],
        vec![Coordinate::new("lamp", ["Off", "On"])],
    )
    .unwrap();
    let mut w = WorldDef2::new(
        sig,
        vec!["a".into(), "b".into(), "c".into()],
        StateId(0),
        views.iter().map(|&v| Observation(vec![v])).collect(),
    )
    .unwrap();
    for (i, row) in rows.iter().enumerate() {
        let row: Vec<(u32, u32)> = row.iter().take(3).cloned().collect();
        if row.len() < 2 || !valid_by_hand(&row) {
            continue;
        }
        let d = IntervalDistribution::new(
            row.iter()
                .enumerate()
                .map(|(t, &(lo, hi))| IntervalOutcome::hundredths(StateId(t), lo, hi))
                .collect(),
        )
        .unwrap();
        w.set_transition(StateId(i / 2), &Action(vec![(i % 2) as u32]), d).unwrap();
    }
    // Nothing is always correct from the initial state.
    if w.transition(&StateId(0), &Action(vec![0])).unwrap().is_none() {
        w.set_transition(StateId(0), &Action(vec![0]), IntervalDistribution::certain(StateId(0)))
            .unwrap();
    }
    w
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn def2_files_round_trip((rows, views) in random_def2()) {
        let w = build_def2(&rows, &views);
        let text = write_world(&AnyWorld::Def2(w));
        let again = parse_world(&text).unwrap();
        prop_assert_eq!(write_world(&again), text);
    }

    #[test]
    fn determinized_steps_are_functions((rows, views) in random_def2(), seed in any::<u64>(), x in 0u64..1000, y in 0u64..1000) {
        let w = build_def2(&rows, &views);
        let seeds = Seeds::uniform(seed);
        let det = def2_to_def1(&w, &seeds);
        for s in 0..3 {
            for a in 0..2 {
                let st = DetState { s: StateId(s), x, y };
                let act = Action(vec![a]);
                let first = det.next(&st, &act).unwrap();
                prop_assert_eq!(first, def2_to_def1(&w, &seeds).next(&st, &act).unwrap());
                prop_assert_eq!(first.is_some(), w.transition(&StateId(s), &act).unwrap().is_some());
                if let Some(n) = first {
                    prop_assert_eq!((n.x, n.y), (x + 2, y + 1));
                }
            }
        }
        let h = run_episode(&det, &seeds, 30).unwrap();
        prop_assert_eq!(h, run_episode(&def2_to_def1(&w, &seeds), &seeds, 30).unwrap());
    }
}

// Chess ----------------------------------------------------------------------

/// Plays `picks` as indices into the correct moves of each state.
fn play(world: &ChessWorld, picks: &[u16]) -> Vec<ChessState> {
    let actions: Vec<Action> = world.signature().all_actions().collect();
    let mut s = world.initial_state();
    let mut out = vec![s.clone()];
    for &p in picks {
        let ok: Vec<&Action> = actions.iter().filter(|a| world.is_correct(&s, a).unwrap()).collect();
        s = world.advance(&s, ok[p as usize % ok.len()]).unwrap();
        out.push(s.clone());
    }
    out
}

fn piece_count(s: &ChessState) -> usize {
    s.board.count(Side::White) + s.board.count(Side::Black) + usize::from(s.hand.is_some())
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn chess_conserves_pieces_and_keeps_invariants(picks in prop::collection::vec(any::<u16>(), 0..400)) {
        let world = ChessWorld::new(ChessConfig::noiseless()).unwrap();
        let states = play(&world, &picks);
        for pair in states.windows(2) {
            prop_assert!(pair[1].check_invariants().is_ok());
            let new_game = pair[0].is_over() && !pair[1].is_over();
            let (before, after) = (piece_count(&pair[0]), piece_count(&pair[1]));
            if new_game {
                prop_assert_eq!(after, 32);
            } else {
                // At most one capture per side in a step.
                prop_assert!(after <= before && before - after <= 2);
            }
        }
    }

    #[test]
    fn opponent_is_deterministic(picks in prop::collection::vec(any::<u16>(), 0..300)) {
        let world = ChessWorld::new(ChessConfig::noiseless()).unwrap();
        for s in play(&world, &picks) {
            prop_assert_eq!(opponent_move(&s.board, Side::Black), opponent_move(&s.board.clone(), Side::Black));
        }
    }

    #[test]
    fn incorrect_moves_change_nothing(picks in prop::collection::vec(any::<u16>(), 0..200), seed in any::<u64>()) {
        let world = ChessWorld::new(ChessConfig::default()).unwrap();
        let state = play(&world, &picks).pop().unwrap();
        let correctness = move_correctness(&world, &state).unwrap();
        prop_assert!(correctness.is_consistent(world.signature()));
        for g in &correctness.groups {
            prop_assert!(!(g.all && g.nobody));
        }
        for (i, a) in world.signature().all_actions().enumerate() {
            let mut streams = Streams::new(&Seeds::uniform(seed));
            let before = (streams.predictable.position(), streams.unpredictable.position());
            let kept = state.clone();
            let r = step_world(&world, &state, &a, &mut streams).unwrap();
            prop_assert_eq!(r.is_incorrect(), !correctness.flags[i]);
            if let StepResult::IncorrectMove = r {
                prop_assert_eq!(&state, &kept);
                prop_assert_eq!((streams.predictable.position(), streams.unpredictable.position()), before);
            }
        }
    }

    #[test]
    fn chess_logs_round_trip(seed in any::<u64>()) {
        let world = ChessWorld::new(ChessConfig::default()).unwrap();
        let h = run_episode(&world, &Seeds::uniform(seed), 120).unwrap();
        let text = write_log(std::slice::from_ref(&h));
        let back = parse_log(&text, world.signature()).unwrap();
        prop_assert_eq!(back, vec![h]);
    }
}
