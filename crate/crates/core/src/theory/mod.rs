//! Tests, statistics and theories.
//!
//! A test is an event (its condition) plus a result read from the present
//! step. Statistics count YES/NO results per experiment, test and group of
//! relative stability; theories turn counts and recency into
//! (prediction, confidence) pairs.

mod grouping;
mod predict;
mod stats;

use serde::{Deserialize, Serialize};

pub use grouping::{classify_group, GroupingAutomaton, GroupingRule, GroupingRuleSpec, GroupingSpec};
pub use predict::{
    combine_predictions, predict_from_experiment, predict_from_stability, StabilityTracker, StatRecord,
    TheoryConfig, TheoryOutput, DEFAULT_C0, DEFAULT_HALF_LIFE,
};
pub use stats::{record_observation, StatKey, StatStore};
pub use test::{evaluate_test, ResultVar, Test};

/// One (prediction, confidence) per group, plus the group of the present
/// moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestStateEstimate {
    pub current: usize,
    pub groups: Vec<TheoryOutput>,
}

/// Per group, combines the outputs of the experiments that hold now
/// (`records[g]`) with the stability output of that group's tracker. A group
/// with no evidence at all gets confidence 0.
pub fn predict_test_state(
    records: &[Vec<StatRecord>],
    stability: &[StabilityTracker],
    now: u64,
    current: usize,
    config: &TheoryConfig,
) -> TestStateEstimate {
    let groups = records
        .iter()
        .zip(stability)
        .map(|(recs, tracker)| {
            let mut outputs: Vec<TheoryOutput> =
                recs.iter().map(|r| predict_from_experiment(r, config.c0)).collect();
            outputs.push(tracker.predict(now, config.half_life));
            combine_predictions(&outputs)
        })
        .collect();
    TestStateEstimate { current, groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::EventPattern;
    use crate::history::{History, LocalHistory};
    use crate::signature::{Action, Coordinate, MoveGroup, Observation, ScalarSignature};
    use crate::world::{Correctness, StepLetter};

    fn sig() -> ScalarSignature {
        ScalarSignature::new(
            vec![Coordinate::new("cmd", ["Nothing", "PickUp", "PutDown"])],
            vec![Coordinate::new("color", ["Nothing", "Black", "White"])],
        )
        .unwrap()
        .with_groups(vec![MoveGroup {
            name: "pickup".into(),
            pattern: vec![Some(1)],
        }])
        .unwrap()
    }

    fn letter(cmd: u32, color: u32, can_pick: bool) -> StepLetter {
        StepLetter {
            action: Action(vec![cmd]),
            observation: Observation(vec![color]),
            correctness: Correctness::from_flags(&sig(), vec![true, can_pick, !can_pick]),
        }
    }

    #[test]
    fn evaluate_reads_present_step() {
        let t = Test::parse("white", "A: ends(⟨*;*⟩) / ε", "color=White", &sig()).unwrap();
        let steps = [letter(0, 2, true)];
        assert_eq!(evaluate_test(&t, &LocalHistory::new(&steps, &[], true)).unwrap(), Some(true));
        let gated = Test::parse("g", "A: ends(⟨*;Black⟩) / ε", "color=White", &sig()).unwrap();
        assert_eq!(evaluate_test(&gated, &LocalHistory::new(&steps, &[], true)).unwrap(), None);
    }

    #[test]
    fn holding_a_piece_makes_pickup_impossible() {
        let t = Test::parse("free hand", "A: ends(⟨*;White⟩) / ε", "nobody(pickup)=false", &sig()).unwrap();
        let holding = [letter(1, 2, false)];
        assert_eq!(evaluate_test(&t, &LocalHistory::new(&holding, &[], true)).unwrap(), Some(false));
        assert!(Test::parse("x", "A: ends(⟨*;*⟩) / ε", "hue=1", &sig()).is_err());
    }

    #[test]
    fn record_only_when_both_hold() {
        let t = Test::parse("white", "A: ends(⟨*;White⟩) / ε", "color=White", &sig()).unwrap();
        let e = EventPattern::parse("A: ends(⟨*;*⟩) / ε", &sig()).unwrap();
        let mut store = StatStore::new();
        let white = [letter(0, 2, true)];
        let black = [letter(0, 1, true)];
        record_observation(&mut store, &e, &t, &LocalHistory::new(&white, &[], true)).unwrap();
        record_observation(&mut store, &e, &t, &LocalHistory::new(&black, &[], true)).unwrap();
        assert_eq!(store.get(&e, &t, 0), StatRecord { n: 1, m: 0 });
    }

    #[test]
    fn grouping_walk() {
        let spec = GroupingSpec {
            groups: vec!["normal".into(), "holding".into()],
            initial: "normal".into(),
            rules: vec![
                GroupingRuleSpec {
                    from: "*".into(),
                    on: "⟨PickUp;*⟩".into(),
                    to: "holding".into(),
                },
                GroupingRuleSpec {
                    from: "holding".into(),
                    on: "⟨PutDown;*⟩".into(),
                    to: "normal".into(),
                },
            ],
        };
        let g = GroupingAutomaton::from_spec(&spec, &sig()).unwrap();
        assert_eq!(classify_group(&g, &History::new()), 0);
        let h = History::from_steps(vec![letter(0, 2, true), letter(1, 0, false)]).unwrap();
        assert_eq!(classify_group(&g, &h), 1);
        assert_eq!(GroupingAutomaton::from_spec(&g.to_spec(&sig()), &sig()).unwrap(), g);
    }

    #[test]
    fn single_group_reduces_to_test_theory() {
        let recs = vec![StatRecord { n: 4, m: 1 }, StatRecord { n: 0, m: 3 }];
        let mut tracker = StabilityTracker::default();
        tracker.record(true, 7);
        let config = TheoryConfig::default();
        let est = predict_test_state(std::slice::from_ref(&recs), &[tracker], 12, 0, &config);
        let mut outputs: Vec<TheoryOutput> = recs.iter().map(|r| predict_from_experiment(r, config.c0)).collect();
        outputs.push(predict_from_stability(Some(true), 5, config.half_life));
        assert_eq!(est.groups, vec![combine_predictions(&outputs)]);
    }

    #[test]
    fn defined_moment_dominates_its_group() {
        let mut tracker = StabilityTracker::default();
        tracker.record(false, 30);
        let est = predict_test_state(
            &[vec![StatRecord { n: 50, m: 0 }], vec![]],
            &[tracker, StabilityTracker::default()],
            30,
            0,
            &TheoryConfig::default(),
        );
        assert_eq!(est.groups[0], TheoryOutput::certain(false));
        assert_eq!(est.groups[1], TheoryOutput::UNKNOWN);
    }
}
