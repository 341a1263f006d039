use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::predict::StatRecord;
use super::test::{evaluate_test, Test};
use crate::error::EventError;
use crate::event::EventPattern;
use crate::history::LocalHistory;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatKey {
    pub experiment: String,
    pub test: String,
    pub group: usize,
}

/// Counts per (experiment, test, group). Merging adds counts, so stores
/// built from separate episodes combine in any order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatStore {
    records: BTreeMap<StatKey, StatRecord>,
}

impl StatStore {
    pub fn new() -> Self {
        StatStore::default()
    }

    pub fn get(&self, experiment: &EventPattern, test: &Test, group: usize) -> StatRecord {
        self.records
            .get(&key(experiment, test, group))
            .copied()
            .unwrap_or_default()
    }

    pub fn add(&mut self, experiment: &EventPattern, test: &Test, group: usize, yes: bool) {
        self.records.entry(key(experiment, test, group)).or_default().add(yes);
    }

    pub fn merge(&mut self, other: &StatStore) {
        for (k, r) in &other.records {
            self.records.entry(k.clone()).or_default().merge(r);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StatKey, &StatRecord)> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Counts when both the experiment and the test condition hold on `lh`,
    /// under `group`. Returns the result that was counted.
    pub fn record_in_group(
        &mut self,
        experiment: &EventPattern,
        test: &Test,
        lh: &LocalHistory<'_>,
        group: usize,
    ) -> Result<Option<bool>, EventError> {
        if !experiment.holds(lh)? {
            return Ok(None);
        }
        let result = evaluate_test(test, lh)?;
        if let Some(yes) = result {
            self.add(experiment, test, group, yes);
        }
        Ok(result)
    }
}

fn key(experiment: &EventPattern, test: &Test, group: usize) -> StatKey {
    StatKey {
        experiment: experiment.to_string(),
        test: test.name.clone(),
        group,
    }
}

/// [`StatStore::record_in_group`] for a single group of relative stability.
pub fn record_observation(
    store: &mut StatStore,
    experiment: &EventPattern,
    test: &Test,
    lh: &LocalHistory<'_>,
) -> Result<Option<bool>, EventError> {
    store.record_in_group(experiment, test, lh, 0)
}
