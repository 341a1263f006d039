use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::prob::{self, Prob};

pub const DEFAULT_C0: f64 = 10.0;
pub const DEFAULT_HALF_LIFE: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub c0: f64,
    pub half_life: f64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            c0: DEFAULT_C0,
            half_life: DEFAULT_HALF_LIFE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryOutput {
    pub prediction: f64,
    pub confidence: f64,
}

impl TheoryOutput {
    pub const UNKNOWN: TheoryOutput = TheoryOutput {
        prediction: 0.5,
        confidence: 0.0,
    };

    pub fn certain(value: bool) -> Self {
        TheoryOutput {
            prediction: if value { 1.0 } else { 0.0 },
            confidence: 1.0,
        }
    }
}

/// YES and NO counts for one (experiment, test, group).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatRecord {
    pub n: u64,
    pub m: u64,
}

impl StatRecord {
    pub fn total(&self) -> u64 {
        self.n + self.m
    }

    pub fn add(&mut self, yes: bool) {
        if yes {
            self.n += 1;
        } else {
            self.m += 1;
        }
    }

    pub fn merge(&mut self, other: &StatRecord) {
        self.n += other.n;
        self.m += other.m;
    }

    /// `n / (n + m)` exactly, when there is any evidence.
    pub fn prediction_exact(&self) -> Option<Prob> {
        (self.total() > 0).then(|| prob::ratio(self.n, self.total()))
    }
}

pub fn predict_from_experiment(rec: &StatRecord, c0: f64) -> TheoryOutput {
    let total = rec.total();
    if total == 0 {
        return TheoryOutput::UNKNOWN;
    }
    TheoryOutput {
        prediction: rec.n as f64 / total as f64,
        confidence: total as f64 / (total as f64 + c0),
    }
}

/// The last observed value, trusted less as time passes.
pub fn predict_from_stability(last_value: Option<bool>, steps_since: u64, half_life: f64) -> TheoryOutput {
    let Some(value) = last_value else {
        return TheoryOutput::UNKNOWN;
    };
    TheoryOutput {
        prediction: if value { 1.0 } else { 0.0 },
        confidence: (-(steps_since as f64) / half_life).exp2(),
    }
}

/// Confidence-weighted mean prediction with noisy-or confidence. Outputs of
/// confidence one, if any, decide alone.
pub fn combine_predictions(outputs: &[TheoryOutput]) -> TheoryOutput {
    let certain: Vec<&TheoryOutput> = outputs.iter().filter(|o| o.confidence >= 1.0).collect();
    if !certain.is_empty() {
        let mean = certain.iter().map(|o| o.prediction).sum::<f64>() / certain.len() as f64;
        return TheoryOutput {
            prediction: mean,
            confidence: 1.0,
        };
    }
    let weight: f64 = outputs.iter().map(|o| o.confidence).sum();
    if weight.is_zero() {
        return TheoryOutput::UNKNOWN;
    }
    let prediction = outputs.iter().map(|o| o.prediction * o.confidence).sum::<f64>() / weight;
    let doubt: f64 = outputs.iter().map(|o| 1.0 - o.confidence).product();
    TheoryOutput {
        prediction,
        confidence: 1.0 - doubt,
    }
}

/// The latest defined moment of a test within one group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityTracker {
    last: Option<(bool, u64)>,
}

impl StabilityTracker {
    pub fn record(&mut self, value: bool, moment: u64) {
        self.last = Some((value, moment));
    }

    pub fn last(&self) -> Option<(bool, u64)> {
        self.last
    }

    pub fn predict(&self, now: u64, half_life: f64) -> TheoryOutput {
        match self.last {
            Some((value, at)) => predict_from_stability(Some(value), now.saturating_sub(at), half_life),
            None => TheoryOutput::UNKNOWN,
        }
    }
}
