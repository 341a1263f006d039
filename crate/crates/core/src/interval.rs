//! Multivalued transitions with interval probabilities.
//!
//! A transition with `k` outcomes carries bounds `[lo_i, hi_i]`. With
//! `Sum = Σ lo_i`, a well-formed distribution satisfies
//!
//! ```text
//! lo_i <= hi_i,   Σ lo_i <= 1,   Σ hi_i >= 1,   hi_i <= 1 - Sum + lo_i
//! ```
//!
//! and the last inequality is tight for at least one outcome.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chance;
use crate::error::WorldError;
use crate::prob::{self, Prob};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalOutcome<T> {
    pub target: T,
    pub lo: Prob,
    pub hi: Prob,
}

impl<T> IntervalOutcome<T> {
    pub fn new(target: T, lo: Prob, hi: Prob) -> Self {
        IntervalOutcome { target, lo, hi }
    }

    /// Bounds given in hundredths, `lo/100 ..= hi/100`.
    pub fn hundredths(target: T, lo: u32, hi: u32) -> Self {
        IntervalOutcome {
            target,
            lo: prob::hundredths(lo),
            hi: prob::hundredths(hi),
        }
    }
}

/// Bounds shared between every distribution built from the same rule, with
/// the sampling grid computed once on first use.
#[derive(Debug)]
pub struct BoundSet {
    lo: Vec<Prob>,
    hi: Vec<Prob>,
    plan: OnceLock<Result<SamplingPlan, ValidationReport>>,
}

impl BoundSet {
    pub fn new(lo: Vec<Prob>, hi: Vec<Prob>) -> Result<Arc<Self>, WorldError> {
        if lo.is_empty() {
            return Err(WorldError::MalformedDistribution("outcome list is empty".into()));
        }
        if lo.len() != hi.len() {
            return Err(WorldError::MalformedDistribution("bound lists differ in length".into()));
        }
        Ok(Arc::new(BoundSet {
            lo,
            hi,
            plan: OnceLock::new(),
        }))
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn lo(&self) -> &[Prob] {
        &self.lo
    }

    pub fn hi(&self) -> &[Prob] {
        &self.hi
    }

    /// Whether sampling runs on the `lcm(1..=100)` grid rather than a refined
    /// one; true for every hundredths-valued bound set.
    pub fn on_base_grid(&self) -> Result<bool, WorldError> {
        Ok(self.plan()?.uses_base_grid())
    }

    pub(crate) fn plan(&self) -> Result<&SamplingPlan, WorldError> {
        self.plan
            .get_or_init(|| {
                let report = check_bounds(&self.lo, &self.hi);
                if report.is_ok() {
                    Ok(SamplingPlan::build(&self.lo, &self.hi))
                } else {
                    Err(report)
                }
            })
            .as_ref()
            .map_err(|r| WorldError::InvalidDistribution(r.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct IntervalDistribution<T> {
    targets: Vec<T>,
    bounds: Arc<BoundSet>,
}

impl<T> IntervalDistribution<T> {
    pub fn new(outcomes: Vec<IntervalOutcome<T>>) -> Result<Self, WorldError> {
        let mut targets = Vec::with_capacity(outcomes.len());
        let mut lo = Vec::with_capacity(outcomes.len());
        let mut hi = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            targets.push(o.target);
            lo.push(o.lo);
            hi.push(o.hi);
        }
        Ok(IntervalDistribution {
            targets,
            bounds: BoundSet::new(lo, hi)?,
        })
    }

    /// A single outcome with probability exactly one.
    pub fn certain(target: T) -> Self {
        static CERTAIN: OnceLock<Arc<BoundSet>> = OnceLock::new();
        let bounds = CERTAIN
            .get_or_init(|| BoundSet::new(vec![prob::one()], vec![prob::one()]).expect("non-empty"))
            .clone();
        IntervalDistribution {
            targets: vec![target],
            bounds,
        }
    }

    pub fn from_parts(targets: Vec<T>, bounds: Arc<BoundSet>) -> Result<Self, WorldError> {
        if targets.len() != bounds.len() {
            return Err(WorldError::MalformedDistribution(
                "target count differs from bound count".into(),
            ));
        }
        Ok(IntervalDistribution { targets, bounds })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn lo(&self, i: usize) -> &Prob {
        &self.bounds.lo[i]
    }

    pub fn hi(&self, i: usize) -> &Prob {
        &self.bounds.hi[i]
    }

    pub fn bounds(&self) -> &Arc<BoundSet> {
        &self.bounds
    }

    pub fn outcomes(&self) -> impl Iterator<Item = IntervalOutcome<&T>> + '_ {
        self.targets
            .iter()
            .zip(self.bounds.lo.iter().zip(&self.bounds.hi))
            .map(|(t, (lo, hi))| IntervalOutcome::new(t, lo.clone(), hi.clone()))
    }

    /// Same bounds, new targets.
    pub fn map_targets<U>(&self, f: impl FnMut(&T) -> U) -> IntervalDistribution<U> {
        IntervalDistribution {
            targets: self.targets.iter().map(f).collect(),
            bounds: self.bounds.clone(),
        }
    }

    /// Whether an outcome can occur at all.
    pub fn is_possible(&self, i: usize) -> bool {
        self.bounds.hi[i].is_positive()
    }
}

/// Which family of constraints a violation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `0 <= lo_i <= hi_i <= 1`
    Range,
    /// `Σ lo_i <= 1`
    LowerSum,
    /// `Σ hi_i >= 1`
    UpperSum,
    /// `hi_i <= 1 - Sum + lo_i`
    Slack,
    /// `hi_i = 1 - Sum + lo_i` for at least one `i`
    SlackEquality,
    /// targets pairwise distinct
    DuplicateTarget,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Range => "0 <= lo <= hi <= 1",
            Constraint::LowerSum => "sum(lo) <= 1",
            Constraint::UpperSum => "sum(hi) >= 1",
            Constraint::Slack => "(1) hi <= 1 - sum(lo) + lo",
            Constraint::SlackEquality => "(1) tight for at least one outcome",
            Constraint::DuplicateTarget => "distinct targets",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// Zero-based outcome index, when the violation concerns one outcome.
    pub index: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} violated at i={}: {}", self.constraint, i + 1, self.detail),
            None => write!(f, "{} violated: {}", self.constraint, self.detail),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, constraint: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }

    /// One-based outcome indices violating `constraint`.
    pub fn indices(&self, constraint: Constraint) -> Vec<usize> {
        self.violations
            .iter()
            .filter(|v| v.constraint == constraint)
            .filter_map(|v| v.index.map(|i| i + 1))
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_distribution<T: PartialEq>(dist: &IntervalDistribution<T>) -> ValidationReport {
    let mut report = check_bounds(&dist.bounds.lo, &dist.bounds.hi);
    for (i, t) in dist.targets.iter().enumerate() {
        if let Some(j) = dist.targets[..i].iter().position(|u| u == t) {
            report.violations.push(Violation {
                constraint: Constraint::DuplicateTarget,
                index: Some(i),
                detail: format!("same target as outcome {}", j + 1),
            });
        }
    }
    report
}

fn check_bounds(lo: &[Prob], hi: &[Prob]) -> ValidationReport {
    let zero = prob::zero();
    let one = prob::one();
    let mut violations = Vec::new();
    let mut push = |constraint, index, detail: String| {
        violations.push(Violation {
            constraint,
            index,
            detail,
        })
    };

    for (i, (a, b)) in lo.iter().zip(hi).enumerate() {
        if *a < zero || a > b || *b > one {
            push(
                Constraint::Range,
                Some(i),
                format!("[{}, {}]", prob::display(a), prob::display(b)),
            );
        }
    }
    let sum_lo: Prob = lo.iter().sum();
    let sum_hi: Prob = hi.iter().sum();
    if sum_lo > one {
        push(Constraint::LowerSum, None, format!("sum(lo) = {}", prob::display(&sum_lo)));
    }
    if sum_hi < one {
        push(Constraint::UpperSum, None, format!("sum(hi) = {}", prob::display(&sum_hi)));
    }
    let slack = &one - &sum_lo;
    let mut tight = false;
    let mut slack_broken = false;
    for (i, (a, b)) in lo.iter().zip(hi).enumerate() {
        let cap = &slack + a;
        if *b > cap {
            slack_broken = true;
            push(
                Constraint::Slack,
                Some(i),
                format!(
                    "hi = {} exceeds 1 - Sum + lo = {} (Sum = {})",
                    prob::display(b),
                    prob::display(&cap),
                    prob::display(&sum_lo)
                ),
            );
        } else if *b == cap {
            tight = true;
        }
    }
    if !tight && !slack_broken {
        push(
            Constraint::SlackEquality,
            None,
            "no outcome has hi = 1 - Sum + lo".into(),
        );
    }
    ValidationReport { violations }
}

/// Integer thresholds on a grid of `modulus` equal cells of `[0, 1)`.
///
/// Phase one: cell `j` selects outcome `i` when `j < first_phase[i]` for the
/// smallest such `i`, otherwise it lands in the remainder. Phase two: a second
/// cell `j` keeps every outcome with `j < second_phase[i]` alive.
#[derive(Debug)]
pub(crate) struct SamplingPlan {
    pub modulus: BigUint,
    pub first_phase: Vec<BigUint>,
    pub second_phase: Vec<BigUint>,
}

impl SamplingPlan {
    fn build(lo: &[Prob], hi: &[Prob]) -> Self {
        let sum_lo: Prob = lo.iter().sum();
        let slack = prob::one() - &sum_lo;
        let coefficients: Vec<Prob> = if slack.is_positive() {
            lo.iter().zip(hi).map(|(a, b)| (b - a) / &slack).collect()
        } else {
            vec![prob::zero(); lo.len()]
        };

        let grid = chance::q_grid();
        let mut modulus = BigInt::from(grid.clone());
        for p in lo.iter().chain(&coefficients) {
            if !(&modulus % p.denom()).is_zero() {
                modulus = modulus.lcm(p.denom());
            }
        }

        let cells = |p: &Prob| -> BigUint {
            let scaled = p * &modulus;
            debug_assert!(scaled.is_integer());
            scaled.to_integer().to_biguint().unwrap_or_default()
        };
        let mut cumulative = prob::zero();
        let first_phase = lo
            .iter()
            .map(|a| {
                cumulative += a;
                cells(&cumulative)
            })
            .collect();
        let second_phase = coefficients.iter().map(cells).collect();
        SamplingPlan {
            modulus: modulus.to_biguint().unwrap_or_else(BigUint::one),
            first_phase,
            second_phase,
        }
    }

    pub fn uses_base_grid(&self) -> bool {
        &self.modulus == chance::q_grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(bounds: &[(u32, u32)]) -> IntervalDistribution<usize> {
        IntervalDistribution::new(
            bounds
                .iter()
                .enumerate()
                .map(|(i, (lo, hi))| IntervalOutcome::hundredths(i, *lo, *hi))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_outcome_is_valid() {
        assert!(validate_distribution(&dist(&[(100, 100)])).is_ok());
    }

    #[test]
    fn exact_two_point_is_valid() {
        assert!(validate_distribution(&dist(&[(50, 50), (50, 50)])).is_ok());
    }

    #[test]
    fn slack_violation_names_both_outcomes() {
        let report = validate_distribution(&dist(&[(30, 90), (30, 90)]));
        assert_eq!(report.indices(Constraint::Slack), vec![1, 2]);
        assert!(report.to_string().contains("(1)"));
        assert!(report.to_string().contains("i=1"));
    }

    #[test]
    fn sum_constraints() {
        let report = validate_distribution(&dist(&[(60, 60), (50, 50)]));
        assert!(report.has(Constraint::LowerSum));
        let report = validate_distribution(&dist(&[(10, 20), (10, 20)]));
        assert!(report.has(Constraint::UpperSum));
    }

    #[test]
    fn slack_must_be_tight_somewhere() {
        // Sum = 0.4, slack 0.6; neither outcome reaches hi = lo + 0.6.
        let report = validate_distribution(&dist(&[(20, 70), (20, 70)]));
        assert!(report.has(Constraint::SlackEquality), "{report}");
        assert!(validate_distribution(&dist(&[(20, 80), (20, 70)])).is_ok());
    }

    #[test]
    fn empty_distribution_is_malformed() {
        let empty: Result<IntervalDistribution<usize>, _> = IntervalDistribution::new(vec![]);
        assert!(matches!(empty, Err(WorldError::MalformedDistribution(_))));
    }

    #[test]
    fn duplicate_targets_are_reported() {
        let d = IntervalDistribution::new(vec![
            IntervalOutcome::hundredths(7, 50, 50),
            IntervalOutcome::hundredths(7, 50, 50),
        ])
        .unwrap();
        assert!(validate_distribution(&d).has(Constraint::DuplicateTarget));
    }

    #[test]
    fn plan_uses_hundredths_grid() {
        let d = dist(&[(20, 80), (20, 80)]);
        let plan = d.bounds().plan().unwrap();
        assert!(plan.uses_base_grid());
        let q = chance::q_grid();
        assert_eq!(plan.first_phase[0], q / 5u32);
        assert_eq!(plan.first_phase[1], q * 2u32 / 5u32);
        // c_i = 0.6 / 0.6 = 1
        assert_eq!(plan.second_phase[0], q.clone());
    }

    #[test]
    fn plan_refines_grid_for_other_rationals() {
        let d = IntervalDistribution::new(vec![
            IntervalOutcome::new(0, prob::ratio(1, 103), prob::ratio(1, 103)),
            IntervalOutcome::new(1, prob::ratio(102, 103), prob::ratio(102, 103)),
        ])
        .unwrap();
        let plan = d.bounds().plan().unwrap();
        assert!(!plan.uses_base_grid());
        assert!((&plan.modulus % 103u32).is_zero());
    }
}
