//! A corridor of doors. The agent walks left and right and tries the door in
//! front of it; a try shows whether that door is locked right now. Each door
//! follows a periodic schedule driven by a hidden clock that counts steps.

use serde::{Deserialize, Serialize};

use crate::error::{EventError, WorldError};
use crate::signature::{Coordinate, ScalarSignature};
use crate::theory::{GroupingAutomaton, GroupingRuleSpec, GroupingSpec};
use crate::world::{CumulativeState, Def3Rule, RuleOutcome, VarRef, WorldDef3};

pub const CMD_NOTHING: u32 = 0;
pub const CMD_LEFT: u32 = 1;
pub const CMD_RIGHT: u32 = 2;
pub const CMD_TRY: u32 = 3;
pub const DOOR_LOCKED: u32 = 1;
pub const DOOR_UNLOCKED: u32 = 2;

const SLOT_DOOR: usize = 0;
const SLOT_LOCKED: usize = 1;
const SLOT_CLOCK: usize = 2;
const MAX_RULES: usize = 200_000;

/// One schedule per door, a string over `L` (locked) and `U` (unlocked).
/// Character `k` applies at moments `q` with `q mod len == k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorsConfig {
    pub schedules: Vec<String>,
}

impl DoorsConfig {
    fn parsed(&self) -> Result<Vec<Vec<bool>>, WorldError> {
        if self.schedules.is_empty() {
            return Err(WorldError::MalformedWorld("a corridor needs at least one door".into()));
        }
        self.schedules
            .iter()
            .enumerate()
            .map(|(d, s)| {
                if s.is_empty() {
                    return Err(WorldError::MalformedWorld(format!("door {d} has an empty schedule")));
                }
                s.chars()
                    .map(|c| match c.to_ascii_uppercase() {
                        'L' => Ok(true),
                        'U' => Ok(false),
                        _ => Err(WorldError::MalformedWorld(format!(
                            "door {d} schedule has `{c}`; use L or U"
                        ))),
                    })
                    .collect()
            })
            .collect()
    }

    /// Common period of all schedules.
    pub fn period(&self) -> usize {
        self.schedules
            .iter()
            .map(|s| s.chars().count().max(1))
            .fold(1, num_integer::lcm)
    }
}

pub fn doors_signature() -> ScalarSignature {
    ScalarSignature::new(
        vec![Coordinate::new("cmd", ["Nothing", "Left", "Right", "Try"])],
        vec![Coordinate::new("door", ["Nothing", "Locked", "Unlocked"])],
    )
    .expect("static signature is valid")
}

/// Builds the corridor as a Def3 world. Every door state carries the
/// visible `door` value and a hidden `locked` bit; the clock lives on the
/// first door.
pub fn doors_world(config: &DoorsConfig) -> Result<WorldDef3, WorldError> {
    let schedules = config.parsed()?;
    let n = schedules.len();
    let period = config.period();
    if n * period * 4 > MAX_RULES {
        return Err(WorldError::CapExceeded {
            what: "door rule count".into(),
            cap: MAX_RULES,
        });
    }
    let locked_at = |d: usize, phase: usize| schedules[d][phase % schedules[d].len()];
    let names = (0..n).map(|d| format!("door{d}")).collect();
    let invisible = vec![
        Coordinate::new("locked", ["no", "yes"]),
        Coordinate::new("clock", (0..period).map(|k| k.to_string()).collect::<Vec<_>>()),
    ];
    let initial = CumulativeState {
        standard: 0,
        assignment: (0..n).flat_map(|d| [0, locked_at(d, 0) as u32, 0]).collect(),
    };
    let mut world = WorldDef3::new(doors_signature(), names, invisible, initial)?;
    let at = |state, slot| VarRef { state, slot };
    for from in 0..n {
        for phase in 0..period {
            let next = (phase + 1) % period;
            let mut tick: Vec<(VarRef, u32)> = vec![(at(0, SLOT_CLOCK), next as u32)];
            tick.extend((0..n).map(|d| (at(d, SLOT_LOCKED), locked_at(d, next) as u32)));
            tick.push((at(from, SLOT_DOOR), 0));
            let guard = vec![(at(0, SLOT_CLOCK), phase as u32)];
            let mut moves = vec![(CMD_NOTHING, from, 0), (CMD_TRY, from, 0)];
            if from > 0 {
                moves.push((CMD_LEFT, from - 1, 0));
            }
            if from + 1 < n {
                moves.push((CMD_RIGHT, from + 1, 0));
            }
            for (cmd, to, _) in moves {
                let mut effects = tick.clone();
                let shown = if cmd == CMD_TRY {
                    if locked_at(to, next) {
                        DOOR_LOCKED
                    } else {
                        DOOR_UNLOCKED
                    }
                } else {
                    0
                };
                effects.push((at(to, SLOT_DOOR), shown));
                world.push_rule(Def3Rule::new(
                    from,
                    vec![Some(cmd)],
                    guard.clone(),
                    vec![RuleOutcome::certain(to, effects)],
                )?)?;
            }
        }
    }
    Ok(world)
}

/// One group per door, following the agent's walk.
pub fn doors_grouping(doors: usize) -> Result<GroupingAutomaton, EventError> {
    let name = |d: usize| format!("door{d}");
    let mut rules = Vec::new();
    for d in 0..doors {
        if d > 0 {
            rules.push(GroupingRuleSpec {
                from: name(d),
                on: "⟨cmd=Left;*⟩".into(),
                to: name(d - 1),
            });
        }
        if d + 1 < doors {
            rules.push(GroupingRuleSpec {
                from: name(d),
                on: "⟨cmd=Right;*⟩".into(),
                to: name(d + 1),
            });
        }
    }
    let spec = GroupingSpec {
        groups: (0..doors).map(name).collect(),
        initial: name(0),
        rules,
    };
    GroupingAutomaton::from_spec(&spec, &doors_signature())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Action;
    use crate::world::WorldModel;

    fn step(w: &WorldDef3, s: &CumulativeState, cmd: u32) -> Option<CumulativeState> {
        let d = w.transition(s, &Action(vec![cmd])).unwrap()?;
        Some(d.targets()[0].clone())
    }

    #[test]
    fn constant_doors() {
        let w = doors_world(&DoorsConfig {
            schedules: vec!["L".into(), "U".into()],
        })
        .unwrap();
        assert!(w.validate().is_empty());
        let s0 = w.initial_state();
        assert!(step(&w, &s0, CMD_LEFT).is_none());
        let tried = step(&w, &s0, CMD_TRY).unwrap();
        assert_eq!(w.visible(&tried).0, vec![DOOR_LOCKED]);
        let moved = step(&w, &tried, CMD_RIGHT).unwrap();
        assert_eq!(w.visible(&moved).0, vec![0]);
        assert!(step(&w, &moved, CMD_RIGHT).is_none());
        let tried = step(&w, &moved, CMD_TRY).unwrap();
        assert_eq!(w.visible(&tried).0, vec![DOOR_UNLOCKED]);
    }

    #[test]
    fn weekly_door_opens_on_multiples_of_seven() {
        let cfg = DoorsConfig {
            schedules: vec!["ULLLLLL".into()],
        };
        assert_eq!(cfg.period(), 7);
        let w = doors_world(&cfg).unwrap();
        let mut s = w.initial_state();
        for q in 1..=30 {
            s = step(&w, &s, CMD_TRY).unwrap();
            let expect = if q % 7 == 0 { DOOR_UNLOCKED } else { DOOR_LOCKED };
            assert_eq!(w.visible(&s).0, vec![expect], "moment {q}");
        }
    }

    #[test]
    fn mixed_periods_use_the_lcm() {
        let cfg = DoorsConfig {
            schedules: vec!["UL".into(), "ULL".into()],
        };
        assert_eq!(cfg.period(), 6);
        assert!(doors_world(&DoorsConfig { schedules: vec!["X".into()] }).is_err());
        assert!(doors_world(&DoorsConfig { schedules: vec![] }).is_err());
    }

    #[test]
    fn grouping_follows_the_walk() {
        let g = doors_grouping(3).unwrap();
        assert_eq!(g.group_count(), 3);
    }
}
