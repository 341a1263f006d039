//! Histories, local histories and the line-oriented history log.

use std::fmt::Write as _;

use crate::error::{EventError, LogError};
use crate::signature::{Action, Observation, ScalarSignature};
use crate::world::{Correctness, StepLetter};

/// The steps `a_1 v_1 ... a_{t-1} v_{t-1}` of one episode. The first action
/// is always the all-`Nothing` vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct History {
    steps: Vec<StepLetter>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn from_steps(steps: Vec<StepLetter>) -> Result<Self, EventError> {
        let mut h = History::new();
        for s in steps {
            h.push(s)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, letter: StepLetter) -> Result<(), EventError> {
        if self.steps.is_empty() && letter.action.0.iter().any(|v| *v != 0) {
            return Err(EventError::Semantic(
                "a history must open with the all-Nothing action".into(),
            ));
        }
        self.steps.push(letter);
        Ok(())
    }

    pub fn steps(&self) -> &[StepLetter] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step `q`, one-based.
    pub fn step(&self, q: usize) -> Option<&StepLetter> {
        q.checked_sub(1).and_then(|i| self.steps.get(i))
    }

    /// The local history around moment `q`: up to `k` steps before it plus
    /// step `q` itself as the past, and up to `s` steps after it as the future.
    pub fn localize(&self, q: usize, k: usize, s: usize) -> Result<LocalHistory<'_>, EventError> {
        localize(self, q, k, s)
    }
}

/// A window of a history re-indexed around a moment: `past` ends with index
/// 0 (the moment itself) and `future` starts at index 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalHistory<'a> {
    pub past: &'a [StepLetter],
    pub future: &'a [StepLetter],
    /// The past starts at the first step of the history.
    pub absolute_origin: bool,
}

impl<'a> LocalHistory<'a> {
    pub fn new(past: &'a [StepLetter], future: &'a [StepLetter], absolute_origin: bool) -> Self {
        LocalHistory {
            past,
            future,
            absolute_origin,
        }
    }

    /// The step at index 0.
    pub fn present(&self) -> Option<&'a StepLetter> {
        self.past.last()
    }
}

pub fn localize(history: &History, q: usize, k: usize, s: usize) -> Result<LocalHistory<'_>, EventError> {
    let len = history.len();
    if q == 0 || q > len {
        return Err(EventError::MomentOutOfRange { q, len });
    }
    let start = (q - 1).saturating_sub(k);
    let end = q.saturating_add(s).min(len);
    Ok(LocalHistory {
        past: &history.steps[start..q],
        future: &history.steps[q..end],
        absolute_origin: start == 0,
    })
}

fn tuple(values: &[u32]) -> String {
    let parts: Vec<String> = values.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// One line per step: `t TAB action TAB observation TAB correctness-bits`,
/// with a `# episode k` header before each episode.
pub fn write_log(histories: &[History]) -> String {
    let mut out = String::new();
    for (k, h) in histories.iter().enumerate() {
        let _ = writeln!(out, "# episode {k}");
        for (t, s) in h.steps.iter().enumerate() {
            let bits: String = s.correctness.flags.iter().map(|f| if *f { '1' } else { '0' }).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t + 1,
                tuple(&s.action.0),
                tuple(&s.observation.0),
                bits
            );
        }
    }
    out
}

fn parse_tuple(text: &str, line: usize) -> Result<Vec<u32>, LogError> {
    let err = |message: String| LogError { line, message };
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| err(format!("`{text}` is not a tuple")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|v| v.trim().parse::<u32>().map_err(|_| err(format!("`{v}` is not a value index"))))
        .collect()
}

/// Reads a log back. Group summaries are recomputed from the bits.
pub fn parse_log(text: &str, signature: &ScalarSignature) -> Result<Vec<History>, LogError> {
    let mut histories: Vec<History> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| LogError { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if trimmed.starts_with("# episode") {
                histories.push(History::new());
            }
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        if histories.is_empty() {
            histories.push(History::new());
        }
        let h = histories.last_mut().expect("non-empty");
        let t: usize = fields[0].trim().parse().map_err(|_| err("bad step number".into()))?;
        if t != h.len() + 1 {
            return Err(err(format!("step {t} out of sequence")));
        }
        let action = Action(parse_tuple(fields[1], line)?);
        signature.check_action(&action).map_err(|e| err(e.to_string()))?;
        let observation = Observation(parse_tuple(fields[2], line)?);
        signature.check_observation(&observation).map_err(|e| err(e.to_string()))?;
        let flags = fields[3]
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(err(format!("bad correctness bit `{c}`"))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        if flags.len() != signature.action_count() {
            return Err(err(format!(
                "{} correctness bits for {} actions",
                flags.len(),
                signature.action_count()
            )));
        }
        let letter = StepLetter {
            action,
            observation,
            correctness: Correctness::from_flags(signature, flags),
        };
        h.push(letter).map_err(|e| err(e.to_string()))?;
    }
    Ok(histories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Coordinate;

    fn sig() -> ScalarSignature {
        ScalarSignature::new(
            vec![Coordinate::new("a", ["Nothing", "Go"])],
            vec![Coordinate::new("x", ["Nothing", "One"])],
        )
        .unwrap()
    }

    fn letter(a: u32, v: u32) -> StepLetter {
        StepLetter {
            action: Action(vec![a]),
            observation: Observation(vec![v]),
            correctness: Correctness::from_flags(&sig(), vec![true, a == 0]),
        }
    }

    fn history(n: usize) -> History {
        History::from_steps((0..n).map(|i| letter((i > 0) as u32, (i % 2) as u32)).collect()).unwrap()
    }

    #[test]
    fn localize_reindexes_around_q() {
        let h = history(5);
        let lh = h.localize(3, 2, 1).unwrap();
        assert_eq!(lh.past, &h.steps()[0..3]);
        assert_eq!(lh.future, &h.steps()[3..4]);
        assert!(lh.absolute_origin);
        assert_eq!(lh.present(), h.step(3));
    }

    #[test]
    fn localize_clips_at_both_ends() {
        let h = history(5);
        let lh = h.localize(1, 4, 0).unwrap();
        assert_eq!(lh.past.len(), 1);
        let lh = h.localize(5, 1, 9).unwrap();
        assert!(lh.future.is_empty());
        assert!(!lh.absolute_origin);
        assert!(matches!(h.localize(6, 0, 0), Err(EventError::MomentOutOfRange { q: 6, len: 5 })));
        assert!(h.localize(0, 0, 0).is_err());
    }

    #[test]
    fn history_must_open_with_nothing() {
        assert!(History::from_steps(vec![letter(1, 0)]).is_err());
    }

    #[test]
    fn log_roundtrips() {
        let hs = vec![history(4), history(2)];
        let text = write_log(&hs);
        assert!(text.starts_with("# episode 0\n1\t(0)\t(0)\t11\n"));
        assert_eq!(parse_log(&text, &sig()).unwrap(), hs);
    }

    #[test]
    fn bad_log_lines_name_their_line() {
        let err = parse_log("# episode 0\n1\t(0)\t(7)\t11\n", &sig()).unwrap_err();
        assert_eq!(err.line, 2);
    }
}
