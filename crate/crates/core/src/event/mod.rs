//! Events (experiments) over local histories.
//!
//! An event pairs a language over the past with a language over the future.
//! Kind `A` asks for some suffix of the past in the past language; kind `B`
//! asks for the whole past, so it needs a local history that starts at the
//! first step. Both ask for some prefix of the future in the future language.

mod automaton;
mod dsl;
mod property;
mod template;

use std::fmt;

pub use automaton::Dfa;
pub use property::{experimental_property, PropertyOptions};
pub use template::{FlagConstraint, StepTemplate};

use automaton::{count_mod_dfa, sequence_dfa, Shape};

use crate::error::EventError;
use crate::history::LocalHistory;
use crate::signature::ScalarSignature;
use crate::world::StepLetter;

pub const MAX_TEMPLATES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PastOp {
    Ends,
    Begins,
    Contains,
    /// The sequence occurs `m` times modulo `n`, overlaps counted.
    Mod { m: usize, n: usize },
    /// A bare sequence: the past ends with it (kind A) or equals it (kind B).
    Sequence,
}

#[derive(Clone, Debug)]
pub struct EventPattern {
    kind: EventKind,
    op: PastOp,
    past: Vec<StepTemplate>,
    future: Vec<StepTemplate>,
    templates: Vec<StepTemplate>,
    past_dfa: Dfa,
    future_dfa: Dfa,
    source: String,
    canonical: String,
}

impl PartialEq for EventPattern {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.op == other.op && self.past == other.past && self.future == other.future
    }
}

impl Eq for EventPattern {}

pub fn parse_event(text: &str, signature: &ScalarSignature) -> Result<EventPattern, EventError> {
    EventPattern::parse(text, signature)
}

pub fn event_holds(event: &EventPattern, lh: &LocalHistory<'_>) -> Result<bool, EventError> {
    event.holds(lh)
}

impl EventPattern {
    pub fn parse(text: &str, signature: &ScalarSignature) -> Result<Self, EventError> {
        let ast = dsl::parse(text, signature)?;
        if ast.kind == EventKind::A && matches!(ast.op, PastOp::Begins | PastOp::Mod { .. }) {
            return Err(EventError::Semantic(
                "`begins` and `mod` look at the whole past and need a kind-B event".into(),
            ));
        }
        let mut templates: Vec<StepTemplate> = Vec::new();
        let mut index_of = |t: &StepTemplate| match templates.iter().position(|u| u == t) {
            Some(i) => i,
            None => {
                templates.push(t.clone());
                templates.len() - 1
            }
        };
        let past_ids: Vec<usize> = ast.past.iter().map(&mut index_of).collect();
        let future_ids: Vec<usize> = ast.future.iter().map(&mut index_of).collect();
        if templates.len() > MAX_TEMPLATES {
            return Err(EventError::TooManyTemplates(templates.len()));
        }
        let count = templates.len();
        let past_dfa = match (ast.op, ast.kind) {
            (PastOp::Ends, _) | (PastOp::Sequence, EventKind::A) => sequence_dfa(&past_ids, Shape::Suffix, count),
            (PastOp::Contains, _) => sequence_dfa(&past_ids, Shape::Infix, count),
            (PastOp::Begins, _) => sequence_dfa(&past_ids, Shape::Prefix, count),
            (PastOp::Sequence, EventKind::B) => sequence_dfa(&past_ids, Shape::Exact, count),
            (PastOp::Mod { m, n }, _) => count_mod_dfa(&past_ids, m, n, count),
        };
        let future_dfa = sequence_dfa(&future_ids, Shape::Prefix, count);
        let canonical = render(&ast.kind, &ast.op, &ast.past, &ast.future, signature);
        Ok(EventPattern {
            kind: ast.kind,
            op: ast.op,
            past: ast.past,
            future: ast.future,
            templates,
            past_dfa,
            future_dfa,
            source: text.to_string(),
            canonical,
        })
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    pub fn op(&self) -> PastOp {
        self.op
    }

    pub fn past_templates(&self) -> &[StepTemplate] {
        &self.past
    }

    pub fn future_templates(&self) -> &[StepTemplate] {
        &self.future
    }

    /// The text the event was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn past_dfa(&self) -> &Dfa {
        &self.past_dfa
    }

    pub fn future_dfa(&self) -> &Dfa {
        &self.future_dfa
    }

    /// Steps of future the event can look at.
    pub fn future_len(&self) -> usize {
        self.future.len()
    }

    /// Bitmask of the templates `letter` matches.
    pub fn class(&self, letter: &StepLetter) -> u32 {
        self.templates
            .iter()
            .enumerate()
            .filter(|(_, t)| t.matches(letter))
            .fold(0, |mask, (i, _)| mask | (1 << i))
    }

    /// Whether the past automaton accepts the whole of `past`.
    pub fn past_accepts(&self, past: &[StepLetter]) -> bool {
        self.past_dfa.accepts(past.iter().map(|l| self.class(l)))
    }

    /// Whether some prefix of `future` is in the future language.
    pub fn future_accepts(&self, future: &[StepLetter]) -> bool {
        self.future_dfa.accepts_prefix(future.iter().map(|l| self.class(l)))
    }

    pub fn holds(&self, lh: &LocalHistory<'_>) -> Result<bool, EventError> {
        if self.kind == EventKind::B && !lh.absolute_origin {
            return Err(EventError::NotOriginAnchored);
        }
        Ok(self.past_accepts(lh.past) && self.future_accepts(lh.future))
    }

    /// Follows the past automaton one step at a time along a history.
    pub fn tracker(&self) -> PastTracker<'_> {
        PastTracker {
            event: self,
            state: Dfa::START,
        }
    }
}

impl fmt::Display for EventPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

fn render(
    kind: &EventKind,
    op: &PastOp,
    past: &[StepTemplate],
    future: &[StepTemplate],
    signature: &ScalarSignature,
) -> String {
    let seq = |ts: &[StepTemplate]| ts.iter().map(|t| t.render(signature)).collect::<String>();
    let kind = match kind {
        EventKind::A => "A",
        EventKind::B => "B",
    };
    let past = match op {
        PastOp::Ends => format!("ends({})", seq(past)),
        PastOp::Begins => format!("begins({})", seq(past)),
        PastOp::Contains => format!("contains({})", seq(past)),
        PastOp::Mod { m, n } => format!("mod({}, {m}, {n})", seq(past)),
        PastOp::Sequence => seq(past),
    };
    let future = if future.is_empty() { "ε".to_string() } else { seq(future) };
    format!("{kind}: {past} / {future}")
}

/// Incremental evaluation of an event's past language over a growing
/// history that starts at the first step.
#[derive(Clone, Debug)]
pub struct PastTracker<'e> {
    event: &'e EventPattern,
    state: u32,
}

impl PastTracker<'_> {
    pub fn push(&mut self, letter: &StepLetter) {
        self.state = self.event.past_dfa.step(self.state, self.event.class(letter));
    }

    pub fn accepts(&self) -> bool {
        self.event.past_dfa.is_accepting(self.state)
    }
}
