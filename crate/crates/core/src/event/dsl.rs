//! Parser for the event language.
//!
//! ```text
//! event    := ("A:" | "B:") past "/" future
//! past     := op "(" seq ["," int "," int] ")" | seq
//! op       := "ends" | "begins" | "contains" | "mod"
//! seq      := template+
//! template := ("⟨" | "<") items ";" items ("⟩" | ">")
//! items    := "*" | item ("," item)*
//! item     := name "=" value | value | flag "(" arg ")" ["=" bool]
//! future   := seq | "ε" | "eps"
//! ```

use super::template::{is_word_char, FlagConstraint, StepTemplate};
use super::{EventKind, PastOp};
use crate::error::EventError;
use crate::signature::{normalize, Coordinate, ScalarSignature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EventAst {
    pub kind: EventKind,
    pub op: PastOp,
    pub past: Vec<StepTemplate>,
    pub future: Vec<StepTemplate>,
}

struct Parser<'s> {
    chars: Vec<char>,
    pos: usize,
    signature: &'s ScalarSignature,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Action,
    Observation,
}

pub(crate) fn parse(text: &str, signature: &ScalarSignature) -> Result<EventAst, EventError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        signature,
    };
    p.event()
}

/// Parses a single `⟨...;...⟩` template.
pub(crate) fn parse_template(text: &str, signature: &ScalarSignature) -> Result<StepTemplate, EventError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        signature,
    };
    let t = p.template()?;
    if let Some(c) = p.peek() {
        return p.error(format!("unexpected `{c}` after the template"));
    }
    Ok(t)
}

impl Parser<'_> {
    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, EventError> {
        Err(EventError::syntax(self.column(), message))
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), EventError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.error(format!("expected `{c}`, found `{found}`")),
                None => self.error(format!("expected `{c}`, found end of input")),
            }
        }
    }

    fn word(&mut self) -> Option<String> {
        match self.peek()? {
            '"' => self.quoted().ok(),
            c if is_word_char(c) => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| is_word_char(*c)) {
                    self.pos += 1;
                }
                Some(self.chars[start..self.pos].iter().collect())
            }
            _ => None,
        }
    }

    fn quoted(&mut self) -> Result<String, EventError> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos).copied() {
                None => return self.error("unterminated string"),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.chars.get(self.pos).copied() {
                        Some(c) => out.push(c),
                        None => return self.error("unterminated string"),
                    }
                    self.pos += 1;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn expect_word(&mut self, what: &str) -> Result<String, EventError> {
        match self.word() {
            Some(w) => Ok(w),
            None => self.error(format!("expected {what}")),
        }
    }

    fn integer(&mut self) -> Result<usize, EventError> {
        let at = self.column();
        let w = self.expect_word("an integer")?;
        w.parse()
            .map_err(|_| EventError::syntax(at, format!("`{w}` is not a non-negative integer")))
    }

    fn event(&mut self) -> Result<EventAst, EventError> {
        let kind = match self.peek() {
            Some('A') => EventKind::A,
            Some('B') => EventKind::B,
            _ => return self.error("an event starts with `A:` or `B:`"),
        };
        self.pos += 1;
        self.expect(':')?;
        let (op, past) = self.past()?;
        self.expect('/')?;
        let future = self.future()?;
        if let Some(c) = self.peek() {
            return self.error(format!("unexpected `{c}` after the future pattern"));
        }
        Ok(EventAst {
            kind,
            op,
            past,
            future,
        })
    }

    fn past(&mut self) -> Result<(PastOp, Vec<StepTemplate>), EventError> {
        let save = self.pos;
        let at = {
            self.skip_ws();
            self.column()
        };
        if let Some(w) = self.word() {
            let op = match w.as_str() {
                "ends" => PastOp::Ends,
                "begins" => PastOp::Begins,
                "contains" => PastOp::Contains,
                "mod" => PastOp::Mod { m: 0, n: 1 },
                _ => return Err(EventError::syntax(at, format!("unknown operator `{w}`"))),
            };
            self.expect('(')?;
            let seq = self.sequence()?;
            let op = if let PastOp::Mod { .. } = op {
                self.expect(',')?;
                let m = self.integer()?;
                self.expect(',')?;
                let n_at = {
                    self.skip_ws();
                    self.column()
                };
                let n = self.integer()?;
                if n == 0 {
                    return Err(EventError::syntax(n_at, "the modulus must be positive"));
                }
                if m >= n {
                    return Err(EventError::syntax(n_at, format!("remainder {m} is not below modulus {n}")));
                }
                PastOp::Mod { m, n }
            } else {
                op
            };
            self.expect(')')?;
            return Ok((op, seq));
        }
        self.pos = save;
        Ok((PastOp::Sequence, self.sequence()?))
    }

    fn future(&mut self) -> Result<Vec<StepTemplate>, EventError> {
        if self.eat('ε') {
            return Ok(Vec::new());
        }
        let save = self.pos;
        if let Some(w) = self.word() {
            if w == "eps" || w == "epsilon" {
                return Ok(Vec::new());
            }
            self.pos = save;
            return self.error(format!("expected a template or `ε`, found `{w}`"));
        }
        self.sequence()
    }

    fn sequence(&mut self) -> Result<Vec<StepTemplate>, EventError> {
        let mut seq = Vec::new();
        while matches!(self.peek(), Some('⟨' | '<')) {
            seq.push(self.template()?);
        }
        if seq.is_empty() {
            return self.error("expected a step template `⟨...;...⟩`");
        }
        Ok(seq)
    }

    fn template(&mut self) -> Result<StepTemplate, EventError> {
        let close = if self.eat('⟨') {
            '⟩'
        } else {
            self.expect('<')?;
            '>'
        };
        let mut t = StepTemplate::any(self.signature);
        self.items(&mut t, Side::Action, ';')?;
        self.expect(';')?;
        self.items(&mut t, Side::Observation, close)?;
        self.expect(close)?;
        Ok(t)
    }

    fn items(&mut self, t: &mut StepTemplate, side: Side, end: char) -> Result<(), EventError> {
        if self.peek() == Some(end) {
            return Ok(());
        }
        loop {
            if !self.eat('*') {
                self.item(t, side)?;
            }
            if !self.eat(',') {
                return Ok(());
            }
        }
    }

    fn item(&mut self, t: &mut StepTemplate, side: Side) -> Result<(), EventError> {
        self.skip_ws();
        let at = self.column();
        let first = self.expect_word("a value, `name=value` or a flag")?;
        if self.eat('(') {
            return self.flag(t, &first, at);
        }
        let sig = self.signature;
        let coords = match side {
            Side::Action => &sig.actions,
            Side::Observation => &sig.observations,
        };
        let (coord, value) = if self.eat('=') {
            let value_at = self.column();
            let value = self.expect_word("a value")?;
            let wanted = normalize(&first);
            let coord = coords
                .iter()
                .position(|c| normalize(&c.name) == wanted)
                .ok_or_else(|| EventError::Semantic(format!("no coordinate named `{first}` (column {at})")))?;
            let index = coords[coord].value_index(&value).ok_or_else(|| {
                EventError::Semantic(format!(
                    "`{value}` is not a value of `{}` (column {value_at})",
                    coords[coord].name
                ))
            })?;
            (coord, index)
        } else {
            bare_value(coords, &first).map_err(|m| EventError::Semantic(format!("{m} (column {at})")))?
        };
        let slot = match side {
            Side::Action => &mut t.action[coord],
            Side::Observation => &mut t.observation[coord],
        };
        if slot.is_some_and(|v| v != value) {
            return Err(EventError::Semantic(format!(
                "conflicting constraints on `{}` (column {at})",
                coords[coord].name
            )));
        }
        *slot = Some(value);
        Ok(())
    }

    fn flag(&mut self, t: &mut StepTemplate, name: &str, at: usize) -> Result<(), EventError> {
        let arg = self.expect_word("a group name or action index")?;
        self.expect(')')?;
        let value = if self.eat('=') {
            let v_at = self.column();
            match self.expect_word("`true` or `false`")?.as_str() {
                "true" | "1" => true,
                "false" | "0" => false,
                other => return Err(EventError::syntax(v_at, format!("`{other}` is not a Boolean"))),
            }
        } else {
            true
        };
        let sig = self.signature;
        let group = || {
            sig.group_index(&arg)
                .ok_or_else(|| EventError::Semantic(format!("no move group named `{arg}` (column {at})")))
        };
        let constraint = match normalize(name).as_str() {
            "all" => FlagConstraint::All { group: group()?, value },
            "nobody" => FlagConstraint::Nobody { group: group()?, value },
            "correct" => {
                let action: usize = arg
                    .parse()
                    .map_err(|_| EventError::syntax(at, format!("`{arg}` is not an action index")))?;
                if action >= sig.action_count() {
                    return Err(EventError::Semantic(format!(
                        "action index {action} out of range (column {at})"
                    )));
                }
                FlagConstraint::Correct { action, value }
            }
            _ => return Err(EventError::syntax(at, format!("unknown flag `{name}`"))),
        };
        t.flags.push(constraint);
        t.flags.sort();
        t.flags.dedup();
        Ok(())
    }
}

/// A bare value names exactly one coordinate's value.
fn bare_value(coords: &[Coordinate], value: &str) -> Result<(usize, u32), String> {
    let wanted = normalize(value);
    let hits: Vec<(usize, u32)> = coords
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            c.values
                .iter()
                .position(|v| normalize(v) == wanted)
                .map(|v| (i, v as u32))
        })
        .collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        [] => Err(format!("no coordinate has a value `{value}`")),
        _ => Err(format!("`{value}` is ambiguous; write `name={value}`")),
    }
}
