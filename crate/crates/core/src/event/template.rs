use crate::signature::ScalarSignature;
use crate::world::StepLetter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlagConstraint {
    All { group: usize, value: bool },
    Nobody { group: usize, value: bool },
    Correct { action: usize, value: bool },
}

impl FlagConstraint {
    fn holds(&self, letter: &StepLetter) -> bool {
        match *self {
            FlagConstraint::All { group, value } => letter.correctness.groups.get(group).is_some_and(|g| g.all == value),
            FlagConstraint::Nobody { group, value } => {
                letter.correctness.groups.get(group).is_some_and(|g| g.nobody == value)
            }
            FlagConstraint::Correct { action, value } => letter.correctness.flags.get(action) == Some(&value),
        }
    }
}

/// A predicate on one step: exact values or wildcards per coordinate, plus
/// optional constraints on the correctness flags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepTemplate {
    pub action: Vec<Option<u32>>,
    pub observation: Vec<Option<u32>>,
    pub flags: Vec<FlagConstraint>,
}

impl StepTemplate {
    pub fn any(signature: &ScalarSignature) -> Self {
        StepTemplate {
            action: vec![None; signature.action_dims()],
            observation: vec![None; signature.obs_dims()],
            flags: Vec::new(),
        }
    }

    pub fn parse(text: &str, signature: &ScalarSignature) -> Result<Self, crate::error::EventError> {
        super::dsl::parse_template(text, signature)
    }

    pub fn is_universal(&self) -> bool {
        self.action.iter().chain(&self.observation).all(Option::is_none) && self.flags.is_empty()
    }

    pub fn matches(&self, letter: &StepLetter) -> bool {
        let exact = |pattern: &[Option<u32>], values: &[u32]| {
            pattern
                .iter()
                .zip(values)
                .all(|(p, v)| p.is_none_or(|p| p == *v))
        };
        exact(&self.action, &letter.action.0)
            && exact(&self.observation, &letter.observation.0)
            && self.flags.iter().all(|f| f.holds(letter))
    }

    /// Text that parses back to this template.
    pub fn render(&self, signature: &ScalarSignature) -> String {
        let part = |pattern: &[Option<u32>], coords: &[crate::signature::Coordinate]| -> Vec<String> {
            pattern
                .iter()
                .zip(coords)
                .filter_map(|(p, c)| p.map(|v| format!("{}={}", quote(&c.name), quote(c.value_name(v)))))
                .collect()
        };
        let action = part(&self.action, &signature.actions);
        let mut obs = part(&self.observation, &signature.observations);
        for f in &self.flags {
            obs.push(match *f {
                FlagConstraint::All { group, value } => {
                    format!("all({})={value}", quote(&signature.groups[group].name))
                }
                FlagConstraint::Nobody { group, value } => {
                    format!("nobody({})={value}", quote(&signature.groups[group].name))
                }
                FlagConstraint::Correct { action, value } => format!("correct({action})={value}"),
            });
        }
        let join = |items: Vec<String>| if items.is_empty() { "*".to_string() } else { items.join(",") };
        format!("⟨{};{}⟩", join(action), join(obs))
    }
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '#' | '.' | '+')
}

fn quote(text: &str) -> String {
    if !text.is_empty() && text.chars().all(is_word_char) {
        return text.to_string();
    }
    let mut out = String::from("\"");
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
