//! Total deterministic automata over letter classes.
//!
//! A letter's class is the bitmask of the pattern templates it matches, so an
//! automaton for a pattern with `T` distinct templates has `2^T` columns.

use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    /// `Σ* p`
    Suffix,
    /// `Σ* p Σ*`
    Infix,
    /// `p Σ*`
    Prefix,
    /// `p`
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    columns: usize,
    table: Vec<u32>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub const START: u32 = 0;

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn step(&self, state: u32, class: u32) -> u32 {
        self.table[state as usize * self.columns + class as usize]
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    pub fn run(&self, classes: impl IntoIterator<Item = u32>) -> u32 {
        classes.into_iter().fold(Self::START, |s, c| self.step(s, c))
    }

    pub fn accepts(&self, classes: impl IntoIterator<Item = u32>) -> bool {
        self.is_accepting(self.run(classes))
    }

    /// Whether some prefix of the input (the empty one included) is accepted.
    pub fn accepts_prefix(&self, classes: impl IntoIterator<Item = u32>) -> bool {
        let mut s = Self::START;
        if self.is_accepting(s) {
            return true;
        }
        for c in classes {
            s = self.step(s, c);
            if self.is_accepting(s) {
                return true;
            }
        }
        false
    }
}

/// Subset construction for the sequence `templates` (indices into the class
/// bitmask) with the loops `shape` calls for.
pub(crate) fn sequence_dfa(templates: &[usize], shape: Shape, template_count: usize) -> Dfa {
    let len = templates.len();
    let loop_start = matches!(shape, Shape::Suffix | Shape::Infix);
    let loop_end = matches!(shape, Shape::Infix | Shape::Prefix);
    let columns = 1usize << template_count;

    let mut ids: HashMap<Vec<usize>, u32> = HashMap::new();
    let mut sets: Vec<Vec<usize>> = vec![vec![0]];
    ids.insert(vec![0], 0);
    let mut table = Vec::new();
    let mut next = 0;
    while next < sets.len() {
        let current = sets[next].clone();
        for class in 0..columns {
            let mut succ: Vec<usize> = Vec::new();
            for &q in &current {
                if q < len && class & (1 << templates[q]) != 0 {
                    succ.push(q + 1);
                }
                if (q == 0 && loop_start) || (q == len && loop_end) {
                    succ.push(q);
                }
            }
            succ.sort_unstable();
            succ.dedup();
            let id = *ids.entry(succ.clone()).or_insert_with(|| {
                sets.push(succ);
                (sets.len() - 1) as u32
            });
            table.push(id);
        }
        next += 1;
    }
    let accepting = sets.iter().map(|s| s.contains(&len)).collect();
    Dfa {
        columns,
        table,
        accepting,
    }
}

/// Words in which `templates` occurs (overlaps counted) `m` times modulo `n`.
pub(crate) fn count_mod_dfa(templates: &[usize], m: usize, n: usize, template_count: usize) -> Dfa {
    let detector = sequence_dfa(templates, Shape::Suffix, template_count);
    let columns = 1usize << template_count;
    let d = detector.state_count();
    let id = |det: u32, count: usize| (count * d + det as usize) as u32;
    let mut table = vec![0u32; d * n * columns];
    let mut accepting = vec![false; d * n];
    for count in 0..n {
        for det in 0..d as u32 {
            let here = id(det, count) as usize;
            accepting[here] = count == m;
            for class in 0..columns {
                let to = detector.step(det, class as u32);
                let hits = count + usize::from(detector.is_accepting(to) && !templates.is_empty());
                table[here * columns + class] = id(to, hits % n);
            }
        }
    }
    Dfa {
        columns,
        table,
        accepting,
    }
}
