use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::determinize::def2_to_def1;
use crate::chance::{mix_seed, Seeds};
use crate::error::WorldError;
use crate::history::History;
use crate::run::run_episode;
use crate::signature::ScalarSignature;
use crate::world::{StepLetter, WorldDef2, WorldModel};

/// Something that produces episodes under the uniform policy.
pub trait EpisodeSource {
    fn source_signature(&self) -> &ScalarSignature;
    fn episode(&self, seeds: &Seeds, horizon: usize) -> Result<History, WorldError>;
}

impl<W: WorldModel> EpisodeSource for W {
    fn source_signature(&self) -> &ScalarSignature {
        WorldModel::signature(self)
    }

    fn episode(&self, seeds: &Seeds, horizon: usize) -> Result<History, WorldError> {
        run_episode(self, seeds, horizon)
    }
}

/// The determinized image of a Def2 world with fresh generator seeds for
/// every episode, so its traces are marginalized over seeds.
#[derive(Clone, Debug)]
pub struct Def1Family {
    pub base: WorldDef2,
}

impl EpisodeSource for Def1Family {
    fn source_signature(&self) -> &ScalarSignature {
        WorldModel::signature(&self.base)
    }

    fn episode(&self, seeds: &Seeds, horizon: usize) -> Result<History, WorldError> {
        run_episode(&def2_to_def1(&self.base, seeds), seeds, horizon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDistanceReport {
    pub episodes: usize,
    pub horizon: usize,
    /// Plug-in total-variation distance between the trace distributions.
    pub distance: f64,
    /// Total-variation distance of the letter at each step.
    pub per_step: Vec<f64>,
    pub distinct_traces: usize,
}

fn total_variation<K: std::hash::Hash + Eq>(counts: &HashMap<K, (u64, u64)>, na: f64, nb: f64) -> f64 {
    0.5 * counts
        .values()
        .map(|(a, b)| (*a as f64 / na - *b as f64 / nb).abs())
        .sum::<f64>()
}

/// Estimates the total-variation distance between the distributions of
/// horizon-long traces of two worlds. Each side runs with its own seeds.
pub fn trace_distance<A: EpisodeSource + ?Sized, B: EpisodeSource + ?Sized>(
    a: &A,
    b: &B,
    options: TraceOptions,
) -> Result<TraceDistanceReport, WorldError> {
    let (sa, sb) = (a.source_signature(), b.source_signature());
    if sa.actions != sb.actions || sa.observations != sb.observations {
        return Err(WorldError::SignatureMismatch(
            "the two worlds have different action or observation spaces".into(),
        ));
    }
    let mut traces: HashMap<Vec<StepLetter>, (u64, u64)> = HashMap::new();
    let mut steps: Vec<HashMap<StepLetter, (u64, u64)>> = vec![HashMap::new(); options.horizon + 1];
    for e in 0..options.episodes as u64 {
        for side in 0..2u64 {
            let seeds = Seeds::uniform(mix_seed(options.seed, 2 * e + side));
            let h = if side == 0 {
                a.episode(&seeds, options.horizon)?
            } else {
                b.episode(&seeds, options.horizon)?
            };
            for (t, letter) in h.steps().iter().enumerate() {
                let c = steps[t].entry(letter.clone()).or_default();
                if side == 0 {
                    c.0 += 1;
                } else {
                    c.1 += 1;
                }
            }
            let c = traces.entry(h.steps().to_vec()).or_default();
            if side == 0 {
                c.0 += 1;
            } else {
                c.1 += 1;
            }
        }
    }
    let n = options.episodes.max(1) as f64;
    Ok(TraceDistanceReport {
        episodes: options.episodes,
        horizon: options.horizon,
        distance: total_variation(&traces, n, n),
        per_step: steps
            .iter()
            .map(|s| {
                let (ca, cb) = s.values().fold((0u64, 0u64), |acc, c| (acc.0 + c.0, acc.1 + c.1));
                if ca == 0 && cb == 0 {
                    0.0
                } else {
                    total_variation(s, ca.max(1) as f64, cb.max(1) as f64)
                }
            })
            .collect(),
        distinct_traces: traces.len(),
    })
}
