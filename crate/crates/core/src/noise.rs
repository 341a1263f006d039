//! Observation noise: a volume and a spectrum per visible variable.

use num_traits::{One, Signed, Zero};

use crate::chance::NoiseStream;
use crate::error::WorldError;
use crate::prob::{self, Prob};

/// With probability `1 - volume` a reading shows the true value; otherwise it
/// shows value `i` with probability `spectrum[i]`.
#[derive(Clone, Debug)]
pub struct NoiseDescriptor {
    volume: Prob,
    spectrum: Vec<Prob>,
    volume_f: f64,
    cdf: Vec<f64>,
}

impl PartialEq for NoiseDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.volume == other.volume && self.spectrum == other.spectrum
    }
}

impl NoiseDescriptor {
    pub fn new(volume: Prob, spectrum: Vec<Prob>) -> Result<Self, WorldError> {
        if volume.is_negative() || volume > prob::one() {
            return Err(WorldError::MalformedNoise(format!(
                "volume {} outside [0, 1]",
                prob::format(&volume)
            )));
        }
        if spectrum.len() < 2 {
            return Err(WorldError::MalformedNoise("spectrum needs one entry per value".into()));
        }
        if spectrum.iter().any(|p| p.is_negative()) {
            return Err(WorldError::MalformedNoise("negative spectrum entry".into()));
        }
        let total: Prob = spectrum.iter().sum();
        if !total.is_one() {
            return Err(WorldError::MalformedNoise(format!(
                "spectrum sums to {}, not 1",
                prob::format(&total)
            )));
        }
        let mut acc = 0.0;
        let cdf = spectrum
            .iter()
            .map(|p| {
                acc += prob::to_f64(p);
                acc
            })
            .collect();
        Ok(NoiseDescriptor {
            volume_f: prob::to_f64(&volume),
            volume,
            spectrum,
            cdf,
        })
    }

    /// Zero volume over `k` values.
    pub fn silent(k: usize) -> Self {
        let mut spectrum = vec![prob::zero(); k.max(2)];
        spectrum[0] = prob::one();
        Self::new(prob::zero(), spectrum).expect("well-formed")
    }

    pub fn volume(&self) -> &Prob {
        &self.volume
    }

    pub fn spectrum(&self) -> &[Prob] {
        &self.spectrum
    }

    pub fn is_silent(&self) -> bool {
        self.volume.is_zero()
    }

    /// Probability of reading `value` when the variable holds `truth`.
    pub fn output_probability(&self, truth: u32, value: u32) -> Prob {
        let noise = &self.volume * &self.spectrum[value as usize];
        if value == truth {
            prob::one() - &self.volume + noise
        } else {
            noise
        }
    }

    /// Every reading with positive probability, in value order.
    pub fn possible_outputs(&self, truth: u32) -> Vec<(u32, Prob)> {
        (0..self.spectrum.len() as u32)
            .map(|v| (v, self.output_probability(truth, v)))
            .filter(|(_, p)| p.is_positive())
            .collect()
    }

    /// Draws a reading; the flag tells whether the noise branch was taken.
    pub fn sample(&self, truth: u32, stream: &mut NoiseStream) -> (u32, bool) {
        if self.volume_f == 0.0 || stream.next_f64() >= self.volume_f {
            return (truth, false);
        }
        let u = stream.next_f64();
        let value = self
            .cdf
            .iter()
            .position(|c| u < *c)
            .unwrap_or(self.cdf.len() - 1);
        (value as u32, true)
    }
}
