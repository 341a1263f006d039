//! Random streams and interval sampling.
//!
//! Two independent channels drive transitions: the predictable stream picks
//! points on a grid of `Q = lcm(1..=100)` equal cells, and the unpredictable
//! stream resolves the choice among surviving outcomes as `y mod R`. Both are
//! position-addressable, so a stream position is enough to replay a draw.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::WorldError;
use crate::interval::{IntervalDistribution, SamplingPlan};

/// `lcm(1, 2, ..., 100)`.
pub fn q_grid() -> &'static BigUint {
    static Q: OnceLock<BigUint> = OnceLock::new();
    Q.get_or_init(|| (1u32..=100).fold(BigUint::from(1u32), |acc, n| acc.lcm(&BigUint::from(n))))
}

/// SplitMix64 finalizer; derives independent seeds from a base seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Source of uniformly distributed grid cells, addressed by position.
#[derive(Clone, Debug)]
pub struct GoodGenerator {
    seed: u64,
    base: ChaCha8Rng,
}

impl GoodGenerator {
    pub fn new(seed: u64) -> Self {
        GoodGenerator {
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform cell in `0..modulus` at stream position `position`.
    pub fn cell(&self, position: u64, modulus: &BigUint) -> BigUint {
        let mut rng = self.base.clone();
        rng.set_stream(position);
        rng.set_word_pos(0);
        rng.gen_biguint_below(modulus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BadMode {
    Uniform,
    /// Every `regime` draws a new bias is picked: with that probability the
    /// draw repeats a favoured value, otherwise it is uniform.
    Drifting { regime: u64 },
}

/// Source of the numbers `y` that resolve unpredictable chance.
#[derive(Clone, Debug)]
pub struct BadGenerator {
    seed: u64,
    mode: BadMode,
    base: ChaCha8Rng,
}

impl BadGenerator {
    pub fn new(seed: u64, mode: BadMode) -> Self {
        BadGenerator {
            seed,
            mode,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(seed: u64) -> Self {
        Self::new(seed, BadMode::Uniform)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn value(&self, position: u64) -> u64 {
        let mut rng = self.base.clone();
        rng.set_stream(position);
        rng.set_word_pos(0);
        match self.mode {
            BadMode::Uniform => rng.next_u64(),
            BadMode::Drifting { regime } => {
                let mut regime_rng = self.base.clone();
                regime_rng.set_stream(u64::MAX - position / regime.max(1));
                regime_rng.set_word_pos(0);
                let favoured = regime_rng.next_u64();
                let bias: f64 = regime_rng.gen();
                if rng.gen::<f64>() < bias {
                    favoured
                } else {
                    rng.next_u64()
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PredictableStream {
    generator: GoodGenerator,
    position: u64,
}

impl PredictableStream {
    pub fn new(seed: u64) -> Self {
        PredictableStream {
            generator: GoodGenerator::new(seed),
            position: 0,
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_cell(&mut self, modulus: &BigUint) -> BigUint {
        let cell = self.generator.cell(self.position, modulus);
        self.position += 1;
        cell
    }
}

#[derive(Clone, Debug)]
pub struct UnpredictableStream {
    generator: BadGenerator,
    position: u64,
}

impl UnpredictableStream {
    pub fn new(seed: u64) -> Self {
        Self::with_mode(seed, BadMode::Uniform)
    }

    pub fn with_mode(seed: u64, mode: BadMode) -> Self {
        UnpredictableStream {
            generator: BadGenerator::new(seed, mode),
            position: 0,
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_value(&mut self) -> u64 {
        let y = self.generator.value(self.position);
        self.position += 1;
        y
    }
}

/// Stream feeding observation noise.
#[derive(Clone, Debug)]
pub struct NoiseStream(ChaCha8Rng);

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        NoiseStream(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0.gen()
    }
}

/// Seeds for the four random channels of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub predictable: u64,
    pub unpredictable: u64,
    pub noise: u64,
    pub policy: u64,
}

impl Seeds {
    pub fn uniform(seed: u64) -> Self {
        Seeds {
            predictable: mix_seed(seed, 1),
            unpredictable: mix_seed(seed, 2),
            noise: mix_seed(seed, 3),
            policy: mix_seed(seed, 4),
        }
    }

    /// Seeds for episode `index`; episode 0 keeps the base seeds.
    pub fn for_episode(&self, index: u64) -> Self {
        if index == 0 {
            return *self;
        }
        Seeds {
            predictable: mix_seed(self.predictable, index),
            unpredictable: mix_seed(self.unpredictable, index),
            noise: mix_seed(self.noise, index),
            policy: mix_seed(self.policy, index),
        }
    }
}

/// The chance channels an executing world consumes.
#[derive(Clone, Debug)]
pub struct Streams {
    pub predictable: PredictableStream,
    pub unpredictable: UnpredictableStream,
    pub noise: NoiseStream,
}

impl Streams {
    pub fn new(seeds: &Seeds) -> Self {
        Streams {
            predictable: PredictableStream::new(seeds.predictable),
            unpredictable: UnpredictableStream::new(seeds.unpredictable),
            noise: NoiseStream::new(seeds.noise),
        }
    }
}

/// Picks an outcome of `dist`. A single outcome is returned without drawing.
pub fn sample_outcome<'d, T>(
    dist: &'d IntervalDistribution<T>,
    predictable: &mut PredictableStream,
    unpredictable: &mut UnpredictableStream,
) -> Result<&'d T, WorldError> {
    let index = sample_index(dist, |_, m| predictable.next_cell(m), || unpredictable.next_value())?;
    Ok(&dist.targets()[index])
}

/// The two-phase selection, with the three draws supplied by the caller.
///
/// `cell(phase, modulus)` is asked for the first point (phase 0) when there is
/// more than one outcome, and for the second point (phase 1) and `y` only when
/// the first point lands in the remainder.
pub fn sample_index<T>(
    dist: &IntervalDistribution<T>,
    cell: impl FnMut(usize, &BigUint) -> BigUint,
    y: impl FnOnce() -> u64,
) -> Result<usize, WorldError> {
    let plan = dist.bounds().plan()?;
    if dist.len() == 1 {
        return Ok(0);
    }
    choose(plan, cell, y)
}

fn choose(
    plan: &SamplingPlan,
    mut cell: impl FnMut(usize, &BigUint) -> BigUint,
    y: impl FnOnce() -> u64,
) -> Result<usize, WorldError> {
    let first = cell(0, &plan.modulus);
    if let Some(i) = plan.first_phase.iter().position(|t| first < *t) {
        return Ok(i);
    }
    let second = cell(1, &plan.modulus);
    let survivors: Vec<usize> = plan
        .second_phase
        .iter()
        .enumerate()
        .filter(|(_, t)| second < **t)
        .map(|(i, _)| i)
        .collect();
    if survivors.is_empty() {
        // Unreachable for validated bounds: the cell with no survivors has
        // length 1 - max(c_i) = 0.
        return Err(WorldError::MalformedDistribution(
            "second-phase point fell in the empty-survivor cell".into(),
        ));
    }
    let r = survivors.len() as u64;
    Ok(survivors[(y() % r) as usize])
}
