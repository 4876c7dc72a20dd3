//! Warm-start successive exhaustive Boolean optimization.
//!
//! Bits are split into contiguous blocks of at most `block_size`. A sweep
//! visits every block in order and replaces it by the best of its
//! `2^len` assignments with the other bits held fixed. Sweeps repeat until
//! nothing improves. Each later round perturbs the incumbent with random bit
//! flips and sweeps again from there; the round's result is kept only if it
//! beats the incumbent, so the best value never decreases.

use std::ops::Range;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Largest block enumerated exhaustively.
const MAX_BLOCK: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeboConfig {
    pub block_size: usize,
    pub rounds: usize,
    /// Bits flipped when a round starts; `None` uses `n_bits / 4`.
    pub flip_count: Option<usize>,
    /// Sweep cap per round; `None` sweeps until no block improves.
    pub max_sweeps: Option<usize>,
    pub rng_seed: u64,
}

impl Default for SeboConfig {
    fn default() -> Self {
        Self {
            block_size: 10,
            rounds: 20,
            flip_count: None,
            max_sweeps: None,
            rng_seed: 0,
        }
    }
}

impl SeboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 || self.block_size > MAX_BLOCK {
            return Err(Error::config("sebo.block_size", format!("must lie in 1..={MAX_BLOCK}")));
        }
        if self.rounds == 0 {
            return Err(Error::config("sebo.rounds", "must be >= 1"));
        }
        if self.max_sweeps == Some(0) {
            return Err(Error::config("sebo.max_sweeps", "must be >= 1 when set"));
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeboOutcome {
    pub bits: Vec<bool>,
    pub value: f64,
    pub evaluations: u64,
    /// Value of the running point after every sweep, one list per round.
    pub sweep_values: Vec<Vec<f64>>,
    /// Best value after every round.
    pub round_values: Vec<f64>,
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Contiguous blocks of at most `block_size` bits; the last may be shorter.
pub fn block_ranges(n_bits: usize, block_size: usize) -> Vec<Range<usize>> {
    (0..n_bits)
        .step_by(block_size.max(1))
        .map(|s| s..(s + block_size).min(n_bits))
        .collect()
}

struct Evaluator<F> {
    objective: F,
    evaluations: u64,
}

impl<F: FnMut(&[bool]) -> f64> Evaluator<F> {
    fn eval(&mut self, bits: &[bool]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.objective)(bits);
        if !v.is_finite() {
            return Err(Error::ObjectiveNonFinite {
                at: bits_to_string(bits),
            });
        }
        Ok(v)
    }
}

fn write_block(bits: &mut [bool], range: &Range<usize>, mask: u32) {
    let len = range.len();
    for (t, b) in bits[range.clone()].iter_mut().enumerate() {
        *b = (mask >> (len - 1 - t)) & 1 == 1;
    }
}

fn read_block(bits: &[bool], range: &Range<usize>) -> u32 {
    bits[range.clone()]
        .iter()
        .fold(0u32, |acc, &b| (acc << 1) | u32::from(b))
}

/// One cyclic pass over all blocks. Returns the new value.
fn sweep<F: FnMut(&[bool]) -> f64>(
    ev: &mut Evaluator<F>,
    bits: &mut [bool],
    mut value: f64,
    blocks: &[Range<usize>],
) -> Result<f64> {
    for block in blocks {
        let current = read_block(bits, block);
        let mut best_mask = current;
        // Masks are visited in increasing binary order, and only a strict
        // improvement replaces the incumbent, so ties keep the earliest.
        for mask in 0..(1u32 << block.len()) {
            if mask == current {
                continue;
            }
            write_block(bits, block, mask);
            let v = ev.eval(bits)?;
            if v > value {
                value = v;
                best_mask = mask;
            }
        }
        write_block(bits, block, best_mask);
    }
    Ok(value)
}

/// Maximizes `objective` over `{0,1}^n_bits` starting from `init`.
pub fn sebo_maximize<F: FnMut(&[bool]) -> f64>(
    objective: F,
    n_bits: usize,
    init: &[bool],
    cfg: &SeboConfig,
) -> Result<SeboOutcome> {
    cfg.validate()?;
    if n_bits == 0 || init.len() != n_bits {
        return Err(Error::DimensionMismatch(format!(
            "initial point has {} bits, expected {n_bits} >= 1",
            init.len()
        )));
    }
    let mut ev = Evaluator {
        objective,
        evaluations: 0,
    };
    let blocks = block_ranges(n_bits, cfg.block_size);
    let exhaustive = blocks.len() == 1;
    let flips = cfg.flip_count.unwrap_or(n_bits / 4).clamp(1, n_bits);
    let mut rng = rng::seeded(cfg.rng_seed);

    let mut best_bits = init.to_vec();
    let mut best = ev.eval(&best_bits)?;
    let mut sweep_values = Vec::new();
    let mut round_values = Vec::with_capacity(cfg.rounds);

    for round in 0..cfg.rounds {
        let mut bits = best_bits.clone();
        let mut value = best;
        if round > 0 {
            for i in index::sample(&mut rng, n_bits, flips) {
                bits[i] = !bits[i];
            }
            value = ev.eval(&bits)?;
        }
        let mut sweeps = 0usize;
        let mut trace = Vec::new();
        loop {
            let next = sweep(&mut ev, &mut bits, value, &blocks)?;
            sweeps += 1;
            let improved = next > value;
            value = next;
            trace.push(value);
            // A single block already covers every assignment.
            if exhaustive || !improved || cfg.max_sweeps.is_some_and(|cap| sweeps >= cap) {
                break;
            }
        }
        sweep_values.push(trace);
        if value > best {
            best = value;
            best_bits = bits;
        }
        round_values.push(best);
        if exhaustive {
            break;
        }
    }

    Ok(SeboOutcome {
        bits: best_bits,
        value: best,
        evaluations: ev.evaluations,
        sweep_values,
        round_values,
    })
}
