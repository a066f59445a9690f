//! The two combination primitives.
//!
//! * [`combine_pair`] tensors two objects and measures their parity: odd
//!   (probability exactly 1/2) leaves one object labelled y2 - y1, even
//!   destroys both.
//! * [`combine_block`] tensors a batch of l + 4 objects, measures the
//!   subset-sum register <b, y> mod 2^{i*l}, counts the strings mapping to
//!   the measured value by brute force, filters on that count, and projects
//!   onto the two smallest surviving strings.
//!
//! All inputs are consumed whatever the outcome.

use rand::Rng;

use crate::error::{Error, Result};
use crate::label::{Label, PhaseObject};

/// Result of a combination attempt.
#[derive(Debug, PartialEq, Eq)]
pub enum CombineOutcome {
    /// A new object; `m` is the solution count when the outcome came from a
    /// block combine.
    Success {
        object: PhaseObject,
        m: Option<usize>,
    },
    /// Pairwise parity came out even; both inputs are gone.
    ParityFail,
    /// Fewer than `m_min` strings map to the measured value.
    MTooSmall { m: usize },
    /// More than `m_max` strings map to the measured value.
    MTooLarge { m: usize },
    /// The two-term projection missed; the residual state is discarded.
    ProjectionFail { m: usize },
}

impl CombineOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, CombineOutcome::Success { .. })
    }

    pub fn into_object(self) -> Option<PhaseObject> {
        match self {
            CombineOutcome::Success { object, .. } => Some(object),
            _ => None,
        }
    }

    /// Solution count, when the outcome came from a block combine.
    pub fn m(&self) -> Option<usize> {
        match self {
            CombineOutcome::Success { m, .. } => *m,
            CombineOutcome::MTooSmall { m }
            | CombineOutcome::MTooLarge { m }
            | CombineOutcome::ProjectionFail { m } => Some(*m),
            CombineOutcome::ParityFail => None,
        }
    }
}

/// Parity-measurement combine. Consumes both objects; with probability
/// exactly 1/2 returns an object labelled `second - first`.
pub fn combine_pair(
    first: PhaseObject,
    second: PhaseObject,
    rng: &mut impl Rng,
) -> Result<CombineOutcome> {
    let label = second.label().sub(first.label())?;
    let stage = first.stage().min(second.stage());
    if rng.random_bool(0.5) {
        Ok(CombineOutcome::Success {
            object: PhaseObject::with_stage(label, stage),
            m: None,
        })
    } else {
        Ok(CombineOutcome::ParityFail)
    }
}

/// Configuration for one block combine: which l-bit block is being zeroed
/// and the accepted solution-count window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockCombineConfig {
    /// Block length in bits.
    pub l: u32,
    /// Which block is being zeroed, 1-based.
    pub block_index: u32,
    pub m_min: usize,
    pub m_max: usize,
}

pub const DEFAULT_M_MIN: usize = 2;
/// The cutoff is arbitrary ("more than, say, 32"), so it stays configurable.
pub const DEFAULT_M_MAX: usize = 32;

impl BlockCombineConfig {
    pub fn new(l: u32, block_index: u32) -> Self {
        Self {
            l,
            block_index,
            m_min: DEFAULT_M_MIN,
            m_max: DEFAULT_M_MAX,
        }
    }

    /// Objects consumed per combine: l + 4.
    pub fn batch_size(&self) -> usize {
        self.l as usize + 4
    }

    /// Bits required zero after a success: block_index * l.
    pub fn zeroed_bits(&self) -> u32 {
        self.block_index * self.l
    }
}

/// The strings b with <b, y> = z (mod 2^t), exhaustively enumerated.
///
/// Masks encode object j (0-based) at bit j and are listed in ascending
/// integer order; "lexicographically smallest" below always means this
/// ordering. The enumeration is the correctness oracle for the block
/// combine and runs in O(2^len) time and memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    pub z: u64,
    pub solutions: Vec<u32>,
}

impl SolutionSet {
    pub fn m(&self) -> usize {
        self.solutions.len()
    }
}

pub(crate) const MAX_BATCH_BITS: usize = 24;

fn validated_common_bits(labels: &[Label], t: u32) -> Result<u32> {
    let first = labels.first().ok_or(Error::BatchSize {
        expected: 1,
        got: 0,
    })?;
    if labels.len() > MAX_BATCH_BITS {
        return Err(Error::ParameterTooLarge {
            name: "batch size",
            max: MAX_BATCH_BITS as u64,
            got: labels.len() as u64,
        });
    }
    for lab in labels {
        if lab.bits() != first.bits() {
            return Err(Error::ModulusMismatch(first.bits(), lab.bits()));
        }
    }
    if t > first.bits() {
        return Err(Error::BitRangeOutOfBounds {
            t,
            n: first.bits(),
        });
    }
    Ok(first.bits())
}

/// Subset sum of the masked labels, modulo 2^n.
fn masked_sum(labels: &[Label], mask: u32) -> u64 {
    let mut acc = 0u64;
    for (j, lab) in labels.iter().enumerate() {
        if mask >> j & 1 == 1 {
            acc = acc.wrapping_add(lab.value());
        }
    }
    acc
}

/// All bitstrings b over the batch with <b, y> = z (mod 2^t), plus their
/// count m. Includes the all-zero string when z = 0.
pub fn count_solutions(labels: &[Label], z: u64, t: u32) -> Result<SolutionSet> {
    validated_common_bits(labels, t)?;
    let reduce = if t == 0 { 0 } else { (1u64 << t) - 1 };
    if z & !reduce != 0 {
        return Err(Error::ValueNotReduced { value: z, n: t });
    }
    let len = labels.len();
    // subset sums by doubling: sums[m | 1<<j] = sums[m] + y_j
    let mut sums = vec![0u64; 1 << len];
    for (j, lab) in labels.iter().enumerate() {
        let v = lab.value();
        for mask in 0..1usize << j {
            sums[mask | 1 << j] = sums[mask].wrapping_add(v);
        }
    }
    let solutions: Vec<u32> = (0..1u32 << len)
        .filter(|&mask| sums[mask as usize] & reduce == z)
        .collect();
    Ok(SolutionSet { z, solutions })
}

/// Born sample of the <b, y> mod 2^t register: drawing a uniform string and
/// reducing its subset sum realizes exactly the measurement distribution
/// m(z) / 2^len.
pub fn sample_z(labels: &[Label], t: u32, rng: &mut impl Rng) -> Result<u64> {
    validated_common_bits(labels, t)?;
    let reduce = if t == 0 { 0 } else { (1u64 << t) - 1 };
    let mask = rng.random_range(0..1u64 << labels.len()) as u32;
    Ok(masked_sum(labels, mask) & reduce)
}

/// The l+4-object block combine. Consumes the whole batch; on success the
/// new object's label has its low block_index*l bits zero.
pub fn combine_block(
    objects: Vec<PhaseObject>,
    cfg: &BlockCombineConfig,
    rng: &mut impl Rng,
) -> Result<CombineOutcome> {
    if objects.len() != cfg.batch_size() {
        return Err(Error::BatchSize {
            expected: cfg.batch_size(),
            got: objects.len(),
        });
    }
    let labels: Vec<Label> = objects.iter().map(|o| o.label()).collect();
    let t = cfg.zeroed_bits();
    let bits = validated_common_bits(&labels, t)?;
    let known_zero = (cfg.block_index - 1) * cfg.l;
    for lab in &labels {
        // contract error, caught by the stage invariant
        assert!(
            lab.low_bits_zero(known_zero).unwrap_or(false),
            "block combine precondition: label {:#x} lacks {} zero low bits",
            lab.value(),
            known_zero,
        );
    }
    let stage = objects.iter().map(|o| o.stage()).min().unwrap_or(0);
    drop(objects); // the batch is consumed from here on, whatever happens

    let z = sample_z(&labels, t, rng)?;
    let set = count_solutions(&labels, z, t)?;
    let m = set.m();
    if m < cfg.m_min {
        return Ok(CombineOutcome::MTooSmall { m });
    }
    if m > cfg.m_max {
        return Ok(CombineOutcome::MTooLarge { m });
    }
    // Project onto the two smallest solutions; the surviving state carries
    // 2/m of the mass.
    if rng.random_bool(2.0 / m as f64) {
        let b1 = set.solutions[0];
        let b2 = set.solutions[1];
        let value = masked_sum(&labels, b2).wrapping_sub(masked_sum(&labels, b1))
            & ((1u64 << bits) - 1);
        let label = Label::new(value, bits).expect("masked value is reduced");
        debug_assert!(label.low_bits_zero(t).unwrap());
        Ok(CombineOutcome::Success {
            object: PhaseObject::with_stage(label, stage),
            m: Some(m),
        })
    } else {
        Ok(CombineOutcome::ProjectionFail { m })
    }
}

/// Sample mean and variance of Y = m(0) - 1 (the all-zero string is
/// ignored) over `trials` uniformly drawn label vectors of length l + 4.
/// Expected value 16 - 2^-l, variance 16 - 17*2^-l + 2^-2l.
pub fn y_statistics(l: u32, trials: u64, rng: &mut impl Rng) -> Result<(f64, f64)> {
    if l < 1 {
        return Err(Error::ParameterTooSmall {
            name: "l",
            min: 1,
            got: u64::from(l),
        });
    }
    if trials < 1 {
        return Err(Error::ParameterTooSmall {
            name: "trials",
            min: 1,
            got: trials,
        });
    }
    let batch = l as usize + 4;
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let labels: Vec<Label> = (0..batch)
            .map(|_| Label::new(rng.random_range(0..1u64 << l), l).expect("reduced"))
            .collect();
        let m = count_solutions(&labels, 0, l)?.m();
        samples.push((m - 1) as f64);
    }
    Ok(crate::stats::mean_and_variance(&samples))
}
