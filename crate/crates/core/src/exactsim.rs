//! Dense amplitude-vector simulation of the quantum subroutines at tiny
//! sizes: the ground truth against which the label abstraction's sampled
//! distributions are validated.
//!
//! Unlike [`crate::oracle`], this module reads the hidden shift directly —
//! it plays the referee, not the algorithm. Everything is double-precision
//! with a 1e-9 tolerance; instance sizes are capped so dense vectors stay
//! desk-scale.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Comparison tolerance used throughout the exact simulator.
pub const TOLERANCE: f64 = 1e-9;
/// Largest modulus exponent the coset-state routine will simulate.
pub const MAX_COSET_BITS: u32 = 12;
/// Largest batch (qubit count) the block-combine simulation will tensor.
pub const MAX_BLOCK_QUBITS: usize = 16;

/// A pure state over an ordered set of distinct basis labels.
#[derive(Clone, Debug)]
pub struct AmplitudeState<B> {
    basis: Vec<B>,
    amplitudes: Vec<Complex64>,
}

impl<B: Copy + Eq + Ord> AmplitudeState<B> {
    pub fn new(basis: Vec<B>, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(basis.len(), amplitudes.len());
        debug_assert!(
            {
                let mut sorted = basis.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() == basis.len()
            },
            "basis labels must be distinct"
        );
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &[B] {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn assert_normalized(&self) {
        let n = self.norm_sq();
        assert!((n - 1.0).abs() < TOLERANCE, "norm^2 drifted to {n}");
    }

    pub fn renormalize(&mut self) {
        let n = self.norm_sq().sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        for a in &mut self.amplitudes {
            *a /= n;
        }
    }

    /// Probability mass per value of the observable `key`, in key order.
    pub fn outcome_masses<K: Copy + Eq + Ord>(&self, key: impl Fn(B) -> K) -> BTreeMap<K, f64> {
        let mut masses = BTreeMap::new();
        for (&b, a) in self.basis.iter().zip(&self.amplitudes) {
            *masses.entry(key(b)).or_insert(0.0) += a.norm_sqr();
        }
        masses
    }

    /// Born-measure the observable `key`: samples an outcome, collapses, and
    /// renormalizes. Outcomes are scanned in key order, so the draw is
    /// reproducible for a fixed generator.
    pub fn measure<K: Copy + Eq + Ord>(
        self,
        key: impl Fn(B) -> K,
        rng: &mut impl Rng,
    ) -> (K, Self) {
        self.assert_normalized();
        let masses = self.outcome_masses(&key);
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut picked = *masses.keys().last().expect("state is nonempty");
        for (&k, &mass) in &masses {
            acc += mass;
            if draw < acc {
                picked = k;
                break;
            }
        }
        let (basis, amplitudes) = self
            .basis
            .iter()
            .zip(&self.amplitudes)
            .filter(|(&b, _)| key(b) == picked)
            .map(|(&b, &a)| (b, a))
            .unzip();
        let mut collapsed = Self { basis, amplitudes };
        collapsed.renormalize();
        (picked, collapsed)
    }

    /// |<self|other>|: 1 within tolerance iff the states agree up to a
    /// global phase.
    pub fn overlap_magnitude(&self, other: &Self) -> f64 {
        assert!(self.basis == other.basis, "overlap needs a common basis");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// Relative phase of a two-term state, in [0, tau).
pub fn relative_phase<B: Copy + Eq + Ord>(state: &AmplitudeState<B>) -> f64 {
    assert_eq!(state.dimension(), 2, "relative phase needs two terms");
    let phase = (state.amplitudes[1] * state.amplitudes[0].conj()).arg();
    phase.rem_euclid(TAU)
}

/// Born weight of the `-` outcome (bit 1) when a two-term state is measured
/// in the Hadamard basis.
pub fn hadamard_one_probability<B: Copy + Eq + Ord>(state: &AmplitudeState<B>) -> f64 {
    assert_eq!(state.dimension(), 2);
    let (a0, a1) = (state.amplitudes[0], state.amplitudes[1]);
    (a0 - a1).norm_sqr() / 2.0 / state.norm_sq()
}

/// Forward Fourier transform mod N applied to a dense amplitude vector:
/// |x> picks up amplitude e^{tau*i*x*y/N} / sqrt(N) at every |y>.
pub fn fourier(amplitudes: &[Complex64]) -> Vec<Complex64> {
    let n = amplitudes.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|y| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &a) in amplitudes.iter().enumerate() {
                let angle = TAU * (x as f64) * (y as f64) / (n as f64);
                acc += a * Complex64::from_polar(1.0, angle);
            }
            acc * scale
        })
        .collect()
}

fn unit_phase(numerator: u64, modulus: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (numerator % modulus) as f64 / modulus as f64)
}

/// One full run of the coset-state sampling circuit: superpose D_N, call the
/// oracle, measure the function register, Fourier-transform the rotation
/// register, measure y. Returns the measured y and the exact relative phase
/// of the leftover qubit (which equals tau*d*y/N).
pub fn coset_state_routine(n: u32, d: u64, rng: &mut impl Rng) -> Result<(u64, f64)> {
    if n == 0 || n > MAX_COSET_BITS {
        return Err(Error::ModulusExponentOutOfRange(n));
    }
    if d >> n != 0 {
        return Err(Error::ValueNotReduced { value: d, n });
    }
    let modulus = 1u64 << n;

    // |b, x>|f(b,x)>: the function register never superposes for fixed
    // (b, x), so it rides along as a tag.
    let amp = Complex64::new(1.0 / (2.0 * modulus as f64).sqrt(), 0.0);
    let basis: Vec<(u8, u64)> = (0..2u8)
        .flat_map(|b| (0..modulus).map(move |x| (b, x)))
        .collect();
    let state = AmplitudeState::new(basis, vec![amp; 2 * modulus as usize]);
    state.assert_normalized();

    // Measure the function register. f(0,x) = x, f(1,x) = x - d: the same
    // instantiation the black box uses.
    let f = |(b, x): (u8, u64)| {
        if b == 0 {
            x
        } else {
            x.wrapping_sub(d) & (modulus - 1)
        }
    };
    let (_w, collapsed) = state.measure(f, rng);
    assert_eq!(collapsed.dimension(), 2, "one coset has exactly two members");

    // Fourier transform the rotation register within each reflection branch.
    let mut branch = [
        vec![Complex64::default(); modulus as usize],
        vec![Complex64::default(); modulus as usize],
    ];
    for (&(b, x), &a) in collapsed.basis().iter().zip(collapsed.amplitudes()) {
        branch[b as usize][x as usize] = a;
    }
    let transformed = [fourier(&branch[0]), fourier(&branch[1])];
    let basis: Vec<(u8, u64)> = (0..2u8)
        .flat_map(|b| (0..modulus).map(move |y| (b, y)))
        .collect();
    let amplitudes: Vec<Complex64> = (0..2usize)
        .flat_map(|b| transformed[b].iter().copied())
        .collect();
    let state = AmplitudeState::new(basis, amplitudes);
    state.assert_normalized();

    // Measure y; the two branches never interfere, so y is uniform.
    let (y, residual) = state.measure(|(_b, y)| y, rng);
    assert_eq!(residual.dimension(), 2);
    Ok((y, relative_phase(&residual)))
}

/// The exact y-marginal of the coset-state routine, averaged over function
/// outcomes: sum_w P(w) P(y | w), computed from amplitudes.
pub fn coset_y_marginal(n: u32, d: u64) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_COSET_BITS {
        return Err(Error::ModulusExponentOutOfRange(n));
    }
    let modulus = 1u64 << n;
    let mut marginal = vec![0.0; modulus as usize];
    let p_w = 1.0 / modulus as f64; // each coset carries 2/(2N) of the mass
    for w in 0..modulus {
        let mut branch = [
            vec![Complex64::default(); modulus as usize],
            vec![Complex64::default(); modulus as usize],
        ];
        let inv = 1.0 / 2f64.sqrt();
        branch[0][w as usize] = Complex64::new(inv, 0.0);
        branch[1][((w + d) % modulus) as usize] = Complex64::new(inv, 0.0);
        let transformed = [fourier(&branch[0]), fourier(&branch[1])];
        for y in 0..modulus as usize {
            marginal[y] += p_w * (transformed[0][y].norm_sqr() + transformed[1][y].norm_sqr());
        }
    }
    Ok(marginal)
}

/// Outcome of tensoring two phase qubits and measuring their parity.
#[derive(Debug)]
pub struct PairCombineExact {
    /// Exact Born weight of the odd outcome, computed from amplitudes.
    pub odd_probability: f64,
    /// The sampled parity.
    pub odd: bool,
    /// The surviving two-term state over the masks {01, 10} (odd) or
    /// {00, 11} (even); bit j of a mask selects qubit j.
    pub residual: AmplitudeState<u8>,
}

/// Tensor |0>+e^{i tau d y1/N}|1> with |0>+e^{i tau d y2/N}|1> and measure
/// the parity observable exactly.
pub fn exact_pair_combine(
    y1: u64,
    y2: u64,
    n: u32,
    d: u64,
    rng: &mut impl Rng,
) -> Result<PairCombineExact> {
    if n == 0 || n > MAX_COSET_BITS {
        return Err(Error::ModulusExponentOutOfRange(n));
    }
    let modulus = 1u64 << n;
    for v in [y1, y2, d] {
        if v >> n != 0 {
            return Err(Error::ValueNotReduced { value: v, n });
        }
    }
    let basis: Vec<u8> = (0..4).collect();
    let amplitudes: Vec<Complex64> = basis
        .iter()
        .map(|&mask| {
            let inner = (u64::from(mask) & 1) * y1 + (u64::from(mask) >> 1) * y2;
            unit_phase(d.wrapping_mul(inner % modulus), modulus) * 0.5
        })
        .collect();
    let state = AmplitudeState::new(basis, amplitudes);
    state.assert_normalized();
    let odd_probability = state.outcome_masses(|m| m.count_ones() % 2)[&1];
    let (parity, residual) = state.measure(|m| m.count_ones() % 2, rng);
    Ok(PairCombineExact {
        odd_probability,
        odd: parity == 1,
        residual,
    })
}

/// One measured-z branch of the exact block combine.
#[derive(Debug)]
pub struct ZBranch {
    /// Solution count: the number of surviving basis strings.
    pub m: usize,
    /// The residual m-term state, masks ascending.
    pub residual: AmplitudeState<u32>,
    /// Exact Born weight of the projection onto the two smallest masks.
    pub projection_success: f64,
    /// The post-projection two-term state, when m >= 2.
    pub projected: Option<AmplitudeState<u32>>,
}

/// Exact simulation of the block combine's measurement structure.
#[derive(Debug)]
pub struct BlockCombineExact {
    /// z -> probability, derived from amplitude masses (not from counting).
    pub z_probabilities: BTreeMap<u64, f64>,
    pub branches: BTreeMap<u64, ZBranch>,
}

impl BlockCombineExact {
    /// Born-sample a z value from the exact distribution.
    pub fn sample_z(&self, rng: &mut impl Rng) -> u64 {
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut picked = *self.z_probabilities.keys().last().expect("nonempty");
        for (&z, &p) in &self.z_probabilities {
            acc += p;
            if draw < acc {
                picked = z;
                break;
            }
        }
        picked
    }
}

/// Tensor a batch of phase qubits, compute <b, y> mod 2^t into a register,
/// and work out the exact distribution of measuring that register along with
/// every residual state and projection weight.
pub fn exact_block_combine(y: &[u64], n: u32, d: u64, t: u32) -> Result<BlockCombineExact> {
    if n == 0 || n > MAX_COSET_BITS {
        return Err(Error::ModulusExponentOutOfRange(n));
    }
    if y.len() > MAX_BLOCK_QUBITS {
        return Err(Error::ParameterTooLarge {
            name: "batch size",
            max: MAX_BLOCK_QUBITS as u64,
            got: y.len() as u64,
        });
    }
    if t > n {
        return Err(Error::BitRangeOutOfBounds { t, n });
    }
    let modulus = 1u64 << n;
    for &v in y.iter().chain([&d]) {
        if v >> n != 0 {
            return Err(Error::ValueNotReduced { value: v, n });
        }
    }
    let dim = 1usize << y.len();
    let scale = 1.0 / (dim as f64).sqrt();
    let reduce = if t == 0 { 0 } else { (1u64 << t) - 1 };

    let inner = |mask: u32| -> u64 {
        y.iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .fold(0u64, |a, (_, &v)| a.wrapping_add(v))
            & (modulus - 1)
    };

    let basis: Vec<u32> = (0..dim as u32).collect();
    let amplitudes: Vec<Complex64> = basis
        .iter()
        .map(|&mask| unit_phase(d.wrapping_mul(inner(mask)), modulus) * scale)
        .collect();
    let state = AmplitudeState::new(basis, amplitudes);
    state.assert_normalized();

    let z_probabilities = state.outcome_masses(|mask| inner(mask) & reduce);
    let mut branches = BTreeMap::new();
    for &z in z_probabilities.keys() {
        let (kept, amps): (Vec<u32>, Vec<Complex64>) = state
            .basis()
            .iter()
            .zip(state.amplitudes())
            .filter(|(&mask, _)| inner(mask) & reduce == z)
            .map(|(&mask, &a)| (mask, a))
            .unzip();
        let mut residual = AmplitudeState::new(kept, amps);
        residual.renormalize();
        let m = residual.dimension();
        let projection_success = if m >= 2 {
            residual.amplitudes()[0].norm_sqr() + residual.amplitudes()[1].norm_sqr()
        } else {
            0.0
        };
        let projected = (m >= 2).then(|| {
            let mut p = AmplitudeState::new(
                residual.basis()[..2].to_vec(),
                residual.amplitudes()[..2].to_vec(),
            );
            p.renormalize();
            p
        });
        branches.insert(
            z,
            ZBranch {
                m,
                residual,
                projection_success,
                projected,
            },
        );
    }
    Ok(BlockCombineExact {
        z_probabilities,
        branches,
    })
}
