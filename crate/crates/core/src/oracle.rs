//! The hidden-subgroup black box over the dihedral group D_N, together with
//! the coset-state sampling machine and the d-dependent measurements.
//!
//! The box hides the reflection subgroup H = {(0,0), (1,d)} and answers
//! queries with a function that is constant on left cosets {(0,x), (1,x+d)}
//! of H and distinct across cosets. The concrete instantiation is
//! f(0,x) = x, f(1,x) = x - d mod N; nothing outside this module depends on
//! that choice.
//!
//! Restrictions halve the group after a bit of d has been learned. They are
//! realized as black-box wrappers — each level rewrites a query's rotation
//! amount and hands it to the level below, so query accounting always lands
//! on the root oracle and the secret is never read along the way.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::{Label, PhaseObject, MAX_MODULUS_EXPONENT};
use crate::rng::{stream_rng, STREAM_ORACLE};

/// An element (b, x) of D_N: b = 0 is the rotation x, b = 1 the reflection x.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub reflection: bool,
    pub x: u64,
}

impl GroupElement {
    pub fn rotation(x: u64) -> Self {
        Self {
            reflection: false,
            x,
        }
    }

    pub fn reflection(x: u64) -> Self {
        Self {
            reflection: true,
            x,
        }
    }
}

/// The black box hiding {(0,0), (1,d)}, plus the sampling machine.
///
/// Stateful resource: it owns the query counter and the PRNG stream used for
/// measurement sampling. Confine to one thread at a time.
#[derive(Debug)]
pub struct HiddenOracle {
    root_bits: u32,
    secret: u64,
    /// Bits peeled off by `restrict`, least significant first.
    restriction_bits: Vec<u8>,
    query_count: u64,
    rng: ChaCha8Rng,
}

impl HiddenOracle {
    /// A root oracle over D_{2^n} hiding the given shift.
    pub fn new(n: u32, secret: u64, seed: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS_EXPONENT).contains(&n) {
            return Err(Error::ModulusExponentOutOfRange(n));
        }
        if secret >> n != 0 {
            return Err(Error::ValueNotReduced { value: secret, n });
        }
        Ok(Self {
            root_bits: n,
            secret,
            restriction_bits: Vec::new(),
            query_count: 0,
            rng: stream_rng(seed, STREAM_ORACLE),
        })
    }

    /// A root oracle with a secret drawn uniformly from the oracle's own
    /// stream (before any measurement sampling).
    pub fn with_random_secret(n: u32, seed: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS_EXPONENT).contains(&n) {
            return Err(Error::ModulusExponentOutOfRange(n));
        }
        let mut rng = stream_rng(seed, STREAM_ORACLE);
        let secret = rng.random_range(0..1u64 << n);
        Ok(Self {
            root_bits: n,
            secret,
            restriction_bits: Vec::new(),
            query_count: 0,
            rng,
        })
    }

    /// Modulus exponent of the current (possibly restricted) level.
    pub fn bits(&self) -> u32 {
        self.root_bits - self.restriction_bits.len() as u32
    }

    pub fn modulus(&self) -> u64 {
        1u64 << self.bits()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    /// How many restriction levels sit between this view and the root.
    pub fn depth(&self) -> u32 {
        self.restriction_bits.len() as u32
    }

    fn root_mask(&self) -> u64 {
        (1u64 << self.root_bits) - 1
    }

    /// Ground truth for harnesses and tests: the shift hidden by the current
    /// view. Exact whenever every restriction bit matched the true secret.
    /// Not part of the black-box surface the algorithms may use.
    pub fn effective_secret(&self) -> u64 {
        let acc = self
            .restriction_bits
            .iter()
            .enumerate()
            .fold(0u64, |a, (i, &b)| a | (u64::from(b) << i));
        (self.secret.wrapping_sub(acc) & self.root_mask()) >> self.depth()
    }

    /// Evaluate f on a group element of the current level. Every call counts
    /// one query against the root oracle.
    pub fn query(&mut self, g: GroupElement) -> Result<u64> {
        if g.x >> self.bits() != 0 {
            return Err(Error::GroupElementOutOfRange {
                x: g.x,
                n: self.bits(),
            });
        }
        self.query_count += 1;
        // Descend the wrapper chain: level t maps (a, x) to (a, 2x + a*bit).
        let mut x = g.x;
        for &bit in self.restriction_bits.iter().rev() {
            x <<= 1;
            if g.reflection {
                x |= u64::from(bit);
            }
        }
        let value = if g.reflection {
            x.wrapping_sub(self.secret) & self.root_mask()
        } else {
            x
        };
        Ok(value)
    }

    /// The machine: one oracle call buys one phase object whose label is
    /// uniform on [0, N). The full circuit behind this shortcut (superpose,
    /// query, measure f, Fourier, measure y) lives in [`crate::exactsim`],
    /// which validates the shortcut's distributions.
    pub fn sample_phase_qubit(&mut self) -> PhaseObject {
        self.query_count += 1;
        let y = self.rng.random_range(0..self.modulus());
        PhaseObject::fresh(Label::new(y, self.bits()).expect("uniform draw is reduced"))
    }

    /// Measure the object's qubit in the Hadamard basis; consumes the
    /// object. Returns 1 with probability sin^2(pi*d*y/N), so a label of
    /// 2^{n-1} yields exactly d mod 2.
    pub fn measure_hadamard(&mut self, obj: PhaseObject) -> u8 {
        assert_eq!(
            obj.label().bits(),
            self.bits(),
            "object modulus does not match the oracle level"
        );
        let p_one = self.hadamard_one_probability(obj.label());
        u8::from(self.rng.random_bool(p_one))
    }

    /// The exact Born weight of outcome 1 for `measure_hadamard`.
    pub fn hadamard_one_probability(&self, label: Label) -> f64 {
        let d = self.effective_secret();
        let y = label.value();
        // sin^2(pi * d*y/N) has period 1 in d*y/N; reduce exactly first.
        let reduced = ((u128::from(d) * u128::from(y)) % u128::from(self.modulus())) as u64;
        let angle = std::f64::consts::PI * (reduced as f64) / (self.modulus() as f64);
        angle.sin().powi(2)
    }

    /// Halve the group after learning the least significant bit of d.
    ///
    /// The caller must pass the true bit; a mismatched bit yields an oracle
    /// that violates the hidden-reflection promise. With the correct bit the
    /// result hides (d - bit)/2 over D_{N/2}. Consumes self so the query
    /// counter keeps accumulating at the root.
    pub fn restrict(mut self, bit: u8) -> Result<Self> {
        if self.bits() == 1 {
            return Err(Error::CannotRestrict);
        }
        self.restriction_bits.push(bit & 1);
        Ok(self)
    }
}
