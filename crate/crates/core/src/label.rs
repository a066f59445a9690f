//! Labels modulo N = 2^n and the phase objects the sieves trade in.

use crate::error::{Error, Result};

/// Largest supported modulus exponent. Desk-scale runs stay far below this;
/// the cap keeps every label inside a plain `u64`.
pub const MAX_MODULUS_EXPONENT: u32 = 62;

/// An integer label y modulo N = 2^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    value: u64,
    bits: u32,
}

impl Label {
    pub fn new(value: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_MODULUS_EXPONENT {
            return Err(Error::ModulusExponentOutOfRange(bits));
        }
        if value >> bits != 0 {
            return Err(Error::ValueNotReduced { value, n: bits });
        }
        Ok(Self { value, bits })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    /// The modulus exponent n.
    pub fn bits(self) -> u32 {
        self.bits
    }

    /// N = 2^n.
    pub fn modulus(self) -> u64 {
        1u64 << self.bits
    }

    fn mask(self) -> u64 {
        self.modulus() - 1
    }

    /// (self - other) mod 2^n: the label of a pairwise combination.
    #[allow(clippy::should_implement_trait)] // fallible: moduli must match
    pub fn sub(self, other: Label) -> Result<Label> {
        if self.bits != other.bits {
            return Err(Error::ModulusMismatch(self.bits, other.bits));
        }
        Ok(Self {
            value: self.value.wrapping_sub(other.value) & self.mask(),
            bits: self.bits,
        })
    }

    /// (self + other) mod 2^n.
    #[allow(clippy::should_implement_trait)] // fallible: moduli must match
    pub fn add(self, other: Label) -> Result<Label> {
        if self.bits != other.bits {
            return Err(Error::ModulusMismatch(self.bits, other.bits));
        }
        Ok(Self {
            value: self.value.wrapping_add(other.value) & self.mask(),
            bits: self.bits,
        })
    }

    /// True iff the `t` least significant bits are all zero; `t = 0` is
    /// vacuously true.
    pub fn low_bits_zero(self, t: u32) -> Result<bool> {
        if t > self.bits {
            return Err(Error::BitRangeOutOfBounds { t, n: self.bits });
        }
        Ok(t == 0 || self.value & ((1u64 << t) - 1) == 0)
    }

    /// Bits (i-1)*w+1 ..= i*w of the value, positions 1-indexed from the
    /// least significant bit: floor(value / 2^{(i-1)w}) mod 2^w.
    pub fn block_value(self, index: u32, width: u32) -> Result<u64> {
        if index == 0 || width == 0 {
            return Err(Error::BlockOutOfRange {
                index,
                width,
                n: self.bits,
            });
        }
        if u64::from(index) * u64::from(width) > u64::from(self.bits) {
            return Err(Error::BlockOutOfRange {
                index,
                width,
                n: self.bits,
            });
        }
        Ok((self.value >> ((index - 1) * width)) & ((1u64 << width) - 1))
    }
}

/// A labelled object standing for the one-qubit state
/// |0> + exp(2*pi*i*d*y/N)|1>.
///
/// The phase is never stored: it is determined by the label and the oracle's
/// hidden shift. Objects are affine resources — deliberately not `Clone` —
/// and every operation that touches one consumes it. `stage` counts how many
/// low blocks have been certified zero by [`PhaseObject::advance_stage`].
#[derive(Debug, PartialEq, Eq)]
pub struct PhaseObject {
    label: Label,
    stage: u32,
}

impl PhaseObject {
    /// A freshly sampled object; no blocks certified yet.
    pub fn fresh(label: Label) -> Self {
        Self { label, stage: 0 }
    }

    pub(crate) fn with_stage(label: Label, stage: u32) -> Self {
        Self { label, stage }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    /// Certify that one more block of `width` low bits is zeroed. Pipeline
    /// stages call this on every forward; a label that does not actually
    /// have the bits zero is a contract violation and panics.
    pub fn advance_stage(self, width: u32) -> Self {
        let stage = self.stage + 1;
        let zeroed = stage * width;
        assert!(
            self.label.low_bits_zero(zeroed).unwrap_or(false),
            "stage invariant violated: label {:#x} lacks {} zero low bits",
            self.label.value(),
            zeroed,
        );
        Self {
            label: self.label,
            stage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lab(value: u64, bits: u32) -> Label {
        Label::new(value, bits).unwrap()
    }

    #[test]
    fn sub_examples() {
        assert_eq!(lab(5, 4).sub(lab(3, 4)).unwrap().value(), 2);
        assert_eq!(lab(3, 4).sub(lab(5, 4)).unwrap().value(), 14);
        assert_eq!(lab(7, 4).sub(lab(7, 4)).unwrap().value(), 0);
    }

    #[test]
    fn sub_rejects_mismatched_moduli() {
        assert_eq!(
            lab(1, 4).sub(lab(1, 5)),
            Err(Error::ModulusMismatch(4, 5))
        );
    }

    #[test]
    fn low_bits_zero_examples() {
        assert!(lab(8, 4).low_bits_zero(3).unwrap());
        assert!(!lab(8, 4).low_bits_zero(4).unwrap());
        assert!(lab(0, 4).low_bits_zero(4).unwrap());
        assert!(lab(9, 4).low_bits_zero(0).unwrap());
        assert_eq!(
            lab(8, 4).low_bits_zero(5),
            Err(Error::BitRangeOutOfBounds { t: 5, n: 4 })
        );
    }

    // The 1-indexed-from-LSB block convention: block i of width w is
    // floor(value / 2^{(i-1)w}) mod 2^w. Exercised against hand-reduced
    // values.
    #[test]
    fn block_value_is_shift_then_mask() {
        let a = lab(0b101_1000, 7);
        assert_eq!(a.block_value(1, 3).unwrap(), 0b000);
        assert_eq!(a.block_value(2, 3).unwrap(), 0b011);
        assert_eq!(lab(0, 7).block_value(1, 3).unwrap(), 0);
        let b = lab(1 << 6, 7);
        assert_eq!(b.block_value(2, 3).unwrap(), 0);
        assert_eq!(b.block_value(1, 7).unwrap(), 1 << 6);
        assert_eq!(b.block_value(7, 1).unwrap(), 1);
        assert_eq!(
            a.block_value(3, 3),
            Err(Error::BlockOutOfRange {
                index: 3,
                width: 3,
                n: 7
            })
        );
    }

    #[test]
    fn label_rejects_unreduced_values() {
        assert!(Label::new(16, 4).is_err());
        assert!(Label::new(15, 4).is_ok());
        assert!(Label::new(0, 0).is_err());
        assert!(Label::new(0, 63).is_err());
        assert!(Label::new((1 << 62) - 1, 62).is_ok());
    }

    // Group inverse: (a - b) + b = a, exhaustive for n <= 10.
    #[test]
    fn sub_then_add_recovers_exhaustive() {
        for n in 1..=10u32 {
            let modulus = 1u64 << n;
            for a in 0..modulus {
                for b in 0..modulus {
                    let la = lab(a, n);
                    let lb = lab(b, n);
                    assert_eq!(la.sub(lb).unwrap().add(lb).unwrap(), la);
                }
            }
        }
    }

    // The correctness core of both pipelines: matching one more block of two
    // block-aligned labels zeroes that block in their difference.
    // Exhaustive at n = 12 for several widths.
    #[test]
    fn matching_blocks_zero_the_difference_exhaustive() {
        let n = 12u32;
        for w in [1u32, 2, 3, 4, 6] {
            for i in 1..=(n / w) {
                let t = (i - 1) * w;
                let step = 1u64 << t; // only labels with low t bits zero
                let modulus = 1u64 << n;
                let mut a = 0u64;
                while a < modulus {
                    let la = lab(a, n);
                    let block_a = la.block_value(i, w).unwrap();
                    let mut b = 0u64;
                    while b < modulus {
                        let lb = lab(b, n);
                        if lb.block_value(i, w).unwrap() == block_a {
                            assert!(la.sub(lb).unwrap().low_bits_zero(t + w).unwrap());
                        }
                        b += step;
                    }
                    a += step;
                }
            }
        }
    }

    #[test]
    fn advance_stage_certifies_zeroed_blocks() {
        let obj = PhaseObject::fresh(lab(0b110000, 6));
        let obj = obj.advance_stage(2);
        assert_eq!(obj.stage(), 1);
        let obj = obj.advance_stage(2);
        assert_eq!(obj.stage(), 2);
    }

    #[test]
    #[should_panic(expected = "stage invariant violated")]
    fn advance_stage_panics_on_nonzero_bits() {
        let obj = PhaseObject::fresh(lab(0b1101, 6));
        let _ = obj.advance_stage(2);
    }

    proptest! {
        #[test]
        fn sub_add_roundtrip(n in 1u32..=62, a in 0u64.., b in 0u64..) {
            let mask = (1u64 << n) - 1;
            let la = lab(a & mask, n);
            let lb = lab(b & mask, n);
            prop_assert_eq!(la.sub(lb).unwrap().add(lb).unwrap(), la);
        }

        #[test]
        fn blocks_partition_the_value(n in 1u32..=62, width in 1u32..=8, v in 0u64..) {
            let la = lab(v & ((1u64 << n) - 1), n);
            let full_blocks = n / width;
            let mut reassembled = la.value() >> (full_blocks * width) << (full_blocks * width);
            for i in 1..=full_blocks {
                reassembled |= la.block_value(i, width).unwrap() << ((i - 1) * width);
            }
            prop_assert_eq!(reassembled, la.value());
        }
    }
}
