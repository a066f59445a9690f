//! Validated top-level sieve parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::label::MAX_MODULUS_EXPONENT;

/// Which pipeline runs: the pairwise collision sieve or the block sieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Kuperberg,
    Regev,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Kuperberg => "kuperberg",
            Variant::Regev => "regev",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kuperberg" => Ok(Variant::Kuperberg),
            "regev" => Ok(Variant::Regev),
            other => Err(format!("unknown variant `{other}` (expected kuperberg or regev)")),
        }
    }
}

/// Shape-checked pipeline parameters: `n = k^2 + 1` for the pairwise sieve,
/// `n = 1 + k*l` for the block sieve. The recursion in [`crate::recovery`]
/// relaxes these shapes level by level; this type is the strict, user-facing
/// form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveParams {
    variant: Variant,
    n: u32,
    k: u32,
    l: Option<u32>,
    budget: Option<u64>,
    max_retries: u32,
    seed: u64,
}

pub const DEFAULT_MAX_RETRIES: u32 = 8;

impl SieveParams {
    pub fn new(
        variant: Variant,
        n: u32,
        k: u32,
        l: Option<u32>,
        budget: Option<u64>,
        max_retries: u32,
        seed: u64,
    ) -> Result<Self> {
        if !(2..=MAX_MODULUS_EXPONENT).contains(&n) {
            return Err(Error::ModulusExponentOutOfRange(n));
        }
        if k < 1 {
            return Err(Error::ParameterTooSmall {
                name: "k",
                min: 1,
                got: u64::from(k),
            });
        }
        match variant {
            Variant::Kuperberg => {
                if l.is_some() {
                    return Err(Error::UnexpectedBlockLength);
                }
                if u64::from(k) * u64::from(k) + 1 != u64::from(n) {
                    return Err(Error::KuperbergShape { n, k });
                }
            }
            Variant::Regev => {
                let l = l.ok_or(Error::ParameterTooSmall {
                    name: "l",
                    min: 1,
                    got: 0,
                })?;
                if l < 1 {
                    return Err(Error::ParameterTooSmall {
                        name: "l",
                        min: 1,
                        got: u64::from(l),
                    });
                }
                if 1 + u64::from(k) * u64::from(l) != u64::from(n) {
                    return Err(Error::RegevShape { n, k, l });
                }
            }
        }
        Ok(Self {
            variant,
            n,
            k,
            l,
            budget,
            max_retries,
            seed,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> Option<u32> {
        self.l
    }

    /// Block width per pipeline stage: k for the pairwise sieve, l for the
    /// block sieve.
    pub fn width(&self) -> u32 {
        match self.variant {
            Variant::Kuperberg => self.k,
            Variant::Regev => self.l.expect("validated"),
        }
    }

    pub fn budget_override(&self) -> Option<u64> {
        self.budget
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
