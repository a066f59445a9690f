//! Bit-by-bit recovery of the hidden shift.
//!
//! One pipeline run plus a Hadamard measurement yields the least significant
//! bit of d; restricting the oracle by that bit halves the group, and the
//! recursion walks down until the instance is small enough to brute-force
//! with classical queries.
//!
//! As n shrinks the strict parameter shapes stop existing, so each level
//! falls back to a padded schedule: keep the configured stage count (clamped
//! to n-1), give every stage the widest equal block that fits, and accept
//! only exact 2^{n-1} finals. At shape-exact levels this reproduces the
//! strict parameters.

use thiserror::Error;

use crate::error::Error as CoreError;
use crate::oracle::{GroupElement, HiddenOracle};
use crate::params::{SieveParams, Variant};
use crate::report::TrialReport;
use crate::rng::{derive_seed, DOMAIN_LEVEL, DOMAIN_RETRY};
use crate::sieve::{default_budget, run_pipeline, PipelinePlan, RunMode};

/// How the recursion runs each level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryConfig {
    pub variant: Variant,
    /// Stage count carried down the recursion (clamped per level).
    pub k: u32,
    /// Below this modulus exponent the residual instance is solved by
    /// classical scanning; 2^{n_min}+1 queries is negligible.
    pub n_min: u32,
    /// Budget-doubling retries allowed per level.
    pub max_retries: u32,
    pub budget_override: Option<u64>,
    pub m_max: usize,
    pub seed: u64,
}

pub const DEFAULT_N_MIN: u32 = 3;

impl RecoveryConfig {
    pub fn new(variant: Variant, k: u32, seed: u64) -> Self {
        Self {
            variant,
            k,
            n_min: DEFAULT_N_MIN,
            max_retries: crate::params::DEFAULT_MAX_RETRIES,
            budget_override: None,
            m_max: crate::combine::DEFAULT_M_MAX,
            seed,
        }
    }

    pub fn from_params(params: &SieveParams) -> Self {
        Self {
            variant: params.variant(),
            k: params.k(),
            n_min: DEFAULT_N_MIN,
            max_retries: params.max_retries(),
            budget_override: params.budget_override(),
            m_max: crate::combine::DEFAULT_M_MAX,
            seed: params.seed(),
        }
    }
}

/// Stage count the bench harness uses when given only n: near sqrt(n-1)
/// stages for the pairwise sieve, near sqrt(n / log2 n) for the block
/// sieve, each feeding [`level_plan`].
pub fn default_stage_count(variant: Variant, n: u32) -> u32 {
    let nf = f64::from(n);
    let k = match variant {
        Variant::Kuperberg => (nf - 1.0).sqrt().round(),
        Variant::Regev => (nf / nf.log2()).sqrt().round(),
    };
    (k as u32).clamp(1, n.saturating_sub(1).max(1))
}

/// The per-level schedule: stages = min(k, n-1), width = (n-1)/stages.
pub fn level_plan(
    variant: Variant,
    n: u32,
    k: u32,
    m_max: usize,
    budget_override: Option<u64>,
    seed: u64,
) -> crate::error::Result<PipelinePlan> {
    if n < 2 {
        return Err(CoreError::ModulusExponentOutOfRange(n));
    }
    if k < 1 {
        return Err(CoreError::ParameterTooSmall {
            name: "k",
            min: 1,
            got: u64::from(k),
        });
    }
    let stages = k.min(n - 1);
    let width = (n - 1) / stages;
    let leftover = n - 1 - stages * width;
    let plan = PipelinePlan {
        variant,
        n,
        stages,
        width,
        budget: budget_override.unwrap_or_else(|| default_budget(variant, stages, width, leftover)),
        m_max,
        seed,
        mode: RunMode::FirstAccept,
    };
    plan.validate()?;
    Ok(plan)
}

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("no 2^{{n-1}} object after {attempts} attempts at n={n} (budgets {first_budget}..{last_budget})")]
    RetriesExhausted {
        n: u32,
        attempts: u32,
        first_budget: u64,
        last_budget: u64,
        reports: Vec<TrialReport>,
    },
    #[error("recursion level {level} (n={n}) failed: {source}")]
    LevelFailed {
        level: u32,
        n: u32,
        #[source]
        source: Box<RecoveryError>,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// One recovered bit plus the pipeline runs it took.
#[derive(Debug)]
pub struct LsbRecovery {
    pub bit: u8,
    pub attempts: Vec<TrialReport>,
}

/// Run the configured sieve (doubling the budget on failure) until a
/// 2^{n-1}-labelled object appears, then measure it in the Hadamard basis.
/// The resulting bit equals d mod 2.
pub fn recover_lsb(
    oracle: &mut HiddenOracle,
    params: &SieveParams,
) -> Result<LsbRecovery, RecoveryError> {
    let plan = PipelinePlan::from_params(params);
    recover_lsb_with_plan(oracle, &plan, params.max_retries())
}

pub fn recover_lsb_with_plan(
    oracle: &mut HiddenOracle,
    plan: &PipelinePlan,
    max_retries: u32,
) -> Result<LsbRecovery, RecoveryError> {
    let mut reports = Vec::new();
    for attempt in 0..=max_retries {
        let attempt_plan = plan
            .clone()
            .with_budget(plan.budget.saturating_mul(1u64 << attempt.min(62)))
            .with_seed(derive_seed(plan.seed, DOMAIN_RETRY, u64::from(attempt)));
        let (object, report) = run_pipeline(oracle, &attempt_plan)?;
        // per-attempt sanity: a run never draws past its own budget
        debug_assert!(report.fresh_objects <= attempt_plan.budget);
        reports.push(report);
        if let Some(object) = object {
            let bit = oracle.measure_hadamard(object);
            return Ok(LsbRecovery {
                bit,
                attempts: reports,
            });
        }
    }
    Err(RecoveryError::RetriesExhausted {
        n: plan.n,
        attempts: max_retries + 1,
        first_budget: plan.budget,
        last_budget: plan.budget.saturating_mul(1u64 << max_retries.min(62)),
        reports,
    })
}

/// Accounting for one recursion level.
#[derive(Debug)]
pub struct LevelOutcome {
    pub level: u32,
    pub n: u32,
    pub bit: u8,
    pub attempts: Vec<TrialReport>,
}

/// The recovered shift plus full per-level accounting.
#[derive(Debug)]
pub struct RecoveryOutcome {
    pub secret: u64,
    pub levels: Vec<LevelOutcome>,
    /// Modulus exponent at which the classical base solve took over.
    pub base_bits: u32,
    pub base_value: u64,
    pub base_queries: u64,
    /// Root-oracle queries across all levels and the base solve.
    pub total_oracle_queries: u64,
}

impl RecoveryOutcome {
    pub fn total_fresh_objects(&self) -> u64 {
        self.levels
            .iter()
            .flat_map(|l| &l.attempts)
            .map(|r| r.fresh_objects)
            .sum()
    }

    pub fn max_peak_live(&self) -> u64 {
        self.levels
            .iter()
            .flat_map(|l| &l.attempts)
            .map(|r| r.peak_live_objects)
            .max()
            .unwrap_or(0)
    }
}

/// Recover every bit of the hidden shift: sieve for the current least
/// significant bit, restrict, repeat; finish the last `n_min` bits by
/// scanning reflections classically.
pub fn recover_d(
    mut oracle: HiddenOracle,
    cfg: &RecoveryConfig,
) -> Result<RecoveryOutcome, RecoveryError> {
    let queries_at_start = oracle.query_count();
    let mut levels = Vec::new();
    let mut bits: Vec<u8> = Vec::new();
    while oracle.bits() > cfg.n_min {
        let level = bits.len() as u32;
        let n = oracle.bits();
        let plan = level_plan(
            cfg.variant,
            n,
            cfg.k,
            cfg.m_max,
            cfg.budget_override,
            derive_seed(cfg.seed, DOMAIN_LEVEL, u64::from(level)),
        )?;
        let rec = recover_lsb_with_plan(&mut oracle, &plan, cfg.max_retries).map_err(|e| {
            RecoveryError::LevelFailed {
                level,
                n,
                source: Box::new(e),
            }
        })?;
        levels.push(LevelOutcome {
            level,
            n,
            bit: rec.bit,
            attempts: rec.attempts,
        });
        bits.push(rec.bit);
        oracle = oracle.restrict(rec.bit)?;
    }

    let queries_before_base = oracle.query_count();
    let base_bits = oracle.bits();
    let base_value = classical_base_solve(&mut oracle)?;
    let base_queries = oracle.query_count() - queries_before_base;

    let low = bits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
    let secret = (base_value << bits.len()) | low;

    Ok(RecoveryOutcome {
        secret,
        levels,
        base_bits,
        base_value,
        base_queries,
        total_oracle_queries: oracle.query_count() - queries_at_start,
    })
}

/// Solve a small instance outright: the unique x with f(1, x) = f(0, 0) is
/// the hidden shift, by the coset promise. At most 2^n + 1 queries.
pub fn classical_base_solve(oracle: &mut HiddenOracle) -> crate::error::Result<u64> {
    let target = oracle.query(GroupElement::rotation(0))?;
    for x in 0..oracle.modulus() {
        if oracle.query(GroupElement::reflection(x))? == target {
            return Ok(x);
        }
    }
    Err(CoreError::PromiseViolation)
}
