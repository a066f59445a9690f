//! Statistical verification suites: each one pits a sampled distribution
//! against its closed form or against the exact amplitude simulation, and
//! reports a deterministic pass/fail line. The CLI's `verify` subcommand and
//! the acceptance tests both run these.

use rand::Rng;

use crate::combine::{combine_block, combine_pair, count_solutions, sample_z, BlockCombineConfig};
use crate::exactsim;
use crate::label::{Label, PhaseObject};
use crate::oracle::HiddenOracle;
use crate::params::Variant;
use crate::rng::{derive_seed, stream_rng, DOMAIN_SUITE, DOMAIN_TRIAL};
use crate::sieve::{expected_stage_outputs, run_pipeline, stage_throughput_check, PipelinePlan, RunMode};
use crate::stats::chi_squared_gof;

/// Significance level shared by every chi-squared suite.
pub const SIGNIFICANCE: f64 = 0.01;

/// One suite's verdict. `detail` is deterministic for a fixed seed.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

/// Run every suite with independently derived seeds.
pub fn all_suites(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        pair_combine_suite(derive_seed(seed, DOMAIN_SUITE, 0)),
        y_statistics_suite(derive_seed(seed, DOMAIN_SUITE, 1)),
        born_rule_suite(derive_seed(seed, DOMAIN_SUITE, 2)),
        projection_suite(derive_seed(seed, DOMAIN_SUITE, 3)),
        throughput_suite(derive_seed(seed, DOMAIN_SUITE, 4)),
        final_label_split_suite(derive_seed(seed, DOMAIN_SUITE, 5)),
    ]
}

/// Pairwise combine succeeds at rate 1/2 +- 0.01 over 1e5 attempts.
pub fn pair_combine_suite(seed: u64) -> SuiteOutcome {
    let mut rng = stream_rng(seed, 0);
    let trials = 100_000u64;
    let mut successes = 0u64;
    for _ in 0..trials {
        let a = PhaseObject::fresh(Label::new(rng.random_range(0..64), 6).unwrap());
        let b = PhaseObject::fresh(Label::new(rng.random_range(0..64), 6).unwrap());
        if combine_pair(a, b, &mut rng).expect("same modulus").is_success() {
            successes += 1;
        }
    }
    let rate = successes as f64 / trials as f64;
    SuiteOutcome::new(
        "pair_combine_rate",
        (rate - 0.5).abs() <= 0.01,
        format!("measured={rate:.5} expected=0.5 tolerance=0.01 trials={trials}"),
    )
}

/// Y = m(0) - 1 has mean 16 - 2^-l and variance 16 - 17*2^-l + 2^-2l.
pub fn y_statistics_suite(seed: u64) -> SuiteOutcome {
    let trials = 10_000u64;
    let mut pass = true;
    let mut details = Vec::new();
    for (i, l) in [4u32, 6].into_iter().enumerate() {
        let mut rng = stream_rng(derive_seed(seed, DOMAIN_TRIAL, i as u64), 0);
        let (mean, var) = crate::combine::y_statistics(l, trials, &mut rng).expect("valid l");
        let expect_mean = 16.0 - (0.5f64).powi(l as i32);
        let expect_var = 16.0 - 17.0 * (0.5f64).powi(l as i32) + (0.5f64).powi(2 * l as i32);
        let ok = (mean - expect_mean).abs() <= 0.2 && (var - expect_var).abs() <= 1.0;
        pass &= ok;
        details.push(format!(
            "l={l}: mean={mean:.4}/{expect_mean:.4} (+-0.2) var={var:.4}/{expect_var:.4} (+-1.0)"
        ));
    }
    SuiteOutcome::new("y_statistics", pass, details.join("; "))
}

/// Sampled z values match m(z)/2^{l+4} by chi-squared, and the exact
/// simulator's amplitude-derived probabilities match the brute-force count
/// to 1e-9, for ten random label vectors at l <= 4.
pub fn born_rule_suite(seed: u64) -> SuiteOutcome {
    let mut pass = true;
    let mut worst_p = 1.0f64;
    let mut worst_gap = 0.0f64;
    let mut case = 0u64;
    for l in [2u32, 3, 4] {
        let vectors = if l == 4 { 4 } else { 3 };
        for _ in 0..vectors {
            let mut rng = stream_rng(derive_seed(seed, DOMAIN_TRIAL, case), 0);
            case += 1;
            let n = l + 2;
            let batch = l as usize + 4;
            let labels: Vec<Label> = (0..batch)
                .map(|_| Label::new(rng.random_range(0..1u64 << n), n).unwrap())
                .collect();
            let d = rng.random_range(0..1u64 << n);

            // exact amplitudes vs brute-force counting
            let raw: Vec<u64> = labels.iter().map(|lab| lab.value()).collect();
            let exact = exactsim::exact_block_combine(&raw, n, d, l).expect("desk scale");
            let dim = (1u64 << batch) as f64;
            let mut expected = Vec::new();
            let mut observed_index = std::collections::HashMap::new();
            for z in 0..1u64 << l {
                let m = count_solutions(&labels, z, l).expect("valid").m();
                let p = exact.z_probabilities.get(&z).copied().unwrap_or(0.0);
                let gap = (p - m as f64 / dim).abs();
                worst_gap = worst_gap.max(gap);
                if gap > exactsim::TOLERANCE {
                    pass = false;
                }
                observed_index.insert(z, expected.len());
                expected.push(m as f64);
            }

            // sampled z frequencies vs the counts
            let samples = 100_000u64;
            let mut observed = vec![0u64; expected.len()];
            for _ in 0..samples {
                let z = sample_z(&labels, l, &mut rng).expect("valid");
                observed[observed_index[&z]] += 1;
            }
            let scale = samples as f64 / dim;
            let expected_counts: Vec<f64> = expected.iter().map(|m| m * scale).collect();
            let test = chi_squared_gof(&observed, &expected_counts);
            worst_p = worst_p.min(test.p_value);
            if test.rejects_at(SIGNIFICANCE) {
                pass = false;
            }
        }
    }
    SuiteOutcome::new(
        "block_born_rule",
        pass,
        format!(
            "10 label vectors, l in {{2,3,4}}: min chi2 p={worst_p:.4} (alpha={SIGNIFICANCE}), max |amplitude - count| gap={worst_gap:.2e}"
        ),
    )
}

/// Fixed-m instances built from j ones and (8-j) twos at l = 4 (z = 1 keeps
/// exactly j strings), plus power-ladder instances for m in {16, 32}.
/// The projection must succeed at rate 2/m within three standard errors and
/// match the exact simulator's Born weight.
pub fn projection_suite(seed: u64) -> SuiteOutcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (case, &m_target) in [2usize, 3, 4, 8, 16, 32].iter().enumerate() {
        let values: Vec<u64> = match m_target {
            16 => vec![1, 2, 4, 8, 0, 0, 0, 0],
            32 => vec![2, 4, 8, 0, 0, 0, 0, 0],
            j => {
                let mut v = vec![1u64; j];
                v.resize(8, 2);
                v
            }
        };
        let labels: Vec<Label> = values.iter().map(|&v| Label::new(v, 4).unwrap()).collect();
        // find a z that carries exactly the target count (z = 1 for the
        // ones-and-twos family, any even z for the ladders)
        let z_target = (0..16u64)
            .find(|&z| count_solutions(&labels, z, 4).unwrap().m() == m_target)
            .expect("constructed instance has the target m");

        // exact Born weight of the projection
        let exact = exactsim::exact_block_combine(&values, 4, 7, 4).expect("desk scale");
        let branch = &exact.branches[&z_target];
        let exact_gap = (branch.projection_success - 2.0 / m_target as f64).abs();
        if exact_gap > exactsim::TOLERANCE {
            pass = false;
        }

        let mut rng = stream_rng(derive_seed(seed, DOMAIN_TRIAL, case as u64), 0);
        let cfg = BlockCombineConfig::new(4, 1);
        let mut hits = 0u64;
        let mut successes = 0u64;
        let needed = 600u64;
        let mut attempts = 0u64;
        while hits < needed && attempts < 4_000_000 {
            attempts += 1;
            let batch: Vec<PhaseObject> = labels
                .iter()
                .map(|&lab| PhaseObject::fresh(lab))
                .collect();
            let outcome = combine_block(batch, &cfg, &mut rng).expect("valid batch");
            if outcome.m() == Some(m_target) {
                hits += 1;
                if outcome.is_success() {
                    successes += 1;
                }
            }
        }
        let p = 2.0 / m_target as f64;
        let rate = successes as f64 / hits as f64;
        let se = (p * (1.0 - p) / hits as f64).sqrt().max(1e-9);
        let ok = hits >= needed && (rate - p).abs() <= 3.0 * se.max(1e-4);
        pass &= ok;
        details.push(format!("m={m_target}: rate={rate:.4}/{p:.4} over {hits}"));
    }
    SuiteOutcome::new("projection_law", pass, details.join("; "))
}

/// One isolated pile stage fed c*2^k uniform objects emits at least
/// (c/8)*2^k of them in >= 99% of trials.
pub fn throughput_suite(seed: u64) -> SuiteOutcome {
    let stats = stage_throughput_check(8, 4, 100, seed).expect("valid parameters");
    let exact = expected_stage_outputs(4, stats.inputs_per_trial);
    SuiteOutcome::new(
        "stage_throughput",
        stats.pass_rate >= 0.99,
        format!(
            "pass_rate={:.2} (>=0.99), mean_outputs={:.2}, occupancy-chain expectation={:.2}, envelope (c-1)/4*2^k=28",
            stats.pass_rate, stats.mean_outputs, exact
        ),
    )
}

/// Final-stage outputs of the exact-shape pile pipeline are 0 or 2^{n-1},
/// the latter with frequency 1/2 +- 0.05 over at least 400 finals.
pub fn final_label_split_suite(seed: u64) -> SuiteOutcome {
    let mut finals: Vec<u64> = Vec::new();
    let mut trial = 0u64;
    while finals.len() < 400 {
        let run_seed = derive_seed(seed, DOMAIN_TRIAL, trial);
        trial += 1;
        let mut oracle = HiddenOracle::with_random_secret(10, run_seed).unwrap();
        let plan = PipelinePlan {
            variant: Variant::Kuperberg,
            n: 10,
            stages: 3,
            width: 3,
            budget: 40_000,
            m_max: crate::combine::DEFAULT_M_MAX,
            seed: run_seed,
            mode: RunMode::FullBudget,
        };
        let (_, report) = run_pipeline(&mut oracle, &plan).expect("valid plan");
        finals.extend(report.final_labels);
    }
    let target = 1u64 << 9;
    let in_range = finals.iter().all(|&v| v == 0 || v == target);
    let hits = finals.iter().filter(|&&v| v == target).count();
    let freq = hits as f64 / finals.len() as f64;
    SuiteOutcome::new(
        "final_label_split",
        in_range && (freq - 0.5).abs() <= 0.05,
        format!(
            "finals={} target_frequency={freq:.4} (0.5 +- 0.05) labels_in_range={in_range}",
            finals.len()
        ),
    )
}
