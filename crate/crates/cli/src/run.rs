//! The `run` subcommand: full secret recovery checked against ground truth.

use dsieve_core::recovery::{recover_d, RecoveryConfig};
use dsieve_core::rng::{derive_seed, DOMAIN_TRIAL};
use dsieve_core::{HiddenOracle, SieveParams};

use crate::output::{opt, wall_ms, write_records, RunRecord};
use crate::{usage_error, RunArgs, SecretArg};

pub fn cmd_run(args: RunArgs) -> i32 {
    let seed = crate::resolve_seed(args.common.seed).unwrap_or_else(|e| usage_error(&e));
    if args.trials < 1 {
        usage_error("--trials must be at least 1");
    }
    // Shape validation up front: bad parameters are a usage error.
    let params = SieveParams::new(
        args.variant,
        args.n,
        args.k,
        args.l,
        args.budget,
        args.max_retries,
        seed,
    )
    .unwrap_or_else(|e| usage_error(&e.to_string()));
    if let SecretArg::Fixed(d) = args.d {
        if d >> args.n != 0 {
            usage_error(&format!("--d {d} is not reduced modulo 2^{}", args.n));
        }
    }

    println!(
        "run variant={} n={} k={} l={} d={} seed={seed} trials={}",
        params.variant(),
        params.n(),
        params.k(),
        opt(&params.l()),
        match args.d {
            SecretArg::Random => "random".to_string(),
            SecretArg::Fixed(d) => d.to_string(),
        },
        args.trials
    );

    let mut records: Vec<RunRecord> = Vec::new();
    let mut all_matched = true;
    for trial in 0..args.trials {
        let trial_seed = if args.trials == 1 {
            seed
        } else {
            derive_seed(seed, DOMAIN_TRIAL, trial)
        };
        let oracle = match args.d {
            SecretArg::Random => HiddenOracle::with_random_secret(args.n, trial_seed),
            SecretArg::Fixed(d) => HiddenOracle::new(args.n, d, trial_seed),
        }
        .unwrap_or_else(|e| usage_error(&e.to_string()));
        let truth = oracle.effective_secret();

        let cfg = RecoveryConfig::from_params(&params.clone().with_seed(trial_seed));
        let mut record = RunRecord {
            trial,
            variant: params.variant().name().to_string(),
            n: params.n(),
            k: params.k(),
            l: params.l(),
            seed: trial_seed,
            d_true: truth,
            d_recovered: None,
            matched: false,
            levels: None,
            oracle_queries: None,
            fresh_objects: None,
            max_peak_live: None,
            base_queries: None,
            wall_ms: None,
        };
        match recover_d(oracle, &cfg) {
            Ok(outcome) => {
                record.d_recovered = Some(outcome.secret);
                record.matched = outcome.secret == truth;
                record.levels = Some(outcome.levels.len() as u32);
                record.oracle_queries = Some(outcome.total_oracle_queries);
                record.fresh_objects = Some(outcome.total_fresh_objects());
                record.max_peak_live = Some(outcome.max_peak_live());
                record.base_queries = Some(outcome.base_queries);
                let total_wall: std::time::Duration = outcome
                    .levels
                    .iter()
                    .flat_map(|l| &l.attempts)
                    .map(|r| r.wall_time)
                    .sum();
                record.wall_ms = wall_ms(total_wall, args.common.timings);
                if args.verbose {
                    for level in &outcome.levels {
                        for (attempt, report) in level.attempts.iter().enumerate() {
                            println!(
                                "  level={} n={} attempt={attempt} fresh={} peak_live={} \
                                 attempted={:?} succeeded={:?} zero_discards={} other_discards={} bit={}",
                                level.level,
                                level.n,
                                report.fresh_objects,
                                report.peak_live_objects,
                                report.combines_attempted_per_stage,
                                report.combines_succeeded_per_stage,
                                report.final_label_zero_discards,
                                report.final_label_other_discards,
                                level.bit,
                            );
                        }
                    }
                }
            }
            Err(err) => {
                eprintln!("trial {trial}: recovery failed: {err}");
            }
        }
        all_matched &= record.matched;
        println!(
            "trial={trial} d_true={} d_recovered={} match={} levels={} queries={} fresh={} \
             max_peak_live={} base_queries={} wall_ms={}",
            record.d_true,
            opt(&record.d_recovered),
            record.matched,
            opt(&record.levels),
            opt(&record.oracle_queries),
            opt(&record.fresh_objects),
            opt(&record.max_peak_live),
            opt(&record.base_queries),
            opt(&record.wall_ms),
        );
        records.push(record);
    }

    let matched = records.iter().filter(|r| r.matched).count();
    println!("run summary: matched {matched}/{}", records.len());

    if let Some(path) = &args.common.out {
        if let Err(err) = write_records(path, &args.common.format, &records) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    if all_matched {
        0
    } else {
        1
    }
}
