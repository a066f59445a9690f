//! The `bench` subcommand: pipeline cost and space scaling over an n-grid.
//!
//! Each grid point runs `trials` independent seeded pipeline attempts per
//! variant and reports portable cost measures (queries, fresh objects, peak
//! live objects). Points with no runnable parameters come out as SKIPPED
//! rows: trials = 0 and null metrics, same column set.

use dsieve_core::label::MAX_MODULUS_EXPONENT;
use dsieve_core::recovery::{default_stage_count, level_plan};
use dsieve_core::rng::{derive_seed, DOMAIN_GRID_POINT, DOMAIN_TRIAL};
use dsieve_core::sieve::run_pipeline;
use dsieve_core::{HiddenOracle, Variant};

use crate::output::{opt, write_records, BenchRecord};
use crate::{usage_error, BenchArgs};

pub fn cmd_bench(args: BenchArgs) -> i32 {
    let seed = crate::resolve_seed(args.common.seed).unwrap_or_else(|e| usage_error(&e));
    if args.trials < 1 {
        usage_error("--trials must be at least 1");
    }
    if args.n_grid.is_empty() {
        usage_error("--n-grid needs at least one entry");
    }
    let mut grid = args.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();

    let variants: Vec<Variant> = match args.variant {
        Some(v) => vec![v],
        None => vec![Variant::Kuperberg, Variant::Regev],
    };

    println!(
        "bench n_grid={:?} variants={:?} trials={} seed={seed}",
        grid,
        variants.iter().map(|v| v.name()).collect::<Vec<_>>(),
        args.trials
    );

    let mut records = Vec::new();
    let mut regev_bound_ok = true;
    let mut kuperberg_peaks: Vec<(u32, f64)> = Vec::new();
    for (point, &n) in grid.iter().enumerate() {
        for &variant in &variants {
            let record = bench_point(
                n,
                variant,
                &args,
                derive_seed(seed, DOMAIN_GRID_POINT, (point * 2 + variant as usize) as u64),
                &mut regev_bound_ok,
                &mut kuperberg_peaks,
            );
            println!(
                "point n={} variant={} k={} l={} trials={} success_rate={} mean_queries={} \
                 mean_fresh={} mean_peak_live={} wall_ms={}",
                record.n,
                record.variant,
                opt(&record.k),
                opt(&record.l),
                record.trials,
                opt(&record.success_rate),
                opt(&record.mean_queries),
                opt(&record.mean_fresh_objects),
                opt(&record.mean_peak_live),
                opt(&record.mean_wall_ms),
            );
            records.push(record);
        }
    }

    // The space story, stated explicitly: the block pipeline must stay under
    // its polynomial bound everywhere; the pile pipeline's peak may grow.
    eprintln!("regev space bound stages*(width+4)+1 respected at every point: {regev_bound_ok}");
    if kuperberg_peaks.len() >= 2 {
        let growing = kuperberg_peaks.windows(2).all(|w| w[0].1 <= w[1].1);
        eprintln!(
            "kuperberg mean peak live objects across n {:?}: monotone growth = {growing}",
            kuperberg_peaks
        );
    }

    if let Some(path) = &args.common.out {
        if let Err(err) = write_records(path, &args.common.format, &records) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    if regev_bound_ok {
        0
    } else {
        1
    }
}

fn bench_point(
    n: u32,
    variant: Variant,
    args: &BenchArgs,
    point_seed: u64,
    regev_bound_ok: &mut bool,
    kuperberg_peaks: &mut Vec<(u32, f64)>,
) -> BenchRecord {
    let skipped = BenchRecord {
        n,
        variant: variant.name().to_string(),
        k: None,
        l: None,
        trials: 0,
        success_rate: None,
        mean_queries: None,
        mean_fresh_objects: None,
        mean_peak_live: None,
        mean_wall_ms: None,
    };
    if !(2..=MAX_MODULUS_EXPONENT).contains(&n) {
        return skipped;
    }
    let stages = args.k.unwrap_or_else(|| default_stage_count(variant, n));
    let mut plan = match level_plan(variant, n, stages, 32, args.budget, point_seed) {
        Ok(plan) => plan,
        Err(_) => return skipped,
    };
    // An explicit --l replaces the derived block width when it fits.
    if let (Some(l), Variant::Regev) = (args.l, variant) {
        if l == 0 || u64::from(plan.stages) * u64::from(l) > u64::from(n - 1) {
            return skipped;
        }
        plan.width = l;
        if args.budget.is_none() {
            plan.budget = dsieve_core::sieve::default_budget(
                variant,
                plan.stages,
                l,
                n - 1 - plan.stages * l,
            );
        }
    }

    let mut successes = 0u64;
    let mut queries = 0u64;
    let mut fresh = 0u64;
    let mut peak = 0u64;
    let mut wall = std::time::Duration::ZERO;
    for trial in 0..args.trials {
        let trial_seed = derive_seed(point_seed, DOMAIN_TRIAL, trial);
        let mut oracle =
            HiddenOracle::with_random_secret(n, trial_seed).expect("validated n");
        let trial_plan = plan.clone().with_seed(trial_seed);
        let (object, report) =
            run_pipeline(&mut oracle, &trial_plan).expect("validated plan");
        if object.is_some() {
            successes += 1;
        }
        queries += report.oracle_queries;
        fresh += report.fresh_objects;
        peak += report.peak_live_objects;
        wall += report.wall_time;
        if let Some(bound) = trial_plan.space_bound() {
            if report.peak_live_objects > bound {
                *regev_bound_ok = false;
            }
        }
    }
    let t = args.trials as f64;
    if variant == Variant::Kuperberg {
        kuperberg_peaks.push((n, peak as f64 / t));
    }
    BenchRecord {
        n,
        variant: variant.name().to_string(),
        k: Some(plan.stages),
        l: match variant {
            Variant::Kuperberg => None,
            Variant::Regev => Some(plan.width),
        },
        trials: args.trials,
        success_rate: Some(successes as f64 / t),
        mean_queries: Some(queries as f64 / t),
        mean_fresh_objects: Some(fresh as f64 / t),
        mean_peak_live: Some(peak as f64 / t),
        mean_wall_ms: crate::output::wall_ms(wall, args.common.timings).map(|w| w / t),
    }
}
