use std::io::Write;

use anyhow::bail;
use llmshap_core::{
    attribute, expected_calls, AttributionOptions, FeatureSet, Method, NoisyGame, PayoffSource, TableGame,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::BenchArgs;
use crate::methods::parse_methods;
use crate::{usage, Outcome};

/// Largest `n` the oracle is benchmarked at.
const ORACLE_BENCH_LIMIT: usize = 8;

/// Random table game over `n` labelled features `f0..f{n-1}`, payoffs
/// uniform in `[0, 1)`.
pub fn random_game(n: usize, rng: &mut impl Rng) -> (FeatureSet, TableGame) {
    let features = FeatureSet::from_labels((0..n).map(|i| format!("f{i}"))).expect("labels are distinct");
    let game = TableGame::tabulate(&features, |_| rng.random::<f64>());
    (features, game)
}

pub fn run(args: &BenchArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let specs = parse_methods(&args.methods, args.window_size)?;
    if args.n_min < 1 || args.n_min > args.n_max {
        return Err(usage("need 1 <= --n-min <= --n-max"));
    }
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let opts = AttributionOptions::default()
        .with_workers(args.exec.workers)
        .with_samples(args.exec.samples);
    if args.n_max > opts.exhaustive_limit {
        return Err(usage(format!("--n-max above {} is not supported", opts.exhaustive_limit)));
    }

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "method",
        "n",
        "window_size",
        "runs",
        "inference_calls",
        "expected_calls",
        "wall_time_mean_seconds",
    ])?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for n in args.n_min..=args.n_max {
        let (features, table) = random_game(n, &mut rng);
        let source: Box<dyn PayoffSource> = match args.noise_std {
            Some(std) => Box::new(NoisyGame::new(table, std, args.seed ^ n as u64).map_err(|e| usage(e.to_string()))?),
            None => Box::new(table),
        };
        for spec in &specs {
            let window = spec.window_spec(args.outside_features.into(), args.window_cache);
            if window.is_some_and(|w| w.size > n) {
                log::info!("skipping {spec} at n = {n}");
                continue;
            }
            if spec.method == Method::Oracle && (n > ORACLE_BENCH_LIMIT || args.noise_std.is_some()) {
                log::info!("skipping oracle at n = {n}");
                continue;
            }
            let expected = expected_calls(spec.method, n, window);
            let mut calls = None;
            let mut elapsed = 0.0;
            for _ in 0..args.runs {
                let r = attribute(spec.method, &source, &features, window, &opts)?;
                elapsed += r.wall_time_seconds;
                let c = r.call_stats.inference_calls;
                match calls {
                    Some(prev) if prev != c => bail!("{spec} at n = {n}: call count changed between runs ({prev} vs {c})"),
                    _ => calls = Some(c),
                }
            }
            let calls = calls.expect("at least one run");
            if let Some(e) = expected {
                if e != calls {
                    bail!("{spec} at n = {n}: {calls} inference calls, closed form gives {e}");
                }
            }
            csv.write_record([
                spec.method.as_str().to_string(),
                n.to_string(),
                window.map(|w| w.size.to_string()).unwrap_or_default(),
                args.runs.to_string(),
                calls.to_string(),
                expected.map(|e| e.to_string()).unwrap_or_default(),
                format!("{:.9}", elapsed / args.runs as f64),
            ])?;
        }
    }
    let bytes = csv.into_inner()?;
    match &args.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => out.write_all(&bytes)?,
    }
    Ok(Outcome::Success)
}
