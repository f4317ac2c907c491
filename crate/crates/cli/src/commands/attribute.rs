use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use llmshap_core::game::fixtures;
use llmshap_core::{
    attribute, AttributionError, AttributionOptions, FeatureSet, GameFixture, Method, NoisyGame, OutsideFeatures,
    PayoffSource, WindowSpec,
};
use serde_json::json;

use crate::args::AttributeArgs;
use crate::report::{self, RunConfig, SourceSpec};
use crate::{source, usage, Outcome};

pub fn run(args: &AttributeArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let started = Instant::now();
    let method: Method = args.method.into();
    let outside: OutsideFeatures = args.window.outside_features.into();
    let window = match (method, args.window.window_size) {
        (Method::SlidingWindow, None) => return Err(usage("sliding_window needs --window-size")),
        (Method::SlidingWindow, Some(0)) => return Err(usage("--window-size must be positive")),
        (Method::SlidingWindow, Some(w)) => Some(WindowSpec::new(w).with_outside(outside).with_cache(!args.uncached_window)),
        (_, Some(_)) => return Err(usage("--window-size only applies to sliding_window")),
        (_, None) => None,
    };
    let opts = AttributionOptions::default()
        .with_workers(args.exec.workers)
        .with_samples(args.exec.samples);

    let (features, payoff, spec): (FeatureSet, Box<dyn PayoffSource>, SourceSpec) = if let Some(path) = &args.dataset {
        if args.noise_std.is_some() {
            return Err(usage("--noise-std applies to table games only"));
        }
        let dataset = source::load_dataset(path)?;
        let inst = dataset.instances.get(args.instance).ok_or_else(|| {
            usage(format!(
                "--instance {} out of range ({} usable rows)",
                args.instance,
                dataset.instances.len()
            ))
        })?;
        let cfg = source::inference_config(&args.llm, args.seed)?;
        let store = source::open_store(&args.llm, &cfg)?;
        let payoff = source::payoff(&inst.features, &cfg, &store, args.llm.grand_payoff)?;
        let spec = SourceSpec::Llm {
            dataset: path.clone(),
            instance: args.instance,
            label: inst.label.clone(),
            transcript: args.llm.transcript.clone(),
            mode: args.llm.mode,
            backend: args.llm.backend,
            inference: cfg,
            grand_payoff: args.llm.grand_payoff,
        };
        (inst.features.clone(), Box::new(payoff), spec)
    } else {
        let fx = load_game(args)?;
        let name = fx.name.clone();
        match args.noise_std {
            Some(std) => {
                let seed = args.seed.unwrap_or(0);
                let noisy = NoisyGame::new(fx.game, std, seed).map_err(|e| usage(e.to_string()))?;
                (fx.features, Box::new(noisy), SourceSpec::Noisy { game: name, noise_std: std, seed })
            }
            None => (fx.features, Box::new(fx.game), SourceSpec::Table { game: name }),
        }
    };

    let result = attribute(method, &payoff, &features, window, &opts).map_err(|e| match e {
        AttributionError::InvalidWindow { .. } | AttributionError::InvalidArgument(_) => usage(e.to_string()),
        AttributionError::NonDeterministicSource => usage(format!("{e}; the oracle needs a deterministic game")),
        other => anyhow::Error::new(other).context(format!("{method} attribution failed")),
    })?;

    let config = RunConfig {
        command: "attribute",
        method: Some(method),
        window_size: window.map(|w| w.size),
        outside_features: window.map(|w| w.outside),
        window_cache: window.map(|w| w.use_cache),
        samples: opts.samples,
        workers: opts.workers,
        seed: args.seed,
        tolerance: args.tolerance,
        source: spec,
        out: args.out.clone(),
    };
    let report = json!({
        "header": report::header(started),
        "config": config,
        "result": report::result_json(&result),
    });
    if let Some(path) = &args.out {
        report::write_json(path, &report)?;
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(
            out,
            "{}  n = {}  inference calls = {}  cache hits = {}",
            method,
            features.len(),
            result.call_stats.inference_calls,
            result.call_stats.cache_hits
        )?;
        write!(out, "{}", report::ranked_table(&result))?;
        writeln!(out, "{}", report::efficiency_line(&result, args.tolerance))?;
    }
    Ok(Outcome::Success)
}

fn load_game(args: &AttributeArgs) -> anyhow::Result<GameFixture> {
    match (&args.game, &args.fixture) {
        (Some(path), _) => GameFixture::load(path).with_context(|| format!("loading game {}", path.display())),
        (None, Some(name)) => fixtures::all()
            .into_iter()
            .find(|f| &f.name == name)
            .ok_or_else(|| {
                let known: Vec<String> = fixtures::all().into_iter().map(|f| f.name).collect();
                usage(format!("unknown fixture {name:?}; built-in games: {}", known.join(", ")))
            }),
        (None, None) => Err(usage("no payoff source: pass --game, --fixture or --dataset")),
    }
}
