use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Context;
use llmshap_core::{attribute, attribute_exact, AttributionOptions, Method};
use llmshap_llm::{compare_attributions, CompareError};

use crate::args::CompareArgs;
use crate::methods::parse_methods;
use crate::{source, usage, Outcome};

/// Similarity of one method to the exact gold standard on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub instance: usize,
    pub label: String,
    pub n_features: usize,
    pub method: String,
    /// `None` when either score vector is all zeros.
    pub similarity: Option<f64>,
}

pub fn run(args: &CompareArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let specs = parse_methods(&args.methods, args.window_size)?;
    if specs.iter().any(|s| s.method == Method::Oracle) {
        return Err(usage("the oracle cannot run on a model-backed payoff"));
    }
    let dataset = source::load_dataset(&args.dataset)?;
    let selected: Vec<(usize, &llmshap_llm::Instance)> = match args.instance {
        Some(i) => {
            let inst = dataset.instances.get(i).ok_or_else(|| {
                usage(format!("--instance {i} out of range ({} usable rows)", dataset.instances.len()))
            })?;
            vec![(i, inst)]
        }
        None => dataset
            .instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| (args.n_min..=args.n_max).contains(&inst.features.len()))
            .collect(),
    };
    if selected.is_empty() {
        anyhow::bail!(
            "no rows of {} have between {} and {} symptoms",
            args.dataset.display(),
            args.n_min,
            args.n_max
        );
    }

    let cfg = source::inference_config(&args.llm, args.seed)?;
    let store = source::open_store(&args.llm, &cfg)?;
    let opts = AttributionOptions::default()
        .with_workers(args.exec.workers)
        .with_samples(args.exec.samples);

    let mut rows = Vec::new();
    for (idx, inst) in selected {
        let features = &inst.features;
        let gold_source = source::payoff(features, &cfg, &store, args.llm.grand_payoff)?;
        let gold = attribute_exact(&gold_source, features, &opts)
            .with_context(|| format!("exact attribution of row {idx}"))?;
        for spec in &specs {
            let window = spec.window_spec(args.outside_features.into(), !args.uncached_window);
            if window.is_some_and(|w| w.size > features.len()) {
                log::warn!("row {idx}: {spec} wider than {} features, skipped", features.len());
                continue;
            }
            let payoff = source::payoff(features, &cfg, &store, args.llm.grand_payoff)?;
            let result = attribute(spec.method, &payoff, features, window, &opts)
                .with_context(|| format!("{spec} attribution of row {idx}"))?;
            let similarity = match compare_attributions(&result, &gold) {
                Ok(s) => Some(s),
                Err(CompareError::Similarity(e)) => {
                    log::warn!("row {idx}: {spec} similarity undefined ({e})");
                    None
                }
                Err(e) => return Err(e.into()),
            };
            rows.push(Row {
                instance: idx,
                label: inst.label.clone(),
                n_features: features.len(),
                method: spec.to_string(),
                similarity,
            });
        }
    }

    let bytes = render_csv(&rows, &specs.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
    match &args.out {
        Some(path) => std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(&bytes)?,
    }
    Ok(Outcome::Success)
}

/// Per-instance rows followed by the mean per (feature count, method).
pub fn render_csv(rows: &[Row], method_order: &[String]) -> anyhow::Result<Vec<u8>> {
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["scope", "instance", "label", "n_features", "method", "count", "similarity"])?;
    let fmt = |s: Option<f64>| s.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        csv.write_record([
            "instance".to_string(),
            r.instance.to_string(),
            r.label.clone(),
            r.n_features.to_string(),
            r.method.clone(),
            "1".into(),
            fmt(r.similarity),
        ])?;
    }
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let m = method_order.iter().position(|m| *m == r.method).unwrap_or(usize::MAX);
        let entry = groups.entry((r.n_features, m)).or_default();
        if let Some(s) = r.similarity {
            entry.push(s);
        }
    }
    for ((n, m), values) in groups {
        let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        csv.write_record([
            "feature_count".to_string(),
            String::new(),
            String::new(),
            n.to_string(),
            method_order.get(m).cloned().unwrap_or_default(),
            values.len().to_string(),
            fmt(mean),
        ])?;
    }
    Ok(csv.into_inner()?)
}
