use std::collections::BTreeMap;
use std::io::Write;

use crate::args::IngestArgs;
use crate::{source, Outcome};

pub fn run(args: &IngestArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let dataset = source::load_dataset(&args.dataset)?;
    writeln!(
        out,
        "{}: {} usable rows, {} skipped",
        args.dataset.display(),
        dataset.instances.len(),
        dataset.skipped.len()
    )?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, inst) in dataset.instances.iter().enumerate() {
        *counts.entry(inst.features.len()).or_default() += 1;
        let symptoms: Vec<&str> = inst.features.iter().map(|f| f.label.as_str()).collect();
        writeln!(
            out,
            "  [{i}] line {}: {} (n = {}): {}",
            inst.line,
            inst.label,
            symptoms.len(),
            symptoms.join(", ")
        )?;
    }
    for s in &dataset.skipped {
        writeln!(out, "  skipped line {}: {}", s.line, s.reason)?;
    }
    writeln!(out, "rows per feature count:")?;
    for (n, c) in counts {
        writeln!(out, "  n = {n}: {c}")?;
    }
    Ok(Outcome::Success)
}
