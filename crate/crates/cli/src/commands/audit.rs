use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use llmshap_core::audit::{compliance_matrix, AntecedentMatch, MatrixConfig};
use llmshap_core::game::fixtures;
use llmshap_core::{GameFixture, WindowSpec};
use serde_json::json;

use crate::args::AuditArgs;
use crate::report;
use crate::{usage, Outcome};

pub fn run(args: &AuditArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let started = Instant::now();
    if args.window_size == 0 {
        return Err(usage("--window-size must be positive"));
    }
    let games = if args.game.is_empty() {
        fixtures::all()
    } else {
        load_games(&args.game)?
    };
    if games.is_empty() {
        return Err(usage("no games to audit"));
    }
    let antecedent = match args.antecedent_eps {
        Some(eps) if eps.is_nan() || eps < 0.0 => return Err(usage("--antecedent-eps must be non-negative")),
        Some(eps) => AntecedentMatch::Within(eps),
        None => AntecedentMatch::Exact,
    };
    let config = MatrixConfig {
        tolerance: args.tolerance,
        window: WindowSpec::new(args.window_size).with_outside(args.outside_features.into()),
        antecedent,
        noisy_trials: args.trials,
        noise_std: args.noise_std,
        seed: args.seed,
        ..MatrixConfig::default()
    };
    let matrix = compliance_matrix(&games, &config)?;
    let matches = matrix.matches_expected();

    writeln!(out, "{}", matrix.render())?;
    writeln!(out, "efficiency residuals |sum - (h(X) - h(empty))|:")?;
    for g in &matrix.games {
        for r in &g.reports {
            let e = &r.efficiency;
            writeln!(
                out,
                "  {:<32} {:<15} sum {:>10.6}  gain {:>10.6}  residual {:>10.6}  {}",
                g.game,
                r.method.as_str(),
                e.total,
                e.gain,
                e.residual,
                if e.pass { "ok" } else { "VIOLATED" }
            )?;
        }
        for s in &g.skipped {
            writeln!(out, "  {:<32} skipped {s}", g.game)?;
        }
    }
    if !matrix.stochastic.is_empty() {
        writeln!(out, "noisy copies (std {}, {} trials each):", args.noise_std, args.trials)?;
        for t in &matrix.stochastic {
            writeln!(
                out,
                "  {:<32} {:<15} {:>3}/{} trials with residual > tolerance (max {:.3e})",
                t.game,
                t.method.as_str(),
                t.violations,
                t.trials,
                t.max_residual
            )?;
        }
    }
    if matches {
        writeln!(out, "matrix matches the expected pattern")?;
    } else {
        for c in matrix.mismatches() {
            writeln!(
                out,
                "MISMATCH {} / {}: observed {}",
                c.method.as_str(),
                c.axiom.title(),
                c.mark.symbol()
            )?;
        }
    }

    if let Some(path) = &args.out {
        let report = json!({
            "header": report::header(started),
            "config": {
                "command": "audit",
                "games": games.iter().map(|g| g.name.as_str()).collect::<Vec<_>>(),
                "window_size": args.window_size,
                "outside_features": config.window.outside,
                "tolerance": args.tolerance,
                "antecedent_eps": args.antecedent_eps,
                "trials": args.trials,
                "noise_std": args.noise_std,
                "seed": args.seed,
                "out": path,
            },
            "matches_expected": matches,
            "matrix": matrix,
        });
        report::write_json(path, &report)?;
    }
    Ok(if matches || args.allow_mismatch {
        Outcome::Success
    } else {
        Outcome::Mismatch
    })
}

fn load_games(paths: &[PathBuf]) -> anyhow::Result<Vec<GameFixture>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(usage(format!("no such game file {}", p.display())));
        }
    }
    files
        .iter()
        .map(|f| GameFixture::load(f).with_context(|| format!("loading game {}", f.display())))
        .collect()
}
