//! Executable checks of the efficiency, symmetry and null-player axioms,
//! and the method-by-axiom compliance matrix built from them.
//!
//! Every judgment here is exhaustive: antecedents are verified over all
//! coalitions, never sampled, so the audit only accepts games with at most
//! [`AUDIT_LIMIT`] features.

use std::fmt::Write as _;

use serde::Serialize;

use crate::attribution::{
    attribute, attribute_exact, attribute_through_cache, AttributionOptions, AttributionResult,
    Method, WindowSpec,
};
use crate::cache::CachingWrapper;
use crate::error::AuditError;
use crate::feature::{Coalition, FeatureId, FeatureSet};
use crate::game::{GameFixture, NoisyGame, PayoffSource};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const AUDIT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyCheck {
    pub total: f64,
    pub gain: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub pair: (FeatureId, FeatureId),
    pub labels: (String, String),
    pub antecedent_holds: bool,
    pub score_gap: f64,
    /// `None` when the antecedent fails and the pair is not judged.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullPlayerCheck {
    pub id: FeatureId,
    pub label: String,
    pub is_null: bool,
    pub score: f64,
    /// `None` for features that are not null players.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub method: Method,
    pub efficiency: EfficiencyCheck,
    pub symmetry: Vec<SymmetryCheck>,
    pub null_player: Vec<NullPlayerCheck>,
    pub tolerance: f64,
}

impl AuditReport {
    pub fn judged_symmetry(&self) -> impl Iterator<Item = &SymmetryCheck> {
        self.symmetry.iter().filter(|s| s.pass.is_some())
    }

    pub fn judged_null(&self) -> impl Iterator<Item = &NullPlayerCheck> {
        self.null_player.iter().filter(|s| s.pass.is_some())
    }
}

/// How payoffs are compared when verifying an axiom's antecedent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AntecedentMatch {
    /// Bitwise float equality, right for tables of stored constants.
    Exact,
    Within(f64),
}

impl AntecedentMatch {
    fn same(self, a: f64, b: f64) -> bool {
        match self {
            AntecedentMatch::Exact => a == b,
            AntecedentMatch::Within(eps) => (a - b).abs() <= eps,
        }
    }
}

/// `|Σ scores − (h(X) − h(∅))| ≤ tolerance`, with `h` evaluated afresh.
///
/// Only meaningful against a deterministic source, or the frozen cache of a
/// cached run; raw stochastic sources are rejected.
pub fn check_efficiency<S: PayoffSource + ?Sized>(
    result: &AttributionResult,
    source: &S,
    features: &FeatureSet,
    tolerance: f64,
) -> Result<EfficiencyCheck, AuditError> {
    if !source.is_deterministic() {
        return Err(AuditError::StochasticSource);
    }
    let gain = source.evaluate(&features.grand())? - source.evaluate(&Coalition::empty())?;
    Ok(efficiency_from(result.total(), gain, tolerance))
}

fn efficiency_from(total: f64, gain: f64, tolerance: f64) -> EfficiencyCheck {
    let residual = (total - gain).abs();
    EfficiencyCheck {
        total,
        gain,
        residual,
        pass: residual <= tolerance,
    }
}

/// Payoffs of all `2^n` coalitions of a deterministic source, by mask.
struct PayoffTable {
    values: Vec<f64>,
    n: usize,
}

impl PayoffTable {
    fn build<S: PayoffSource + ?Sized>(source: &S, features: &FeatureSet) -> Result<Self, AuditError> {
        let n = features.len();
        if n > AUDIT_LIMIT {
            return Err(AuditError::FeatureLimitExceeded { n, limit: AUDIT_LIMIT });
        }
        if !source.is_deterministic() {
            return Err(AuditError::StochasticSource);
        }
        let values = (0..1u64 << n)
            .map(|m| source.evaluate(&features.coalition_from_mask(m)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { values, n })
    }

    fn symmetric(&self, i: usize, j: usize, cmp: AntecedentMatch) -> bool {
        let (bi, bj) = (1u64 << i, 1u64 << j);
        (0..1u64 << self.n)
            .filter(|s| s & (bi | bj) == 0)
            .all(|s| cmp.same(self.values[(s | bi) as usize], self.values[(s | bj) as usize]))
    }

    fn null(&self, i: usize, cmp: AntecedentMatch) -> bool {
        let bi = 1u64 << i;
        (0..1u64 << self.n)
            .filter(|s| s & bi == 0)
            .all(|s| cmp.same(self.values[(s | bi) as usize], self.values[s as usize]))
    }
}

fn aligned(result: &AttributionResult, features: &FeatureSet) -> Result<Vec<f64>, AuditError> {
    if result.scores.len() != features.len() {
        return Err(AuditError::ResultMismatch);
    }
    features
        .iter()
        .zip(&result.scores)
        .map(|(f, s)| if f.id == s.id { Ok(s.score) } else { Err(AuditError::ResultMismatch) })
        .collect()
}

fn symmetry_from(
    table: &PayoffTable,
    features: &FeatureSet,
    scores: &[f64],
    tolerance: f64,
    cmp: AntecedentMatch,
) -> Vec<SymmetryCheck> {
    let f = features.features();
    let mut out = Vec::new();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            let holds = table.symmetric(i, j, cmp);
            let gap = (scores[i] - scores[j]).abs();
            out.push(SymmetryCheck {
                pair: (f[i].id, f[j].id),
                labels: (f[i].label.clone(), f[j].label.clone()),
                antecedent_holds: holds,
                score_gap: gap,
                pass: holds.then_some(gap <= tolerance),
            });
        }
    }
    out
}

fn null_from(
    table: &PayoffTable,
    features: &FeatureSet,
    scores: &[f64],
    tolerance: f64,
    cmp: AntecedentMatch,
) -> Vec<NullPlayerCheck> {
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let is_null = table.null(i, cmp);
            NullPlayerCheck {
                id: f.id,
                label: f.label.clone(),
                is_null,
                score: scores[i],
                pass: is_null.then_some(scores[i].abs() <= tolerance),
            }
        })
        .collect()
}

/// Symmetry checks for every feature pair. The antecedent
/// `h(S∪{i}) = h(S∪{j}) ∀ S ⊆ X\{i,j}` is compared bitwise.
pub fn check_symmetry<S: PayoffSource + ?Sized>(
    features: &FeatureSet,
    source: &S,
    result: &AttributionResult,
    tolerance: f64,
) -> Result<Vec<SymmetryCheck>, AuditError> {
    check_symmetry_with(features, source, result, tolerance, AntecedentMatch::Exact)
}

pub fn check_symmetry_with<S: PayoffSource + ?Sized>(
    features: &FeatureSet,
    source: &S,
    result: &AttributionResult,
    tolerance: f64,
    antecedent: AntecedentMatch,
) -> Result<Vec<SymmetryCheck>, AuditError> {
    let scores = aligned(result, features)?;
    let table = PayoffTable::build(source, features)?;
    Ok(symmetry_from(&table, features, &scores, tolerance, antecedent))
}

/// Null-player checks for every feature; the antecedent
/// `h(S∪{x}) = h(S) ∀ S ⊆ X\{x}` is compared bitwise.
pub fn check_null_player<S: PayoffSource + ?Sized>(
    features: &FeatureSet,
    source: &S,
    result: &AttributionResult,
    tolerance: f64,
) -> Result<Vec<NullPlayerCheck>, AuditError> {
    check_null_player_with(features, source, result, tolerance, AntecedentMatch::Exact)
}

pub fn check_null_player_with<S: PayoffSource + ?Sized>(
    features: &FeatureSet,
    source: &S,
    result: &AttributionResult,
    tolerance: f64,
    antecedent: AntecedentMatch,
) -> Result<Vec<NullPlayerCheck>, AuditError> {
    let scores = aligned(result, features)?;
    let table = PayoffTable::build(source, features)?;
    Ok(null_from(&table, features, &scores, tolerance, antecedent))
}

/// All three checks of `result` against a deterministic source.
pub fn audit<S: PayoffSource + ?Sized>(
    features: &FeatureSet,
    source: &S,
    result: &AttributionResult,
    tolerance: f64,
    antecedent: AntecedentMatch,
) -> Result<AuditReport, AuditError> {
    let scores = aligned(result, features)?;
    let table = PayoffTable::build(source, features)?;
    let gain = table.values[table.values.len() - 1] - table.values[0];
    Ok(AuditReport {
        method: result.method,
        efficiency: efficiency_from(result.total(), gain, tolerance),
        symmetry: symmetry_from(&table, features, &scores, tolerance, antecedent),
        null_player: null_from(&table, features, &scores, tolerance, antecedent),
        tolerance,
    })
}

/// Efficiency residuals of repeated runs on seeded noisy copies of a game.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticTrials {
    pub method: Method,
    pub game: String,
    pub noise_std: f64,
    pub trials: usize,
    pub violations: usize,
    pub min_residual: f64,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl StochasticTrials {
    pub fn violation_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.violations as f64 / self.trials as f64
        }
    }
}

/// Runs `trials` attributions of `NoisyGame(base, noise_std, seed + k)`.
///
/// For [`Method::Exact`] the residual is taken against the last draws of
/// `h(X)` and `h(∅)` seen during the run; for [`Method::Cached`] against the
/// frozen cache values. Other methods are rejected.
pub fn stochastic_efficiency_trials<S: PayoffSource>(
    base: &S,
    features: &FeatureSet,
    method: Method,
    noise_std: f64,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<StochasticTrials, AuditError> {
    let opts = AttributionOptions::default();
    let mut violations = 0;
    let mut min_residual = f64::INFINITY;
    let mut max_residual = 0.0f64;
    for k in 0..trials as u64 {
        let noisy = NoisyGame::new(base, noise_std, seed.wrapping_add(k))?;
        let (total, gain) = match method {
            Method::Exact => {
                let r = attribute_exact(&noisy, features, &opts)?;
                (r.total(), r.grand.unwrap_or(0.0) - r.baseline.unwrap_or(0.0))
            }
            Method::Cached => {
                let cache = CachingWrapper::new(&noisy);
                let r = attribute_through_cache(&cache, features, &opts)?;
                let gain = cache.cached(&features.grand()).unwrap_or(0.0)
                    - cache.cached(&Coalition::empty()).unwrap_or(0.0);
                (r.total(), gain)
            }
            other => {
                return Err(AuditError::Attribution(
                    crate::error::AttributionError::InvalidArgument(format!(
                        "stochastic efficiency trials are defined for exact and cached, not {other}"
                    )),
                ))
            }
        };
        let residual = (total - gain).abs();
        if residual > tolerance {
            violations += 1;
        }
        min_residual = min_residual.min(residual);
        max_residual = max_residual.max(residual);
    }
    Ok(StochasticTrials {
        method,
        game: base.description(),
        noise_std,
        trials,
        violations,
        min_residual: if trials == 0 { 0.0 } else { min_residual },
        max_residual,
        tolerance,
    })
}

/// Outcome of one (method, axiom) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Satisfied,
    Violated,
    /// Holds on every deterministic game, fails under independent redraws.
    NotGuaranteed,
    /// No fixture exercised the axiom's antecedent.
    NotJudged,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Satisfied => "✓",
            Mark::Violated => "✗",
            Mark::NotGuaranteed => "✗ (stochastic)",
            Mark::NotJudged => "–",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Efficiency,
    Symmetry,
    NullPlayer,
}

impl Axiom {
    pub const ALL: [Axiom; 3] = [Axiom::Efficiency, Axiom::Symmetry, Axiom::NullPlayer];

    pub fn title(self) -> &'static str {
        match self {
            Axiom::Efficiency => "Efficiency",
            Axiom::Symmetry => "Symmetry",
            Axiom::NullPlayer => "Null player (dummy)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub method: Method,
    pub axiom: Axiom,
    pub mark: Mark,
    pub judged: usize,
    pub failures: usize,
    /// Games in which a judged check failed.
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameAudit {
    pub game: String,
    pub reports: Vec<AuditReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixConfig {
    pub tolerance: f64,
    pub window: WindowSpec,
    pub antecedent: AntecedentMatch,
    /// Seeded noisy trials per game for the exact and cached methods.
    pub noisy_trials: usize,
    pub noise_std: f64,
    pub seed: u64,
    /// Fraction of exact-method trials that must violate efficiency for
    /// the stochastic failure to count as demonstrated.
    pub min_violation_rate: f64,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            window: WindowSpec::new(2),
            antecedent: AntecedentMatch::Exact,
            noisy_trials: 100,
            noise_std: 0.1,
            seed: 0,
            min_violation_rate: 0.95,
        }
    }
}

/// The four audited methods, in table order.
pub const MATRIX_METHODS: [Method; 4] = [
    Method::Exact,
    Method::Cached,
    Method::SlidingWindow,
    Method::Counterfactual,
];

/// Pattern the matrix must reproduce.
pub fn expected_mark(method: Method, axiom: Axiom) -> Mark {
    use Axiom::*;
    use Mark::*;
    match (method, axiom) {
        (Method::Exact, Efficiency) => NotGuaranteed,
        (Method::SlidingWindow, Efficiency | Symmetry) => Violated,
        (Method::Counterfactual, Efficiency) => Violated,
        _ => Satisfied,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplianceMatrix {
    pub cells: Vec<Cell>,
    pub games: Vec<GameAudit>,
    pub stochastic: Vec<StochasticTrials>,
    pub tolerance: f64,
    pub window_size: usize,
    pub outside_features: crate::attribution::OutsideFeatures,
}

impl ComplianceMatrix {
    pub fn cell(&self, method: Method, axiom: Axiom) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.axiom == axiom)
    }

    pub fn mark(&self, method: Method, axiom: Axiom) -> Option<Mark> {
        self.cell(method, axiom).map(|c| c.mark)
    }

    /// Cells whose mark differs from [`expected_mark`].
    pub fn mismatches(&self) -> Vec<&Cell> {
        self.cells
            .iter()
            .filter(|c| c.mark != expected_mark(c.method, c.axiom))
            .collect()
    }

    pub fn matches_expected(&self) -> bool {
        self.mismatches().is_empty()
    }

    /// Aligned text rendering, one row per method.
    pub fn render(&self) -> String {
        let header = ["Method", "Efficiency", "Symmetry", "Null player (dummy)"];
        let mut rows: Vec<[String; 4]> = vec![header.map(String::from)];
        for m in MATRIX_METHODS {
            let mut row = [m.as_str().to_string(), String::new(), String::new(), String::new()];
            for (k, a) in Axiom::ALL.iter().enumerate() {
                row[k + 1] = self.mark(m, *a).map(Mark::symbol).unwrap_or("?").to_string();
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..4)
            .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                let _ = writeln!(out, "{}", rule.join("  "));
            }
        }
        out
    }
}

#[derive(Default)]
struct Tally {
    judged: usize,
    failures: usize,
    witnesses: Vec<String>,
}

impl Tally {
    fn record(&mut self, game: &str, pass: bool) {
        self.judged += 1;
        if !pass {
            self.failures += 1;
            if !self.witnesses.iter().any(|w| w == game) {
                self.witnesses.push(game.to_string());
            }
        }
    }

    fn mark(&self) -> Mark {
        if self.failures > 0 {
            Mark::Violated
        } else if self.judged == 0 {
            Mark::NotJudged
        } else {
            Mark::Satisfied
        }
    }
}

/// Audits every matrix method on every game and folds the results into a
/// method × axiom matrix. A cell is violated as soon as one judged check
/// fails in one game, and the failing games are kept as witnesses.
pub fn compliance_matrix(
    games: &[GameFixture],
    config: &MatrixConfig,
) -> Result<ComplianceMatrix, AuditError> {
    if games.is_empty() {
        return Err(AuditError::NoGames);
    }
    let opts = AttributionOptions::default();
    let mut tallies: Vec<[Tally; 3]> = MATRIX_METHODS.iter().map(|_| Default::default()).collect();
    let mut audits = Vec::new();
    for fx in games {
        let mut reports = Vec::new();
        let mut skipped = Vec::new();
        for (mi, &method) in MATRIX_METHODS.iter().enumerate() {
            if method == Method::SlidingWindow && config.window.size > fx.features.len() {
                skipped.push(format!(
                    "sliding_window: window {} exceeds {} features",
                    config.window.size,
                    fx.features.len()
                ));
                continue;
            }
            let result = attribute(method, &fx.game, &fx.features, Some(config.window), &opts)?;
            let report = audit(&fx.features, &fx.game, &result, config.tolerance, config.antecedent)?;
            let [eff, sym, null] = &mut tallies[mi];
            eff.record(&fx.name, report.efficiency.pass);
            for s in report.judged_symmetry() {
                sym.record(&fx.name, s.pass == Some(true));
            }
            for s in report.judged_null() {
                null.record(&fx.name, s.pass == Some(true));
            }
            reports.push(report);
        }
        audits.push(GameAudit {
            game: fx.name.clone(),
            reports,
            skipped,
        });
    }

    let mut stochastic = Vec::new();
    if config.noisy_trials > 0 {
        for fx in games.iter().filter(|g| g.features.len() >= 2) {
            for method in [Method::Exact, Method::Cached] {
                let mut t = stochastic_efficiency_trials(
                    &fx.game,
                    &fx.features,
                    method,
                    config.noise_std,
                    config.noisy_trials,
                    config.seed,
                    config.tolerance,
                )?;
                t.game = fx.name.clone();
                stochastic.push(t);
            }
        }
    }

    let mut cells = Vec::new();
    for (mi, &method) in MATRIX_METHODS.iter().enumerate() {
        for (ai, &axiom) in Axiom::ALL.iter().enumerate() {
            let tally = &mut tallies[mi][ai];
            let mut mark = tally.mark();
            if axiom == Axiom::Efficiency {
                let runs: Vec<&StochasticTrials> =
                    stochastic.iter().filter(|t| t.method == method).collect();
                match method {
                    Method::Exact if !runs.is_empty() && mark == Mark::Satisfied => {
                        // every noisy copy has to show the failure
                        if runs.iter().all(|t| t.violation_rate() >= config.min_violation_rate) {
                            mark = Mark::NotGuaranteed;
                            for t in &runs {
                                tally.witnesses.push(format!("noisy {}", t.game));
                            }
                        }
                    }
                    Method::Cached => {
                        for t in runs.iter().filter(|t| t.violations > 0) {
                            mark = Mark::Violated;
                            tally.witnesses.push(format!("noisy {}", t.game));
                        }
                    }
                    _ => {}
                }
            }
            cells.push(Cell {
                method,
                axiom,
                mark,
                judged: tally.judged,
                failures: tally.failures,
                witnesses: std::mem::take(&mut tally.witnesses),
            });
        }
    }

    Ok(ComplianceMatrix {
        cells,
        games: audits,
        stochastic,
        tolerance: config.tolerance,
        window_size: config.window.size,
        outside_features: config.window.outside,
    })
}
