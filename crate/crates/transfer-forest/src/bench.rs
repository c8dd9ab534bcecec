//! Trial orchestration: build a source forest, derive target train/test
//! data, run the selected transfer algorithms, and aggregate metrics.
//!
//! Trials are independent work items executed on a bounded worker pool.
//! Every random stream derives from `(seed, trial index)`, and results are
//! merged in trial order, so reports are bit-for-bit reproducible at any
//! parallelism. Wall-clock transfer timings are kept out of the main
//! report (they go to a separate timings document) so the report stays
//! byte-identical across runs.

use std::str::FromStr;
use std::time::Instant;


use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{bias, prune, relabel, src_only, tgt_only, BiasScheme};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::{build_forest, derive_seed, rng_for, Forest, InductionConfig};
use crate::metrics::{stratified_sample, Metric};
use crate::mix::{ensemble_diagnostics, mix, EnsembleDiagnostics};
use crate::ser::ser_forest;
use crate::strut::strut_forest;
use crate::synth::{generate, ChallengeSpec};

/// The transfer algorithms and baselines the harness can run, in
/// canonical execution order (the union ensemble comes last because it
/// consumes the two transfer forests).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    SrcOnly,
    TgtOnly,
    Relabel,
    Bias,
    Prune,
    Ser,
    Strut,
    Mix,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::SrcOnly,
        Algorithm::TgtOnly,
        Algorithm::Relabel,
        Algorithm::Bias,
        Algorithm::Prune,
        Algorithm::Ser,
        Algorithm::Strut,
        Algorithm::Mix,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::SrcOnly => "src_only",
            Algorithm::TgtOnly => "tgt_only",
            Algorithm::Relabel => "relabel",
            Algorithm::Bias => "bias",
            Algorithm::Prune => "prune",
            Algorithm::Ser => "ser",
            Algorithm::Strut => "strut",
            Algorithm::Mix => "mix",
        }
    }

    /// True for the passes whose ensembles the diagnostics report covers.
    fn diagnosable(&self) -> bool {
        matches!(self, Algorithm::Ser | Algorithm::Strut | Algorithm::Mix)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm: {s}")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub metric: Metric,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads for the trial pool; 0 uses the process default.
    pub workers: usize,
    /// Induction settings for source, target-only, and expansion builds.
    /// The seed field is ignored; per-trial seeds are derived.
    pub induction: InductionConfig,
    /// Compute ensemble diagnostics for ser/strut/mix (binary tasks only).
    pub diagnostics: bool,
    pub bias_scheme: BiasScheme,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: vec![Algorithm::Ser, Algorithm::Strut, Algorithm::Mix],
            metric: Metric::Error,
            trials: 100,
            seed: 0,
            workers: 0,
            induction: InductionConfig::default(),
            diagnostics: false,
            bias_scheme: BiasScheme::Accuracy,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        Ok(())
    }
}

/// One algorithm's outcome in one trial.
#[derive(Debug, Clone)]
pub struct AlgoOutcome {
    pub algorithm: Algorithm,
    pub metric_value: f64,
    pub transfer_ms: f64,
    pub diagnostics: Option<EnsembleDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub results: Vec<AlgoOutcome>,
}

/// Mean metric with its standard error over trials.
#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub mean: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSummary>,
}

/// Trial means of the ensemble diagnostics. The bounds average only the
/// trials where they are defined (Gibbs risk below one half).
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSummary {
    pub gibbs_risk: f64,
    pub bayes_risk: f64,
    pub disagreement_dq: f64,
    pub joint_error_eq: f64,
    pub c_bound: Option<f64>,
    pub c_bound_defined_trials: usize,
    pub simple_bound: Option<f64>,
}

/// The deterministic benchmark report (no wall-clock content).
#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub version: u32,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub challenge: Option<String>,
    pub metric: String,
    pub trials: usize,
    pub seed: u64,
    pub tree_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_fraction: Option<f64>,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl TransferReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms
            .iter()
            .find(|a| a.algorithm == algorithm.name())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,mean,std_error\n");
        for a in &self.algorithms {
            out.push_str(&format!("{},{},{}\n", a.algorithm, a.mean, a.std_error));
        }
        out
    }
}

/// Mean wall-clock transfer time per algorithm, milliseconds. Measured
/// around the transfer call only: source induction and evaluation are
/// excluded. The union ensemble's time includes its constituents.
#[derive(Debug, Clone, Serialize)]
pub struct TimingsReport {
    pub algorithms: Vec<AlgorithmTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmTiming {
    pub algorithm: String,
    pub mean_transfer_ms: f64,
}

impl TimingsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("timings serialization");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: TransferReport,
    pub timings: TimingsReport,
}

impl ExperimentOutput {
    /// Human-readable results table.
    pub fn table(&self) -> String {
        let metric = &self.report.metric;
        let mut out = format!(
            "{:<10} {:>10} {:>12} {:>14}\n",
            "algorithm",
            format!("mean {metric}"),
            "std error",
            "transfer ms"
        );
        for (a, t) in self.report.algorithms.iter().zip(&self.timings.algorithms) {
            out.push_str(&format!(
                "{:<10} {:>10.4} {:>12.4} {:>14.2}\n",
                a.algorithm, a.mean, a.std_error, t.mean_transfer_ms
            ));
        }
        out
    }
}

/// Runs one synthetic trial end to end. Deterministic in
/// `(cfg.seed, trial)`; the spec's own seed and trial count are ignored in
/// favor of the experiment configuration.
pub fn synth_trial(
    spec: &ChallengeSpec,
    cfg: &ExperimentConfig,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut eff = spec.clone();
    eff.seed = derive_seed(cfg.seed, 0xC4A11E);
    let inst = generate(&eff, trial);
    run_algorithms(cfg, trial, &inst.source_train, &inst.target_train, &inst.target_test)
}

/// Runs one CSV-mode trial: stratified target train/test split, then the
/// algorithm suite against a source forest trained on the source domain.
pub fn csv_trial(
    source: &Dataset,
    target: &Dataset,
    target_fraction: f64,
    cfg: &ExperimentConfig,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut rng = rng_for(derive_seed(cfg.seed, trial), 0x57A7);
    let (train_idx, test_idx) = stratified_sample(target, target_fraction, &mut rng)?;
    if test_idx.is_empty() {
        return Err(Error::InvalidConfig(
            "target fraction leaves no test data".into(),
        ));
    }
    let target_train = target.select(&train_idx);
    let target_test = target.select(&test_idx);
    run_algorithms(cfg, trial, source, &target_train, &target_test)
}

fn run_algorithms(
    cfg: &ExperimentConfig,
    trial: u64,
    source_train: &Dataset,
    target_train: &Dataset,
    target_test: &Dataset,
) -> Result<TrialOutcome> {
    let trial_seed = derive_seed(cfg.seed, trial);
    let source_cfg = cfg.induction.clone().with_seed(derive_seed(trial_seed, 1));
    let tgt_cfg = cfg.induction.clone().with_seed(derive_seed(trial_seed, 2));
    let expand_cfg = cfg.induction.clone().with_seed(derive_seed(trial_seed, 3));
    let source_forest = build_forest(source_train, &source_cfg)?;

    // The union ensemble consumes both transfer forests; compute them once
    // whether or not they are reported individually.
    let want = |a: Algorithm| cfg.algorithms.contains(&a);
    let mut ser_result: Option<(Forest, f64)> = None;
    let mut strut_result: Option<(Forest, f64)> = None;
    let class_count = source_train.schema().class_count();

    let mut results = Vec::with_capacity(cfg.algorithms.len());
    for &algorithm in Algorithm::ALL.iter().filter(|a| want(**a)) {
        let (forest, transfer_ms) = match algorithm {
            Algorithm::SrcOnly => (src_only(&source_forest), 0.0),
            Algorithm::TgtOnly => timed(|| tgt_only(target_train, &tgt_cfg))?,
            Algorithm::Relabel => timed(|| relabel(&source_forest, target_train))?,
            Algorithm::Bias => {
                timed(|| bias(&source_forest, target_train, cfg.bias_scheme))?
            }
            Algorithm::Prune => timed(|| prune(&source_forest, target_train))?,
            Algorithm::Ser => {
                let r = cached_ser(&mut ser_result, &source_forest, target_train, &expand_cfg)?;
                r.clone()
            }
            Algorithm::Strut => {
                let r = cached_strut(&mut strut_result, &source_forest, target_train)?;
                r.clone()
            }
            Algorithm::Mix => {
                let (ser_f, ser_ms) =
                    cached_ser(&mut ser_result, &source_forest, target_train, &expand_cfg)?
                        .clone();
                let (strut_f, strut_ms) =
                    cached_strut(&mut strut_result, &source_forest, target_train)?.clone();
                let (mixed, union_ms) = timed(|| mix(&ser_f, &strut_f))?;
                (mixed, ser_ms + strut_ms + union_ms)
            }
        };
        let preds = forest.predict_dataset(target_test)?;
        let metric_value = cfg
            .metric
            .compute(&preds, target_test.labels(), class_count)?;
        let diagnostics = if cfg.diagnostics && algorithm.diagnosable() && class_count == 2 {
            Some(ensemble_diagnostics(&forest, target_test)?)
        } else {
            None
        };
        results.push(AlgoOutcome {
            algorithm,
            metric_value,
            transfer_ms,
            diagnostics,
        });
    }
    Ok(TrialOutcome { trial, results })
}

fn cached_ser<'a>(
    slot: &'a mut Option<(Forest, f64)>,
    source: &Forest,
    target: &Dataset,
    expand_cfg: &InductionConfig,
) -> Result<&'a (Forest, f64)> {
    if slot.is_none() {
        *slot = Some(timed(|| ser_forest(source, target, expand_cfg))?);
    }
    Ok(slot.as_ref().expect("just filled"))
}

fn cached_strut<'a>(
    slot: &'a mut Option<(Forest, f64)>,
    source: &Forest,
    target: &Dataset,
) -> Result<&'a (Forest, f64)> {
    if slot.is_none() {
        *slot = Some(timed(|| strut_forest(source, target))?);
    }
    Ok(slot.as_ref().expect("just filled"))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_secs_f64() * 1e3))
}

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
{
    let run = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| f(t as u64).map_err(|e| e.in_trial(t)))
            .collect::<Result<Vec<_>>>()
    };
    if cfg.workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(run)
    }
}

pub fn run_synth_experiment(
    spec: &ChallengeSpec,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let outcomes = run_trials(cfg, |t| synth_trial(spec, cfg, t))?;
    Ok(aggregate(
        cfg,
        outcomes,
        TransferReport {
            version: 1,
            mode: "synth".into(),
            challenge: Some(spec.challenge.name().into()),
            metric: cfg.metric.name().into(),
            trials: cfg.trials,
            seed: cfg.seed,
            tree_count: cfg.induction.tree_count,
            source_size: Some(spec.source_size),
            target_size: Some(spec.target_size),
            test_size: Some(spec.test_size),
            target_fraction: None,
            algorithms: Vec::new(),
        },
    ))
}

pub fn run_csv_experiment(
    source: &Dataset,
    target: &Dataset,
    target_fraction: f64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target fraction {target_fraction} outside (0, 1)"
        )));
    }
    if *source.schema() != *target.schema() {
        return Err(Error::SchemaMismatch(
            "source and target domains have different schemas".into(),
        ));
    }
    let outcomes = run_trials(cfg, |t| csv_trial(source, target, target_fraction, cfg, t))?;
    Ok(aggregate(
        cfg,
        outcomes,
        TransferReport {
            version: 1,
            mode: "csv".into(),
            challenge: None,
            metric: cfg.metric.name().into(),
            trials: cfg.trials,
            seed: cfg.seed,
            tree_count: cfg.induction.tree_count,
            source_size: Some(source.len()),
            target_size: Some(target.len()),
            test_size: None,
            target_fraction: Some(target_fraction),
            algorithms: Vec::new(),
        },
    ))
}

fn aggregate(
    cfg: &ExperimentConfig,
    outcomes: Vec<TrialOutcome>,
    mut report: TransferReport,
) -> ExperimentOutput {
    let mut timings = Vec::new();
    for &algorithm in Algorithm::ALL.iter().filter(|a| cfg.algorithms.contains(a)) {
        let values: Vec<f64> = outcomes
            .iter()
            .map(|o| pick(o, algorithm).metric_value)
            .collect();
        let times: Vec<f64> = outcomes
            .iter()
            .map(|o| pick(o, algorithm).transfer_ms)
            .collect();
        let diags: Vec<&EnsembleDiagnostics> = outcomes
            .iter()
            .filter_map(|o| pick(o, algorithm).diagnostics.as_ref())
            .collect();
        report.algorithms.push(AlgorithmSummary {
            algorithm: algorithm.name().into(),
            mean: mean(&values),
            std_error: std_error(&values),
            diagnostics: summarize_diagnostics(&diags),
        });
        timings.push(AlgorithmTiming {
            algorithm: algorithm.name().into(),
            mean_transfer_ms: mean(&times),
        });
    }
    ExperimentOutput {
        report,
        timings: TimingsReport { algorithms: timings },
    }
}

fn pick(outcome: &TrialOutcome, algorithm: Algorithm) -> &AlgoOutcome {
    outcome
        .results
        .iter()
        .find(|r| r.algorithm == algorithm)
        .expect("requested algorithm present in trial outcome")
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Standard error of the mean over trials (sample standard deviation over
/// the square root of the trial count).
fn std_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn summarize_diagnostics(diags: &[&EnsembleDiagnostics]) -> Option<DiagnosticsSummary> {
    if diags.is_empty() {
        return None;
    }
    let n = diags.len() as f64;
    let c_bounds: Vec<f64> = diags.iter().filter_map(|d| d.c_bound).collect();
    let simple: Vec<f64> = diags.iter().filter_map(|d| d.simple_bound).collect();
    Some(DiagnosticsSummary {
        gibbs_risk: diags.iter().map(|d| d.gibbs_risk).sum::<f64>() / n,
        bayes_risk: diags.iter().map(|d| d.bayes_risk).sum::<f64>() / n,
        disagreement_dq: diags.iter().map(|d| d.disagreement_dq).sum::<f64>() / n,
        joint_error_eq: diags.iter().map(|d| d.joint_error_eq).sum::<f64>() / n,
        c_bound: if c_bounds.is_empty() { None } else { Some(mean(&c_bounds)) },
        c_bound_defined_trials: c_bounds.len(),
        simple_bound: if simple.is_empty() { None } else { Some(mean(&simple)) },
    })
}

// Exercised further by the acceptance suite; the unit tests here pin the
// plumbing.
#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Challenge;

    fn tiny_cfg() -> ExperimentConfig {
        ExperimentConfig {
            algorithms: vec![
                Algorithm::SrcOnly,
                Algorithm::Ser,
                Algorithm::Strut,
                Algorithm::Mix,
            ],
            trials: 3,
            seed: 42,
            induction: InductionConfig {
                tree_count: 5,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn tiny_spec() -> ChallengeSpec {
        let mut spec = ChallengeSpec::new(Challenge::Moving);
        spec.source_size = 120;
        spec.target_size = 40;
        spec.test_size = 400;
        spec
    }

    #[test]
    fn synth_report_is_deterministic() {
        let spec = tiny_spec();
        let cfg = tiny_cfg();
        let a = run_synth_experiment(&spec, &cfg).unwrap();
        let b = run_synth_experiment(&spec, &cfg).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
    }

    #[test]
    fn parallelism_does_not_change_metrics() {
        let spec = tiny_spec();
        let mut cfg = tiny_cfg();
        cfg.workers = 1;
        let serial = run_synth_experiment(&spec, &cfg).unwrap();
        cfg.workers = 2;
        let parallel = run_synth_experiment(&spec, &cfg).unwrap();
        assert_eq!(serial.report.to_json(), parallel.report.to_json());
    }

    #[test]
    fn mix_alone_still_computes() {
        let spec = tiny_spec();
        let mut cfg = tiny_cfg();
        cfg.algorithms = vec![Algorithm::Mix];
        let out = run_synth_experiment(&spec, &cfg).unwrap();
        assert_eq!(out.report.algorithms.len(), 1);
        assert_eq!(out.report.algorithms[0].algorithm, "mix");
    }

    #[test]
    fn trial_errors_carry_context() {
        let spec = tiny_spec();
        let mut cfg = tiny_cfg();
        cfg.trials = 0;
        assert!(run_synth_experiment(&spec, &cfg).is_err());
    }
}
