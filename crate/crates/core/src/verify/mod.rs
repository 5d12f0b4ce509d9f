//! Seeded, reproducible experiments with pass/fail verdicts.
//!
//! Trial `i` of an experiment draws from `seeds::derive(experiment_seed, i)`, so any
//! trial can be replayed alone from the config echo and its recorded seed.
//! Trials run in parallel and are collected in index order; every aggregate is
//! a sequential fold, so reports are bitwise reproducible.

mod config;
mod interp;
mod operators;
mod report;
mod sampler;

pub use config::{
    CanonicalConfig, CompactnessConfig, DecayConfig, DualityConfig, GpConfig, OracleMatchConfig, ReiterationConfig,
    RieszConfig, SmoothingConfig, ThreeLinesConfig, VerifyConfig,
};
pub use report::{Check, ExperimentReport, TrialRecord};
pub use sampler::EffectiveFamilySampler;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeds;

/// Experiment ids in suite order.
pub const EXPERIMENTS: [&str; 9] = [
    "three_lines",
    "oracle_match",
    "reiteration",
    "smoothing",
    "coefficient_decay",
    "compactness_propagation",
    "duality",
    "riesz_lemma8",
    "gp_containment",
];

pub fn exp_three_lines(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    interp::three_lines(cfg, experiment_seed(cfg, "three_lines"))
}

pub fn exp_oracle_match(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    interp::oracle_match(cfg, experiment_seed(cfg, "oracle_match"))
}

pub fn exp_reiteration(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    interp::reiteration(cfg, experiment_seed(cfg, "reiteration"))
}

pub fn exp_smoothing(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    operators::smoothing(cfg, experiment_seed(cfg, "smoothing"))
}

pub fn exp_coefficient_decay(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    operators::coefficient_decay(cfg, experiment_seed(cfg, "coefficient_decay"))
}

pub fn exp_compactness_propagation(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    operators::compactness_propagation(cfg, experiment_seed(cfg, "compactness_propagation"))
}

pub fn exp_duality(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    interp::duality(cfg, experiment_seed(cfg, "duality"))
}

pub fn exp_riesz_lemma8(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    operators::riesz_lemma8(cfg, experiment_seed(cfg, "riesz_lemma8"))
}

pub fn exp_gp_containment(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    interp::gp_containment(cfg, experiment_seed(cfg, "gp_containment"))
}

fn experiment_seed(cfg: &VerifyConfig, id: &str) -> u64 {
    let idx = EXPERIMENTS.iter().position(|e| *e == id).expect("known id");
    seeds::derive(cfg.seed, idx as u64)
}

pub fn run_experiment(id: &str, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match id {
        "three_lines" => exp_three_lines(cfg),
        "oracle_match" => exp_oracle_match(cfg),
        "reiteration" => exp_reiteration(cfg),
        "smoothing" => exp_smoothing(cfg),
        "coefficient_decay" => exp_coefficient_decay(cfg),
        "compactness_propagation" => exp_compactness_propagation(cfg),
        "duality" => exp_duality(cfg),
        "riesz_lemma8" => exp_riesz_lemma8(cfg),
        "gp_containment" => exp_gp_containment(cfg),
        _ => Err(Error::InvalidParameter(format!("unknown experiment {id:?}; known: {}", EXPERIMENTS.join(", ")))),
    }
}

/// A report with its wall time in seconds, kept apart so reports stay reproducible.
#[derive(Clone, Debug)]
pub struct TimedReport {
    pub report: ExperimentReport,
    pub seconds: f64,
}

pub fn run_timed(id: &str, cfg: &VerifyConfig) -> Result<TimedReport> {
    let start = Instant::now();
    let report = run_experiment(id, cfg)?;
    Ok(TimedReport { report, seconds: start.elapsed().as_secs_f64() })
}

/// Runs `ids` in the given order.
pub fn run_suite(ids: &[&str], cfg: &VerifyConfig) -> Result<Vec<TimedReport>> {
    ids.iter().map(|id| run_timed(id, cfg)).collect()
}

/// One line per experiment: `experiment,passed,trials,checks_passed,checks`.
pub fn summary_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,passed,trials,checks_passed,checks\n");
    for r in reports {
        let ok = r.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{},{},{},{},{}\n", r.id, r.passed, r.trials.len(), ok, r.checks.len()));
    }
    out
}

/// Runs `count` trials in parallel and returns them in index order.
pub(crate) fn trials<F>(count: usize, seed: u64, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(u64, u64) -> Result<TrialRecord> + Sync,
{
    (0..count as u64).into_par_iter().map(|i| f(i, seeds::derive(seed, i))).collect()
}

/// Sequential maximum, `0` for an empty iterator.
pub(crate) fn fmax(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_is_an_error() {
        assert!(run_experiment("nope", &VerifyConfig::default()).is_err());
    }

    #[test]
    fn seeds_differ_per_experiment() {
        let cfg = VerifyConfig::default();
        let s: std::collections::BTreeSet<u64> = EXPERIMENTS.iter().map(|e| experiment_seed(&cfg, e)).collect();
        assert_eq!(s.len(), EXPERIMENTS.len());
    }

    #[test]
    fn summary_lists_every_report() {
        let mut r = ExperimentReport::new("a", "", serde_json::Value::Null);
        r.check("x", true, 1.0, 2.0);
        let r = r.finish(vec![]);
        let s = summary_csv(&[r.clone(), r]);
        assert_eq!(s.lines().count(), 3);
        assert!(s.lines().nth(1).unwrap().starts_with("a,true,0,1,1"));
    }
}
