//! Union ensembles and PAC-Bayes ensemble diagnostics.
//!
//! All diagnostics are computed exactly from per-sample vote tallies: with
//! `w_c(x)` the total weight of trees voting class `c` on `x`, the Gibbs
//! risk is `E[1 - w_y]`, the expected disagreement between two independent
//! voter draws is `E[1 - sum_c w_c^2]`, and the expected joint error is
//! `E[(1 - w_y)^2]`. No pair enumeration is needed.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::Forest;

/// Uniform-vote union of two forests over the same schema.
pub fn mix(a: &Forest, b: &Forest) -> Result<Forest> {
    if *a.schema() != *b.schema() {
        return Err(Error::SchemaMismatch(
            "cannot mix forests with different schemas".into(),
        ));
    }
    let mut trees = a.trees().to_vec();
    trees.extend_from_slice(b.trees());
    let weights = Forest::uniform_weights(trees.len());
    Forest::new(a.schema().clone(), trees, weights, "mix")
}

/// Ensemble risk measures and the C-bound.
///
/// `c_bound` and `simple_bound` are undefined when the Gibbs risk reaches
/// 1/2 and are reported as `null` in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleDiagnostics {
    pub gibbs_risk: f64,
    pub bayes_risk: f64,
    pub disagreement_dq: f64,
    pub joint_error_eq: f64,
    pub c_bound: Option<f64>,
    /// `1 / (n (1 - 2 R_G)^2)` for `n` voters.
    pub simple_bound: Option<f64>,
    pub voters: usize,
}

/// Weight-averaged individual-voter 0-1 error.
pub fn gibbs_risk(forest: &Forest, ds: &Dataset) -> Result<f64> {
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(mean(shares.iter().zip(ds.labels()).map(|(w, &y)| 1.0 - w[y])))
}

/// 0-1 error of the weighted majority vote. A tie with the best rival
/// class counts as an error (the vote margin is not positive).
pub fn bayes_risk(forest: &Forest, ds: &Dataset) -> Result<f64> {
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(mean(shares.iter().zip(ds.labels()).map(|(w, &y)| {
        let margin = w[y] - best_rival(w, y);
        if margin <= 0.0 {
            1.0
        } else {
            0.0
        }
    })))
}

/// Probability that two independent voter draws disagree, averaged over
/// the inputs. Labels are ignored.
pub fn disagreement(forest: &Forest, ds: &Dataset) -> Result<f64> {
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(mean(shares.iter().map(|w| {
        1.0 - w.iter().map(|s| s * s).sum::<f64>()
    })))
}

/// Probability that two independent voter draws both err.
pub fn joint_error(forest: &Forest, ds: &Dataset) -> Result<f64> {
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(mean(shares.iter().zip(ds.labels()).map(|(w, &y)| {
        let e = 1.0 - w[y];
        e * e
    })))
}

/// C-bound from Gibbs risk and expected disagreement:
/// `1 - (1 - 2 R_G)^2 / (1 - 2 d_Q)`, defined for `R_G < 1/2`.
pub fn c_bound(gibbs_risk: f64, disagreement_dq: f64) -> Option<f64> {
    if gibbs_risk >= 0.5 {
        return None;
    }
    let num = (1.0 - 2.0 * gibbs_risk).powi(2);
    let den = 1.0 - 2.0 * disagreement_dq;
    Some(1.0 - num / den)
}

/// All diagnostics in one dataset pass. Binary label spaces only; for more
/// classes reduce with [`ensemble_diagnostics_one_vs_rest`].
pub fn ensemble_diagnostics(forest: &Forest, ds: &Dataset) -> Result<EnsembleDiagnostics> {
    if ds.schema().class_count() != 2 {
        return Err(Error::InvalidConfig(
            "ensemble diagnostics are defined for binary labels; \
             use the one-vs-rest reduction for more classes"
                .into(),
        ));
    }
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(diagnostics_from_shares(
        &shares,
        ds.labels(),
        forest.tree_count(),
    ))
}

/// Diagnostics for the binary reduction `label == positive_class` vs rest;
/// every tree's vote is reduced the same way.
pub fn ensemble_diagnostics_one_vs_rest(
    forest: &Forest,
    ds: &Dataset,
    positive_class: usize,
) -> Result<EnsembleDiagnostics> {
    if positive_class >= ds.schema().class_count() {
        return Err(Error::InvalidConfig(format!(
            "positive class {positive_class} out of range"
        )));
    }
    let shares = forest.vote_shares_dataset(ds)?;
    let reduced: Vec<Vec<f64>> = shares
        .iter()
        .map(|w| {
            let pos = w[positive_class];
            let total: f64 = w.iter().sum();
            vec![total - pos, pos]
        })
        .collect();
    let labels: Vec<usize> = ds
        .labels()
        .iter()
        .map(|&y| usize::from(y == positive_class))
        .collect();
    Ok(diagnostics_from_shares(
        &reduced,
        &labels,
        forest.tree_count(),
    ))
}

fn diagnostics_from_shares(
    shares: &[Vec<f64>],
    labels: &[usize],
    voters: usize,
) -> EnsembleDiagnostics {
    let mut gibbs = 0.0;
    let mut bayes = 0.0;
    let mut dq = 0.0;
    let mut eq = 0.0;
    for (w, &y) in shares.iter().zip(labels) {
        let e = 1.0 - w[y];
        gibbs += e;
        eq += e * e;
        dq += 1.0 - w.iter().map(|s| s * s).sum::<f64>();
        if w[y] - best_rival(w, y) <= 0.0 {
            bayes += 1.0;
        }
    }
    let n = shares.len() as f64;
    let gibbs = gibbs / n;
    let dq = dq / n;
    let simple_bound = if gibbs < 0.5 {
        Some(1.0 / (voters as f64 * (1.0 - 2.0 * gibbs).powi(2)))
    } else {
        None
    };
    EnsembleDiagnostics {
        gibbs_risk: gibbs,
        bayes_risk: bayes / n,
        disagreement_dq: dq,
        joint_error_eq: eq / n,
        c_bound: c_bound(gibbs, dq),
        simple_bound,
        voters,
    }
}

fn best_rival(shares: &[f64], y: usize) -> f64 {
    shares
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != y)
        .map(|(_, &s)| s)
        .fold(0.0, f64::max)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

/// Which evaluation points enter the margin CDF.
pub enum MarginFilter<'a> {
    All,
    /// Keep only points where two reference forests' majority votes differ.
    Disagree(&'a Forest, &'a Forest),
}

/// Classification margin of every (kept) point: the weighted vote share of
/// the true class minus the best rival share.
pub fn margins(forest: &Forest, ds: &Dataset, filter: &MarginFilter) -> Result<Vec<f64>> {
    let keep: Vec<bool> = match filter {
        MarginFilter::All => vec![true; ds.len()],
        MarginFilter::Disagree(a, b) => {
            let pa = a.predict_dataset(ds)?;
            let pb = b.predict_dataset(ds)?;
            pa.iter().zip(&pb).map(|(x, y)| x != y).collect()
        }
    };
    let shares = forest.vote_shares_dataset(ds)?;
    Ok(shares
        .iter()
        .zip(ds.labels())
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|((w, &y), _)| w[y] - best_rival(w, y))
        .collect())
}

/// Exact empirical CDF of the margins as a step function: one row per
/// distinct margin value, `(margin, cumulative fraction)`.
pub fn margin_cdf(forest: &Forest, ds: &Dataset, filter: &MarginFilter) -> Result<Vec<(f64, f64)>> {
    let mut ms = margins(forest, ds, filter)?;
    ms.sort_by(|a, b| a.partial_cmp(b).expect("finite margins"));
    let n = ms.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, m) in ms.iter().enumerate() {
        let cum = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *m => last.1 = cum,
            _ => out.push((*m, cum)),
        }
    }
    Ok(out)
}
