//! Evaluation metrics, stratified target sampling, and domain splitting.

use std::str::FromStr;

use rand::Rng;

use crate::dataset::{Dataset, FeatureKind, Value};
use crate::error::{Error, Result};
use crate::forest::shuffled_indices;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Error,
    Ber,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Error => "error",
            Metric::Ber => "ber",
        }
    }

    pub fn compute(&self, preds: &[usize], labels: &[usize], class_count: usize) -> Result<f64> {
        match self {
            Metric::Error => Ok(error_rate(preds, labels)),
            Metric::Ber => balanced_error_rate(preds, labels, class_count),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Metric::Error),
            "ber" => Ok(Metric::Ber),
            other => Err(Error::InvalidConfig(format!("unknown metric: {other}"))),
        }
    }
}

/// Fraction of predictions differing from the labels.
pub fn error_rate(preds: &[usize], labels: &[usize]) -> f64 {
    debug_assert_eq!(preds.len(), labels.len());
    let errs = preds.iter().zip(labels).filter(|(p, y)| p != y).count();
    errs as f64 / preds.len().max(1) as f64
}

/// Balanced error rate: the mean over classes of the per-class error
/// fraction. Classes absent from the labels are excluded from the mean
/// with a warning.
pub fn balanced_error_rate(preds: &[usize], labels: &[usize], class_count: usize) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(Error::Dataset(format!(
            "prediction/label count mismatch: {} vs {}",
            preds.len(),
            labels.len()
        )));
    }
    let mut errors = vec![0usize; class_count];
    let mut totals = vec![0usize; class_count];
    for (&p, &y) in preds.iter().zip(labels) {
        totals[y] += 1;
        if p != y {
            errors[y] += 1;
        }
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..class_count {
        if totals[c] == 0 {
            log::warn!("balanced error rate: class {c} absent from labels, excluded");
            continue;
        }
        sum += errors[c] as f64 / totals[c] as f64;
        present += 1;
    }
    if present == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(sum / present as f64)
}

/// Per-class proportional sampling: each class present contributes
/// `max(1, round(n_c * fraction))` rows to the train slice; the remainder
/// is the test slice. Returns `(train indices, test indices)`.
pub fn stratified_sample<R: Rng>(
    ds: &Dataset,
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "sampling fraction {fraction} outside (0, 1]"
        )));
    }
    if ds.is_empty() {
        return Err(Error::EmptySamples);
    }
    let class_count = ds.schema().class_count();
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    // Shuffle once, then bucket: the per-class order stays random and the
    // whole draw is a pure function of the rng stream.
    for i in shuffled_indices(ds.len(), rng) {
        per_class[ds.label(i)].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for bucket in per_class {
        if bucket.is_empty() {
            continue;
        }
        let want = (bucket.len() as f64 * fraction).round() as usize;
        let take = want.clamp(1, bucket.len());
        train.extend_from_slice(&bucket[..take]);
        test.extend_from_slice(&bucket[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// How a feature value decides domain membership in [`split_by_feature`].
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    /// Rows holding this category go to the target domain, the rest to the
    /// source domain.
    CategoryEquals(String),
    /// Rows above the feature's global median go to the target domain.
    Median,
    /// Rows above their own class's median of the feature go to the target
    /// domain.
    PerClassMedian,
}

/// Partitions a dataset into source and target domains by one feature,
/// which is dropped from both domains' schemas.
pub fn split_by_feature(
    ds: &Dataset,
    feature_name: &str,
    rule: &SplitRule,
) -> Result<(Dataset, Dataset)> {
    let feature = ds
        .schema()
        .feature_index(feature_name)
        .ok_or_else(|| Error::Dataset(format!("no feature named {feature_name}")))?;
    let to_target: Vec<bool> = match rule {
        SplitRule::CategoryEquals(value) => {
            let FeatureKind::Categorical { values } = &ds.schema().features[feature].kind else {
                return Err(Error::Dataset(format!(
                    "feature {feature_name} is numeric; a category rule needs a categorical feature"
                )));
            };
            let cat = values
                .iter()
                .position(|v| v == value)
                .ok_or_else(|| {
                    Error::Dataset(format!("value {value} not in enumeration of {feature_name}"))
                })? as u32;
            (0..ds.len())
                .map(|i| ds.value(i, feature) == Value::Cat(cat))
                .collect()
        }
        SplitRule::Median => {
            let m = median_of(ds, feature, None)?;
            (0..ds.len())
                .map(|i| ds.value(i, feature).as_num().expect("numeric") > m)
                .collect()
        }
        SplitRule::PerClassMedian => {
            let class_count = ds.schema().class_count();
            let medians: Vec<f64> = (0..class_count)
                .map(|c| median_of(ds, feature, Some(c)))
                .collect::<Result<_>>()?;
            (0..ds.len())
                .map(|i| {
                    ds.value(i, feature).as_num().expect("numeric") > medians[ds.label(i)]
                })
                .collect()
        }
    };
    let source_idx: Vec<usize> = (0..ds.len()).filter(|&i| !to_target[i]).collect();
    let target_idx: Vec<usize> = (0..ds.len()).filter(|&i| to_target[i]).collect();
    if source_idx.is_empty() || target_idx.is_empty() {
        return Err(Error::DegenerateSplit);
    }
    let source = ds.select(&source_idx).drop_feature(feature)?;
    let target = ds.select(&target_idx).drop_feature(feature)?;
    Ok((source, target))
}

fn median_of(ds: &Dataset, feature: usize, class: Option<usize>) -> Result<f64> {
    if !ds.schema().features[feature].kind.is_numeric() {
        return Err(Error::Dataset(
            "median split rules need a numeric feature".into(),
        ));
    }
    let mut values: Vec<f64> = (0..ds.len())
        .filter(|&i| class.is_none_or(|c| ds.label(i) == c))
        .map(|i| ds.value(i, feature).as_num().expect("numeric"))
        .collect();
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    Ok(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
