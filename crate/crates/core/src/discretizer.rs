//! Supervised MDLP discretization (Fayyad–Irani) of continuous features.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::features::{FeatureDump, FeatureMap, FeatureRegistry, FeatureValue, ValueClass};

pub const BINS_SCHEMA: &str = "boxvis.bins/1";

/// Class entropy in bits of a count vector.
fn entropy_bits(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn distinct(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// The minimum-description-length acceptance test for splitting a segment
/// with class counts `all` into `left` and `right`.
pub fn mdl_accepts(all: &[usize], left: &[usize], right: &[usize]) -> bool {
    let n: usize = all.iter().sum();
    if n < 2 {
        return false;
    }
    let nf = n as f64;
    let (n1, n2) = (
        left.iter().sum::<usize>() as f64,
        right.iter().sum::<usize>() as f64,
    );
    let (e, e1, e2) = (entropy_bits(all), entropy_bits(left), entropy_bits(right));
    let gain = e - (n1 / nf) * e1 - (n2 / nf) * e2;
    let (k, k1, k2) = (
        distinct(all) as f64,
        distinct(left) as f64,
        distinct(right) as f64,
    );
    let delta = (3f64.powf(k) - 2.0).log2() - (k * e - k1 * e1 - k2 * e2);
    gain > ((nf - 1.0).log2() + delta) / nf
}

/// Candidate entropies closer than this count as tied.
pub const ENTROPY_TIE: f64 = 1e-12;

/// Midpoint strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

/// Cut points chosen by recursive entropy minimisation with the MDL
/// stopping rule. Candidates are the midpoints between adjacent distinct
/// values whose label groups are not both pure in the same class. Among
/// candidates tied within [`ENTROPY_TIE`] the smallest cut wins.
pub fn fit_mdlp(values: &[f64], labels: &[usize]) -> Result<Vec<f64>> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch(values.len(), labels.len()));
    }
    let mut rows: Vec<(f64, usize)> = values
        .iter()
        .copied()
        .zip(labels.iter().copied())
        .filter(|(v, _)| v.is_finite())
        .collect();
    if rows.len() < 2 {
        return Ok(Vec::new());
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let k = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;

    // one group per distinct value, with cumulative class counts
    let mut group_vals: Vec<f64> = Vec::new();
    let mut group_counts: Vec<Vec<usize>> = Vec::new();
    for &(v, c) in &rows {
        if group_vals.last() != Some(&v) {
            group_vals.push(v);
            group_counts.push(vec![0; k]);
        }
        group_counts.last_mut().unwrap()[c] += 1;
    }
    let g = group_vals.len();
    let mut prefix = vec![vec![0usize; k]; g + 1];
    for i in 0..g {
        for c in 0..k {
            prefix[i + 1][c] = prefix[i][c] + group_counts[i][c];
        }
    }
    let pure_class = |counts: &[usize]| -> Option<usize> {
        let mut it = counts.iter().enumerate().filter(|(_, &n)| n > 0);
        let first = it.next()?.0;
        it.next().is_none().then_some(first)
    };
    let boundary: Vec<bool> = (1..g)
        .map(|i| {
            match (
                pure_class(&group_counts[i - 1]),
                pure_class(&group_counts[i]),
            ) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            }
        })
        .collect();

    let mut cuts = Vec::new();
    let mut stack = vec![(0usize, g)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let count = |a: usize, b: usize| -> Vec<usize> {
            (0..k).map(|c| prefix[b][c] - prefix[a][c]).collect()
        };
        let all = count(lo, hi);
        let n = all.iter().sum::<usize>() as f64;
        let mut best: Option<(f64, usize)> = None;
        for split in lo + 1..hi {
            if !boundary[split - 1] {
                continue;
            }
            let (l, r) = (count(lo, split), count(split, hi));
            let (nl, nr) = (
                l.iter().sum::<usize>() as f64,
                r.iter().sum::<usize>() as f64,
            );
            let e = (nl * entropy_bits(&l) + nr * entropy_bits(&r)) / n;
            if best.is_none_or(|(be, _)| e < be - ENTROPY_TIE) {
                best = Some((e, split));
            }
        }
        let Some((_, split)) = best else { continue };
        if mdl_accepts(&all, &count(lo, split), &count(split, hi)) {
            cuts.push(midpoint(group_vals[split - 1], group_vals[split]));
            stack.push((lo, split));
            stack.push((split, hi));
        }
    }
    cuts.sort_by(f64::total_cmp);
    Ok(cuts)
}

/// Bin layout of one continuous feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub cuts: Vec<f64>,
    pub missing_bin: bool,
}

impl BinSpec {
    pub fn n_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Left-closed bins: a value equal to a cut falls in the bin to its
    /// right; values beyond the fitted range land in the outer bins.
    pub fn bin_of(&self, value: f64) -> usize {
        self.cuts.partition_point(|&c| c <= value)
    }

    /// Bin of an optional value; missing maps to index `n_bins()`.
    pub fn transform(&self, value: Option<f64>) -> Result<usize> {
        match value {
            Some(v) if v.is_finite() => Ok(self.bin_of(v)),
            _ if self.missing_bin => Ok(self.n_bins()),
            _ => Err(Error::NoMissingBin),
        }
    }
}

/// Fitted bins for every continuous feature, plus the boolean features
/// that pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationMap {
    pub schema: String,
    pub features: BTreeMap<String, BinSpec>,
    pub booleans: Vec<String>,
}

/// A discretized feature observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    Interval { index: usize, n_bins: usize },
    Missing,
    Flag(bool),
}

impl DiscretizationMap {
    pub fn spec(&self, feature: &str) -> Result<&BinSpec> {
        self.features
            .get(feature)
            .ok_or_else(|| Error::UnfittedFeature(feature.to_string()))
    }

    pub fn is_boolean(&self, feature: &str) -> bool {
        self.booleans.iter().any(|b| b == feature)
    }

    /// Discretizes one feature value. Returns `Ok(None)` for a missing
    /// boolean and for a missing continuous value without a missing bin.
    pub fn discretize(&self, feature: &str, value: FeatureValue) -> Result<Option<Bin>> {
        if self.is_boolean(feature) {
            return Ok(value.as_bool().map(Bin::Flag));
        }
        let spec = self.spec(feature)?;
        match value {
            FeatureValue::Real(v) => Ok(Some(Bin::Interval {
                index: spec.bin_of(v),
                n_bins: spec.n_bins(),
            })),
            FeatureValue::Missing if spec.missing_bin => Ok(Some(Bin::Missing)),
            FeatureValue::Missing => Ok(None),
            FeatureValue::Bool(_) => Err(Error::InvalidArgument(format!(
                "boolean value for continuous feature {feature}"
            ))),
        }
    }

    /// SHA-256 of the compact JSON form; models record it to refuse
    /// mismatched bins.
    pub fn fingerprint(&self) -> String {
        crate::artifacts::fingerprint(self).expect("bins serialise")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::artifacts::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let map: DiscretizationMap = crate::artifacts::read_json(path)?;
        if map.schema != BINS_SCHEMA {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                expected: BINS_SCHEMA.to_string(),
                got: map.schema,
            });
        }
        Ok(map)
    }
}

/// Fits one bin spec per continuous registry feature, supervised by the
/// chart type of the source pair. Single-column features see every column
/// of every pair. Refuses dumps tagged as the test split.
pub fn fit_all(dump: &FeatureDump) -> Result<DiscretizationMap> {
    fit_all_with(dump, FeatureRegistry::builtin())
}

pub fn fit_all_with(dump: &FeatureDump, registry: &FeatureRegistry) -> Result<DiscretizationMap> {
    if dump.split == Some(Split::Test) {
        return Err(Error::LeakageGuard(
            "bins must be fitted on the training split".into(),
        ));
    }
    if dump.pairs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut features = BTreeMap::new();
    let mut booleans = Vec::new();
    for info in registry.all() {
        if info.value == ValueClass::Boolean {
            booleans.push(info.name.clone());
            continue;
        }
        let maps: Vec<(&FeatureMap, usize)> = match info.kind {
            crate::features::FeatureKind::Single => dump
                .pairs
                .iter()
                .flat_map(|p| p.single.values().map(move |m| (m, p.chart_type.index())))
                .collect(),
            crate::features::FeatureKind::Cross => dump
                .pairs
                .iter()
                .map(|p| (&p.cross, p.chart_type.index()))
                .collect(),
        };
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut missing = false;
        for (m, label) in maps {
            match m.get(&info.name).and_then(FeatureValue::as_real) {
                Some(v) => {
                    values.push(v);
                    labels.push(label);
                }
                None => missing = true,
            }
        }
        features.insert(
            info.name.clone(),
            BinSpec {
                cuts: fit_mdlp(&values, &labels)?,
                missing_bin: missing,
            },
        );
    }
    Ok(DiscretizationMap {
        schema: BINS_SCHEMA.to_string(),
        features,
        booleans,
    })
}
