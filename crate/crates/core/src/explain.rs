//! Template explanations built from the attention trace.

use serde::{Deserialize, Serialize};

use crate::corpus::ChartType;
use crate::discretizer::Bin;
use crate::features::{FeatureInfo, FeatureKind, FeatureRegistry};
use crate::inference::{InferenceTrace, Recommendation};

pub const IMPORTANCE_FLOOR: f64 = 0.05;
pub const MAX_FEATURES: usize = 4;

/// A feature's share of the recommendation: column-level attention times
/// the column's dataset-level attention for single-column features, the
/// dataset-level attention for cross-column ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: String,
    pub scope: FeatureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    pub bin: Bin,
    pub weight: f64,
}

/// Path-product importances over every branch of the trace, renormalised
/// to sum to one.
pub fn feature_importances(trace: &InferenceTrace) -> Vec<Importance> {
    let mut out = Vec::new();
    for col in &trace.columns {
        for b in &col.branches {
            out.push(Importance {
                feature: b.feature.clone(),
                scope: FeatureKind::Single,
                column: Some(col.column.clone()),
                bin: b.bin,
                weight: b.weight * col.dataset_weight,
            });
        }
    }
    for b in &trace.cross {
        out.push(Importance {
            feature: b.feature.clone(),
            scope: FeatureKind::Cross,
            column: None,
            bin: b.bin,
            weight: b.weight,
        });
    }
    let total: f64 = out.iter().map(|i| i.weight).sum();
    if total > 0.0 {
        for i in &mut out {
            i.weight /= total;
        }
    }
    out
}

const FIVE_LEVELS: [&str; 5] = ["very low", "low", "medium", "high", "very high"];

/// Wording for bin `index` of `n_bins`. Two bins use the feature's own
/// low/high words when it has them; three use low/medium/high; four or
/// more map onto a five-step scale. A single bin carries no information
/// and gets no phrase.
pub fn degree_phrase(info: &FeatureInfo, index: usize, n_bins: usize) -> Option<String> {
    if n_bins < 2 || index >= n_bins {
        return None;
    }
    let noun = info.phrase.noun.as_deref().unwrap_or(info.name.as_str());
    let level = match n_bins {
        2 => {
            let custom = if index == 0 {
                &info.phrase.low
            } else {
                &info.phrase.high
            };
            if let Some(word) = custom {
                return Some(word.clone());
            }
            ["low", "high"][index]
        }
        3 => ["low", "medium", "high"][index],
        n => {
            let pos = (index as f64 * 4.0 / (n - 1) as f64).round() as usize;
            FIVE_LEVELS[pos]
        }
    };
    Some(format!("{level} {noun}"))
}

/// The clause fragment for a feature observation, or `None` when the
/// observation cannot be put into words (single bins, missing values,
/// false booleans).
pub fn feature_phrase(info: &FeatureInfo, bin: Bin) -> Option<String> {
    match bin {
        Bin::Flag(true) => info.phrase.text.clone(),
        Bin::Flag(false) | Bin::Missing => None,
        Bin::Interval { index, n_bins } => {
            let p = degree_phrase(info, index, n_bins)?;
            if p.contains(' ') {
                Some(p)
            } else {
                let noun = info.phrase.noun.as_deref().unwrap_or(info.name.as_str());
                Some(format!("{p} {noun}"))
            }
        }
    }
}

/// Keeps at most `max_n` features that are explainable: not blocklisted,
/// phrased, not a false boolean and at least `floor` important. Order is by
/// importance, then by trace order.
pub fn select_features(
    importances: &[Importance],
    registry: &FeatureRegistry,
    max_n: usize,
    floor: f64,
) -> Vec<Importance> {
    let mut keep: Vec<&Importance> = importances
        .iter()
        .filter(|i| i.weight >= floor)
        .filter(|i| {
            registry
                .get(&i.feature)
                .is_some_and(|info| !info.blocklisted && feature_phrase(info, i.bin).is_some())
        })
        .collect();
    keep.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    keep.into_iter().take(max_n).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationFeature {
    pub name: String,
    pub scope: FeatureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    /// Share among the selected features; sums to one.
    pub importance: f64,
    /// Share among all branches of the trace.
    pub path_weight: f64,
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub types: Vec<ChartType>,
    pub features: Vec<ExplanationFeature>,
    pub text: String,
    pub low_confidence: bool,
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Fills the sentence template. Columns appear in the given order, each
/// followed by its features; cross-column features come last.
pub fn render(types: &[ChartType], columns: &[String], features: &[ExplanationFeature]) -> String {
    let names: Vec<String> = types.iter().map(|t| t.display_name().to_string()).collect();
    let verb = if types.len() > 1 { "are" } else { "is" };
    let subject = join_and(&names);
    let mut clauses = Vec::new();
    for col in columns {
        let phrases: Vec<String> = features
            .iter()
            .filter(|f| f.column.as_deref() == Some(col.as_str()))
            .map(|f| f.phrase.clone())
            .collect();
        if !phrases.is_empty() {
            clauses.push(format!("{col} has {}", join_and(&phrases)));
        }
    }
    let cross: Vec<String> = features
        .iter()
        .filter(|f| f.scope == FeatureKind::Cross)
        .map(|f| f.phrase.clone())
        .collect();
    if !cross.is_empty() {
        clauses.push(format!("Cross-column has {}", join_and(&cross)));
    }
    match clauses.as_slice() {
        [] => format!("{subject} {verb} recommended."),
        [one] => format!("{subject} {verb} recommended if {one}."),
        [init @ .., last] => format!(
            "{subject} {verb} recommended if {}, and {last}.",
            init.join(", ")
        ),
    }
}

pub fn explain_trace(
    types: &[ChartType],
    trace: &InferenceTrace,
    registry: &FeatureRegistry,
) -> Explanation {
    let importances = feature_importances(trace);
    let selected = select_features(&importances, registry, MAX_FEATURES, IMPORTANCE_FLOOR);
    let total: f64 = selected.iter().map(|i| i.weight).sum();
    let features: Vec<ExplanationFeature> = selected
        .iter()
        .map(|i| ExplanationFeature {
            name: i.feature.clone(),
            scope: i.scope,
            column: i.column.clone(),
            importance: i.weight / total,
            path_weight: i.weight,
            phrase: feature_phrase(registry.get(&i.feature).unwrap(), i.bin).unwrap(),
        })
        .collect();
    let columns: Vec<String> = trace.columns.iter().map(|c| c.column.clone()).collect();
    Explanation {
        types: types.to_vec(),
        text: render(types, &columns, &features),
        low_confidence: features.is_empty(),
        features,
    }
}

/// Explains the recommended types of `rec`.
pub fn explain(rec: &Recommendation, registry: &FeatureRegistry) -> Explanation {
    explain_trace(&rec.recommended, &rec.trace, registry)
}
