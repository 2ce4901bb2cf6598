//! Held-out metrics: axis accuracy, mean rank, Hits@k and multi-label
//! precision/recall over feature-signature groups.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::boxmodel::{Hyperparams, Model, ModelOptions};
use crate::corpus::{ChartType, Corpus};
use crate::discretizer::DiscretizationMap;
use crate::error::{Error, Result};
use crate::features::{extract_pair, FeatureMap, PairFeatures};
use crate::inference::{recommend_features, InferenceOptions, RankedType, Recommendation};
use crate::synth::{Archetype, Rulebook};

pub fn mean_rank(ranks: &[usize]) -> f64 {
    if ranks.is_empty() {
        return f64::NAN;
    }
    ranks.iter().sum::<usize>() as f64 / ranks.len() as f64
}

pub fn hits_at_k(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return f64::NAN;
    }
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

/// 1-based rank of `truth` in a ranking already ordered by score with
/// the fixed type order breaking ties.
pub fn rank_of(ranking: &[RankedType], truth: ChartType) -> usize {
    ranking
        .iter()
        .position(|r| r.chart_type == truth)
        .map_or(ranking.len() + 1, |p| p + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Macro-averaged set precision and recall; F1 is the harmonic mean of the
/// two averages. An empty prediction scores precision 0.
pub fn multi_label_prf(predicted: &[Vec<ChartType>], truth: &[Vec<ChartType>]) -> Result<Prf> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("no multi-label examples".into()));
    }
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    for (pred, gold) in predicted.iter().zip(truth) {
        let pred: BTreeSet<_> = pred.iter().collect();
        let gold: BTreeSet<_> = gold.iter().collect();
        let hit = pred.intersection(&gold).count() as f64;
        if !pred.is_empty() {
            p_sum += hit / pred.len() as f64;
        }
        if !gold.is_empty() {
            r_sum += hit / gold.len() as f64;
        }
    }
    let n = predicted.len() as f64;
    let (precision, recall) = (p_sum / n, r_sum / n);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Prf {
        recall,
        precision,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureGroup {
    pub signature: String,
    pub members: Vec<String>,
    /// Union of the members' chart types, in type order.
    pub types: Vec<ChartType>,
}

fn map_signature(map: &FeatureMap, bins: &DiscretizationMap) -> Result<String> {
    let mut s = String::new();
    for (name, &value) in map {
        let bin = bins.discretize(name, value)?;
        write!(s, "{name}={};", serde_json::to_string(&bin)?).unwrap();
    }
    Ok(s)
}

/// The full discretised feature signature of a pair. Column signatures are
/// sorted so storage order does not matter.
pub fn signature(pf: &PairFeatures, bins: &DiscretizationMap) -> Result<String> {
    let mut cols = (0..pf.columns.len())
        .map(|i| map_signature(pf.column_features(i), bins))
        .collect::<Result<Vec<_>>>()?;
    cols.sort();
    Ok(format!(
        "{}|{}|{}",
        cols.join("|"),
        "cross",
        map_signature(&pf.cross, bins)?
    ))
}

/// Partitions `pairs` by exact signature. Groups appear in order of their
/// first member.
pub fn group_by_signature(
    pairs: &[PairFeatures],
    bins: &DiscretizationMap,
) -> Result<Vec<SignatureGroup>> {
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut groups: Vec<SignatureGroup> = Vec::new();
    for pf in pairs {
        let sig = signature(pf, bins)?;
        let g = *index.entry(sig.clone()).or_insert_with(|| {
            groups.push(SignatureGroup {
                signature: sig,
                members: Vec::new(),
                types: Vec::new(),
            });
            groups.len() - 1
        });
        let group = &mut groups[g];
        group.members.push(pf.id.clone());
        if let Err(pos) = group.types.binary_search(&pf.chart_type) {
            group.types.insert(pos, pf.chart_type);
        }
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelReport {
    pub groups: usize,
    pub two_type_groups: usize,
    pub three_type_groups: usize,
    #[serde(flatten)]
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub inference: InferenceOptions,
    pub hyper: Hyperparams,
    pub model_options: ModelOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub axis_accuracy: f64,
    pub type_mr: f64,
    pub type_hits_at_1: f64,
    pub type_hits_at_2: f64,
    /// Signature groups with at least two distinct types; absent when the
    /// corpus has none.
    pub multi: Option<MultiLabelReport>,
    /// Multi-label scores against the rulebook's admissible sets, when a
    /// rulebook was supplied and the pairs carry archetypes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub planted: Option<Prf>,
    pub config: EvalConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub recommendations: Vec<Recommendation>,
}

/// Runs inference on every pair and scores it.
pub fn evaluate_features(
    model: &Model,
    bins: &DiscretizationMap,
    pairs: &[PairFeatures],
    options: &InferenceOptions,
) -> Result<Evaluation> {
    let recs = pairs
        .iter()
        .map(|pf| recommend_features(pf, model, bins, options))
        .collect::<Result<Vec<_>>>()?;
    let config = EvalConfig {
        inference: *options,
        hyper: model.hyper,
        model_options: model.options,
    };
    Ok(Evaluation {
        report: score(pairs, &recs, bins, config)?,
        recommendations: recs,
    })
}

/// Scores recommendations against their pairs, matched by position.
/// Signature groups with two or more types are scored on the
/// recommended set of their first member.
pub fn score(
    pairs: &[PairFeatures],
    recs: &[Recommendation],
    bins: &DiscretizationMap,
    config: EvalConfig,
) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty test corpus".into()));
    }
    if pairs.len() != recs.len() {
        return Err(Error::LengthMismatch(pairs.len(), recs.len()));
    }
    let (mut axis_hits, mut axis_total) = (0usize, 0usize);
    let mut ranks = Vec::with_capacity(pairs.len());
    for (pf, rec) in pairs.iter().zip(recs) {
        for (col, truth) in pf.columns.iter().zip(&pf.axes) {
            axis_total += 1;
            if rec.axes.get(col) == Some(truth) {
                axis_hits += 1;
            }
        }
        ranks.push(rank_of(&rec.ranking, pf.chart_type));
    }

    let groups = group_by_signature(pairs, bins)?;
    let by_id: BTreeMap<&str, &Recommendation> = recs.iter().map(|r| (r.id.as_str(), r)).collect();
    let multi_groups: Vec<&SignatureGroup> = groups.iter().filter(|g| g.types.len() >= 2).collect();
    let multi = if multi_groups.is_empty() {
        None
    } else {
        let predicted: Vec<Vec<ChartType>> = multi_groups
            .iter()
            .map(|g| by_id[g.members[0].as_str()].recommended.clone())
            .collect();
        let truth: Vec<Vec<ChartType>> = multi_groups.iter().map(|g| g.types.clone()).collect();
        Some(MultiLabelReport {
            groups: multi_groups.len(),
            two_type_groups: multi_groups.iter().filter(|g| g.types.len() == 2).count(),
            three_type_groups: multi_groups.iter().filter(|g| g.types.len() == 3).count(),
            prf: multi_label_prf(&predicted, &truth)?,
        })
    };

    Ok(EvalReport {
        n: pairs.len(),
        axis_accuracy: axis_hits as f64 / axis_total as f64,
        type_mr: mean_rank(&ranks),
        type_hits_at_1: hits_at_k(&ranks, 1),
        type_hits_at_2: hits_at_k(&ranks, 2),
        multi,
        planted: None,
        config,
    })
}

/// Extracts features from `test` and evaluates. With a rulebook, each
/// synthetic pair is also scored against its archetype's admissible set.
pub fn evaluate(
    model: &Model,
    bins: &DiscretizationMap,
    test: &Corpus,
    options: &InferenceOptions,
    rulebook: Option<&Rulebook>,
) -> Result<Evaluation> {
    let pairs = test
        .pairs
        .iter()
        .map(extract_pair)
        .collect::<Result<Vec<_>>>()?;
    let mut eval = evaluate_features(model, bins, &pairs, options)?;
    if let Some(rb) = rulebook {
        eval.report.planted = planted_prf(&eval.recommendations, test, rb)?;
    }
    Ok(eval)
}

/// Set metrics of each recommendation against the admissible types of the
/// pair's archetype. `None` when no pair has a known archetype.
pub fn planted_prf(
    recs: &[Recommendation],
    test: &Corpus,
    rulebook: &Rulebook,
) -> Result<Option<Prf>> {
    let mut predicted = Vec::new();
    let mut truth = Vec::new();
    for (rec, pair) in recs.iter().zip(&test.pairs) {
        let Some(arch) = pair
            .archetype
            .as_deref()
            .and_then(|a| a.parse::<Archetype>().ok())
        else {
            continue;
        };
        if let Some(types) = rulebook.admissible(arch) {
            predicted.push(rec.recommended.clone());
            truth.push(types.to_vec());
        }
    }
    if predicted.is_empty() {
        return Ok(None);
    }
    multi_label_prf(&predicted, &truth).map(Some)
}

/// Plain-text tables of the report.
pub fn format_report(r: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "pairs evaluated: {}", r.n).unwrap();
    writeln!(s).unwrap();
    writeln!(
        s,
        "{:<12} {:>8} {:>8} {:>8} {:>8}",
        "", "axis acc", "type MR", "hits@1", "hits@2"
    )
    .unwrap();
    writeln!(
        s,
        "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
        "model", r.axis_accuracy, r.type_mr, r.type_hits_at_1, r.type_hits_at_2
    )
    .unwrap();
    let mut rows: Vec<(String, Prf)> = Vec::new();
    if let Some(m) = &r.multi {
        rows.push((format!("groups ({})", m.groups), m.prf));
    }
    if let Some(p) = r.planted {
        rows.push(("planted".into(), p));
    }
    if !rows.is_empty() {
        writeln!(s).unwrap();
        writeln!(
            s,
            "{:<14} {:>9} {:>9} {:>9}",
            "multi-label", "recall", "precision", "f1"
        )
        .unwrap();
        for (name, p) in rows {
            writeln!(
                s,
                "{:<14} {:>9.4} {:>9.4} {:>9.4}",
                name, p.recall, p.precision, p.f1
            )
            .unwrap();
        }
    }
    s
}
