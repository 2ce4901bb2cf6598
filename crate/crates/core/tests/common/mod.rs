//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use boxvis::boxmodel::geometry::{box_size, contains, dist_box, dist_inside, dist_outside};
use boxvis::boxmodel::params::Layout;
use boxvis::boxmodel::query::{intersect, ParamView};
use boxvis::boxmodel::{train, BoxEmbedding, Hyperparams, Model, ModelOptions, TrainReport};
use boxvis::corpus::{split_corpus, ChartType, Corpus};
use boxvis::discretizer::{fit_all, Bin, DiscretizationMap};
use boxvis::evalkit::{evaluate, Evaluation};
use boxvis::explain::{explain_trace, Explanation};
use boxvis::features::{FeatureDump, FeatureKind, FeatureRegistry, ValueClass};
use boxvis::inference::{ColumnTrace, FeatureBranch, InferenceOptions, InferenceTrace};
use boxvis::kgraph::{build_graph, GraphOptions};
use boxvis::synth::{plant_signature_groups, Rulebook};

// ---------------------------------------------------------------- boxes

/// Reference distances written straight from the corner definitions.
pub fn oracle_outside(t: &[f64], b: &BoxEmbedding) -> f64 {
    let (lo, hi) = (b.min_corner(), b.max_corner());
    (0..t.len())
        .map(|i| (t[i] - hi[i]).max(0.0) + (lo[i] - t[i]).max(0.0))
        .sum()
}

pub fn oracle_inside(t: &[f64], b: &BoxEmbedding) -> f64 {
    let (lo, hi) = (b.min_corner(), b.max_corner());
    (0..t.len())
        .map(|i| (b.center[i] - hi[i].min(lo[i].max(t[i]))).abs())
        .sum()
}

pub fn oracle_size(b: &BoxEmbedding) -> f64 {
    let (lo, hi) = (b.min_corner(), b.max_corner());
    (0..lo.len())
        .map(|i| (hi[i] - lo[i]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Values on a quarter grid so boundary hits are exact.
fn grid(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-12i32..=12) as f64 / 4.0
}

pub fn random_box(rng: &mut ChaCha8Rng, d: usize) -> BoxEmbedding {
    let center: Vec<f64> = (0..d).map(|_| grid(rng)).collect();
    let offset: Vec<f64> = (0..d)
        .map(|_| {
            if rng.random_bool(0.1) {
                0.0
            } else {
                grid(rng).abs()
            }
        })
        .collect();
    BoxEmbedding::new(center, offset).unwrap()
}

/// A point that is sometimes inside, sometimes on a face, sometimes out.
pub fn random_point_near(rng: &mut ChaCha8Rng, b: &BoxEmbedding) -> Vec<f64> {
    (0..b.dim())
        .map(|i| match rng.random_range(0..4) {
            0 => b.center[i] + b.offset[i],
            1 => b.center[i] - b.offset[i],
            2 => b.center[i] + rng.random_range(-1.0..=1.0) * b.offset[i],
            _ => grid(rng),
        })
        .collect()
}

pub fn random_params(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let layout = Layout::new(0, d);
    (0..layout.total())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Default)]
pub struct BoxSuite {
    pub cases: usize,
    pub contained: usize,
}

/// Randomised checks of containment, distance composition and the
/// intersection's permutation invariance and offset bound.
pub fn box_algebra_suite(cases: usize, seed: u64) -> Result<BoxSuite, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BoxSuite::default();
    for case in 0..cases {
        let d = rng.random_range(1..=8);
        let b = random_box(&mut rng, d);
        let t = random_point_near(&mut rng, &b);

        let inside = contains(&b.center, &b.offset, &t, 0.0);
        let zero = dist_outside(&t, &b.center, &b.offset) == 0.0;
        if inside != zero {
            return Err(format!(
                "case {case}: contains={inside} but dist_outside==0 is {zero}"
            ));
        }
        out.contained += usize::from(inside);

        let (alpha, beta) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let composed =
            oracle_outside(&t, &b) + alpha * oracle_inside(&t, &b) + beta * oracle_size(&b);
        let got = dist_box(&t, &b.center, &b.offset, alpha, beta);
        if !close(got, composed, 1e-12) {
            return Err(format!(
                "case {case}: dist_box {got} vs composed {composed}"
            ));
        }
        if !close(
            dist_inside(&t, &b.center, &b.offset),
            oracle_inside(&t, &b),
            1e-12,
        ) || !close(box_size(&b.offset), oracle_size(&b), 1e-12)
        {
            return Err(format!("case {case}: component distance mismatch"));
        }

        let theta = random_params(&mut rng, d);
        let p = ParamView::new(&theta, Layout::new(0, d));
        let m = rng.random_range(1..=5);
        let boxes: Vec<BoxEmbedding> = (0..m).map(|_| random_box(&mut rng, d)).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<BoxEmbedding> = perm.iter().map(|&i| boxes[i].clone()).collect();
        let (a, wa) = intersect(&p, &boxes).map_err(|e| e.to_string())?;
        let (b2, wb) = intersect(&p, &shuffled).map_err(|e| e.to_string())?;
        for i in 0..d {
            if !close(a.center[i], b2.center[i], 1e-12) || !close(a.offset[i], b2.offset[i], 1e-12)
            {
                return Err(format!("case {case}: intersection depends on input order"));
            }
            let min_off = boxes
                .iter()
                .map(|x| x.offset[i])
                .fold(f64::INFINITY, f64::min);
            if a.offset[i] > min_off {
                return Err(format!(
                    "case {case}: offset {} above input minimum {min_off}",
                    a.offset[i]
                ));
            }
        }
        for (j, &i) in perm.iter().enumerate() {
            if !close(wa[i], wb[j], 1e-12) {
                return Err(format!(
                    "case {case}: attention weight moved under permutation"
                ));
            }
        }
        if !close(wa.iter().sum::<f64>(), 1.0, 1e-12) {
            return Err(format!("case {case}: attention weights do not sum to one"));
        }
        out.cases += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------- MDLP

fn entropy2(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}

fn class_counts(rows: &[(f64, usize)], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    for &(_, y) in rows {
        c[y] += 1;
    }
    c
}

/// Exhaustive MDLP: every midpoint between adjacent distinct values is
/// tried, the lowest weighted entropy wins (earliest on ties within 1e-12),
/// the Fayyad–Irani MDL test decides, both halves recurse.
pub fn mdlp_oracle(values: &[f64], labels: &[usize]) -> Vec<f64> {
    fn go(rows: &[(f64, usize)], k: usize, out: &mut Vec<f64>) {
        let n = rows.len();
        if n < 2 {
            return;
        }
        let mut best: Option<(f64, usize)> = None;
        for i in 1..n {
            if rows[i - 1].0 == rows[i].0 {
                continue;
            }
            let e = (i as f64 * entropy2(&class_counts(&rows[..i], k))
                + (n - i) as f64 * entropy2(&class_counts(&rows[i..], k)))
                / n as f64;
            if best.is_none_or(|(b, _)| e < b - 1e-12) {
                best = Some((e, i));
            }
        }
        let Some((e_split, i)) = best else { return };
        let (all, l, r) = (
            class_counts(rows, k),
            class_counts(&rows[..i], k),
            class_counts(&rows[i..], k),
        );
        let kinds = |c: &[usize]| c.iter().filter(|&&x| x > 0).count() as f64;
        let (ent, ent_l, ent_r) = (entropy2(&all), entropy2(&l), entropy2(&r));
        let gain = ent - e_split;
        let delta = (3f64.powf(kinds(&all)) - 2.0).log2()
            - (kinds(&all) * ent - kinds(&l) * ent_l - kinds(&r) * ent_r);
        let threshold = (((n - 1) as f64).log2() + delta) / n as f64;
        if gain > threshold {
            let (lo, hi) = (rows[i - 1].0, rows[i].0);
            let mid = lo + (hi - lo) / 2.0;
            out.push(if mid > lo { mid } else { hi });
            go(&rows[..i], k, out);
            go(&rows[i..], k, out);
        }
    }
    let mut rows: Vec<(f64, usize)> = values.iter().copied().zip(labels.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = labels.iter().max().map_or(1, |m| m + 1);
    let mut out = Vec::new();
    go(&rows, k, &mut out);
    out.sort_by(f64::total_cmp);
    out
}

/// Deterministic fixture family for n ≤ 16: every two-class labelling of
/// distinct values, every tie pattern with every two-class labelling up to
/// n = 8, every three-class labelling up to n = 6, and random inputs with
/// repeated values and up to four classes.
pub fn mdlp_fixtures() -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut out = Vec::new();
    for n in 1..=16usize {
        for mask in 0..(1u32 << n) {
            let values = (0..n).map(|i| i as f64).collect();
            let labels = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            out.push((values, labels));
        }
    }
    for n in 2..=8usize {
        // bit i of `ties` set: value i+1 repeats value i
        for ties in 1..(1u32 << (n - 1)) {
            let mut values = vec![0.0];
            for i in 0..n - 1 {
                let last = values[i];
                values.push(if (ties >> i) & 1 == 1 {
                    last
                } else {
                    last + 1.0
                });
            }
            for mask in 0..(1u32 << n) {
                let labels = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
                out.push((values.clone(), labels));
            }
        }
    }
    for n in 1..=6usize {
        for code in 0..3usize.pow(n as u32) {
            let values = (0..n).map(|i| i as f64 * 0.5).collect();
            let labels = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
            out.push((values, labels));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..4000 {
        let n = rng.random_range(1..=16);
        let domain = rng.random_range(1..=n.max(2));
        let k = rng.random_range(1..=4);
        let values = (0..n)
            .map(|_| rng.random_range(0..domain) as f64 * 1.5 - 3.0)
            .collect();
        let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
        out.push((values, labels));
    }
    out
}

// ---------------------------------------------------------------- explanations

fn branch(
    rng: &mut ChaCha8Rng,
    name: &str,
    scope: FeatureKind,
    class: ValueClass,
    weight: f64,
) -> FeatureBranch {
    let bin = match class {
        ValueClass::Boolean => Bin::Flag(rng.random_bool(0.5)),
        ValueClass::Continuous if rng.random_bool(0.1) => Bin::Missing,
        ValueClass::Continuous => {
            let n_bins = rng.random_range(1..=6);
            Bin::Interval {
                index: rng.random_range(0..n_bins),
                n_bins,
            }
        }
    };
    FeatureBranch {
        feature: name.to_string(),
        scope,
        bin,
        entity: String::new(),
        weight,
        branch_box: BoxEmbedding::point(vec![0.0]),
    }
}

fn softmax(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = s.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

/// A trace with random features, bins and attention, shaped like real
/// inference output: softmax weights per column and at dataset level.
pub fn random_trace(rng: &mut ChaCha8Rng) -> InferenceTrace {
    let reg = FeatureRegistry::builtin();
    let singles: Vec<_> = reg.of_kind(FeatureKind::Single).collect();
    let crosses: Vec<_> = reg.of_kind(FeatureKind::Cross).collect();
    let n_cross = rng.random_range(0..=8);
    let ds = softmax(rng, 2 + n_cross);
    let mut columns = Vec::new();
    for (c, &dw) in ["Column A", "Column B"].iter().zip(&ds) {
        let m = rng.random_range(1..=12);
        let picks: Vec<_> = singles.choose_multiple(rng, m).cloned().collect();
        let w = softmax(rng, m);
        columns.push(ColumnTrace {
            column: c.to_string(),
            branches: picks
                .iter()
                .zip(&w)
                .map(|(f, &w)| branch(rng, &f.name, FeatureKind::Single, f.value, w))
                .collect(),
            column_box: BoxEmbedding::point(vec![0.0]),
            axis_box: BoxEmbedding::point(vec![0.0]),
            dataset_weight: dw,
        });
    }
    let picks: Vec<_> = crosses.choose_multiple(rng, n_cross).cloned().collect();
    let cross = picks
        .iter()
        .zip(&ds[2..])
        .map(|(f, &w)| branch(rng, &f.name, FeatureKind::Cross, f.value, w))
        .collect();
    InferenceTrace {
        columns,
        cross,
        dataset_box: BoxEmbedding::point(vec![0.0]),
        type_box: BoxEmbedding::point(vec![0.0]),
    }
}

/// Path products computed directly from the trace.
fn oracle_path_weight(trace: &InferenceTrace, name: &str, column: Option<&str>) -> f64 {
    let mut total = 0.0;
    let mut hit = 0.0;
    for c in &trace.columns {
        for b in &c.branches {
            let w = b.weight * c.dataset_weight;
            total += w;
            if column == Some(c.column.as_str()) && b.feature == name {
                hit += w;
            }
        }
    }
    for b in &trace.cross {
        total += b.weight;
        if column.is_none() && b.feature == name {
            hit += b.weight;
        }
    }
    hit / total
}

/// Checks one explanation against its trace; returns the first violation.
pub fn audit_explanation(trace: &InferenceTrace, e: &Explanation) -> Result<(), String> {
    let reg = FeatureRegistry::builtin();
    if e.features.len() > 4 {
        return Err(format!("{} features", e.features.len()));
    }
    let text = e.text.to_lowercase();
    for f in reg.all().iter().filter(|f| f.blocklisted) {
        let names = [
            f.name.to_lowercase(),
            f.name.replace('_', " ").to_lowercase(),
        ];
        if names.iter().any(|n| text.contains(n.as_str())) {
            return Err(format!("blocklisted {} in {:?}", f.name, e.text));
        }
    }
    let mut false_flags: BTreeSet<(&str, Option<&str>)> = BTreeSet::new();
    for c in &trace.columns {
        for b in &c.branches {
            if b.bin == Bin::Flag(false) {
                false_flags.insert((b.feature.as_str(), Some(c.column.as_str())));
            }
        }
    }
    for b in &trace.cross {
        if b.bin == Bin::Flag(false) {
            false_flags.insert((b.feature.as_str(), None));
        }
    }
    for f in &e.features {
        let info = reg.get(&f.name).ok_or("unknown feature")?;
        if info.blocklisted {
            return Err(format!("blocklisted feature {} selected", f.name));
        }
        if false_flags.contains(&(f.name.as_str(), f.column.as_deref())) {
            return Err(format!("negative boolean {} selected", f.name));
        }
        let expected = oracle_path_weight(trace, &f.name, f.column.as_deref());
        if (f.path_weight - expected).abs() > 1e-12 {
            return Err(format!(
                "{}: path weight {} vs {}",
                f.name, f.path_weight, expected
            ));
        }
    }
    if !e.features.is_empty() {
        let sum: f64 = e.features.iter().map(|f| f.importance).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("importances sum to {sum}"));
        }
    }
    Ok(())
}

pub fn explanation_audit(n: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut explained = 0;
    for i in 0..n {
        let trace = random_trace(&mut rng);
        let m = rng.random_range(1..=2);
        let types: Vec<ChartType> = ChartType::ALL
            .choose_multiple(&mut rng, m)
            .copied()
            .collect();
        let e = explain_trace(&types, &trace, FeatureRegistry::builtin());
        audit_explanation(&trace, &e).map_err(|m| format!("trace {i}: {m}"))?;
        explained += usize::from(!e.low_confidence);
    }
    Ok(explained)
}

// ---------------------------------------------------------------- pipeline

pub struct PipelineRun {
    pub bins: DiscretizationMap,
    pub model: Model,
    pub train_report: TrainReport,
    pub test: Corpus,
    pub eval: Evaluation,
}

/// Split, optionally plant signature groups, extract, fit bins, build the
/// graph, train and evaluate on the held-out side.
pub fn run_pipeline(
    corpus: &Corpus,
    split_seed: u64,
    hyper: &Hyperparams,
    options: &ModelOptions,
    plant: Option<&Rulebook>,
) -> PipelineRun {
    let (mut tr, mut te) = split_corpus(corpus, 2.0 / 3.0, split_seed).unwrap();
    if let Some(rb) = plant {
        tr = plant_signature_groups(&tr, rb).unwrap();
        te = plant_signature_groups(&te, rb).unwrap();
    }
    let dump = FeatureDump::from_corpus(&tr).unwrap();
    let bins = fit_all(&dump).unwrap();
    let kg = build_graph(&dump, &bins, GraphOptions::default()).unwrap();
    let (model, train_report) = train(&kg, hyper, options).unwrap();
    let inference = InferenceOptions {
        use_cross_features: options.use_cross_features,
        ..Default::default()
    };
    let eval = evaluate(&model, &bins, &te, &inference, plant).unwrap();
    PipelineRun {
        bins,
        model,
        train_report,
        test: te,
        eval,
    }
}
