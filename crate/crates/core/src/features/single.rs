//! Single-column features.
//!
//! Applicability: distribution features (moments, quantiles, outliers,
//! dispersion, normality) need a quantitative column. Order features use
//! numeric keys for quantitative and temporal columns and string order for
//! categorical ones. `lin_space`/`log_space` need a numeric key and n ≥ 3.
//! Everything else applies to every column.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::names::{self, TIME_WORDS};
use super::stats::{self, finite};
use super::{FeatureKind, FeatureMap, MapBuilder};
use crate::corpus::{Column, DataType, GeneralType};

/// Coefficient of variation of successive differences below which a
/// sequence counts as evenly spaced.
pub const LIN_SPACE_TOL: f64 = 1e-3;

pub fn extract_single(column: &Column) -> FeatureMap {
    let mut f = MapBuilder::new(FeatureKind::Single);
    let present: Vec<&str> = column.present().into_iter().map(str::trim).collect();
    let n_present = present.len();

    // counts and frequency-based features over the trimmed text
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for v in &present {
        *freq.entry(v).or_default() += 1;
    }
    let n_unique = freq.len();
    f.set("num_unique_elements", n_unique);
    if n_present > 0 {
        f.set("unique_percent", n_unique as f64 / n_present as f64);
        f.set("is_unique", n_unique == n_present);
        let mode = freq.values().copied().max().unwrap_or(0);
        f.set("percent_of_mode", mode as f64 / n_present as f64);
    }
    if let Some((h, g)) = stats::entropy_and_gini(present.iter().copied()) {
        f.set("entropy", h);
        f.set("gini", g);
    }

    let length = column.values.len();
    let n_none = length - n_present;
    f.set("length", length);
    f.set("num_none", n_none);
    f.set("has_none", n_none > 0);
    if length > 0 {
        f.set("percentage_none", n_none as f64 / length as f64);
    }

    let lens: Vec<f64> = present.iter().map(|v| v.chars().count() as f64).collect();
    f.set("mean_value_length", stats::mean(&lens));
    f.set("median_value_length", stats::median(&lens));
    f.set("std_length_of_value", stats::std_dev(&lens));
    f.set("min_length_of_value", lens.iter().copied().reduce(f64::min));
    f.set("max_length_of_value", lens.iter().copied().reduce(f64::max));

    // order features
    let keys: Option<Vec<f64>> = match column.general_type {
        GeneralType::Categorical => None,
        _ => Some(column.numeric().into_iter().flatten().collect()),
    };
    let (sortedness, ascending, descending) = match &keys {
        Some(k) => (
            kendall_sortedness(k),
            is_ordered(k, |a, b| a.partial_cmp(b)),
            is_ordered(k, |a, b| b.partial_cmp(a)),
        ),
        None => (
            adjacent_sortedness(&present),
            is_ordered(&present, |a, b| Some(a.cmp(b))),
            is_ordered(&present, |a, b| Some(b.cmp(a))),
        ),
    };
    f.set("sortedness", sortedness);
    f.set("is_sorted", ascending);
    f.set("is_monotonic", ascending || descending);
    if let Some(k) = &keys {
        let lin = spacing_coefficient(k);
        f.set("lin_space_seq_coef", lin);
        f.set("is_lin_space", lin.map(|c| c < LIN_SPACE_TOL));
        let logs: Option<Vec<f64>> = k.iter().map(|&x| (x > 0.0).then(|| x.ln())).collect();
        let log = logs.and_then(|l| spacing_coefficient(&l));
        f.set("log_space_seq_coef", log);
        f.set("is_log_space", log.map(|c| c < LIN_SPACE_TOL));
    }

    if column.general_type == GeneralType::Quantitative {
        let xs: Vec<f64> = column.numeric().into_iter().flatten().collect();
        distribution_features(&mut f, &xs);
    }

    name_features(&mut f, &column.name);

    f.set("data_type_is_string", column.data_type == DataType::String);
    f.set(
        "data_type_is_integer",
        column.data_type == DataType::Integer,
    );
    f.set(
        "data_type_is_decimal",
        column.data_type == DataType::Decimal,
    );
    f.set(
        "data_type_is_datetime",
        column.data_type == DataType::Datetime,
    );
    f.set(
        "general_type_is_c",
        column.general_type == GeneralType::Categorical,
    );
    f.set(
        "general_type_is_q",
        column.general_type == GeneralType::Quantitative,
    );
    f.set(
        "general_type_is_t",
        column.general_type == GeneralType::Temporal,
    );

    f.finish()
}

fn distribution_features(f: &mut MapBuilder, xs: &[f64]) {
    let s = stats::sorted(xs);
    let mean = stats::mean(xs);
    let median = stats::median(xs);
    let std = stats::std_dev(xs);
    let min = s.first().copied();
    let max = s.last().copied();
    let range = min.zip(max).map(|(lo, hi)| hi - lo);
    let q25 = stats::quantile_sorted(&s, 0.25);
    let q75 = stats::quantile_sorted(&s, 0.75);

    f.set("min", min);
    f.set("max", max);
    f.set("mean", mean);
    f.set("median", median);
    f.set("std", std);
    f.set("var", stats::variance(xs));
    f.set("range", range);
    f.set("q25", q25);
    f.set("q75", q75);

    let nonzero = |d: f64| (d != 0.0).then_some(d);
    let span = range.and_then(nonzero);
    f.set(
        "normalized_mean",
        mean.zip(min).zip(span).map(|((m, lo), r)| (m - lo) / r),
    );
    f.set(
        "normalized_median",
        median.zip(min).zip(span).map(|((m, lo), r)| (m - lo) / r),
    );
    let abs_mean = mean.map(f64::abs).and_then(nonzero);
    f.set("normalized_range", range.zip(abs_mean).map(|(r, m)| r / m));
    f.set("coeff_var", std.zip(abs_mean).map(|(s, m)| s / m));
    f.set(
        "quant_coeff_disp",
        q25.zip(q75)
            .and_then(|(a, b)| nonzero(a + b).map(|d| (b - a) / d)),
    );
    f.set(
        "med_abs_dev",
        median.and_then(|m| {
            let dev: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
            stats::median(&dev)
        }),
    );
    f.set(
        "avg_abs_dev",
        mean.and_then(|m| {
            let dev: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
            stats::mean(&dev)
        }),
    );

    f.set("skewness", stats::standardized_moment(xs, 3));
    f.set(
        "kurtosis",
        stats::standardized_moment(xs, 4).map(|k| k - 3.0),
    );
    for k in 5..=10 {
        f.set(&format!("moment_{k}"), stats::standardized_moment(xs, k));
    }

    if let Some(o) = stats::outlier_fractions(xs) {
        for (name, p) in [
            ("15iqr", o.p_1_5iqr),
            ("3iqr", o.p_3iqr),
            ("3std", o.p_3std),
            ("1_99", o.p_1_99),
        ] {
            f.set(&format!("percent_outliers_{name}"), p);
            f.set(&format!("has_outliers_{name}"), p > 0.0);
        }
    }

    if let Some((k2, p)) = stats::normality_test(xs) {
        f.set("normality_statistic", k2);
        f.set("normality_p", p);
        f.set("is_normal_1", p < 0.01);
        f.set("is_normal_5", p < 0.05);
    }
}

fn name_features(f: &mut MapBuilder, name: &str) {
    let toks = names::tokens(name);
    let has_tok = |t: &str| toks.iter().any(|x| x == t);
    f.set("number_of_words_in_name", names::words(name).len());
    f.set(
        "number_of_uppercase_char",
        name.chars().filter(|c| c.is_uppercase()).count(),
    );
    f.set("name_length", name.chars().count());
    f.set(
        "field_name_length",
        name.chars().filter(|c| !c.is_whitespace()).count(),
    );
    f.set(
        "first_char_upper_name",
        name.chars().next().is_some_and(char::is_uppercase),
    );
    f.set("x_in_name", has_tok("x"));
    f.set("y_in_name", has_tok("y"));
    f.set("id_in_name", has_tok("id"));
    f.set(
        "time_in_name",
        toks.iter().any(|t| TIME_WORDS.contains(&t.as_str())),
    );
    f.set("digit_in_name", name.chars().any(|c| c.is_ascii_digit()));
    f.set("space_in_name", name.chars().any(char::is_whitespace));
    f.set("dollar_in_name", name.contains('$'));
    f.set("pounds_in_name", name.contains('£'));
    f.set("euro_in_name", name.contains('€'));
    f.set("yen_in_name", name.contains('¥'));
}

/// `|C − D| / (C + D)` over all position pairs, where C and D count
/// concordant and discordant pairs with respect to position; tied values
/// are ignored. Constant or single-value input scores 1.
pub fn kendall_sortedness(xs: &[f64]) -> f64 {
    let (mut c, mut d) = (0u64, 0u64);
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            match b.partial_cmp(a) {
                Some(Ordering::Greater) => c += 1,
                Some(Ordering::Less) => d += 1,
                _ => {}
            }
        }
    }
    if c + d == 0 {
        1.0
    } else {
        c.abs_diff(d) as f64 / (c + d) as f64
    }
}

/// Larger of the fractions of non-decreasing and non-increasing adjacent
/// pairs.
pub fn adjacent_sortedness<T: Ord>(xs: &[T]) -> f64 {
    if xs.len() < 2 {
        return 1.0;
    }
    let pairs = xs.len() - 1;
    let up = xs.windows(2).filter(|w| w[0] <= w[1]).count();
    let down = xs.windows(2).filter(|w| w[0] >= w[1]).count();
    up.max(down) as f64 / pairs as f64
}

fn is_ordered<T>(xs: &[T], cmp: impl Fn(&T, &T) -> Option<Ordering>) -> bool {
    xs.windows(2)
        .all(|w| matches!(cmp(&w[0], &w[1]), Some(Ordering::Less | Ordering::Equal)))
}

/// Coefficient of variation of successive differences; needs n ≥ 3 and a
/// non-zero mean step.
pub fn spacing_coefficient(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 {
        return None;
    }
    let diffs: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let m = stats::mean(&diffs)?;
    if m == 0.0 {
        return None;
    }
    finite(stats::std_dev(&diffs)? / m.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureRegistry, FeatureValue};

    fn col(name: &str, values: &[&str]) -> Column {
        Column::from_strs(name, values).unwrap()
    }

    fn real(m: &FeatureMap, k: &str) -> f64 {
        m[k].as_real().unwrap_or_else(|| panic!("{k} = {:?}", m[k]))
    }

    fn boolean(m: &FeatureMap, k: &str) -> bool {
        m[k].as_bool().unwrap_or_else(|| panic!("{k} = {:?}", m[k]))
    }

    #[test]
    fn increasing_integers() {
        let m = extract_single(&col("v", &["1", "2", "3", "4"]));
        assert!(boolean(&m, "is_sorted"));
        assert!(boolean(&m, "is_monotonic"));
        assert!(boolean(&m, "is_unique"));
        assert_eq!(real(&m, "num_unique_elements"), 4.0);
        assert_eq!(real(&m, "sortedness"), 1.0);
        assert!(boolean(&m, "is_lin_space"));
        assert_eq!(real(&m, "lin_space_seq_coef"), 0.0);
    }

    #[test]
    fn two_equiprobable_strings() {
        let m = extract_single(&col("v", &["a", "a", "b", "b"]));
        assert!((real(&m, "entropy") - 2f64.ln()).abs() < 1e-12);
        assert!((real(&m, "entropy") - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(real(&m, "gini"), 0.5);
        assert_eq!(real(&m, "percent_of_mode"), 0.5);
        assert!(m["skewness"].is_missing());
        assert!(m["lin_space_seq_coef"].is_missing());
        assert!(boolean(&m, "general_type_is_c"));
    }

    #[test]
    fn name_inspection() {
        let m = extract_single(&col("Year2017", &["1", "2"]));
        assert!(boolean(&m, "digit_in_name"));
        assert!(boolean(&m, "first_char_upper_name"));
        assert_eq!(real(&m, "name_length"), 8.0);
        assert!(boolean(&m, "time_in_name"));
        assert!(!boolean(&m, "space_in_name"));

        let m = extract_single(&col("Price ($)", &["1"]));
        assert!(boolean(&m, "dollar_in_name"));
        assert_eq!(real(&m, "name_length"), 9.0);
        assert_eq!(real(&m, "field_name_length"), 8.0);
        assert_eq!(real(&m, "number_of_words_in_name"), 1.0);

        let m = extract_single(&col("userId", &["1"]));
        assert!(boolean(&m, "id_in_name"));
        assert!(!boolean(&m, "x_in_name"));
    }

    #[test]
    fn covers_registry_exactly() {
        let m = extract_single(&col("v", &["1.5", "", "2"]));
        let names: Vec<&str> = FeatureRegistry::builtin()
            .of_kind(FeatureKind::Single)
            .map(|f| f.name.as_str())
            .collect();
        assert_eq!(m.len(), 80);
        for n in names {
            assert!(m.contains_key(n), "{n}");
        }
    }

    #[test]
    fn missing_cells() {
        let m = extract_single(&col("v", &["1", "null", "3", ""]));
        assert_eq!(real(&m, "num_none"), 2.0);
        assert_eq!(real(&m, "percentage_none"), 0.5);
        assert!(boolean(&m, "has_none"));
        assert_eq!(real(&m, "length"), 4.0);
        assert_eq!(real(&m, "mean"), 2.0);
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        for values in [
            &["5"][..],
            &["5", "5", "5", "5", "5", "5", "5", "5"],
            &["x"],
        ] {
            let m = extract_single(&col("v", values));
            for (k, v) in &m {
                if let FeatureValue::Real(x) = v {
                    assert!(x.is_finite(), "{k}");
                }
            }
        }
        let m = extract_single(&col("v", &["5", "5", "5", "5"]));
        assert_eq!(real(&m, "percent_outliers_3std"), 0.0);
        assert!(m["skewness"].is_missing());
        assert!(m["normalized_mean"].is_missing());
    }

    #[test]
    fn outlier_example() {
        let m = extract_single(&col("v", &["1", "2", "3", "100"]));
        assert_eq!(real(&m, "percent_outliers_15iqr"), 0.25);
        assert!(boolean(&m, "has_outliers_15iqr"));
    }

    #[test]
    fn temporal_order_uses_time() {
        let m = extract_single(&col("d", &["2020-01-03", "2020-01-02", "2020-01-01"]));
        assert!(!boolean(&m, "is_sorted"));
        assert!(boolean(&m, "is_monotonic"));
        assert!(boolean(&m, "is_lin_space"));
        assert!(m["mean"].is_missing());
    }

    /// Brute-force Kendall tau-a over index, absolute value, with ties
    /// contributing zero to both numerator and denominator.
    #[test]
    fn sortedness_oracle() {
        let xs = [3.0, 1.0, 2.0, 2.0, 5.0];
        let mut num = 0i64;
        let mut den = 0i64;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if i < j && xs[i] != xs[j] {
                    num += if xs[j] > xs[i] { 1 } else { -1 };
                    den += 1;
                }
            }
        }
        assert_eq!(kendall_sortedness(&xs), num.abs() as f64 / den as f64);
        assert_eq!(adjacent_sortedness(&["a", "c", "b", "d"]), 2.0 / 3.0);
    }
}
