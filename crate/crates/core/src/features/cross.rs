//! Cross-column features.
//!
//! Statistical tests run only when both columns are quantitative or
//! temporal; paired quantities use rows where both cells are present.
//! The chi-squared test runs for every type combination, binning numeric
//! columns into quartiles. `linregress_err` regresses the second column on
//! the first and is therefore order-dependent; every other feature is
//! symmetric.

use std::collections::{BTreeSet, HashMap};

use super::names;
use super::stats;
use super::{FeatureKind, FeatureMap, MapBuilder};
use crate::corpus::{Column, GeneralType};
use crate::error::{Error, Result};

pub const SIGNIFICANCE: f64 = 0.05;
pub const KMEANS_SEED: u64 = 0;

pub fn extract_cross(a: &Column, b: &Column) -> Result<FeatureMap> {
    if a.values.len() != b.values.len() {
        return Err(Error::LengthMismatch(a.values.len(), b.values.len()));
    }
    let mut f = MapBuilder::new(FeatureKind::Cross);

    let pa: Vec<&str> = a.present().into_iter().map(str::trim).collect();
    let pb: Vec<&str> = b.present().into_iter().map(str::trim).collect();

    // shared values
    let mut count_a: HashMap<&str, usize> = HashMap::new();
    for v in &pa {
        *count_a.entry(v).or_default() += 1;
    }
    let mut count_b: HashMap<&str, usize> = HashMap::new();
    for v in &pb {
        *count_b.entry(v).or_default() += 1;
    }
    let shared: usize = count_a
        .iter()
        .map(|(v, &n)| n.min(count_b.get(v).copied().unwrap_or(0)))
        .sum();
    f.set("num_shared_elements", shared);
    f.set("has_shared_elements", shared > 0);
    let longest = pa.len().max(pb.len());
    if longest > 0 {
        f.set("percent_shared_elements", shared as f64 / longest as f64);
    }
    let ua: BTreeSet<&str> = count_a.keys().copied().collect();
    let ub: BTreeSet<&str> = count_b.keys().copied().collect();
    let shared_unique = ua.intersection(&ub).count();
    let union_unique = ua.union(&ub).count();
    f.set("num_shared_unique_elements", shared_unique);
    f.set("has_shared_unique_elements", shared_unique > 0);
    if union_unique > 0 {
        f.set(
            "percent_shared_unique_elements",
            shared_unique as f64 / union_unique as f64,
        );
    }
    let trimmed = |c: &Column| -> Vec<String> {
        c.values
            .iter()
            .map(|v| {
                if crate::corpus::is_missing(v) {
                    String::new()
                } else {
                    v.trim().to_string()
                }
            })
            .collect()
    };
    f.set("identical", trimmed(a) == trimmed(b));
    f.set("identical_unique", ua == ub);

    // names
    let ns = names::name_similarity(&a.name, &b.name);
    f.set("edit_distance", ns.edit_distance);
    f.set("normalized_edit_distance", ns.normalized_edit_distance);
    f.set("num_shared_words", ns.num_shared_words);
    f.set("percent_shared_words", ns.percent_shared_words);
    f.set("has_shared_words", ns.num_shared_words > 0);

    // type pair
    let (ta, tb) = (a.general_type, b.general_type);
    let pair = |x: GeneralType, y: GeneralType| (ta == x && tb == y) || (ta == y && tb == x);
    use GeneralType::{Categorical as C, Quantitative as Q, Temporal as T};
    f.set("categorical_categorical", pair(C, C));
    f.set("categorical_numerical", pair(C, Q));
    f.set("numerical_numerical", pair(Q, Q));
    f.set("time_categorical", pair(T, C));
    f.set("time_numerical", pair(T, Q));
    f.set("time_time", pair(T, T));

    let na = a.numeric();
    let nb = b.numeric();
    let numeric = |t: GeneralType| t != C;

    // range overlap
    if ta == tb && numeric(ta) {
        let ra = bounds(na.iter().flatten().copied());
        let rb = bounds(nb.iter().flatten().copied());
        if let (Some((lo_a, hi_a)), Some((lo_b, hi_b))) = (ra, rb) {
            let overlap = (hi_a.min(hi_b) - lo_a.max(lo_b)).max(0.0);
            let union = hi_a.max(hi_b) - lo_a.min(lo_b);
            let p = if union == 0.0 { 1.0 } else { overlap / union };
            f.set("percent_range_overlap", p);
            f.set("has_range_overlap", p > 0.0);
        }
    }

    // rows where both cells are present
    let rows: Vec<usize> = (0..a.values.len())
        .filter(|&i| {
            !crate::corpus::is_missing(&a.values[i]) && !crate::corpus::is_missing(&b.values[i])
        })
        .collect();

    let category = |c: &Column, nums: &[Option<f64>]| -> Vec<String> {
        if c.general_type == C {
            rows.iter()
                .map(|&i| c.values[i].trim().to_string())
                .collect()
        } else {
            let xs: Vec<f64> = rows.iter().map(|&i| nums[i].unwrap_or(f64::NAN)).collect();
            stats::quartile_bins(&xs)
                .into_iter()
                .map(|q| q.to_string())
                .collect()
        }
    };
    let cats: Vec<(String, String)> = category(a, &na).into_iter().zip(category(b, &nb)).collect();

    let mut two = stats::TwoSampleStats::default();
    if numeric(ta) && numeric(tb) {
        let ma: Vec<f64> = na.iter().flatten().copied().collect();
        let mb: Vec<f64> = nb.iter().flatten().copied().collect();
        let paired: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|&i| Some((na[i]?, nb[i]?)))
            .collect();
        two = stats::two_sample_stats_with(&ma, &mb, &paired, &cats);

        let xs: Vec<f64> = paired.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = paired.iter().map(|p| p.1).collect();
        let pts: Vec<(f64, f64)> = stats::standardize(&xs)
            .into_iter()
            .zip(stats::standardize(&ys))
            .collect();
        for k in [3, 5, 6] {
            f.set(
                &format!("kmeans_{k}_avg_err"),
                stats::kmeans_avg_err(&pts, k, KMEANS_SEED),
            );
        }
    } else if let Some((c, p)) = stats::chi2_independence(&cats) {
        two.chi2_statistic = Some(c);
        two.chi2_p = Some(p);
    }
    f.set("ks_statistic", two.ks_statistic);
    f.set("ks_p", two.ks_p);
    f.set("correlation_value", two.correlation_value);
    f.set("correlation_p", two.correlation_p);
    f.set("linregress_err", two.linregress_err);
    f.set("linregress_p", two.linregress_p);
    f.set("one_way_anova_statistic", two.one_way_anova_statistic);
    f.set("one_way_anova_p", two.one_way_anova_p);
    f.set("chi2_statistic", two.chi2_statistic);
    f.set("chi2_p", two.chi2_p);
    let sig = |p: Option<f64>| p.map(|p| p < SIGNIFICANCE);
    f.set("ks_significant_005", sig(two.ks_p));
    f.set("correlation_significant_005", sig(two.correlation_p));
    f.set("linregress_significant_005", sig(two.linregress_p));
    f.set("one_way_anova_significant_005", sig(two.one_way_anova_p));
    f.set("chi2_significant_005", sig(two.chi2_p));

    let ra: Vec<&str> = rows.iter().map(|&i| a.values[i].trim()).collect();
    let rb: Vec<&str> = rows.iter().map(|&i| b.values[i].trim()).collect();
    if !rows.is_empty() {
        f.set("nestedness", nestedness(&ra, &rb).max(nestedness(&rb, &ra)));
    }

    Ok(f.finish())
}

fn bounds(xs: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    xs.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// Fraction of distinct `parent` values whose rows all share one `child`
/// value.
pub fn nestedness(parent: &[&str], child: &[&str]) -> f64 {
    let mut groups: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for (p, c) in parent.iter().zip(child) {
        groups.entry(p).or_default().insert(c);
    }
    if groups.is_empty() {
        return 0.0;
    }
    let nested = groups.values().filter(|g| g.len() == 1).count();
    nested as f64 / groups.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureRegistry;

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
    fn exact_line() {
        let m = extract_cross(&col("a", &["1", "2", "3"]), &col("b", &["2", "4", "6"])).unwrap();
        assert!((real(&m, "correlation_value") - 1.0).abs() < 1e-12);
        assert!(real(&m, "linregress_err").abs() < 1e-12);
        assert!(boolean(&m, "numerical_numerical"));
    }

    #[test]
    fn type_flags_are_one_hot() {
        let m = extract_cross(&col("a", &["u", "v"]), &col("b", &["1", "2"])).unwrap();
        let flags = [
            "categorical_categorical",
            "categorical_numerical",
            "numerical_numerical",
            "time_categorical",
            "time_numerical",
            "time_time",
        ];
        for flag in flags {
            assert_eq!(boolean(&m, flag), flag == "categorical_numerical", "{flag}");
        }
        assert!(m["correlation_value"].is_missing());
        assert!(m["percent_range_overlap"].is_missing());
    }

    #[test]
    fn identical_columns() {
        let vals: Vec<String> = (1..=10).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
        let m = extract_cross(&col("a", &refs), &col("b", &refs)).unwrap();
        assert!(boolean(&m, "identical"));
        assert!(boolean(&m, "identical_unique"));
        assert_eq!(real(&m, "percent_shared_unique_elements"), 1.0);
        assert_eq!(real(&m, "percent_shared_elements"), 1.0);
        assert_eq!(real(&m, "percent_range_overlap"), 1.0);
        assert_eq!(real(&m, "ks_statistic"), 0.0);
        assert_eq!(real(&m, "nestedness"), 1.0);
    }

    #[test]
    fn covers_registry_exactly() {
        let m = extract_cross(&col("a", &["1", "x"]), &col("b", &["1", "2"])).unwrap();
        assert_eq!(m.len(), 40);
        for info in FeatureRegistry::builtin().of_kind(FeatureKind::Cross) {
            assert!(m.contains_key(&info.name), "{}", info.name);
        }
    }

    #[test]
    fn length_mismatch() {
        let r = extract_cross(&col("a", &["1"]), &col("b", &["1", "2"]));
        assert!(matches!(r, Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn nestedness_examples() {
        // each country maps to one continent; continents hold several
        let country = ["fr", "de", "jp", "fr"];
        let continent = ["eu", "eu", "as", "eu"];
        assert_eq!(nestedness(&country, &continent), 1.0);
        assert_eq!(nestedness(&continent, &country), 0.5);
    }

    #[test]
    fn range_overlap() {
        let m = extract_cross(&col("a", &["0", "10"]), &col("b", &["5", "20"])).unwrap();
        assert_eq!(real(&m, "percent_range_overlap"), 0.25);
        assert!(boolean(&m, "has_range_overlap"));
        let m = extract_cross(&col("a", &["0", "1"]), &col("b", &["5", "6"])).unwrap();
        assert_eq!(real(&m, "percent_range_overlap"), 0.0);
        assert!(!boolean(&m, "has_range_overlap"));
    }
}
