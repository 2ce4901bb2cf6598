//! Numeric building blocks for feature extraction.
//!
//! Quantiles use linear interpolation between order statistics (the
//! "type 7" rule): `h = (n - 1) p`, `q = x[floor h] + frac(h) (x[ceil h] - x[floor h])`.
//! Standard deviations are population (divide by `n`) unless stated.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

/// Maps non-finite results to `None`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    finite(xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn variance(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    finite(xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64)
}

pub fn std_dev(xs: &[f64]) -> Option<f64> {
    variance(xs).map(f64::sqrt)
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    finite(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(xs: &[f64]) -> Option<f64> {
    quantile_sorted(&sorted(xs), 0.5)
}

/// Standardized central moment of order `k` (population normalisation).
/// `None` for constant data.
pub fn standardized_moment(xs: &[f64], k: i32) -> Option<f64> {
    let m = mean(xs)?;
    let sd = std_dev(xs)?;
    if sd == 0.0 {
        return None;
    }
    let n = xs.len() as f64;
    finite(xs.iter().map(|x| ((x - m) / sd).powi(k)).sum::<f64>() / n)
}

/// Shannon entropy (natural log) and Gini impurity of the value frequencies.
pub fn entropy_and_gini<T: Eq + Hash>(values: impl IntoIterator<Item = T>) -> Option<(f64, f64)> {
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut n = 0usize;
    for v in values {
        *counts.entry(v).or_default() += 1;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let mut freqs: Vec<usize> = counts.into_values().collect();
    freqs.sort_unstable();
    let (mut h, mut sq) = (0.0, 0.0);
    for c in freqs {
        let p = c as f64 / n as f64;
        h -= p * p.ln();
        sq += p * p;
    }
    Some((h.max(0.0), (1.0 - sq).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierFractions {
    pub p_1_5iqr: f64,
    pub p_3iqr: f64,
    pub p_3std: f64,
    pub p_1_99: f64,
}

/// Minimum sample size for outlier fractions.
pub const OUTLIER_MIN_N: usize = 4;

/// Fractions of points strictly outside `[Q1 - k IQR, Q3 + k IQR]` for
/// `k = 1.5, 3`, outside `mean ± 3 sd`, and outside the `[1%, 99%]`
/// quantiles.
pub fn outlier_fractions(xs: &[f64]) -> Option<OutlierFractions> {
    if xs.len() < OUTLIER_MIN_N {
        return None;
    }
    let s = sorted(xs);
    let q1 = quantile_sorted(&s, 0.25)?;
    let q3 = quantile_sorted(&s, 0.75)?;
    let iqr = q3 - q1;
    let m = mean(xs)?;
    let sd = std_dev(xs)?;
    let p01 = quantile_sorted(&s, 0.01)?;
    let p99 = quantile_sorted(&s, 0.99)?;
    let n = xs.len() as f64;
    let frac = |lo: f64, hi: f64| xs.iter().filter(|&&x| x < lo || x > hi).count() as f64 / n;
    Some(OutlierFractions {
        p_1_5iqr: frac(q1 - 1.5 * iqr, q3 + 1.5 * iqr),
        p_3iqr: frac(q1 - 3.0 * iqr, q3 + 3.0 * iqr),
        p_3std: frac(m - 3.0 * sd, m + 3.0 * sd),
        p_1_99: frac(p01, p99),
    })
}

/// D'Agostino–Pearson omnibus test. Returns `(K², p)`; needs `n >= 8` and
/// non-constant data.
pub fn normality_test(xs: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 8 {
        return None;
    }
    let m = mean(xs)?;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    if m2 == 0.0 {
        return None;
    }
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);

    // skewness test
    let mut y = skew * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    if y == 0.0 {
        y = 1.0;
    }
    let z_skew = delta * (y / alpha + ((y / alpha).powi(2) + 1.0).sqrt()).ln();

    // kurtosis test
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (kurt - e) / var_b2.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let z_kurt = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();

    let k2 = z_skew * z_skew + z_kurt * z_kurt;
    // chi-squared(2) survival function
    Some((finite(k2)?, finite((-k2 / 2.0).exp())?))
}

/// Statistics over two numeric samples. Paired fields (correlation,
/// regression) use `paired`; the distributional tests use the two
/// marginal samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoSampleStats {
    pub ks_statistic: Option<f64>,
    pub ks_p: Option<f64>,
    pub correlation_value: Option<f64>,
    pub correlation_p: Option<f64>,
    pub slope: Option<f64>,
    pub linregress_err: Option<f64>,
    pub linregress_p: Option<f64>,
    pub one_way_anova_statistic: Option<f64>,
    pub one_way_anova_p: Option<f64>,
    pub chi2_statistic: Option<f64>,
    pub chi2_p: Option<f64>,
}

/// Minimum paired sample size for correlation and regression.
pub const CORRELATION_MIN_N: usize = 3;

/// Two-sample statistics for numeric data. `a` and `b` are the marginal
/// samples, paired element-wise when both have the same length.
/// The chi-squared test bins each sample at its quartiles first.
pub fn two_sample_stats(a: &[f64], b: &[f64]) -> TwoSampleStats {
    let paired: Vec<(f64, f64)> = if a.len() == b.len() {
        a.iter().copied().zip(b.iter().copied()).collect()
    } else {
        Vec::new()
    };
    let qa = quartile_bins(a);
    let qb = quartile_bins(b);
    let binned: Vec<(usize, usize)> = if a.len() == b.len() {
        qa.into_iter().zip(qb).collect()
    } else {
        Vec::new()
    };
    two_sample_stats_with(a, b, &paired, &binned)
}

/// As [`two_sample_stats`] with explicit pairing and chi-squared categories.
pub fn two_sample_stats_with<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(
    a: &[f64],
    b: &[f64],
    paired: &[(f64, f64)],
    categories: &[(A, B)],
) -> TwoSampleStats {
    let mut out = TwoSampleStats::default();
    if let Some((d, p)) = ks_two_sample(a, b) {
        out.ks_statistic = Some(d);
        out.ks_p = Some(p);
    }
    if let Some(reg) = linregress(paired) {
        out.correlation_value = Some(reg.r);
        out.correlation_p = reg.p;
        out.slope = Some(reg.slope);
        out.linregress_err = reg.stderr;
        out.linregress_p = reg.p;
    }
    if let Some((f, p)) = one_way_anova(&[a, b]) {
        out.one_way_anova_statistic = Some(f);
        out.one_way_anova_p = Some(p);
    }
    if let Some((c, p)) = chi2_independence(categories) {
        out.chi2_statistic = Some(c);
        out.chi2_p = Some(p);
    }
    out
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value
/// `Q_KS((√nₑ + 0.12 + 0.11/√nₑ) D)`, `nₑ = nm/(n+m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let sa = sorted(a);
    let sb = sorted(b);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let p = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    Some((d, p))
}

/// Kolmogorov distribution survival function.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev = 0.0f64;
    for j in 1..=200 {
        let term = sign * 2.0 * (a2 * (j * j) as f64).exp();
        sum += term;
        if term.abs() <= 1e-12 * prev.abs() || term.abs() <= 1e-300 {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        prev = term;
    }
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
    pub stderr: Option<f64>,
    pub p: Option<f64>,
}

/// Ordinary least squares of `y` on `x` with Pearson's r. The p-value is
/// the two-sided t-test on `n - 2` degrees of freedom (identical for the
/// slope and for r).
pub fn linregress(points: &[(f64, f64)]) -> Option<Regression> {
    let n = points.len();
    if n < CORRELATION_MIN_N {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let slope = sxy / sxx;
    let df = nf - 2.0;
    let one_minus = (1.0 - r * r).max(0.0);
    let (stderr, p) = if df <= 0.0 {
        (None, None)
    } else if one_minus == 0.0 {
        (Some(0.0), Some(0.0))
    } else {
        let se = (one_minus * syy / sxx / df).sqrt();
        let t = r * (df / one_minus).sqrt();
        let p = StudentsT::new(0.0, 1.0, df)
            .ok()
            .map(|dist| (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0));
        (finite(se), p)
    };
    Some(Regression {
        slope: finite(slope)?,
        intercept: finite(my - slope * mx)?,
        r: finite(r)?,
        stderr,
        p,
    })
}

/// One-way ANOVA F statistic and p-value over the groups.
pub fn one_way_anova(groups: &[&[f64]]) -> Option<(f64, f64)> {
    let k = groups.len();
    let n: usize = groups.iter().map(|g| g.len()).sum();
    if k < 2 || n <= k || groups.iter().any(|g| g.is_empty()) {
        return None;
    }
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let dfb = (k - 1) as f64;
    let dfw = (n - k) as f64;
    if ssw == 0.0 {
        return None;
    }
    let f = (ssb / dfb) / (ssw / dfw);
    let p = FisherSnedecor::new(dfb, dfw).ok()?.sf(f);
    Some((finite(f)?, finite(p)?.clamp(0.0, 1.0)))
}

/// Pearson chi-squared test of independence over paired categories.
pub fn chi2_independence<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(
    pairs: &[(A, B)],
) -> Option<(f64, f64)> {
    if pairs.is_empty() {
        return None;
    }
    let mut rows: HashMap<A, usize> = HashMap::new();
    let mut cols: HashMap<B, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (a, b) in pairs {
        let nr = rows.len();
        let r = *rows.entry(a.clone()).or_insert(nr);
        let nc = cols.len();
        let c = *cols.entry(b.clone()).or_insert(nc);
        *cells.entry((r, c)).or_default() += 1.0;
    }
    let (nr, nc) = (rows.len(), cols.len());
    if nr < 2 || nc < 2 {
        return None;
    }
    let mut row_tot = vec![0.0; nr];
    let mut col_tot = vec![0.0; nc];
    for (&(r, c), &v) in &cells {
        row_tot[r] += v;
        col_tot[c] += v;
    }
    let total = pairs.len() as f64;
    let mut stat = 0.0;
    for (r, rt) in row_tot.iter().enumerate() {
        for (c, ct) in col_tot.iter().enumerate() {
            let expected = rt * ct / total;
            let observed = cells.get(&(r, c)).copied().unwrap_or(0.0);
            stat += (observed - expected).powi(2) / expected;
        }
    }
    let dof = ((nr - 1) * (nc - 1)) as f64;
    let p = ChiSquared::new(dof).ok()?.sf(stat);
    Some((finite(stat)?, finite(p)?.clamp(0.0, 1.0)))
}

/// Quartile bin (0..=3) of each value: the number of quartile cut points
/// `(Q1, Q2, Q3)` strictly below it.
pub fn quartile_bins(xs: &[f64]) -> Vec<usize> {
    let s = sorted(xs);
    let cuts: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .filter_map(|&p| quantile_sorted(&s, p))
        .collect();
    xs.iter()
        .map(|x| cuts.iter().filter(|&&c| c < *x).count())
        .collect()
}

/// Mean Euclidean distance from each point to its k-means centroid.
///
/// Initialisation: the first centroid is a point drawn from a ChaCha8 RNG
/// seeded with `seed`; each further centroid is the point farthest from the
/// centroids chosen so far (lowest index on ties). Lloyd iterations run
/// until no centroid moves by more than 1e-6 or 100 iterations. Callers
/// standardize coordinates beforehand.
pub fn kmeans_avg_err(points: &[(f64, f64)], k: usize, seed: u64) -> Option<f64> {
    if k == 0 || points.len() < k {
        return None;
    }
    let dist2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.random_range(0..points.len())]];
    let mut nearest: Vec<f64> = points.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let (idx, _) =
            nearest
                .iter()
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |best, (i, &d)| {
                    if d > best.1 {
                        (i, d)
                    } else {
                        best
                    }
                });
        let c = points[idx];
        centroids.push(c);
        for (i, &p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(dist2(p, c));
        }
    }
    let assign = |centroids: &[(f64, f64)]| -> Vec<usize> {
        points
            .iter()
            .map(|&p| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (j, &c) in centroids.iter().enumerate() {
                    let d = dist2(p, c);
                    if d < best_d {
                        best = j;
                        best_d = d;
                    }
                }
                best
            })
            .collect()
    };
    let mut labels = assign(&centroids);
    for _ in 0..100 {
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].0 += p.0;
            sums[l].1 += p.1;
            sums[l].2 += 1;
        }
        let mut shift: f64 = 0.0;
        for (c, s) in centroids.iter_mut().zip(&sums) {
            if s.2 > 0 {
                let next = (s.0 / s.2 as f64, s.1 / s.2 as f64);
                shift = shift.max(dist2(*c, next).sqrt());
                *c = next;
            }
        }
        labels = assign(&centroids);
        if shift < 1e-6 {
            break;
        }
    }
    let total: f64 = points
        .iter()
        .zip(&labels)
        .map(|(&p, &l)| dist2(p, centroids[l]).sqrt())
        .sum();
    finite(total / points.len() as f64)
}

/// Z-scores; a constant coordinate maps to zeros.
pub fn standardize(xs: &[f64]) -> Vec<f64> {
    let (Some(m), Some(sd)) = (mean(xs), std_dev(xs)) else {
        return xs.to_vec();
    };
    xs.iter()
        .map(|x| if sd > 0.0 { (x - m) / sd } else { 0.0 })
        .collect()
}
