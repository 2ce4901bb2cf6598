//! Column-name inspection and name similarity.

use std::collections::BTreeSet;

/// Words of a name: maximal alphanumeric runs, lowercased.
pub fn words(name: &str) -> Vec<String> {
    name.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Finer tokens than [`words`]: also splits at lower→upper case changes
/// and at letter/digit boundaries, so `userId2` gives `user`, `id`, `2`.
pub fn tokens(name: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in name.split(|c: char| !c.is_alphanumeric()) {
        let mut cur = String::new();
        let mut prev: Option<char> = None;
        for ch in word.chars() {
            if let Some(p) = prev {
                let boundary = (p.is_lowercase() && ch.is_uppercase())
                    || (p.is_alphabetic() != ch.is_alphabetic());
                if boundary && !cur.is_empty() {
                    out.push(std::mem::take(&mut cur).to_lowercase());
                }
            }
            cur.push(ch);
            prev = Some(ch);
        }
        if !cur.is_empty() {
            out.push(cur.to_lowercase());
        }
    }
    out
}

pub const TIME_WORDS: &[&str] = &[
    "time",
    "date",
    "datetime",
    "timestamp",
    "year",
    "month",
    "week",
    "day",
    "hour",
    "minute",
    "second",
    "quarter",
    "period",
];

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NameSimilarity {
    pub edit_distance: usize,
    pub normalized_edit_distance: f64,
    pub num_shared_words: usize,
    pub percent_shared_words: f64,
}

/// Edit distance normalised by the longer name; word overlap is
/// case-insensitive and reported as a Jaccard share.
pub fn name_similarity(a: &str, b: &str) -> NameSimilarity {
    let edit = levenshtein(a, b);
    let longest = a.chars().count().max(b.chars().count());
    let wa: BTreeSet<String> = words(a).into_iter().collect();
    let wb: BTreeSet<String> = words(b).into_iter().collect();
    let shared = wa.intersection(&wb).count();
    let union = wa.union(&wb).count();
    NameSimilarity {
        edit_distance: edit,
        normalized_edit_distance: if longest == 0 {
            0.0
        } else {
            edit as f64 / longest as f64
        },
        num_shared_words: shared,
        percent_shared_words: if union == 0 {
            0.0
        } else {
            shared as f64 / union as f64
        },
    }
}
