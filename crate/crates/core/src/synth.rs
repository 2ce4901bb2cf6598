//! Synthetic corpora with planted archetype → chart-type rules.
//!
//! Each pair is drawn from one column archetype. The rulebook lists the
//! admissible chart types per archetype and the chart type of a pair is
//! sampled uniformly from that set. Axis rule: the temporal or categorical
//! column goes on x and the quantitative one on y; two quantitative columns
//! tie, and the tie goes to column order (the integer-valued driver column
//! is always generated first and goes on x).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Axis, ChartType, Column, Corpus, DatasetPair, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Archetype {
    /// Dates plus a quantitative series.
    TemporalQuant,
    /// Category labels plus a quantitative measure.
    CategoricalQuant,
    /// Integer driver plus a linearly dependent decimal response.
    QuantQuantCorrelated,
    /// Integer driver plus a decimal column with the same marginal
    /// distribution as the correlated case but no dependence.
    QuantQuantIndependent,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::TemporalQuant,
        Archetype::CategoricalQuant,
        Archetype::QuantQuantCorrelated,
        Archetype::QuantQuantIndependent,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Archetype::TemporalQuant => "t+q",
            Archetype::CategoricalQuant => "c+q",
            Archetype::QuantQuantCorrelated => "q+q_corr",
            Archetype::QuantQuantIndependent => "q+q_indep",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Archetype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| Error::UnknownArchetype(s.to_string()))
    }
}

/// Archetype → admissible chart types. Serialized as a JSON object such as
/// `{"t+q": ["line", "bar"], "c+q": ["bar"]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rulebook {
    rules: BTreeMap<Archetype, Vec<ChartType>>,
}

impl Rulebook {
    pub fn new(rules: BTreeMap<Archetype, Vec<ChartType>>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::EmptyRulebook);
        }
        let mut clean = BTreeMap::new();
        for (arch, mut types) in rules {
            types.sort();
            types.dedup();
            if types.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "archetype {arch} has no admissible chart types"
                )));
            }
            clean.insert(arch, types);
        }
        Ok(Rulebook { rules: clean })
    }

    /// One chart type per archetype: the unambiguous training regime.
    pub fn singleton() -> Self {
        Rulebook::from_pairs(&[
            (Archetype::TemporalQuant, &[ChartType::Line]),
            (Archetype::CategoricalQuant, &[ChartType::Bar]),
            (Archetype::QuantQuantCorrelated, &[ChartType::Scatter]),
            (Archetype::QuantQuantIndependent, &[ChartType::Box]),
        ])
    }

    /// Two admissible chart types per archetype.
    pub fn two_choice() -> Self {
        Rulebook::from_pairs(&[
            (Archetype::TemporalQuant, &[ChartType::Line, ChartType::Bar]),
            (
                Archetype::CategoricalQuant,
                &[ChartType::Bar, ChartType::Box],
            ),
            (
                Archetype::QuantQuantCorrelated,
                &[ChartType::Scatter, ChartType::Line],
            ),
            (
                Archetype::QuantQuantIndependent,
                &[ChartType::Scatter, ChartType::Box],
            ),
        ])
    }

    fn from_pairs(pairs: &[(Archetype, &[ChartType])]) -> Self {
        Rulebook::new(pairs.iter().map(|(a, t)| (*a, t.to_vec())).collect())
            .expect("static rulebook is valid")
    }

    pub fn rules(&self) -> &BTreeMap<Archetype, Vec<ChartType>> {
        &self.rules
    }

    pub fn admissible(&self, arch: Archetype) -> Option<&[ChartType]> {
        self.rules.get(&arch).map(Vec::as_slice)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut rules = BTreeMap::new();
        for (k, v) in raw {
            let types = v
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<ChartType>>>()?;
            rules.insert(k.parse()?, types);
        }
        Rulebook::new(rules)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Rulebook::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, Vec<&str>> = self
            .rules
            .iter()
            .map(|(a, t)| (a.key(), t.iter().map(|c| c.as_str()).collect()))
            .collect();
        serde_json::to_string_pretty(&raw).expect("rulebook serializes")
    }
}

pub fn generate_synthetic_corpus(n: usize, rulebook: &Rulebook, seed: u64) -> Result<Corpus> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let archetypes: Vec<Archetype> = rulebook.rules.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let arch = *archetypes.choose(&mut rng).expect("non-empty rulebook");
        let chart = *rulebook.rules[&arch]
            .choose(&mut rng)
            .expect("non-empty admissible set");
        let mut pair = generate_pair(&format!("syn-{i:06}"), arch, chart, &mut rng)?;
        pair.archetype = Some(arch.key().to_string());
        pairs.push(pair);
    }
    Corpus::new(pairs, Provenance::Synthetic, Some(seed))
}

/// Emits every pair once per admissible type of its archetype, so each
/// dataset forms a signature group whose truth is the full admissible set.
/// Copies get ids `{id}#{type}`; pairs without a known archetype are kept
/// as they are.
pub fn plant_signature_groups(corpus: &Corpus, rulebook: &Rulebook) -> Result<Corpus> {
    let mut pairs = Vec::new();
    for p in &corpus.pairs {
        let types = p
            .archetype
            .as_deref()
            .and_then(|a| a.parse::<Archetype>().ok())
            .and_then(|a| rulebook.admissible(a));
        match types {
            Some(types) => {
                for &t in types {
                    let mut q = p.clone();
                    q.id = format!("{}#{}", p.id, t);
                    q.chart_type = t;
                    pairs.push(q);
                }
            }
            None => pairs.push(p.clone()),
        }
    }
    Corpus::new(pairs, corpus.provenance, corpus.seed)
}

const TIME_NAMES: &[&str] = &["date", "Date", "year", "Month", "time", "day", "period"];
const MEASURE_NAMES: &[&str] = &["sales", "value", "price", "revenue", "score", "amount"];
const CATEGORY_NAMES: &[&str] = &["category", "name", "region", "product", "country", "group"];
const DRIVER_NAMES: &[&str] = &["x", "age", "dose", "size", "hours", "width"];
const RESPONSE_NAMES: &[&str] = &["y", "weight", "height", "income", "yield", "output"];
const LABELS: &[&str] = &[
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet",
    "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
    "uniform", "victor", "whiskey", "xray", "yankee", "zulu", "amber", "birch", "cedar", "dune",
    "ember", "fjord", "grove", "heath", "inlet", "jade", "knoll", "lagoon", "mesa", "nook",
];

fn pick<'a>(rng: &mut ChaCha8Rng, names: &[&'a str]) -> &'a str {
    names.choose(rng).expect("non-empty name list")
}

fn generate_pair(
    id: &str,
    arch: Archetype,
    chart: ChartType,
    rng: &mut ChaCha8Rng,
) -> Result<DatasetPair> {
    // (column, axis) in generation order.
    let (first, second) = match arch {
        Archetype::TemporalQuant => {
            let rows = rng.random_range(20..=60);
            let t = temporal_column(rng, rows)?;
            let q = random_walk_column(rng, rows)?;
            ((t, Axis::X), (q, Axis::Y))
        }
        Archetype::CategoricalQuant => {
            let rows = rng.random_range(5..=30);
            let c = categorical_column(rng, rows)?;
            let q = measure_column(rng, rows)?;
            ((c, Axis::X), (q, Axis::Y))
        }
        Archetype::QuantQuantCorrelated | Archetype::QuantQuantIndependent => {
            let rows = rng.random_range(20..=60);
            let (x, y) =
                driver_response_columns(rng, rows, arch == Archetype::QuantQuantCorrelated)?;
            // Tied general types: column order decides, so keep it.
            let pair = DatasetPair::new(id, [x, y], chart, [Axis::X, Axis::Y])?;
            return Ok(pair);
        }
    };
    let (cols, axes) = if rng.random_bool(0.5) {
        ([first.0, second.0], [first.1, second.1])
    } else {
        ([second.0, first.0], [second.1, first.1])
    };
    DatasetPair::new(id, cols, chart, axes)
}

fn temporal_column(rng: &mut ChaCha8Rng, rows: usize) -> Result<Column> {
    let year = rng.random_range(1990..2020);
    let start = NaiveDate::from_ymd_opt(year, rng.random_range(1..=12), rng.random_range(1..=28))
        .expect("valid date");
    let style = rng.random_range(0..4);
    let values = (0..rows)
        .map(|i| match style {
            0 => (start + chrono::Days::new(i as u64))
                .format("%Y-%m-%d")
                .to_string(),
            1 => (start.with_day(1).expect("day 1") + Months::new(i as u32))
                .format("%Y-%m-%d")
                .to_string(),
            2 => format!("{}", 1900 + (year - 1900 + i as i32) % 1100),
            _ => (start + chrono::Days::new(i as u64))
                .format("%m/%d/%Y")
                .to_string(),
        })
        .collect();
    Column::new(pick(rng, TIME_NAMES), values)
}

fn random_walk_column(rng: &mut ChaCha8Rng, rows: usize) -> Result<Column> {
    let step = Normal::new(0.0, 5.0).expect("valid normal");
    let mut level: f64 = rng.random_range(50.0..150.0);
    let values = (0..rows)
        .map(|_| {
            level += step.sample(rng);
            format!("{level:.2}")
        })
        .collect();
    Column::new(pick(rng, MEASURE_NAMES), values)
}

fn measure_column(rng: &mut ChaCha8Rng, rows: usize) -> Result<Column> {
    let scale: f64 = rng.random_range(10.0..1000.0);
    let values = (0..rows)
        .map(|_| format!("{:.2}", scale * rng.random_range(0.05..1.0)))
        .collect();
    Column::new(pick(rng, MEASURE_NAMES), values)
}

fn categorical_column(rng: &mut ChaCha8Rng, rows: usize) -> Result<Column> {
    let labels: Vec<&str> = LABELS.choose_multiple(rng, rows).copied().collect();
    let values = labels.iter().map(|l| l.to_string()).collect();
    Column::new(pick(rng, CATEGORY_NAMES), values)
}

fn driver_response_columns(
    rng: &mut ChaCha8Rng,
    rows: usize,
    correlated: bool,
) -> Result<(Column, Column)> {
    let slope: f64 = rng.random_range(0.5..3.0);
    let intercept: f64 = rng.random_range(-10.0..10.0);
    // Noise sd relative to the spread of a uniform(0, 100) driver.
    let noise = Normal::new(0.0, slope * 29.0 * 0.15).expect("valid normal");
    let xs: Vec<i64> = (0..rows).map(|_| rng.random_range(0..=100)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let driver = if correlated {
                x as f64
            } else {
                rng.random_range(0..=100) as f64
            };
            slope * driver + intercept + noise.sample(rng)
        })
        .collect();
    let x = Column::new(
        pick(rng, DRIVER_NAMES),
        xs.iter().map(|v| v.to_string()).collect(),
    )?;
    let y = Column::new(
        pick(rng, RESPONSE_NAMES),
        ys.iter().map(|v| format!("{v:.2}")).collect(),
    )?;
    Ok((x, y))
}
