//! Dataset-visualization pairs: typed columns, JSON-lines ingestion, and
//! train/test splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Share of non-missing cells that must parse as dates for a column to be
/// typed as datetime.
pub const DATETIME_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    String,
    Integer,
    Decimal,
    Datetime,
}

impl DataType {
    pub fn general(self) -> GeneralType {
        match self {
            DataType::String => GeneralType::Categorical,
            DataType::Integer | DataType::Decimal => GeneralType::Quantitative,
            DataType::Datetime => GeneralType::Temporal,
        }
    }
}

/// Coarse column type: categorical, quantitative, or temporal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneralType {
    #[serde(rename = "c")]
    Categorical,
    #[serde(rename = "q")]
    Quantitative,
    #[serde(rename = "t")]
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartType {
    Bar,
    Line,
    Scatter,
    Box,
}

impl ChartType {
    /// Fixed order, also used to break score ties.
    pub const ALL: [ChartType; 4] = [
        ChartType::Bar,
        ChartType::Line,
        ChartType::Scatter,
        ChartType::Box,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Scatter => "scatter",
            ChartType::Box => "box",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Display name used in explanations.
    pub fn display_name(self) -> &'static str {
        match self {
            ChartType::Bar => "Bar chart",
            ChartType::Line => "Line chart",
            ChartType::Scatter => "Scatter plot",
            ChartType::Box => "Box plot",
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChartType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bar" => Ok(ChartType::Bar),
            "line" => Ok(ChartType::Line),
            "scatter" => Ok(ChartType::Scatter),
            "box" => Ok(ChartType::Box),
            other => Err(Error::UnsupportedChartType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            other => Err(Error::UnsupportedAxis(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Empty cells and the literal `null` are missing.
pub fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("null")
}

/// Parses a cell under the closed datetime grammar and returns seconds since
/// the Unix epoch.
///
/// Accepted: `YYYY`, `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.f]]` (also with a
/// space separator, a trailing `Z`, or an RFC 3339 offset), and `MM/DD/YYYY`.
pub fn parse_datetime(cell: &str) -> Option<f64> {
    let s = cell.trim();
    let bytes = s.as_bytes();
    if bytes.len() == 4 && bytes.iter().all(u8::is_ascii_digit) {
        let year: i32 = s.parse().ok()?;
        return NaiveDate::from_ymd_opt(year, 1, 1).map(date_seconds);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        if bytes.len() == 10 {
            return Some(date_seconds(d));
        }
    }
    if bytes.len() == 10 && bytes[2] == b'/' && bytes[5] == b'/' {
        if let Ok(d) = NaiveDate::parse_from_str(s, "%m/%d/%Y") {
            return Some(date_seconds(d));
        }
    }
    if bytes.len() >= 16 && bytes[4] == b'-' && (bytes[10] == b'T' || bytes[10] == b' ') {
        if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(&s.replacen(' ', "T", 1)) {
            return Some(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_millis()) / 1e3);
        }
        let body = s.strip_suffix('Z').unwrap_or(s);
        for fmt in [
            "%Y-%m-%dT%H:%M:%S%.f",
            "%Y-%m-%dT%H:%M",
            "%Y-%m-%d %H:%M:%S%.f",
            "%Y-%m-%d %H:%M",
        ] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(body, fmt) {
                let utc = dt.and_utc();
                return Some(
                    utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_millis()) / 1e3,
                );
            }
        }
    }
    None
}

fn date_seconds(d: NaiveDate) -> f64 {
    d.and_hms_opt(0, 0, 0)
        .map(|dt| dt.and_utc().timestamp() as f64)
        .unwrap_or(f64::NAN)
}

fn parse_integer(cell: &str) -> Option<i64> {
    cell.trim().parse::<i64>().ok()
}

fn parse_real(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Infers the data type of a column from its raw cells. Missing cells are
/// ignored.
pub fn infer_column_type<S: AsRef<str>>(values: &[S]) -> Result<DataType> {
    let present: Vec<&str> = values
        .iter()
        .map(AsRef::as_ref)
        .filter(|c| !is_missing(c))
        .collect();
    if present.is_empty() {
        return Err(Error::UntypeableColumn);
    }
    let dates = present
        .iter()
        .filter(|c| parse_datetime(c).is_some())
        .count();
    if dates as f64 >= DATETIME_THRESHOLD * present.len() as f64 {
        return Ok(DataType::Datetime);
    }
    if present.iter().all(|c| parse_integer(c).is_some()) {
        return Ok(DataType::Integer);
    }
    if present.iter().all(|c| parse_real(c).is_some()) {
        return Ok(DataType::Decimal);
    }
    Ok(DataType::String)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<String>,
    pub data_type: DataType,
    pub general_type: GeneralType,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} has no values"
            )));
        }
        let data_type = infer_column_type(&values)?;
        Ok(Column {
            name,
            values,
            data_type,
            general_type: data_type.general(),
        })
    }

    pub fn from_strs(name: &str, values: &[&str]) -> Result<Self> {
        Column::new(name, values.iter().map(|s| s.to_string()).collect())
    }

    /// Numeric reading of each cell: parsed numbers for quantitative
    /// columns, epoch seconds for temporal ones, `None` otherwise.
    pub fn numeric(&self) -> Vec<Option<f64>> {
        self.values
            .iter()
            .map(|c| {
                if is_missing(c) {
                    return None;
                }
                match self.general_type {
                    GeneralType::Quantitative => parse_real(c),
                    GeneralType::Temporal => parse_datetime(c),
                    GeneralType::Categorical => None,
                }
            })
            .collect()
    }

    /// Trimmed non-missing cells.
    pub fn present(&self) -> Vec<&str> {
        self.values
            .iter()
            .filter(|c| !is_missing(c))
            .map(|c| c.trim())
            .collect()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|c| is_missing(c)).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub id: String,
    /// Storage order; carries no axis information.
    pub columns: [Column; 2],
    pub chart_type: ChartType,
    /// Axis of `columns[i]`.
    pub axes: [Axis; 2],
    /// Generator archetype, when the pair is synthetic.
    pub archetype: Option<String>,
    pub split: Option<Split>,
}

impl DatasetPair {
    pub fn new(
        id: impl Into<String>,
        columns: [Column; 2],
        chart_type: ChartType,
        axes: [Axis; 2],
    ) -> Result<Self> {
        let id = id.into();
        if columns[0].name == columns[1].name {
            return Err(Error::InvalidPair {
                id,
                message: format!("duplicate column name {:?}", columns[0].name),
            });
        }
        if axes[0] == axes[1] {
            return Err(Error::InvalidPair {
                id,
                message: "both columns assigned to the same axis".into(),
            });
        }
        Ok(DatasetPair {
            id,
            columns,
            chart_type,
            axes,
            archetype: None,
            split: None,
        })
    }

    pub fn axis_of(&self, column: &str) -> Option<Axis> {
        self.columns
            .iter()
            .position(|c| c.name == column)
            .map(|i| self.axes[i])
    }

    pub fn to_record(&self) -> PairRecord {
        PairRecord {
            id: self.id.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| ColumnRecord {
                    name: c.name.clone(),
                    values: c.values.clone(),
                })
                .collect(),
            chart_type: self.chart_type.as_str().to_string(),
            axes: self
                .columns
                .iter()
                .zip(self.axes)
                .map(|(c, a)| (c.name.clone(), a.as_str().to_string()))
                .collect(),
            archetype: self.archetype.clone(),
            split: self.split,
        }
    }
}

/// On-disk form of one pair (one JSON line).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub id: String,
    pub columns: Vec<ColumnRecord>,
    pub chart_type: String,
    pub axes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archetype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnRecord {
    pub name: String,
    pub values: Vec<String>,
}

impl PairRecord {
    pub fn into_pair(self) -> Result<DatasetPair> {
        let id = self.id;
        let invalid = |message: String| Error::InvalidPair {
            id: id.clone(),
            message,
        };
        if self.columns.len() != 2 {
            return Err(invalid(format!(
                "expected exactly 2 columns, found {}",
                self.columns.len()
            )));
        }
        let chart_type: ChartType = self.chart_type.parse()?;
        let mut cols = Vec::with_capacity(2);
        let mut axes = [Axis::X; 2];
        for (i, c) in self.columns.into_iter().enumerate() {
            let axis = self
                .axes
                .get(&c.name)
                .ok_or_else(|| invalid(format!("missing axis assignment for {:?}", c.name)))?;
            axes[i] = axis.parse()?;
            cols.push(Column::new(c.name, c.values).map_err(|e| invalid(e.to_string()))?);
        }
        if self.axes.len() != 2 {
            return Err(invalid("axes must name exactly the two columns".into()));
        }
        let second = cols.pop().expect("two columns");
        let first = cols.pop().expect("two columns");
        let mut pair = DatasetPair::new(id.clone(), [first, second], chart_type, axes)?;
        pair.archetype = self.archetype;
        pair.split = self.split;
        Ok(pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Ingested,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub pairs: Vec<DatasetPair>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl Corpus {
    pub fn new(pairs: Vec<DatasetPair>, provenance: Provenance, seed: Option<u64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        Ok(Corpus {
            pairs,
            provenance,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The split shared by every pair, if any.
    pub fn split(&self) -> Option<Split> {
        let first = self.pairs.first()?.split?;
        self.pairs
            .iter()
            .all(|p| p.split == Some(first))
            .then_some(first)
    }

    pub fn filter(&self, mut keep: impl FnMut(&DatasetPair) -> bool) -> Corpus {
        Corpus {
            pairs: self.pairs.iter().filter(|p| keep(p)).cloned().collect(),
            provenance: self.provenance,
            seed: self.seed,
        }
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for p in &self.pairs {
            serde_json::to_writer(&mut w, &p.to_record())?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn to_jsonl_string(&self) -> Result<String> {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&serde_json::to_string(&p.to_record())?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// A record skipped under permissive loading.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    pub line: usize,
    pub message: String,
}

pub fn load_corpus(path: &Path, permissive: bool) -> Result<(Corpus, Vec<LoadWarning>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), permissive)
}

/// Reads JSON-lines pair records. Blank lines are ignored. A malformed
/// record aborts the read unless `permissive`, in which case it is skipped
/// and reported.
pub fn read_corpus<R: BufRead>(reader: R, permissive: bool) -> Result<(Corpus, Vec<LoadWarning>)> {
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Record {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<PairRecord>(&line)
            .map_err(Error::from)
            .and_then(PairRecord::into_pair)
            .and_then(|p| {
                if seen.contains(&p.id) {
                    Err(Error::DuplicateId(p.id))
                } else {
                    Ok(p)
                }
            });
        match parsed {
            Ok(p) => {
                seen.insert(p.id.clone());
                pairs.push(p);
            }
            Err(e) if permissive => warnings.push(LoadWarning {
                line: lineno,
                message: e.to_string(),
            }),
            Err(e) => {
                return Err(Error::Record {
                    line: lineno,
                    message: e.to_string(),
                })
            }
        }
    }
    let corpus = Corpus::new(pairs, Provenance::Ingested, None)?;
    Ok((corpus, warnings))
}

/// Deterministic shuffled partition. The training side holds
/// `round(train_fraction * n)` pairs, kept within `[1, n-1]`; both sides keep
/// the corpus order.
pub fn split_corpus(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot split a corpus of {n} pairs"
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut is_train = vec![false; n];
    for &i in &order[..n_train] {
        is_train[i] = true;
    }
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    for (i, p) in corpus.pairs.iter().enumerate() {
        let mut p = p.clone();
        if is_train[i] {
            p.split = Some(Split::Train);
            train.push(p);
        } else {
            p.split = Some(Split::Test);
            test.push(p);
        }
    }
    let mk = |pairs| Corpus {
        pairs,
        provenance: corpus.provenance,
        seed: corpus.seed,
    };
    Ok((mk(train), mk(test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_column() {
        assert_eq!(
            infer_column_type(&["1", "2", "3"]).unwrap(),
            DataType::Integer
        );
    }

    #[test]
    fn iso_dates_are_datetime() {
        assert_eq!(
            infer_column_type(&["2017-01-01", "2017-02-01"]).unwrap(),
            DataType::Datetime
        );
        assert_eq!(parse_datetime("2017-01-01"), Some(1_483_228_800.0));
        assert_eq!(parse_datetime("01/01/2017"), Some(1_483_228_800.0));
        assert_eq!(parse_datetime("2017"), Some(1_483_228_800.0));
        assert_eq!(
            parse_datetime("2017-01-01T00:00:00Z"),
            Some(1_483_228_800.0)
        );
        assert_eq!(parse_datetime("2017-01-01 01:00"), Some(1_483_232_400.0));
        assert_eq!(
            parse_datetime("2017-01-01T00:00:00+01:00"),
            Some(1_483_225_200.0)
        );
        assert_eq!(parse_datetime("17-01-01"), None);
        assert_eq!(parse_datetime("13/01/2017"), None);
    }

    #[test]
    fn mixed_cells_fall_back_to_string() {
        assert_eq!(
            infer_column_type(&["a", "1", "b"]).unwrap(),
            DataType::String
        );
    }

    #[test]
    fn decimals_and_missing() {
        assert_eq!(
            infer_column_type(&["1.5", "", "null", "2"]).unwrap(),
            DataType::Decimal
        );
        assert!(matches!(
            infer_column_type(&["", "null", " "]),
            Err(Error::UntypeableColumn)
        ));
        // "inf" parses as f64 but is not a usable number.
        assert_eq!(infer_column_type(&["inf", "1"]).unwrap(), DataType::String);
    }

    #[test]
    fn datetime_threshold_tolerates_a_few_bad_cells() {
        let mut cells: Vec<String> = (1..=19).map(|d| format!("2020-01-{d:02}")).collect();
        cells.push("oops".into());
        assert_eq!(infer_column_type(&cells).unwrap(), DataType::Datetime);
        cells.push("again".into());
        assert_eq!(infer_column_type(&cells).unwrap(), DataType::String);
    }

    #[test]
    fn general_type_follows_data_type() {
        assert_eq!(DataType::Integer.general(), GeneralType::Quantitative);
        assert_eq!(DataType::Decimal.general(), GeneralType::Quantitative);
        assert_eq!(DataType::Datetime.general(), GeneralType::Temporal);
        assert_eq!(DataType::String.general(), GeneralType::Categorical);
    }

    fn record(id: &str, chart: &str) -> String {
        format!(
            r#"{{"id":"{id}","columns":[{{"name":"a","values":["1","2"]}},{{"name":"b","values":["x","y"]}}],"chart_type":"{chart}","axes":{{"a":"y","b":"x"}}}}"#
        )
    }

    #[test]
    fn load_single_record() {
        let (c, w) = read_corpus(record("p1", "line").as_bytes(), false).unwrap();
        assert_eq!(c.len(), 1);
        assert!(w.is_empty());
        let p = &c.pairs[0];
        assert_eq!(p.chart_type, ChartType::Line);
        assert_eq!(p.axis_of("b"), Some(Axis::X));
        assert_eq!(p.columns[0].data_type, DataType::Integer);
    }

    #[test]
    fn pie_is_rejected() {
        let err = read_corpus(record("p1", "pie").as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("unsupported chart type"), "{err}");
    }

    #[test]
    fn permissive_skips_malformed_lines() {
        let text = format!(
            "{}\n{{\"id\": 3}}\n{}\n",
            record("p1", "bar"),
            record("p2", "box")
        );
        assert!(read_corpus(text.as_bytes(), false).is_err());
        let (c, w) = read_corpus(text.as_bytes(), true).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].line, 2);
    }

    #[test]
    fn duplicate_ids_and_missing_axes() {
        let text = format!("{}\n{}\n", record("p1", "bar"), record("p1", "bar"));
        let err = read_corpus(text.as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("duplicate pair id"), "{err}");

        let no_axis = r#"{"id":"q","columns":[{"name":"a","values":["1"]},{"name":"b","values":["x"]}],"chart_type":"bar","axes":{"a":"x"}}"#;
        let err = read_corpus(no_axis.as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("missing axis"), "{err}");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let text: String = (0..3)
            .map(|i| record(&format!("p{i}"), "bar") + "\n")
            .collect();
        let (c, _) = read_corpus(text.as_bytes(), false).unwrap();
        let (tr, te) = split_corpus(&c, 2.0 / 3.0, 5).unwrap();
        assert_eq!((tr.len(), te.len()), (2, 1));
        let (tr2, te2) = split_corpus(&c, 2.0 / 3.0, 5).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
        assert_eq!(tr.split(), Some(Split::Train));
        assert_eq!(te.split(), Some(Split::Test));
        assert!(split_corpus(&c.filter(|p| p.id == "p0"), 0.5, 1).is_err());
        assert!(split_corpus(&c, 1.0, 1).is_err());
    }

    #[test]
    fn split_of_thirty_thousand() {
        let col = Column::from_strs("a", &["1"]).unwrap();
        let col2 = Column::from_strs("b", &["1"]).unwrap();
        let pairs = (0..30_000)
            .map(|i| {
                DatasetPair::new(
                    format!("p{i}"),
                    [col.clone(), col2.clone()],
                    ChartType::Bar,
                    [Axis::X, Axis::Y],
                )
                .unwrap()
            })
            .collect();
        let c = Corpus::new(pairs, Provenance::Synthetic, None).unwrap();
        let (tr, te) = split_corpus(&c, 2.0 / 3.0, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (20_000, 10_000));
    }
}
