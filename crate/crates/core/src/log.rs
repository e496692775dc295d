//! Event logs as multisets of traces, plus the two on-disk formats.
//!
//! The *variants* format stores one distinct trace per line followed by its
//! multiplicity:
//!
//! ```text
//! a,b;2
//! a,b,c;2
//! ;1
//! ```
//!
//! The last line is the empty trace. Blank lines and lines starting with `#`
//! are ignored.
//!
//! The *csv* format is an event table with a header containing `case` and
//! `activity` and optionally `position`. Events of a case are ordered by
//! position when the column is present and by row order otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::trace::Trace;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("empty log")]
    Empty,
    #[error("missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("label '{0}' cannot be written in the variants format")]
    UnwritableLabel(String),
    #[error("unknown log format '{0}'")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A finite multiset of traces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    variants: BTreeMap<Trace, u64>,
    total: u64,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_variants<I: IntoIterator<Item = (Trace, u64)>>(variants: I) -> Self {
        let mut log = Self::new();
        for (t, n) in variants {
            log.add(t, n);
        }
        log
    }

    /// Adds `count` copies of `trace`. Zero counts are ignored.
    pub fn add(&mut self, trace: Trace, count: u64) {
        if count == 0 {
            return;
        }
        *self.variants.entry(trace).or_insert(0) += count;
        self.total += count;
    }

    pub fn push(&mut self, trace: Trace) {
        self.add(trace, 1);
    }

    pub fn extend_from(&mut self, other: &EventLog) {
        for (t, n) in other.variants() {
            self.add(t.clone(), n);
        }
    }

    /// Number of traces, counting multiplicity.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn distinct(&self) -> usize {
        self.variants.len()
    }

    pub fn multiplicity(&self, trace: &Trace) -> u64 {
        self.variants.get(trace).copied().unwrap_or(0)
    }

    /// Distinct traces with their multiplicities, in trace order.
    pub fn variants(&self) -> impl Iterator<Item = (&Trace, u64)> + '_ {
        self.variants.iter().map(|(t, &n)| (t, n))
    }

    /// Every trace, repeated by multiplicity.
    pub fn traces(&self) -> impl Iterator<Item = &Trace> + '_ {
        self.variants
            .iter()
            .flat_map(|(t, &n)| std::iter::repeat_n(t, n as usize))
    }

    pub fn activities(&self) -> BTreeSet<String> {
        self.variants
            .keys()
            .flat_map(|t| t.iter().cloned())
            .collect()
    }
}

impl FromIterator<Trace> for EventLog {
    fn from_iter<I: IntoIterator<Item = Trace>>(iter: I) -> Self {
        let mut log = EventLog::new();
        for t in iter {
            log.push(t);
        }
        log
    }
}

/// Relative frequency of each distinct trace, kept as exact fractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantDistribution(BTreeMap<Trace, Ratio<u64>>);

impl VariantDistribution {
    pub fn get(&self, trace: &Trace) -> Ratio<u64> {
        self.0
            .get(trace)
            .copied()
            .unwrap_or_else(|| Ratio::from_integer(0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Trace, Ratio<u64>)> + '_ {
        self.0.iter().map(|(t, &r)| (t, r))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Ratio<u64> {
        self.0.values().copied().sum()
    }
}

pub fn variant_distribution(log: &EventLog) -> Result<VariantDistribution, LogError> {
    if log.is_empty() {
        return Err(LogError::Empty);
    }
    Ok(VariantDistribution(
        log.variants()
            .map(|(t, n)| (t.clone(), Ratio::new(n, log.len())))
            .collect(),
    ))
}

/// Number of traces per trace length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LengthHistogram(BTreeMap<usize, u64>);

impl LengthHistogram {
    pub fn from_counts<I: IntoIterator<Item = (usize, u64)>>(counts: I) -> Self {
        let mut h = BTreeMap::new();
        for (len, n) in counts {
            if n > 0 {
                *h.entry(len).or_insert(0) += n;
            }
        }
        LengthHistogram(h)
    }

    pub fn count(&self, length: usize) -> u64 {
        self.0.get(&length).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn bins(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0.iter().map(|(&l, &n)| (l, n))
    }

    pub fn max_length(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }

    pub fn merge(&mut self, other: &LengthHistogram) {
        for (l, n) in other.bins() {
            *self.0.entry(l).or_insert(0) += n;
        }
    }
}

pub fn length_histogram(log: &EventLog) -> Result<LengthHistogram, LogError> {
    if log.is_empty() {
        return Err(LogError::Empty);
    }
    Ok(LengthHistogram::from_counts(
        log.variants().map(|(t, n)| (t.len(), n)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Variants,
}

impl LogFormat {
    /// `.csv` files are event tables, everything else is read as variants.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Variants,
        }
    }
}

impl FromStr for LogFormat {
    type Err = LogError;

    fn from_str(s: &str) -> Result<Self, LogError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LogFormat::Csv),
            "variants" => Ok(LogFormat::Variants),
            _ => Err(LogError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn load_log(path: impl AsRef<Path>, format: LogFormat) -> Result<EventLog, LogError> {
    let file = File::open(path.as_ref())?;
    match format {
        LogFormat::Csv => read_csv(file),
        LogFormat::Variants => read_variants(BufReader::new(file)),
    }
}

pub fn read_variants<R: BufRead>(reader: R) -> Result<EventLog, LogError> {
    let mut log = EventLog::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: &str| LogError::Syntax {
            line: i + 1,
            message: message.to_string(),
        };
        let (labels, count) = line
            .rsplit_once(';')
            .ok_or_else(|| syntax("expected 'labels;count'"))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| syntax("count is not a non-negative integer"))?;
        if count == 0 {
            return Err(syntax("count must be positive"));
        }
        let labels = labels.trim();
        let trace: Trace = if labels.is_empty() {
            Trace::empty()
        } else {
            labels.split(',').map(str::trim).collect()
        };
        if trace.iter().any(String::is_empty) {
            return Err(syntax("empty activity label"));
        }
        log.add(trace, count);
    }
    if log.is_empty() {
        return Err(LogError::Empty);
    }
    Ok(log)
}

pub fn read_csv<R: Read>(reader: R) -> Result<EventLog, LogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &'static str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let case_col = column("case").ok_or(LogError::MissingColumn("case"))?;
    let act_col = column("activity").ok_or(LogError::MissingColumn("activity"))?;
    let pos_col = column("position");

    // case id -> (row index, position, activity); cases kept in first-seen order
    let mut order: Vec<String> = Vec::new();
    let mut cases: HashMap<String, Vec<(usize, i64, String)>> = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let case = field(case_col).to_string();
        let activity = field(act_col).to_string();
        if activity.is_empty() {
            return Err(LogError::Syntax {
                line: row + 2,
                message: "empty activity label".into(),
            });
        }
        let position = match pos_col {
            Some(c) => field(c).parse::<i64>().map_err(|_| LogError::Syntax {
                line: row + 2,
                message: format!("position '{}' is not an integer", field(c)),
            })?,
            None => row as i64,
        };
        cases
            .entry(case.clone())
            .or_insert_with(|| {
                order.push(case);
                Vec::new()
            })
            .push((row, position, activity));
    }
    if order.is_empty() {
        return Err(LogError::Empty);
    }

    let mut log = EventLog::new();
    for case in order {
        let mut events = cases.remove(&case).unwrap_or_default();
        if pos_col.is_some() {
            let in_order = events.windows(2).all(|w| w[0].1 < w[1].1);
            let contiguous = events.windows(2).all(|w| w[1].1 == w[0].1 + 1);
            if !in_order || !contiguous {
                log::warn!("case '{case}': positions are not contiguous, sorting by position");
            }
            events.sort_by_key(|&(row, pos, _)| (pos, row));
        }
        log.push(events.into_iter().map(|(_, _, a)| a).collect());
    }
    Ok(log)
}

fn writable(label: &str) -> bool {
    !label.is_empty()
        && label.trim() == label
        && !label.contains([',', ';', '\n', '\r'])
        && !label.starts_with('#')
}

pub fn write_variants<W: Write>(log: &EventLog, mut out: W) -> Result<(), LogError> {
    for (trace, n) in log.variants() {
        if let Some(bad) = trace.iter().find(|l| !writable(l)) {
            return Err(LogError::UnwritableLabel(bad.clone()));
        }
        writeln!(out, "{};{}", trace.join(","), n)?;
    }
    Ok(())
}

pub fn variants_to_string(log: &EventLog) -> Result<String, LogError> {
    let mut buf = Vec::new();
    write_variants(log, &mut buf)?;
    Ok(String::from_utf8(buf).expect("labels are valid utf-8"))
}

pub fn save_log(log: &EventLog, path: impl AsRef<Path>) -> Result<(), LogError> {
    let mut file = io::BufWriter::new(File::create(path)?);
    write_variants(log, &mut file)?;
    file.flush()?;
    Ok(())
}
