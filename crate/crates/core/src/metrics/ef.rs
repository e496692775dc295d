//! Eventually-follows relations and their per-class F1 agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::MetricError;
use crate::log::EventLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EfClass {
    AlwaysFollows,
    SometimesFollows,
    NeverFollows,
}

impl EfClass {
    pub const ALL: [EfClass; 3] = [
        EfClass::AlwaysFollows,
        EfClass::SometimesFollows,
        EfClass::NeverFollows,
    ];

    pub fn short(self) -> &'static str {
        match self {
            EfClass::AlwaysFollows => "AF",
            EfClass::SometimesFollows => "SF",
            EfClass::NeverFollows => "NF",
        }
    }
}

impl fmt::Display for EfClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EfOptions {
    /// Quantify "always" over every trace of the log instead of only the
    /// traces containing the first activity.
    pub strict: bool,
    /// Leave pairs whose first activity never occurs unclassified instead
    /// of counting them as never-follows.
    pub exclude_absent: bool,
}

/// Classification of every ordered activity pair over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfRelationMap {
    alphabet: Vec<String>,
    classes: Vec<Option<EfClass>>,
}

impl EfRelationMap {
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Class of `(a, b)`; `None` for unclassified pairs or labels outside the alphabet.
    pub fn get(&self, a: &str, b: &str) -> Option<EfClass> {
        let i = self.index(a)?;
        let j = self.index(b)?;
        self.classes[i * self.alphabet.len() + j]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Option<EfClass>)> + '_ {
        let n = self.alphabet.len();
        self.classes.iter().enumerate().map(move |(k, &c)| {
            (
                self.alphabet[k / n].as_str(),
                self.alphabet[k % n].as_str(),
                c,
            )
        })
    }

    pub fn count(&self, class: EfClass) -> usize {
        self.classes.iter().filter(|&&c| c == Some(class)).count()
    }

    fn index(&self, a: &str) -> Option<usize> {
        self.alphabet.binary_search_by(|x| x.as_str().cmp(a)).ok()
    }
}

pub fn ef_relations(
    log: &EventLog,
    alphabet: &BTreeSet<String>,
    options: EfOptions,
) -> Result<EfRelationMap, MetricError> {
    let names: Vec<String> = alphabet.iter().cloned().collect();
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let n = names.len();

    let mut contains = vec![0u64; n];
    let mut follows = vec![0u64; n * n];
    let mut here = vec![false; n];
    let mut pair = vec![false; n * n];
    let mut after = vec![false; n];
    for (trace, mult) in log.variants() {
        let ids = trace
            .iter()
            .map(|a| {
                index
                    .get(a.as_str())
                    .copied()
                    .ok_or_else(|| MetricError::UnknownActivity(a.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        here.fill(false);
        pair.fill(false);
        after.fill(false);
        for &a in ids.iter().rev() {
            here[a] = true;
            for (b, &later) in after.iter().enumerate() {
                if later {
                    pair[a * n + b] = true;
                }
            }
            after[a] = true;
        }
        for a in 0..n {
            if here[a] {
                contains[a] += mult;
            }
        }
        for (k, &p) in pair.iter().enumerate() {
            if p {
                follows[k] += mult;
            }
        }
    }

    let total = log.len();
    let classes = (0..n * n)
        .map(|k| {
            let a = k / n;
            if contains[a] == 0 {
                return (!options.exclude_absent).then_some(EfClass::NeverFollows);
            }
            let scope = if options.strict { total } else { contains[a] };
            Some(match follows[k] {
                0 => EfClass::NeverFollows,
                x if x == scope => EfClass::AlwaysFollows,
                _ => EfClass::SometimesFollows,
            })
        })
        .collect();
    Ok(EfRelationMap {
        alphabet: names,
        classes,
    })
}

/// Per-class F1; `None` marks a class absent from both maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfF1 {
    pub af: Option<f64>,
    pub sf: Option<f64>,
    pub nf: Option<f64>,
}

impl EfF1 {
    pub fn get(&self, class: EfClass) -> Option<f64> {
        match class {
            EfClass::AlwaysFollows => self.af,
            EfClass::SometimesFollows => self.sf,
            EfClass::NeverFollows => self.nf,
        }
    }
}

/// Scores `reconstructed` against `original`. Pairs unclassified in either
/// map are skipped.
pub fn ef_f1(original: &EfRelationMap, reconstructed: &EfRelationMap) -> Result<EfF1, MetricError> {
    if original.alphabet != reconstructed.alphabet {
        return Err(MetricError::AlphabetMismatch);
    }
    let mut tp = [0usize; 3];
    let mut predicted = [0usize; 3];
    let mut actual = [0usize; 3];
    for (o, r) in original.classes.iter().zip(&reconstructed.classes) {
        let (Some(o), Some(r)) = (o, r) else { continue };
        actual[*o as usize] += 1;
        predicted[*r as usize] += 1;
        if o == r {
            tp[*o as usize] += 1;
        }
    }
    let score = |c: usize| {
        if predicted[c] == 0 && actual[c] == 0 {
            return None;
        }
        let p = ratio(tp[c], predicted[c]);
        let r = ratio(tp[c], actual[c]);
        Some(if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        })
    };
    Ok(EfF1 {
        af: score(0),
        sf: score(1),
        nf: score(2),
    })
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}
