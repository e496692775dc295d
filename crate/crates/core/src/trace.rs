use std::fmt;
use std::ops::Deref;

/// A finite sequence of observable activity labels.
///
/// Silent steps never appear in a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(Vec<String>);

impl Trace {
    pub fn new(activities: Vec<String>) -> Self {
        Trace(activities)
    }

    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn activities(&self) -> &[String] {
        &self.0
    }

    pub fn push(&mut self, activity: impl Into<String>) {
        self.0.push(activity.into());
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Concatenation of two traces.
    pub fn concat(&self, other: &Trace) -> Trace {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Trace(v)
    }
}

impl Deref for Trace {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for Trace {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Trace(iter.into_iter().map(Into::into).collect())
    }
}

impl From<Vec<String>> for Trace {
    fn from(v: Vec<String>) -> Self {
        Trace(v)
    }
}

impl From<&[&str]> for Trace {
    fn from(v: &[&str]) -> Self {
        v.iter().copied().collect()
    }
}

impl<const N: usize> From<[&str; N]> for Trace {
    fn from(v: [&str; N]) -> Self {
        v.iter().copied().collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0.join(","))
    }
}
