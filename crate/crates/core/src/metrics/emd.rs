//! Earth mover's distance between variant distributions under normalized edit distance.

use num_rational::Ratio;

use super::levenshtein::levenshtein;
use super::transport::{self, Flow};
use super::MetricError;
use crate::log::EventLog;
use crate::trace::Trace;

/// Largest variant-pair count solved by default (2000 x 2000 variants).
pub const DEFAULT_EMD_CAP: usize = 4_000_000;

/// Common denominators above this switch to a fixed-point cost scale.
const EXACT_DENOMINATOR_LIMIT: u128 = 1 << 62;
const FIXED_SCALE: u128 = 1 << 52;

/// Optimal transport between the variants of two logs.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    sources: Vec<Trace>,
    targets: Vec<Trace>,
    flow: Flow,
    unit: u64,
    exact_costs: bool,
}

impl TransportPlan {
    pub fn sources(&self) -> &[Trace] {
        &self.sources
    }

    pub fn targets(&self) -> &[Trace] {
        &self.targets
    }

    /// Probability mass moved from `sources()[i]` to `targets()[j]`.
    pub fn flow(&self, i: usize, j: usize) -> Ratio<u64> {
        Ratio::new(self.flow.get(i, j), self.unit)
    }

    /// Non-zero cells as `(source, target, mass)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Ratio<u64>)> + '_ {
        let m = self.targets.len();
        (0..self.sources.len())
            .flat_map(move |i| (0..m).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.flow.get(i, j) > 0)
            .map(move |(i, j)| (i, j, self.flow(i, j)))
    }

    /// False when costs had to be rounded to a fixed scale.
    pub fn exact_costs(&self) -> bool {
        self.exact_costs
    }

    /// Transport cost of this plan.
    pub fn cost(&self) -> f64 {
        self.cells()
            .map(|(i, j, mass)| {
                let (a, b) = (&self.sources[i], &self.targets[j]);
                let longest = a.len().max(b.len());
                let d = if longest == 0 {
                    0.0
                } else {
                    levenshtein(&a[..], &b[..]) as f64 / longest as f64
                };
                *mass.numer() as f64 / *mass.denom() as f64 * d
            })
            .sum()
    }
}

/// EMD between two non-empty logs, refusing instances with more than `cap`
/// variant pairs.
pub fn emd(l1: &EventLog, l2: &EventLog, cap: usize) -> Result<f64, MetricError> {
    emd_with_plan(l1, l2, cap).map(|(d, _)| d)
}

pub fn emd_with_plan(
    l1: &EventLog,
    l2: &EventLog,
    cap: usize,
) -> Result<(f64, TransportPlan), MetricError> {
    if l1.is_empty() || l2.is_empty() {
        return Err(MetricError::EmptyLog);
    }
    let pairs = l1.distinct().saturating_mul(l2.distinct());
    if pairs > cap {
        return Err(MetricError::SolverCap { pairs, cap });
    }

    let (a, ca): (Vec<Trace>, Vec<u64>) = l1.variants().map(|(t, c)| (t.clone(), c)).unzip();
    let (b, cb): (Vec<Trace>, Vec<u64>) = l2.variants().map(|(t, c)| (t.clone(), c)).unzip();
    let (n1, n2) = (l1.len(), l2.len());
    let g = gcd(n1, n2);
    let unit = (n1 / g)
        .checked_mul(n2)
        .ok_or(MetricError::Overflow("log sizes"))?;
    let supply: Vec<u64> = ca.iter().map(|&c| c * (n2 / g)).collect();
    let demand: Vec<u64> = cb.iter().map(|&c| c * (n1 / g)).collect();

    let m = b.len();
    let mut dist = Vec::with_capacity(a.len() * m);
    let mut denom: u128 = 1;
    let mut exact = true;
    for x in &a {
        for y in &b {
            let longest = x.len().max(y.len()) as u128;
            let d = levenshtein(&x[..], &y[..]) as u128;
            if exact && longest > 0 {
                denom = lcm(denom, longest);
                if denom > EXACT_DENOMINATOR_LIMIT {
                    exact = false;
                }
            }
            dist.push((d, longest));
        }
    }
    let cost: Vec<i128> = dist
        .iter()
        .map(|&(d, longest)| match longest {
            0 => 0,
            _ if exact => (d * (denom / longest)) as i128,
            _ => ((d * FIXED_SCALE + longest / 2) / longest) as i128,
        })
        .collect();
    if !exact {
        log::warn!("edit-distance denominators exceed 2^62; EMD costs rounded to 2^-52");
    }

    let flow = transport::solve(&supply, &demand, &cost);
    let plan = TransportPlan {
        sources: a,
        targets: b,
        flow,
        unit,
        exact_costs: exact,
    };
    Ok((plan.cost(), plan))
}

fn gcd<T>(mut a: T, mut b: T) -> T
where
    T: Copy + PartialEq + Default + std::ops::Rem<Output = T>,
{
    while b != T::default() {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(entries: &[(&[&str], u64)]) -> EventLog {
        EventLog::from_variants(entries.iter().map(|(t, c)| (Trace::from(*t), *c)))
    }

    #[test]
    fn identical_logs_are_zero_apart() {
        let l = log(&[(&["a", "b"], 3), (&["c"], 1)]);
        assert_eq!(emd(&l, &l, DEFAULT_EMD_CAP).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_singletons() {
        let l1 = log(&[(&["a"], 1)]);
        let l2 = log(&[(&["b"], 1)]);
        assert_eq!(emd(&l1, &l2, DEFAULT_EMD_CAP).unwrap(), 1.0);
    }

    #[test]
    fn half_mass_moves_half_distance() {
        let l1 = log(&[(&["a", "b"], 2)]);
        let l2 = log(&[(&["a", "b"], 1), (&["a", "c"], 1)]);
        let (d, plan) = emd_with_plan(&l1, &l2, DEFAULT_EMD_CAP).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        assert!(plan.exact_costs());
        let total: Ratio<u64> = plan.cells().map(|(_, _, f)| f).sum();
        assert_eq!(total, Ratio::from_integer(1));
    }

    #[test]
    fn empty_trace_against_nonempty() {
        let l1 = log(&[(&[], 1)]);
        let l2 = log(&[(&["a", "b"], 1)]);
        assert_eq!(emd(&l1, &l2, DEFAULT_EMD_CAP).unwrap(), 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        let l1 = log(&[(&["a"], 1), (&["b"], 1)]);
        let err = emd(&l1, &l1, 3).unwrap_err();
        assert!(matches!(err, MetricError::SolverCap { pairs: 4, cap: 3 }));
    }

    #[test]
    fn empty_log_is_rejected() {
        let l = log(&[(&["a"], 1)]);
        assert!(matches!(
            emd(&EventLog::new(), &l, DEFAULT_EMD_CAP),
            Err(MetricError::EmptyLog)
        ));
    }
}
