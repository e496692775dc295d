//! Exact balanced transportation problem.
//!
//! Successive shortest paths on the bipartite supply/demand graph, with
//! Johnson potentials so every Dijkstra run sees non-negative reduced costs.
//! Masses and costs are integers, so the optimum is exact.

/// Optimal flow for a balanced instance. `flows[i * m + j]` is the mass sent
/// from source `i` to sink `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Flow {
    pub m: usize,
    pub flows: Vec<u64>,
}

impl Flow {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.flows[i * self.m + j]
    }
}

const INF: i128 = i128::MAX / 4;

/// Minimum-cost flow moving `supply` onto `demand` with per-unit `cost`
/// (row-major, `supply.len() x demand.len()`, non-negative).
///
/// Panics if the instance is unbalanced.
pub(crate) fn solve(supply: &[u64], demand: &[u64], cost: &[i128]) -> Flow {
    let (n, m) = (supply.len(), demand.len());
    assert_eq!(cost.len(), n * m);
    assert_eq!(
        supply.iter().map(|&x| x as u128).sum::<u128>(),
        demand.iter().map(|&x| x as u128).sum::<u128>(),
        "unbalanced transportation instance"
    );
    debug_assert!(cost.iter().all(|&c| c >= 0));

    // Node layout: S = 0, sources 1..=n, sinks n+1..=n+m, T = n+m+1.
    let v = n + m + 2;
    let (s_node, t_node) = (0, v - 1);
    let src = |i: usize| 1 + i;
    let snk = |j: usize| 1 + n + j;

    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    let mut flows = vec![0u64; n * m];
    let mut pot = vec![0i128; v];
    let mut dist = vec![INF; v];
    let mut prev = vec![usize::MAX; v];
    let mut seen = vec![false; v];

    while need.iter().any(|&d| d > 0) {
        dist.fill(INF);
        prev.fill(usize::MAX);
        seen.fill(false);
        dist[s_node] = 0;

        loop {
            let mut u = usize::MAX;
            let mut best = INF;
            for (x, &d) in dist.iter().enumerate() {
                if !seen[x] && d < best {
                    best = d;
                    u = x;
                }
            }
            if u == usize::MAX || u == t_node {
                break;
            }
            seen[u] = true;
            let mut relax = |to: usize, c: i128| {
                let nd = best + c + pot[u] - pot[to];
                if nd < dist[to] {
                    dist[to] = nd;
                    prev[to] = u;
                }
            };
            if u == s_node {
                for (i, &l) in left.iter().enumerate() {
                    if l > 0 {
                        relax(src(i), 0);
                    }
                }
            } else if u <= n {
                let i = u - 1;
                for j in 0..m {
                    relax(snk(j), cost[i * m + j]);
                }
            } else {
                let j = u - 1 - n;
                for i in 0..n {
                    if flows[i * m + j] > 0 {
                        relax(src(i), -cost[i * m + j]);
                    }
                }
                if need[j] > 0 {
                    relax(t_node, 0);
                }
            }
        }
        assert!(
            dist[t_node] < INF,
            "no augmenting path in a balanced instance"
        );

        let reach = dist[t_node];
        for x in 0..v {
            pot[x] += dist[x].min(reach);
        }

        // Bottleneck along the path T <- sink <- source (<- sink <- source)* <- S.
        let mut amount = u64::MAX;
        let mut x = t_node;
        while x != s_node {
            let p = prev[x];
            if x == t_node {
                amount = amount.min(need[p - 1 - n]);
            } else if p == s_node {
                amount = amount.min(left[x - 1]);
            } else if p > n {
                // backward edge sink p -> source x
                amount = amount.min(flows[(x - 1) * m + (p - 1 - n)]);
            }
            x = p;
        }

        let mut x = t_node;
        while x != s_node {
            let p = prev[x];
            if x == t_node {
                need[p - 1 - n] -= amount;
            } else if p == s_node {
                left[x - 1] -= amount;
            } else if p > n {
                flows[(x - 1) * m + (p - 1 - n)] -= amount;
            } else {
                flows[(p - 1) * m + (x - 1 - n)] += amount;
            }
            x = p;
        }
    }

    Flow { m, flows }
}
