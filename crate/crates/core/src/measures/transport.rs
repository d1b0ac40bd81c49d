//! Exact discrete optimal transport.
//!
//! [`solve`] runs the transportation simplex (the network simplex method
//! specialized to the complete bipartite graph): a northwest-corner basis,
//! dual potentials from the basis tree, and cycle pivots until every reduced
//! cost is nonnegative. [`wasserstein1_cdf`] is the closed form on the line.

use crate::error::{Error, Result};

/// An optimal transport plan.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// `flow[i][j]` mass moved from source `i` to target `j`.
    pub flow: Vec<Vec<f64>>,
    pub cost: f64,
    pub pivots: usize,
}

/// Solve `min sum flow[i][j] * cost[i][j]` subject to row sums `supply` and
/// column sums `demand`. Both marginals must carry the same total mass.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    if cost.len() != supply.len() || cost.iter().any(|r| r.len() != demand.len()) {
        return Err(Error::InfeasibleLp("cost matrix shape does not match marginals".into()));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(1.0) {
        return Err(Error::InfeasibleLp(format!("unbalanced marginals {total_s} vs {total_d}")));
    }

    // Zero-mass rows and columns never carry flow; dropping them keeps the
    // basis small and removes most degeneracy.
    let rows: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    let mut flow = vec![vec![0.0; demand.len()]; supply.len()];
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InfeasibleLp("no mass to transport".into()));
    }

    let a: Vec<f64> = rows.iter().map(|&i| supply[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| demand[j]).collect();
    let c: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost[i][j]).collect())
        .collect();

    let mut simplex = Simplex::northwest(&a, &b, c);
    let pivots = simplex.optimize()?;

    let mut total = 0.0;
    for (ri, &i) in rows.iter().enumerate() {
        for (ci, &j) in cols.iter().enumerate() {
            let x = simplex.x[ri][ci];
            if simplex.basic[ri][ci] && x > 0.0 {
                flow[i][j] = x;
                total += x * cost[i][j];
            }
        }
    }
    Ok(TransportPlan { flow, cost: total, pivots })
}

struct Simplex {
    m: usize,
    n: usize,
    c: Vec<Vec<f64>>,
    x: Vec<Vec<f64>>,
    basic: Vec<Vec<bool>>,
}

impl Simplex {
    fn northwest(a: &[f64], b: &[f64], c: Vec<Vec<f64>>) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut x = vec![vec![0.0; n]; m];
        let mut basic = vec![vec![false; n]; m];
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a[0], b[0]);
        loop {
            basic[i][j] = true;
            if i == m - 1 && j == n - 1 {
                // absorbs the float residue of both marginals
                x[i][j] = ra.max(rb).max(0.0);
                break;
            }
            if i == m - 1 {
                x[i][j] = rb.min(ra).max(0.0);
                ra -= x[i][j];
                j += 1;
                rb = b[j];
            } else if j == n - 1 || ra <= rb {
                x[i][j] = ra;
                rb -= ra;
                i += 1;
                ra = a[i];
            } else {
                x[i][j] = rb;
                ra -= rb;
                j += 1;
                rb = b[j];
            }
        }
        // The staircase yields exactly m + n - 1 basic cells forming a
        // spanning tree of the bipartite graph.
        for row in x.iter_mut() {
            for v in row.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Simplex { m, n, c, x, basic }
    }

    /// Dual potentials with `u[0] = 0` and `u[i] + v[j] = c[i][j]` on basic cells.
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.m, self.n);
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut stack = vec![Node::Row(0)];
        while let Some(node) = stack.pop() {
            match node {
                Node::Row(i) => {
                    for j in 0..n {
                        if self.basic[i][j] && v[j].is_nan() {
                            v[j] = self.c[i][j] - u[i];
                            stack.push(Node::Col(j));
                        }
                    }
                }
                Node::Col(j) => {
                    for i in 0..m {
                        if self.basic[i][j] && u[i].is_nan() {
                            u[i] = self.c[i][j] - v[j];
                            stack.push(Node::Row(i));
                        }
                    }
                }
            }
        }
        (u, v)
    }

    /// Basis-tree path from column `j` to row `i`, as the list of cells traversed.
    fn tree_path(&self, i: usize, j: usize) -> Option<Vec<(usize, usize)>> {
        let (m, n) = (self.m, self.n);
        // parent pointers over nodes: rows are 0..m, columns m..m+n
        let mut parent: Vec<Option<usize>> = vec![None; m + n];
        let mut seen = vec![false; m + n];
        let start = m + j;
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == i {
                break;
            }
            if node < m {
                for col in 0..n {
                    if self.basic[node][col] && !seen[m + col] {
                        seen[m + col] = true;
                        parent[m + col] = Some(node);
                        queue.push_back(m + col);
                    }
                }
            } else {
                let col = node - m;
                for row in 0..m {
                    if self.basic[row][col] && !seen[row] {
                        seen[row] = true;
                        parent[row] = Some(node);
                        queue.push_back(row);
                    }
                }
            }
        }
        if !seen[i] {
            return None;
        }
        let mut cells = Vec::new();
        let mut node = i;
        while let Some(p) = parent[node] {
            let cell = if node < m { (node, p - m) } else { (p, node - m) };
            cells.push(cell);
            node = p;
        }
        // cells run from row i back to column j; flip so they start at column j
        cells.reverse();
        Some(cells)
    }

    fn optimize(&mut self) -> Result<usize> {
        let (m, n) = (self.m, self.n);
        let scale = self
            .c
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
            .max(1.0);
        let eps = 1e-12 * scale;
        let dantzig_budget = 50 * (m + n) * (m + n) + 100;
        let hard_budget = 20 * dantzig_budget;
        let mut pivots = 0;
        loop {
            let (u, v) = self.potentials();
            let bland = pivots >= dantzig_budget;
            let mut enter: Option<(usize, usize)> = None;
            let mut best = -eps;
            'scan: for i in 0..m {
                for j in 0..n {
                    if self.basic[i][j] {
                        continue;
                    }
                    let r = self.c[i][j] - u[i] - v[j];
                    if r < best {
                        enter = Some((i, j));
                        if bland {
                            break 'scan;
                        }
                        best = r;
                    }
                }
            }
            let Some((ei, ej)) = enter else {
                return Ok(pivots);
            };
            if pivots >= hard_budget {
                return Err(Error::InfeasibleLp(format!("no convergence after {pivots} pivots")));
            }
            let path = self
                .tree_path(ei, ej)
                .ok_or_else(|| Error::InfeasibleLp("basis is not a spanning tree".into()))?;
            // Along the path from column ej to row ei the cells alternate
            // between losing and gaining flow, starting with a loss.
            let mut theta = f64::INFINITY;
            let mut leave = path[0];
            let mut leave_key = (usize::MAX, usize::MAX);
            for (k, &(i, j)) in path.iter().enumerate() {
                if k % 2 == 0 {
                    let x = self.x[i][j];
                    let key = if bland { (i, j) } else { (k, 0) };
                    if x < theta || (x == theta && key < leave_key) {
                        theta = x;
                        leave = (i, j);
                        leave_key = key;
                    }
                }
            }
            for (k, &(i, j)) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.x[i][j] -= theta;
                } else {
                    self.x[i][j] += theta;
                }
            }
            self.x[ei][ej] = theta;
            self.basic[ei][ej] = true;
            self.basic[leave.0][leave.1] = false;
            self.x[leave.0][leave.1] = 0.0;
            pivots += 1;
        }
    }
}

enum Node {
    Row(usize),
    Col(usize),
}

/// Wasserstein-1 between two distributions on the real line:
/// `integral |F_p - F_q|` swept over the merged sorted support.
pub fn wasserstein1_cdf(xs: &[f64], p: &[f64], ys: &[f64], q: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = xs
        .iter()
        .zip(p)
        .map(|(&x, &m)| (x, m))
        .chain(ys.iter().zip(q).map(|(&y, &m)| (y, -m)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for w in events.windows(2) {
        diff += w[0].1;
        total += diff.abs() * (w[1].0 - w[0].0);
    }
    total
}
