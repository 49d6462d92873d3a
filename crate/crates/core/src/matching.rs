//! Bipartite matching over a square, zero-padded weight matrix.
//!
//! Rows are sources (the first `m_real` of them real, the rest all-zero
//! dummies), columns are relays. Every solver returns a perfect matching of
//! the padded matrix; objectives are evaluated on real rows only. Ties go to
//! the lowest row, then the lowest column.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    m_real: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    /// Builds an `n×n` matrix whose rows `m_real..n` must be all zero.
    pub fn new(m_real: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if m_real == 0 || m_real > n {
            return Err(Error::InvalidMatrix(format!("need 1 <= m_real <= n, got m_real={m_real}, n={n}")));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) = {w} is not a finite non-negative weight")));
                }
                if i >= m_real && w != 0.0 {
                    return Err(Error::InvalidMatrix(format!("dummy row {i} has non-zero entry at column {j}")));
                }
            }
        }
        Ok(WeightMatrix {
            n,
            m_real,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Pads `M` real rows of width `N ≥ M` with `N − M` zero rows.
    pub fn from_real_rows(real: Vec<Vec<f64>>) -> Result<Self> {
        let m = real.len();
        let n = real.first().map_or(0, Vec::len);
        if n < m {
            return Err(Error::InvalidMatrix(format!("{m} rows but only {n} columns")));
        }
        let mut rows = real;
        rows.resize(n, vec![0.0; n]);
        Self::new(m, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_real(&self) -> usize {
        self.m_real
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }
}

/// A perfect matching of the padded matrix: `pairing[row] = col`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairing: Vec<usize>,
}

impl Matching {
    /// `(row, col)` pairs of the real rows.
    pub fn real_pairs(&self, m_real: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairing.iter().copied().enumerate().take(m_real)
    }

    pub fn real_weights(&self, w: &WeightMatrix) -> Vec<f64> {
        self.real_pairs(w.m_real()).map(|(r, c)| w.get(r, c)).collect()
    }

    pub fn total_weight(&self, w: &WeightMatrix) -> f64 {
        self.real_weights(w).iter().sum()
    }

    pub fn max_weight(&self, w: &WeightMatrix) -> f64 {
        self.real_weights(w).into_iter().fold(0.0, f64::max)
    }

    /// Real-row weights sorted in descending order.
    pub fn descending_weights(&self, w: &WeightMatrix) -> Vec<f64> {
        let mut v = self.real_weights(w);
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.pairing.len()];
        self.pairing
            .iter()
            .all(|&c| c < seen.len() && !std::mem::replace(&mut seen[c], true))
    }
}

/// Lexicographic order on equal-length weight vectors.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckResult {
    pub matching: Matching,
    pub bottleneck_value: f64,
    pub bottleneck_edge: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbmResult {
    pub matching: Matching,
    /// True when every iteration found a unique bottleneck edge, in which
    /// case the matching is the minimum bottleneck matching.
    pub certified: bool,
}

/// Maximum-cardinality matching of a square boolean adjacency matrix by
/// augmenting paths. Returns the size and `row → col` assignments.
pub fn maximum_matching(adjacency: &[Vec<bool>]) -> (usize, Vec<Option<usize>>) {
    let n = adjacency.len();
    max_matching_by(n, n, |r, c| adjacency[r][c])
}

fn max_matching_by(rows: usize, cols: usize, admits: impl Fn(usize, usize) -> bool) -> (usize, Vec<Option<usize>>) {
    struct Search<'a, F> {
        cols: usize,
        admits: &'a F,
        row_match: Vec<Option<usize>>,
        col_match: Vec<Option<usize>>,
        visited: Vec<bool>,
    }

    impl<F: Fn(usize, usize) -> bool> Search<'_, F> {
        fn augment(&mut self, r: usize) -> bool {
            for c in 0..self.cols {
                if self.visited[c] || !(self.admits)(r, c) {
                    continue;
                }
                self.visited[c] = true;
                let free = match self.col_match[c] {
                    None => true,
                    Some(other) => self.augment(other),
                };
                if free {
                    self.col_match[c] = Some(r);
                    self.row_match[r] = Some(c);
                    return true;
                }
            }
            false
        }
    }

    let mut s = Search {
        cols,
        admits: &admits,
        row_match: vec![None; rows],
        col_match: vec![None; cols],
        visited: vec![false; cols],
    };
    // greedy seed, then augment the rows it left unmatched
    for r in 0..rows {
        if let Some(c) = (0..cols).find(|&c| s.col_match[c].is_none() && admits(r, c)) {
            s.col_match[c] = Some(r);
            s.row_match[r] = Some(c);
        }
    }
    let mut size = s.row_match.iter().flatten().count();
    for r in 0..rows {
        if s.row_match[r].is_none() {
            s.visited.fill(false);
            if s.augment(r) {
                size += 1;
            }
        }
    }
    (size, s.row_match)
}

/// Minimum total real-row weight over all perfect matchings (Hungarian
/// method with potentials, `O(n³)`).
pub fn hungarian_min_weight(w: &WeightMatrix) -> (Matching, f64) {
    let n = w.n();
    // 1-based potentials; column 0 is the virtual start column
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = w.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairing = vec![0usize; n];
    for j in 1..=n {
        pairing[col_row[j] - 1] = j - 1;
    }
    let matching = Matching { pairing };
    let total = matching.total_weight(w);
    (matching, total)
}

/// Square sub-matrix of `w` on the listed rows and columns.
struct View<'a> {
    w: &'a WeightMatrix,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

struct LocalBottleneck {
    /// `pairing[i]` is an index into `cols`
    pairing: Vec<usize>,
    value: f64,
    /// local (row, col) indices
    edge: (usize, usize),
}

impl<'a> View<'a> {
    fn full(w: &'a WeightMatrix) -> Self {
        View {
            w,
            rows: (0..w.n()).collect(),
            cols: (0..w.n()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.w.get(self.rows[i], self.cols[j])
    }

    fn is_real(&self, i: usize) -> bool {
        self.rows[i] < self.w.m_real()
    }

    fn perfect_under(&self, admits: impl Fn(usize, usize) -> bool) -> (bool, Vec<Option<usize>>) {
        let k = self.len();
        let (size, pairing) = max_matching_by(k, k, admits);
        (size == k, pairing)
    }

    /// Threshold search over the distinct real weights; a threshold is
    /// feasible when the edges at or below it admit a perfect matching.
    fn bottleneck(&self) -> LocalBottleneck {
        let k = self.len();
        let real: Vec<usize> = (0..k).filter(|&i| self.is_real(i)).collect();
        debug_assert!(!real.is_empty());

        // every real row needs at least its cheapest edge
        let floor = real
            .iter()
            .map(|&i| (0..k).map(|j| self.get(i, j)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let mut candidates: Vec<f64> = real
            .iter()
            .flat_map(|&i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .filter(|&x| x >= floor)
            .collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let feasible = |t: f64| self.perfect_under(|i, j| self.get(i, j) <= t);
        let (mut lo, mut hi) = (0usize, candidates.len() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if feasible(candidates[mid]).0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (ok, pairing) = feasible(candidates[lo]);
        debug_assert!(ok, "complete bipartite graph must admit a perfect matching");
        let pairing: Vec<usize> = pairing.into_iter().map(|c| c.expect("perfect matching")).collect();

        let value = real.iter().map(|&i| self.get(i, pairing[i])).fold(0.0, f64::max);
        let row = *real
            .iter()
            .find(|&&i| self.get(i, pairing[i]) == value)
            .expect("bottleneck row exists");
        LocalBottleneck {
            value,
            edge: (row, pairing[row]),
            pairing,
        }
    }

    /// True when no perfect matching survives deleting the bottleneck edge
    /// and every edge strictly heavier than it.
    fn bottleneck_edge_is_unique(&self, edge: (usize, usize), value: f64) -> bool {
        !self.perfect_under(|i, j| (i, j) != edge && self.get(i, j) <= value).0
    }

    fn remove(&mut self, local_row: usize, local_col: usize) {
        self.rows.remove(local_row);
        self.cols.remove(local_col);
    }
}

/// A perfect matching whose largest real-row weight is as small as possible.
pub fn bottleneck_matching(w: &WeightMatrix) -> BottleneckResult {
    let view = View::full(w);
    let b = view.bottleneck();
    BottleneckResult {
        matching: Matching { pairing: b.pairing },
        bottleneck_value: b.value,
        bottleneck_edge: b.edge,
    }
}

/// Whether `result`'s bottleneck edge appears with maximum weight in every
/// bottleneck matching of `w`.
pub fn unique_bottleneck_edge_test(w: &WeightMatrix, result: &BottleneckResult) -> bool {
    View::full(w).bottleneck_edge_is_unique(result.bottleneck_edge, result.bottleneck_value)
}

/// Repeatedly fixes the unique bottleneck edge and deletes its endpoints.
/// Falls back to the first bottleneck matching, uncertified, as soon as an
/// iteration has no unique bottleneck edge.
pub fn minimum_bottleneck_matching(w: &WeightMatrix) -> MbmResult {
    let n = w.n();
    let mut view = View::full(w);
    let first = view.bottleneck();
    let first_matching = Matching {
        pairing: first.pairing.clone(),
    };

    let mut pairing = vec![usize::MAX; n];
    let mut current = Some(first);
    for _ in 0..w.m_real() {
        let b = current.take().unwrap_or_else(|| view.bottleneck());
        if !view.bottleneck_edge_is_unique(b.edge, b.value) {
            return MbmResult {
                matching: first_matching,
                certified: false,
            };
        }
        let (i, j) = b.edge;
        // the rest of this bottleneck matching stays perfect on the reduced graph
        debug_assert_eq!(b.pairing[i], j);
        pairing[view.rows[i]] = view.cols[j];
        view.remove(i, j);
    }
    // only dummy rows remain; they cost nothing
    for (&r, &c) in view.rows.iter().zip(&view.cols) {
        pairing[r] = c;
    }
    MbmResult {
        matching: Matching { pairing },
        certified: true,
    }
}
