//! Sparse assembly, bandwidth-reducing reordering and banded LU.

use crate::error::SolverError;
use crate::linalg::{DMatrix, DenseLu};
use crate::scalar::Real;
use std::collections::VecDeque;

/// Systems below this size are solved with dense LU.
pub const DENSE_CUTOFF: usize = 300;

/// Coordinate-format accumulator. Duplicate entries are summed in insertion order.
#[derive(Debug, Clone)]
pub struct TripletMatrix<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletMatrix<T> {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_else(T::zero)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Keep rows and columns whose index maps to `Some(k)`.
    pub fn submatrix(&self, map: &[Option<usize>], m: usize) -> CsrMatrix<T> {
        let mut t = TripletMatrix::new(m);
        for i in 0..self.n {
            if let Some(ri) = map[i] {
                for (j, v) in self.row(i) {
                    if let Some(cj) = map[j] {
                        t.push(ri, cj, v);
                    }
                }
            }
        }
        t.to_csr()
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm_ordering<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let adj = a.symmetric_adjacency();
    let n = a.dim();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (adj[i].len(), i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (usize, usize) {
    let mut depth = vec![usize::MAX; adj.len()];
    depth[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (last, depth[last])
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut node = seed;
    let (mut far, mut ecc) = bfs_levels(node, adj);
    for _ in 0..8 {
        let (far2, ecc2) = bfs_levels(far, adj);
        if ecc2 <= ecc {
            break;
        }
        node = far;
        far = far2;
        ecc = ecc2;
    }
    node
}

/// Banded LU with partial pivoting; row `i` stores columns `i-kl ..= i+kl+ku`.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<T>,
    pivots: Vec<usize>,
    pub pivot_ratio: T,
}

impl<T: Real> BandedLu<T> {
    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    fn idx(&self, i: usize, c: usize) -> usize {
        i * Self::width(self.kl, self.ku) + (c + self.kl - i)
    }

    pub fn factor(a: &CsrMatrix<T>) -> Result<Self, SolverError> {
        let n = a.dim();
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            for (j, _) in a.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let w = Self::width(kl, ku);
        let mut lu = Self { n, kl, ku, band: vec![T::zero(); n * w], pivots: vec![0; n], pivot_ratio: T::one() };
        for i in 0..n {
            for (j, v) in a.row(i) {
                let k = lu.idx(i, j);
                lu.band[k] += v;
            }
        }
        let tiny = a.max_abs() * T::epsilon() * T::lit(n.max(1) as f64);
        let (mut pmin, mut pmax) = (T::infinity(), T::zero());
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = lu.band[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.band[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(SolverError::SingularMatrix { pivot: k });
            }
            pmin = pmin.min(best);
            pmax = pmax.max(best);
            lu.pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a1, a2) = (lu.idx(k, c), lu.idx(p, c));
                    lu.band.swap(a1, a2);
                }
            }
            let pivot = lu.band[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let f = lu.band[ik] / pivot;
                lu.band[ik] = f;
                if f == T::zero() {
                    continue;
                }
                for c in k + 1..=last_col {
                    let kc = lu.band[lu.idx(k, c)];
                    let ic = lu.idx(i, c);
                    lu.band[ic] -= f * kc;
                }
            }
        }
        lu.pivot_ratio = if n == 0 { T::one() } else { pmax / pmin };
        Ok(lu)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                x[i] -= self.band[self.idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                s -= self.band[self.idx(i, c)] * x[c];
            }
            x[i] = s / self.band[self.idx(i, i)];
        }
        x
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

fn condition_limit<T: Real>() -> T {
    T::lit(1e14).min(T::lit(1e-2) / T::epsilon())
}

/// Solve `A x = b`; dense LU below [`DENSE_CUTOFF`], RCM plus banded LU above.
pub fn solve<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>, SolverError> {
    let n = a.dim();
    if n < DENSE_CUTOFF {
        return solve_dense(a, b);
    }
    let perm = rcm_ordering(a);
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let map: Vec<Option<usize>> = inv.iter().map(|&k| Some(k)).collect();
    let pa = a.submatrix(&map, n);
    let lu = BandedLu::factor(&pa)?;
    if lu.pivot_ratio > condition_limit() {
        return Err(SolverError::IllConditioned { estimate: lu.pivot_ratio.to_f64_lossy() });
    }
    let pb: Vec<T> = perm.iter().map(|&old| b[old]).collect();
    let px = lu.solve(&pb);
    let mut x = vec![T::zero(); n];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = px[new];
    }
    check_finite(&x)?;
    Ok(x)
}

/// Dense LU path, also used as reference in tests.
pub fn solve_dense<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>, SolverError> {
    let lu = DenseLu::factor(a.to_dense())?;
    let x = lu.solve(b);
    check_finite(&x)?;
    Ok(x)
}

fn check_finite<T: Real>(x: &[T]) -> Result<(), SolverError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn banded_test_matrix(n: usize, shuffle: bool) -> CsrMatrix<f64> {
        let relabel = |i: usize| if shuffle { (i * 7919) % n } else { i };
        let mut t = TripletMatrix::new(n);
        for i in 0..n {
            t.push(relabel(i), relabel(i), 4.0 + (i % 3) as f64);
            for off in [1usize, 5] {
                if i + off < n {
                    let v = -1.0 / off as f64;
                    t.push(relabel(i), relabel(i + off), v);
                    t.push(relabel(i + off), relabel(i), v * 0.5);
                }
            }
        }
        t.to_csr()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletMatrix::<f64>::new(2);
        t.push(0, 1, 1.0);
        t.push(0, 1, 2.5);
        t.push(1, 1, 1.0);
        let m = t.to_csr();
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn banded_path_matches_dense_path() {
        let n = 457;
        let a = banded_test_matrix(n, true);
        let x_true: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin()).collect();
        let b = a.mul_vec(&x_true);
        let xs = solve(&a, &b).unwrap();
        let xd = solve_dense(&a, &b).unwrap();
        for i in 0..n {
            assert_relative_eq!(xs[i], x_true[i], epsilon = 1e-10);
            assert_relative_eq!(xs[i], xd[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn rcm_restores_small_bandwidth() {
        let a = banded_test_matrix(200, true);
        let perm = rcm_ordering(&a);
        let mut inv = vec![0; 200];
        for (k, &o) in perm.iter().enumerate() {
            inv[o] = k;
        }
        let map: Vec<Option<usize>> = inv.iter().map(|&k| Some(k)).collect();
        let lu = BandedLu::factor(&a.submatrix(&map, 200)).unwrap();
        let (kl, ku) = lu.bandwidth();
        assert!(kl <= 10 && ku <= 10, "bandwidth {kl} {ku}");
    }

    #[test]
    fn singular_banded_matrix_is_reported() {
        let mut t = TripletMatrix::<f64>::new(400);
        for i in 0..399 {
            t.push(i, i, 1.0);
        }
        let r = solve(&t.to_csr(), &vec![1.0; 400]);
        assert!(matches!(r, Err(SolverError::SingularMatrix { .. })));
    }
}
