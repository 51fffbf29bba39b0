//! Direct solver: reverse Cuthill-McKee reordering followed by a banded LU
//! factorization with partial (row) pivoting.
//!
//! The saddle point systems of the fluid have a zero pressure block, so
//! pivoting is required. With row interchanges confined to the lower band the
//! upper bandwidth grows from `ku` to at most `kl + ku`, which the storage
//! reserves up front.

use std::collections::VecDeque;

use crate::error::{FsiError, Result};
use crate::fem::sparse::CsrMatrix;

/// Immutable LU factors; safe to share between threads for concurrent solves.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    kl: usize,
    width: usize,
    band: Vec<f64>,
    /// Multipliers of step `k` for rows `k+1..=k+kl`.
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

/// Adjacency lists of the symmetrized sparsity pattern (no self loops).
fn adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.iter() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, mark: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] && !mark[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

/// Reverse Cuthill-McKee ordering, `order[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let mut start = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        // pseudo-peripheral start node
        let mut ecc = 0;
        for _ in 0..8 {
            let levels = bfs_levels(&adj, start, &placed);
            if levels.len() <= ecc + 1 && ecc > 0 {
                break;
            }
            ecc = levels.len() - 1;
            let cand = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (degree[v], v))
                .unwrap();
            if cand == start {
                break;
            }
            start = cand;
        }

        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

impl Factorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(FsiError::DimensionMismatch(format!(
                "factorization needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.iter() {
            let (r, c) = (inv[i], inv[j]);
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * width];
        for (i, j, v) in a.iter() {
            let (r, c) = (inv[i], inv[j]);
            band[r * width + c + kl - r] += v;
        }
        let anorm = a.norm_inf();
        let tol = n as f64 * f64::EPSILON * anorm;

        let mut lower = vec![0.0; n * kl];
        let mut pivots = vec![0; n];
        // column c of row r lives at band[r * width + c + kl - r]
        for k in 0..n {
            let last = (n - 1).min(k + kl);
            let cmax = (n - 1).min(k + kl + ku);
            let mut p = k;
            let mut best = band[k * width + kl].abs();
            for i in k + 1..=last {
                let v = band[i * width + k + kl - i].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) {
                return Err(FsiError::SingularMatrix {
                    pivot: k,
                    row: perm[k],
                    magnitude: best,
                });
            }
            pivots[k] = p;
            if p != k {
                for c in k..=cmax {
                    band.swap(k * width + c + kl - k, p * width + c + kl - p);
                }
            }
            let (head, tail) = band.split_at_mut((k + 1) * width);
            let pivot_row = &head[k * width + kl..k * width + kl + (cmax - k) + 1];
            let piv = pivot_row[0];
            for i in k + 1..=last {
                let row = &mut tail[(i - k - 1) * width..(i - k) * width];
                let off = k + kl - i;
                let f = row[off] / piv;
                lower[k * kl + (i - k - 1)] = f;
                row[off] = 0.0;
                if f != 0.0 {
                    for (dst, &src) in row[off + 1..off + 1 + (cmax - k)].iter_mut().zip(&pivot_row[1..]) {
                        *dst -= f * src;
                    }
                }
            }
        }
        Ok(Self {
            n,
            perm,
            kl,
            width,
            band,
            lower,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let (n, kl, w) = (self.n, self.kl, self.width);
        let ku_total = w - kl - 1;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            y.swap(k, self.pivots[k]);
            let yk = y[k];
            if yk != 0.0 {
                let last = (n - 1).min(k + kl);
                for i in k + 1..=last {
                    y[i] -= self.lower[k * kl + (i - k - 1)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let cmax = (n - 1).min(k + ku_total);
            let row = &self.band[k * w + kl..k * w + kl + (cmax - k) + 1];
            let s: f64 = row[1..].iter().zip(&y[k + 1..=cmax]).map(|(a, x)| a * x).sum();
            y[k] = (y[k] - s) / row[0];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Factor and solve in one go.
pub fn solve_sparse(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(FsiError::DimensionMismatch(format!(
            "rhs has length {}, matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    Ok(Factorization::new(a)?.solve(b))
}
