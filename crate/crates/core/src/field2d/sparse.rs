//! Compressed sparse rows, ILU(0), and preconditioned BiCGSTAB.

use std::thread;

/// CSR matrix with sorted column indices in every row.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Rows given as unsorted `(col, value)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    fn mul_rows(&self, x: &[f64], y: &mut [f64], first: usize) {
        for (off, yi) in y.iter_mut().enumerate() {
            let i = first + off;
            *yi = self.row_range(i).map(|p| self.vals[p] * x[self.cols[p]]).sum();
        }
    }

    /// `y = A x`, rows split over `parts` threads.
    pub fn mul(&self, x: &[f64], y: &mut [f64], parts: usize) {
        if parts <= 1 {
            self.mul_rows(x, y, 0);
            return;
        }
        let chunk = self.n.div_ceil(parts);
        thread::scope(|s| {
            for (p, ys) in y.chunks_mut(chunk).enumerate() {
                s.spawn(move || self.mul_rows(x, ys, p * chunk));
            }
        });
    }
}

/// Incomplete LU factorisation with the sparsity pattern of `A`.
pub(crate) struct Ilu0 {
    lu: Csr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Option<Self> {
        let mut lu = a.clone();
        let mut diag = vec![usize::MAX; a.n];
        for i in 0..a.n {
            for p in lu.row_range(i) {
                if lu.cols[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return None;
            }
        }
        for i in 0..a.n {
            let range = lu.row_range(i);
            for p in range.clone() {
                let k = lu.cols[p];
                if k >= i {
                    break;
                }
                let pivot = lu.vals[diag[k]];
                if pivot == 0.0 {
                    return None;
                }
                lu.vals[p] /= pivot;
                let lik = lu.vals[p];
                for q in range.clone() {
                    let j = lu.cols[q];
                    if j <= k {
                        continue;
                    }
                    if let Some(t) = lu.row_range(k).find(|&t| lu.cols[t] == j) {
                        lu.vals[q] -= lik * lu.vals[t];
                    }
                }
            }
            if lu.vals[diag[i]] == 0.0 {
                return None;
            }
        }
        Some(Ilu0 { lu, diag })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = b[i];
            for p in lu.row_ptr[i]..self.diag[i] {
                s -= lu.vals[p] * x[lu.cols[p]];
            }
            x[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = x[i];
            for p in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.vals[p] * x[lu.cols[p]];
            }
            x[i] = s / lu.vals[self.diag[i]];
        }
    }
}

/// Dot product summed per partition, then across partitions in order.
fn dot(a: &[f64], b: &[f64], parts: usize) -> f64 {
    let chunk = a.len().div_ceil(parts.max(1)).max(1);
    a.chunks(chunk)
        .zip(b.chunks(chunk))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

pub(crate) struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` from `x = 0` to relative residual `tol`.
pub(crate) fn bicgstab(a: &Csr, b: &[f64], tol: f64, max_iter: usize, parts: usize) -> (Vec<f64>, SolveStats) {
    let n = a.n;
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b, parts).sqrt();
    if b_norm == 0.0 {
        return (x, SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let precond = Ilu0::new(a);
    let apply_m = |src: &[f64], dst: &mut [f64]| match &precond {
        Some(p) => p.solve(src, dst),
        None => dst.copy_from_slice(src),
    };
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let rho_new = dot(&r_hat, &r, parts);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply_m(&p, &mut y);
        a.mul(&y, &mut v, parts);
        alpha = rho_new / dot(&r_hat, &v, parts);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let s_norm = dot(&s, &s, parts).sqrt() / b_norm;
        if s_norm < tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            break;
        }
        apply_m(&s, &mut z);
        a.mul(&z, &mut t, parts);
        let tt = dot(&t, &t, parts);
        omega = if tt > 0.0 { dot(&t, &s, parts) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = dot(&r, &r, parts).sqrt() / b_norm;
        rho = rho_new;
        if res < tol || omega == 0.0 {
            break;
        }
    }
    // Report the true residual, not the recurrence.
    a.mul(&x, &mut t, parts);
    let true_res: f64 = b.iter().zip(&t).map(|(bi, ti)| (bi - ti) * (bi - ti)).sum::<f64>().sqrt() / b_norm;
    (x, SolveStats { iterations, relative_residual: true_res })
}
