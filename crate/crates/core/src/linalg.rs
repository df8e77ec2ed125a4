//! Small dense linear-algebra routines used by the regression-based fits.
//!
//! Problems here are tiny (at most a few dozen columns), so simple
//! deterministic implementations are preferred over an external BLAS.

/// Row-major dense matrix view helpers are deliberately avoided; callers pass
/// flat buffers with explicit dimensions.
///
/// Solve the symmetric positive-definite system `a x = b` in place via
/// Cholesky. `a` is `n x n` row-major. Returns `None` when the matrix is not
/// positive definite within a small pivot floor.
pub fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 1e-12 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward substitution L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    // back substitution L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

/// Least-squares solution of `min ||X beta - y||` via Householder QR.
///
/// `x` is `rows x cols` row-major with `rows >= cols`. Returns `None` when a
/// column is (numerically) linearly dependent on the previous ones.
pub fn lstsq_qr(x: &[f64], y: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(x.len(), rows * cols);
    debug_assert_eq!(y.len(), rows);
    if rows < cols {
        return None;
    }
    let mut r = x.to_vec();
    let mut q_t_y = y.to_vec();

    for k in 0..cols {
        // Householder vector for column k, rows k..
        let mut norm = 0.0;
        for i in k..rows {
            norm += r[i * cols + k] * r[i * cols + k];
        }
        norm = norm.sqrt();
        if norm < 1e-12 {
            return None;
        }
        let alpha = if r[k * cols + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows - k];
        v[0] = r[k * cols + k] - alpha;
        for i in (k + 1)..rows {
            v[i - k] = r[i * cols + k];
        }
        let v_norm2: f64 = v.iter().map(|t| t * t).sum();
        if v_norm2 < 1e-300 {
            continue;
        }
        // apply H = I - 2 v v^T / (v^T v) to R columns k.. and to q_t_y
        for j in k..cols {
            let mut dot = 0.0;
            for i in k..rows {
                dot += v[i - k] * r[i * cols + j];
            }
            let s = 2.0 * dot / v_norm2;
            for i in k..rows {
                r[i * cols + j] -= s * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..rows {
            dot += v[i - k] * q_t_y[i];
        }
        let s = 2.0 * dot / v_norm2;
        for i in k..rows {
            q_t_y[i] -= s * v[i - k];
        }
        r[k * cols + k] = alpha;
        for i in (k + 1)..rows {
            r[i * cols + k] = 0.0;
        }
    }

    // back substitution on the upper-triangular R
    let mut beta = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut sum = q_t_y[i];
        for j in (i + 1)..cols {
            sum -= r[i * cols + j] * beta[j];
        }
        let diag = r[i * cols + i];
        if diag.abs() < 1e-10 {
            return None;
        }
        beta[i] = sum / diag;
    }
    Some(beta)
}

/// Least squares tolerant of rank-deficient designs: a column that is
/// (numerically) dependent on earlier ones gets coefficient 0 and does not
/// affect the fitted subspace, so residuals and R^2 stay well defined.
pub fn lstsq_qr_rankdef(x: &[f64], y: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(x.len(), rows * cols);
    debug_assert_eq!(y.len(), rows);
    let mut r = x.to_vec();
    let mut q_t_y = y.to_vec();
    // pivot row assigned to each independent column; dependent columns stay None
    let mut pivot_of: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;

    let orig_norms: Vec<f64> = (0..cols)
        .map(|k| {
            (0..rows)
                .map(|i| x[i * cols + k] * x[i * cols + k])
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    for k in 0..cols {
        if rank >= rows {
            break;
        }
        let mut norm = 0.0;
        for i in rank..rows {
            norm += r[i * cols + k] * r[i * cols + k];
        }
        norm = norm.sqrt();
        if norm <= 1e-10 * orig_norms[k].max(1e-30) {
            continue;
        }
        let alpha = if r[rank * cols + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows - rank];
        v[0] = r[rank * cols + k] - alpha;
        for i in (rank + 1)..rows {
            v[i - rank] = r[i * cols + k];
        }
        let v_norm2: f64 = v.iter().map(|t| t * t).sum();
        if v_norm2 < 1e-300 {
            pivot_of[k] = Some(rank);
            rank += 1;
            continue;
        }
        for j in k..cols {
            let mut dot = 0.0;
            for i in rank..rows {
                dot += v[i - rank] * r[i * cols + j];
            }
            let s = 2.0 * dot / v_norm2;
            for i in rank..rows {
                r[i * cols + j] -= s * v[i - rank];
            }
        }
        let mut dot = 0.0;
        for i in rank..rows {
            dot += v[i - rank] * q_t_y[i];
        }
        let s = 2.0 * dot / v_norm2;
        for i in rank..rows {
            q_t_y[i] -= s * v[i - rank];
        }
        r[rank * cols + k] = alpha;
        for i in (rank + 1)..rows {
            r[i * cols + k] = 0.0;
        }
        pivot_of[k] = Some(rank);
        rank += 1;
    }

    let alive: Vec<usize> = (0..cols).filter(|&k| pivot_of[k].is_some()).collect();
    let mut beta = vec![0.0; cols];
    for (ai, &k) in alive.iter().enumerate().rev() {
        let prow = pivot_of[k].unwrap();
        let mut sum = q_t_y[prow];
        for &j in &alive[ai + 1..] {
            sum -= r[prow * cols + j] * beta[j];
        }
        beta[k] = sum / r[prow * cols + k];
    }
    beta
}
