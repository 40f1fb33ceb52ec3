//! Small dense linear algebra helpers.
//!
//! Every system solved in this crate is tiny (active sets of a handful of
//! halfspaces, Gram matrices of size <= n with n <= 50), so the kernels here
//! are direct dense solves on row-major slices rather than a matrix library.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// `a + t * d`.
pub fn add_scaled(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), d.len());
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

pub fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| t * x).collect()
}

/// Dense matrix-vector product for a row-major `n x n` matrix.
pub fn matvec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(x.len(), n);
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

/// Solves `a x = b` by LU with partial pivoting. `a` is row-major `n x n`.
/// Returns `None` when the matrix is singular to working precision.
pub fn lu_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, m[perm[r] * n + col].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))?;
        if piv_val <= 1e-300 {
            return None;
        }
        perm.swap(col, piv);
        let prow = perm[col];
        for r in col + 1..n {
            let row = perm[r];
            let factor = m[row * n + col] / m[prow * n + col];
            m[row * n + col] = 0.0;
            for c in col + 1..n {
                m[row * n + c] -= factor * m[prow * n + c];
            }
            x[row] -= factor * x[prow];
        }
    }
    let mut out = vec![0.0; n];
    for i in (0..n).rev() {
        let row = perm[i];
        let mut v = x[row];
        for c in i + 1..n {
            v -= m[row * n + c] * out[c];
        }
        out[i] = v / m[row * n + i];
    }
    Some(out)
}

/// Solves `a x = b` with `a` symmetric positive definite (Cholesky).
/// Returns `None` if a pivot is not strictly positive.
pub fn spd_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // Lower-triangular factor L with a = L L^T, stored row-major.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    Some(x)
}

/// Lower-triangular Cholesky factor `L` with `a = L L'`, row-major.
/// Returns `None` if a pivot is not strictly positive.
pub fn cholesky_factor(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_subst(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    y
}

/// Solves `L' x = b` for lower-triangular `L`.
pub fn backward_subst_transpose(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    x
}

/// Smallest and largest eigenvalue of a symmetric matrix, via cyclic Jacobi
/// rotations. Converges to machine precision for the sizes used here.
pub fn sym_eig_bounds(a: &[f64], n: usize) -> (f64, f64) {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return (a[0], a[0]);
    }
    let mut m = a.to_vec();
    let frob = norm(&m).max(f64::MIN_POSITIVE);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut lo = m[0];
    let mut hi = m[0];
    for i in 1..n {
        lo = lo.min(m[i * n + i]);
        hi = hi.max(m[i * n + i]);
    }
    (lo, hi)
}
