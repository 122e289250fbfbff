//! Small dense kernels shared by the spectral and propagation modules: a
//! partial-pivot LU solve and a full symmetric eigendecomposition
//! (Householder tridiagonalization followed by implicit QL sweeps). Both are
//! plain-loop implementations; the graphs they serve are small enough that a
//! tuned BLAS would not change anything observable.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Solves `A X = B` in place by Gaussian elimination with partial pivoting.
/// `B` may carry multiple right-hand-side columns.
pub(crate) fn solve(mut a: Array2<f64>, mut b: Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "coefficient matrix must be square");
    assert_eq!(b.nrows(), n, "right-hand side row count must match");
    let k = b.ncols();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[[r, col]].abs() > a[[pivot, col]].abs() {
                pivot = r;
            }
        }
        if a[[pivot, col]].abs() < 1e-12 {
            return Err(Error::Singular { column: col });
        }
        if pivot != col {
            for j in 0..n {
                a.swap([pivot, j], [col, j]);
            }
            for j in 0..k {
                b.swap([pivot, j], [col, j]);
            }
        }
        let inv = 1.0 / a[[col, col]];
        for r in col + 1..n {
            let factor = a[[r, col]] * inv;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let x = a[[col, j]];
                a[[r, j]] -= factor * x;
            }
            for j in 0..k {
                let x = b[[col, j]];
                b[[r, j]] -= factor * x;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = 1.0 / a[[col, col]];
        for j in 0..k {
            let mut acc = b[[col, j]];
            for r in col + 1..n {
                acc -= a[[col, r]] * b[[r, j]];
            }
            b[[col, j]] = acc * inv;
        }
    }
    Ok(b)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
pub(crate) struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Full eigendecomposition of a symmetric matrix. The caller is responsible
/// for symmetry; only the provided entries are read as-is.
pub(crate) fn symmetric_eigen(a: &Array2<f64>) -> Result<SymEigen> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "matrix must be square");
    let mut v = a.clone();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    if n == 0 {
        return Ok(SymEigen {
            values: d,
            vectors: v,
        });
    }
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    Ok(SymEigen {
        values: d,
        vectors: v,
    })
}

/// Householder reduction to tridiagonal form; `v` accumulates the orthogonal
/// transform, `d` receives the diagonal and `e` the subdiagonal.
fn tridiagonalize(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
                v[[j, i]] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[[j, i]] = f;
                let mut g = e[j] + v[[j, j]] * f;
                for k in j + 1..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let delta = f * e[k] + g * d[k];
                    v[[k, j]] -= delta;
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate the Householder transforms into an explicit orthogonal matrix.
    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    let delta = g * d[k];
                    v[[k, j]] -= delta;
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = 0.0;
    }
    v[[n - 1, n - 1]] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL sweeps with shifts on the tridiagonal (d, e), rotating the
/// columns of `v` along. Eigenvalues land in `d`.
fn ql_implicit(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence {
                        context: format!("QL sweep for eigenvalue {l}"),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Selection sort of eigenpairs by ascending eigenvalue.
fn sort_ascending(v: &mut Array2<f64>, d: &mut [f64]) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                v.swap([row, i], [row, k]);
            }
        }
    }
}
