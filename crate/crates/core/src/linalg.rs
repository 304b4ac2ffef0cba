//! Small dense linear algebra helpers and finite differences.

use nalgebra::{DMatrix, DVector};

/// Step size for internal central differences of smooth functions.
pub(crate) fn cbrt_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.abs())
}

/// Numerical rank by Gaussian elimination with complete pivoting.
///
/// A pivot counts when it exceeds `rel` times the largest pivot of the matrix.
pub fn numerical_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut a = m.clone();
    let first = a.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if first == 0.0 {
        return 0;
    }
    let threshold = rel * first;
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                let v = a[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= threshold {
            break;
        }
        a.swap_rows(k, pi);
        a.swap_columns(k, pj);
        for i in k + 1..rows {
            let f = a[(i, k)] / a[(k, k)];
            if f != 0.0 {
                for j in k..cols {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Orthonormal basis (as columns) of the null space of `m`, which has `cols` columns.
pub fn kernel_basis(m: &DMatrix<f64>, cols: usize, rel: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    // pad to at least square so the SVD returns a full right basis
    let padded_rows = rows.max(cols);
    let mut a = DMatrix::zeros(padded_rows, cols);
    a.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |s, x| s.max(*x));
    let threshold = rel * smax;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for j in 0..cols {
            basis[(j, c)] = vt[(i, j)];
        }
    }
    basis
}

/// Minimum-norm least-squares solution of `a x = b`, truncating small singular values.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel: f64) -> DVector<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DVector::zeros(cols);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |s, x| s.max(*x));
    if smax == 0.0 {
        return DVector::zeros(cols);
    }
    svd.solve(b, rel * smax).unwrap_or_else(|_| DVector::zeros(cols))
}

/// Central-difference gradient with `h = cbrt(eps) (1 + |x_i|)`.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = cbrt_step(x[i]);
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Richardson-extrapolated central differences `(4 D(h/2) - D(h)) / 3` with
/// `h = cbrt(eps) (1 + |x_i|)`.
pub fn fd_gradient_richardson(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut central = |i: usize, h: f64| {
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        (fp - fm) / (2.0 * h)
    };
    (0..x.len())
        .map(|i| {
            let h = cbrt_step(x[i]);
            (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0
        })
        .collect()
}

/// Central-difference Jacobian (`m x n`) of a vector map.
pub fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], m: usize) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut y = x.to_vec();
    for j in 0..n {
        let h = cbrt_step(x[j]);
        y[j] = x[j] + h;
        let fp = f(&y);
        y[j] = x[j] - h;
        let fm = f(&y);
        y[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Select columns of a matrix.
pub(crate) fn columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

pub(crate) fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numerical_rank(&m, 1e-8), 1);
        assert_eq!(numerical_rank(&DMatrix::identity(4, 4), 1e-8), 4);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), 1e-8), 0);
        // relative threshold: scaling does not change the rank
        let tiny = DMatrix::identity(3, 3) * 1e-20;
        assert_eq!(numerical_rank(&tiny, 1e-8), 3);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 0.0]);
        let k = kernel_basis(&m, 3, 1e-10);
        assert_eq!(k.ncols(), 2);
        let prod = &m * &k;
        assert!(prod.iter().all(|x| x.abs() < 1e-14));
        let gram = k.transpose() * &k;
        assert!((gram - DMatrix::identity(2, 2)).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn kernel_of_tall_matrix() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let k = kernel_basis(&m, 2, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)] + k[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn least_squares_min_norm() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = lstsq(&a, &DVector::from_vec(vec![2.0]), 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let x = lstsq(&a, &DVector::from_vec(vec![1.0, 3.0]), 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn finite_differences() {
        let f = |x: &[f64]| x[0] * x[0] * x[1] + x[1].sin();
        let g = fd_gradient(&f, &[1.5, 0.3]);
        assert!((g[0] - 2.0 * 1.5 * 0.3).abs() < 1e-9);
        assert!((g[1] - (1.5 * 1.5 + 0.3f64.cos())).abs() < 1e-9);
        let g5 = fd_gradient_richardson(&f, &[1.5, 0.3]);
        assert!((g5[0] - 2.0 * 1.5 * 0.3).abs() < 1e-11);
        assert!((g5[1] - (1.5 * 1.5 + 0.3f64.cos())).abs() < 1e-11);
        let map = |x: &[f64]| vec![x[0] * x[1], x[0] - x[1]];
        let j = fd_jacobian(&map, &[2.0, 3.0], 2);
        assert!((j[(0, 0)] - 3.0).abs() < 1e-9 && (j[(0, 1)] - 2.0).abs() < 1e-9);
        assert!((j[(1, 1)] + 1.0).abs() < 1e-9);
    }
}
