//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

/// Binomial coefficient as an exact `usize` (arguments stay desk-scale).
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Numerical rank from singular values: count of sigma > rtol * sigma_max.
pub fn rank_svd(m: &DMatrix<f64>, rtol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}

/// Orthonormal basis of the (right) null space of `m`, columns of the result.
///
/// Wide matrices are padded with zero rows so the SVD produces the full
/// right-singular basis (nalgebra's thin SVD truncates `v_t` otherwise).
pub fn null_space(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("svd with v_t requested");
    let smax = svd.singular_values.max();
    let tol = rtol * smax.max(1e-300);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let mut out = DMatrix::zeros(ncols, ncols - rank);
    for (j, row) in (rank..ncols).enumerate() {
        out.set_column(j, &vt.row(row).transpose());
    }
    out
}

/// Least squares solution of `a x = b` via SVD with relative cutoff.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rtol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, rtol).expect("svd solve")
}

/// Lawson-Hanson nonnegative least squares: min ||a x - b||_2 s.t. x >= 0.
///
/// Returns the solution and the residual norm.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive: Vec<bool> = vec![false; n];
    let max_outer = 3 * n + 10;
    let mut w_tol = 0.0f64;

    for _ in 0..max_outer {
        let resid = b - a * &x;
        let w = a.transpose() * &resid;
        if w_tol == 0.0 {
            w_tol = 1e-12 * w.amax().max(1.0);
        }
        // most violated KKT multiplier among the active (zero) set
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > w_tol {
                if best.map_or(true, |(_, bw)| w[j] > bw) {
                    best = Some((j, w[j]));
                }
            }
        }
        let Some((j_in, _)) = best else { break };
        passive[j_in] = true;

        // inner loop: keep the passive-set least squares solution feasible
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let ap = a.select_columns(idx.iter());
            let zp = lstsq(&ap, b, 1e-12);
            if zp.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (pos, &j) in idx.iter().enumerate() {
                    x[j] = zp[pos];
                }
                break;
            }
            // step toward zp until the first variable hits zero
            let mut alpha = f64::INFINITY;
            for (pos, &j) in idx.iter().enumerate() {
                if zp[pos] <= 0.0 {
                    let denom = x[j] - zp[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (pos, &j) in idx.iter().enumerate() {
                x[j] += alpha * (zp[pos] - x[j]);
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    let resid = (b - a * &x).norm();
    (x, resid)
}

/// Compensated (error-free transformation) Horner evaluation.
///
/// Needed because Chebyshev coefficient vectors reach condition numbers
/// around 1e18 near the endpoints of [-1,1]; plain Horner loses every
/// significant digit there.
pub fn horner_compensated(coeffs: &[f64], x: f64) -> f64 {
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let mut s = coeffs[n - 1];
    let mut c = 0.0f64; // running correction polynomial value
    for i in (0..n - 1).rev() {
        let (p, pi) = two_prod(s, x);
        let (sum, sigma) = two_sum(p, coeffs[i]);
        s = sum;
        c = c * x + (pi + sigma);
    }
    s + c
}

/// Gauss-Legendre nodes and weights on [-1, 1] via the Golub-Welsch
/// eigendecomposition of the Jacobi matrix.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let b = j as f64 / ((4 * j * j - 1) as f64).sqrt();
        jac[(j - 1, j)] = b;
        jac[(j, j - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    )
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(14, 12), 91);
        assert_eq!(binomial(6, 0), 1);
    }

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let (x, _) = nnls(&a, &b);
        let exact = lstsq(&a, &b, 1e-12);
        assert!((x - exact).amax() < 1e-10);
    }

    #[test]
    fn nnls_clips_negative_component() {
        // unconstrained solution has a negative entry; NNLS must zero it
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[0.0, -1.0]);
        let (x, _) = nnls(&a, &b);
        assert!(x[0] >= 0.0 && x[1] >= 0.0);
        assert!(x[1] == 0.0);
    }

    #[test]
    fn gauss_legendre_low_orders() {
        let (nodes, weights) = gauss_legendre(2);
        assert!((nodes[0] + 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((weights[0] - 1.0).abs() < 1e-12);
        let (n3, w3) = gauss_legendre(3);
        assert!((n3[1]).abs() < 1e-12);
        assert!((n3[2] - (3f64 / 5.0).sqrt()).abs() < 1e-12);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_horner_is_exact_for_small_poly() {
        // p(x) = 1 - 3x + 2x^2 at x = 0.5 -> 0
        let v = horner_compensated(&[1.0, -3.0, 2.0], 0.5);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
        let prod = &m * &ns;
        assert!(prod.amax() < 1e-12);
    }
}
