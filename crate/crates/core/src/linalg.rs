//! Small shared linear-algebra helpers: rank/kernel decisions at a relative
//! singular-value tolerance, orthonormalization, and complex kernels of real
//! matrices via realification.

use nalgebra::{Complex, DMatrix, DVector};

/// Relative singular-value tolerance used for all rank and kernel decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Rank of `m` by singular values, relative tolerance `tol * max_sv`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Orthonormal basis of the column space of `m`. Singular values are
/// compared against `tol * max(largest_sv, floor)`; the floor guards chains
/// of span computations against promoting pure roundoff (a spanning set
/// whose entries are all ~1e-16 junk must come out zero-dimensional).
///
/// Implemented through the symmetric eigendecomposition of `m m^T`: the
/// bidiagonalization-based SVD can return singular vectors with large errors
/// on matrices mixing exact zeros with tiny entries, while the symmetric
/// path stays reliably orthogonal. Squaring halves the resolvable range, so
/// thresholds are floored at the eigenvalue roundoff level.
pub fn column_space_scaled(m: &DMatrix<f64>, tol: f64, floor: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let gram = m * m.transpose();
    let eig = gram.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if lam_max <= 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let sigma_thr = tol * lam_max.sqrt().max(floor);
    let lam_thr = (sigma_thr * sigma_thr).max(64.0 * f64::EPSILON * lam_max);
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > lam_thr).collect();
    let mut out = DMatrix::zeros(rows, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        out.set_column(c, &eig.eigenvectors.column(i).into_owned());
    }
    out
}

/// Orthonormal basis of the null space of `m` (columns of the result).
pub fn kernel(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    kernel_scaled(m, tol, 0.0)
}

/// Orthonormal basis of the column space of `m` at relative tolerance.
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    column_space_scaled(m, tol, 0.0)
}

/// Null space with singular values compared against `tol * max(max_sv, floor)`;
/// the floor makes a matrix consisting entirely of roundoff (for instance a
/// spot-on eigenvalue shift) come out as the full space rather than rank-full.
/// Same symmetric-eigendecomposition route as [`column_space_scaled`], on
/// `m^T m`.
pub fn kernel_scaled(m: &DMatrix<f64>, tol: f64, floor: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let gram = m.transpose() * m;
    let eig = gram.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if lam_max <= 0.0 {
        return DMatrix::identity(cols, cols);
    }
    let sigma_thr = tol * lam_max.sqrt().max(floor);
    let lam_thr = (sigma_thr * sigma_thr).max(64.0 * f64::EPSILON * lam_max);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] <= lam_thr).collect();
    let mut out = DMatrix::zeros(cols, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        out.set_column(c, &eig.eigenvectors.column(i).into_owned());
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`'s
/// columns inside the ambient coordinate space.
pub fn orthogonal_complement(basis: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    kernel(&basis.transpose(), tol)
}

/// Frobenius norm.
pub fn fro(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// A unit kernel vector of the complexified matrix `m - (re + i·im) I`,
/// computed on the realification `[[m - re·I, im·I], [-im·I, m - re·I]]`.
///
/// Returns the (real, imaginary) parts with the phase normalized so that the
/// entry of largest magnitude is real and positive. `None` when the kernel is
/// numerically trivial.
pub fn complex_kernel_vectors(
    m: &DMatrix<f64>,
    re: f64,
    im: f64,
    tol: f64,
) -> Vec<(DVector<f64>, DVector<f64>)> {
    let k = m.nrows();
    // Floor at the unshifted matrix scale: singular values of the shifted
    // matrix below tol * (1 + ||m|| + |xi|) mean "eigenvector at tolerance".
    let floor = 1.0 + m.norm() + (re * re + im * im).sqrt();
    let mut shifted = m.clone();
    for i in 0..k {
        shifted[(i, i)] -= re;
    }
    if im.abs() == 0.0 {
        let ker = kernel_scaled(&shifted, tol, floor);
        return (0..ker.ncols())
            .map(|c| (ker.column(c).into_owned(), DVector::zeros(k)))
            .collect();
    }
    let mut big = DMatrix::zeros(2 * k, 2 * k);
    big.view_mut((0, 0), (k, k)).copy_from(&shifted);
    big.view_mut((k, k), (k, k)).copy_from(&shifted);
    for i in 0..k {
        big[(i, k + i)] = im;
        big[(k + i, i)] = -im;
    }
    let ker = kernel_scaled(&big, tol, floor);
    let mut out = Vec::new();
    for c in 0..ker.ncols() {
        let x = DVector::from_fn(k, |i, _| ker[(i, c)]);
        let y = DVector::from_fn(k, |i, _| ker[(k + i, c)]);
        out.push(normalize_phase(x, y));
    }
    out
}

/// Normalize the complex vector `x + i y` so that its largest-magnitude entry
/// is real positive and the complex norm is 1.
pub fn normalize_phase(x: DVector<f64>, y: DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let k = x.len();
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for i in 0..k {
        let mag = x[i] * x[i] + y[i] * y[i];
        if mag > best_mag + 1e-15 {
            best_mag = mag;
            best = i;
        }
    }
    let (a, b) = (x[best], y[best]);
    let r = (a * a + b * b).sqrt();
    if r == 0.0 {
        return (x, y);
    }
    // multiply by conj(v_best)/|v_best|
    let (ca, cb) = (a / r, -b / r);
    let nx = DVector::from_fn(k, |i, _| ca * x[i] - cb * y[i]);
    let ny = DVector::from_fn(k, |i, _| ca * y[i] + cb * x[i]);
    let norm = (nx.norm_squared() + ny.norm_squared()).sqrt();
    (nx / norm, ny / norm)
}

/// Complex eigenvalues of a real matrix, sorted by (re, im).
///
/// Runs the Schur iteration with a bounded iteration count (the unbounded
/// variant can stall on unlucky inputs) and falls back to deterministic tiny
/// perturbations when it does not converge.
pub fn sorted_complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = 1.0 + m.norm();
    let mut eigs: Option<Vec<Complex<f64>>> = None;
    for attempt in 0..6u32 {
        let candidate = if attempt == 0 {
            m.clone()
        } else {
            let mag = 1e-13 * scale * 10f64.powi(attempt as i32 - 1);
            let mut p = m.clone();
            for i in 0..n {
                for j in 0..n {
                    // fixed, cheap pseudo-random perturbation pattern
                    let h = ((i * 31 + j * 17 + attempt as usize * 101) % 13) as f64 - 6.0;
                    p[(i, j)] += mag * h / 6.0;
                }
            }
            p
        };
        if let Some(schur) = nalgebra::linalg::Schur::try_new(candidate, 1e-12, 800) {
            eigs = Some(schur.complex_eigenvalues().iter().cloned().collect());
            break;
        }
    }
    let mut eigs = eigs.unwrap_or_else(|| {
        // last resort: the diagonal (candidates get filtered downstream)
        (0..n).map(|i| Complex::new(m[(i, i)], 0.0)).collect()
    });
    eigs.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    eigs
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Dense complex linear ops on small matrices, used by the Hamiltonian normal
/// form and semisimple-part computations.
#[allow(clippy::needless_range_loop)] // dense Gauss elimination over index loops
pub mod cplx {
    use nalgebra::Complex;

    pub type CVec = Vec<Complex<f64>>;
    pub type CMat = Vec<Vec<Complex<f64>>>;

    pub fn mat_vec(m: &CMat, v: &CVec) -> CVec {
        let n = m.len();
        (0..n)
            .map(|i| (0..v.len()).map(|j| m[i][j] * v[j]).sum())
            .collect()
    }

    /// Solve `a x = b` by Gauss elimination with partial pivoting.
    pub fn solve(a: &CMat, b: &[CVec]) -> Option<Vec<CVec>> {
        let n = a.len();
        let m = b.len();
        let mut aug: Vec<Vec<Complex<f64>>> = (0..n)
            .map(|i| {
                let mut row = a[i].clone();
                for bc in b {
                    row.push(bc[i]);
                }
                row
            })
            .collect();
        for col in 0..n {
            let (mut piv, mut mag) = (col, aug[col][col].norm());
            for r in col + 1..n {
                if aug[r][col].norm() > mag {
                    piv = r;
                    mag = aug[r][col].norm();
                }
            }
            if mag < 1e-14 {
                return None;
            }
            aug.swap(col, piv);
            let d = aug[col][col];
            for c in col..n + m {
                aug[col][c] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[r][col];
                    if f.norm() > 0.0 {
                        for c in col..n + m {
                            let sub = f * aug[col][c];
                            aug[r][c] -= sub;
                        }
                    }
                }
            }
        }
        Some((0..m).map(|j| (0..n).map(|i| aug[i][n + j]).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_wide_matrix_spans_missing_directions() {
        // 1x3 matrix [1, 0, 0]: kernel should be 2-dimensional.
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let k = kernel(&m, RANK_TOL);
        assert_eq!(k.ncols(), 2);
        let resid = (&m * &k).norm();
        assert!(resid < 1e-12);
        let gram = k.transpose() * &k;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn complex_kernel_finds_rotation_eigenvector() {
        // [[0,1],[-1,0]] has eigenvalue i with eigenvector (1, i)/sqrt(2).
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let vs = complex_kernel_vectors(&m, 0.0, 1.0, RANK_TOL);
        assert!(!vs.is_empty());
        let (x, y) = &vs[0];
        // check m (x + iy) = i (x + iy): m x = -y, m y = x
        assert!((&m * x + y).norm() < 1e-10);
        assert!((&m * y - x).norm() < 1e-10);
    }
}
