//! Shared helpers for the integration suites: an independent brute-force
//! Ricci oracle evaluated through the quadratic-form definition (a different
//! computational route than the operator assembly in the library), random
//! algebra/metric generators, and small utilities.

use nalgebra::{DMatrix, DVector};
use negricci::algebra::LieAlgebra;
use negricci::ricci::InnerProduct;
use rand::rngs::StdRng;
use rand::Rng;

/// Brute-force Ricci matrix in an orthonormal frame, computed by polarizing
/// the quadratic form
/// `ric(X) = -<[H,X],X> - B(X,X)/2 - sum_i ||[X,E_i]||^2 / 2
///           + sum_{i,j} <[E_i,E_j],X>^2 / 4`.
///
/// The orthonormal frame comes from the symmetric eigendecomposition of the
/// Gram matrix (inverse square root), independent of the library's Cholesky
/// frame; the two frames differ by an orthogonal transform, so eigenvalues
/// agree and for testing we return the form conjugated back into the
/// library's frame convention where needed.
pub fn ricci_bruteforce(alg: &LieAlgebra, metric: &InnerProduct) -> DMatrix<f64> {
    let n = alg.dim();
    let q = metric.gram();
    // frame = Q^{-1/2} via eigendecomposition
    let eig = q.clone().symmetric_eigen();
    let mut inv_sqrt = DMatrix::zeros(n, n);
    for i in 0..n {
        inv_sqrt[(i, i)] = 1.0 / eig.eigenvalues[i].sqrt();
    }
    let frame = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    ricci_bruteforce_in_frame(alg, metric, &frame)
}

/// The quadratic-form Ricci evaluated on a given metric-orthonormal frame.
pub fn ricci_bruteforce_in_frame(
    alg: &LieAlgebra,
    metric: &InnerProduct,
    frame: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = alg.dim();
    let q = metric.gram();
    let frames: Vec<DVector<f64>> = (0..n).map(|i| frame.column(i).into_owned()).collect();
    let b = alg.killing_form();
    // H solves Q H = tau
    let tau = alg.trace_form();
    let h = q.clone().lu().solve(&tau).expect("gram invertible");
    let inner = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * q * y)[(0, 0)];
    let ric_quad = |x: &DVector<f64>| -> f64 {
        let hx = alg.bracket(&h, x).unwrap();
        let mut value = -inner(&hx, x) - 0.5 * (x.transpose() * &b * x)[(0, 0)];
        for e in &frames {
            let xe = alg.bracket(x, e).unwrap();
            value -= 0.5 * inner(&xe, &xe);
        }
        for ei in &frames {
            for ej in &frames {
                let br = alg.bracket(ei, ej).unwrap();
                let c = inner(&br, x);
                value += 0.25 * c * c;
            }
        }
        value
    };
    // polarization: <Ric E_u, E_v> = (q(E_u + E_v) - q(E_u) - q(E_v)) / 2
    let singles: Vec<f64> = frames.iter().map(&ric_quad).collect();
    let mut out = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u..n {
            let value = if u == v {
                singles[u]
            } else {
                let sum = &frames[u] + &frames[v];
                0.5 * (ric_quad(&sum) - singles[u] - singles[v])
            };
            out[(u, v)] = value;
            out[(v, u)] = value;
        }
    }
    out
}

/// Random symmetric positive definite Gram matrix (shifted square).
pub fn random_spd(n: usize, rng: &mut StdRng) -> InnerProduct {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let q = &m * m.transpose() + DMatrix::identity(n, n) * 0.4;
    InnerProduct::new(q).expect("shifted square is SPD")
}

/// Random invertible matrix with determinant bounded away from zero.
pub fn random_invertible(n: usize, rng: &mut StdRng) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        if m.determinant().abs() > 0.05 {
            return m;
        }
    }
}

/// Eigenvalue multiset distance after sorting.
pub fn sorted_eigen_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut ea: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    let mut eb: Vec<f64> = b.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ea.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ea.iter()
        .zip(eb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
