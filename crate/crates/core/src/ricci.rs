//! The Ricci operator of a metric Lie algebra: the direct formula in an
//! orthonormal frame, the nilpotent specialization, the adapted block
//! assembly for solvable algebras, and definiteness tests.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{AlgebraError, LieAlgebra, Subspace};
use crate::linalg;

#[derive(Debug, Error)]
pub enum RicciError {
    #[error("gram matrix is not symmetric: asymmetry {0:.3e}")]
    NotSymmetric(f64),
    #[error("gram matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("dimension mismatch: algebra dim {alg}, metric dim {metric}")]
    DimensionMismatch { alg: usize, metric: usize },
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("subspace is not an invariant ideal containing the derived algebra: {0}")]
    NilradicalMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A positive-definite inner product, stored as its Gram matrix.
#[derive(Debug, Clone)]
pub struct InnerProduct {
    gram: DMatrix<f64>,
}

impl InnerProduct {
    pub fn new(gram: DMatrix<f64>) -> Result<Self, RicciError> {
        if !gram.iter().all(|x| x.is_finite()) {
            return Err(RicciError::NotPositiveDefinite(f64::NAN));
        }
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-12 * gram.norm().max(1.0) {
            return Err(RicciError::NotSymmetric(asym));
        }
        let gram = (&gram + gram.transpose()) * 0.5;
        let min = linalg::symmetric_eigenvalues(&gram)
            .first()
            .cloned()
            .unwrap_or(0.0);
        if min.is_nan() || min <= 0.0 {
            return Err(RicciError::NotPositiveDefinite(min));
        }
        Ok(Self { gram })
    }

    pub fn identity(n: usize) -> Self {
        Self { gram: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(d: &DVector<f64>) -> Result<Self, RicciError> {
        Self::new(DMatrix::from_diagonal(d))
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Inner product of coordinate vectors.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }
}

/// A Lie algebra together with an inner product on its coordinate space.
#[derive(Debug, Clone)]
pub struct MetricLieAlgebra {
    pub alg: LieAlgebra,
    pub metric: InnerProduct,
}

impl MetricLieAlgebra {
    pub fn new(alg: LieAlgebra, metric: InnerProduct) -> Result<Self, RicciError> {
        if alg.dim() != metric.dim() {
            return Err(RicciError::DimensionMismatch { alg: alg.dim(), metric: metric.dim() });
        }
        Ok(Self { alg, metric })
    }

    /// Columns form an orthonormal basis for the metric: `F^T Q F = I`.
    /// Cholesky-based, deterministic.
    pub fn orthonormal_frame(&self) -> Result<DMatrix<f64>, RicciError> {
        orthonormal_frame(&self.metric)
    }

    /// The mean curvature vector `H` with `<H, X> = tr(ad_X)`.
    pub fn mean_curvature(&self) -> DVector<f64> {
        spd_solve(self.metric.gram(), &self.alg.trace_form())
    }

    /// Ricci operator in the orthonormal frame (symmetric matrix).
    pub fn ricci_operator(&self) -> Result<DMatrix<f64>, RicciError> {
        let frame = self.orthonormal_frame()?;
        Ok(ricci_in_frame(&self.alg, &self.metric, &frame, true))
    }

    /// Ricci operator of a nilpotent algebra (no Killing or mean-curvature
    /// terms). Errors on non-nilpotent input.
    pub fn ricci_nilpotent(&self) -> Result<DMatrix<f64>, RicciError> {
        if !self.alg.is_nilpotent() {
            return Err(RicciError::NotNilpotent);
        }
        let frame = self.orthonormal_frame()?;
        Ok(ricci_in_frame(&self.alg, &self.metric, &frame, false))
    }

    /// Trace of the Ricci operator.
    pub fn scalar_curvature(&self) -> Result<f64, RicciError> {
        Ok(self.ricci_operator()?.trace())
    }

    /// Adapted block decomposition of the Ricci operator with respect to an
    /// invariant ideal containing the derived algebra (normally the
    /// nilradical).
    pub fn ricci_blocks(&self, nil: &Subspace) -> Result<RicciBlocks, RicciError> {
        ricci_blocks(self, nil)
    }
}

/// Orthonormal frame of an inner product: `F = L^{-T}` for `Q = L L^T`.
pub fn orthonormal_frame(metric: &InnerProduct) -> Result<DMatrix<f64>, RicciError> {
    let chol = metric
        .gram()
        .clone()
        .cholesky()
        .ok_or(RicciError::NotPositiveDefinite(f64::NAN))?;
    let l = chol.l();
    let inv = l
        .clone()
        .lu()
        .try_inverse()
        .ok_or(RicciError::NotPositiveDefinite(f64::NAN))?;
    Ok(inv.transpose())
}

/// Evaluate the Ricci operator in the given metric-orthonormal frame
/// (columns `F` with `F^T Q F = I`). With `full = false` the Killing and
/// mean-curvature terms are omitted (nilpotent specialization).
pub fn ricci_in_frame(
    alg: &LieAlgebra,
    metric: &InnerProduct,
    frame: &DMatrix<f64>,
    full: bool,
) -> DMatrix<f64> {
    let n = alg.dim();
    let frame_inv = frame.clone().lu().try_inverse().expect("frame is invertible");
    let ads: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let v = frame.column(i).into_owned();
            &frame_inv * alg.adjoint_matrix(&v).expect("dims agree") * frame
        })
        .collect();
    let mut r = DMatrix::zeros(n, n);
    for a in &ads {
        r += a.transpose() * a * (-0.5);
        r += a * a.transpose() * 0.25;
    }
    if full {
        let b = alg.killing_form();
        r += frame.transpose() * b * frame * (-0.5);
        let h = spd_solve(metric.gram(), &alg.trace_form());
        let ad_h = &frame_inv * alg.adjoint_matrix(&h).expect("dims agree") * frame;
        r += (&ad_h + ad_h.transpose()) * (-0.5);
    }
    r
}

/// Solve `Q x = b` for validated SPD `Q`, falling back to an SVD
/// least-squares solve when the factorization fails near the conditioning
/// limit.
fn spd_solve(q: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = q.clone().cholesky() {
        return chol.solve(b);
    }
    q.clone()
        .svd(true, true)
        .solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(b.len()))
}

/// Sign classification of a symmetric matrix at a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    NegativeDefinite,
    NegativeSemi,
    Indefinite,
    PositiveSemi,
    PositiveDefinite,
}

impl std::fmt::Display for Definiteness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Definiteness::NegativeDefinite => "negative definite",
            Definiteness::NegativeSemi => "negative semidefinite",
            Definiteness::Indefinite => "indefinite",
            Definiteness::PositiveSemi => "positive semidefinite",
            Definiteness::PositiveDefinite => "positive definite",
        };
        f.write_str(s)
    }
}

/// Classify the eigenvalue signs of a symmetric matrix against `±tol`.
pub fn definiteness(s: &DMatrix<f64>, tol: f64) -> Definiteness {
    let eigs = linalg::symmetric_eigenvalues(s);
    if eigs.is_empty() {
        return Definiteness::NegativeSemi;
    }
    let min = eigs[0];
    let max = eigs[eigs.len() - 1];
    if max < -tol {
        Definiteness::NegativeDefinite
    } else if max <= tol {
        Definiteness::NegativeSemi
    } else if min > tol {
        Definiteness::PositiveDefinite
    } else if min >= -tol {
        Definiteness::PositiveSemi
    } else {
        Definiteness::Indefinite
    }
}

/// Default tolerance for [`definiteness`] given the matrix scale.
pub fn default_definiteness_tol(s: &DMatrix<f64>) -> f64 {
    1e-9 * (1.0 + s.norm())
}

/// The adapted block decomposition of the Ricci operator of a solvable
/// metric Lie algebra, relative to an orthonormal basis `(e_1..e_l)` of the
/// nilradical and `(f_1..f_m)` of its orthogonal complement with `f_1`
/// parallel to the mean curvature vector.
#[derive(Debug, Clone)]
pub struct RicciBlocks {
    pub r1: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub r3: DMatrix<f64>,
    pub t: f64,
    pub l_matrix: DMatrix<f64>,
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub c: Vec<DMatrix<f64>>,
    pub d: Vec<DMatrix<f64>>,
    pub ricci_nil: DMatrix<f64>,
    /// Adapted orthonormal frame (nilradical columns first).
    pub frame: DMatrix<f64>,
    pub nil_dim: usize,
}

impl RicciBlocks {
    /// Assemble `[[R1, R2], [R2^T, R3]]`.
    pub fn assemble(&self) -> DMatrix<f64> {
        let l = self.nil_dim;
        let m = self.r3.nrows();
        let mut out = DMatrix::zeros(l + m, l + m);
        out.view_mut((0, 0), (l, l)).copy_from(&self.r1);
        out.view_mut((0, l), (l, m)).copy_from(&self.r2);
        out.view_mut((l, 0), (m, l)).copy_from(&self.r2.transpose());
        out.view_mut((l, l), (m, m)).copy_from(&self.r3);
        out
    }
}

fn ricci_blocks(m: &MetricLieAlgebra, nil: &Subspace) -> Result<RicciBlocks, RicciError> {
    let alg = &m.alg;
    let q = &m.metric;
    let n = alg.dim();
    let l = nil.dim();
    let mm = n - l;
    let scale = 1.0 + alg.scale();
    if nil.ambient_dim() != n {
        return Err(RicciError::DimensionMismatch { alg: n, metric: nil.ambient_dim() });
    }
    // The subspace must contain [g, g] and be invariant under every ad.
    for u in 0..n {
        for v in (u + 1)..n {
            let w = alg.bracket_basis(u, v);
            if nil.residual(&w) > 1e-8 * (1.0 + w.norm()) {
                return Err(RicciError::NilradicalMismatch(format!(
                    "bracket [e_{u}, e_{v}] leaves the subspace"
                )));
            }
        }
        for c in 0..l {
            let x = nil.basis().column(c).into_owned();
            let w = alg
                .bracket(&DVector::from_fn(n, |i, _| if i == u { 1.0 } else { 0.0 }), &x)
                .expect("dims agree");
            if nil.residual(&w) > 1e-8 * scale * (1.0 + w.norm()) {
                return Err(RicciError::NilradicalMismatch(format!(
                    "subspace is not ad_e_{u} invariant"
                )));
            }
        }
    }
    // Metric-orthonormal basis of nil: columns N * chol(N^T Q N)^{-T}.
    let nb = nil.basis();
    let gram_n = nb.transpose() * q.gram() * nb;
    let chol_n = gram_n
        .cholesky()
        .ok_or(RicciError::NotPositiveDefinite(f64::NAN))?;
    let e_cols = nb * chol_n.l().lu().try_inverse().expect("invertible").transpose();
    // Q-orthogonal complement of nil: kernel of N^T Q.
    let comp = linalg::kernel(&(nb.transpose() * q.gram()), linalg::RANK_TOL);
    if comp.ncols() != mm {
        return Err(RicciError::NilradicalMismatch(format!(
            "complement dimension {} != {}",
            comp.ncols(),
            mm
        )));
    }
    let mut f_cols = if mm > 0 {
        let gram_c = comp.transpose() * q.gram() * &comp;
        let chol_c = gram_c
            .cholesky()
            .ok_or(RicciError::NotPositiveDefinite(f64::NAN))?;
        &comp * chol_c.l().lu().try_inverse().expect("invertible").transpose()
    } else {
        DMatrix::zeros(n, 0)
    };
    // Rotate the complement so that f_1 is parallel to H when H != 0, and
    // orient it so that t = tr(ad_{f_1}) >= 0.
    if mm > 0 {
        let h = m.mean_curvature();
        let hnorm = q.norm(&h);
        if hnorm > 1e-10 * scale {
            let f1 = &h / hnorm;
            // complete f1 to a Q-orthonormal basis of the complement:
            // project the existing f-columns onto the Q-orthogonal of f1 and
            // re-orthonormalize.
            let mut cols: Vec<DVector<f64>> = vec![f1.clone()];
            for c in 0..mm {
                let mut v = f_cols.column(c).into_owned();
                for w in &cols {
                    let coeff = q.inner(w, &v);
                    v -= w * coeff;
                }
                let nv = q.norm(&v);
                if nv > 1e-10 {
                    cols.push(v / nv);
                }
                if cols.len() == mm {
                    break;
                }
            }
            if cols.len() != mm {
                return Err(RicciError::NilradicalMismatch(
                    "failed to complete the complement frame".into(),
                ));
            }
            for (c, v) in cols.iter().enumerate() {
                f_cols.set_column(c, v);
            }
        } else {
            // Unimodular-like: keep the deterministic complement; flip sign
            // so that tr(ad_{f_1}) >= 0.
            let f1 = f_cols.column(0).into_owned();
            let tr = alg.adjoint_matrix(&f1).expect("dims agree").trace();
            if tr < 0.0 {
                let flipped = -f1;
                f_cols.set_column(0, &flipped);
            }
        }
    }
    // Assembled adapted frame.
    let mut frame = DMatrix::zeros(n, n);
    frame.view_mut((0, 0), (n, l)).copy_from(&e_cols);
    frame.view_mut((0, l), (n, mm)).copy_from(&f_cols);
    let frame_inv = frame.clone().lu().try_inverse().ok_or_else(|| {
        RicciError::NilradicalMismatch("adapted frame is singular".into())
    })?;

    // ad matrices in the adapted frame, with the block split of eq. (adad).
    let mut a_mats = Vec::with_capacity(mm);
    let mut b_mats = Vec::with_capacity(mm);
    let mut d_mats = Vec::with_capacity(l);
    let mut c_mats = Vec::with_capacity(l);
    let mut bottom_resid = 0.0_f64;
    for idx in 0..n {
        let v = frame.column(idx).into_owned();
        let ad = &frame_inv * alg.adjoint_matrix(&v).expect("dims agree") * &frame;
        let top_left = ad.view((0, 0), (l, l)).into_owned();
        let top_right = ad.view((0, l), (l, mm)).into_owned();
        bottom_resid = bottom_resid.max(ad.view((l, 0), (mm, n)).norm());
        if idx < l {
            d_mats.push(top_left);
            c_mats.push(top_right);
        } else {
            a_mats.push(top_left);
            b_mats.push(top_right);
        }
    }
    if bottom_resid > 1e-8 * scale {
        return Err(RicciError::NilradicalMismatch(format!(
            "adjoint images leave the subspace: residual {bottom_resid:.3e}"
        )));
    }

    let t = a_mats.first().map(|a| a.trace()).unwrap_or(0.0);
    // Ric^n from eq. (riccAln).
    let mut ricci_nil = DMatrix::zeros(l, l);
    for d in &d_mats {
        ricci_nil += d.transpose() * d * (-0.5);
        ricci_nil += d * d.transpose() * 0.25;
    }
    // R1 = Ric^n + 1/2 sum [A_j, A_j^t] + 1/4 sum B_j B_j^t - t A_1^s
    let mut r1 = ricci_nil.clone();
    for a in &a_mats {
        let at = a.transpose();
        r1 += (a * &at - &at * a) * 0.5;
    }
    for b in &b_mats {
        r1 += b * b.transpose() * 0.25;
    }
    if let Some(a1) = a_mats.first() {
        let a1s = (a1 + a1.transpose()) * 0.5;
        r1 -= a1s * t;
    }
    // R2 = -1/2 ( sum D_i^t C_i + sum A_j^t B_j + t B_1 )
    let mut r2 = DMatrix::zeros(l, mm);
    for (d, c) in d_mats.iter().zip(c_mats.iter()) {
        r2 += d.transpose() * c;
    }
    for (a, b) in a_mats.iter().zip(b_mats.iter()) {
        r2 += a.transpose() * b;
    }
    if let Some(b1) = b_mats.first() {
        r2 += b1 * t;
    }
    r2 *= -0.5;
    // R3 = -1/2 sum B_j^t B_j - L with L_pq = tr(A_p^s A_q^s)
    let mut l_matrix = DMatrix::zeros(mm, mm);
    let syms: Vec<DMatrix<f64>> =
        a_mats.iter().map(|a| (a + a.transpose()) * 0.5).collect();
    for p in 0..mm {
        for qq in 0..mm {
            l_matrix[(p, qq)] = (&syms[p] * &syms[qq]).trace();
        }
    }
    let mut r3 = l_matrix.clone() * (-1.0);
    for b in &b_mats {
        r3 += b.transpose() * b * (-0.5);
    }

    Ok(RicciBlocks {
        r1,
        r2,
        r3,
        t,
        l_matrix,
        a: a_mats,
        b: b_mats,
        c: c_mats,
        d: d_mats,
        ricci_nil,
        frame,
        nil_dim: l,
    })
}
