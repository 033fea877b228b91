//! Lie algebras presented by sparse structure constants, and the basis-level
//! computations built on them: brackets, the Jacobi defect, adjoint matrices,
//! the Killing form, derived and lower central series, center, nilradical,
//! and solvable extensions of a nilpotent algebra by derivations.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{self, RANK_TOL};
use crate::triangulate::TriangulateError;

/// Absolute bound accepted for the Jacobi defect of a valid algebra.
pub const JACOBI_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("bracket index out of range: ({i}, {j}) -> {k} with dim {dim}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, dim: usize },
    #[error("bracket indices must satisfy i < j, got ({i}, {j})")]
    IndexOrder { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a solvable Lie algebra: derived series stabilizes at dimension {stuck}")]
    NotSolvable { stuck: usize },
    #[error("matrix {index} is not a derivation: Leibniz defect {defect:.3e}")]
    NotADerivation { index: usize, defect: f64 },
    #[error("assembled algebra violates the Jacobi identity: defect {defect:.3e}")]
    JacobiViolated { defect: f64 },
    #[error("subspace is not closed under the bracket: residual {residual:.3e}")]
    NotASubalgebra { residual: f64 },
    #[error(transparent)]
    Triangulate(#[from] TriangulateError),
}

/// One structure constant: `[e_i, e_j] = sum_k c e_k`, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// A real Lie algebra on `R^dim` given by sparse structure constants.
///
/// Only terms with `i < j` are stored; antisymmetry supplies the rest.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    terms: Vec<BracketTerm>,
    labels: Option<Vec<String>>,
}

impl LieAlgebra {
    /// Build an algebra from structure constants. Index bounds and the `i < j`
    /// ordering are enforced; duplicate `(i, j, k)` entries are summed. The
    /// Jacobi identity is *not* checked here — see [`LieAlgebra::jacobi_defect`].
    pub fn new(dim: usize, terms: Vec<BracketTerm>) -> Result<Self, AlgebraError> {
        let mut merged: Vec<BracketTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.i >= t.j {
                return Err(AlgebraError::IndexOrder { i: t.i, j: t.j });
            }
            if t.j >= dim || t.k >= dim {
                return Err(AlgebraError::IndexOutOfRange { i: t.i, j: t.j, k: t.k, dim });
            }
            match merged.iter_mut().find(|m| m.i == t.i && m.j == t.j && m.k == t.k) {
                Some(m) => m.c += t.c,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.c != 0.0);
        merged.sort_by_key(|t| (t.i, t.j, t.k));
        Ok(Self { dim, terms: merged, labels: None })
    }

    /// Abelian algebra of the given dimension.
    pub fn abelian(dim: usize) -> Self {
        Self { dim, terms: Vec::new(), labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, AlgebraError> {
        if labels.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim, got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[BracketTerm] {
        &self.terms
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Largest structure-constant magnitude; scale reference for tolerances.
    pub fn scale(&self) -> f64 {
        self.terms.iter().map(|t| t.c.abs()).fold(0.0, f64::max)
    }

    /// `[x, y]` for coordinate vectors of length `dim`.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>, AlgebraError> {
        if x.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if y.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let mut out = DVector::zeros(self.dim);
        for t in &self.terms {
            let coeff = x[t.i] * y[t.j] - x[t.j] * y[t.i];
            if coeff != 0.0 {
                out[t.k] += t.c * coeff;
            }
        }
        Ok(out)
    }

    /// `[e_i, e_j]` for basis indices (any order; antisymmetry applied).
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        if a == b {
            return out;
        }
        for t in &self.terms {
            if t.i == a && t.j == b {
                out[t.k] += sign * t.c;
            }
        }
        out
    }

    /// Matrix of `ad_y` (column `i` is `[y, e_i]`).
    pub fn adjoint_matrix(&self, y: &DVector<f64>) -> Result<DMatrix<f64>, AlgebraError> {
        if y.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            // [y, e_j] gains c*y[i] e_k; [y, e_i] gains -c*y[j] e_k.
            m[(t.k, t.j)] += t.c * y[t.i];
            m[(t.k, t.i)] -= t.c * y[t.j];
        }
        Ok(m)
    }

    /// Matrix of `ad_{e_u}`.
    pub fn adjoint_basis(&self, u: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            if t.i == u {
                m[(t.k, t.j)] += t.c;
            }
            if t.j == u {
                m[(t.k, t.i)] -= t.c;
            }
        }
        m
    }

    /// Maximum over basis triples of the Jacobi expression
    /// `||[[x,y],z] + [[y,z],x] + [[z,x],y]||`.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let bij = self.bracket_basis(i, j);
                for k in (j + 1)..n {
                    let bjk = self.bracket_basis(j, k);
                    let bki = self.bracket_basis(k, i);
                    let mut total = self.bracket_with_basis(&bij, k);
                    total += self.bracket_with_basis(&bjk, i);
                    total += self.bracket_with_basis(&bki, j);
                    worst = worst.max(total.norm());
                }
            }
        }
        worst
    }

    /// `[x, e_u]` for a coordinate vector `x`.
    fn bracket_with_basis(&self, x: &DVector<f64>, u: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for t in &self.terms {
            if t.j == u {
                out[t.k] += t.c * x[t.i];
            }
            if t.i == u {
                out[t.k] -= t.c * x[t.j];
            }
        }
        out
    }

    /// Killing form `B(e_u, e_v) = tr(ad_{e_u} ad_{e_v})` as a symmetric matrix.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let n = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..n).map(|u| self.adjoint_basis(u)).collect();
        let mut b = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in u..n {
                let tr = (&ads[u] * &ads[v]).trace();
                b[(u, v)] = tr;
                b[(v, u)] = tr;
            }
        }
        b
    }

    /// The trace form `tau(e_u) = tr(ad_{e_u})` as a covector.
    pub fn trace_form(&self) -> DVector<f64> {
        DVector::from_fn(self.dim, |u, _| self.adjoint_basis(u).trace())
    }

    /// True iff `tr(ad_x) = 0` for every basis vector, at tolerance.
    pub fn is_unimodular(&self) -> bool {
        let tol = 1e-9 * (1.0 + self.scale());
        self.trace_form().iter().all(|t| t.abs() <= tol)
    }

    /// Derived series `g ⊇ [g,g] ⊇ ...` down to stabilization. The chain
    /// starts with the whole space and appends strictly smaller terms only.
    pub fn derived_series(&self) -> Vec<Subspace> {
        let mut chain = vec![Subspace::full(self.dim)];
        for _ in 0..(2 * self.dim + 2) {
            let current = chain.last().unwrap();
            let next = self.bracket_span(current, current);
            if next.dim() >= current.dim() {
                break;
            }
            let stop = next.dim() == 0;
            chain.push(next);
            if stop {
                break;
            }
        }
        chain
    }

    /// Lower central series `C^0 = g`, `C^{k+1} = [g, C^k]`.
    pub fn lower_central_series(&self) -> Vec<Subspace> {
        let full = Subspace::full(self.dim);
        let mut chain = vec![full.clone()];
        for _ in 0..(2 * self.dim + 2) {
            let current = chain.last().unwrap();
            let next = self.bracket_span(&full, current);
            if next.dim() >= current.dim() {
                break;
            }
            let stop = next.dim() == 0;
            chain.push(next);
            if stop {
                break;
            }
        }
        chain
    }

    /// Span of `[a, b]` over bases of the two subspaces. Brackets of unit
    /// vectors are bounded by the structure-constant scale, so singular
    /// values far below it are roundoff, not new directions.
    fn bracket_span(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let (da, db) = (a.dim(), b.dim());
        if da == 0 || db == 0 {
            return Subspace::zero(self.dim);
        }
        let mut cols = DMatrix::zeros(self.dim, da * db);
        let mut idx = 0;
        for p in 0..da {
            let av = a.basis().column(p).into_owned();
            for q in 0..db {
                let bv = b.basis().column(q).into_owned();
                let w = self.bracket(&av, &bv).expect("dims agree");
                cols.set_column(idx, &w);
                idx += 1;
            }
        }
        Subspace::from_orthonormal(linalg::column_space_scaled(
            &cols,
            RANK_TOL,
            1.0 + self.scale(),
        ))
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().map(|s| s.dim()) == Some(0) || self.dim == 0
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last().map(|s| s.dim()) == Some(0) || self.dim == 0
    }

    /// Center: joint kernel of all basis adjoint maps.
    pub fn center(&self) -> Subspace {
        let n = self.dim;
        if n == 0 {
            return Subspace::zero(0);
        }
        let mut stacked = DMatrix::zeros(n * n, n);
        for u in 0..n {
            stacked.view_mut((u * n, 0), (n, n)).copy_from(&self.adjoint_basis(u));
        }
        Subspace::from_orthonormal(linalg::kernel(&stacked, RANK_TOL))
    }

    /// Nilradical of a solvable algebra.
    ///
    /// Since `g/[g,g]` is abelian, `ad_x` carries all of its nonzero
    /// eigenvalues on the stable term `N` of the chain
    /// `[g,g] ⊇ [g,[g,g]] ⊇ ...`, so `x` lies in the nilradical exactly when
    /// `ad_x` restricted to `N` is nilpotent. In the common triangularizing
    /// flag this is equivalent to the vanishing of `tr(ad_x|_N · P)` for
    /// every word `P` in the associative hull of the restricted adjoint
    /// family (the diagonal of `ad_x|_N` vanishes against every product
    /// pattern), which is a linear system in exactly computable traces —
    /// far more robust than reading eigenvalue forms off a defective family.
    pub fn nilradical(&self) -> Result<Subspace, AlgebraError> {
        let chain = self.derived_series();
        let stuck = chain.last().map(|s| s.dim()).unwrap_or(0);
        if stuck != 0 {
            return Err(AlgebraError::NotSolvable { stuck });
        }
        if self.is_nilpotent() {
            return Ok(Subspace::full(self.dim));
        }
        // stable term of N_0 = [g,g], N_{k+1} = [g, N_k]
        let full = Subspace::full(self.dim);
        let mut stable = self.bracket_span(&full, &full);
        for _ in 0..(2 * self.dim + 2) {
            let next = self.bracket_span(&full, &stable);
            if next.dim() == stable.dim() {
                break;
            }
            stable = next;
        }
        let nb = stable.basis();
        let k = stable.dim();
        let n = self.dim;
        let restricted: Vec<DMatrix<f64>> = (0..n)
            .map(|u| nb.transpose() * self.adjoint_basis(u) * nb)
            .collect();
        // Associative hull of the restricted family, including the identity;
        // every accepted word is normalized to unit Frobenius norm.
        let mut words: Vec<DMatrix<f64>> = Vec::new();
        let vec_of = |m: &DMatrix<f64>| DVector::from_column_slice(m.as_slice());
        let try_add = |words: &mut Vec<DMatrix<f64>>, cand: &DMatrix<f64>| -> bool {
            let mut v = vec_of(cand);
            let scale = v.norm();
            if scale < 1e-13 {
                return false;
            }
            for w in words.iter() {
                let wv = vec_of(w);
                let dot = wv.dot(&v);
                v -= wv * dot;
            }
            if v.norm() > 1e-10 * scale.max(1.0) {
                let m = DMatrix::from_column_slice(k, k, v.as_slice());
                let norm = m.norm();
                words.push(m / norm);
                true
            } else {
                false
            }
        };
        try_add(&mut words, &DMatrix::identity(k, k));
        for a in &restricted {
            try_add(&mut words, a);
        }
        loop {
            let mut grew = false;
            let snapshot = words.clone();
            for w in &snapshot {
                for a in &restricted {
                    if words.len() >= k * k {
                        break;
                    }
                    if try_add(&mut words, &(w * a)) {
                        grew = true;
                    }
                }
            }
            if !grew || words.len() >= k * k {
                break;
            }
        }
        // rows: u-th coefficient is tr(ad_{e_u}|_N · P)
        let ad_scale = restricted.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let mut stacked = DMatrix::zeros(words.len(), n);
        for (r, p) in words.iter().enumerate() {
            for u in 0..n {
                stacked[(r, u)] = (&restricted[u] * p).trace();
            }
        }
        let nil = Subspace::from_orthonormal(linalg::kernel_scaled(
            &stacked,
            RANK_TOL,
            1.0 + ad_scale,
        ));
        // verification: the nilradical contains every bracket and its basis
        // directions act nilpotently on the stable ideal
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.bracket_basis(i, j);
                if nil.residual(&w) > 1e-8 * (1.0 + w.norm()) {
                    return Err(AlgebraError::Triangulate(TriangulateError::VerificationFailed(
                        format!("nilradical misses the bracket [e_{i}, e_{j}]"),
                    )));
                }
            }
        }
        for c in 0..nil.dim() {
            let x = nil.basis().column(c).into_owned();
            let ad = nb.transpose() * self.adjoint_matrix(&x).expect("dims agree") * nb;
            let mut p = DMatrix::identity(k, k);
            for _ in 0..k {
                p = &p * &ad;
            }
            if p.norm() > 1e-7 * (1.0 + ad.norm()).powi(k as i32) {
                return Err(AlgebraError::Triangulate(TriangulateError::VerificationFailed(
                    "a nilradical direction does not act nilpotently".into(),
                )));
            }
        }
        debug_assert!(2 * nil.dim() >= self.dim + self.center().dim());
        Ok(nil)
    }

    /// Restrict the algebra to a bracket-closed subspace; returns the
    /// restricted algebra together with the orthonormal basis used, so that
    /// coordinates can be mapped back via `basis * coords`.
    pub fn subalgebra(&self, space: &Subspace) -> Result<(LieAlgebra, DMatrix<f64>), AlgebraError> {
        let basis = space.basis().clone();
        let l = basis.ncols();
        let scale = 1.0 + self.scale();
        let mut terms = Vec::new();
        let mut worst = 0.0_f64;
        for a in 0..l {
            let va = basis.column(a).into_owned();
            for b in (a + 1)..l {
                let vb = basis.column(b).into_owned();
                let w = self.bracket(&va, &vb)?;
                let coords = basis.transpose() * &w;
                let resid = (&w - &basis * &coords).norm();
                worst = worst.max(resid);
                for k in 0..l {
                    if coords[k].abs() > 1e-14 * scale {
                        terms.push(BracketTerm { i: a, j: b, k, c: coords[k] });
                    }
                }
            }
        }
        if worst > 1e-8 * scale {
            return Err(AlgebraError::NotASubalgebra { residual: worst });
        }
        Ok((LieAlgebra::new(l, terms)?, basis))
    }
}

/// Mixed bracket `[Y_j, Y_k] = value` (a vector in the nilpotent part) for
/// [`make_extension`].
#[derive(Debug, Clone)]
pub struct MixedTerm {
    pub j: usize,
    pub k: usize,
    pub value: DVector<f64>,
}

/// Solvable extension of a nilpotent algebra by commuting-or-not derivations:
/// the result has basis `(X_1..X_l, Y_1..Y_m)` with `[Y_j, X_i]` prescribed by
/// `derivations[j]` and optional `[Y_j, Y_k]` values inside the nilpotent part.
pub fn make_extension(
    nil: &LieAlgebra,
    derivations: &[DMatrix<f64>],
    mixed: Option<&[MixedTerm]>,
) -> Result<LieAlgebra, AlgebraError> {
    let l = nil.dim();
    let m = derivations.len();
    let scale = 1.0 + nil.scale();
    for (index, d) in derivations.iter().enumerate() {
        if d.nrows() != l || d.ncols() != l {
            return Err(AlgebraError::DimensionMismatch { expected: l, got: d.nrows() });
        }
        let dscale = 1.0 + d.norm();
        let mut defect = 0.0_f64;
        for i in 0..l {
            for j in (i + 1)..l {
                let lhs = d * nil.bracket_basis(i, j);
                let rhs = nil.bracket(&d.column(i).into_owned(), &unit(l, j))?
                    + nil.bracket(&unit(l, i), &d.column(j).into_owned())?;
                defect = defect.max((lhs - rhs).norm());
            }
        }
        if defect > 1e-10 * scale * dscale {
            return Err(AlgebraError::NotADerivation { index, defect });
        }
    }
    let n = l + m;
    let mut terms: Vec<BracketTerm> = nil
        .terms()
        .iter()
        .map(|t| BracketTerm { i: t.i, j: t.j, k: t.k, c: t.c })
        .collect();
    for (jj, d) in derivations.iter().enumerate() {
        let y = l + jj;
        for i in 0..l {
            for k in 0..l {
                let c = d[(k, i)];
                if c != 0.0 {
                    // [X_i, Y_j] = -D_j e_i
                    terms.push(BracketTerm { i, j: y, k, c: -c });
                }
            }
        }
    }
    if let Some(mix) = mixed {
        for t in mix {
            if t.j >= m || t.k >= m || t.j >= t.k {
                return Err(AlgebraError::IndexOrder { i: t.j, j: t.k });
            }
            if t.value.len() != l {
                return Err(AlgebraError::DimensionMismatch { expected: l, got: t.value.len() });
            }
            for r in 0..l {
                if t.value[r] != 0.0 {
                    terms.push(BracketTerm { i: l + t.j, j: l + t.k, k: r, c: t.value[r] });
                }
            }
        }
    }
    let alg = LieAlgebra::new(n, terms)?;
    let defect = alg.jacobi_defect();
    let all_scale = 1.0 + alg.scale();
    if defect > 1e-10 * all_scale * all_scale {
        return Err(AlgebraError::JacobiViolated { defect });
    }
    Ok(alg)
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// A linear subspace of the coordinate space, kept as orthonormal columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn full(ambient: usize) -> Self {
        Self { ambient, basis: DMatrix::identity(ambient, ambient) }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { ambient, basis: DMatrix::zeros(ambient, 0) }
    }

    /// Orthonormalize the columns of `spanning` (SVD-based).
    pub fn from_spanning(spanning: &DMatrix<f64>) -> Self {
        let basis = linalg::column_space(spanning, RANK_TOL);
        Self { ambient: spanning.nrows(), basis }
    }

    /// Wrap columns that are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { ambient: basis.nrows(), basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// `||v - proj(v)||`.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.residual(v) <= tol * (1.0 + v.norm())
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        Subspace::from_orthonormal(linalg::orthogonal_complement(&self.basis, RANK_TOL))
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let rows_a = linalg::orthogonal_complement(&self.basis, RANK_TOL);
        let rows_b = linalg::orthogonal_complement(&other.basis, RANK_TOL);
        let mut stacked = DMatrix::zeros(rows_a.ncols() + rows_b.ncols(), self.ambient);
        for c in 0..rows_a.ncols() {
            for r in 0..self.ambient {
                stacked[(c, r)] = rows_a[(r, c)];
            }
        }
        for c in 0..rows_b.ncols() {
            for r in 0..self.ambient {
                stacked[(rows_a.ncols() + c, r)] = rows_b[(r, c)];
            }
        }
        Subspace::from_orthonormal(linalg::kernel(&stacked, RANK_TOL))
    }
}

/// A linear functional on the coordinate space.
#[derive(Debug, Clone)]
pub struct LinearForm {
    coeffs: DVector<f64>,
}

impl LinearForm {
    pub fn new(coeffs: DVector<f64>) -> Self {
        assert!(coeffs.iter().all(|c| c.is_finite()), "linear form entries must be finite");
        Self { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Self { coeffs: DVector::zeros(n) }
    }

    pub fn eval(&self, v: &DVector<f64>) -> f64 {
        self.coeffs.dot(v)
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Restrict along a linear map: the form `v -> self(map * v)`.
    pub fn compose(&self, map: &DMatrix<f64>) -> LinearForm {
        LinearForm::new(map.transpose() * &self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}
