//! Recognition of a nilpotent algebra's isomorphism type among abelian,
//! Heisenberg `h_{2p+1}` and standard filiform `L_l`, with adapted bases
//! (Darboux basis for the symplectic pairing, chain basis for the filiform
//! case) and the theorem-specific linear forms on the ambient solvable
//! algebra.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{AlgebraError, LieAlgebra, LinearForm, Subspace};
use crate::linalg::{self, RANK_TOL};
use crate::triangulate::{self, TriangulateError, WeightData};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("nilradical data mismatch: {0}")]
    NilradicalMismatch(String),
    #[error("extension rank {m} >= 3 is impossible over a standard filiform nilradical; the nilradical is larger than assumed")]
    RankTooHigh { m: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Triangulate(#[from] TriangulateError),
}

/// Isomorphism type of a nilpotent algebra, with an adapted basis when the
/// type is recognized. The adapted basis columns are coordinates in the
/// algebra the classifier was invoked on.
#[derive(Debug, Clone)]
pub enum NilradicalClass {
    Abelian,
    Heisenberg { p: usize, adapted: DMatrix<f64> },
    StandardFiliform { l: usize, adapted: DMatrix<f64> },
    Other { diagnostics: String },
}

impl NilradicalClass {
    pub fn describe(&self) -> String {
        match self {
            NilradicalClass::Abelian => "abelian".into(),
            NilradicalClass::Heisenberg { p, .. } => format!("heisenberg(p={p})"),
            NilradicalClass::StandardFiliform { l, .. } => format!("standard-filiform(l={l})"),
            NilradicalClass::Other { diagnostics } => format!("other ({diagnostics})"),
        }
    }
}

/// Classify a nilpotent algebra. Abelian is checked first, then Heisenberg
/// (odd dimension, 1-dimensional center equal to the derived algebra,
/// nondegenerate induced pairing), then standard filiform (lower central
/// series dims `l, l-2, ..., 1, 0` with an abelian codimension-one
/// centralizer of the derived algebra).
pub fn classify_nilradical(nil: &LieAlgebra) -> Result<NilradicalClass, ClassifyError> {
    if !nil.is_nilpotent() {
        return Err(ClassifyError::NotNilpotent);
    }
    let l = nil.dim();
    let scale = 1.0 + nil.scale();
    if nil.scale() == 0.0 {
        return Ok(NilradicalClass::Abelian);
    }
    // Heisenberg candidate?
    if l % 2 == 1 {
        let p = l / 2;
        let center = nil.center();
        let derived = nil.derived_series();
        let derived1 = derived.get(1).map(|s| s.dim()).unwrap_or(0);
        if center.dim() == 1 && derived1 == 1 {
            let z = center.basis().column(0).into_owned();
            // check [n, n] = center: brackets must be multiples of z
            let mut ok = true;
            for i in 0..l {
                for j in (i + 1)..l {
                    let w = nil.bracket_basis(i, j);
                    let coeff = z.dot(&w);
                    if (&w - &z * coeff).norm() > 1e-9 * scale {
                        ok = false;
                    }
                }
            }
            if ok {
                if let Some(adapted) = darboux_basis(nil, &z, p, scale) {
                    return Ok(NilradicalClass::Heisenberg { p, adapted });
                }
            }
        }
    }
    // Standard filiform candidate?
    if l >= 3 {
        let lcs: Vec<usize> = nil.lower_central_series().iter().map(|s| s.dim()).collect();
        let mut expected = vec![l, l - 2];
        for d in (0..(l - 2)).rev() {
            expected.push(d);
        }
        expected.dedup();
        if lcs == expected {
            if let Some(adapted) = filiform_chain_basis(nil, scale) {
                return Ok(NilradicalClass::StandardFiliform { l, adapted });
            }
        }
    }
    Ok(NilradicalClass::Other {
        diagnostics: format!(
            "dim {l}, lcs dims {:?}, center dim {}",
            nil.lower_central_series().iter().map(|s| s.dim()).collect::<Vec<_>>(),
            nil.center().dim()
        ),
    })
}

/// Build a Darboux basis `(X_1..X_p, X_{p+1}..X_{2p}, Z)` for the pairing
/// `[x, y] = omega(x, y) Z` by greedy symplectic Gram-Schmidt. Pivot is the
/// largest-magnitude pairing entry, ties broken by index order.
fn darboux_basis(nil: &LieAlgebra, z: &DVector<f64>, p: usize, scale: f64) -> Option<DMatrix<f64>> {
    let l = nil.dim();
    let zz = z.dot(z);
    // complement of z in coordinates
    let zmat = DMatrix::from_column_slice(l, 1, z.as_slice());
    let comp = linalg::orthogonal_complement(&zmat, RANK_TOL);
    let m = comp.ncols(); // 2p
    if m != 2 * p {
        return None;
    }
    let omega_of = |x: &DVector<f64>, y: &DVector<f64>| -> f64 {
        z.dot(&nil.bracket(x, y).expect("dims agree")) / zz
    };
    let mut working: Vec<DVector<f64>> = (0..m).map(|c| comp.column(c).into_owned()).collect();
    let mut us: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut vs: Vec<DVector<f64>> = Vec::with_capacity(p);
    for _ in 0..p {
        // pivot pair
        let mut best = (0usize, 1usize);
        let mut best_mag = -1.0;
        for a in 0..working.len() {
            for b in (a + 1)..working.len() {
                let w = omega_of(&working[a], &working[b]).abs();
                if w > best_mag + 1e-14 {
                    best_mag = w;
                    best = (a, b);
                }
            }
        }
        if best_mag <= 1e-9 * scale {
            return None; // degenerate pairing
        }
        let u = working[best.0].clone();
        let w = omega_of(&u, &working[best.1]);
        let v = &working[best.1] / w;
        // remove the pair and omega-project the rest
        let mut rest: Vec<DVector<f64>> = Vec::new();
        for (idx, x) in working.iter().enumerate() {
            if idx == best.0 || idx == best.1 {
                continue;
            }
            // x' = x - omega(x, v) u + omega(x, u) v  gives omega(x', u) = omega(x', v) = 0
            let xu = omega_of(x, &u);
            let xv = omega_of(x, &v);
            let xp = x - &u * xv + &v * xu;
            rest.push(xp);
        }
        us.push(u);
        vs.push(v);
        working = rest;
    }
    if !working.is_empty() {
        return None;
    }
    let mut adapted = DMatrix::zeros(l, 2 * p + 1);
    for (i, u) in us.iter().enumerate() {
        adapted.set_column(i, u);
    }
    for (i, v) in vs.iter().enumerate() {
        adapted.set_column(p + i, v);
    }
    adapted.set_column(2 * p, z);
    // verify the Heisenberg relations in the adapted basis
    let resid = heisenberg_relations_residual(nil, &adapted, p);
    if resid > 1e-9 * scale {
        return None;
    }
    Some(adapted)
}

fn heisenberg_relations_residual(nil: &LieAlgebra, adapted: &DMatrix<f64>, p: usize) -> f64 {
    let cols = adapted.ncols();
    let z = adapted.column(cols - 1).into_owned();
    let mut worst = 0.0_f64;
    for i in 0..cols {
        for j in (i + 1)..cols {
            let w = nil
                .bracket(&adapted.column(i).into_owned(), &adapted.column(j).into_owned())
                .expect("dims agree");
            let expected = if j == p + i && i < p { z.clone() } else { DVector::zeros(cols) };
            worst = worst.max((w - expected).norm());
        }
    }
    worst
}

/// Chain basis for a standard filiform algebra: `X_1` spans the orthogonal of
/// the centralizer of `[n, n]`; `X_2` is the admissible candidate maximizing
/// `||[X_1, X_2]||`; `X_{i+1} = [X_1, X_i]`.
fn filiform_chain_basis(nil: &LieAlgebra, scale: f64) -> Option<DMatrix<f64>> {
    let l = nil.dim();
    // centralizer of the derived algebra
    let derived = &nil.derived_series()[1];
    let dd = derived.dim();
    let mut rows = DMatrix::zeros(dd * l, l);
    for c in 0..dd {
        let w = derived.basis().column(c).into_owned();
        // row block: x -> [x, w] = -ad_w x
        let ad_w = nil.adjoint_matrix(&w).expect("dims agree");
        rows.view_mut((c * l, 0), (l, l)).copy_from(&ad_w);
    }
    let centralizer = Subspace::from_orthonormal(linalg::kernel(&rows, RANK_TOL));
    if centralizer.dim() != l - 1 {
        return None;
    }
    // the centralizer must be abelian
    for a in 0..(l - 1) {
        for b in (a + 1)..(l - 1) {
            let w = nil
                .bracket(
                    &centralizer.basis().column(a).into_owned(),
                    &centralizer.basis().column(b).into_owned(),
                )
                .expect("dims agree");
            if w.norm() > 1e-9 * scale {
                return None;
            }
        }
    }
    let x1_dir = centralizer.complement();
    if x1_dir.dim() != 1 {
        return None;
    }
    let mut x1 = x1_dir.basis().column(0).into_owned();
    let ad1 = nil.adjoint_matrix(&x1).expect("dims agree");
    // X2 candidates: centralizer basis vectors that generate the full chain.
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for c in 0..(l - 1) {
        let cand = centralizer.basis().column(c).into_owned();
        let mut v = cand.clone();
        for _ in 0..(l - 2) {
            v = &ad1 * v;
        }
        if v.norm() > 1e-9 * scale {
            let first = (&ad1 * &cand).norm();
            candidates.push((first, c));
        }
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    for (_, c) in candidates {
        let x2 = centralizer.basis().column(c).into_owned();
        // fix the sign of X1: largest-magnitude entry of [X1, X2] positive
        let x3 = nil.bracket(&x1, &x2).expect("dims agree");
        let mut lead = 0usize;
        for i in 0..l {
            if x3[i].abs() > x3[lead].abs() {
                lead = i;
            }
        }
        if x3[lead] < 0.0 {
            x1 = -x1;
        }
        let mut chain: Vec<DVector<f64>> = vec![x1.clone(), x2.clone()];
        for _ in 2..l {
            let next = nil.bracket(&x1, chain.last().unwrap()).expect("dims agree");
            chain.push(next);
        }
        let mut adapted = DMatrix::zeros(l, l);
        for (i, v) in chain.iter().enumerate() {
            adapted.set_column(i, v);
        }
        if linalg::rank(&adapted, RANK_TOL) != l {
            continue;
        }
        // verify: [X1, X_l] = 0 and [X_i, X_j] = 0 for i, j >= 2
        let tail = nil.bracket(&x1, chain.last().unwrap()).expect("dims agree");
        if tail.norm() > 1e-9 * scale {
            continue;
        }
        let mut ok = true;
        for i in 1..l {
            for j in (i + 1)..l {
                let w = nil.bracket(&chain[i], &chain[j]).expect("dims agree");
                if w.norm() > 1e-9 * scale {
                    ok = false;
                }
            }
        }
        if ok {
            return Some(adapted);
        }
    }
    None
}

/// The Heisenberg-specific data of a solvable algebra `g` with nilradical
/// `h_{2p+1}`: the center weight `lambda` on `g`, the triangularized family
/// of induced maps on `n/z` parameterized by a complement of `n`, and the
/// skew pairing matrix on the adapted symplectic complement.
#[derive(Debug, Clone)]
pub struct HeisenbergData {
    pub p: usize,
    /// `[y, Z] = lambda(y) Z` for all y in g.
    pub lambda: LinearForm,
    /// Triangularization of the commuting family `Phi(Y_k)` on `n/z`;
    /// parameter space = columns of `complement`.
    pub dforms: WeightData,
    /// Pairing matrix `J` on the adapted basis of `m = span(X_1..X_2p)`.
    pub j_pairing: DMatrix<f64>,
    /// Orthonormal basis of a complement of the nilradical in `g` (n x m).
    pub complement: DMatrix<f64>,
    /// Adapted nilradical basis in `g` coordinates (n x (2p+1)): X's then Z.
    pub adapted_in_g: DMatrix<f64>,
    /// The `Phi(Y_k)` matrices on the adapted `m`-basis.
    pub n_matrices: Vec<DMatrix<f64>>,
    /// Bottom-row vectors `v_k` of `(ad_{Y_k})|n` in the adapted basis.
    pub v_vectors: Vec<DVector<f64>>,
}

/// Extract the Heisenberg data. `nil` must be the nilradical of `g` and
/// `cls` the classification of the subalgebra built on `nil.basis()`.
pub fn heisenberg_data(
    g: &LieAlgebra,
    nil: &Subspace,
    cls: &NilradicalClass,
) -> Result<HeisenbergData, ClassifyError> {
    let (p, adapted) = match cls {
        NilradicalClass::Heisenberg { p, adapted } => (*p, adapted.clone()),
        other => {
            return Err(ClassifyError::NilradicalMismatch(format!(
                "expected a Heisenberg nilradical, got {}",
                other.describe()
            )))
        }
    };
    let n = g.dim();
    let scale = 1.0 + g.scale();
    let w = nil.basis() * &adapted; // n x (2p+1): adapted basis in g coords
    let z = w.column(2 * p).into_owned();
    let zz = z.dot(&z);
    // lambda on g: [e_u, z] = lambda_u z
    let mut lambda = DVector::zeros(n);
    for u in 0..n {
        let br = g.bracket(&unit(n, u), &z).expect("dims agree");
        let coeff = z.dot(&br) / zz;
        if (&br - &z * coeff).norm() > 1e-9 * scale * (1.0 + br.norm()) {
            return Err(ClassifyError::NilradicalMismatch(format!(
                "center direction is not an eigenvector of ad_e_{u}"
            )));
        }
        lambda[u] = coeff;
    }
    let complement = nil.complement().basis().clone();
    let m = complement.ncols();
    // full change of basis [W | C] to read off coordinates
    let mut full = DMatrix::zeros(n, n);
    full.view_mut((0, 0), (n, 2 * p + 1)).copy_from(&w);
    full.view_mut((0, 2 * p + 1), (n, m)).copy_from(&complement);
    let full_inv = full.clone().lu().try_inverse().ok_or_else(|| {
        ClassifyError::NilradicalMismatch("adapted basis is singular".into())
    })?;
    let mut n_matrices = Vec::with_capacity(m);
    let mut v_vectors = Vec::with_capacity(m);
    for k in 0..m {
        let y = complement.column(k).into_owned();
        let mut mat = DMatrix::zeros(2 * p, 2 * p);
        let mut v = DVector::zeros(2 * p);
        for jcol in 0..(2 * p) {
            let br = g.bracket(&y, &w.column(jcol).into_owned()).expect("dims agree");
            let coords = &full_inv * &br;
            let outside = coords.rows(2 * p + 1, m).norm();
            if outside > 1e-8 * scale * (1.0 + br.norm()) {
                return Err(ClassifyError::NilradicalMismatch(
                    "ad_Y image leaves the nilradical".into(),
                ));
            }
            for r in 0..(2 * p) {
                mat[(r, jcol)] = coords[r];
            }
            v[jcol] = coords[2 * p];
        }
        // trace law: Tr N_Y = p lambda(Y)
        let lam_y = lambda.dot(&y);
        if (mat.trace() - p as f64 * lam_y).abs() > 1e-8 * scale * (1.0 + mat.norm()) {
            return Err(ClassifyError::NilradicalMismatch(format!(
                "trace law violated: Tr N = {}, p lambda = {}",
                mat.trace(),
                p as f64 * lam_y
            )));
        }
        n_matrices.push(mat);
        v_vectors.push(v);
    }
    // pairing matrix on the adapted m-basis
    let mut j_pairing = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..(2 * p) {
        for j in 0..(2 * p) {
            let br = g
                .bracket(&w.column(i).into_owned(), &w.column(j).into_owned())
                .expect("dims agree");
            j_pairing[(i, j)] = z.dot(&br) / zz;
        }
    }
    let dforms = if m > 0 {
        triangulate::real_block_triangularize(&n_matrices)?
    } else {
        return Err(ClassifyError::NilradicalMismatch(
            "no complement directions: the algebra is nilpotent".into(),
        ));
    };
    Ok(HeisenbergData {
        p,
        lambda: LinearForm::new(lambda),
        dforms,
        j_pairing,
        complement,
        adapted_in_g: w,
        n_matrices,
        v_vectors,
    })
}

/// Rank-1 filiform extension parameters read off the derivation diagonal.
#[derive(Debug, Clone, Copy)]
pub struct Rank1Filiform {
    pub a: f64,
    pub d: f64,
    /// `t = (l-1) d + ((l-1)(l-2)/2 + 1) a`.
    pub t: f64,
}

/// The filiform-specific data: the forms `lambda` (center action) and `iota`
/// (trace on the abelian ideal), the ideal itself, and the extension rank.
#[derive(Debug, Clone)]
pub struct FiliformData {
    pub l: usize,
    pub lambda: LinearForm,
    pub iota: LinearForm,
    pub ideal: Subspace,
    pub rank: usize,
    /// Adapted chain basis in `g` coordinates (n x l).
    pub adapted_in_g: DMatrix<f64>,
    /// Orthonormal complement of the nilradical (n x rank).
    pub complement: DMatrix<f64>,
    /// Parameters of the rank-1 derivation, when rank = 1.
    pub rank1: Option<Rank1Filiform>,
}

/// Extract the filiform data; errors with `RankTooHigh` when the complement
/// has dimension >= 3 (impossible over a standard filiform nilradical, so the
/// nilradical must have been computed wrongly).
pub fn filiform_data(
    g: &LieAlgebra,
    nil: &Subspace,
    cls: &NilradicalClass,
) -> Result<FiliformData, ClassifyError> {
    let (l, adapted) = match cls {
        NilradicalClass::StandardFiliform { l, adapted } => (*l, adapted.clone()),
        other => {
            return Err(ClassifyError::NilradicalMismatch(format!(
                "expected a standard filiform nilradical, got {}",
                other.describe()
            )))
        }
    };
    if l < 4 {
        return Err(ClassifyError::NilradicalMismatch(format!(
            "filiform data needs l >= 4, got {l}"
        )));
    }
    let n = g.dim();
    let m = n - l;
    if m >= 3 {
        return Err(ClassifyError::RankTooHigh { m });
    }
    let scale = 1.0 + g.scale();
    let w = nil.basis() * &adapted; // n x l, columns X_1..X_l
    let xl = w.column(l - 1).into_owned();
    let xlxl = xl.dot(&xl);
    let mut lambda = DVector::zeros(n);
    for u in 0..n {
        let br = g.bracket(&unit(n, u), &xl).expect("dims agree");
        let coeff = xl.dot(&br) / xlxl;
        if (&br - &xl * coeff).norm() > 1e-9 * scale * (1.0 + br.norm()) {
            return Err(ClassifyError::NilradicalMismatch(format!(
                "X_l is not an eigenvector of ad_e_{u}"
            )));
        }
        lambda[u] = coeff;
    }
    // abelian ideal i = span(X_2..X_l)
    let ideal = Subspace::from_spanning(&w.columns(1, l - 1).into_owned());
    let bi = ideal.basis().clone();
    let mut iota = DVector::zeros(n);
    for u in 0..n {
        let ad = g.adjoint_matrix(&unit(n, u)).expect("dims agree");
        // invariance check
        for c in 0..bi.ncols() {
            let img = &ad * bi.column(c).into_owned();
            if ideal.residual(&img) > 1e-8 * scale * (1.0 + img.norm()) {
                return Err(ClassifyError::NilradicalMismatch(format!(
                    "the abelian ideal is not ad_e_{u} invariant"
                )));
            }
        }
        iota[u] = (bi.transpose() * &ad * &bi).trace();
    }
    let complement = nil.complement().basis().clone();
    let rank1 = if m == 1 {
        let mut y = complement.column(0).into_owned();
        // read the derivation diagonal in the adapted basis
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (n, l)).copy_from(&w);
        full.view_mut((0, l), (n, m)).copy_from(&complement);
        let full_inv = full.lu().try_inverse().ok_or_else(|| {
            ClassifyError::NilradicalMismatch("adapted basis is singular".into())
        })?;
        let read_ad = |y: &DVector<f64>| -> DMatrix<f64> {
            let mut mat = DMatrix::zeros(l, l);
            for jcol in 0..l {
                let br = g.bracket(y, &w.column(jcol).into_owned()).expect("dims agree");
                let coords = &full_inv * &br;
                for r in 0..l {
                    mat[(r, jcol)] = coords[r];
                }
            }
            mat
        };
        let mut mat = read_ad(&y);
        let (mut a, mut d) = (mat[(0, 0)], mat[(1, 1)]);
        // deterministic orientation: the larger-magnitude parameter positive
        if (a.abs() >= d.abs() && a < 0.0) || (d.abs() > a.abs() && d < 0.0) {
            y = -y;
            mat = read_ad(&y);
            a = mat[(0, 0)];
            d = mat[(1, 1)];
        }
        // diagonal pattern check: entries a, d, a+d, ..., (l-2)a+d
        for i in 2..l {
            let expect = (i - 1) as f64 * a + d;
            if (mat[(i, i)] - expect).abs() > 1e-8 * scale * (1.0 + mat.norm()) {
                return Err(ClassifyError::NilradicalMismatch(format!(
                    "derivation diagonal deviates from the (a, d) pattern at position {i}"
                )));
            }
        }
        let t = (l - 1) as f64 * d + (((l - 1) * (l - 2)) as f64 / 2.0 + 1.0) * a;
        Some(Rank1Filiform { a, d, t })
    } else {
        None
    };
    Ok(FiliformData {
        l,
        lambda: LinearForm::new(lambda),
        iota: LinearForm::new(iota),
        ideal,
        rank: m,
        adapted_in_g: w,
        complement,
        rank1,
    })
}

/// Run the full chain nilradical -> subalgebra -> classification.
pub fn analyze(g: &LieAlgebra) -> Result<(Subspace, LieAlgebra, NilradicalClass), ClassifyError> {
    let nil = g.nilradical()?;
    let (sub, _basis) = g.subalgebra(&nil)?;
    let cls = classify_nilradical(&sub)?;
    Ok((nil, sub, cls))
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn classify_basic_types() {
        match classify_nilradical(&catalog::heisenberg(2)).unwrap() {
            NilradicalClass::Heisenberg { p, .. } => assert_eq!(p, 2),
            other => panic!("h5 misclassified as {}", other.describe()),
        }
        match classify_nilradical(&catalog::filiform(4)).unwrap() {
            NilradicalClass::StandardFiliform { l, .. } => assert_eq!(l, 4),
            other => panic!("L4 misclassified as {}", other.describe()),
        }
        assert!(matches!(
            classify_nilradical(&crate::algebra::LieAlgebra::abelian(3)).unwrap(),
            NilradicalClass::Abelian
        ));
        // h3 = L3 counts as Heisenberg
        assert!(matches!(
            classify_nilradical(&catalog::heisenberg(1)).unwrap(),
            NilradicalClass::Heisenberg { p: 1, .. }
        ));
    }

    #[test]
    fn classify_rejects_non_nilpotent() {
        assert!(matches!(
            classify_nilradical(&catalog::hyperbolic(3)),
            Err(ClassifyError::NotNilpotent)
        ));
    }

    #[test]
    fn classify_other_for_unrecognized() {
        // direct sum h3 + R: 4-dim nilpotent, center dim 2: none of the types
        let mut terms = catalog::heisenberg(1).terms().to_vec();
        terms.iter_mut().for_each(|_| {});
        let alg = crate::algebra::LieAlgebra::new(4, terms).unwrap();
        assert!(matches!(
            classify_nilradical(&alg).unwrap(),
            NilradicalClass::Other { .. }
        ));
    }

    #[test]
    fn darboux_basis_is_canonical_under_random_conjugation() {
        let mut rng = StdRng::seed_from_u64(41);
        for p in [1usize, 2] {
            let nil = catalog::heisenberg(p);
            for _ in 0..5 {
                let l = 2 * p + 1;
                let t = random_invertible(l, &mut rng);
                let conj = crate::degenerate::act(&t, &nil).unwrap();
                match classify_nilradical(&conj).unwrap() {
                    NilradicalClass::Heisenberg { p: got, adapted } => {
                        assert_eq!(got, p);
                        // pairing in the adapted basis must be the canonical J
                        let z = adapted.column(2 * p).into_owned();
                        let zz = z.dot(&z);
                        let mut j = DMatrix::zeros(2 * p, 2 * p);
                        for i in 0..(2 * p) {
                            for jc in 0..(2 * p) {
                                let w = conj
                                    .bracket(
                                        &adapted.column(i).into_owned(),
                                        &adapted.column(jc).into_owned(),
                                    )
                                    .unwrap();
                                j[(i, jc)] = z.dot(&w) / zz;
                            }
                        }
                        let mut expected = DMatrix::zeros(2 * p, 2 * p);
                        for i in 0..p {
                            expected[(i, p + i)] = 1.0;
                            expected[(p + i, i)] = -1.0;
                        }
                        assert!((j - expected).norm() < 1e-9);
                    }
                    other => panic!("conjugated h{} misclassified as {}", 2 * p + 1, other.describe()),
                }
            }
        }
    }

    #[test]
    fn filiform_chain_under_random_conjugation() {
        let mut rng = StdRng::seed_from_u64(43);
        for l in [4usize, 5, 6] {
            let nil = catalog::filiform(l);
            for _ in 0..5 {
                let t = random_invertible(l, &mut rng);
                let conj = crate::degenerate::act(&t, &nil).unwrap();
                match classify_nilradical(&conj).unwrap() {
                    NilradicalClass::StandardFiliform { l: got, adapted } => {
                        assert_eq!(got, l);
                        // chain property: [X1, X_i] = X_{i+1}, [X1, X_l] = 0
                        let x1 = adapted.column(0).into_owned();
                        for i in 1..(l - 1) {
                            let img = conj.bracket(&x1, &adapted.column(i).into_owned()).unwrap();
                            let diff = img - adapted.column(i + 1).into_owned();
                            assert!(diff.norm() < 1e-9 * (1.0 + conj.scale()));
                        }
                        let tail = conj.bracket(&x1, &adapted.column(l - 1).into_owned()).unwrap();
                        assert!(tail.norm() < 1e-9 * (1.0 + conj.scale()));
                    }
                    other => panic!("conjugated L{l} misclassified as {}", other.describe()),
                }
            }
        }
    }

    #[test]
    fn heisenberg_data_diag_weights() {
        let g = catalog::heisenberg_extension(1, &[1.0, 2.0]); // diag(d1, d2, d1+d2)
        let nil = g.nilradical().unwrap();
        let (sub, _) = g.subalgebra(&nil).unwrap();
        let cls = classify_nilradical(&sub).unwrap();
        let hd = heisenberg_data(&g, &nil, &cls).unwrap();
        assert_eq!(hd.p, 1);
        // lambda(Y) = 3 at the complement direction
        let y = hd.complement.column(0).into_owned();
        let lam = hd.lambda.eval(&y);
        assert!((lam.abs() - 3.0).abs() < 1e-9);
        // d-weights are {1, 2} up to common sign of Y
        let probe = DVector::from_column_slice(&[1.0]);
        let mut ws: Vec<f64> =
            triangulate::weights_of(&hd.dforms, &probe).iter().map(|w| w.0).collect();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sign = if lam > 0.0 { 1.0 } else { -1.0 };
        assert!((ws[0] * sign - 1.0).abs() < 1e-9 || (ws[1] * sign - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heisenberg_trace_law_random_probes() {
        let g = catalog::heisenberg_extension(2, &[1.0, 2.0, 3.0, 2.0]);
        let nil = g.nilradical().unwrap();
        let (sub, _) = g.subalgebra(&nil).unwrap();
        let cls = classify_nilradical(&sub).unwrap();
        let hd = heisenberg_data(&g, &nil, &cls).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let c: f64 = rng.random::<f64>() * 4.0 - 2.0;
            let y = hd.complement.column(0).into_owned() * c;
            let n_y = &hd.n_matrices[0] * c;
            assert!((n_y.trace() - hd.p as f64 * hd.lambda.eval(&y)).abs() < 1e-8);
        }
    }

    #[test]
    fn heisenberg_rotation_block_weights() {
        let g = catalog::heisenberg_rotation_extension(1.0, 2.0);
        let nil = g.nilradical().unwrap();
        let (sub, _) = g.subalgebra(&nil).unwrap();
        let cls = classify_nilradical(&sub).unwrap();
        let hd = heisenberg_data(&g, &nil, &cls).unwrap();
        // one 2x2 block, lambda = 2 alpha = 2
        let y = hd.complement.column(0).into_owned();
        let lam = hd.lambda.eval(&y);
        assert!((lam.abs() - 2.0).abs() < 1e-9);
        let blocks = hd.dforms.blocks();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].size(), 2);
    }

    #[test]
    fn filiform_data_forms() {
        let l = 4;
        let g = catalog::filiform_extension(l, 1.0, 1.0);
        let nil = g.nilradical().unwrap();
        let (sub, _) = g.subalgebra(&nil).unwrap();
        let cls = classify_nilradical(&sub).unwrap();
        let fd = filiform_data(&g, &nil, &cls).unwrap();
        assert_eq!(fd.rank, 1);
        let r1 = fd.rank1.unwrap();
        assert!((r1.a - 1.0).abs() < 1e-9 && (r1.d - 1.0).abs() < 1e-9);
        // lambda(Y) = (l-2)a + d = 3; iota is the trace on the abelian ideal,
        // iota(Y) = (l-1)d + a(l-2)(l-1)/2 = (l-1)/2 * ((l-2)a + 2d) = 6,
        // positively proportional to the normalized criterion value 4.
        let y = fd.complement.column(0).into_owned();
        let flip = if fd.lambda.eval(&y) < 0.0 { -1.0 } else { 1.0 };
        assert!((flip * fd.lambda.eval(&y) - 3.0).abs() < 1e-9);
        assert!((flip * fd.iota.eval(&y) - 6.0).abs() < 1e-9);
        let normalized = 2.0 * flip * fd.iota.eval(&y) / (l as f64 - 1.0);
        assert!((normalized - 4.0).abs() < 1e-9);
        // t for l = 4, a = 3, d = -4 vanishes
        let g2 = catalog::filiform_extension(4, 3.0, -4.0);
        let nil2 = g2.nilradical().unwrap();
        let (sub2, _) = g2.subalgebra(&nil2).unwrap();
        let cls2 = classify_nilradical(&sub2).unwrap();
        let fd2 = filiform_data(&g2, &nil2, &cls2).unwrap();
        assert!(fd2.rank1.unwrap().t.abs() < 1e-9);
        // lambda and iota vanish on the nilradical
        for c in 0..nil.dim() {
            let x = nil.basis().column(c).into_owned();
            assert!(fd.lambda.eval(&x).abs() < 1e-9);
            assert!(fd.iota.eval(&x).abs() < 1e-9);
        }
    }

    #[test]
    fn filiform_rank2_reported() {
        let g = catalog::filiform_rank2_extension(4);
        let nil = g.nilradical().unwrap();
        assert_eq!(nil.dim(), 4);
        let (sub, _) = g.subalgebra(&nil).unwrap();
        let cls = classify_nilradical(&sub).unwrap();
        let fd = filiform_data(&g, &nil, &cls).unwrap();
        assert_eq!(fd.rank, 2);
        assert!(fd.rank1.is_none());
    }

    fn random_invertible(n: usize, rng: &mut StdRng) -> DMatrix<f64> {
        loop {
            let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            if m.determinant().abs() > 0.1 {
                return m;
            }
        }
    }
}
