//! Real simultaneous block-triangularization of a solvable family of
//! operators, following the real form of the Lie theorem: there is a basis in
//! which every member of the family is block-lower-triangular with diagonal
//! blocks of size 1 (a linear form `lambda_j`) or 2 (a rotation-form block
//! built from a pair of linear forms `(alpha_i, beta_i)`).
//!
//! Also provides the skew-avoiding basis rescaling: a diagonal scaling after
//! which no nonzero combination of the family is skew-symmetric.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::LinearForm;
use crate::linalg::{self, RANK_TOL};

#[derive(Debug, Error)]
pub enum TriangulateError {
    #[error("generators must be square matrices of equal size")]
    SizeMismatch,
    #[error("generators do not span a solvable matrix Lie algebra (derived series stabilizes at dimension {stuck})")]
    NotSolvableFamily { stuck: usize },
    #[error("no common eigenvector found at quotient dimension {at_dim}")]
    NoCommonEigenvector { at_dim: usize },
    #[error("triangularization verification failed: {0}")]
    VerificationFailed(String),
}

/// One diagonal block of the triangularized family, as linear forms on the
/// generator coordinate space.
#[derive(Debug, Clone)]
pub enum WeightBlock {
    /// 1x1 block with diagonal entry `lambda(g)`.
    Real { lambda: LinearForm },
    /// 2x2 block `[[alpha(g), beta(g)], [-beta(g), alpha(g)]]`.
    Pair { alpha: LinearForm, beta: LinearForm },
}

impl WeightBlock {
    pub fn size(&self) -> usize {
        match self {
            WeightBlock::Real { .. } => 1,
            WeightBlock::Pair { .. } => 2,
        }
    }
}

/// Result of the simultaneous block-triangularization.
#[derive(Debug, Clone)]
pub struct WeightData {
    basis_change: DMatrix<f64>,
    inverse_change: DMatrix<f64>,
    blocks: Vec<WeightBlock>,
    num_generators: usize,
    space_dim: usize,
    /// Set when a numerically borderline complex pair (`beta` identically
    /// ~0 across all generators) was resolved into two real blocks.
    borderline_pair_split: bool,
}

impl WeightData {
    pub fn basis_change(&self) -> &DMatrix<f64> {
        &self.basis_change
    }

    pub fn inverse_change(&self) -> &DMatrix<f64> {
        &self.inverse_change
    }

    pub fn blocks(&self) -> &[WeightBlock] {
        &self.blocks
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn borderline_pair_split(&self) -> bool {
        self.borderline_pair_split
    }

    /// Generator matrix expressed in the triangularizing basis.
    pub fn transform(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        &self.inverse_change * g * &self.basis_change
    }

    /// Block index (into `blocks`) and offset of each coordinate row.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            offsets.push(at);
            at += b.size();
        }
        offsets
    }
}

/// Eigenvalues of the family element at `y` (coordinates with respect to the
/// generator list), as linear evaluations of the stored weight forms.
/// Each entry is `(real part, imaginary part, multiplicity)`.
pub fn weights_of(data: &WeightData, y: &DVector<f64>) -> Vec<(f64, f64, usize)> {
    assert_eq!(y.len(), data.num_generators, "parameter vector length");
    let mut out = Vec::new();
    for block in &data.blocks {
        match block {
            WeightBlock::Real { lambda } => out.push((lambda.eval(y), 0.0, 1)),
            WeightBlock::Pair { alpha, beta } => {
                let (a, b) = (alpha.eval(y), beta.eval(y));
                out.push((a, b, 1));
                out.push((a, -b, 1));
            }
        }
    }
    out
}

/// Deterministic pseudo-random rational coefficients for the generic
/// combination (SplitMix64-driven, fixed seed; `salt` decorrelates the
/// combinations used at different search depths).
fn generic_coefficients(m: usize, salt: u64) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ salt.wrapping_mul(0xD129_0D3F_0F3F_0F3F);
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    (0..m)
        .map(|_| {
            let r = next();
            let num = 1 + (r % 997) as i64;
            let den = 64.0;
            num as f64 / den
        })
        .collect()
}

struct Stage {
    /// Columns of the new basis for this stage, in current coordinates:
    /// quotient part first, invariant subspace last.
    basis: DMatrix<f64>,
    blocks: Vec<WeightBlock>,
    borderline: bool,
}

/// Simultaneously block-lower-triangularize a solvable family of `k x k`
/// matrices. The returned weight forms live on the generator coordinate
/// space (length = number of generators).
pub fn real_block_triangularize(
    generators: &[DMatrix<f64>],
) -> Result<WeightData, TriangulateError> {
    if generators.is_empty() {
        return Err(TriangulateError::SizeMismatch);
    }
    let k = generators[0].nrows();
    if generators.iter().any(|g| g.nrows() != k || g.ncols() != k) {
        return Err(TriangulateError::SizeMismatch);
    }
    check_solvable_family(generators, k)?;
    let m = generators.len();
    let scale = generators.iter().map(|g| g.norm()).fold(0.0, f64::max).max(1.0);
    let stage = triangularize_stage(generators.to_vec())?;
    let basis = stage.basis;
    let inverse = basis
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| TriangulateError::VerificationFailed("singular basis change".into()))?;
    let data = WeightData {
        basis_change: basis,
        inverse_change: inverse,
        blocks: stage.blocks,
        num_generators: m,
        space_dim: k,
        borderline_pair_split: stage.borderline,
    };
    verify(&data, generators, scale)?;
    Ok(data)
}

/// Lie-closure of the span followed by a derived-series rank test.
fn check_solvable_family(generators: &[DMatrix<f64>], k: usize) -> Result<(), TriangulateError> {
    let vecize = |m: &DMatrix<f64>| DVector::from_column_slice(m.as_slice());
    // Orthonormal basis of the current span, as vectorized matrices.
    let mut span: Vec<DMatrix<f64>> = Vec::new();
    let add = |span: &mut Vec<DMatrix<f64>>, cand: &DMatrix<f64>| -> bool {
        let mut v = vecize(cand);
        for b in span.iter() {
            let bv = vecize(b);
            let dot = bv.dot(&v);
            v -= bv * dot;
        }
        let n = v.norm();
        if n > 1e-10 * (1.0 + cand.norm()) {
            span.push(DMatrix::from_column_slice(k, k, (v / n).as_slice()));
            true
        } else {
            false
        }
    };
    for g in generators {
        add(&mut span, g);
    }
    // Close under brackets.
    for _ in 0..(2 * k * k + 2) {
        let mut grew = false;
        let snapshot = span.clone();
        for a in &snapshot {
            for b in &snapshot {
                let br = a * b - b * a;
                if br.norm() > 1e-12 && add(&mut span, &br) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    // Derived series of the closed algebra by rank of vectorized brackets.
    let mut current = span;
    for _ in 0..(2 * k + 2) {
        if current.is_empty() {
            return Ok(());
        }
        let mut next: Vec<DMatrix<f64>> = Vec::new();
        for a in &current {
            for b in &current {
                let br = a * b - b * a;
                if br.norm() > 1e-12 {
                    add(&mut next, &br);
                }
            }
        }
        if next.len() >= current.len() {
            return Err(TriangulateError::NotSolvableFamily { stuck: next.len() });
        }
        current = next;
    }
    if current.is_empty() {
        Ok(())
    } else {
        Err(TriangulateError::NotSolvableFamily { stuck: current.len() })
    }
}

fn triangularize_stage(gens: Vec<DMatrix<f64>>) -> Result<Stage, TriangulateError> {
    let k = gens[0].nrows();
    if k == 0 {
        return Ok(Stage { basis: DMatrix::identity(0, 0), blocks: Vec::new(), borderline: false });
    }
    // Strict tolerances first: exactly structured families then yield exact
    // eigenvectors, keeping roundoff out of the quotient chain. The loose
    // pass is the fallback for genuinely fuzzy data.
    let eye = DMatrix::identity(k, k);
    let (u, block, borderline_here) = [(1e-11, 1e-12), (1e-8, 1e-9)]
        .iter()
        .find_map(|&(resid_tol, kernel_tol)| {
            let mut fuel = 40 * (k + 1);
            common_eigenvector_in(&gens, &eye, resid_tol, kernel_tol, 0, &mut fuel)
        })
        .ok_or(TriangulateError::NoCommonEigenvector { at_dim: k })?;
    let s = u.ncols();
    // New basis: orthonormal complement of the invariant subspace first,
    // then the invariant vectors. In that basis every generator is
    // [[quotient, 0], [*, restriction]].
    let comp = linalg::orthogonal_complement(&u, RANK_TOL);
    let mut step = DMatrix::zeros(k, k);
    step.view_mut((0, 0), (k, comp.ncols())).copy_from(&comp);
    step.view_mut((0, comp.ncols()), (k, s)).copy_from(&u);
    let step_inv = step
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| TriangulateError::VerificationFailed("singular stage basis".into()))?;
    let q = k - s;
    let quotient: Vec<DMatrix<f64>> = gens
        .iter()
        .map(|g| (&step_inv * g * &step).view((0, 0), (q, q)).into_owned())
        .collect();
    let sub = triangularize_stage(quotient)?;
    // Assemble: columns [comp * sub_basis | u].
    let mut basis = DMatrix::zeros(k, k);
    let lifted = &comp * &sub.basis;
    basis.view_mut((0, 0), (k, q)).copy_from(&lifted);
    basis.view_mut((0, q), (k, s)).copy_from(&u);
    let mut blocks = sub.blocks;
    blocks.extend(block);
    Ok(Stage { basis, blocks, borderline: sub.borderline || borderline_here })
}

/// Search for a common eigenvector (or invariant 2-plane) of the family
/// inside the subspace spanned by the orthonormal columns of `basis`.
///
/// Candidates come from the eigenvalues of a generic combination of the
/// compressed family (cluster means first, then raw values); every candidate
/// is validated against the full, uncompressed generators by the residual
/// filter. When the kernel at a candidate is multi-dimensional and no basis
/// vector of it passes, the search recurses into that kernel with fresh
/// generic coefficients, since a common eigenvector may sit in a proper
/// sub-direction the singular vectors mix away.
fn common_eigenvector_in(
    gens: &[DMatrix<f64>],
    basis: &DMatrix<f64>,
    resid_tol: f64,
    kernel_tol: f64,
    depth: u64,
    fuel: &mut usize,
) -> Option<(DMatrix<f64>, Vec<WeightBlock>, bool)> {
    let k = gens[0].nrows();
    let r = basis.ncols();
    if r == 0 || *fuel == 0 {
        return None;
    }
    *fuel -= 1;
    let m = gens.len();
    let scale = gens.iter().map(|g| g.norm()).fold(0.0, f64::max).max(1.0);
    let compressed: Vec<DMatrix<f64>> =
        gens.iter().map(|g| basis.transpose() * g * basis).collect();
    let coeffs = generic_coefficients(m, depth);
    let mut generic = DMatrix::zeros(r, r);
    for (c, g) in coeffs.iter().zip(compressed.iter()) {
        generic += g * *c;
    }
    let im_tol = 1e-8 * (1.0 + generic.norm());
    // Eigenvalues of a defective matrix are only accurate to roughly
    // eps^(1/multiplicity) — up to ~1e-3 for high multiplicities — so a
    // single clustering tolerance cannot serve all cases. Build candidate
    // shifts from cluster means over a ladder of tolerances (means of full
    // clusters are trace-accurate), then append the raw eigenvalues; the
    // per-generator residual filter arbitrates every candidate, so a wrong
    // merge only costs a rejected attempt.
    let eigs = linalg::sorted_complex_eigenvalues(&generic);
    let push_candidate = |list: &mut Vec<(f64, f64)>, re: f64, im: f64| {
        let im = if im.abs() <= im_tol { 0.0 } else { im.abs() };
        let dup = list
            .iter()
            .any(|&(rr, ii)| ((rr - re).powi(2) + (ii - im).powi(2)).sqrt() < 1e-10 * (1.0 + scale));
        if !dup {
            list.push((re, im));
        }
    };
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for rel_tol in [1e-5, 1e-3, 3e-2] {
        let cluster_tol = rel_tol * (1.0 + generic.norm());
        let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
        for e in &eigs {
            match clusters.iter_mut().find(|(re, im, c)| {
                let (mre, mim) = (*re / *c as f64, *im / *c as f64);
                ((mre - e.re).powi(2) + (mim - e.im).powi(2)).sqrt() < cluster_tol
            }) {
                Some((re, im, c)) => {
                    *re += e.re;
                    *im += e.im;
                    *c += 1;
                }
                None => clusters.push((e.re, e.im, 1)),
            }
        }
        let mut means: Vec<(f64, f64)> = Vec::new();
        for (sre, sim, c) in &clusters {
            push_candidate(&mut means, sre / *c as f64, sim / *c as f64);
        }
        means.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for c in means {
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for e in &eigs {
        push_candidate(&mut raw, e.re, e.im);
    }
    raw.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    for c in raw {
        if !candidates.contains(&c) {
            candidates.push(c);
        }
    }
    for (re, im) in candidates {
        let is_complex = im > im_tol;
        let kernel_vecs = linalg::complex_kernel_vectors(
            &generic,
            re,
            if is_complex { im } else { 0.0 },
            kernel_tol,
        );
        for (wx, wy) in kernel_vecs.iter().take(8) {
            // Sharpening by regularized inverse iteration helps when the SVD
            // kernel is polluted by a defective cluster (accuracy only
            // eps^(1/multiplicity)), but the regularized solve itself can be
            // arbitrarily ill-conditioned on exactly defective input, so the
            // refined and the raw vector are both offered to the filter.
            let refined = refine_kernel_vector(&generic, re, if is_complex { im } else { 0.0 }, wx, wy);
            for (cx, cy) in [&refined, &(wx.clone(), wy.clone())] {
                let x = basis * cx;
                let y = basis * cy;
                if let Some(found) = try_candidate(gens, &x, &y, is_complex, resid_tol, scale, m, k) {
                    return Some(found);
                }
            }
        }
        // A common direction may hide inside a multi-dimensional kernel:
        // recurse into its span with fresh coefficients.
        if kernel_vecs.len() >= 2 {
            let mut span = DMatrix::zeros(k, 2 * kernel_vecs.len());
            let mut at = 0;
            for (wx, wy) in &kernel_vecs {
                span.set_column(at, &(basis * wx));
                at += 1;
                if wy.norm() > 0.0 {
                    span.set_column(at, &(basis * wy));
                    at += 1;
                }
            }
            let sub_basis = linalg::column_space_scaled(&span.columns(0, at).into_owned(), RANK_TOL, 1.0);
            if sub_basis.ncols() > 0 && sub_basis.ncols() < r {
                if let Some(found) = common_eigenvector_in(
                    gens,
                    &sub_basis,
                    resid_tol,
                    kernel_tol,
                    depth + 1,
                    fuel,
                ) {
                    return Some(found);
                }
            }
            if *fuel == 0 {
                return None;
            }
        }
    }
    None
}

/// Two rounds of regularized inverse iteration for the eigenvector of
/// `generic` at the (complex) shift `re + i im`, on the realified system.
fn refine_kernel_vector(
    generic: &DMatrix<f64>,
    re: f64,
    im: f64,
    wx: &DVector<f64>,
    wy: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let r = generic.nrows();
    let delta = 1e-12 * (1.0 + generic.norm());
    let mut big = DMatrix::zeros(2 * r, 2 * r);
    let mut shifted = generic.clone();
    for i in 0..r {
        shifted[(i, i)] += delta - re;
    }
    big.view_mut((0, 0), (r, r)).copy_from(&shifted);
    big.view_mut((r, r), (r, r)).copy_from(&shifted);
    for i in 0..r {
        big[(i, r + i)] = im;
        big[(r + i, i)] = -im;
    }
    let lu = big.lu();
    let mut x = wx.clone();
    let mut y = wy.clone();
    for _ in 0..2 {
        let mut rhs = DVector::zeros(2 * r);
        for i in 0..r {
            rhs[i] = x[i];
            rhs[r + i] = y[i];
        }
        let Some(sol) = lu.solve(&rhs) else {
            return (x, y);
        };
        let nx = DVector::from_fn(r, |i, _| sol[i]);
        let ny = DVector::from_fn(r, |i, _| sol[r + i]);
        let norm = (nx.norm_squared() + ny.norm_squared()).sqrt();
        if !(norm.is_finite() && norm > 1e-280) {
            return (x, y);
        }
        x = nx / norm;
        y = ny / norm;
    }
    crate::linalg::normalize_phase(x, y)
}

/// Validate one candidate (real when `y` vanishes, complex otherwise)
/// against every generator; returns the invariant columns and blocks.
#[allow(clippy::too_many_arguments)]
fn try_candidate(
    gens: &[DMatrix<f64>],
    x: &DVector<f64>,
    y: &DVector<f64>,
    is_complex: bool,
    resid_tol: f64,
    scale: f64,
    m: usize,
    k: usize,
) -> Option<(DMatrix<f64>, Vec<WeightBlock>, bool)> {
    if !is_complex {
        let norm = x.norm();
        if norm < 1e-12 {
            return None;
        }
        let mut v = x / norm;
        // deterministic orientation: largest-magnitude entry positive
        let mut lead = 0usize;
        for i in 0..k {
            if v[i].abs() > v[lead].abs() {
                lead = i;
            }
        }
        if v[lead] < 0.0 {
            v = -v;
        }
        let mut lams = DVector::zeros(m);
        for (gi, g) in gens.iter().enumerate() {
            let gv = g * &v;
            let lam = v.dot(&gv);
            if (&gv - &v * lam).norm() > resid_tol * (1.0 + g.norm()) {
                return None;
            }
            lams[gi] = lam;
        }
        let u = DMatrix::from_column_slice(k, 1, v.as_slice());
        return Some((u, vec![WeightBlock::Real { lambda: LinearForm::new(lams) }], false));
    }
    // complex candidate v = x + i y, phase-normalized for determinism
    let (x, y) = linalg::normalize_phase(x.clone(), y.clone());
    let nrm = (x.norm_squared() + y.norm_squared()).sqrt();
    if nrm < 1e-12 || y.norm() < 1e-12 {
        return None;
    }
    let mut alphas = DVector::zeros(m);
    let mut betas = DVector::zeros(m);
    for (gi, g) in gens.iter().enumerate() {
        // Rayleigh quotient w = v* G v for unit v = x + iy:
        // v* G v = [x^T G x + y^T G y] + i [x^T G y - y^T G x]
        let gx = g * &x;
        let gy = g * &y;
        let a = x.dot(&gx) + y.dot(&gy);
        let b = x.dot(&gy) - y.dot(&gx);
        let rx = &gx - (&x * a - &y * b);
        let ry = &gy - (&y * a + &x * b);
        if (rx.norm_squared() + ry.norm_squared()).sqrt() > resid_tol * (1.0 + g.norm()) {
            return None;
        }
        alphas[gi] = a;
        betas[gi] = b;
    }
    let beta_max = betas.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if beta_max <= 1e-8 * (1.0 + scale) {
        // Borderline pair: the whole family acts as a scalar on the 2-plane;
        // resolve into two real blocks and flag it.
        let mut u = DMatrix::zeros(k, 2);
        let xn = x.clone() / x.norm();
        let mut yn = y.clone() - &xn * xn.dot(&y);
        let ynorm = yn.norm();
        if ynorm < 1e-10 {
            return None;
        }
        yn /= ynorm;
        u.set_column(0, &xn);
        u.set_column(1, &yn);
        let lam = LinearForm::new(alphas);
        return Some((
            u,
            vec![
                WeightBlock::Real { lambda: lam.clone() },
                WeightBlock::Real { lambda: lam },
            ],
            true,
        ));
    }
    let mut u = DMatrix::zeros(k, 2);
    u.set_column(0, &x);
    u.set_column(1, &y);
    Some((
        u,
        vec![WeightBlock::Pair {
            alpha: LinearForm::new(alphas),
            beta: LinearForm::new(betas),
        }],
        false,
    ))
}

/// Check the block-lower-triangular pattern and the trace identity.
fn verify(data: &WeightData, generators: &[DMatrix<f64>], scale: f64) -> Result<(), TriangulateError> {
    let offsets = data.block_offsets();
    for (gi, g) in generators.iter().enumerate() {
        let t = data.transform(g);
        let mut y = DVector::zeros(data.num_generators);
        y[gi] = 1.0;
        let mut worst = 0.0_f64;
        for (bi, block) in data.blocks.iter().enumerate() {
            let at = offsets[bi];
            match block {
                WeightBlock::Real { lambda } => {
                    worst = worst.max((t[(at, at)] - lambda.eval(&y)).abs());
                }
                WeightBlock::Pair { alpha, beta } => {
                    let (a, b) = (alpha.eval(&y), beta.eval(&y));
                    worst = worst.max((t[(at, at)] - a).abs());
                    worst = worst.max((t[(at + 1, at + 1)] - a).abs());
                    worst = worst.max((t[(at, at + 1)] - b).abs());
                    worst = worst.max((t[(at + 1, at)] + b).abs());
                }
            }
            // everything above the block row range must vanish
            for r in 0..at {
                for c in at..(at + block.size()) {
                    worst = worst.max(t[(r, c)].abs());
                }
            }
        }
        if worst > 1e-8 * scale {
            return Err(TriangulateError::VerificationFailed(format!(
                "off-pattern residual {worst:.3e} for generator {gi}"
            )));
        }
        let trace_weights: f64 = weights_of(data, &y).iter().map(|(re, _, mult)| re * *mult as f64).sum();
        if (trace_weights - g.trace()).abs() > 1e-8 * scale * (data.space_dim as f64).max(1.0) {
            return Err(TriangulateError::VerificationFailed(format!(
                "trace identity violated for generator {gi}"
            )));
        }
    }
    Ok(())
}

/// Diagonal rescaling of the triangularized basis after which no nonzero
/// element of the family span is skew-symmetric. Entry 2 on the first member
/// of each 2x2 pair, 1 elsewhere; verified by the rank of the symmetrization
/// map, with a fallback over distinct prime scalings.
pub fn skew_avoiding_scaling(
    data: &WeightData,
    generators: &[DMatrix<f64>],
) -> Result<DMatrix<f64>, TriangulateError> {
    let k = data.space_dim;
    let span_rank = {
        let mut stacked = DMatrix::zeros(generators.len(), k * k);
        for (r, g) in generators.iter().enumerate() {
            for (c, val) in g.as_slice().iter().enumerate() {
                stacked[(r, c)] = *val;
            }
        }
        linalg::rank(&stacked, RANK_TOL)
    };
    let transformed: Vec<DMatrix<f64>> = generators.iter().map(|g| data.transform(g)).collect();
    let offsets = data.block_offsets();

    let mut candidates: Vec<DVector<f64>> = Vec::new();
    // factor 2 on the first member of each pair
    let mut pair_scaling = DVector::from_element(k, 1.0);
    for (bi, block) in data.blocks.iter().enumerate() {
        if block.size() == 2 {
            pair_scaling[offsets[bi]] = 2.0;
        }
    }
    candidates.push(pair_scaling);
    // fallback: distinct primes on every basis vector
    const PRIMES: [f64; 16] =
        [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0];
    let mut prime_scaling = DVector::from_element(k, 1.0);
    for i in 0..k {
        prime_scaling[i] = PRIMES[i % PRIMES.len()] * (1.0 + (i / PRIMES.len()) as f64);
    }
    candidates.push(prime_scaling.clone());
    // squared primes as a last resort
    candidates.push(prime_scaling.map(|p| p * p));

    for d in candidates {
        let mut stacked = DMatrix::zeros(transformed.len(), k * k);
        for (r, t) in transformed.iter().enumerate() {
            let mut rescaled = t.clone();
            for i in 0..k {
                for j in 0..k {
                    rescaled[(i, j)] = t[(i, j)] * d[j] / d[i];
                }
            }
            let sym = &rescaled + rescaled.transpose();
            for (c, val) in sym.as_slice().iter().enumerate() {
                stacked[(r, c)] = *val;
            }
        }
        if linalg::rank(&stacked, RANK_TOL) == span_rank {
            return Ok(DMatrix::from_diagonal(&d));
        }
    }
    Err(TriangulateError::VerificationFailed(
        "no diagonal rescaling avoided skew-symmetric combinations".into(),
    ))
}
