//! The GL(n) change-of-basis action on brackets, one-parameter degenerations
//! `s -> exp(sN)` with limit detection, and the pullback search that turns a
//! metric of negative Ricci curvature on a degeneration into a certificate
//! for the original algebra.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{AlgebraError, BracketTerm, LieAlgebra};
use crate::construct::{certificate_for, Certificate, Presentation, Provenance};
use crate::ricci::{self, InnerProduct, MetricLieAlgebra, RicciError};

#[derive(Debug, Error)]
pub enum DegenerateError {
    #[error("transform is singular or too ill-conditioned")]
    Singular,
    #[error("structure constant ({i}, {j}, {k}) diverges along the degeneration")]
    Diverging { i: usize, j: usize, k: usize },
    #[error("structure constant ({i}, {j}, {k}) neither stabilizes nor dies within the schedule")]
    NotConverged { i: usize, j: usize, k: usize },
    #[error("limit bracket violates the Jacobi identity: defect {0:.3e}")]
    LimitNotLie(f64),
    #[error("pullback budget exhausted at s_max = {s_max}: {note}")]
    BudgetExhausted { s_max: usize, note: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ricci(#[from] RicciError),
}

/// One-parameter subgroup `s -> exp(s N)`.
#[derive(Debug, Clone)]
pub struct OneParamGroup {
    pub generator: DMatrix<f64>,
    pub description: String,
}

impl OneParamGroup {
    pub fn new(generator: DMatrix<f64>, description: impl Into<String>) -> Self {
        Self { generator, description: description.into() }
    }

    /// The diagonal when the generator is numerically diagonal.
    pub fn diagonal(&self) -> Option<DVector<f64>> {
        let n = self.generator.nrows();
        let scale = 1.0 + self.generator.norm();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.generator[(i, j)].abs() > 1e-12 * scale {
                    return None;
                }
            }
        }
        Some(DVector::from_fn(n, |i, _| self.generator[(i, i)]))
    }
}

/// Change of basis: `(T.mu)(x, y) = T^{-1} mu(Tx, Ty)`. The result is an
/// isomorphic algebra.
pub fn act(t: &DMatrix<f64>, alg: &LieAlgebra) -> Result<LieAlgebra, DegenerateError> {
    let n = alg.dim();
    assert_eq!(t.nrows(), n, "transform dimension");
    let t_inv = t.clone().lu().try_inverse().ok_or(DegenerateError::Singular)?;
    if t.norm() * t_inv.norm() > 1e14 {
        return Err(DegenerateError::Singular);
    }
    let mut terms = Vec::new();
    let mut max_c = 0.0_f64;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        cols.push(t.column(i).into_owned());
    }
    let mut raw = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = alg.bracket(&cols[i], &cols[j])?;
            let c = &t_inv * w;
            for k in 0..n {
                if c[k] != 0.0 {
                    max_c = max_c.max(c[k].abs());
                    raw.push((i, j, k, c[k]));
                }
            }
        }
    }
    for (i, j, k, c) in raw {
        if c.abs() > 1e-16 * max_c {
            terms.push(BracketTerm { i, j, k, c });
        }
    }
    Ok(LieAlgebra::new(n, terms)?)
}

/// Diagonal change of basis in log scale: the transform is
/// `T = diag(exp(ls_1), ..., exp(ls_n))` and each structure constant picks up
/// the factor `exp(ls_i + ls_j - ls_k)`, computed without materializing the
/// exponentials (safe for very large scalings).
pub fn act_diagonal_log(log_scale: &DVector<f64>, alg: &LieAlgebra) -> Result<LieAlgebra, DegenerateError> {
    let n = alg.dim();
    assert_eq!(log_scale.len(), n);
    let mut terms = Vec::new();
    for t in alg.terms() {
        let gamma = log_scale[t.i] + log_scale[t.j] - log_scale[t.k];
        if gamma > 700.0 {
            return Err(DegenerateError::Diverging { i: t.i, j: t.j, k: t.k });
        }
        let c = t.c * gamma.exp();
        if c.abs() > 1e-300 {
            terms.push(BracketTerm { i: t.i, j: t.j, k: t.k, c });
        }
    }
    Ok(LieAlgebra::new(n, terms)?)
}

/// Apply the factored transform `T = basis * diag(exp(log_scale))`.
pub fn act_factored(
    alg: &LieAlgebra,
    basis: &DMatrix<f64>,
    log_scale: &DVector<f64>,
) -> Result<LieAlgebra, DegenerateError> {
    let a1 = act(basis, alg)?;
    act_diagonal_log(log_scale, &a1)
}

/// Thresholds of the limit detection sweep (geometric schedule
/// `s = 1, 2, 4, ...`): per doubling, a constant is dying when it decays by
/// at least `decay_factor`, stable when its relative change is below
/// `stable_rel`, diverging when it grows by at least `decay_factor`.
#[derive(Debug, Clone, Copy)]
pub struct LimitSchedule {
    pub max_doublings: u32,
    pub decay_factor: f64,
    pub stable_rel: f64,
    pub floor: f64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self { max_doublings: 48, decay_factor: 10.0, stable_rel: 1e-12, floor: 1e-13 }
    }
}

/// A computed limit bracket with the record of which constants survived.
#[derive(Debug, Clone)]
pub struct LimitOutcome {
    pub algebra: LieAlgebra,
    pub survivors: Vec<(usize, usize, usize)>,
    pub killed: Vec<(usize, usize, usize)>,
}

/// Limit of `act(exp(sN), alg)` as `s -> infinity`, with sub-threshold
/// constants zeroed. Errors when a constant grows without bound or fails to
/// settle within the schedule.
pub fn limit(
    alg: &LieAlgebra,
    grp: &OneParamGroup,
    schedule: LimitSchedule,
) -> Result<LimitOutcome, DegenerateError> {
    // Constants below the schedule floor are roundoff, not data; keep them
    // out of the divergence classification.
    let floor = schedule.floor * (1.0 + alg.scale());
    let pruned = LieAlgebra::new(
        alg.dim(),
        alg.terms().iter().filter(|t| t.c.abs() > floor).cloned().collect(),
    )?;
    let alg = &pruned;
    let outcome = if let Some(d) = grp.diagonal() {
        limit_diagonal(alg, &d, schedule)?
    } else if let Some((p, d, p_inv)) = real_diagonalize(&grp.generator) {
        // exp(sN) = P exp(sD) P^{-1}, so the limit is the diagonal limit
        // conjugated by the fixed eigenbasis.
        let in_eigen = act(&p, alg)?;
        let lim = limit_diagonal(&in_eigen, &d, schedule)?;
        let back = act(&p_inv, &lim.algebra)?;
        let survivors = back.terms().iter().map(|t| (t.i, t.j, t.k)).collect();
        let killed = alg
            .terms()
            .iter()
            .map(|t| (t.i, t.j, t.k))
            .filter(|k| !back.terms().iter().any(|t| (t.i, t.j, t.k) == *k))
            .collect();
        LimitOutcome { algebra: back, survivors, killed }
    } else {
        limit_numeric(alg, &grp.generator, schedule)?
    };
    let scale = 1.0 + outcome.algebra.scale();
    let defect = outcome.algebra.jacobi_defect();
    if defect > 1e-10 * scale * scale {
        return Err(DegenerateError::LimitNotLie(defect));
    }
    Ok(outcome)
}

/// Diagonal generators: each constant evolves as `c * exp(s * gamma)` with
/// `gamma = d_i + d_j - d_k`, so the geometric sweep classifies exactly by
/// the sign of `gamma`: decay by >= `decay_factor` per doubling eventually
/// happens for every `gamma < 0` within the schedule cap, growth for every
/// `gamma > 0`, and `gamma ~ 0` is stable.
fn limit_diagonal(
    alg: &LieAlgebra,
    d: &DVector<f64>,
    schedule: LimitSchedule,
) -> Result<LimitOutcome, DegenerateError> {
    let dmax = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
    // A gamma is indistinguishable from zero when even the final sweep value
    // s_final * |gamma| stays below the stability threshold.
    let s_final = 2.0_f64.powi(schedule.max_doublings as i32);
    let mut terms = Vec::new();
    let mut survivors = Vec::new();
    let mut killed = Vec::new();
    for t in alg.terms() {
        let gamma = d[t.i] + d[t.j] - d[t.k];
        if (gamma.abs() * s_final) <= schedule.stable_rel * (1.0 + dmax) {
            terms.push(*t);
            survivors.push((t.i, t.j, t.k));
        } else if gamma < 0.0 {
            killed.push((t.i, t.j, t.k));
        } else {
            return Err(DegenerateError::Diverging { i: t.i, j: t.j, k: t.k });
        }
    }
    Ok(LimitOutcome { algebra: LieAlgebra::new(alg.dim(), terms)?, survivors, killed })
}

/// Eigendecomposition `N = P diag(d) P^{-1}` when `N` is real-diagonalizable
/// with a reasonably conditioned eigenbasis.
fn real_diagonalize(n_gen: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let k = n_gen.nrows();
    let scale = 1.0 + n_gen.norm();
    let tol = 1e-9 * scale;
    let eigs = crate::linalg::sorted_complex_eigenvalues(n_gen);
    if eigs.iter().any(|e| e.im.abs() > tol) {
        return None;
    }
    // cluster the (real) eigenvalues
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for e in &eigs {
        match clusters.iter_mut().find(|(m, c)| (*m / *c as f64 - e.re).abs() < 1e-7 * scale) {
            Some((m, c)) => {
                *m += e.re;
                *c += 1;
            }
            None => clusters.push((e.re, 1)),
        }
    }
    let mut p = DMatrix::zeros(k, k);
    let mut d = DVector::zeros(k);
    let mut at = 0;
    for (sum, count) in &clusters {
        let lam = sum / *count as f64;
        let vecs = crate::linalg::complex_kernel_vectors(n_gen, lam, 0.0, 1e-9);
        if vecs.len() < *count {
            return None; // defective
        }
        for (x, _) in vecs.iter().take(*count) {
            p.set_column(at, x);
            d[at] = lam;
            at += 1;
        }
    }
    if at != k {
        return None;
    }
    let p_inv = p.clone().lu().try_inverse()?;
    if p.norm() * p_inv.norm() > 1e8 {
        return None;
    }
    // confirm the factorization
    if (&p * DMatrix::from_diagonal(&d) * &p_inv - n_gen).norm() > 1e-8 * scale {
        return None;
    }
    Some((p, d, p_inv))
}

fn limit_numeric(
    alg: &LieAlgebra,
    n_gen: &DMatrix<f64>,
    schedule: LimitSchedule,
) -> Result<LimitOutcome, DegenerateError> {
    use std::collections::BTreeMap;
    let scale = 1.0 + alg.scale();
    let key_of = |t: &BracketTerm| (t.i, t.j, t.k);
    let to_map = |a: &LieAlgebra| -> BTreeMap<(usize, usize, usize), f64> {
        a.terms().iter().map(|t| (key_of(t), t.c)).collect()
    };
    let mut prev = to_map(&act(&n_gen.clone().exp(), alg)?);
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Undecided,
        Dying,
        Stable(f64),
    }
    let mut states: BTreeMap<(usize, usize, usize), State> = BTreeMap::new();
    let mut all_keys: Vec<(usize, usize, usize)> = alg.terms().iter().map(key_of).collect();
    for k in prev.keys() {
        if !all_keys.contains(k) {
            all_keys.push(*k);
        }
    }
    let mut s = 1.0_f64;
    for _ in 0..schedule.max_doublings {
        s *= 2.0;
        let tmat = (n_gen * s).exp();
        if !tmat.iter().all(|x| x.is_finite()) {
            break;
        }
        let cur_alg = match act(&tmat, alg) {
            Ok(a) => a,
            Err(DegenerateError::Singular) => break,
            Err(e) => return Err(e),
        };
        let cur = to_map(&cur_alg);
        let mut undecided = false;
        for key in &all_keys {
            // A constant that fell below the floor is noise from there on;
            // keep it classified as dying (sticky) so that exponentially
            // amplified roundoff cannot masquerade as divergence.
            if states.get(key) == Some(&State::Dying) {
                continue;
            }
            let old = prev.get(key).cloned().unwrap_or(0.0);
            let new = cur.get(key).cloned().unwrap_or(0.0);
            let state = if (new - old).abs() <= schedule.stable_rel * (1.0 + new.abs()) {
                State::Stable(new)
            } else if new.abs() <= old.abs() / schedule.decay_factor
                || new.abs() <= schedule.floor * scale
            {
                State::Dying
            } else if new.abs() >= old.abs() * schedule.decay_factor && new.abs() > scale * 1e6 {
                return Err(DegenerateError::Diverging { i: key.0, j: key.1, k: key.2 });
            } else {
                undecided = true;
                State::Undecided
            };
            states.insert(*key, state);
        }
        prev = cur;
        if !undecided {
            break;
        }
    }
    let mut terms = Vec::new();
    let mut survivors = Vec::new();
    let mut killed = Vec::new();
    for key in &all_keys {
        match states.get(key).cloned().unwrap_or(State::Undecided) {
            State::Stable(c) => {
                if c.abs() > schedule.floor * scale {
                    terms.push(BracketTerm { i: key.0, j: key.1, k: key.2, c });
                    survivors.push(*key);
                } else {
                    killed.push(*key);
                }
            }
            State::Dying => killed.push(*key),
            State::Undecided => {
                return Err(DegenerateError::NotConverged { i: key.0, j: key.1, k: key.2 })
            }
        }
    }
    Ok(LimitOutcome { algebra: LieAlgebra::new(alg.dim(), terms)?, survivors, killed })
}

/// Search `s = 0, 1, ..., s_max` for a parameter at which the inner product
/// found on the limit certifies negative Ricci curvature on `act(exp(sN), alg)`.
///
/// On success, returns the certificate (its presentation records the
/// transform in factored form) together with an inner product: the
/// pulled-back metric `T^{-T} Q T^{-1}` on the original algebra when it is
/// well-conditioned enough to be verified directly, otherwise the certifying
/// metric on the transformed presentation.
pub fn pullback_metric_search(
    alg: &LieAlgebra,
    grp: &OneParamGroup,
    metric_on_limit: &InnerProduct,
    s_max: usize,
) -> Result<(InnerProduct, Certificate), DegenerateError> {
    let n = alg.dim();
    let diag = grp.diagonal();
    let base_scale = 1.0 + alg.scale();
    for s in 0..=s_max {
        let (alg_s, presentation) = match &diag {
            Some(d) => {
                let ls = d * s as f64;
                let a = act_diagonal_log(&ls, alg)?;
                if a.scale() > 1e12 * base_scale {
                    return Err(DegenerateError::BudgetExhausted {
                        s_max: s,
                        note: "transformed constants exceeded the conditioning bound".into(),
                    });
                }
                (a, Presentation::Transformed { basis: DMatrix::identity(n, n), log_scale: ls })
            }
            None => {
                let t = (&grp.generator * s as f64).exp();
                if !t.iter().all(|x| x.is_finite()) {
                    return Err(DegenerateError::BudgetExhausted {
                        s_max: s,
                        note: "transform overflowed before certification".into(),
                    });
                }
                (act(&t, alg)?, Presentation::Transformed { basis: t, log_scale: DVector::zeros(n) })
            }
        };
        let m = MetricLieAlgebra::new(alg_s.clone(), metric_on_limit.clone())?;
        let ric = m.ricci_operator()?;
        if ricci::definiteness(&ric, ricci::default_definiteness_tol(&ric))
            == ricci::Definiteness::NegativeDefinite
        {
            let cert = certificate_for(
                alg,
                presentation.clone(),
                metric_on_limit.clone(),
                Provenance::Pullback { s },
            )
            .map_err(|e| DegenerateError::BudgetExhausted {
                s_max: s,
                note: format!("certificate verification failed: {e}"),
            })?;
            // Try to materialize the pulled-back metric on the original algebra.
            let pulled = pulled_metric(alg, &presentation, metric_on_limit);
            let metric = pulled.unwrap_or_else(|| cert.metric.clone());
            return Ok((metric, cert));
        }
    }
    Err(DegenerateError::BudgetExhausted {
        s_max,
        note: "no parameter certified negative Ricci curvature".into(),
    })
}

/// `T^{-T} Q T^{-1}` when it is positive definite and its Ricci operator on
/// the original algebra is verifiably negative definite.
fn pulled_metric(
    alg: &LieAlgebra,
    presentation: &Presentation,
    q: &InnerProduct,
) -> Option<InnerProduct> {
    let Presentation::Transformed { basis, log_scale } = presentation else {
        return None;
    };
    if log_scale.iter().any(|x| x.abs() > 150.0) {
        return None;
    }
    let b_inv = basis.clone().lu().try_inverse()?;
    let d_inv = DMatrix::from_diagonal(&log_scale.map(|x| (-x).exp()));
    let t_inv = &d_inv * &b_inv;
    let q_orig = t_inv.transpose() * q.gram() * &t_inv;
    let metric = InnerProduct::new(q_orig).ok()?;
    let m = MetricLieAlgebra::new(alg.clone(), metric.clone()).ok()?;
    let ric = m.ricci_operator().ok()?;
    if ricci::definiteness(&ric, ricci::default_definiteness_tol(&ric))
        == ricci::Definiteness::NegativeDefinite
    {
        Some(metric)
    } else {
        None
    }
}
