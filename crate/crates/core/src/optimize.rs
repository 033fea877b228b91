//! Derivative-free minimization of the largest Ricci eigenvalue over the
//! space of inner products, parameterized by a log-Cholesky factor with unit
//! determinant. A fallback and cross-check for the decision procedures:
//! certification succeeds only through the verified certificate pathway;
//! failure to certify proves nothing.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::LieAlgebra;
use crate::construct::{certificate_for, Certificate, Presentation, Provenance};
use crate::linalg;
use crate::ricci::{InnerProduct, MetricLieAlgebra};

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Total objective-evaluation budget across all restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Initial simplex step in log-Cholesky coordinates.
    pub init_step: f64,
    /// Log-space magnitude of the restart perturbations.
    pub restart_spread: f64,
    /// Certification threshold on the best objective.
    pub certify_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            budget: 20_000,
            restarts: 16,
            seed: 0,
            init_step: 0.1,
            restart_spread: 0.5,
            certify_tol: 1e-9,
        }
    }
}

/// Result of the metric search.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub metric: InnerProduct,
    pub best_objective: f64,
    pub certified: bool,
    pub certificate: Option<Certificate>,
    pub evaluations: usize,
}

/// Build the unit-determinant Gram matrix from log-Cholesky parameters:
/// lower-triangular `L` with `exp` diagonal, shifted so that `det Q = 1`.
fn gram_from_params(n: usize, theta: &DVector<f64>) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    let mut idx = 0;
    let mut diag_sum = 0.0;
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                diag_sum += theta[idx];
            }
            idx += 1;
        }
    }
    let shift = diag_sum / n as f64;
    idx = 0;
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                l[(i, j)] = (theta[idx] - shift).exp();
            } else {
                l[(i, j)] = theta[idx];
            }
            idx += 1;
        }
    }
    let q = &l * l.transpose();
    // exact-determinant normalization of the off-diagonal contribution
    let det = q.determinant();
    if det > 0.0 && det.is_finite() {
        q / det.powf(1.0 / n as f64)
    } else {
        q
    }
}

/// Largest Ricci eigenvalue of the metric encoded by `theta`.
fn objective(alg: &LieAlgebra, theta: &DVector<f64>) -> f64 {
    let n = alg.dim();
    let q = gram_from_params(n, theta);
    let Ok(metric) = InnerProduct::new(q) else {
        return f64::INFINITY;
    };
    let Ok(m) = MetricLieAlgebra::new(alg.clone(), metric) else {
        return f64::INFINITY;
    };
    match m.ricci_operator() {
        Ok(ric) => *linalg::symmetric_eigenvalues(&ric).last().unwrap_or(&f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

/// Minimize the largest Ricci eigenvalue over unit-determinant inner
/// products by Nelder-Mead with seeded restarts. Deterministic for a fixed
/// `(algebra, config)` pair.
pub fn optimize_metric(alg: &LieAlgebra, cfg: &OptimizerConfig) -> OptimizeOutcome {
    let n = alg.dim();
    let dim = n * (n + 1) / 2;
    let restarts = cfg.restarts.max(1);
    let per_restart = (cfg.budget / restarts).max(dim + 2);
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut best_theta = DVector::zeros(dim);
    let mut best_value = f64::INFINITY;
    let mut evaluations = 0usize;
    for restart in 0..restarts {
        let start = if restart == 0 {
            DVector::zeros(dim)
        } else {
            DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                cfg.restart_spread * z
            })
        };
        let (theta, value, used) = nelder_mead(alg, &start, cfg.init_step, per_restart);
        evaluations += used;
        if value < best_value {
            best_value = value;
            best_theta = theta;
        }
        if evaluations >= cfg.budget {
            break;
        }
    }
    let gram = gram_from_params(n, &best_theta);
    let metric = InnerProduct::new(gram).unwrap_or_else(|_| InnerProduct::identity(n));
    let mut certified = false;
    let mut certificate = None;
    if best_value < -cfg.certify_tol {
        if let Ok(cert) = certificate_for(
            alg,
            Presentation::Direct,
            metric.clone(),
            Provenance::Optimizer,
        ) {
            certified = true;
            certificate = Some(cert);
        }
    }
    OptimizeOutcome { metric, best_objective: best_value, certified, certificate, evaluations }
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) with a deterministic axis-aligned initial simplex.
fn nelder_mead(
    alg: &LieAlgebra,
    start: &DVector<f64>,
    step: f64,
    budget: usize,
) -> (DVector<f64>, f64, usize) {
    let dim = start.len();
    let mut evals = 0usize;
    let eval = |x: &DVector<f64>, evals: &mut usize| -> f64 {
        *evals += 1;
        objective(alg, x)
    };
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(start, &mut evals);
    simplex.push((start.clone(), f0));
    for i in 0..dim {
        let mut x = start.clone();
        x[i] += step;
        let f = eval(&x, &mut evals);
        simplex.push((x, f));
    }
    let order = |s: &mut Vec<(DVector<f64>, f64)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    };
    order(&mut simplex);
    while evals < budget {
        let centroid = {
            let mut c = DVector::zeros(dim);
            for (x, _) in simplex.iter().take(dim) {
                c += x;
            }
            c / dim as f64
        };
        let worst = simplex[dim].clone();
        let reflected = &centroid * 2.0 - &worst.0;
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = &centroid + (&reflected - &centroid) * 2.0;
            let fe = eval(&expanded, &mut evals);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let contracted = &centroid + (&worst.0 - &centroid) * 0.5;
            let fc = eval(&contracted, &mut evals);
            if fc < worst.1 {
                simplex[dim] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    entry.0 = (&entry.0 + &best) * 0.5;
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
        order(&mut simplex);
        // convergence: simplex collapsed
        let spread = simplex[dim].1 - simplex[0].1;
        let size: f64 = (0..dim).map(|i| (&simplex[i + 1].0 - &simplex[0].0).norm()).sum();
        if spread.abs() < 1e-13 && size < 1e-10 {
            break;
        }
    }
    let (x, f) = simplex[0].clone();
    (x, f, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ricci;

    #[test]
    fn hyperbolic_certifies_immediately() {
        let alg = catalog::hyperbolic(3);
        let cfg = OptimizerConfig { budget: 500, restarts: 1, ..Default::default() };
        let out = optimize_metric(&alg, &cfg);
        assert!(out.certified);
        assert!(out.best_objective < -1.0);
        assert!(out.certificate.is_some());
    }

    #[test]
    fn abelian_never_certifies() {
        let alg = LieAlgebra::abelian(3);
        let cfg = OptimizerConfig { budget: 2_000, restarts: 4, ..Default::default() };
        let out = optimize_metric(&alg, &cfg);
        assert!(!out.certified);
        assert!(out.best_objective.abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let alg = catalog::heisenberg_extension(1, &[3.0, -1.0]);
        let cfg = OptimizerConfig { budget: 1_500, restarts: 3, seed: 42, ..Default::default() };
        let a = optimize_metric(&alg, &cfg);
        let b = optimize_metric(&alg, &cfg);
        assert_eq!(a.best_objective, b.best_objective);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.metric.gram(), b.metric.gram());
    }

    #[test]
    fn scale_quotient_normalization() {
        // objective(c Q) = objective(Q) / c: the parameterization fixes
        // det = 1, so adding a constant to the log-diagonal must not change
        // the objective.
        let alg = catalog::heisenberg_extension(1, &[1.0, 1.0]);
        let n = alg.dim();
        let dim = n * (n + 1) / 2;
        let theta = DVector::from_fn(dim, |i, _| 0.1 * (i as f64 - 2.0));
        let mut shifted = theta.clone();
        let mut idx = 0;
        for i in 0..n {
            for j in 0..=i {
                if i == j {
                    shifted[idx] += 0.7;
                }
                idx += 1;
            }
        }
        let f1 = objective(&alg, &theta);
        let f2 = objective(&alg, &shifted);
        assert!((f1 - f2).abs() <= 1e-12 * (1.0 + f1.abs()));
        // and the raw scale law on the Gram matrix directly
        let q = gram_from_params(n, &theta);
        let m1 = MetricLieAlgebra::new(alg.clone(), InnerProduct::new(q.clone()).unwrap()).unwrap();
        let m2 = MetricLieAlgebra::new(alg.clone(), InnerProduct::new(q * 2.0).unwrap()).unwrap();
        let r1 = m1.ricci_operator().unwrap();
        let r2 = m2.ricci_operator().unwrap();
        assert!((r1 * 0.5 - &r2).norm() < 1e-12 * (1.0 + r2.norm()));
    }

    #[test]
    fn heisenberg_exists_case_certifies_with_budget() {
        let alg = catalog::heisenberg_extension(1, &[3.0, -1.0]);
        let cfg = OptimizerConfig { budget: 8_000, restarts: 8, ..Default::default() };
        let out = optimize_metric(&alg, &cfg);
        assert!(out.certified, "best objective {}", out.best_objective);
        let cert = out.certificate.unwrap();
        let m = MetricLieAlgebra::new(alg, cert.metric.clone()).unwrap();
        let ric = m.ricci_operator().unwrap();
        assert_eq!(
            ricci::definiteness(&ric, ricci::default_definiteness_tol(&ric)),
            ricci::Definiteness::NegativeDefinite
        );
    }

    #[test]
    fn unimodular_never_certifies() {
        let alg = catalog::filiform_extension(4, 3.0, -4.0);
        let cfg = OptimizerConfig { budget: 3_000, restarts: 4, ..Default::default() };
        let out = optimize_metric(&alg, &cfg);
        assert!(!out.certified);
        assert!(out.best_objective > -1e-9);
    }
}
