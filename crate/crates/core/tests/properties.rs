//! Cross-module property suites: equivariance of the Ricci operator,
//! basis invariance of the weight data, witness validity of the decision
//! reports, and the consistency chain between deciders, constructors and the
//! optimizer on the catalog.

mod common;

use common::{random_invertible, random_spd, ricci_bruteforce, sorted_eigen_distance};
use nalgebra::{DMatrix, DVector};
use negricci::algebra::LieAlgebra;
use negricci::catalog;
use negricci::classify;
use negricci::construct;
use negricci::decide::{self, Verdict};
use negricci::degenerate;
use negricci::optimize::{optimize_metric, OptimizerConfig};
use negricci::ricci::{InnerProduct, MetricLieAlgebra};
use negricci::triangulate;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn ricci_matches_bruteforce_on_catalog() {
    let mut rng = StdRng::seed_from_u64(2024);
    for entry in catalog::catalog() {
        let alg = entry.algebra;
        let n = alg.dim();
        for _ in 0..3 {
            let q = random_spd(n, &mut rng);
            let m = MetricLieAlgebra::new(alg.clone(), q.clone()).unwrap();
            let lib = m.ricci_operator().unwrap();
            let brute = ricci_bruteforce(&alg, &q);
            // different orthonormal frames: compare eigenvalue multisets
            let dist = sorted_eigen_distance(&lib, &brute);
            assert!(dist < 1e-9 * (1.0 + lib.norm()), "{}: {dist}", entry.name);
        }
    }
}

#[test]
fn ricci_equivariance_under_basis_change() {
    let mut rng = StdRng::seed_from_u64(999);
    for alg in [
        catalog::hyperbolic(3),
        catalog::heisenberg_extension(1, &[3.0, -1.0]),
        catalog::filiform_extension(4, 1.0, 1.0),
    ] {
        let n = alg.dim();
        for _ in 0..5 {
            let t = random_invertible(n, &mut rng);
            let q = random_spd(n, &mut rng);
            // transformed algebra with the pulled metric <T., T.>
            let conj = degenerate::act(&t, &alg).unwrap();
            let q_pull = InnerProduct::new(t.transpose() * q.gram() * &t).unwrap();
            let m1 = MetricLieAlgebra::new(alg.clone(), q.clone()).unwrap();
            let m2 = MetricLieAlgebra::new(conj, q_pull).unwrap();
            let r1 = m1.ricci_operator().unwrap();
            let r2 = m2.ricci_operator().unwrap();
            let dist = sorted_eigen_distance(&r1, &r2);
            assert!(dist < 1e-8 * (1.0 + r1.norm()), "eigenvalue drift {dist}");
        }
    }
}

#[test]
fn weights_basis_invariant_and_char_poly() {
    let mut rng = StdRng::seed_from_u64(4242);
    let families: Vec<Vec<DMatrix<f64>>> = vec![
        vec![
            DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 3.0])),
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        ],
        vec![DMatrix::from_row_slice(2, 2, &[0.5, 2.0, -2.0, 0.5])],
    ];
    for gens in families {
        let k = gens[0].nrows();
        let wd = triangulate::real_block_triangularize(&gens).unwrap();
        let probe = DVector::from_fn(gens.len(), |i, _| 0.7 - 0.3 * i as f64);
        let mut base: Vec<(f64, f64)> = triangulate::weights_of(&wd, &probe)
            .iter()
            .map(|w| (w.0, w.1.abs()))
            .collect();
        base.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for _ in 0..5 {
            let t = random_invertible(k, &mut rng);
            let t_inv = t.clone().try_inverse().unwrap();
            let conj: Vec<DMatrix<f64>> = gens.iter().map(|g| &t_inv * g * &t).collect();
            let wd2 = triangulate::real_block_triangularize(&conj).unwrap();
            let mut got: Vec<(f64, f64)> = triangulate::weights_of(&wd2, &probe)
                .iter()
                .map(|w| (w.0, w.1.abs()))
                .collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in base.iter().zip(got.iter()) {
                assert!((a.0 - b.0).abs() < 1e-7 && (a.1 - b.1).abs() < 1e-7);
            }
        }
        // characteristic polynomial agreement for each generator
        for (gi, g) in gens.iter().enumerate() {
            let mut y = DVector::zeros(gens.len());
            y[gi] = 1.0;
            let ws = triangulate::weights_of(&wd, &y);
            // coefficients of prod (x - eigenvalue) from the weight list
            let mut coeffs = vec![nalgebra::Complex::new(1.0, 0.0)];
            for (re, im, _) in &ws {
                let root = nalgebra::Complex::new(*re, *im);
                let mut next = vec![nalgebra::Complex::new(0.0, 0.0); coeffs.len() + 1];
                for (i, c) in coeffs.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= c * root;
                }
                coeffs = next;
            }
            // reference char poly from the matrix eigenvalues
            let eigs = negricci::linalg::sorted_complex_eigenvalues(g);
            let mut reference = vec![nalgebra::Complex::new(1.0, 0.0)];
            for root in eigs.iter() {
                let mut next = vec![nalgebra::Complex::new(0.0, 0.0); reference.len() + 1];
                for (i, c) in reference.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= c * root;
                }
                reference = next;
            }
            for (a, b) in coeffs.iter().zip(reference.iter()) {
                assert!((a - b).norm() < 1e-7 * (1.0 + g.norm().powi(k as i32)));
            }
        }
    }
}

#[test]
fn decision_witnesses_are_valid() {
    for entry in catalog::catalog() {
        let alg = &entry.algebra;
        if !alg.is_solvable() {
            continue;
        }
        let rep = decide::decide_general_sufficient(alg).unwrap();
        if let Some(w) = &rep.witness {
            // all weights of ad_w on the nilradical have positive real part
            let nil = alg.nilradical().unwrap();
            let bn = nil.basis();
            let ad = bn.transpose() * alg.adjoint_matrix(w).unwrap() * bn;
            let eigs = negricci::linalg::sorted_complex_eigenvalues(&ad);
            for e in eigs.iter() {
                assert!(e.re > 0.0, "{}: weight {e}", entry.name);
            }
        }
    }
}

#[test]
fn decide_verdicts_invariant_under_conjugation() {
    let mut rng = StdRng::seed_from_u64(31337);
    for (alg, expected) in [
        (catalog::heisenberg_extension(1, &[3.0, -1.0]), Verdict::Exists),
        (catalog::heisenberg_extension(1, &[5.0, -3.0]), Verdict::NotExists),
        (catalog::filiform_extension(4, 1.0, 1.0), Verdict::Exists),
        (catalog::filiform_extension(5, 1.0, -2.0), Verdict::NotExists),
    ] {
        for _ in 0..5 {
            let t = random_invertible(alg.dim(), &mut rng);
            let conj = degenerate::act(&t, &alg).unwrap();
            let verdict = pipeline_verdict(&conj);
            assert_eq!(verdict, expected, "conjugated catalog entry changed verdict");
        }
    }
}

/// The decision pipeline: unimodularity short circuit, classify, dispatch.
fn pipeline_verdict(alg: &LieAlgebra) -> Verdict {
    if alg.is_unimodular() {
        return Verdict::NotExists;
    }
    let nil = alg.nilradical().unwrap();
    let (sub, _) = alg.subalgebra(&nil).unwrap();
    let cls = classify::classify_nilradical(&sub).unwrap();
    match cls {
        classify::NilradicalClass::Abelian => {
            decide::decide_general_sufficient(alg).unwrap().verdict
        }
        classify::NilradicalClass::Heisenberg { .. } => {
            let hd = classify::heisenberg_data(alg, &nil, &cls).unwrap();
            decide::decide_heisenberg(alg, &hd).unwrap().verdict
        }
        classify::NilradicalClass::StandardFiliform { .. } => {
            let fd = classify::filiform_data(alg, &nil, &cls).unwrap();
            decide::decide_filiform(alg, &fd).unwrap().verdict
        }
        classify::NilradicalClass::Other { .. } => {
            let suff = decide::decide_general_sufficient(alg).unwrap();
            let nec = decide::decide_general_necessary(alg).unwrap();
            match (suff.verdict, nec.verdict) {
                (Verdict::Exists, _) => Verdict::Exists,
                (_, Verdict::NotExists) => Verdict::NotExists,
                _ => Verdict::Unknown,
            }
        }
    }
}

#[test]
fn catalog_self_test() {
    for entry in catalog::catalog() {
        let verdict = pipeline_verdict(&entry.algebra);
        assert_eq!(verdict, entry.expected_verdict, "catalog entry {}", entry.name);
        // classification agrees
        let nil = entry.algebra.nilradical().unwrap();
        let (sub, _) = entry.algebra.subalgebra(&nil).unwrap();
        let cls = classify::classify_nilradical(&sub).unwrap();
        let matches = matches!(
            (&cls, entry.expected_class),
            (classify::NilradicalClass::Abelian, catalog::ExpectedClass::Abelian)
        ) || matches!(
            (&cls, entry.expected_class),
            (classify::NilradicalClass::Heisenberg { p, .. }, catalog::ExpectedClass::Heisenberg(q)) if *p == q
        ) || matches!(
            (&cls, entry.expected_class),
            (classify::NilradicalClass::StandardFiliform { l, .. }, catalog::ExpectedClass::StandardFiliform(q)) if *l == q
        ) || matches!(
            (&cls, entry.expected_class),
            (classify::NilradicalClass::Other { .. }, catalog::ExpectedClass::Other)
        );
        assert!(matches, "{}: classified {}", entry.name, cls.describe());
    }
}

#[test]
fn exists_entries_construct_and_certify() {
    for entry in catalog::catalog() {
        if entry.expected_verdict != Verdict::Exists {
            continue;
        }
        let alg = &entry.algebra;
        let nil = alg.nilradical().unwrap();
        let (sub, _) = alg.subalgebra(&nil).unwrap();
        let cls = classify::classify_nilradical(&sub).unwrap();
        let cert = match &cls {
            classify::NilradicalClass::Heisenberg { .. } => {
                let hd = classify::heisenberg_data(alg, &nil, &cls).unwrap();
                let rep = decide::decide_heisenberg(alg, &hd).unwrap();
                construct::construct_heisenberg(alg, &hd, &rep.witness.unwrap()).unwrap()
            }
            classify::NilradicalClass::StandardFiliform { .. } => {
                let fd = classify::filiform_data(alg, &nil, &cls).unwrap();
                let rep = decide::decide_filiform(alg, &fd).unwrap();
                construct::construct_filiform(alg, &fd, &rep.witness.unwrap()).unwrap()
            }
            _ => {
                let rep = decide::decide_general_sufficient(alg).unwrap();
                construct::construct_general(alg, &rep.witness.unwrap()).unwrap()
            }
        };
        assert!(
            cert.max_eigenvalue < -1e-9 * (1.0 + cert.ricci.norm()),
            "{}: max eigenvalue {}",
            entry.name,
            cert.max_eigenvalue
        );
        construct::verify_certificate(alg, &cert).unwrap();
    }
}

#[test]
fn not_exists_iff_entries_never_certify_with_small_budget() {
    // soft counterpart of the consistency chain: the optimizer must not
    // certify on entries where the iff criteria certify nonexistence.
    let cfg = OptimizerConfig { budget: 2_000, restarts: 4, ..Default::default() };
    for entry in catalog::catalog() {
        if entry.expected_verdict != Verdict::NotExists {
            continue;
        }
        let out = optimize_metric(&entry.algebra, &cfg);
        assert!(
            !out.certified,
            "{}: optimizer certified a NotExists entry (objective {})",
            entry.name, out.best_objective
        );
    }
}
