//! Named example algebras: abelian, Heisenberg, standard filiform, the
//! hyperbolic-space algebra, and parameterized solvable extensions of each,
//! together with the expected classification/decision outcomes used by the
//! self-test command.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{make_extension, BracketTerm, LieAlgebra, MixedTerm};
use crate::decide::Verdict;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error("malformed catalog parameters in `{0}`: {1}")]
    BadParams(String, String),
}

/// Abelian algebra `R^n`.
pub fn abelian(n: usize) -> LieAlgebra {
    LieAlgebra::abelian(n)
}

/// Heisenberg algebra `h_{2p+1}`: `[X_i, X_{p+i}] = Z`.
pub fn heisenberg(p: usize) -> LieAlgebra {
    assert!(p >= 1);
    let dim = 2 * p + 1;
    let terms = (0..p)
        .map(|i| BracketTerm { i, j: p + i, k: 2 * p, c: 1.0 })
        .collect();
    let mut labels: Vec<String> = (1..=2 * p).map(|i| format!("X{i}")).collect();
    labels.push("Z".into());
    LieAlgebra::new(dim, terms).unwrap().with_labels(labels).unwrap()
}

/// Standard filiform algebra `L_l`: `[X_1, X_i] = X_{i+1}` for `i = 2..l-1`.
pub fn filiform(l: usize) -> LieAlgebra {
    assert!(l >= 3);
    let terms = (1..(l - 1))
        .map(|i| BracketTerm { i: 0, j: i, k: i + 1, c: 1.0 })
        .collect();
    let labels = (1..=l).map(|i| format!("X{i}")).collect();
    LieAlgebra::new(l, terms).unwrap().with_labels(labels).unwrap()
}

/// The algebra of hyperbolic space: `[Y, X_i] = X_i` with basis
/// `(X_1, ..., X_{n-1}, Y)`.
pub fn hyperbolic(n: usize) -> LieAlgebra {
    assert!(n >= 2);
    let terms = (0..(n - 1))
        .map(|i| BracketTerm { i, j: n - 1, k: i, c: -1.0 })
        .collect();
    let mut labels: Vec<String> = (1..n).map(|i| format!("X{i}")).collect();
    labels.push("Y".into());
    LieAlgebra::new(n, terms).unwrap().with_labels(labels).unwrap()
}

/// Rank-1 extension of `h_{2p+1}` by the diagonal derivation
/// `diag(d_1, ..., d_{2p}, lambda)` with `lambda = d_i + d_{p+i}` (the pair
/// sums must agree for this to be a derivation).
pub fn heisenberg_extension(p: usize, diag: &[f64]) -> LieAlgebra {
    assert_eq!(diag.len(), 2 * p);
    let lambda = diag[0] + diag[p];
    let mut entries: Vec<f64> = diag.to_vec();
    entries.push(lambda);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&entries));
    make_extension(&heisenberg(p), &[d], None).expect("diagonal Heisenberg derivation")
}

/// Rank-1 extension of `h_3` by the rotation-plus-scaling derivation
/// `[[alpha, beta, 0], [-beta, alpha, 0], [0, 0, 2 alpha]]`.
pub fn heisenberg_rotation_extension(alpha: f64, beta: f64) -> LieAlgebra {
    let d = DMatrix::from_row_slice(
        3,
        3,
        &[alpha, beta, 0.0, -beta, alpha, 0.0, 0.0, 0.0, 2.0 * alpha],
    );
    make_extension(&heisenberg(1), &[d], None).expect("rotation-scaling derivation")
}

/// Rank-1 extension of `h_{2p+1}` with mixed constants `[Y, X_i]` given by a
/// full derivation matrix on the nilradical plus `[Y_1, Y_1]`-type terms; used
/// by randomized suites.
pub fn heisenberg_extension_full(p: usize, n_matrix: &DMatrix<f64>, v: &DVector<f64>) -> LieAlgebra {
    assert_eq!(n_matrix.nrows(), 2 * p);
    let lambda = n_matrix.trace() / p as f64;
    let l = 2 * p + 1;
    let mut d = DMatrix::zeros(l, l);
    d.view_mut((0, 0), (2 * p, 2 * p)).copy_from(n_matrix);
    for i in 0..(2 * p) {
        d[(2 * p, i)] = v[i];
    }
    d[(2 * p, 2 * p)] = lambda;
    make_extension(&heisenberg(p), &[d], None).expect("Heisenberg derivation")
}

/// Rank-1 extension of `L_l` by the derivation with diagonal
/// `(a, d, a+d, 2a+d, ..., (l-2)a+d)` and zeros below the diagonal.
pub fn filiform_extension(l: usize, a: f64, d: f64) -> LieAlgebra {
    let mut m = DMatrix::zeros(l, l);
    m[(0, 0)] = a;
    m[(1, 1)] = d;
    for i in 2..l {
        m[(i, i)] = (i - 1) as f64 * a + d;
    }
    make_extension(&filiform(l), &[m], None).expect("filiform diagonal derivation")
}

/// Rank-2 extension of `L_l` by the commuting derivations with parameters
/// `(a, d) = (1, 0)` and `(0, 1)`.
pub fn filiform_rank2_extension(l: usize) -> LieAlgebra {
    let mut da = DMatrix::zeros(l, l);
    da[(0, 0)] = 1.0;
    for i in 2..l {
        da[(i, i)] = (i - 1) as f64;
    }
    let mut dd = DMatrix::zeros(l, l);
    dd[(1, 1)] = 1.0;
    for i in 2..l {
        dd[(i, i)] = 1.0;
    }
    make_extension(&filiform(l), &[da, dd], None).expect("filiform rank-2 derivations")
}

/// Rank-1 extension of the abelian algebra `R^k` by an arbitrary matrix.
pub fn abelian_extension(k: usize, d: &DMatrix<f64>) -> LieAlgebra {
    make_extension(&LieAlgebra::abelian(k), std::slice::from_ref(d), None).expect("any matrix is a derivation")
}

/// Rank-m extension of `R^k` by commuting matrices.
pub fn abelian_extension_multi(k: usize, ds: &[DMatrix<f64>]) -> LieAlgebra {
    make_extension(&LieAlgebra::abelian(k), ds, None).expect("commuting derivations")
}

/// Rank-1 extension of `h_3` with a mixed bracket `[Y, X_1] += v Z` realized
/// by a derivation with a nonzero off-diagonal row; exercises the
/// basis-cleanup path of the Heisenberg constructor.
pub fn heisenberg_extension_offdiag(d1: f64, d2: f64, v1: f64, v2: f64) -> LieAlgebra {
    let n = DMatrix::from_row_slice(2, 2, &[d1, 0.0, 0.0, d2]);
    heisenberg_extension_full(1, &n, &DVector::from_column_slice(&[v1, v2]))
}

/// Solvable `h_3` extension with a mixed `[Y_1, Y_2] = a Z` bracket and two
/// commuting diagonal derivations; rank-2 Heisenberg test case.
pub fn heisenberg_rank2_extension(a: f64) -> LieAlgebra {
    let nil = heisenberg(1);
    let d1 = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1.0, 2.0]));
    let d2 = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, -1.0, 0.0]));
    let mixed = vec![MixedTerm { j: 0, k: 1, value: DVector::from_column_slice(&[0.0, 0.0, a]) }];
    make_extension(&nil, &[d1, d2], Some(&mixed)).expect("rank-2 Heisenberg extension")
}

/// Expected nilradical classification for self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedClass {
    Abelian,
    Heisenberg(usize),
    StandardFiliform(usize),
    Other,
}

/// A named example with its expected pipeline outcomes.
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub algebra: LieAlgebra,
    pub expected_class: ExpectedClass,
    pub expected_verdict: Verdict,
    pub unimodular: bool,
}

/// The built-in catalog. Every entry's expected verdict is checked by the
/// `selftest` command and the acceptance suite.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut entries: Vec<CatalogEntry> = Vec::new();
    let mut push = |name: &str,
                    description: &str,
                    algebra: LieAlgebra,
                    expected_class: ExpectedClass,
                    expected_verdict: Verdict| {
        let unimodular = algebra.is_unimodular();
        entries.push(CatalogEntry {
            name: name.into(),
            description: description.into(),
            algebra,
            expected_class,
            expected_verdict,
            unimodular,
        });
    };

    push(
        "abelian:3",
        "abelian R^3 (nilpotent, unimodular)",
        abelian(3),
        ExpectedClass::Abelian,
        Verdict::NotExists,
    );
    push(
        "heisenberg:1",
        "Heisenberg h_3 (nilpotent, unimodular)",
        heisenberg(1),
        ExpectedClass::Heisenberg(1),
        Verdict::NotExists,
    );
    push(
        "heisenberg:2",
        "Heisenberg h_5 (nilpotent, unimodular)",
        heisenberg(2),
        ExpectedClass::Heisenberg(2),
        Verdict::NotExists,
    );
    push(
        "filiform:4",
        "standard filiform L_4 (nilpotent, unimodular)",
        filiform(4),
        ExpectedClass::StandardFiliform(4),
        Verdict::NotExists,
    );
    push(
        "filiform:5",
        "standard filiform L_5 (nilpotent, unimodular)",
        filiform(5),
        ExpectedClass::StandardFiliform(5),
        Verdict::NotExists,
    );
    push(
        "hyperbolic:3",
        "[Y, X_i] = X_i on R^2 + Y; real hyperbolic space H^3",
        hyperbolic(3),
        ExpectedClass::Abelian,
        Verdict::Exists,
    );
    push(
        "hyperbolic:5",
        "[Y, X_i] = X_i on R^4 + Y; real hyperbolic space H^5",
        hyperbolic(5),
        ExpectedClass::Abelian,
        Verdict::Exists,
    );
    push(
        "abelian:2:diag=1,-1",
        "unimodular extension of R^2 by diag(1, -1)",
        abelian_extension(2, &DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, -1.0]))),
        ExpectedClass::Abelian,
        Verdict::NotExists,
    );
    push(
        "abelian:3:diag=1,2,3",
        "extension of R^3 by diag(1, 2, 3)",
        abelian_extension(3, &DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 3.0]))),
        ExpectedClass::Abelian,
        Verdict::Exists,
    );
    push(
        "heisenberg:1:diag=1,1",
        "extension of h_3 by diag(1, 1, 2)",
        heisenberg_extension(1, &[1.0, 1.0]),
        ExpectedClass::Heisenberg(1),
        Verdict::Exists,
    );
    push(
        "heisenberg:1:diag=3,-1",
        "extension of h_3 by diag(3, -1, 2); negative weight but lambda wins",
        heisenberg_extension(1, &[3.0, -1.0]),
        ExpectedClass::Heisenberg(1),
        Verdict::Exists,
    );
    push(
        "heisenberg:1:diag=5,-3",
        "extension of h_3 by diag(5, -3, 2); lambda loses to the negative weight",
        heisenberg_extension(1, &[5.0, -3.0]),
        ExpectedClass::Heisenberg(1),
        Verdict::NotExists,
    );
    push(
        "heisenberg:1:diag=1,-1",
        "unimodular extension of h_3 by diag(1, -1, 0)",
        heisenberg_extension(1, &[1.0, -1.0]),
        ExpectedClass::Heisenberg(1),
        Verdict::NotExists,
    );
    push(
        "heisenberg:2:diag=1,2,3,2",
        "extension of h_5 by diag(1, 2, 3, 2, 4); all weights positive",
        heisenberg_extension(2, &[1.0, 2.0, 3.0, 2.0]),
        ExpectedClass::Heisenberg(2),
        Verdict::Exists,
    );
    push(
        "heisenberg:1:rot=1,2",
        "extension of h_3 by rotation-plus-scaling (alpha=1, beta=2)",
        heisenberg_rotation_extension(1.0, 2.0),
        ExpectedClass::Heisenberg(1),
        Verdict::Exists,
    );
    push(
        "filiform:4:a=1:d=1",
        "extension of L_4 by the (a, d) = (1, 1) derivation",
        filiform_extension(4, 1.0, 1.0),
        ExpectedClass::StandardFiliform(4),
        Verdict::Exists,
    );
    push(
        "filiform:4:a=3:d=-4",
        "unimodular extension of L_4: t = 3d + 4a = 0",
        filiform_extension(4, 3.0, -4.0),
        ExpectedClass::StandardFiliform(4),
        Verdict::NotExists,
    );
    push(
        "filiform:5:a=1:d=-2",
        "extension of L_5 with lambda > 0 but iota < 0",
        filiform_extension(5, 1.0, -2.0),
        ExpectedClass::StandardFiliform(5),
        Verdict::NotExists,
    );
    push(
        "filiform:5:a=0:d=1",
        "extension of L_5 by the (a, d) = (0, 1) derivation",
        filiform_extension(5, 0.0, 1.0),
        ExpectedClass::StandardFiliform(5),
        Verdict::Exists,
    );
    push(
        "filiform:4:rank2",
        "rank-2 extension of L_4 by the commuting (1,0) and (0,1) derivations",
        filiform_rank2_extension(4),
        ExpectedClass::StandardFiliform(4),
        Verdict::Exists,
    );
    entries
}

/// Look up a catalog entry by name, allowing parameterized spellings such as
/// `heisenberg:1:diag=3,-1`, `filiform:6:a=1:d=0.5`, `abelian:4`,
/// `hyperbolic:3` beyond the entries listed by [`catalog`].
pub fn build(name: &str) -> Result<LieAlgebra, CatalogError> {
    if let Some(e) = catalog().into_iter().find(|e| e.name == name) {
        return Ok(e.algebra);
    }
    let parts: Vec<&str> = name.split(':').collect();
    let bad = |msg: &str| CatalogError::BadParams(name.to_string(), msg.to_string());
    let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| bad(&e.to_string()));
    match parts.as_slice() {
        ["abelian", n] => Ok(abelian(parse_usize(n)?)),
        ["hyperbolic", n] => {
            let n = parse_usize(n)?;
            if n < 2 {
                return Err(bad("hyperbolic dimension must be >= 2"));
            }
            Ok(hyperbolic(n))
        }
        ["heisenberg", p] => {
            let p = parse_usize(p)?;
            if p < 1 {
                return Err(bad("heisenberg parameter must be >= 1"));
            }
            Ok(heisenberg(p))
        }
        ["filiform", l] => {
            let l = parse_usize(l)?;
            if l < 3 {
                return Err(bad("filiform dimension must be >= 3"));
            }
            Ok(filiform(l))
        }
        ["heisenberg", p, diag] if diag.starts_with("diag=") => {
            let p = parse_usize(p)?;
            let vals: Result<Vec<f64>, _> = diag[5..]
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| bad(&e.to_string())))
                .collect();
            let vals = vals?;
            if vals.len() != 2 * p {
                return Err(bad(&format!("expected {} diagonal entries", 2 * p)));
            }
            for i in 0..p {
                if (vals[i] + vals[p + i] - vals[0] - vals[p]).abs() > 1e-12 {
                    return Err(bad("pair sums d_i + d_{p+i} must agree (derivation condition)"));
                }
            }
            Ok(heisenberg_extension(p, &vals))
        }
        ["heisenberg", "1", rot] if rot.starts_with("rot=") => {
            let vals: Result<Vec<f64>, _> = rot[4..]
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| bad(&e.to_string())))
                .collect();
            let vals = vals?;
            if vals.len() != 2 {
                return Err(bad("rot= takes alpha,beta"));
            }
            Ok(heisenberg_rotation_extension(vals[0], vals[1]))
        }
        ["filiform", l, a, d] if a.starts_with("a=") && d.starts_with("d=") => {
            let l = parse_usize(l)?;
            if l < 4 {
                return Err(bad("filiform extensions need l >= 4"));
            }
            let av = a[2..].parse::<f64>().map_err(|e| bad(&e.to_string()))?;
            let dv = d[2..].parse::<f64>().map_err(|e| bad(&e.to_string()))?;
            Ok(filiform_extension(l, av, dv))
        }
        ["filiform", l, "rank2"] => {
            let l = parse_usize(l)?;
            if l < 4 {
                return Err(bad("filiform extensions need l >= 4"));
            }
            Ok(filiform_rank2_extension(l))
        }
        ["abelian", k, diag] if diag.starts_with("diag=") => {
            let k = parse_usize(k)?;
            let vals: Result<Vec<f64>, _> = diag[5..]
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| bad(&e.to_string())))
                .collect();
            let vals = vals?;
            if vals.len() != k {
                return Err(bad(&format!("expected {k} diagonal entries")));
            }
            Ok(abelian_extension(k, &DMatrix::from_diagonal(&DVector::from_column_slice(&vals))))
        }
        _ => Err(CatalogError::Unknown(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_enough_entries_and_valid_algebras() {
        let entries = catalog();
        assert!(entries.len() >= 12);
        for e in &entries {
            assert!(
                e.algebra.jacobi_defect() <= 1e-10,
                "catalog entry {} violates Jacobi",
                e.name
            );
        }
    }

    #[test]
    fn build_parses_parameterized_names() {
        assert_eq!(build("abelian:4").unwrap().dim(), 4);
        assert_eq!(build("heisenberg:3").unwrap().dim(), 7);
        assert_eq!(build("filiform:6:a=1:d=0.5").unwrap().dim(), 7);
        assert!(build("nonsense:1").is_err());
        // invalid diagonal (pair sums differ) rejected
        assert!(build("heisenberg:2:diag=1,2,3,4").is_err());
        assert!(build("heisenberg:2:diag=1,2,3,2").is_ok());
    }

    #[test]
    fn unimodular_entries_marked() {
        let entries = catalog();
        let unimod: Vec<&str> =
            entries.iter().filter(|e| e.unimodular).map(|e| e.name.as_str()).collect();
        assert!(unimod.contains(&"abelian:2:diag=1,-1"));
        assert!(unimod.contains(&"filiform:4:a=3:d=-4"));
        assert!(unimod.contains(&"heisenberg:1:diag=1,-1"));
        assert!(!unimod.contains(&"hyperbolic:3"));
    }
}
