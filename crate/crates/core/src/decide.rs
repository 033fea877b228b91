//! Decision procedures for the existence of an inner product of negative
//! Ricci curvature: strict-feasibility checks of the eigenvalue criteria for
//! general solvable algebras (necessary and sufficient directions), and the
//! if-and-only-if criteria for Heisenberg and standard filiform nilradicals.
//!
//! Every criterion is positively homogeneous in the probe direction `Y`, so
//! strict feasibility is decided by maximizing the criterion over the unit
//! sphere of the sup norm (equivalently over the 2m box faces, each of which
//! is a linear program). The optimum is compared against a fixed strictness
//! threshold; borderline optima give `Unknown` rather than a certificate.

use nalgebra::DVector;
use thiserror::Error;

use crate::algebra::{AlgebraError, LieAlgebra, LinearForm};
use crate::classify::{ClassifyError, FiliformData, HeisenbergData};
use crate::simplex::{self, LpProblem, SimplexError};
use crate::triangulate::{self, TriangulateError, WeightBlock};

/// Strictness threshold for the homogeneous systems: optima above it certify
/// existence, optima below its negative certify nonexistence, the band in
/// between is reported as `Unknown`.
pub const STRICT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DecideError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Triangulate(#[from] TriangulateError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("LP solver failed: {0}")]
    Solver(#[from] SimplexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    NotExists,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Exists => f.write_str("exists"),
            Verdict::NotExists => f.write_str("not-exists"),
            Verdict::Unknown => f.write_str("unknown"),
        }
    }
}

/// Which statement a report is an instance of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremTag {
    /// Unimodular solvable groups admit no metric of negative Ricci curvature.
    Unimodularity,
    /// Necessary direction for general solvable algebras.
    GeneralNecessary,
    /// Sufficient direction for general solvable algebras.
    GeneralSufficient,
    /// The iff criterion for abelian nilradicals.
    AbelianIff,
    /// The iff criterion for Heisenberg nilradicals.
    HeisenbergIff,
    /// The iff criterion for standard filiform nilradicals.
    FiliformIff,
    /// Combined pipeline verdict.
    Pipeline,
}

impl std::fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TheoremTag::Unimodularity => "unimodularity",
            TheoremTag::GeneralNecessary => "general-necessary",
            TheoremTag::GeneralSufficient => "general-sufficient",
            TheoremTag::AbelianIff => "abelian-iff",
            TheoremTag::HeisenbergIff => "heisenberg-iff",
            TheoremTag::FiliformIff => "filiform-iff",
            TheoremTag::Pipeline => "pipeline",
        };
        f.write_str(s)
    }
}

/// Outcome of a decision procedure. `Exists` verdicts carry a witness
/// direction in the coordinates of the algebra the check ran on, together
/// with the attained strict margin.
#[derive(Debug, Clone)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub witness: Option<DVector<f64>>,
    pub theorem: TheoremTag,
    pub margin: f64,
    pub detail: String,
}

impl DecisionReport {
    fn tagged(mut self, tag: TheoremTag) -> Self {
        self.theorem = tag;
        self
    }
}

/// A strict inequality system on a parameter space of dimension `m`:
/// plain forms that must all be strictly positive, plus an optional concave
/// piecewise-linear objective `linear(Y) + sum_i weight_i * min(0, term_i(Y))`.
#[derive(Debug, Clone)]
pub struct StrictSystem {
    pub forms: Vec<LinearForm>,
    pub extra: Option<ConcaveExtra>,
}

#[derive(Debug, Clone)]
pub struct ConcaveExtra {
    pub linear: LinearForm,
    pub min_terms: Vec<(LinearForm, f64)>,
}

impl StrictSystem {
    pub fn dim(&self) -> usize {
        self.forms
            .first()
            .map(|f| f.dim())
            .or_else(|| self.extra.as_ref().map(|e| e.linear.dim()))
            .unwrap_or(0)
    }

    /// Evaluate the full criterion at `y`: `min` over plain forms (when
    /// present) plus the concave extra (when present).
    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        let mut value = f64::INFINITY;
        if !self.forms.is_empty() {
            value = self.forms.iter().map(|f| f.eval(y)).fold(f64::INFINITY, f64::min);
        }
        if let Some(extra) = &self.extra {
            let concave: f64 = extra.linear.eval(y)
                + extra
                    .min_terms
                    .iter()
                    .map(|(g, w)| w * g.eval(y).min(0.0))
                    .sum::<f64>();
            value = if self.forms.is_empty() { concave } else { value.min(concave) };
        }
        if value == f64::INFINITY {
            0.0
        } else {
            value
        }
    }
}

/// Maximize the criterion of `sys` over the sup-norm unit sphere and convert
/// the optimum into a verdict at the strictness threshold.
///
/// The sphere is the union of the 2m box faces `{Y_j = ±1, |Y_i| <= 1}`; on
/// each face the maximization is a linear program (slack variable `t` for the
/// min over plain forms, auxiliary variables `s_i <= 0`, `s_i <= term_i(Y)`
/// for the concave part), solved by the two-phase simplex with Bland's rule.
pub fn lp_strict_feasible(sys: &StrictSystem) -> Result<DecisionReport, DecideError> {
    let m = sys.dim();
    if m == 0 {
        return Ok(DecisionReport {
            verdict: Verdict::NotExists,
            witness: None,
            theorem: TheoremTag::Pipeline,
            margin: f64::NEG_INFINITY,
            detail: "empty parameter space".into(),
        });
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for j in 0..m {
        for sign in [1.0_f64, -1.0] {
            let (value, y) = solve_face(sys, j, sign)?;
            // Re-evaluate the true criterion at the recovered point.
            let true_value = sys.eval(&y);
            let v = true_value.min(value + 1e-12).max(true_value - 1e-12);
            if best.as_ref().map(|(bv, _)| v > *bv + 1e-15).unwrap_or(true) {
                best = Some((v, y));
            }
        }
    }
    let (opt, y) = best.expect("at least one face");
    let verdict = if opt > STRICT_TOL {
        Verdict::Exists
    } else if opt < -STRICT_TOL {
        Verdict::NotExists
    } else {
        Verdict::Unknown
    };
    Ok(DecisionReport {
        verdict,
        witness: if verdict == Verdict::Exists { Some(y.clone()) } else { None },
        theorem: TheoremTag::Pipeline,
        margin: opt,
        detail: format!("sphere optimum {opt:.6e} attained at {:?}", y.as_slice()),
    })
}

/// Maximize over the face `Y_j = sign`, returning (value, Y).
fn solve_face(sys: &StrictSystem, j: usize, sign: f64) -> Result<(f64, DVector<f64>), DecideError> {
    let m = sys.dim();
    // Variables: u_i = Y_i + 1 in [0, 2] for i != j (m - 1 of them),
    // then t+ and t- when plain forms are present,
    // then s'_i >= 0 with s_i = -s'_i for each concave min term.
    let free: Vec<usize> = (0..m).filter(|&i| i != j).collect();
    let nf = free.len();
    let has_t = !sys.forms.is_empty();
    let num_s = sys.extra.as_ref().map(|e| e.min_terms.len()).unwrap_or(0);
    let total = nf + if has_t { 2 } else { 0 } + num_s;
    let t_at = nf;
    let s_at = nf + if has_t { 2 } else { 0 };

    // fixed contribution of Y_j and of the -1 shifts: for a form f,
    // f(Y) = sum_{i in free} f_i (u_i - 1) + f_j * sign
    //      = f(u-part) + c_f,  c_f = -sum_{free} f_i + f_j * sign.
    let fixed = |f: &LinearForm| -> f64 {
        let c = f.coeffs();
        -free.iter().map(|&i| c[i]).sum::<f64>() + c[j] * sign
    };

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    // box: u_i <= 2
    for k in 0..nf {
        let mut row = vec![0.0; total];
        row[k] = 1.0;
        rows.push((row, 2.0));
    }
    // plain forms: f(Y) >= t  <=>  t+ - t- - f(u) <= c_f
    for f in &sys.forms {
        let mut row = vec![0.0; total];
        for (k, &i) in free.iter().enumerate() {
            row[k] = -f.coeffs()[i];
        }
        row[t_at] = 1.0;
        row[t_at + 1] = -1.0;
        rows.push((row, fixed(f)));
    }
    // concave terms: -s'_i <= g_i(Y)  <=>  -g_i(u) - s'_i <= c_g
    if let Some(extra) = &sys.extra {
        for (idx, (g, _)) in extra.min_terms.iter().enumerate() {
            let mut row = vec![0.0; total];
            for (k, &i) in free.iter().enumerate() {
                row[k] = -g.coeffs()[i];
            }
            row[s_at + idx] = -1.0;
            rows.push((row, fixed(g)));
        }
    }
    // objective: t+ - t- + linear(Y) - sum w_i s'_i (+ constant)
    let mut objective = vec![0.0; total];
    let mut constant = 0.0;
    if has_t {
        objective[t_at] = 1.0;
        objective[t_at + 1] = -1.0;
    }
    if let Some(extra) = &sys.extra {
        for (k, &i) in free.iter().enumerate() {
            objective[k] += extra.linear.coeffs()[i];
        }
        constant += fixed(&extra.linear);
        for (idx, (_, w)) in extra.min_terms.iter().enumerate() {
            objective[s_at + idx] = -*w;
        }
    }
    let (x, value) = simplex::solve_max(&LpProblem { objective, rows })?;
    let mut y = DVector::zeros(m);
    for (k, &i) in free.iter().enumerate() {
        y[i] = x[k] - 1.0;
    }
    y[j] = sign;
    Ok((value + constant, y))
}

/// Positivity of all weights of `(ad_Y)|n` over a complement of the
/// nilradical: a sufficient condition for the existence of a metric of
/// negative Ricci curvature (and part of the abelian-nilradical iff).
pub fn decide_general_sufficient(g: &LieAlgebra) -> Result<DecisionReport, DecideError> {
    let nil = g.nilradical()?;
    let comp = nil.complement();
    let m = comp.dim();
    if m == 0 {
        return Ok(DecisionReport {
            verdict: Verdict::NotExists,
            witness: None,
            theorem: TheoremTag::GeneralSufficient,
            margin: f64::NEG_INFINITY,
            detail: "nilpotent algebra: no complement directions".into(),
        });
    }
    let bn = nil.basis();
    let generators: Vec<_> = (0..m)
        .map(|k| {
            let y = comp.basis().column(k).into_owned();
            bn.transpose() * g.adjoint_matrix(&y).expect("dims agree") * bn
        })
        .collect();
    let wd = triangulate::real_block_triangularize(&generators)?;
    let mut forms = Vec::new();
    for b in wd.blocks() {
        match b {
            WeightBlock::Real { lambda } => forms.push(lambda.clone()),
            WeightBlock::Pair { alpha, .. } => forms.push(alpha.clone()),
        }
    }
    let report = lp_strict_feasible(&StrictSystem { forms, extra: None })?;
    Ok(lift_witness(report, comp.basis()).tagged(TheoremTag::GeneralSufficient))
}

/// Necessary condition: positivity of the trace form together with the real
/// parts of the weights on the center of the nilradical. `NotExists` here is
/// a certificate of nonexistence; `Exists` only means the necessary condition
/// passed.
pub fn decide_general_necessary(g: &LieAlgebra) -> Result<DecisionReport, DecideError> {
    if g.is_unimodular() {
        return Ok(DecisionReport {
            verdict: Verdict::NotExists,
            witness: None,
            theorem: TheoremTag::Unimodularity,
            margin: f64::NEG_INFINITY,
            detail: "unimodular solvable algebra: any metric with Ric <= 0 is Ricci-flat".into(),
        });
    }
    let nil = g.nilradical()?;
    let (sub, sub_basis) = g.subalgebra(&nil)?;
    let center_sub = sub.center();
    // center of n in g coordinates
    let center_basis = &sub_basis * center_sub.basis();
    let comp = nil.complement();
    let m = comp.dim();
    if m == 0 {
        return Ok(DecisionReport {
            verdict: Verdict::NotExists,
            witness: None,
            theorem: TheoremTag::GeneralNecessary,
            margin: f64::NEG_INFINITY,
            detail: "nilpotent algebra".into(),
        });
    }
    let generators: Vec<_> = (0..m)
        .map(|k| {
            let y = comp.basis().column(k).into_owned();
            center_basis.transpose() * g.adjoint_matrix(&y).expect("dims agree") * &center_basis
        })
        .collect();
    let wd = triangulate::real_block_triangularize(&generators)?;
    let mut forms = Vec::new();
    // trace form restricted to the complement
    let tau = g.trace_form();
    forms.push(LinearForm::new(comp.basis().transpose() * tau));
    for b in wd.blocks() {
        match b {
            WeightBlock::Real { lambda } => forms.push(lambda.clone()),
            WeightBlock::Pair { alpha, .. } => forms.push(alpha.clone()),
        }
    }
    let report = lp_strict_feasible(&StrictSystem { forms, extra: None })?;
    Ok(lift_witness(report, comp.basis()).tagged(TheoremTag::GeneralNecessary))
}

/// The Heisenberg criterion: existence of `Y` with
/// `lambda(Y) + sum over weights with negative real part > 0`,
/// maximized as the concave function
/// `lambda(Y) + sum_i q_i min(0, Re d_i(Y))`. Both verdicts are certificates.
pub fn decide_heisenberg(
    g: &LieAlgebra,
    hd: &HeisenbergData,
) -> Result<DecisionReport, DecideError> {
    assert_eq!(hd.complement.nrows(), g.dim(), "heisenberg data does not match the algebra");
    let comp = &hd.complement;
    let lambda_c = LinearForm::new(comp.transpose() * hd.lambda.coeffs());
    let mut min_terms = Vec::new();
    for b in hd.dforms.blocks() {
        match b {
            WeightBlock::Real { lambda } => min_terms.push((lambda.clone(), 1.0)),
            WeightBlock::Pair { alpha, .. } => min_terms.push((alpha.clone(), 2.0)),
        }
    }
    let sys = StrictSystem {
        forms: Vec::new(),
        extra: Some(ConcaveExtra { linear: lambda_c, min_terms }),
    };
    let report = lp_strict_feasible(&sys)?;
    Ok(lift_witness(report, comp).tagged(TheoremTag::HeisenbergIff))
}

/// The filiform criterion: existence of `Y` with `lambda(Y) > 0` and
/// `iota(Y) > 0`. Both verdicts are certificates.
pub fn decide_filiform(g: &LieAlgebra, fd: &FiliformData) -> Result<DecisionReport, DecideError> {
    assert_eq!(fd.complement.nrows(), g.dim(), "filiform data does not match the algebra");
    let comp = &fd.complement;
    let forms = vec![
        LinearForm::new(comp.transpose() * fd.lambda.coeffs()),
        LinearForm::new(comp.transpose() * fd.iota.coeffs()),
    ];
    let report = lp_strict_feasible(&StrictSystem { forms, extra: None })?;
    Ok(lift_witness(report, comp).tagged(TheoremTag::FiliformIff))
}

/// Map an LP witness from complement coordinates back to algebra coordinates.
fn lift_witness(mut report: DecisionReport, basis: &nalgebra::DMatrix<f64>) -> DecisionReport {
    if let Some(w) = report.witness.take() {
        report.witness = Some(basis * w);
    }
    report
}
