//! Orchestration of the classify → decide → construct chain and the
//! machine-readable rendering of its outcomes.

use negricci::algebra::LieAlgebra;
use negricci::classify::{self, NilradicalClass};
use negricci::construct::{self, Certificate, Presentation};
use negricci::decide::{self, TheoremTag, Verdict};
use negricci::ricci::InnerProduct;
use serde_json::{json, Value};

pub struct PipelineReport {
    pub verdict: Verdict,
    pub theorem: String,
    pub class: String,
    pub margin: Option<f64>,
    pub witness: Option<Vec<f64>>,
    pub detail: Vec<String>,
    pub certificate: Option<Certificate>,
}

pub enum PipelineMode {
    DecideOnly,
    Construct { s_max: usize },
}

/// Run the decision (and optionally construction) pipeline:
/// unimodularity short-circuit, nilradical classification, dispatch to the
/// matching criterion, and construction from the witness when asked.
pub fn run(alg: &LieAlgebra, mode: PipelineMode) -> Result<PipelineReport, String> {
    if !alg.is_solvable() {
        return Err("the algebra is not solvable".into());
    }
    if alg.is_unimodular() {
        return Ok(PipelineReport {
            verdict: Verdict::NotExists,
            theorem: TheoremTag::Unimodularity.to_string(),
            class: classify_label(alg).unwrap_or_else(|e| format!("unclassified ({e})")),
            margin: None,
            witness: None,
            detail: vec![
                "unimodular solvable algebra: any metric with Ric <= 0 is Ricci-flat".into()
            ],
            certificate: None,
        });
    }
    let nil = alg.nilradical().map_err(|e| e.to_string())?;
    let (sub, _) = alg.subalgebra(&nil).map_err(|e| e.to_string())?;
    let cls = classify::classify_nilradical(&sub).map_err(|e| e.to_string())?;
    let class = cls.describe();
    let mut detail = Vec::new();
    let (report, cert) = match &cls {
        NilradicalClass::Abelian => {
            let rep = decide::decide_general_sufficient(alg).map_err(|e| e.to_string())?;
            detail.push(format!(
                "abelian nilradical: positivity of all weights is equivalent to existence \
                 (margin {:.6e})",
                rep.margin
            ));
            let cert = build_cert(alg, &rep, &mode, |w, o| {
                construct::construct_general_opts(alg, w, o)
            })?;
            (rep, cert)
        }
        NilradicalClass::Heisenberg { .. } => {
            let hd = classify::heisenberg_data(alg, &nil, &cls).map_err(|e| e.to_string())?;
            let rep = decide::decide_heisenberg(alg, &hd).map_err(|e| e.to_string())?;
            detail.push(format!("heisenberg criterion margin {:.6e}", rep.margin));
            let cert = build_cert(alg, &rep, &mode, |w, o| {
                construct::construct_heisenberg_opts(alg, &hd, w, o)
            })?;
            (rep, cert)
        }
        NilradicalClass::StandardFiliform { .. } => {
            let fd = classify::filiform_data(alg, &nil, &cls).map_err(|e| e.to_string())?;
            let rep = decide::decide_filiform(alg, &fd).map_err(|e| e.to_string())?;
            detail.push(format!("filiform criterion margin {:.6e}", rep.margin));
            let cert = build_cert(alg, &rep, &mode, |w, o| {
                construct::construct_filiform_opts(alg, &fd, w, o)
            })?;
            (rep, cert)
        }
        NilradicalClass::Other { diagnostics } => {
            let suff = decide::decide_general_sufficient(alg).map_err(|e| e.to_string())?;
            let nec = decide::decide_general_necessary(alg).map_err(|e| e.to_string())?;
            detail.push(format!("nilradical outside the covered families: {diagnostics}"));
            detail.push(format!(
                "sufficient test: {} (margin {:.6e})",
                suff.verdict, suff.margin
            ));
            detail.push(format!(
                "necessary test: {} (margin {:.6e})",
                nec.verdict, nec.margin
            ));
            let combined = match (suff.verdict, nec.verdict) {
                (Verdict::Exists, _) => suff.clone(),
                (_, Verdict::NotExists) => nec.clone(),
                _ => decide::DecisionReport {
                    verdict: Verdict::Unknown,
                    witness: None,
                    theorem: TheoremTag::Pipeline,
                    margin: suff.margin,
                    detail: "necessary and sufficient tests disagree".into(),
                },
            };
            let cert = build_cert(alg, &combined, &mode, |w, o| {
                construct::construct_general_opts(alg, w, o)
            })?;
            (combined, cert)
        }
    };
    Ok(PipelineReport {
        verdict: report.verdict,
        theorem: report.theorem.to_string(),
        class,
        margin: Some(report.margin),
        witness: report.witness.as_ref().map(|w| w.as_slice().to_vec()),
        detail,
        certificate: cert,
    })
}

fn build_cert(
    alg: &LieAlgebra,
    rep: &decide::DecisionReport,
    mode: &PipelineMode,
    construct: impl FnOnce(
        &negricci::nalgebra::DVector<f64>,
        construct::ConstructOptions,
    ) -> Result<Certificate, construct::ConstructError>,
) -> Result<Option<Certificate>, String> {
    let PipelineMode::Construct { s_max } = mode else {
        return Ok(None);
    };
    if rep.verdict != Verdict::Exists {
        return Ok(None);
    }
    let witness = rep.witness.as_ref().ok_or("missing witness for an Exists verdict")?;
    let opts = construct::ConstructOptions { s_max: *s_max };
    let cert = construct(witness, opts).map_err(|e| format!("construction failed: {e}"))?;
    construct::verify_certificate(alg, &cert)
        .map_err(|e| format!("certificate verification failed: {e}"))?;
    Ok(Some(cert))
}

fn classify_label(alg: &LieAlgebra) -> Result<String, String> {
    let nil = alg.nilradical().map_err(|e| e.to_string())?;
    let (sub, _) = alg.subalgebra(&nil).map_err(|e| e.to_string())?;
    Ok(classify::classify_nilradical(&sub).map_err(|e| e.to_string())?.describe())
}

fn matrix_json(m: &negricci::nalgebra::DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| json!(m[(r, c)])).collect()))
            .collect(),
    )
}

/// Certificate as a single machine-readable document.
pub fn certificate_json(cert: &Certificate) -> Value {
    let presentation = match &cert.presentation {
        Presentation::Direct => json!({ "kind": "direct" }),
        Presentation::Transformed { basis, log_scale } => json!({
            "kind": "transformed",
            "basis": matrix_json(basis),
            "log_scale": log_scale.as_slice(),
        }),
        Presentation::Explicit { algebra, note } => json!({
            "kind": "explicit",
            "dim": algebra.dim(),
            "brackets": algebra
                .terms()
                .iter()
                .map(|t| json!({ "i": t.i + 1, "j": t.j + 1, "k": t.k + 1, "c": t.c }))
                .collect::<Vec<_>>(),
            "note": note,
        }),
    };
    json!({
        "verdict": "exists-certified",
        "provenance": cert.provenance.to_string(),
        "presentation": presentation,
        "metric": {
            "dim": cert.metric.dim(),
            "gram": matrix_json(cert.metric.gram()),
        },
        "ricci": matrix_json(&cert.ricci),
        "eigenvalues": cert.eigenvalues,
        "max_eigenvalue": cert.max_eigenvalue,
        "tolerances": {
            "neg_def_rel": cert.tolerances.neg_def_rel,
            "recompute": cert.tolerances.recompute,
        },
    })
}

pub fn metric_json(metric: &InnerProduct) -> Value {
    json!({ "dim": metric.dim(), "gram": matrix_json(metric.gram()) })
}

pub fn report_json(rep: &PipelineReport) -> Value {
    json!({
        "verdict": rep.verdict.to_string(),
        "theorem": rep.theorem,
        "nilradical_class": rep.class,
        "margin": rep.margin,
        "witness": rep.witness,
        "detail": rep.detail,
        "certificate": rep.certificate.as_ref().map(certificate_json),
    })
}
