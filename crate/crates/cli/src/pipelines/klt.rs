//! kind = klt: the exponent-arithmetic check plus the quadrature oracle
//! that certifies integrability of |z|^(2a) against the analytic
//! threshold a > -1 per complex factor.

use super::{Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::density::integrability_quadrature;
use ma_core::{klt_check, KltSpec};
use serde::Serialize;

#[derive(Serialize)]
struct QuadratureCase {
    a: f64,
    analytic_integrable: bool,
    verdict_integrable: bool,
    mass_sequence: Vec<f64>,
}

#[derive(Serialize)]
struct KltPayload {
    exponents: Vec<(f64, f64)>,
    eps: f64,
    klt: bool,
    margin: f64,
    quadrature: Vec<QuadratureCase>,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let spec = KltSpec {
        exponents: cfg.klt_exponents.clone(),
    };
    let report = klt_check(&spec, cfg.klt_eps)?;
    emitter.check(
        "klt_margin_formula",
        report.margin.is_finite(),
        format!("klt = {}, margin = {:.6}", report.klt, report.margin),
    );

    let mut quadrature = Vec::new();
    for &a in &cfg.klt_quadrature {
        let q = integrability_quadrature(a, 1, cfg.klt_refinements)?;
        let analytic = a > -1.0;
        emitter.check(
            format!("quadrature_matches_threshold_a{a}"),
            q.integrable == analytic,
            format!("verdict {} vs analytic {}", q.integrable, analytic),
        );
        quadrature.push(QuadratureCase {
            a,
            analytic_integrable: analytic,
            verdict_integrable: q.integrable,
            mass_sequence: q.mass_sequence,
        });
    }

    emitter.report(
        cfg,
        KltPayload {
            exponents: cfg.klt_exponents.clone(),
            eps: cfg.klt_eps,
            klt: report.klt,
            margin: report.margin,
            quadrature,
        },
        Vec::<TableRow>::new(),
    )?;
    Ok(())
}
