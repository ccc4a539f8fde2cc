//! kind = audit: solve, measure the domination constant on the standard
//! set battery, calibrate the sublevel capacity constant, and evaluate
//! the closed-form sup bound against the solution.

use super::{build_density, build_form, Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::capacity::{h_condition, standard_test_sets, HConditionReport};
use ma_core::solver::{calibrate_c1, linf_bound_audit, solve_fixed_rhs, AuditReport};
use serde::Serialize;

#[derive(Serialize)]
struct AuditPayload {
    alpha: f64,
    h_condition: HConditionReport,
    c1: f64,
    audit: AuditReport,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let omega = build_form(cfg)?;
    let grid = *omega.grid();
    let f = build_density(cfg, grid)?;

    let solve = solve_fixed_rhs(&omega, &f, &cfg.solver)?;
    emitter.check(
        "solver_converged",
        solve.converged,
        format!("residual {:.3e}", solve.final_residual),
    );

    // capacity work happens against the regularized form actually used by
    // the final solver stage, so degenerate backgrounds stay meaningful
    let eps_last = *solve.eps_used.last().unwrap_or(&0.0);
    let omega_cap = omega.regularized(eps_last)?;

    let sets = standard_test_sets(&grid, Some(&solve.phi));
    let h_report = h_condition(&f, &omega_cap, cfg.audit_alpha, &sets, None)?;
    emitter.check(
        "domination_constant_finite",
        h_report.a_hat.is_finite(),
        format!("A = {:.6e} (worst set {})", h_report.a_hat, h_report.worst_set),
    );

    let c1 = calibrate_c1(&solve.phi, &omega_cap, 12);
    let audit = linf_bound_audit(
        &solve,
        grid.complex_dim(),
        cfg.audit_alpha,
        h_report.a_hat,
        c1,
    );
    emitter.check(
        "sup_norm_within_bound",
        audit.within,
        format!("actual {:.6} <= bound {:.6}", audit.actual, audit.bound),
    );

    let rows = vec![TableRow {
        case_id: cfg.case_id.clone(),
        grid_m: grid.samples_per_axis(),
        eps: eps_last,
        residual_sup: solve.final_residual,
        sup_norm: solve.sup_norm,
        l2_gap: None,
        sup_gap: None,
    }];

    emitter.field("phi.bin", &solve.phi)?;
    emitter.report(
        cfg,
        AuditPayload {
            alpha: cfg.audit_alpha,
            h_condition: h_report,
            c1,
            audit,
        },
        rows,
    )?;
    Ok(())
}
