//! kind = solve: one equation, one report.

use super::{build_density, build_form, Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::density::lp_estimate;
use ma_core::solver::{solve_exponential, solve_fixed_rhs, SolveReport};
use serde::Serialize;

#[derive(Serialize)]
struct SolvePayload {
    grid_n: usize,
    grid_m: usize,
    t: f64,
    solve: SolveReport,
    lp_check: Option<LpSummary>,
}

#[derive(Serialize)]
struct LpSummary {
    p: f64,
    in_lp: bool,
    norm_sequence: Vec<f64>,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let omega = build_form(cfg)?;
    let grid = *omega.grid();
    let f = build_density(cfg, grid)?;

    let lp_check = match cfg.density.lp_p {
        None => None,
        Some(p) => {
            let report = lp_estimate(&f, p, 3)?;
            emitter.check(
                "density_in_lp",
                report.in_lp,
                format!("p = {p}, norms {:?}", report.norm_sequence),
            );
            Some(LpSummary {
                p,
                in_lp: report.in_lp,
                norm_sequence: report.norm_sequence,
            })
        }
    };

    let report = if cfg.solver.t > 0.0 {
        solve_exponential(&omega, &f, &cfg.solver)?
    } else {
        solve_fixed_rhs(&omega, &f, &cfg.solver)?
    };

    emitter.check(
        "solver_converged",
        report.converged,
        format!("final residual {:.3e}", report.final_residual),
    );
    if report.converged {
        emitter.check(
            "residual_within_tol",
            report.final_residual <= cfg.solver.newton_tol,
            format!(
                "{:.3e} <= {:.1e}",
                report.final_residual, cfg.solver.newton_tol
            ),
        );
    }

    let rows: Vec<TableRow> = report
        .eps_used
        .iter()
        .zip(&report.residual_history)
        .map(|(&eps, hist)| TableRow {
            case_id: cfg.case_id.clone(),
            grid_m: grid.samples_per_axis(),
            eps,
            residual_sup: *hist.last().unwrap_or(&f64::NAN),
            sup_norm: report.sup_norm,
            l2_gap: None,
            sup_gap: None,
        })
        .collect();

    emitter.field("phi.bin", &report.phi)?;
    emitter.report(
        cfg,
        SolvePayload {
            grid_n: grid.complex_dim(),
            grid_m: grid.samples_per_axis(),
            t: cfg.solver.t,
            solve: report,
            lp_check,
        },
        rows,
    )?;
    Ok(())
}
