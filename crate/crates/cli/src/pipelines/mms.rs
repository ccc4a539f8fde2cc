//! kind = mms: manufactured-solution study. Per grid: discrete-oracle
//! recovery for t = 0 and t = 1 (exact up to solver tolerance) and the
//! continuum-oracle error whose decay under refinement gives the
//! convergence order.

use super::{Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::density::{normalize, Density};
use ma_core::field::{ma_measure, norm, prolong, NormKind, PeriodicField};
use ma_core::solver::{
    continuum_mms, normalize_sup, solve_exponential_from, solve_fixed_rhs_from, SolverConfig,
};
use ma_core::{GridSpec, ReferenceForm};
use serde::Serialize;

#[derive(Serialize)]
struct MmsCase {
    grid_m: usize,
    t0_recovery_gap: f64,
    t1_recovery_gap: f64,
    continuum_sup_err: f64,
    continuum_l2_err: f64,
}

#[derive(Serialize)]
struct MmsPayload {
    amplitude: f64,
    cases: Vec<MmsCase>,
    observed_orders: Vec<f64>,
}

const RECOVERY_TOL: f64 = 1e-8;
const ORDER_BAND: (f64, f64) = (1.9, 2.1);

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let base = super::required_grid(cfg)?;
    let n = base.complex_dim();
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    let mut last_phi = None;
    // coarse-to-fine continuation: each grid warm-starts from the
    // prolonged solution of the previous one
    let mut warm: Option<(PeriodicField, PeriodicField)> = None;

    for &m in &cfg.mms_grids {
        let grid = GridSpec::new(n, m, base.period())
            .map_err(|e| Error::Config(format!("[mms] grids: {e}")))?;
        let omega = ReferenceForm::flat(grid);
        let (phi_star, f_cont) = continuum_mms(grid, cfg.mms_amplitude);
        let expected = normalize_sup(&phi_star, -1.0);

        let (init_t0, init_t1) = match &warm {
            Some((a, b)) if a.grid().samples_per_axis() * 2 == m => {
                (Some(prolong(a, grid)?), Some(prolong(b, grid)?))
            }
            _ => (None, None),
        };

        // discrete oracle, t = 0: right-hand side from the discrete
        // operator itself, recovery is exact up to solver tolerance
        let f_disc = normalize(&ma_measure(&phi_star, &omega), 1.0)?;
        let t0_cfg = SolverConfig {
            t: 0.0,
            ..cfg.solver.clone()
        };
        let t0 = solve_fixed_rhs_from(&omega, &f_disc, &t0_cfg, init_t0.as_ref())?;
        let t0_gap = t0.phi.sup_distance(&expected);

        // discrete oracle, t = 1: absorb e^(-t phi*) into the density
        let t = 1.0;
        let vals: Vec<f64> = ma_measure(&phi_star, &omega)
            .values()
            .iter()
            .zip(phi_star.values())
            .map(|(&d, &p)| d * (-t * p).exp())
            .collect();
        let f_exp = Density::new(grid, vals)?;
        let t1_cfg = SolverConfig {
            t,
            normalization: ma_core::solver::Normalization::None,
            ..cfg.solver.clone()
        };
        let t1 = solve_exponential_from(&omega, &f_exp, &t1_cfg, init_t1.as_ref())?;
        let t1_gap = t1.phi.sup_distance(&phi_star);

        // continuum oracle: the sampled analytic density differs from the
        // discrete operator by O(h^2), and so does the recovered field
        let f_c = normalize(&f_cont, 1.0)?;
        let cont = solve_fixed_rhs_from(&omega, &f_c, &t0_cfg, init_t0.as_ref())?;
        let mut diff = cont.phi.clone();
        diff.axpy(-1.0, &expected);
        let cont_sup = norm(&diff, NormKind::Sup, None);
        let cont_l2 = norm(&diff, NormKind::L2, None);
        warm = Some((t0.phi.clone(), t1.phi.clone()));

        emitter.check(
            format!("t0_recovery_m{m}"),
            t0.converged && t0_gap <= RECOVERY_TOL,
            format!("gap {t0_gap:.3e}"),
        );
        emitter.check(
            format!("t1_recovery_m{m}"),
            t1.converged && t1_gap <= RECOVERY_TOL,
            format!("gap {t1_gap:.3e}"),
        );

        rows.push(TableRow {
            case_id: cfg.case_id.clone(),
            grid_m: m,
            eps: *t0.eps_used.last().unwrap_or(&0.0),
            residual_sup: t0.final_residual,
            sup_norm: t0.sup_norm,
            l2_gap: Some(cont_l2),
            sup_gap: Some(cont_sup),
        });
        cases.push(MmsCase {
            grid_m: m,
            t0_recovery_gap: t0_gap,
            t1_recovery_gap: t1_gap,
            continuum_sup_err: cont_sup,
            continuum_l2_err: cont_l2,
        });
        last_phi = Some(cont.phi);
    }

    let observed_orders: Vec<f64> = cases
        .windows(2)
        .map(|w| (w[0].continuum_sup_err / w[1].continuum_sup_err).log2())
        .collect();
    let orders_ok = !observed_orders.is_empty()
        && observed_orders
            .iter()
            .all(|&o| o >= ORDER_BAND.0 && o <= ORDER_BAND.1);
    emitter.check(
        "convergence_order_in_band",
        orders_ok,
        format!("orders {observed_orders:?} in [{}, {}]", ORDER_BAND.0, ORDER_BAND.1),
    );

    if let Some(phi) = last_phi {
        emitter.field("phi.bin", &phi)?;
    }
    emitter.report(
        cfg,
        MmsPayload {
            amplitude: cfg.mms_amplitude,
            cases,
            observed_orders,
        },
        rows,
    )?;
    Ok(())
}
