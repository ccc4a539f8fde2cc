//! kind = uniqueness: solve from several random starts and report the
//! largest pairwise sup gap between the solutions.

use super::{build_density, build_form, Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::field::PeriodicField;
use ma_core::solver::{make_admissible, random_smooth_field, uniqueness_probe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const GAP_TOL: f64 = 1e-6;

#[derive(Serialize)]
struct UniquenessPayload {
    t: f64,
    inits: usize,
    max_pairwise_sup_gap: f64,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    if cfg.uniqueness_inits < 2 {
        return Err(Error::Config("[uniqueness] inits must be >= 2".into()));
    }
    let omega = build_form(cfg)?;
    let grid = *omega.grid();
    let f = build_density(cfg, grid)?;

    let eps_first = *cfg.solver.eps_schedule.first().unwrap_or(&0.0);
    let omega_first = omega.regularized(eps_first)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inits = vec![PeriodicField::zeros(grid)];
    while inits.len() < cfg.uniqueness_inits {
        let raw = random_smooth_field(grid, &mut rng, 3, cfg.uniqueness_amplitude);
        inits.push(make_admissible(&raw, &omega_first, 0.5));
    }

    let probe = uniqueness_probe(&omega, &f, &cfg.solver, &inits)?;
    emitter.check(
        "solutions_agree",
        probe.max_pairwise_sup_gap <= GAP_TOL,
        format!("max pairwise gap {:.3e} <= {GAP_TOL:.0e}", probe.max_pairwise_sup_gap),
    );

    let rows = vec![TableRow {
        case_id: cfg.case_id.clone(),
        grid_m: grid.samples_per_axis(),
        eps: *cfg.solver.eps_schedule.last().unwrap_or(&0.0),
        residual_sup: f64::NAN,
        sup_norm: f64::NAN,
        l2_gap: None,
        sup_gap: Some(probe.max_pairwise_sup_gap),
    }];

    emitter.report(
        cfg,
        UniquenessPayload {
            t: cfg.solver.t,
            inits: probe.runs,
            max_pairwise_sup_gap: probe.max_pairwise_sup_gap,
        },
        rows,
    )?;
    Ok(())
}
