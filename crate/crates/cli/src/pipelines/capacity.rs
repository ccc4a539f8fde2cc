//! kind = capacity: dictionary capacities over the standard set battery,
//! monotonicity spot checks, and a randomized partial-comparison battery.

use super::{build_form, Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::capacity::{cap_omega, comparison_check, standard_test_sets};
use ma_core::solver::{make_admissible, random_smooth_field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
struct CapRow {
    id: String,
    nodes: usize,
    cap: f64,
    witness: String,
}

#[derive(Serialize)]
struct ComparisonTrial {
    lhs: f64,
    rhs: f64,
    holds: bool,
    set_nodes: usize,
}

#[derive(Serialize)]
struct CapacityPayload {
    caps: Vec<CapRow>,
    comparison_trials: Vec<ComparisonTrial>,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let omega = build_form(cfg)?;
    let grid = *omega.grid();

    let sets = standard_test_sets(&grid, None);
    let mut caps = Vec::new();
    for set in &sets {
        let est = cap_omega(&set.mask, &omega);
        caps.push(CapRow {
            id: set.id.clone(),
            nodes: set.count(),
            cap: est.value,
            witness: est.witness,
        });
    }

    let all_cap = caps
        .iter()
        .find(|c| c.id == "all")
        .map(|c| c.cap)
        .unwrap_or(f64::NAN);
    emitter.check(
        "cap_all_equals_total_mass",
        (all_cap - 1.0).abs() <= 1e-9,
        format!("cap(all) = {all_cap:.12}"),
    );
    let empty = cap_omega(&vec![false; grid.nodes()], &omega);
    emitter.check("cap_empty_is_zero", empty.value == 0.0, empty.witness);

    // nested slabs along axis 0 are ordered by inclusion
    let narrow = caps.iter().find(|c| c.id.starts_with("slab_a0_w") && c.id.ends_with(&format!("w{}", grid.samples_per_axis() / 4)));
    let wide = caps.iter().find(|c| c.id == format!("slab_a0_w{}", grid.samples_per_axis() / 2));
    if let (Some(n), Some(w)) = (narrow, wide) {
        emitter.check(
            "cap_monotone_in_inclusion",
            n.cap <= w.cap + 1e-8,
            format!("{:.6e} <= {:.6e}", n.cap, w.cap),
        );
    }

    // randomized admissible pairs for the partial comparison inequality
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trials = Vec::new();
    let mut all_hold = true;
    for _ in 0..cfg.capacity_trials {
        let phi = make_admissible(
            &random_smooth_field(grid, &mut rng, 4, cfg.capacity_amplitude),
            &omega,
            0.7,
        );
        let psi = make_admissible(
            &random_smooth_field(grid, &mut rng, 4, cfg.capacity_amplitude),
            &omega,
            0.7,
        );
        let r = comparison_check(&phi, &psi, &omega)?;
        all_hold &= r.holds;
        trials.push(ComparisonTrial {
            lhs: r.lhs,
            rhs: r.rhs,
            holds: r.holds,
            set_nodes: r.set_nodes,
        });
    }
    emitter.check(
        "comparison_holds_in_all_trials",
        all_hold,
        format!("{} trials", trials.len()),
    );

    emitter.report(
        cfg,
        CapacityPayload {
            caps,
            comparison_trials: trials,
        },
        Vec::<TableRow>::new(),
    )?;
    Ok(())
}
