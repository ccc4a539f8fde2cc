//! Damped Newton iteration on the pointwise logarithmic residual
//!
//!   F(phi)(x) = log det(omega_eps + Hess(phi))(x) - t phi(x) - rhs_log(x) - gamma
//!
//! with an epsilon-continuation outer loop. For t = 0 the unknown carries
//! the mean-zero gauge and the scalar gamma floats to absorb the discrete
//! mass defect of the quadrature; for t > 0 the residual is monotone in
//! phi and needs no gauge.

use super::linear::{bicgstab, LinearError, NewtonOperator};
use super::{SolveError, SolverConfig};
use crate::field::{complex_hessian, PeriodicField, ReferenceForm};
use crate::linalg;
use crate::util;
use num_complex::Complex64;

/// Eigenvalue floor below which a node matrix counts as having left the
/// positive cone; the line search rejects such steps.
pub const POS_FLOOR: f64 = 1e-12;
/// Line-search floor 2^-20.
pub const DAMPING_FLOOR: f64 = 9.5367431640625e-7;
/// Relative residual contract for the inner linear solves.
pub const LINEAR_TOL: f64 = 1e-12;

pub(super) struct StageOutcome {
    pub phi: PeriodicField,
    pub gamma: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Node matrices omega_eps + Hess(phi) together with their determinants
/// and the grid minimum eigenvalue.
struct Assembled {
    matrices: Vec<Complex64>,
    dets: Vec<f64>,
    margin: f64,
}

fn assemble(omega_eps: &ReferenceForm, phi: &PeriodicField) -> Assembled {
    let grid = *omega_eps.grid();
    let n = grid.complex_dim();
    let hess = complex_hessian(phi);
    let mut matrices = vec![Complex64::default(); grid.nodes() * n * n];
    let mut dets = vec![0.0; grid.nodes()];
    let mut margin = f64::INFINITY;
    for node in 0..grid.nodes() {
        let dst = &mut matrices[node * n * n..(node + 1) * n * n];
        for (d, (a, b)) in dst
            .iter_mut()
            .zip(omega_eps.at(node).iter().zip(hess.at(node)))
        {
            *d = a + b;
        }
        dets[node] = linalg::herm_det(dst, n);
        margin = margin.min(linalg::herm_min_eig(dst, n));
    }
    Assembled {
        matrices,
        dets,
        margin,
    }
}

pub(super) fn positivity_margin(omega: &ReferenceForm, phi: &PeriodicField) -> f64 {
    assemble(omega, phi).margin
}

/// Shrink phi toward its mean until omega_eps + Hess(phi) clears the
/// positivity floor. Fails only if the form itself is not positive.
pub(super) fn ensure_feasible(
    omega_eps: &ReferenceForm,
    phi: &PeriodicField,
) -> Result<PeriodicField, SolveError> {
    if assemble(omega_eps, phi).margin > POS_FLOOR {
        return Ok(phi.clone());
    }
    let mean = phi.mean();
    let mut scale = 0.5;
    for _ in 0..60 {
        let mut trial = phi.clone();
        trial.shift_values(-mean);
        trial.scale(scale);
        trial.shift_values(mean);
        if assemble(omega_eps, &trial).margin > POS_FLOOR {
            return Ok(trial);
        }
        scale *= 0.5;
    }
    let base_margin = omega_eps.min_eigenvalue();
    Err(SolveError::Infeasible {
        margin: base_margin,
    })
}

/// Newton iteration at a fixed regularization stage. `rhs_log` must hold
/// log(lambda_eps det_ref f) for t = 0 and log(det_ref f) for t > 0.
pub(super) fn newton_stage(
    omega_eps: &ReferenceForm,
    rhs_log: &[f64],
    t: f64,
    mean_gauge: bool,
    init: PeriodicField,
    cfg: &SolverConfig,
) -> Result<StageOutcome, SolveError> {
    let grid = *omega_eps.grid();
    let n = grid.complex_dim();
    let nodes = grid.nodes();

    let mut phi = init;
    let mut gamma = 0.0f64;
    let mut assembled = assemble(omega_eps, &phi);
    if assembled.margin <= POS_FLOOR {
        return Err(SolveError::Infeasible {
            margin: assembled.margin,
        });
    }

    let residual = |a: &Assembled, phi: &PeriodicField, gamma: f64| -> Vec<f64> {
        (0..nodes)
            .map(|i| a.dets[i].ln() - t * phi.values()[i] - rhs_log[i] - gamma)
            .collect()
    };

    let mut f = residual(&assembled, &phi, gamma);
    let mut residuals = vec![util::sup_abs(&f)];
    let mut iterations = 0;

    for _ in 0..cfg.max_newton {
        if *residuals.last().unwrap() <= cfg.newton_tol {
            return Ok(StageOutcome {
                phi,
                gamma,
                residuals,
                iterations,
                converged: true,
            });
        }

        // per-node inverses for the linearized operator
        let mut w_inv = vec![Complex64::default(); nodes * n * n];
        for node in 0..nodes {
            let src = &assembled.matrices[node * n * n..(node + 1) * n * n];
            linalg::herm_inverse(src, n, &mut w_inv[node * n * n..(node + 1) * n * n]);
        }
        let op = NewtonOperator::new(grid, &w_inv, t, mean_gauge);

        let rhs: Vec<f64> = if mean_gauge {
            let mean = util::mean(&f);
            f.iter().map(|v| v - mean).collect()
        } else {
            f.clone()
        };
        // absolute floor: the projected right-hand side can sit at the
        // rounding scale of the full residual
        let abs_floor = 1e-13 * util::rms(&f) * (nodes as f64).sqrt();
        let (mut step, _) = bicgstab(&op, &rhs, LINEAR_TOL, abs_floor, cfg.max_linear)
            .map_err(|e| lift_linear(e, *residuals.last().unwrap()))?;

        let gamma_step = if mean_gauge {
            let mean_step = util::mean(&step);
            for v in step.iter_mut() {
                *v -= mean_step;
            }
            let mut a_step = vec![0.0; nodes];
            op.apply_raw(&step, &mut a_step);
            util::mean(&f) - util::mean(&a_step)
        } else {
            0.0
        };

        // halving line search guarded by the positivity floor
        let f_rms = util::rms(&f);
        let mut alpha = 1.0f64;
        let mut accepted = false;
        while alpha >= DAMPING_FLOOR {
            let mut trial = phi.clone();
            let tv = trial.values_mut();
            for (v, s) in tv.iter_mut().zip(&step) {
                *v += alpha * s;
            }
            let trial_gamma = gamma + alpha * gamma_step;
            let trial_assembled = assemble(omega_eps, &trial);
            if trial_assembled.margin > POS_FLOOR {
                let trial_f = residual(&trial_assembled, &trial, trial_gamma);
                if util::rms(&trial_f) <= (1.0 - 1e-4 * alpha) * f_rms {
                    phi = trial;
                    gamma = trial_gamma;
                    assembled = trial_assembled;
                    f = trial_f;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SolveError::NewtonDivergence {
                residual: *residuals.last().unwrap(),
                alpha_floor: DAMPING_FLOOR,
            });
        }
        iterations += 1;
        residuals.push(util::sup_abs(&f));
    }

    let converged = *residuals.last().unwrap() <= cfg.newton_tol;
    Ok(StageOutcome {
        phi,
        gamma,
        residuals,
        iterations,
        converged,
    })
}

fn lift_linear(e: LinearError, residual: f64) -> SolveError {
    SolveError::LinearSolve {
        detail: e.to_string(),
        newton_residual: residual,
    }
}
