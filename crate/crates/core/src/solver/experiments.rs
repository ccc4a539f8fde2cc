//! Empirical studies layered on the solver: uniqueness probes, the
//! stability and Hoelder exponent experiments, the closed-form sup-norm
//! bound audit, and field synthesis helpers for randomized batteries.

use super::{
    solve_exponential_from, solve_fixed_rhs_from, Normalization, SolveError, SolverConfig,
};
use crate::capacity::{cap_omega, mask_from_sublevel};
use crate::density::{normalize, Density};
use crate::field::{complex_hessian, norm, translate, NormKind, PeriodicField, ReferenceForm};
use crate::grid::GridSpec;
use crate::linalg;
use crate::solver::SolveReport;
use crate::util;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// phi - max(phi) + level; the maximum lands on `level` exactly.
pub fn normalize_sup(phi: &PeriodicField, level: f64) -> PeriodicField {
    let max = phi.max();
    let mut out = phi.clone();
    for v in out.values_mut() {
        *v = *v - max + level;
    }
    out
}

/// Random trigonometric field: a seeded sum of plane waves with integer
/// wave vectors of sup-norm at most two.
pub fn random_smooth_field(
    grid: GridSpec,
    rng: &mut impl Rng,
    waves: usize,
    amplitude: f64,
) -> PeriodicField {
    let axes = grid.axes();
    let mut terms: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(waves);
    for _ in 0..waves {
        let mut k = vec![0.0; axes];
        while k.iter().all(|&v| v == 0.0) {
            for kv in k.iter_mut() {
                *kv = rng.gen_range(-2i64..=2) as f64;
            }
        }
        let amp = amplitude * rng.gen_range(0.2..1.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        terms.push((amp, k, phase));
    }
    let period = grid.period();
    PeriodicField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(amp, k, phase)| {
                let dot: f64 = k.iter().zip(x).map(|(kv, xv)| kv * xv).sum();
                amp * (2.0 * PI * dot / period + phase).cos()
            })
            .sum()
    })
}

/// Rescale a field until omega + Hess(phi) stays positive definite with a
/// relative safety margin in (0, 1).
pub fn make_admissible(
    phi: &PeriodicField,
    omega: &ReferenceForm,
    safety: f64,
) -> PeriodicField {
    assert!(safety > 0.0 && safety <= 1.0);
    let n = omega.grid().complex_dim();
    let feasible = |candidate: &PeriodicField| -> bool {
        let hess = complex_hessian(candidate);
        let mut m = vec![Complex64::default(); n * n];
        for node in 0..omega.grid().nodes() {
            for (dst, (a, b)) in m.iter_mut().zip(omega.at(node).iter().zip(hess.at(node))) {
                *dst = a + b;
            }
            if linalg::herm_min_eig(&m, n) <= 0.0 {
                return false;
            }
        }
        true
    };

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    if feasible(phi) {
        lo = 1.0;
    } else {
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let mut trial = phi.clone();
            trial.scale(mid);
            if feasible(&trial) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let mut out = phi.clone();
    out.scale(safety * lo);
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub max_pairwise_sup_gap: f64,
    pub runs: usize,
}

/// Solve from every initial guess and report the largest pairwise sup
/// distance between the (normalized) solutions.
pub fn uniqueness_probe(
    omega: &ReferenceForm,
    f: &Density,
    cfg: &SolverConfig,
    inits: &[PeriodicField],
) -> Result<UniquenessReport, SolveError> {
    assert!(inits.len() >= 2, "need at least two initial guesses");
    let mut solutions = Vec::with_capacity(inits.len());
    for init in inits {
        let report = if cfg.t > 0.0 {
            solve_exponential_from(omega, f, cfg, Some(init))?
        } else {
            let mut c = cfg.clone();
            c.normalization = Normalization::SupMinusOne;
            solve_fixed_rhs_from(omega, f, &c, Some(init))?
        };
        solutions.push(report.phi);
    }
    let mut gap = 0.0f64;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            gap = gap.max(solutions[i].sup_distance(&solutions[j]));
        }
    }
    Ok(UniquenessReport {
        max_pairwise_sup_gap: gap,
        runs: solutions.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    /// (l2 gap, sup gap) per perturbation, zero pairs excluded.
    pub pairs: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    /// 2 / (2 + n q) with q the conjugate exponent of p.
    pub threshold: f64,
    /// The fit is a consistency check against the threshold, not a
    /// reproduction of the estimate.
    pub consistency_check_only: bool,
}

/// Solve for the base density and each perturbation, then fit the log-log
/// slope of the sup gap against the L2 gap between normalized solutions.
pub fn stability_experiment(
    omega: &ReferenceForm,
    f: &Density,
    perturbations: &[Density],
    p: f64,
    cfg: &SolverConfig,
) -> Result<StabilityReport, SolveError> {
    assert!(p > 1.0, "stability experiment requires p > 1");
    let n = omega.grid().complex_dim() as f64;
    let q = p / (p - 1.0);
    let threshold = 2.0 / (2.0 + n * q);

    let mut c = cfg.clone();
    c.t = 0.0;
    c.normalization = Normalization::SupMinusOne;
    let base = solve_fixed_rhs_from(omega, &normalize(f, 1.0)?, &c, None)?;

    let mut pairs = Vec::new();
    for g in perturbations {
        let sol = solve_fixed_rhs_from(omega, &normalize(g, 1.0)?, &c, Some(&base.phi))?;
        let mut diff = sol.phi.clone();
        diff.axpy(-1.0, &base.phi);
        let l2 = norm(&diff, NormKind::L2, None);
        let sup = norm(&diff, NormKind::Sup, None);
        if l2 > 1e-13 {
            pairs.push((l2, sup));
        }
    }

    let fitted_exponent = if pairs.len() >= 2 {
        let xs: Vec<f64> = pairs.iter().map(|(l2, _)| l2.ln()).collect();
        let ys: Vec<f64> = pairs.iter().map(|(_, sup)| sup.ln()).collect();
        util::lsq_slope(&xs, &ys)
    } else {
        f64::NAN
    };

    Ok(StabilityReport {
        pairs,
        fitted_exponent,
        threshold,
        consistency_check_only: true,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderReport {
    /// Log-log slope of sup|phi(. + h) - phi| against |h|; infinite for
    /// translation-invariant fields.
    pub gamma_obs: f64,
    pub table: Vec<(f64, f64)>,
    pub all_gaps_zero: bool,
}

/// Observed Hoelder exponent from integer-shift translates.
pub fn holder_estimate(phi: &PeriodicField, shifts: &[Vec<i64>]) -> HolderReport {
    assert!(!shifts.is_empty(), "need at least one shift");
    let h = phi.grid().h();
    let mut table = Vec::new();
    for shift in shifts {
        assert!(
            shift.iter().any(|&s| s != 0),
            "shifts must be nonzero"
        );
        let dist = h * shift
            .iter()
            .map(|&s| (s as f64) * (s as f64))
            .sum::<f64>()
            .sqrt();
        let gap = translate(phi, shift).sup_distance(phi);
        table.push((dist, gap));
    }
    let nonzero: Vec<&(f64, f64)> = table.iter().filter(|(_, g)| *g > 1e-15).collect();
    let all_gaps_zero = nonzero.is_empty();
    let gamma_obs = if all_gaps_zero {
        f64::INFINITY
    } else if nonzero.len() == 1 {
        (nonzero[0].1.ln()) / (nonzero[0].0.ln())
    } else {
        let xs: Vec<f64> = nonzero.iter().map(|(d, _)| d.ln()).collect();
        let ys: Vec<f64> = nonzero.iter().map(|(_, g)| g.ln()).collect();
        util::lsq_slope(&xs, &ys)
    };
    HolderReport {
        gamma_obs,
        table,
        all_gaps_zero,
    }
}

/// Largest value of [s Cap(phi < -s)]^(1/n) over a threshold sweep: the
/// constant C1 in the sublevel capacity decay Cap(phi < -s) <= C1^n / s.
pub fn calibrate_c1(phi: &PeriodicField, omega: &ReferenceForm, levels: usize) -> f64 {
    assert!(levels >= 2);
    let n = omega.grid().complex_dim() as f64;
    let depth = -phi.min();
    let mut c1: f64 = 0.0;
    for i in 1..=levels {
        let s = depth * i as f64 / (levels as f64 + 1.0);
        if s <= 0.0 {
            continue;
        }
        let mask = mask_from_sublevel(phi, s);
        if mask.iter().all(|&b| !b) {
            continue;
        }
        let cap = cap_omega(&mask, omega).value;
        c1 = c1.max((s * cap).powf(1.0 / n));
    }
    c1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub bound: f64,
    pub actual: f64,
    pub within: bool,
    pub alpha: f64,
    pub a_constant: f64,
    pub c1: f64,
}

/// Evaluate the closed-form sup bound 2^(n/alpha) C1^n A^(1/alpha) +
/// 1/(1 - 2^-alpha) and compare with the solution's sup norm.
pub fn linf_bound_audit(
    report: &SolveReport,
    n: usize,
    alpha: f64,
    a_constant: f64,
    c1: f64,
) -> AuditReport {
    assert!(alpha > 0.0 && a_constant >= 0.0 && c1 >= 0.0);
    let nf = n as f64;
    let bound = 2.0f64.powf(nf / alpha) * c1.powf(nf) * a_constant.powf(1.0 / alpha)
        + 1.0 / (1.0 - 0.5f64.powf(alpha));
    let actual = util::sup_abs(report.phi.values());
    AuditReport {
        bound,
        actual,
        within: actual <= bound,
        alpha,
        a_constant,
        c1,
    }
}

/// Manufactured smooth potential with a hand-differentiated continuum
/// Monge-Ampere density against the flat form, for convergence studies.
/// Supported in complex dimension 1 and 2.
pub fn continuum_mms(grid: GridSpec, amplitude: f64) -> (PeriodicField, Density) {
    let n = grid.complex_dim();
    assert!(n == 1 || n == 2, "continuum oracle covers n = 1, 2");
    let tau = 2.0 * PI / grid.period();
    let a = amplitude;
    match n {
        1 => {
            let phi = PeriodicField::from_fn(grid, |x| a * (tau * x[0]).cos() * (tau * x[1]).cos());
            let det = PeriodicField::from_fn(grid, |x| {
                // H11 = (phi_xx + phi_yy)/4 = -a tau^2/2 cos cos
                1.0 - 0.5 * a * tau * tau * (tau * x[0]).cos() * (tau * x[1]).cos()
            });
            let f = Density::new(grid, det.into_values()).expect("positive for small amplitude");
            (phi, f)
        }
        _ => {
            let b = 0.5 * a;
            let phi = PeriodicField::from_fn(grid, |x| {
                a * (tau * x[0]).cos() * (tau * x[1]).cos()
                    + a * (tau * x[2]).cos() * (tau * x[3]).cos()
                    + b * (tau * (x[0] + x[2])).cos()
            });
            let det = PeriodicField::from_fn(grid, |x| {
                let c1 = (tau * x[0]).cos() * (tau * x[1]).cos();
                let c2 = (tau * x[2]).cos() * (tau * x[3]).cos();
                let cm = (tau * (x[0] + x[2])).cos();
                let h11 = -0.5 * a * tau * tau * c1 - 0.25 * b * tau * tau * cm;
                let h22 = -0.5 * a * tau * tau * c2 - 0.25 * b * tau * tau * cm;
                let h12 = -0.25 * b * tau * tau * cm;
                (1.0 + h11) * (1.0 + h22) - h12 * h12
            });
            let f = Density::new(grid, det.into_values()).expect("positive for small amplitude");
            (phi, f)
        }
    }
}
