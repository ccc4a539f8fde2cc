//! Discrete Monge-Ampere capacity (as a certified dictionary lower bound),
//! the capacity-domination condition checker, and the sublevel decay
//! iteration engine.

mod battery;
mod extremal;
mod profile;

pub use battery::{shipped_profile_battery, BatteryEntry};
pub use extremal::relative_extremal;
pub use profile::{
    decay_iterate, scan_h_constant, verify_h_alpha_b, DecayProfile, DecayReport, HCertificate,
};

use crate::density::{Density, DensityError};
use crate::field::{ma_measure, ma_measure_positive, FieldError, PeriodicField, ReferenceForm};
use crate::grid::GridSpec;
use crate::linalg;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("relaxation sweep did not converge (last change {change:.3e})")]
    NonConvergence {
        change: f64,
        last: Box<PeriodicField>,
    },
    #[error(
        "H(alpha,B) fails at s={s}, t={t}: t f(s+t) = {lhs:.6e} > B f(s)^(1+alpha) = {rhs:.6e}"
    )]
    HViolation { s: f64, t: f64, lhs: f64, rhs: f64 },
    #[error("no sample satisfies f(s)^alpha < 1/(2B) = {threshold:.6e}")]
    NoStart { threshold: f64 },
    #[error("decay iteration cannot terminate: {0}")]
    Engine(String),
    #[error("profile is invalid: {0}")]
    Profile(String),
    #[error("test-set battery must not be empty")]
    EmptyTestSets,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Named node mask used as a Borel test set.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub id: String,
    pub mask: Vec<bool>,
}

impl TestSet {
    pub fn new(id: impl Into<String>, mask: Vec<bool>) -> Self {
        TestSet {
            id: id.into(),
            mask,
        }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// Capacity lower bound together with the dictionary entry achieving it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapEstimate {
    pub value: f64,
    pub witness: String,
}

/// Knobs for the capacity dictionary; defaults suit the shipped grids.
#[derive(Debug, Clone, Copy)]
pub struct CapOptions {
    pub sweeps: usize,
    pub sweep_tol: f64,
    /// Eigenvalue slack accepted when verifying a competitor.
    pub admissibility_tol: f64,
}

impl Default for CapOptions {
    fn default() -> Self {
        CapOptions {
            sweeps: 4000,
            sweep_tol: 1e-11,
            admissibility_tol: 1e-9,
        }
    }
}

/// Lower bound for Cap_omega(K) = sup over omega-psh u in [0,1] of the
/// Monge-Ampere mass of u on K. Every dictionary competitor is verified
/// admissible before its mass counts, so the reported value is a certified
/// lower bound (up to the stated eigenvalue slack).
pub fn cap_omega(mask: &[bool], omega: &ReferenceForm) -> CapEstimate {
    cap_omega_with(mask, omega, CapOptions::default())
}

pub fn cap_omega_with(mask: &[bool], omega: &ReferenceForm, opts: CapOptions) -> CapEstimate {
    let grid = *omega.grid();
    debug_assert_eq!(mask.len(), grid.nodes());
    if mask.iter().all(|&b| !b) {
        return CapEstimate {
            value: 0.0,
            witness: "empty".into(),
        };
    }

    let mut best = CapEstimate {
        value: ma_measure(&PeriodicField::zeros(grid), omega).mass_on(mask),
        witness: "zero".into(),
    };

    // Perron relaxation competitor, rescaled into [0, 1].
    if let Ok(u) = relative_extremal(mask, omega, opts.sweeps, opts.sweep_tol) {
        let lowest = u.min();
        if lowest < 0.0 {
            let mut v = u;
            v.scale(-1.0 / lowest);
            v.shift_values(1.0);
            consider_competitor(&mut best, "extremal", v, mask, omega, opts.admissibility_tol);
        }
    }

    // Smooth bumps at the mask centroid, sharpened by powers of the raised
    // cosine profile.
    let centroid = mask_centroid(mask, &grid);
    for q in [1i32, 2, 4] {
        let bump = PeriodicField::from_fn(grid, |x| {
            let mut b = 1.0;
            for (&xa, &ca) in x.iter().zip(&centroid) {
                let c = (2.0 * std::f64::consts::PI * (xa - ca) / grid.period()).cos();
                b *= (0.5 * (1.0 + c)).powi(q);
            }
            b
        });
        consider_competitor(
            &mut best,
            &format!("bump_q{q}"),
            bump,
            mask,
            omega,
            opts.admissibility_tol,
        );
    }

    best
}

/// Scale a candidate in [0,1] down until omega + Hess(v) clears the
/// admissibility slack, then account its mass on the target set.
fn consider_competitor(
    best: &mut CapEstimate,
    name: &str,
    candidate: PeriodicField,
    mask: &[bool],
    omega: &ReferenceForm,
    tol: f64,
) {
    let grid = *omega.grid();
    let n = grid.complex_dim();
    let admissible = |v: &PeriodicField| -> bool {
        let hess = crate::field::complex_hessian(v);
        let mut m = vec![num_complex::Complex64::default(); n * n];
        for node in 0..grid.nodes() {
            for (dst, (a, b)) in m.iter_mut().zip(omega.at(node).iter().zip(hess.at(node))) {
                *dst = a + b;
            }
            if linalg::herm_min_eig(&m, n) < -tol {
                return false;
            }
        }
        true
    };

    let mut scale = 1.0;
    let mut v = candidate.clone();
    if !admissible(&v) {
        // bisect the largest admissible rescaling; admissibility is
        // monotone in the scale because the psd cone is convex
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            let mut trial = candidate.clone();
            trial.scale(mid);
            if admissible(&trial) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 {
            return;
        }
        scale = lo;
        v = candidate;
        v.scale(scale);
    }

    // a competitor's total discrete mass deviates from one by the
    // quadrature defect of the mixed stencils; subtracting that defect
    // keeps the reported value a defensible lower bound
    let mu = ma_measure(&v, omega);
    let defect = (mu.mass() - 1.0).abs();
    let mass = mu.mass_on(mask) - defect;
    if mass > best.value {
        best.value = mass;
        best.witness = if scale < 1.0 {
            format!("{name}@{scale:.3}")
        } else {
            name.to_string()
        };
    }
}

/// Periodic centroid of a mask via the circular mean along each axis.
fn mask_centroid(mask: &[bool], grid: &GridSpec) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut sums = vec![(0.0f64, 0.0f64); grid.axes()];
    let h = grid.h();
    let mut it = grid.iter_nodes();
    while let Some((idx, multi)) = it.next_node() {
        if !mask[idx] {
            continue;
        }
        for (a, &c) in multi.iter().enumerate() {
            let ang = tau * (c as f64 * h) / grid.period();
            sums[a].0 += ang.cos();
            sums[a].1 += ang.sin();
        }
    }
    sums.iter()
        .map(|&(c, s)| {
            let ang = s.atan2(c);
            (ang / tau * grid.period()).rem_euclid(grid.period())
        })
        .collect()
}

/// Per-set outcome of the domination check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HConditionRow {
    pub id: String,
    pub mu_mass: f64,
    pub cap: f64,
    pub ratio: f64,
}

/// Result of testing mu(K) <= A Cap(K)^(1+alpha) over a set battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HConditionReport {
    pub alpha: f64,
    pub a_hat: f64,
    pub worst_set: String,
    /// Verdict at the caller-supplied budget, when one was given.
    pub satisfied: Option<bool>,
    pub rows: Vec<HConditionRow>,
}

/// Estimate the smallest constant A with mu(K) <= A Cap(K)^(1+alpha) over
/// the battery. Sets of zero capacity but positive mass report infinity.
pub fn h_condition(
    mu: &Density,
    omega: &ReferenceForm,
    alpha: f64,
    test_sets: &[TestSet],
    budget: Option<f64>,
) -> Result<HConditionReport, CapacityError> {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(
        (mu.mass() - 1.0).abs() <= 1e-8,
        "mu must be normalized to mass 1, got {}",
        mu.mass()
    );
    if test_sets.is_empty() {
        return Err(CapacityError::EmptyTestSets);
    }

    let mut a_hat = 0.0f64;
    let mut worst = String::new();
    let mut rows = Vec::with_capacity(test_sets.len());
    for set in test_sets {
        let mu_mass = mu.mass_on(&set.mask);
        let cap = cap_omega(&set.mask, omega).value;
        let ratio = if mu_mass <= 0.0 {
            0.0
        } else if cap <= 0.0 {
            f64::INFINITY
        } else {
            mu_mass / cap.powf(1.0 + alpha)
        };
        if ratio > a_hat {
            a_hat = ratio;
            worst = set.id.clone();
        }
        rows.push(HConditionRow {
            id: set.id.clone(),
            mu_mass,
            cap,
            ratio,
        });
    }

    Ok(HConditionReport {
        alpha,
        a_hat,
        worst_set: worst,
        satisfied: budget.map(|a| a_hat <= a),
        rows,
    })
}

/// Battery of test sets mirroring the sets that appear in the estimates:
/// coordinate slabs, metric balls of dyadic radii, and sublevel sets of a
/// supplied potential.
pub fn standard_test_sets(
    grid: &GridSpec,
    sublevel_source: Option<&PeriodicField>,
) -> Vec<TestSet> {
    let mut sets = Vec::new();
    let m = grid.samples_per_axis();

    sets.push(TestSet::new("all", vec![true; grid.nodes()]));

    for axis in 0..grid.axes() {
        for width in [m / 2, m / 4] {
            if width == 0 {
                continue;
            }
            let mut mask = vec![false; grid.nodes()];
            let mut it = grid.iter_nodes();
            while let Some((idx, multi)) = it.next_node() {
                mask[idx] = multi[axis] < width;
            }
            sets.push(TestSet::new(format!("slab_a{axis}_w{width}"), mask));
        }
    }

    let center = vec![grid.period() / 2.0; grid.axes()];
    for k in [2i32, 3, 4] {
        let r = grid.period() / f64::powi(2.0, k);
        let mut mask = vec![false; grid.nodes()];
        let h = grid.h();
        let mut coords = vec![0.0; grid.axes()];
        let mut it = grid.iter_nodes();
        while let Some((idx, multi)) = it.next_node() {
            for (c, &i) in coords.iter_mut().zip(multi) {
                *c = i as f64 * h;
            }
            mask[idx] = grid.periodic_distance(&coords, &center) < r;
        }
        if mask.iter().any(|&b| b) {
            sets.push(TestSet::new(format!("ball_r2^-{k}"), mask));
        }
    }

    if let Some(phi) = sublevel_source {
        let lo = phi.min();
        let hi = phi.max();
        for (tag, frac) in [("q25", 0.25), ("q50", 0.5), ("q75", 0.75)] {
            let s = -(lo + frac * (hi - lo));
            let mask = mask_from_sublevel(phi, s);
            if mask.iter().any(|&b| b) {
                sets.push(TestSet::new(format!("sublevel_{tag}"), mask));
            }
        }
    }

    sets
}

/// Capacity decay profile s -> Cap(phi < -s)^(1/n) over a grid of
/// thresholds, closed with an exact zero at the level where the sublevel
/// set empties. Dictionary jitter is rectified to keep the profile
/// monotone.
pub fn sublevel_profile(
    phi: &PeriodicField,
    omega: &ReferenceForm,
    s_grid: &[f64],
) -> Result<DecayProfile, CapacityError> {
    let n = omega.grid().complex_dim();
    let mut thresholds: Vec<f64> = s_grid.iter().copied().filter(|s| s.is_finite()).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    if thresholds.is_empty() {
        return Err(CapacityError::Profile("empty threshold grid".into()));
    }

    let s_empty = -phi.min();
    let mut samples = Vec::new();
    for &s in &thresholds {
        if s >= s_empty {
            break;
        }
        let mask = mask_from_sublevel(phi, s);
        let cap = cap_omega(&mask, omega).value.max(0.0);
        samples.push((s, cap.powf(1.0 / n as f64)));
    }
    let terminal = match samples.last() {
        Some(&(last, _)) => s_empty.max(last + 1e-12),
        None => s_empty.max(0.0),
    };
    samples.push((terminal, 0.0));

    // enforce monotone decay from the right
    for i in (0..samples.len().saturating_sub(1)).rev() {
        if samples[i].1 < samples[i + 1].1 {
            samples[i].1 = samples[i + 1].1;
        }
    }

    DecayProfile::new(samples).map_err(CapacityError::Profile)
}

/// Outcome of the partial comparison inequality on the set {phi < psi}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub set_nodes: usize,
}

pub const COMPARISON_QUADRATURE_TOL: f64 = 1e-9;

/// Checks that the Monge-Ampere mass of psi on {phi < psi} does not exceed
/// the mass of phi there -- the inequality driving uniqueness. Both fields
/// must be admissible within tolerance.
pub fn comparison_check(
    phi: &PeriodicField,
    psi: &PeriodicField,
    omega: &ReferenceForm,
) -> Result<ComparisonReport, CapacityError> {
    let mu_phi = ma_measure_positive(phi, omega, COMPARISON_QUADRATURE_TOL)?;
    let mu_psi = ma_measure_positive(psi, omega, COMPARISON_QUADRATURE_TOL)?;
    let mask: Vec<bool> = phi
        .values()
        .iter()
        .zip(psi.values())
        .map(|(a, b)| a < b)
        .collect();
    let lhs = mu_psi.mass_on(&mask);
    let rhs = mu_phi.mass_on(&mask);
    Ok(ComparisonReport {
        lhs,
        rhs,
        holds: lhs <= rhs + COMPARISON_QUADRATURE_TOL,
        set_nodes: mask.iter().filter(|&&b| b).count(),
    })
}

pub fn mask_from_sublevel(phi: &PeriodicField, s: f64) -> Vec<bool> {
    phi.values().iter().map(|&v| v < -s).collect()
}
