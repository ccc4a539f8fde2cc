//! Right-hand-side measures: construction of algebraic densities with
//! marked zeros and poles, normalization, and the empirical integrability
//! machinery for klt-type exponents.

use crate::field::PeriodicField;
use crate::grid::{GridError, GridSpec};
use crate::util;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("density value at node {node} is {value}; densities must be finite and >= 0")]
    BadValue { node: usize, value: f64 },
    #[error("value count {got} does not match grid node count {want}")]
    WrongLength { got: usize, want: usize },
    #[error("node {node} lies within {dist:.3e} of a pole center (limit {limit:.3e})")]
    PoleOnNode { node: usize, dist: f64, limit: f64 },
    #[error("pole exponent 2l = {exponent} violates integrability (needs 2l < 2)")]
    Integrability { exponent: f64 },
    #[error("cannot normalize a density of mass {mass:.3e}")]
    ZeroMass { mass: f64 },
    #[error("refinement sequence is inconclusive: {0:?}")]
    Inconclusive(Vec<f64>),
    #[error("density carries no algebraic generator; refinement study impossible")]
    NoGenerator,
    #[error("exponent list must not be empty")]
    EmptyKlt,
    #[error("spec contains a non-finite or negative exponent: {0}")]
    BadExponent(f64),
}

/// Estimated integrability class of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpClass {
    pub p: f64,
    pub norm: f64,
}

/// Nonnegative scalar measure density against the normalized volume.
#[derive(Debug, Clone)]
pub struct Density {
    grid: GridSpec,
    values: Vec<f64>,
    mass: f64,
    lp_class: Option<LpClass>,
    generator: Option<AlgebraicDensitySpec>,
}

impl Density {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, DensityError> {
        if values.len() != grid.nodes() {
            return Err(DensityError::WrongLength {
                got: values.len(),
                want: grid.nodes(),
            });
        }
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(DensityError::BadValue { node, value });
        }
        Ok(Density::from_raw_values(grid, values))
    }

    /// Internal constructor that skips the sign check; the Monge-Ampere
    /// operator reports negative determinants through this path.
    pub(crate) fn from_raw_values(grid: GridSpec, values: Vec<f64>) -> Self {
        let mass = util::mean(&values);
        Density {
            grid,
            values,
            mass,
            lp_class: None,
            generator: None,
        }
    }

    pub fn uniform(grid: GridSpec) -> Self {
        Density::from_raw_values(grid, vec![1.0; grid.nodes()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cached quadrature total (node mean; the torus has unit volume).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn lp_class(&self) -> Option<LpClass> {
        self.lp_class
    }

    pub fn set_lp_class(&mut self, class: LpClass) {
        self.lp_class = Some(class);
    }

    pub fn generator(&self) -> Option<&AlgebraicDensitySpec> {
        self.generator.as_ref()
    }

    /// Mass of the density restricted to a node mask.
    pub fn mass_on(&self, mask: &[bool]) -> f64 {
        debug_assert_eq!(mask.len(), self.values.len());
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(mask)
            .map(|(&v, &keep)| if keep { v } else { 0.0 })
            .collect();
        util::mean(&terms)
    }
}

/// Marked point with an even exponent 2k (zeros) or 2l (poles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub center: Vec<f64>,
    pub exponent: f64,
}

/// Algebraic density shape: sums of periodic distance powers to marked
/// zeros over sums of distance powers to marked poles, times exp(F).
/// Sections of line bundles are modeled by the distance factors; this
/// reproduces the local |z|^(2a) singularity profile without any sheaf
/// machinery. Empty lists contribute the constant factor one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicDensitySpec {
    pub zeros: Vec<MarkedPoint>,
    pub poles: Vec<MarkedPoint>,
    #[serde(skip)]
    pub smooth_factor: Option<PeriodicField>,
    /// Offset marked centers to cell centers at evaluation time so that no
    /// node can coincide with a pole. Leave on unless the caller has
    /// positioned the centers explicitly.
    #[serde(default = "default_snap")]
    pub snap_centers: bool,
}

fn default_snap() -> bool {
    true
}

impl Default for AlgebraicDensitySpec {
    fn default() -> Self {
        AlgebraicDensitySpec {
            zeros: vec![],
            poles: vec![],
            smooth_factor: None,
            snap_centers: true,
        }
    }
}

impl AlgebraicDensitySpec {
    pub fn validate(&self) -> Result<(), DensityError> {
        for z in self.zeros.iter().chain(&self.poles) {
            if !z.exponent.is_finite() || z.exponent < 0.0 {
                return Err(DensityError::BadExponent(z.exponent));
            }
        }
        for p in &self.poles {
            if p.exponent >= 2.0 {
                return Err(DensityError::Integrability {
                    exponent: p.exponent,
                });
            }
        }
        Ok(())
    }
}

/// Evaluate an algebraic density on a grid, snapping all marked centers to
/// cell centers so no node can sit on a pole, then normalize to mass one.
pub fn algebraic_density(
    spec: &AlgebraicDensitySpec,
    grid: GridSpec,
) -> Result<Density, DensityError> {
    spec.validate()?;
    let snapped = if spec.snap_centers {
        AlgebraicDensitySpec {
            zeros: snap_points(&spec.zeros, &grid),
            poles: snap_points(&spec.poles, &grid),
            smooth_factor: spec.smooth_factor.clone(),
            snap_centers: true,
        }
    } else {
        spec.clone()
    };
    if let Some(f) = &snapped.smooth_factor {
        f.grid().same_as(&grid)?;
    }

    let limit = grid.h() * 1e-6;
    let h = grid.h();
    let mut values = Vec::with_capacity(grid.nodes());
    let mut coords = vec![0.0; grid.axes()];
    let mut it = grid.iter_nodes();
    while let Some((idx, multi)) = it.next_node() {
        for (c, &i) in coords.iter_mut().zip(multi) {
            *c = i as f64 * h;
        }
        let mut num = 0.0;
        for z in &snapped.zeros {
            num += grid.periodic_distance(&coords, &z.center).powf(z.exponent);
        }
        if snapped.zeros.is_empty() {
            num = 1.0;
        }
        let mut den = 0.0;
        for p in &snapped.poles {
            let d = grid.periodic_distance(&coords, &p.center);
            if d < limit {
                return Err(DensityError::PoleOnNode {
                    node: idx,
                    dist: d,
                    limit,
                });
            }
            den += d.powf(p.exponent);
        }
        if snapped.poles.is_empty() {
            den = 1.0;
        }
        let smooth = snapped
            .smooth_factor
            .as_ref()
            .map_or(1.0, |f| f.values()[idx].exp());
        values.push(num / den * smooth);
    }

    let mut density = Density::new(grid, values)?;
    density = normalize(&density, 1.0)?;
    density.generator = Some(snapped);
    Ok(density)
}

fn snap_points(points: &[MarkedPoint], grid: &GridSpec) -> Vec<MarkedPoint> {
    points
        .iter()
        .map(|p| MarkedPoint {
            center: grid.snap_to_cell_center(&p.center),
            exponent: p.exponent,
        })
        .collect()
}

/// Rescale so the quadrature mass hits `target_mass`. Pointwise ratios are
/// preserved; the cached mass is recomputed from the scaled values.
pub fn normalize(f: &Density, target_mass: f64) -> Result<Density, DensityError> {
    assert!(target_mass > 0.0 && target_mass.is_finite());
    if !(f.mass > 0.0) {
        return Err(DensityError::ZeroMass { mass: f.mass });
    }
    let scale = target_mass / f.mass;
    let values: Vec<f64> = f.values.iter().map(|v| v * scale).collect();
    let mass = util::mean(&values);
    debug_assert!((mass - target_mass).abs() <= 1e-12 * target_mass.max(1.0));
    Ok(Density {
        grid: f.grid,
        values,
        mass,
        lp_class: f.lp_class,
        generator: f.generator.clone(),
    })
}

/// Exceptional-divisor exponent data (a_E, b_E) per divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KltSpec {
    pub exponents: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KltReport {
    pub klt: bool,
    pub margin: f64,
}

/// klt test: every a_E - eps b_E must stay strictly above -1. The margin
/// is the minimum of a_E - eps b_E + 1 over the divisors.
pub fn klt_check(spec: &KltSpec, eps: f64) -> Result<KltReport, DensityError> {
    assert!(eps >= 0.0);
    if spec.exponents.is_empty() {
        return Err(DensityError::EmptyKlt);
    }
    let margin = spec
        .exponents
        .iter()
        .map(|&(a, b)| a - eps * b + 1.0)
        .fold(f64::INFINITY, f64::min);
    Ok(KltReport {
        klt: margin > 0.0,
        margin,
    })
}

/// Outcome of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinementVerdict {
    Integrable,
    Divergent,
    Inconclusive,
}

/// Classify a refinement sequence by the contraction of its Cauchy
/// differences. Successive differences shrinking geometrically (ratio
/// below 0.9) certify convergence; steady growth certifies divergence;
/// anything else is reported, not guessed.
pub fn classify_refinement_sequence(masses: &[f64]) -> RefinementVerdict {
    assert!(masses.len() >= 3, "need at least three refinement levels");
    let scale = masses.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
    let atol = 1e-13 * scale;
    let diffs: Vec<f64> = masses.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|d| d.abs() <= atol) {
        return RefinementVerdict::Integrable;
    }
    let mut ratios = Vec::new();
    for w in diffs.windows(2) {
        if w[0].abs() <= atol && w[1].abs() <= atol {
            continue;
        }
        if w[0].abs() <= atol {
            return RefinementVerdict::Inconclusive;
        }
        ratios.push(w[1].abs() / w[0].abs());
    }
    if ratios.iter().all(|&r| r < 0.9) {
        return RefinementVerdict::Integrable;
    }
    if diffs.iter().all(|&d| d > 0.0) && ratios.iter().all(|&r| r >= 0.9) {
        return RefinementVerdict::Divergent;
    }
    RefinementVerdict::Inconclusive
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub mass_sequence: Vec<f64>,
}

/// Empirical integrability of d(., center)^(2a) on the punctured
/// cell-centered grid in complex dimension n, by refinement contraction.
pub fn integrability_quadrature(
    a: f64,
    n: usize,
    refinements: usize,
) -> Result<IntegrabilityReport, DensityError> {
    assert!(refinements >= 3, "refinement study needs at least 3 levels");
    assert!(a.is_finite());
    let mut masses = Vec::with_capacity(refinements);
    let mut m = 8usize;
    for _ in 0..refinements {
        let grid = GridSpec::unit(n, m)?;
        masses.push(punctured_power_mass(&grid, 2.0 * a));
        m *= 2;
    }
    match classify_refinement_sequence(&masses) {
        RefinementVerdict::Integrable => Ok(IntegrabilityReport {
            integrable: true,
            mass_sequence: masses,
        }),
        RefinementVerdict::Divergent => Ok(IntegrabilityReport {
            integrable: false,
            mass_sequence: masses,
        }),
        RefinementVerdict::Inconclusive => Err(DensityError::Inconclusive(masses)),
    }
}

/// Mean of d(x, center)^p over the cell-centered offset grid; the center
/// sits at the origin so every sample keeps distance >= h/2.
fn punctured_power_mass(grid: &GridSpec, p: f64) -> f64 {
    let h = grid.h();
    let center = vec![0.0; grid.axes()];
    let mut coords = vec![0.0; grid.axes()];
    let mut terms = Vec::with_capacity(grid.nodes());
    let mut it = grid.iter_nodes();
    while let Some((_, multi)) = it.next_node() {
        for (c, &i) in coords.iter_mut().zip(multi) {
            *c = (i as f64 + 0.5) * h;
        }
        terms.push(grid.periodic_distance(&coords, &center).powf(p));
    }
    util::mean(&terms)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpReport {
    pub in_lp: bool,
    pub norm_sequence: Vec<f64>,
}

/// ||f||_p across grid refinements of the density's algebraic generator;
/// membership in L^p is certified by Cauchy contraction of the norms.
pub fn lp_estimate(f: &Density, p: f64, refinements: usize) -> Result<LpReport, DensityError> {
    assert!(p > 1.0, "lp_estimate requires p > 1");
    assert!(refinements >= 3, "refinement study needs at least 3 levels");
    let generator = f.generator().ok_or(DensityError::NoGenerator)?.clone();
    let mut norms = Vec::with_capacity(refinements);
    let mut grid = *f.grid();
    for _ in 0..refinements {
        let sample = algebraic_density(&generator, grid)?;
        let powered: Vec<f64> = sample.values().iter().map(|v| v.powf(p)).collect();
        norms.push(util::mean(&powered).powf(1.0 / p));
        grid = grid.refined();
    }
    match classify_refinement_sequence(&norms) {
        RefinementVerdict::Integrable => Ok(LpReport {
            in_lp: true,
            norm_sequence: norms,
        }),
        RefinementVerdict::Divergent => Ok(LpReport {
            in_lp: false,
            norm_sequence: norms,
        }),
        RefinementVerdict::Inconclusive => Err(DensityError::Inconclusive(norms)),
    }
}
