//! Periodic scalar fields, the discrete complex Hessian and the
//! Monge-Ampere measure, together with norms and quadrature.

mod form;
mod hessian;
pub mod io;
mod measure;

pub use form::ReferenceForm;
pub use hessian::{complex_hessian, HessianField};
pub use measure::{ma_measure, ma_measure_positive};

use crate::density::Density;
use crate::grid::{GridError, GridSpec};
use crate::util;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("field value at node {node} is not finite")]
    NonFinite { node: usize },
    #[error("value count {got} does not match grid node count {want}")]
    WrongLength { got: usize, want: usize },
    #[error(
        "Monge-Ampere determinant {det:.3e} at node {node} below -{tol:.1e}; \
         field is not admissible at this resolution"
    )]
    Feasibility { det: f64, node: usize, tol: f64 },
    #[error("reference form is not Hermitian: defect {defect:.3e} at node {node}")]
    NotHermitian { defect: f64, node: usize },
    #[error("reference form has eigenvalue {eig:.3e} at node {node} below -{tol:.1e}")]
    NotSemiPositive { eig: f64, node: usize, tol: f64 },
    #[error("reference form is not big: total determinant mass {mass:.3e}")]
    NotBig { mass: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field container: {0}")]
    BadContainer(String),
}

/// Scalar samples of a function on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Which norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Sup,
    L1,
    L2,
    Lp(f64),
}

impl PeriodicField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.nodes() {
            return Err(FieldError::WrongLength {
                got: values.len(),
                want: grid.nodes(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { node });
        }
        Ok(PeriodicField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        PeriodicField {
            grid,
            values: vec![0.0; grid.nodes()],
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        PeriodicField {
            grid,
            values: vec![value; grid.nodes()],
        }
    }

    /// Sample a function of the physical coordinates at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let h = grid.h();
        let mut values = Vec::with_capacity(grid.nodes());
        let mut coords = vec![0.0; grid.axes()];
        let mut it = grid.iter_nodes();
        while let Some((_, multi)) = it.next_node() {
            for (c, &i) in coords.iter_mut().zip(multi) {
                *c = i as f64 * h;
            }
            values.push(f(&coords));
        }
        PeriodicField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn mean(&self) -> f64 {
        util::mean(&self.values)
    }

    /// In place: self <- self + scale * other.
    pub fn axpy(&mut self, scale: f64, other: &PeriodicField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn shift_values(&mut self, offset: f64) {
        for v in &mut self.values {
            *v += offset;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// Pointwise max gap to another field.
    pub fn sup_distance(&self, other: &PeriodicField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Grid quadrature of the stated norm; the volume is normalized to 1 so
/// integrals are node means. `weight` multiplies the integrand pointwise.
pub fn norm(phi: &PeriodicField, kind: NormKind, weight: Option<&Density>) -> f64 {
    if let Some(w) = weight {
        assert_eq!(
            w.grid(),
            phi.grid(),
            "weight density must share the field grid"
        );
    }
    match kind {
        NormKind::Sup => util::sup_abs(phi.values()),
        NormKind::L1 => weighted_power_mean(phi, 1.0, weight),
        NormKind::L2 => weighted_power_mean(phi, 2.0, weight).sqrt(),
        NormKind::Lp(p) => {
            assert!(p >= 1.0, "Lp norm requires p >= 1");
            weighted_power_mean(phi, p, weight).powf(1.0 / p)
        }
    }
}

fn weighted_power_mean(phi: &PeriodicField, p: f64, weight: Option<&Density>) -> f64 {
    let terms: Vec<f64> = match weight {
        None => phi.values().iter().map(|v| v.abs().powf(p)).collect(),
        Some(w) => phi
            .values()
            .iter()
            .zip(w.values())
            .map(|(v, wv)| v.abs().powf(p) * wv)
            .collect(),
    };
    util::mean(&terms)
}

/// Multilinear interpolation onto the doubled grid; even fine coordinates
/// coincide with coarse nodes, odd ones average the adjacent corners.
/// Used to warm-start solves on refined grids.
pub fn prolong(coarse: &PeriodicField, fine: GridSpec) -> Result<PeriodicField, FieldError> {
    let cg = *coarse.grid();
    if fine.complex_dim() != cg.complex_dim()
        || fine.period() != cg.period()
        || fine.samples_per_axis() != 2 * cg.samples_per_axis()
    {
        return Err(FieldError::Grid(crate::grid::GridError::Mismatch(cg, fine)));
    }
    let axes = cg.axes();
    let m = cg.samples_per_axis();
    let src = coarse.values();
    let mut values = vec![0.0; fine.nodes()];
    let mut base = vec![0usize; axes];
    let mut odd_axes: Vec<usize> = Vec::with_capacity(axes);
    let mut corner = vec![0usize; axes];

    let mut it = fine.iter_nodes();
    while let Some((idx, multi)) = it.next_node() {
        odd_axes.clear();
        for a in 0..axes {
            base[a] = multi[a] / 2;
            if multi[a] % 2 == 1 {
                odd_axes.push(a);
            }
        }
        let corners = 1usize << odd_axes.len();
        let mut acc = 0.0;
        for bits in 0..corners {
            corner.copy_from_slice(&base);
            for (b, &a) in odd_axes.iter().enumerate() {
                if bits & (1 << b) != 0 {
                    corner[a] = (corner[a] + 1) % m;
                }
            }
            acc += src[cg.flat_index(&corner)];
        }
        values[idx] = acc / corners as f64;
    }
    PeriodicField::new(fine, values)
}

/// Circular shift by integer node offsets per axis: result(x) = phi(x + s h).
pub fn translate(phi: &PeriodicField, offsets: &[i64]) -> PeriodicField {
    let grid = *phi.grid();
    assert_eq!(offsets.len(), grid.axes(), "one offset per real axis");
    let mut values = vec![0.0; grid.nodes()];
    let src = phi.values();
    for (idx, v) in values.iter_mut().enumerate() {
        *v = src[grid.shifted_index(idx, offsets)];
    }
    PeriodicField::new(grid, values).expect("translate preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid1() -> GridSpec {
        GridSpec::unit(1, 16).unwrap()
    }

    #[test]
    fn constant_field_norms() {
        let phi = PeriodicField::constant(grid1(), -1.0);
        assert_eq!(norm(&phi, NormKind::Sup, None), 1.0);
        assert_relative_eq!(norm(&phi, NormKind::L1, None), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cosine_l2_norm_is_exact_on_periodic_grid() {
        let phi = PeriodicField::from_fn(grid1(), |x| (2.0 * PI * x[0]).cos());
        // trigonometric quadrature is exact here
        assert_relative_eq!(
            norm(&phi, NormKind::L2, None),
            0.5_f64.sqrt(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn weight_two_doubles_l1() {
        let g = grid1();
        let phi = PeriodicField::from_fn(g, |x| 0.2 + (2.0 * PI * x[1]).sin().abs());
        let w = Density::new(g, vec![2.0; g.nodes()]).unwrap();
        let unweighted = norm(&phi, NormKind::L1, None);
        let weighted = norm(&phi, NormKind::L1, Some(&w));
        assert_relative_eq!(weighted, 2.0 * unweighted, epsilon = 1e-13);
    }

    #[test]
    fn translate_identities() {
        let g = grid1();
        let phi = PeriodicField::from_fn(g, |x| (2.0 * PI * x[0]).cos() + x[1]);
        let m = g.samples_per_axis() as i64;
        assert_eq!(translate(&phi, &[0, 0]), phi);
        assert_eq!(translate(&phi, &[m, -m]), phi);
        let half = translate(&phi, &[m / 2, 0]);
        assert_eq!(translate(&half, &[m / 2, 0]), phi);
    }

    #[test]
    fn translate_preserves_mass_and_sup() {
        let g = grid1();
        let phi = PeriodicField::from_fn(g, |x| (2.0 * PI * (x[0] + 0.3 * x[1])).sin());
        let shifted = translate(&phi, &[3, -5]);
        assert_relative_eq!(shifted.mean(), phi.mean(), epsilon = 1e-14);
        assert_eq!(
            norm(&shifted, NormKind::Sup, None),
            norm(&phi, NormKind::Sup, None)
        );
    }

    #[test]
    fn prolongation_matches_coarse_nodes_and_interpolates() {
        let cg = GridSpec::unit(1, 8).unwrap();
        let fine = cg.refined();
        let phi = PeriodicField::from_fn(cg, |x| (2.0 * PI * x[0]).cos() + 0.3 * x[1]);
        let p = prolong(&phi, fine).unwrap();
        // coincident nodes are copied exactly
        for idx in 0..cg.nodes() {
            let multi = cg.multi_index(idx);
            let fine_multi: Vec<usize> = multi.iter().map(|&c| 2 * c).collect();
            assert_eq!(p.values()[fine.flat_index(&fine_multi)], phi.values()[idx]);
        }
        // a midpoint along one axis averages its two neighbors
        let v0 = phi.values()[cg.flat_index(&[0, 0])];
        let v1 = phi.values()[cg.flat_index(&[1, 0])];
        assert_relative_eq!(
            p.values()[fine.flat_index(&[1, 0])],
            0.5 * (v0 + v1),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid1();
        let mut vals = vec![0.0; g.nodes()];
        vals[7] = f64::NAN;
        assert!(matches!(
            PeriodicField::new(g, vals),
            Err(FieldError::NonFinite { node: 7 })
        ));
    }
}
