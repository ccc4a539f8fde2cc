//! The discrete Monge-Ampere measure det(omega + Hess(phi)) / det_ref.

use super::{complex_hessian, FieldError, PeriodicField, ReferenceForm};
use crate::density::Density;
use crate::linalg;

/// Pointwise density of (omega + dd^c phi)^n against the normalized volume.
/// det_ref makes the measure of the zero field have total mass one; in
/// particular the flat form gives the constant density 1.
///
/// Negative determinants (phi not omega-psh at this resolution) are
/// reported as-is, never clamped; use [`ma_measure_positive`] when a
/// nonnegative measure is required.
pub fn ma_measure(phi: &PeriodicField, omega: &ReferenceForm) -> Density {
    phi.grid()
        .same_as(omega.grid())
        .expect("phi and omega must share a grid");
    let n = phi.grid().complex_dim();
    let hess = complex_hessian(phi);
    let inv_ref = 1.0 / omega.det_ref();
    let mut m = vec![num_complex::Complex64::default(); n * n];
    let values: Vec<f64> = (0..phi.grid().nodes())
        .map(|node| {
            let w = omega.at(node);
            let h = hess.at(node);
            for (dst, (a, b)) in m.iter_mut().zip(w.iter().zip(h)) {
                *dst = a + b;
            }
            linalg::herm_det(&m, n) * inv_ref
        })
        .collect();
    Density::from_raw_values(*phi.grid(), values)
}

/// As [`ma_measure`], but fails if any node determinant drops below `-tol`.
pub fn ma_measure_positive(
    phi: &PeriodicField,
    omega: &ReferenceForm,
    tol: f64,
) -> Result<Density, FieldError> {
    let density = ma_measure(phi, omega);
    if let Some((node, &det)) = density
        .values()
        .iter()
        .enumerate()
        .find(|(_, &d)| d < -tol)
    {
        return Err(FieldError::Feasibility { det, node, tol });
    }
    Ok(density)
}
