//! Hermitian coefficient field for the background (1,1)-form. The form may
//! be degenerate (semi-positive) but must be big: the grid mean of its
//! determinant, which normalizes every Monge-Ampere measure to total mass
//! one, has to be positive.

use super::FieldError;
use crate::grid::GridSpec;
use crate::linalg;
use crate::util;
use num_complex::Complex64;

/// Relative semidefiniteness tolerance: eigenvalues above
/// `-PSD_RTOL * max eigenvalue over the grid` are accepted.
const PSD_RTOL: f64 = 1e-10;
const HERM_RTOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ReferenceForm {
    grid: GridSpec,
    coeff: Vec<Complex64>,
    det_ref: f64,
}

impl ReferenceForm {
    /// Validates Hermitian symmetry, scale-aware semi-positivity and
    /// bigness, then caches the normalizing determinant mean.
    pub fn new(grid: GridSpec, coeff: Vec<Complex64>) -> Result<Self, FieldError> {
        let n = grid.complex_dim();
        let want = grid.nodes() * n * n;
        if coeff.len() != want {
            return Err(FieldError::WrongLength {
                got: coeff.len(),
                want,
            });
        }

        let mut max_eig = 0.0_f64;
        let mut min_eig = f64::INFINITY;
        let mut min_node = 0;
        for node in 0..grid.nodes() {
            let block = &coeff[node * n * n..(node + 1) * n * n];
            let defect = linalg::herm_defect(block, n);
            let scale = block.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
            if defect > HERM_RTOL * scale {
                return Err(FieldError::NotHermitian { defect, node });
            }
            let lo = linalg::herm_min_eig(block, n);
            if lo < min_eig {
                min_eig = lo;
                min_node = node;
            }
            max_eig = max_eig.max(linalg::herm_max_eig(block, n));
        }
        let tol_psd = PSD_RTOL * max_eig.max(1e-300);
        if min_eig < -tol_psd {
            return Err(FieldError::NotSemiPositive {
                eig: min_eig,
                node: min_node,
                tol: tol_psd,
            });
        }

        let dets: Vec<f64> = (0..grid.nodes())
            .map(|node| linalg::herm_det(&coeff[node * n * n..(node + 1) * n * n], n))
            .collect();
        let det_ref = util::mean(&dets);
        if det_ref <= 0.0 {
            return Err(FieldError::NotBig { mass: det_ref });
        }

        Ok(ReferenceForm {
            grid,
            coeff,
            det_ref,
        })
    }

    /// Identity coefficients at every node (the flat Kahler form).
    pub fn flat(grid: GridSpec) -> Self {
        let n = grid.complex_dim();
        let mut coeff = vec![Complex64::default(); grid.nodes() * n * n];
        for node in 0..grid.nodes() {
            for j in 0..n {
                coeff[node * n * n + j * n + j] = Complex64::new(1.0, 0.0);
            }
        }
        ReferenceForm {
            grid,
            det_ref: 1.0,
            coeff,
        }
    }

    /// Build from a per-node matrix function of the physical coordinates.
    pub fn from_fn(
        grid: GridSpec,
        f: impl Fn(&[f64]) -> Vec<Complex64>,
    ) -> Result<Self, FieldError> {
        let n = grid.complex_dim();
        let h = grid.h();
        let mut coeff = Vec::with_capacity(grid.nodes() * n * n);
        let mut coords = vec![0.0; grid.axes()];
        let mut it = grid.iter_nodes();
        while let Some((_, multi)) = it.next_node() {
            for (c, &i) in coords.iter_mut().zip(multi) {
                *c = i as f64 * h;
            }
            let block = f(&coords);
            assert_eq!(block.len(), n * n, "matrix function must return n x n entries");
            coeff.extend_from_slice(&block);
        }
        ReferenceForm::new(grid, coeff)
    }

    /// Semi-positive form vanishing in its first eigenvalue on the
    /// hyperplane x_1 = 0: diag(sin^2(pi x_1) + delta, 1, ..., 1).
    pub fn degenerate_hyperplane(grid: GridSpec, delta: f64) -> Result<Self, FieldError> {
        let n = grid.complex_dim();
        let period = grid.period();
        ReferenceForm::from_fn(grid, |x| {
            let s = (std::f64::consts::PI * x[0] / period).sin();
            let mut block = vec![Complex64::default(); n * n];
            block[0] = Complex64::new(s * s + delta, 0.0);
            for j in 1..n {
                block[j * n + j] = Complex64::new(1.0, 0.0);
            }
            block
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeff(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn at(&self, node: usize) -> &[Complex64] {
        let n = self.grid.complex_dim();
        &self.coeff[node * n * n..(node + 1) * n * n]
    }

    /// Grid mean of det(omega); every measure is normalized by this value
    /// so that the total Monge-Ampere mass of the form itself equals one.
    pub fn det_ref(&self) -> f64 {
        self.det_ref
    }

    /// omega + eps * Omega with Omega the flat identity form. The result
    /// carries its own determinant normalizer.
    pub fn regularized(&self, eps: f64) -> Result<ReferenceForm, FieldError> {
        assert!(eps >= 0.0 && eps.is_finite());
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let n = self.grid.complex_dim();
        let mut coeff = self.coeff.clone();
        for node in 0..self.grid.nodes() {
            for j in 0..n {
                coeff[node * n * n + j * n + j] += Complex64::new(eps, 0.0);
            }
        }
        ReferenceForm::new(self.grid, coeff)
    }

    /// Smallest eigenvalue over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.grid.complex_dim();
        (0..self.grid.nodes())
            .map(|node| linalg::herm_min_eig(self.at(node), n))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_form_has_unit_normalizer() {
        let g = GridSpec::unit(2, 8).unwrap();
        let omega = ReferenceForm::flat(g);
        assert_eq!(omega.det_ref(), 1.0);
        assert_eq!(omega.min_eigenvalue(), 1.0);
    }

    #[test]
    fn rejects_non_hermitian_coefficients() {
        let g = GridSpec::unit(1, 4).unwrap();
        // n = 1: a single entry with an imaginary part is not Hermitian
        let coeff = vec![Complex64::new(1.0, 0.5); g.nodes()];
        assert!(matches!(
            ReferenceForm::new(g, coeff),
            Err(FieldError::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_indefinite_coefficients() {
        let g = GridSpec::unit(1, 4).unwrap();
        let mut coeff = vec![Complex64::new(1.0, 0.0); g.nodes()];
        coeff[3] = Complex64::new(-0.5, 0.0);
        assert!(matches!(
            ReferenceForm::new(g, coeff),
            Err(FieldError::NotSemiPositive { node: 3, .. })
        ));
    }

    #[test]
    fn degenerate_hyperplane_is_semipositive_and_big() {
        let g = GridSpec::unit(2, 8).unwrap();
        let omega = ReferenceForm::degenerate_hyperplane(g, 0.0).unwrap();
        assert!(omega.min_eigenvalue().abs() < 1e-15);
        // mean of sin^2 over a full period is 1/2
        assert_relative_eq!(omega.det_ref(), 0.5, epsilon = 1e-12);
        let reg = omega.regularized(0.1).unwrap();
        assert_relative_eq!(reg.min_eigenvalue(), 0.1, epsilon = 1e-12);
        assert!(reg.det_ref() > omega.det_ref());
    }
}
