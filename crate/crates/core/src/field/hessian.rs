//! Centered-difference discretization of the complex Hessian
//! d^2 phi / dz_j dz_k-bar on the periodic grid.
//!
//! With z_j = x_j + i y_j,
//!   diagonal:      (phi_{x_j x_j} + phi_{y_j y_j}) / 4
//!   off-diagonal:  [phi_{x_j x_k} + phi_{y_j y_k}
//!                    + i (phi_{x_j y_k} - phi_{y_j x_k})] / 4
//! Pure second derivatives use the compact 3-point stencil, mixed ones the
//! 4-point cross stencil. The lower triangle is filled by conjugation, so
//! the output is Hermitian to the last bit.

use super::PeriodicField;
use crate::grid::GridSpec;
use num_complex::Complex64;

/// Hermitian n x n matrix per node, row-major within each node block.
#[derive(Debug, Clone)]
pub struct HessianField {
    grid: GridSpec,
    hess: Vec<Complex64>,
}

impl HessianField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, node: usize) -> &[Complex64] {
        let n = self.grid.complex_dim();
        &self.hess[node * n * n..(node + 1) * n * n]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.hess
    }
}

pub fn complex_hessian(phi: &PeriodicField) -> HessianField {
    let grid = *phi.grid();
    let n = grid.complex_dim();
    let mut hess = vec![Complex64::default(); grid.nodes() * n * n];
    let v = phi.values();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let geom = grid.stencil();

    let mut it = grid.iter_nodes();
    while let Some((idx, multi)) = it.next_node() {
        let block = &mut hess[idx * n * n..(idx + 1) * n * n];

        let second = |axis: usize| -> f64 {
            let fwd = geom.step(idx, multi[axis], axis, true);
            let back = geom.step(idx, multi[axis], axis, false);
            (v[fwd] - 2.0 * v[idx] + v[back]) * inv_h2
        };
        let mixed = |a: usize, b: usize| -> f64 {
            let pa = geom.step(idx, multi[a], a, true);
            let ma = geom.step(idx, multi[a], a, false);
            let pp = geom.step(pa, multi[b], b, true);
            let pm = geom.step(pa, multi[b], b, false);
            let mp = geom.step(ma, multi[b], b, true);
            let mm = geom.step(ma, multi[b], b, false);
            (v[pp] - v[pm] - v[mp] + v[mm]) * 0.25 * inv_h2
        };

        for j in 0..n {
            let (xj, yj) = (2 * j, 2 * j + 1);
            block[j * n + j] = Complex64::new(0.25 * (second(xj) + second(yj)), 0.0);
            for k in j + 1..n {
                let (xk, yk) = (2 * k, 2 * k + 1);
                let re = 0.25 * (mixed(xj, xk) + mixed(yj, yk));
                let im = 0.25 * (mixed(xj, yk) - mixed(yj, xk));
                block[j * n + k] = Complex64::new(re, im);
                block[k * n + j] = Complex64::new(re, -im);
            }
        }
    }

    HessianField { grid, hess }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::norm;
    use crate::field::NormKind;
    use crate::grid::GridSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_gives_zero_matrices() {
        let g = GridSpec::unit(2, 8).unwrap();
        let hess = complex_hessian(&PeriodicField::zeros(g));
        assert!(hess.entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn cosine_diagonal_matches_quarter_laplacian() {
        // d^2/dz dzbar = Laplacian / 4, so phi = a cos(2 pi x) has entry
        // approximately -a pi^2 cos(2 pi x), with O(h^2) error.
        let a = 0.7;
        for (m, tol) in [(16usize, 0.09), (32, 0.023)] {
            let g = GridSpec::unit(1, m).unwrap();
            let phi = PeriodicField::from_fn(g, |x| a * (2.0 * PI * x[0]).cos());
            let hess = complex_hessian(&phi);
            let mut worst = 0.0_f64;
            for idx in 0..g.nodes() {
                let x = g.coords(idx);
                let exact = -a * PI * PI * (2.0 * PI * x[0]).cos();
                worst = worst.max((hess.at(idx)[0].re - exact).abs());
            }
            assert!(worst < tol * a * PI * PI, "m={m}: worst={worst}");
        }
    }

    #[test]
    fn hessian_converges_at_second_order() {
        // Trigonometric test field with genuinely mixed derivatives.
        let phi_fn = |x: &[f64]| {
            (2.0 * PI * x[0]).cos() * (2.0 * PI * x[3]).sin()
                + 0.5 * (2.0 * PI * (x[1] + x[2])).cos()
        };
        let exact_11 = |x: &[f64]| {
            // (phi_x0x0 + phi_x1x1)/4
            let mixed = (2.0 * PI * x[0]).cos() * (2.0 * PI * x[3]).sin();
            let sep = 0.5 * (2.0 * PI * (x[1] + x[2])).cos();
            -PI * PI * (mixed + sep)
        };
        let mut errs = Vec::new();
        for m in [8usize, 16, 32] {
            let g = GridSpec::unit(2, m).unwrap();
            let phi = PeriodicField::from_fn(g, phi_fn);
            let hess = complex_hessian(&phi);
            let mut worst = 0.0_f64;
            for idx in 0..g.nodes() {
                let x = g.coords(idx);
                worst = worst.max((hess.at(idx)[0].re - exact_11(&x)).abs());
            }
            errs.push(worst);
        }
        let order01 = (errs[0] / errs[1]).log2();
        let order12 = (errs[1] / errs[2]).log2();
        assert!(
            (1.9..=2.1).contains(&order01) && (1.9..=2.1).contains(&order12),
            "observed orders {order01:.3}, {order12:.3}"
        );
    }

    #[test]
    fn separable_field_is_block_diagonal() {
        let g = GridSpec::unit(2, 8).unwrap();
        let u = |x: &[f64]| (2.0 * PI * x[0]).cos() + 0.3 * (2.0 * PI * x[1]).sin();
        let w = |x: &[f64]| 0.5 * (2.0 * PI * x[2]).sin();
        let phi = PeriodicField::from_fn(g, |x| u(x) + w(x));
        let hess = complex_hessian(&phi);

        let g1 = GridSpec::unit(1, 8).unwrap();
        let phi_u = PeriodicField::from_fn(g1, |x| u(&[x[0], x[1], 0.0, 0.0]));
        let hess_u = complex_hessian(&phi_u);

        // off-diagonal entries vanish up to the rounding of u + w sums
        let scale = 1.0 / (g.h() * g.h());
        for idx in 0..g.nodes() {
            let multi = g.multi_index(idx);
            let block = hess.at(idx);
            assert!(block[1].norm() < 1e-14 * scale);
            assert!(block[2].norm() < 1e-14 * scale);
            let idx1 = g1.flat_index(&multi[..2]);
            assert_relative_eq!(block[0].re, hess_u.at(idx1)[0].re, epsilon = 1e-10);
        }
    }

    #[test]
    fn hessian_is_linear() {
        let g = GridSpec::unit(2, 8).unwrap();
        let phi = PeriodicField::from_fn(g, |x| (2.0 * PI * (x[0] + x[3])).cos());
        let psi = PeriodicField::from_fn(g, |x| (2.0 * PI * x[2]).sin() * x[1] * (1.0 - x[1]));
        let mut combo = phi.clone();
        combo.scale(2.5);
        combo.axpy(-1.25, &psi);
        let h_combo = complex_hessian(&combo);
        let h_phi = complex_hessian(&phi);
        let h_psi = complex_hessian(&psi);
        let mut worst = 0.0_f64;
        for (i, z) in h_combo.entries().iter().enumerate() {
            let expect = 2.5 * h_phi.entries()[i] - 1.25 * h_psi.entries()[i];
            worst = worst.max((z - expect).norm());
        }
        let scale = norm(&phi, NormKind::Sup, None) / (g.h() * g.h());
        assert!(worst <= 1e-12 * scale, "linearity defect {worst}");
    }
}
