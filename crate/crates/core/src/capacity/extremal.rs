//! Perron-style relaxation for the relative extremal potential of a node
//! set: the largest field u <= 0 with u = -1 forced on K and
//! omega + Hess(u) positive semidefinite.

use super::CapacityError;
use crate::field::{PeriodicField, ReferenceForm};
use crate::linalg;
use num_complex::Complex64;

/// Diverging iterates are cut off here; admissible potentials for the
/// shipped forms stay within a few units of the obstacle.
const RUNAWAY_FLOOR: f64 = -100.0;

/// Jacobi sweep for the largest admissible competitor. The center value
/// enters every diagonal Hessian entry as -u(x)/h^2, so the pointwise
/// admissibility cap is u(x) <= h^2 lambda_min(A(x)) with A(x) collecting
/// the form and all neighbor contributions. Each sweep applies that cap
/// together with the obstacle (0 off K, -1 on K) at every node
/// simultaneously, which keeps the iteration deterministic.
pub fn relative_extremal(
    mask: &[bool],
    omega: &ReferenceForm,
    max_sweeps: usize,
    tol: f64,
) -> Result<PeriodicField, CapacityError> {
    let grid = *omega.grid();
    assert_eq!(mask.len(), grid.nodes(), "mask must cover the grid");
    assert!(mask.iter().any(|&b| b), "K must be nonempty");
    let n = grid.complex_dim();
    let h2 = grid.h() * grid.h();
    let inv_h2 = 1.0 / h2;

    let obstacle: Vec<f64> = mask.iter().map(|&k| if k { -1.0 } else { 0.0 }).collect();
    let mut u = obstacle.clone();
    let mut next = vec![0.0f64; grid.nodes()];
    let mut a = vec![Complex64::default(); n * n];
    let geom = grid.stencil();

    let mut change = f64::INFINITY;
    for _ in 0..max_sweeps {
        change = 0.0f64;
        let mut it = grid.iter_nodes();
        while let Some((idx, multi)) = it.next_node() {
            // A(x) = omega(x) + Hess(u)(x) + u(x)/h^2 I, assembled directly
            // from neighbor values (the center terms cancel).
            a.copy_from_slice(omega.at(idx));
            for j in 0..n {
                let (xj, yj) = (2 * j, 2 * j + 1);
                let mut s = 0.0;
                for axis in [xj, yj] {
                    s += u[geom.step(idx, multi[axis], axis, true)];
                    s += u[geom.step(idx, multi[axis], axis, false)];
                }
                a[j * n + j] += Complex64::new(0.25 * s * inv_h2, 0.0);
                for k in j + 1..n {
                    let (xk, yk) = (2 * k, 2 * k + 1);
                    let mixed = |p: usize, q: usize| -> f64 {
                        let pa = geom.step(idx, multi[p], p, true);
                        let ma = geom.step(idx, multi[p], p, false);
                        let pp = u[geom.step(pa, multi[q], q, true)];
                        let pm = u[geom.step(pa, multi[q], q, false)];
                        let mp = u[geom.step(ma, multi[q], q, true)];
                        let mm = u[geom.step(ma, multi[q], q, false)];
                        (pp - pm - mp + mm) * 0.25 * inv_h2
                    };
                    let re = 0.25 * (mixed(xj, xk) + mixed(yj, yk));
                    let im = 0.25 * (mixed(xj, yk) - mixed(yj, xk));
                    a[j * n + k] = a[j * n + k] + Complex64::new(re, im);
                    a[k * n + j] = a[j * n + k].conj();
                }
            }
            let cap = h2 * linalg::herm_min_eig(&a, n);
            let candidate = obstacle[idx].min(cap);
            change = change.max((candidate - u[idx]).abs());
            next[idx] = candidate;
        }
        std::mem::swap(&mut u, &mut next);
        if change <= tol {
            let field = PeriodicField::new(grid, u).expect("sweep values stay finite");
            return Ok(field);
        }
        if u.iter().any(|&v| v < RUNAWAY_FLOOR) {
            break;
        }
    }

    Err(CapacityError::NonConvergence {
        change,
        last: Box::new(PeriodicField::new(grid, u).unwrap_or_else(|_| PeriodicField::zeros(grid))),
    })
}
