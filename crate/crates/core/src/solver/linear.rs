//! Matrix-free linear algebra for the Newton steps: the linearization of
//! phi -> log det(omega_eps + Hess(phi)) - t phi and a Jacobi-preconditioned
//! BiCGSTAB iteration with a hard relative-residual contract.

use crate::grid::GridSpec;
use crate::util;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("Krylov breakdown after {iters} iterations (rel res {rel_res:.3e})")]
    Breakdown { iters: usize, rel_res: f64 },
    #[error("linear solve stalled at rel res {rel_res:.3e} after {iters} iterations (target {target:.1e})")]
    Stagnation {
        iters: usize,
        rel_res: f64,
        target: f64,
    },
}

/// A delta = t delta - tr(W(x) Hess(delta)(x)) with W the per-node inverse
/// of omega_eps + Hess(phi). For t = 0 the operator annihilates constants;
/// `project` additionally removes the mean of the output so the system can
/// be posed on the mean-zero gauge.
pub struct NewtonOperator<'a> {
    grid: GridSpec,
    w_inv: &'a [Complex64],
    t: f64,
    project: bool,
}

impl<'a> NewtonOperator<'a> {
    pub fn new(grid: GridSpec, w_inv: &'a [Complex64], t: f64, project: bool) -> Self {
        debug_assert_eq!(
            w_inv.len(),
            grid.nodes() * grid.complex_dim() * grid.complex_dim()
        );
        NewtonOperator {
            grid,
            w_inv,
            t,
            project,
        }
    }

    /// Apply without the mean projection.
    pub fn apply_raw(&self, x: &[f64], y: &mut [f64]) {
        let grid = &self.grid;
        let n = grid.complex_dim();
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let geom = grid.stencil();
        let mut it = grid.iter_nodes();
        while let Some((idx, multi)) = it.next_node() {
            let w = &self.w_inv[idx * n * n..(idx + 1) * n * n];

            let mut trace = 0.0;
            for j in 0..n {
                let (xj, yj) = (2 * j, 2 * j + 1);
                let mut s = -4.0 * x[idx];
                for axis in [xj, yj] {
                    s += x[geom.step(idx, multi[axis], axis, true)];
                    s += x[geom.step(idx, multi[axis], axis, false)];
                }
                let h_jj = 0.25 * s * inv_h2;
                trace += w[j * n + j].re * h_jj;
                for k in j + 1..n {
                    let (xk, yk) = (2 * k, 2 * k + 1);
                    let mixed = |p: usize, q: usize| -> f64 {
                        let pa = geom.step(idx, multi[p], p, true);
                        let ma = geom.step(idx, multi[p], p, false);
                        (x[geom.step(pa, multi[q], q, true)]
                            - x[geom.step(pa, multi[q], q, false)]
                            - x[geom.step(ma, multi[q], q, true)]
                            + x[geom.step(ma, multi[q], q, false)])
                            * 0.25
                            * inv_h2
                    };
                    let re = 0.25 * (mixed(xj, xk) + mixed(yj, yk));
                    let im = 0.25 * (mixed(xj, yk) - mixed(yj, xk));
                    // 2 Re(W_jk conj(H_jk))
                    trace += 2.0 * (w[j * n + k].re * re + w[j * n + k].im * im);
                }
            }
            y[idx] = self.t * x[idx] - trace;
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_raw(x, y);
        if self.project {
            let mean = util::mean(y);
            for v in y.iter_mut() {
                *v -= mean;
            }
        }
    }

    /// Diagonal of the unprojected operator: t + tr(W)/h^2.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.grid.complex_dim();
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        (0..self.grid.nodes())
            .map(|idx| {
                let w = &self.w_inv[idx * n * n..(idx + 1) * n * n];
                let mut tr = 0.0;
                for j in 0..n {
                    tr += w[j * n + j].re;
                }
                self.t + tr * inv_h2
            })
            .collect()
    }
}

/// Allocation-free blocked dot product; sequential, hence deterministic.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 1024;
    let mut total = 0.0;
    for (ca, cb) in a.chunks(BLOCK).zip(b.chunks(BLOCK)) {
        let mut partial = 0.0;
        for (x, y) in ca.iter().zip(cb) {
            partial += x * y;
        }
        total += partial;
    }
    total
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned BiCGSTAB with restarts. The recursive residual
/// drifts away from the true one over long runs, so each cycle is capped
/// and the iteration re-bases on the recomputed residual b - A x until the
/// true residual meets max(rel_tol * |b|, abs_floor); exhausting the
/// budget without meeting it is a hard error. The absolute floor covers
/// right-hand sides that sit at the rounding scale of the problem (a
/// nearly constant Newton residual projects to almost nothing).
pub fn bicgstab(
    op: &NewtonOperator<'_>,
    b: &[f64],
    rel_tol: f64,
    abs_floor: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, usize), LinearError> {
    let nn = b.len();
    let diag = op.diagonal();
    let precond = |z: &mut [f64]| {
        for (v, d) in z.iter_mut().zip(&diag) {
            *v /= d;
        }
    };

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; nn], 0));
    }
    let target = (rel_tol * b_norm).max(abs_floor);
    let rel_tol = target / b_norm;
    let cycle_cap = 150usize;

    let mut x = vec![0.0; nn];
    let mut best_x = x.clone();
    let mut best_rel = f64::INFINITY;
    let mut total_iters = 0usize;
    let mut stalled_cycles = 0usize;

    'restart: while total_iters < max_iters {
        // re-base on the true residual; BiCGSTAB's recursive residual
        // drifts once the iteration passes its attainable optimum
        let mut r = vec![0.0; nn];
        op.apply(&x, &mut r);
        for i in 0..nn {
            r[i] = b[i] - r[i];
        }
        let entry_rel = norm2(&r) / b_norm;
        if entry_rel < best_rel {
            best_rel = entry_rel;
            best_x.copy_from_slice(&x);
        } else {
            // drifted past the optimum: resume from the best iterate
            x.copy_from_slice(&best_x);
            op.apply(&x, &mut r);
            for i in 0..nn {
                r[i] = b[i] - r[i];
            }
        }
        if best_rel <= rel_tol {
            return Ok((best_x, total_iters));
        }
        if entry_rel >= best_rel * 0.9 {
            stalled_cycles += 1;
            if stalled_cycles >= 6 {
                return Err(LinearError::Stagnation {
                    iters: total_iters,
                    rel_res: best_rel,
                    target: rel_tol,
                });
            }
        } else {
            stalled_cycles = 0;
        }

        let r_hat = r.clone();
        let mut rho_old = 1.0f64;
        let mut alpha = 1.0f64;
        let mut omega = 1.0f64;
        let mut v = vec![0.0; nn];
        let mut p = vec![0.0; nn];
        let mut phat = vec![0.0; nn];
        let mut s = vec![0.0; nn];
        let mut shat = vec![0.0; nn];
        let mut t_vec = vec![0.0; nn];

        for _ in 0..cycle_cap {
            if total_iters >= max_iters {
                break 'restart;
            }
            total_iters += 1;

            let rho = dot(&r_hat, &r);
            if rho.abs() < 1e-300 * b_norm * b_norm {
                continue 'restart;
            }
            let beta = (rho / rho_old) * (alpha / omega);
            for i in 0..nn {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            phat.copy_from_slice(&p);
            precond(&mut phat);
            op.apply(&phat, &mut v);
            let denom = dot(&r_hat, &v);
            if denom.abs() < 1e-300 * b_norm * b_norm {
                continue 'restart;
            }
            alpha = rho / denom;
            for i in 0..nn {
                s[i] = r[i] - alpha * v[i];
            }
            if norm2(&s) <= rel_tol * b_norm {
                for i in 0..nn {
                    x[i] += alpha * phat[i];
                }
                continue 'restart;
            }
            shat.copy_from_slice(&s);
            precond(&mut shat);
            op.apply(&shat, &mut t_vec);
            let tt = dot(&t_vec, &t_vec);
            if tt == 0.0 {
                continue 'restart;
            }
            omega = dot(&t_vec, &s) / tt;
            if omega == 0.0 {
                continue 'restart;
            }
            for i in 0..nn {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t_vec[i];
            }
            if norm2(&r) <= rel_tol * b_norm {
                continue 'restart;
            }
            rho_old = rho;
        }
    }

    // final verdict on the best iterate seen
    let mut ax = vec![0.0; nn];
    op.apply(&best_x, &mut ax);
    let resid: Vec<f64> = b.iter().zip(&ax).map(|(bv, av)| bv - av).collect();
    let rel_res = norm2(&resid) / b_norm;
    if rel_res <= rel_tol {
        Ok((best_x, total_iters))
    } else {
        Err(LinearError::Stagnation {
            iters: total_iters,
            rel_res,
            target: rel_tol,
        })
    }
}
