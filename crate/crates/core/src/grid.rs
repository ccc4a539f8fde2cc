//! Uniform periodic grid on the real 2n-torus underlying C^n / (Z^n + iZ^n).
//!
//! Axis `2j` carries the real part of the j-th complex coordinate, axis
//! `2j+1` its imaginary part. Nodes sit at `i * h`, `i = 0..m-1`, per axis,
//! stored row-major with the last axis fastest. All index arithmetic is
//! modulo `m`, so the grid has no boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("complex dimension must be >= 1, got {0}")]
    BadDimension(usize),
    #[error("samples per axis must be even and >= 4, got {0}")]
    BadSamples(usize),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("grids differ: {0:?} vs {1:?}")]
    Mismatch(GridSpec, GridSpec),
}

/// Geometry of the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    m: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(n: usize, m: usize, period: f64) -> Result<Self, GridError> {
        if n < 1 {
            return Err(GridError::BadDimension(n));
        }
        if m < 4 || m % 2 != 0 {
            return Err(GridError::BadSamples(m));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(GridError::BadPeriod(period));
        }
        Ok(GridSpec { n, m, period })
    }

    /// Unit-period grid.
    pub fn unit(n: usize, m: usize) -> Result<Self, GridError> {
        GridSpec::new(n, m, 1.0)
    }

    pub fn complex_dim(&self) -> usize {
        self.n
    }

    /// Number of real axes (2n).
    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn samples_per_axis(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.period / self.m as f64
    }

    /// Total node count m^(2n).
    pub fn nodes(&self) -> usize {
        self.m.pow(self.axes() as u32)
    }

    /// Quadrature weight per node. The torus carries the normalized volume
    /// (total mass 1), so integrals are plain node means.
    pub fn node_weight(&self) -> f64 {
        1.0 / self.nodes() as f64
    }

    /// Stride of `axis` in the flat row-major layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.axes() - 1 - axis) as u32)
    }

    /// Decode a flat index into per-axis coordinates.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.axes()];
        for a in (0..self.axes()).rev() {
            multi[a] = idx % self.m;
            idx /= self.m;
        }
        multi
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.axes());
        let mut idx = 0usize;
        for &c in multi {
            debug_assert!(c < self.m);
            idx = idx * self.m + c;
        }
        idx
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(idx).iter().map(|&c| c as f64 * h).collect()
    }

    /// Neighbor of `idx` one step along `axis`; `coord` is the current
    /// coordinate of `idx` on that axis. Wraps periodically.
    #[inline]
    pub fn step(&self, idx: usize, coord: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let span = stride * self.m;
        if forward {
            if coord + 1 == self.m {
                idx + stride - span
            } else {
                idx + stride
            }
        } else if coord == 0 {
            idx + span - stride
        } else {
            idx - stride
        }
    }

    /// Flat index shifted by an arbitrary signed offset per axis.
    pub fn shifted_index(&self, idx: usize, offsets: &[i64]) -> usize {
        debug_assert_eq!(offsets.len(), self.axes());
        let m = self.m as i64;
        let multi = self.multi_index(idx);
        let shifted: Vec<usize> = multi
            .iter()
            .zip(offsets)
            .map(|(&c, &o)| (c as i64 + o).rem_euclid(m) as usize)
            .collect();
        self.flat_index(&shifted)
    }

    /// Shortest periodic distance between two points of the torus.
    pub fn periodic_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.axes());
        debug_assert_eq!(q.len(), self.axes());
        let mut sq = 0.0;
        for (a, b) in p.iter().zip(q) {
            let mut d = (a - b).rem_euclid(self.period);
            if d > self.period / 2.0 {
                d = self.period - d;
            }
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Snap a point to the nearest cell center ((i + 1/2) h per axis), so
    /// that it cannot coincide with any node.
    pub fn snap_to_cell_center(&self, point: &[f64]) -> Vec<f64> {
        let h = self.h();
        point
            .iter()
            .map(|&x| {
                let i = (x / h - 0.5).round();
                ((i + 0.5) * h).rem_euclid(self.period)
            })
            .collect()
    }

    pub fn same_as(&self, other: &GridSpec) -> Result<(), GridError> {
        if self == other {
            Ok(())
        } else {
            Err(GridError::Mismatch(*self, *other))
        }
    }

    /// Grid with doubled resolution, same dimension and period.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            m: self.m * 2,
            period: self.period,
        }
    }

    /// Iterate flat indices together with their multi-indices.
    pub fn iter_nodes(&self) -> NodeIter<'_> {
        NodeIter {
            grid: self,
            idx: 0,
            multi: vec![0; self.axes()],
            started: false,
        }
    }

    /// Precomputed stride table for stencil-heavy loops.
    pub fn stencil(&self) -> StencilGeom {
        let axes = self.axes();
        let mut strides = Vec::with_capacity(axes);
        for a in 0..axes {
            strides.push(self.stride(a));
        }
        StencilGeom { m: self.m, strides }
    }
}

/// Stride table for neighbor arithmetic; `GridSpec::step` recomputes the
/// stride on every call, which is too slow inside the operator loops.
pub struct StencilGeom {
    m: usize,
    strides: Vec<usize>,
}

impl StencilGeom {
    #[inline]
    pub fn step(&self, idx: usize, coord: usize, axis: usize, forward: bool) -> usize {
        let stride = self.strides[axis];
        let span = stride * self.m;
        if forward {
            if coord + 1 == self.m {
                idx + stride - span
            } else {
                idx + stride
            }
        } else if coord == 0 {
            idx + span - stride
        } else {
            idx - stride
        }
    }
}

/// Odometer-style node iterator; avoids a div/mod chain per node.
pub struct NodeIter<'a> {
    grid: &'a GridSpec,
    idx: usize,
    multi: Vec<usize>,
    started: bool,
}

impl NodeIter<'_> {
    /// Flat index and multi-index of the next node, or None when exhausted.
    pub fn next_node(&mut self) -> Option<(usize, &[usize])> {
        if !self.started {
            self.started = true;
        } else {
            self.idx += 1;
            let m = self.grid.m;
            let mut a = self.grid.axes();
            loop {
                if a == 0 {
                    return None;
                }
                a -= 1;
                self.multi[a] += 1;
                if self.multi[a] < m {
                    break;
                }
                self.multi[a] = 0;
            }
        }
        if self.idx >= self.grid.nodes() {
            return None;
        }
        Some((self.idx, &self.multi))
    }
}
