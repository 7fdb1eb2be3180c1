//! Joint densities sampled in ratio coordinates.
//!
//! `g_k` vanishes outside the wedge `z <= y <= k z` and jumps at its edges, so
//! interpolating it on the `(y, z)` grid smears the jumps. The lattice stores
//! `g_k(t z, z)` for `t` in `[1, k]` instead: the wedge edges become the lattice
//! edges and the kinks of `g_k` at integer `t` fall on lattice lines.
//! Interpolation is cubic in `t` within each unit slab and cubic in `z`.

use crate::grid::{GridFunction2D, GridKind};
use crate::quadrature::{cubic_stencil, lagrange4, GL2_NODES, GL3_NODES, GL3_WEIGHTS};

/// Default number of `t` nodes per unit of ratio.
pub const DEFAULT_PER_UNIT: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeLattice {
    order: usize,
    per_unit: usize,
    h_z: f64,
    n_z: usize,
    width: usize,
    values: Vec<f64>,
}

impl WedgeLattice {
    /// Fills node `(j, p)` with `f(j, t_p)`.
    pub(crate) fn from_fn<F: FnMut(usize, f64) -> f64>(
        order: usize,
        per_unit: usize,
        h_z: f64,
        n_z: usize,
        mut f: F,
    ) -> Self {
        assert!(order >= 2 && per_unit >= 3 && n_z >= 4);
        let width = (order - 1) * per_unit + 1;
        let mut values = Vec::with_capacity(width * n_z);
        for j in 0..n_z {
            for p in 0..width {
                values.push(f(j, 1.0 + p as f64 / per_unit as f64));
            }
        }
        Self {
            order,
            per_unit,
            h_z,
            n_z,
            width,
            values,
        }
    }

    /// Resamples a PDF grid that has no lattice attached. Each `z` row is
    /// interpolated along `y` using only nodes inside the domain.
    pub fn from_grid(grid: &GridFunction2D) -> Self {
        debug_assert_eq!(grid.kind(), GridKind::Pdf);
        let spec = *grid.spec();
        let n = grid.n();
        let (h_y, h_z) = (spec.h_y(), spec.h_z());
        Self::from_fn(n, DEFAULT_PER_UNIT, h_z, spec.n_z, |j, t| {
            let z = j as f64 * h_z;
            if j == 0 {
                return grid.get(0, 0);
            }
            let y = t * z;
            if y > spec.y_max {
                return 0.0;
            }
            // nodes of this row inside [z, n z]
            let lo = (z / h_y - 1e-9).ceil().max(0.0) as usize;
            let hi = (((n as f64 * z) / h_y + 1e-9).floor() as usize).min(spec.n_y - 1);
            if hi < lo {
                return 0.0;
            }
            let u = y / h_y;
            // the density kinks at multiples of z; stay inside one segment when it has enough nodes
            let m = (t.floor().max(1.0) as usize).min(n.max(2) - 1) as f64;
            let s_lo = ((m * z / h_y - 1e-9).ceil() as usize).max(lo);
            let s_hi = ((((m + 1.0) * z) / h_y + 1e-9).floor() as usize).min(hi);
            if s_hi >= s_lo + 3 {
                let (s, w) = cubic_stencil(u, s_lo, s_hi);
                return (0..4).map(|k| w[k] * grid.get(s + k, j)).sum::<f64>().max(0.0);
            }
            if hi - lo < 3 {
                let i = (u.round() as usize).clamp(lo, hi);
                return grid.get(i, j);
            }
            let (s, w) = cubic_stencil(u, lo, hi);
            (0..4).map(|k| w[k] * grid.get(s + k, j)).sum::<f64>().max(0.0)
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn per_unit(&self) -> usize {
        self.per_unit
    }

    pub fn h_z(&self) -> f64 {
        self.h_z
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h_z
    }

    pub fn z_max(&self) -> f64 {
        self.z(self.n_z - 1)
    }

    pub fn value(&self, j: usize, p: usize) -> f64 {
        self.values[j * self.width + p]
    }

    #[inline]
    fn t_stencil(&self, t: f64) -> (usize, [f64; 4]) {
        let t = t.clamp(1.0, self.order as f64);
        let slab = ((t - 1.0).floor() as usize).min(self.order - 2);
        let lo = slab * self.per_unit;
        cubic_stencil((t - 1.0) * self.per_unit as f64, lo, lo + self.per_unit)
    }

    #[inline]
    fn row_dot(&self, j: usize, s: usize, w: &[f64; 4]) -> f64 {
        let r = &self.values[j * self.width + s..j * self.width + s + 4];
        w[0] * r[0] + w[1] * r[1] + w[2] * r[2] + w[3] * r[3]
    }

    #[inline]
    fn inside(&self, t: f64) -> bool {
        t >= 1.0 - 1e-9 && t <= self.order as f64 * (1.0 + 1e-9)
    }

    /// `g(t z_j, z_j)`; zero outside `[1, order]`.
    #[inline]
    pub fn eval_row(&self, j: usize, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (s, w) = self.t_stencil(t);
        self.row_dot(j, s, &w)
    }

    /// `g(y, z)` by interpolation in `(y / z, z)`; zero outside the wedge or
    /// beyond the last row.
    #[inline]
    pub fn eval(&self, y: f64, z: f64) -> f64 {
        if !(z > 0.0) {
            return if z == 0.0 && y == 0.0 { self.values[0] } else { 0.0 };
        }
        let t = y / z;
        let v = z / self.h_z;
        if !self.inside(t) || v > (self.n_z - 1) as f64 * (1.0 + 1e-12) {
            return 0.0;
        }
        let (s, w) = self.t_stencil(t);
        let (zs, zw) = cubic_stencil(v, 0, self.n_z - 1);
        zw.iter().enumerate().map(|(k, wk)| wk * self.row_dot(zs + k, s, &w)).sum()
    }

    /// `∫_a^b g(t z_j, z_j) dt` of the interpolant, limits clamped to `[1, order]`.
    pub fn row_integral(&self, j: usize, a: f64, b: f64) -> f64 {
        self.row_integral_with(j, a, b, |_| 1.0, false)
    }

    /// `∫_a^b w(t) g(t z_j, z_j) dt`; the weight is sampled at three
    /// Gauss points per lattice interval.
    pub fn row_integral_weighted<W: FnMut(f64) -> f64>(&self, j: usize, a: f64, b: f64, weight: W) -> f64 {
        self.row_integral_with(j, a, b, weight, true)
    }

    fn row_integral_with<W: FnMut(f64) -> f64>(
        &self,
        j: usize,
        a: f64,
        b: f64,
        mut weight: W,
        weighted: bool,
    ) -> f64 {
        let top = self.order as f64;
        let (a, b) = (a.max(1.0), b.min(top));
        if !(b > a) {
            return 0.0;
        }
        let pu = self.per_unit as f64;
        let first = ((a - 1.0) * pu).floor() as usize;
        let last = (((b - 1.0) * pu).ceil() as usize).min(self.width - 1);
        let mut total = 0.0;
        for p in first..last {
            let lo = (1.0 + p as f64 / pu).max(a);
            let hi = (1.0 + (p + 1) as f64 / pu).min(b);
            if !(hi > lo) {
                continue;
            }
            // one cubic per interval: stencil fixed by its midpoint
            let s = self.t_stencil(0.5 * (lo + hi)).0;
            let poly = |t: f64| {
                let l = lagrange4((t - 1.0) * pu - s as f64);
                self.row_dot(j, s, &l)
            };
            let len = hi - lo;
            if weighted {
                for (x, wt) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
                    let t = lo + x * len;
                    total += wt * len * weight(t) * poly(t);
                }
            } else {
                for x in GL2_NODES.iter() {
                    total += 0.5 * len * poly(lo + x * len);
                }
            }
        }
        total
    }

    /// `∫_a^b g(t z, z) dt` at an arbitrary `z`, interpolating the row
    /// integrals in `z` (the same as integrating the bicubic interpolant).
    pub fn integral_at(&self, z: f64, a: f64, b: f64) -> f64 {
        let v = z / self.h_z;
        if v < 0.0 || v > (self.n_z - 1) as f64 * (1.0 + 1e-12) {
            return 0.0;
        }
        let (zs, zw) = cubic_stencil(v, 0, self.n_z - 1);
        (0..4).map(|k| zw[k] * self.row_integral(zs + k, a, b)).sum()
    }
}
