//! Joint CDF and PDF of the sum and maximum of continuous variables.
//!
//! CDF grids are built column by column: at a fixed `z` the recurrence is a
//! one-dimensional convolution in `y`, integrated cell by cell with
//! three-point Gauss–Legendre on a cubic interpolant of the previous column.
//! Where `y >= (k-1) z` the previous CDF is the constant `Π F_i(z)` and that
//! part of the integral is done in closed form.
//!
//! PDF grids are built on a [`WedgeLattice`]; the first step uses the closed
//! form of `g_2` so the singular one-variable density never appears.

use std::sync::Arc;

use crate::discrete;
use crate::error::{Error, Result};
use crate::grid::{fingerprint_continuous, fingerprint_variables, in_wedge, GridFunction2D, GridKind, GridSpec, IntegerJumps};
use crate::lattice::{WedgeLattice, DEFAULT_PER_UNIT};
use crate::models::{ContinuousModel, Variable};
use crate::quadrature::{cubic_stencil, cubic_strided, simpson_pieces, GL3_NODES, GL3_WEIGHTS};

// tolerance for deciding that a coordinate sits on a node or integer
const SNAP: f64 = 1e-9;

fn check_models(models: &[ContinuousModel]) -> Result<()> {
    if models.is_empty() {
        return Err(Error::EmptyModels);
    }
    for (index, m) in models.iter().enumerate() {
        if m.shift() > 0.0 {
            return Err(Error::ShiftedModel { index });
        }
    }
    Ok(())
}

fn check_variables(vars: &[Variable]) -> Result<()> {
    if vars.is_empty() {
        return Err(Error::EmptyModels);
    }
    for (index, v) in vars.iter().enumerate() {
        let shifted = match v {
            Variable::Continuous(m) => m.shift() > 0.0,
            Variable::Discrete(m) => m.shift() > 0,
        };
        if shifted {
            return Err(Error::ShiftedModel { index });
        }
    }
    Ok(())
}

// F(x) at a grid coordinate; discrete floors get a little slack so that
// 0.9999999999 counts as 1
fn node_cdf(v: &Variable, x: f64) -> f64 {
    match v {
        Variable::Continuous(m) => m.cdf(x),
        Variable::Discrete(m) => m.cdf(x + SNAP),
    }
}

fn pdf_finite(m: &ContinuousModel, x: f64) -> f64 {
    let v = m.pdf(x);
    if v.is_finite() {
        v
    } else {
        m.pdf(x + 1e-9)
    }
}

// G_{k-1}(., z_j) along one column
enum Column<'a> {
    First(&'a Variable, f64),
    Grid {
        values: &'a [f64],
        j: usize,
        n_y: usize,
        n_z: usize,
        h_y: f64,
        // (z_j, k - 1) when the previous law is continuous: G_{k-1}(., z_j)
        // then has kinks at multiples of z_j up to (k - 1) z_j
        kinks: Option<(f64, usize)>,
    },
}

impl Column<'_> {
    #[inline]
    fn at(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        match *self {
            Column::First(v, z) => node_cdf(v, y.min(z)),
            Column::Grid {
                values,
                j,
                n_y,
                n_z,
                h_y,
                kinks,
            } => {
                let u = (y / h_y).min((n_y - 1) as f64);
                let r = u.round();
                if (u - r).abs() < SNAP {
                    return values[r as usize * n_z + j];
                }
                let (lo, hi) = match kinks {
                    Some((z, order)) if z > 0.0 => {
                        let seg = ((y / z).floor() as usize).min(order - 1);
                        let a = seg as f64 * z;
                        let lo = (a / h_y - SNAP).ceil().max(0.0) as usize;
                        let hi = if seg == order - 1 {
                            n_y - 1
                        } else {
                            (((seg + 1) as f64 * z / h_y + SNAP).floor() as usize).min(n_y - 1)
                        };
                        (lo, hi)
                    }
                    _ => (0, n_y - 1),
                };
                if hi >= lo + 3 {
                    let (s, w) = cubic_stencil(u, lo, hi);
                    let base = s * n_z + j;
                    w[0] * values[base]
                        + w[1] * values[base + n_z]
                        + w[2] * values[base + 2 * n_z]
                        + w[3] * values[base + 3 * n_z]
                } else {
                    cubic_strided(values, j, n_z, n_y, u)
                }
            }
        }
    }
}

// first column whose z covers each row's y
fn copy_columns(spec: &GridSpec) -> Vec<usize> {
    (0..spec.n_y)
        .map(|i| {
            let y = spec.y(i);
            let j = (y / spec.h_z() - SNAP).ceil().max(0.0) as usize;
            j.min(spec.n_z)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn continuous_step(
    prev: &Option<Vec<f64>>,
    first: &Variable,
    prev_prod: &[f64],
    fk: &ContinuousModel,
    k: usize,
    prior_bps: &[f64],
    spec: &GridSpec,
    starts: &[usize],
) -> Vec<f64> {
    let (n_y, n_z, h) = (spec.n_y, spec.n_z, spec.h_y());
    let km1 = (k - 1) as f64;
    let bps = fk.breakpoints();
    let prior: Vec<f64> = prior_bps.iter().copied().filter(|&b| b > 0.0).collect();
    // f_k at x = (d - θ_g) h
    let mut ftab = vec![0.0; n_y * 3];
    for d in 1..n_y {
        for g in 0..3 {
            ftab[d * 3 + g] = pdf_finite(fk, (d as f64 - GL3_NODES[g]) * h);
        }
    }
    let mut out = vec![0.0; n_y * n_z];
    let mut gq = vec![0.0; (n_y - 1) * 3];
    let mut cuts = Vec::new();
    for j in 0..n_z {
        let z = spec.z(j);
        let col = match prev {
            None => Column::First(first, z),
            Some(values) => Column::Grid {
                values,
                j,
                n_y,
                n_z,
                h_y: h,
                kinks: Some((z, k - 1)),
            },
        };
        let top = km1 * z;
        let cells = (((top / h).ceil() as usize) + 1).min(n_y - 1);
        for q in 0..cells {
            for g in 0..3 {
                gq[q * 3 + g] = col.at((q as f64 + GL3_NODES[g]) * h);
            }
        }
        for i in 0..n_y {
            if j > starts[i] {
                out[i * n_z + j] = out[i * n_z + j - 1];
                continue;
            }
            let y = spec.y(i);
            let lo = (y - z).max(0.0);
            let hi = y.min(top);
            let mut v = if y > top {
                prev_prod[j] * fk.cdf((y - top).min(z))
            } else {
                0.0
            };
            if hi > lo {
                cuts.clear();
                cuts.extend(bps.iter().map(|b| y - b).filter(|&c| c > lo && c < hi));
                // kinks of G_{k-1}(., z): multiples of z, shifted by earlier breakpoints
                for m in 0..k - 1 {
                    let mz = m as f64 * z;
                    if m > 0 && mz > lo && mz < hi {
                        cuts.push(mz);
                    }
                    cuts.extend(prior.iter().map(|b| b + mz).filter(|&c| c > lo && c < hi));
                }
                cuts.sort_by(f64::total_cmp);
                let q0 = (lo / h).floor() as usize;
                let q1 = ((hi / h).ceil() as usize).min(n_y - 1);
                let mut acc = 0.0;
                for q in q0..q1 {
                    let (a, b) = (q as f64 * h, (q + 1) as f64 * h);
                    let (pa, pb) = (a.max(lo), b.min(hi));
                    if !(pb > pa) {
                        continue;
                    }
                    let whole = pa <= a + SNAP * h && pb >= b - SNAP * h;
                    let cut_inside = cuts.iter().any(|&c| c > a && c < b);
                    if whole && !cut_inside && i > q {
                        let d = (i - q) * 3;
                        acc += h
                            * (GL3_WEIGHTS[0] * gq[q * 3] * ftab[d]
                                + GL3_WEIGHTS[1] * gq[q * 3 + 1] * ftab[d + 1]
                                + GL3_WEIGHTS[2] * gq[q * 3 + 2] * ftab[d + 2]);
                    } else {
                        let mut s = pa;
                        for &c in cuts.iter().filter(|&&c| c > pa && c < pb).chain(std::iter::once(&pb)) {
                            let len = c - s;
                            for g in 0..3 {
                                let yy = s + GL3_NODES[g] * len;
                                acc += GL3_WEIGHTS[g] * len * col.at(yy) * pdf_finite(fk, y - yy);
                            }
                            s = c;
                        }
                    }
                }
                v += acc;
            }
            out[i * n_z + j] = v.clamp(0.0, 1.0);
        }
    }
    out
}

fn discrete_step(
    prev: &Option<Vec<f64>>,
    first: &Variable,
    fk: &crate::models::DiscreteModel,
    spec: &GridSpec,
    starts: &[usize],
) -> Vec<f64> {
    let (n_y, n_z, h) = (spec.n_y, spec.n_z, spec.h_y());
    let masses = fk.lattice_masses();
    let mut out = vec![0.0; n_y * n_z];
    for j in 0..n_z {
        let z = spec.z(j);
        let col = match prev {
            None => Column::First(first, z),
            Some(values) => Column::Grid {
                values,
                j,
                n_y,
                n_z,
                h_y: h,
                kinks: None,
            },
        };
        let zf = (z + SNAP).floor() as usize;
        for i in 0..n_y {
            if j > starts[i] {
                out[i * n_z + j] = out[i * n_z + j - 1];
                continue;
            }
            let y = spec.y(i);
            let top = ((y + SNAP).floor() as usize).min(zf).min(masses.len() - 1);
            let mut v = 0.0;
            for (m, p) in masses.iter().enumerate().take(top + 1) {
                if *p > 0.0 {
                    v += col.at(y - m as f64) * p;
                }
            }
            out[i * n_z + j] = v.clamp(0.0, 1.0);
        }
    }
    out
}

// vars must list every continuous variable before the discrete ones
fn cdf_chain(vars: &[Variable], spec: &GridSpec) -> Vec<f64> {
    let (n_y, n_z) = (spec.n_y, spec.n_z);
    let first = &vars[0];
    let starts = copy_columns(spec);
    let mut prod: Vec<f64> = (0..n_z).map(|j| node_cdf(first, spec.z(j))).collect();
    let mut grid: Option<Vec<f64>> = None;
    let mut prior_bps: Vec<f64> = match first {
        Variable::Continuous(m) => m.breakpoints(),
        Variable::Discrete(_) => Vec::new(),
    };
    for (idx, v) in vars.iter().enumerate().skip(1) {
        let next = match v {
            Variable::Continuous(m) => {
                let g = continuous_step(&grid, first, &prod, m, idx + 1, &prior_bps, spec, &starts);
                prior_bps.extend(m.breakpoints());
                prior_bps.sort_by(f64::total_cmp);
                prior_bps.dedup();
                g
            }
            Variable::Discrete(m) => discrete_step(&grid, first, m, spec, &starts),
        };
        for (j, p) in prod.iter_mut().enumerate() {
            *p *= node_cdf(v, spec.z(j));
        }
        grid = Some(next);
    }
    match grid {
        Some(mut values) => {
            make_monotone(&mut values, n_y, n_z, &starts);
            values
        }
        None => {
            let mut out = vec![0.0; n_y * n_z];
            for i in 0..n_y {
                for j in 0..n_z {
                    out[i * n_z + j] = node_cdf(first, spec.y(i).min(spec.z(j)));
                }
            }
            out
        }
    }
}

// Removes quadrature noise that breaks monotonicity (of order h^2 near the
// diagonal): running maxima along y, then along z, then the z >= y copy
// rule again. Each pass keeps the ordering established by the previous one.
fn make_monotone(values: &mut [f64], n_y: usize, n_z: usize, starts: &[usize]) {
    for j in 0..n_z {
        for i in 1..n_y {
            let below = values[(i - 1) * n_z + j];
            if values[i * n_z + j] < below {
                values[i * n_z + j] = below;
            }
        }
    }
    for i in 0..n_y {
        let row = &mut values[i * n_z..(i + 1) * n_z];
        for j in 1..n_z {
            if row[j] < row[j - 1] {
                row[j] = row[j - 1];
            }
        }
        for j in (starts[i] + 1)..n_z {
            row[j] = row[j - 1];
        }
    }
}

/// Joint CDF `G_n` on the grid.
pub fn cdf_recursive(models: &[ContinuousModel], spec: &GridSpec) -> Result<GridFunction2D> {
    check_models(models)?;
    spec.validate()?;
    let vars: Vec<Variable> = models.iter().cloned().map(Variable::from).collect();
    let values = cdf_chain(&vars, spec);
    Ok(GridFunction2D::from_parts(
        *spec,
        GridKind::Cdf,
        models.len(),
        values,
        fingerprint_continuous(models),
        None,
    ))
}

/// `G_n(y, z)` at arbitrary points. One variable is evaluated in closed form;
/// otherwise the grid is built once and interpolated.
pub fn cdf_points(models: &[ContinuousModel], spec: &GridSpec, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    check_models(models)?;
    if models.len() == 1 {
        return Ok(points.iter().map(|&(y, z)| models[0].cdf(y.min(z))).collect());
    }
    let grid = cdf_recursive(models, spec)?;
    points.iter().map(|&(y, z)| grid.eval(y, z)).collect()
}

/// Mixed continuous and discrete variables. Continuous variables are
/// processed first (the joint law does not depend on the order); a list of
/// discrete variables only is evaluated exactly on the integer lattice.
pub fn cdf_mixed(vars: &[Variable], spec: &GridSpec) -> Result<GridFunction2D> {
    check_variables(vars)?;
    spec.validate()?;
    let (n_y, n_z) = (spec.n_y, spec.n_z);
    let values = if vars.iter().all(Variable::is_discrete) {
        let masses: Vec<Vec<f64>> = vars
            .iter()
            .map(|v| match v {
                Variable::Discrete(m) => m.lattice_masses(),
                Variable::Continuous(_) => unreachable!(),
            })
            .collect();
        let a_max = (spec.y_max + SNAP).floor() as usize;
        let mut out = vec![0.0; n_y * n_z];
        let mut cached: Option<(usize, Vec<f64>)> = None;
        for j in 0..n_z {
            let m = (spec.z(j) + SNAP).floor() as usize;
            if cached.as_ref().map(|c| c.0) != Some(m) {
                cached = Some((m, discrete::cdf_column(&masses, m, a_max)));
            }
            let col = &cached.as_ref().unwrap().1;
            for i in 0..n_y {
                let a = ((spec.y(i) + SNAP).floor() as usize).min(a_max);
                out[i * n_z + j] = col[a];
            }
        }
        out
    } else {
        let mut ordered: Vec<Variable> = vars.iter().filter(|v| !v.is_discrete()).cloned().collect();
        ordered.extend(vars.iter().filter(|v| v.is_discrete()).cloned());
        cdf_chain(&ordered, spec)
    };
    let jumps = if vars.iter().all(Variable::is_discrete) {
        IntegerJumps::SumAndMax
    } else if vars.iter().any(Variable::is_discrete) {
        IntegerJumps::Max
    } else {
        IntegerJumps::None
    };
    Ok(GridFunction2D::from_parts(
        *spec,
        GridKind::Cdf,
        vars.len(),
        values,
        fingerprint_variables(vars),
        None,
    )
    .with_jumps(jumps))
}

/// Nested-quadrature oracle for `2 <= n <= 4`:
/// `∫…∫ G_1(y - Σ x_i, z) Π f_i(x_i) dx` over `[0, z]^(n-1)`, tensor Simpson
/// with `quad_points` nodes per axis.
pub fn cdf_direct_smalln(models: &[ContinuousModel], y: f64, z: f64, quad_points: usize) -> Result<f64> {
    let n = models.len();
    if !(2..=4).contains(&n) {
        return Err(Error::ModelCount {
            expected: "2 to 4".into(),
            got: n,
        });
    }
    check_models(models)?;
    if !(z > 0.0) || y <= 0.0 {
        return Ok(0.0);
    }
    let q = (quad_points.max(3) - 1) / 2 * 2 + 1;
    let h = z / (q - 1) as f64;
    let xs: Vec<f64> = (0..q).map(|p| p as f64 * h).collect();
    let w: Vec<f64> = (0..q)
        .map(|p| {
            let c = if p == 0 || p == q - 1 {
                1.0
            } else if p % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    let weights: Vec<Vec<f64>> = models[1..]
        .iter()
        .map(|m| xs.iter().zip(&w).map(|(&x, &wp)| wp * pdf_finite(m, x)).collect())
        .collect();
    let f1 = &models[0];
    fn nest(level: usize, rest: f64, weight: f64, xs: &[f64], ws: &[Vec<f64>], f1: &ContinuousModel, z: f64) -> f64 {
        if level == ws.len() {
            return if rest < 0.0 { 0.0 } else { weight * f1.cdf(rest.min(z)) };
        }
        let mut acc = 0.0;
        for (p, &x) in xs.iter().enumerate() {
            let wp = ws[level][p];
            if wp != 0.0 {
                acc += nest(level + 1, rest - x, weight * wp, xs, ws, f1, z);
            }
        }
        acc
    }
    Ok(nest(0, y, 1.0, &xs, &weights, f1, z))
}

// g_2 in closed form
struct PairDensity<'a> {
    f1: &'a ContinuousModel,
    f2: &'a ContinuousModel,
}

impl PairDensity<'_> {
    #[inline]
    fn value(&self, y: f64, z: f64) -> f64 {
        if !in_wedge(y, z, 2) {
            return 0.0;
        }
        let s = (y - z).max(0.0);
        self.f1.pdf(s) * self.f2.pdf(z) + self.f1.pdf(z) * self.f2.pdf(s)
    }
}

trait DensitySource {
    fn at(&self, y: f64, z: f64) -> f64;
    fn at_row(&self, j: usize, z: f64, y: f64) -> f64;
}

impl DensitySource for PairDensity<'_> {
    fn at(&self, y: f64, z: f64) -> f64 {
        self.value(y, z)
    }

    fn at_row(&self, _j: usize, z: f64, y: f64) -> f64 {
        self.value(y, z)
    }
}

impl DensitySource for WedgeLattice {
    fn at(&self, y: f64, z: f64) -> f64 {
        self.eval(y, z)
    }

    fn at_row(&self, j: usize, z: f64, y: f64) -> f64 {
        if z > 0.0 {
            self.eval_row(j, y / z)
        } else {
            0.0
        }
    }
}

struct StepPlan<'a> {
    k: usize,
    fk: &'a ContinuousModel,
    // density breakpoints of the variables already summed
    prior_breaks: &'a [f64],
    iid: bool,
    h_x: f64,
    h_z: f64,
    n_z: usize,
    per_unit: usize,
}

fn pdf_step(src: &dyn DensitySource, plan: &StepPlan) -> WedgeLattice {
    let k = plan.k;
    let kf = k as f64;
    let fk = plan.fk;
    let fk_breaks = fk.breakpoints();
    let mut cuts = Vec::new();
    WedgeLattice::from_fn(k, plan.per_unit, plan.h_z, plan.n_z, |j, t| {
        if j == 0 {
            return 0.0;
        }
        let z = j as f64 * plan.h_z;
        let y = t * z;
        let s = (t - 1.0) * z;
        let fz = pdf_finite(fk, z);
        let i1 = if fz > 0.0 {
            cuts.clear();
            cuts.extend((2..k - 1).map(|m| s / m as f64));
            for &b in plan.prior_breaks {
                cuts.push(b);
                cuts.push(s - b);
            }
            simpson_pieces(|x| src.at(s, x), s / (kf - 1.0), s.min(z), &mut cuts, plan.h_x)
        } else {
            0.0
        };
        let v = if plan.iid {
            kf * fz * i1
        } else {
            cuts.clear();
            cuts.extend((2..k - 1).map(|m| y - m as f64 * z));
            cuts.extend(fk_breaks.iter().copied());
            cuts.extend(plan.prior_breaks.iter().map(|b| s - b));
            let lo = (y - (kf - 1.0) * z).max(0.0);
            let i2 = simpson_pieces(
                |x| {
                    let f = pdf_finite(fk, x);
                    if f == 0.0 {
                        0.0
                    } else {
                        f * src.at_row(j, z, y - x)
                    }
                },
                lo,
                s.min(z),
                &mut cuts,
                plan.h_x,
            );
            fz * i1 + i2
        };
        v.max(0.0)
    })
}

fn resample(lat: &WedgeLattice, spec: &GridSpec, k: usize) -> Vec<f64> {
    let (n_y, n_z) = (spec.n_y, spec.n_z);
    let mut out = vec![0.0; n_y * n_z];
    for i in 0..n_y {
        let y = spec.y(i);
        for j in 0..n_z {
            let z = spec.z(j);
            out[i * n_z + j] = if j == 0 {
                if i == 0 {
                    lat.value(0, 0)
                } else {
                    0.0
                }
            } else if in_wedge(y, z, k) {
                lat.eval_row(j, y / z).max(0.0)
            } else {
                0.0
            };
        }
    }
    out
}

fn pair_grid(models: &[ContinuousModel], spec: &GridSpec, fp: String) -> GridFunction2D {
    let pair = PairDensity {
        f1: &models[0],
        f2: &models[1],
    };
    let (n_y, n_z) = (spec.n_y, spec.n_z);
    let mut values = vec![0.0; n_y * n_z];
    for i in 0..n_y {
        for j in 0..n_z {
            values[i * n_z + j] = pair.value(spec.y(i), spec.z(j));
        }
    }
    let h_z = spec.h_z();
    let lat = WedgeLattice::from_fn(2, DEFAULT_PER_UNIT, h_z, n_z, |j, t| {
        let z = j as f64 * h_z;
        pair.value(t * z, z)
    });
    GridFunction2D::from_parts(*spec, GridKind::Pdf, 2, values, fp, Some(Arc::new(lat)))
}

/// `g_2(y, z) = f_1(y - z) f_2(z) + f_1(z) f_2(y - z)` on `z <= y <= 2 z`.
pub fn pdf_bootstrap_g2(models: &[ContinuousModel], spec: &GridSpec) -> Result<GridFunction2D> {
    if models.len() != 2 {
        return Err(Error::ModelCount {
            expected: "exactly 2".into(),
            got: models.len(),
        });
    }
    check_models(models)?;
    spec.validate()?;
    Ok(pair_grid(models, spec, fingerprint_continuous(models)))
}

fn pdf_chain(models: &[ContinuousModel], spec: &GridSpec, iid: bool) -> Result<Vec<GridFunction2D>> {
    if models.len() < 2 {
        return Err(Error::ModelCount {
            expected: "at least 2".into(),
            got: models.len(),
        });
    }
    check_models(models)?;
    spec.validate()?;
    let n = models.len();
    let mut grids = vec![pair_grid(models, spec, fingerprint_continuous(&models[..2]))];
    let pair = PairDensity {
        f1: &models[0],
        f2: &models[1],
    };
    let mut breaks: Vec<f64> = models[0].breakpoints();
    breaks.extend(models[1].breakpoints());
    let mut lat: Option<Arc<WedgeLattice>> = None;
    for k in 3..=n {
        breaks.retain(|b| *b > 0.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let plan = StepPlan {
            k,
            fk: &models[k - 1],
            prior_breaks: &breaks,
            iid,
            h_x: 0.5 * spec.h_y().min(spec.h_z()),
            h_z: spec.h_z(),
            n_z: spec.n_z,
            per_unit: DEFAULT_PER_UNIT,
        };
        let next = match &lat {
            None => pdf_step(&pair, &plan),
            Some(l) => pdf_step(l.as_ref(), &plan),
        };
        let values = resample(&next, spec, k);
        let next = Arc::new(next);
        grids.push(GridFunction2D::from_parts(
            *spec,
            GridKind::Pdf,
            k,
            values,
            fingerprint_continuous(&models[..k]),
            Some(Arc::clone(&next)),
        ));
        breaks.extend(models[k - 1].breakpoints());
        lat = Some(next);
    }
    Ok(grids)
}

/// Joint PDF `g_n` for `n >= 2` variables.
pub fn pdf_recursive(models: &[ContinuousModel], spec: &GridSpec) -> Result<GridFunction2D> {
    Ok(pdf_chain(models, spec, false)?.pop().unwrap())
}

/// `g_2, …, g_n` from one pass of the recurrence.
pub fn pdf_recursive_chain(models: &[ContinuousModel], spec: &GridSpec) -> Result<Vec<GridFunction2D>> {
    pdf_chain(models, spec, false)
}

/// Joint PDF of `n` i.i.d. copies of `model`, one integral per step.
pub fn pdf_iid_recursive(model: &ContinuousModel, n: usize, spec: &GridSpec) -> Result<GridFunction2D> {
    Ok(pdf_iid_chain(model, n, spec)?.pop().unwrap())
}

/// `g_2, …, g_n` for i.i.d. copies of `model`.
pub fn pdf_iid_chain(model: &ContinuousModel, n: usize, spec: &GridSpec) -> Result<Vec<GridFunction2D>> {
    let models = vec![model.clone(); n];
    pdf_chain(&models, spec, true)
}

/// CDF grid obtained by integrating a PDF grid over
/// `{(v, w) : w <= z, v <= y}` in ratio coordinates.
pub fn cdf_from_pdf(pdf: &GridFunction2D) -> Result<GridFunction2D> {
    let lat = pdf.wedge()?;
    let spec = *pdf.spec();
    let k = pdf.n();
    let kf = k as f64;
    let (n_y, n_z) = (spec.n_y, spec.n_z);
    let pu = lat.per_unit() as f64;
    let width = (k - 1) * lat.per_unit() + 1;
    // cumulative row integrals at lattice nodes
    let cum: Vec<Vec<f64>> = (0..n_z)
        .map(|j| {
            let mut c = vec![0.0; width];
            for p in 1..width {
                let (a, b) = (1.0 + (p - 1) as f64 / pu, 1.0 + p as f64 / pu);
                c[p] = c[p - 1] + lat.row_integral(j, a, b);
            }
            c
        })
        .collect();
    let h_z = spec.h_z();
    let mut values = vec![0.0; n_y * n_z];
    let mut inner = vec![0.0; n_z];
    for i in 0..n_y {
        let y = spec.y(i);
        for (j, slot) in inner.iter_mut().enumerate() {
            let w = spec.z(j);
            *slot = if j == 0 {
                0.0
            } else {
                let top = (y / w).min(kf);
                if top <= 1.0 {
                    0.0
                } else {
                    let p = (((top - 1.0) * pu).floor() as usize).min(width - 1);
                    let t_p = 1.0 + p as f64 / pu;
                    w * (cum[j][p] + lat.row_integral(j, t_p, top))
                }
            };
        }
        let mut acc = 0.0;
        values[i * n_z] = 0.0;
        for j in 1..n_z {
            acc += 0.5 * h_z * (inner[j - 1] + inner[j]);
            values[i * n_z + j] = acc.clamp(0.0, 1.0);
        }
    }
    Ok(GridFunction2D::from_parts(
        spec,
        GridKind::Cdf,
        k,
        values,
        pdf.model_fingerprint().to_string(),
        None,
    ))
}

/// Re-expresses shifted models against the common shift `c = max c_i`; each
/// returned model has shift `c_i - c <= 0`.
pub fn common_shift(models: &[ContinuousModel]) -> (Vec<ContinuousModel>, f64) {
    let c = models.iter().map(|m| m.shift()).fold(0.0, f64::max);
    (models.iter().map(|m| m.relocated(m.shift() - c)).collect(), c)
}

/// `G'_n(y, z) = G_n(y + n c, z + c)` at each point; `spec` is the grid of the
/// unshifted computation.
pub fn cdf_shifted_points(models: &[ContinuousModel], spec: &GridSpec, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::EmptyModels);
    }
    let (base, c) = common_shift(models);
    let nc = models.len() as f64 * c;
    let moved: Vec<(f64, f64)> = points.iter().map(|&(y, z)| (y + nc, z + c)).collect();
    if base.len() > 1 {
        for &(y, z) in &moved {
            if !spec.covers(y, z.min(y).max(0.0)) {
                return Err(Error::OutOfCoverage { y, z });
            }
        }
    }
    cdf_points(&base, spec, &moved)
}

pub fn cdf_shifted(models: &[ContinuousModel], spec: &GridSpec, y: f64, z: f64) -> Result<f64> {
    Ok(cdf_shifted_points(models, spec, &[(y, z)])?[0])
}

/// `g'_n(y, z) = g_n(y + n c, z + c)` at each point.
pub fn pdf_shifted_points(models: &[ContinuousModel], spec: &GridSpec, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    let (base, c) = common_shift(models);
    let nc = models.len() as f64 * c;
    let grid = pdf_recursive(&base, spec)?;
    points.iter().map(|&(y, z)| grid.eval(y + nc, z + c)).collect()
}

pub fn pdf_shifted(models: &[ContinuousModel], spec: &GridSpec, y: f64, z: f64) -> Result<f64> {
    Ok(pdf_shifted_points(models, spec, &[(y, z)])?[0])
}

/// `∫∫ g_n` over the lattice.
pub fn total_mass(pdf: &GridFunction2D) -> Result<f64> {
    let lat = pdf.wedge()?;
    let k = pdf.n() as f64;
    let rows: Vec<f64> = (0..lat.n_z()).map(|j| lat.z(j) * lat.row_integral(j, 1.0, k)).collect();
    Ok(crate::quadrature::simpson_uniform(&rows, lat.h_z()))
}
