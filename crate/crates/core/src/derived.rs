//! Quantities built on the joint laws: peak-to-average ratio probabilities,
//! marginals, conditionals and moments.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discrete::PmfTriangle;
use crate::error::{Error, Result};
use crate::grid::{GridFunction2D, GridKind};
use crate::quadrature::{simpson_pieces, simpson_uniform};

/// `Pr(alpha <= ρ_n <= beta)` with `ρ_n = n Z_n / Y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaprQuery {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
}

impl PaprQuery {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= alpha) || !beta.is_finite() && !beta.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= alpha <= beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(Self { alpha, beta, n })
    }

    // ρ in [alpha, beta] iff y/z in [n/beta, n/alpha], intersected with [1, n]
    fn ratio_range(&self) -> (f64, f64) {
        let nf = self.n as f64;
        let lo = if self.beta > 0.0 { nf / self.beta } else { f64::INFINITY };
        let hi = if self.alpha > 0.0 { nf / self.alpha } else { f64::INFINITY };
        (lo.max(1.0), hi.min(nf))
    }
}

fn check_order(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::OrderMismatch { expected, got });
    }
    Ok(())
}

/// Integrates `g_n` over the wedge between the two rays. In ratio
/// coordinates the wedge is the band `n / beta <= y / z <= n / alpha`, so the
/// integral is `∫ z ∫ g(t z, z) dt dz` with constant `t` limits.
pub fn papr_prob_continuous(pdf: &GridFunction2D, q: &PaprQuery) -> Result<f64> {
    pdf.require(GridKind::Pdf)?;
    check_order(q.n, pdf.n())?;
    let (lo, hi) = q.ratio_range();
    if !(hi > lo) {
        return Ok(0.0);
    }
    let lat = pdf.wedge()?;
    let rows: Vec<f64> = (0..lat.n_z()).map(|j| lat.z(j) * lat.row_integral(j, lo, hi)).collect();
    Ok(simpson_uniform(&rows, lat.h_z()).clamp(0.0, 1.0))
}

/// Exact double sum over `l >= 1` and
/// `⌈max(alpha, 1) l / n⌉ <= m <= ⌊min(beta / n, 1) l⌋`.
pub fn papr_prob_discrete(pmf: &PmfTriangle, q: &PaprQuery) -> Result<f64> {
    check_order(q.n, pmf.n())?;
    let nf = q.n as f64;
    let a = q.alpha.max(1.0) / nf;
    let b = (q.beta / nf).min(1.0);
    let mut acc = 0.0;
    for l in 1..=pmf.l_max() {
        let lf = l as f64;
        // guard the ceil/floor against products like 3 * (1/3)
        let m_lo = (a * lf - 1e-9).ceil().max(0.0) as usize;
        let m_hi = (b * lf + 1e-9).floor();
        if m_hi < 0.0 {
            continue;
        }
        for m in m_lo..=(m_hi as usize).min(l) {
            acc += pmf.get(l, m);
        }
    }
    Ok(acc)
}

/// `Pr(Ŷ_n = 0)`, the mass where the ratio is undefined.
pub fn prob_sum_zero(pmf: &PmfTriangle) -> f64 {
    pmf.get(0, 0)
}

/// A joint law to derive from.
#[derive(Debug, Clone, Copy)]
pub enum Joint<'a> {
    Density(&'a GridFunction2D),
    Mass(&'a PmfTriangle),
}

/// Conditioning variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// The sum `Y_n`.
    Sum,
    /// The maximum `Z_n`.
    Max,
}

/// A one-dimensional result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1D {
    pub coordinate: Vec<f64>,
    pub value: Vec<f64>,
}

impl Table1D {
    pub fn len(&self) -> usize {
        self.coordinate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinate.is_empty()
    }

    /// CSV with header `coordinate,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["coordinate", "value"])?;
        for (c, v) in self.coordinate.iter().zip(&self.value) {
            out.serialize((c, v))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Trapezoid integral for densities, plain sum for mass tables.
    pub fn trapezoid(&self) -> f64 {
        self.coordinate
            .windows(2)
            .zip(self.value.windows(2))
            .map(|(c, v)| 0.5 * (c[1] - c[0]) * (v[0] + v[1]))
            .sum()
    }
}

fn density_pdf(g: &GridFunction2D) -> Result<()> {
    g.require(GridKind::Pdf)?;
    if g.n() < 2 {
        return Err(Error::InvalidArgument(
            "a single variable has no joint density on the plane".into(),
        ));
    }
    Ok(())
}

// f_Y(y) = ∫_{y/n}^{min(y, z_max)} g(y, w) dw
fn sum_density_at(lat: &crate::lattice::WedgeLattice, n: usize, y: f64) -> f64 {
    if !(y > 0.0) {
        return 0.0;
    }
    let nf = n as f64;
    let hi = y.min(lat.z_max());
    let lo = y / nf;
    let mut cuts: Vec<f64> = (2..n).map(|m| y / m as f64).collect();
    simpson_pieces(|w| lat.eval(y, w), lo, hi, &mut cuts, 0.5 * lat.h_z())
}

/// Marginal density of the sum (continuous) or mass of the sum (discrete).
pub fn marginal_sum(joint: Joint) -> Result<Table1D> {
    match joint {
        Joint::Density(g) => {
            density_pdf(g)?;
            let lat = g.wedge()?;
            let spec = g.spec();
            let coordinate: Vec<f64> = (0..spec.n_y).map(|i| spec.y(i)).collect();
            let value = coordinate.iter().map(|&y| sum_density_at(&lat, g.n(), y).max(0.0)).collect();
            Ok(Table1D { coordinate, value })
        }
        Joint::Mass(t) => {
            let mut value = vec![0.0; t.l_max() + 1];
            for e in t.entries() {
                value[e.l] += e.prob;
            }
            Ok(Table1D {
                coordinate: (0..=t.l_max()).map(|l| l as f64).collect(),
                value,
            })
        }
    }
}

/// Marginal density or mass of the maximum.
pub fn marginal_max(joint: Joint) -> Result<Table1D> {
    match joint {
        Joint::Density(g) => {
            density_pdf(g)?;
            let lat = g.wedge()?;
            let k = g.n() as f64;
            let coordinate: Vec<f64> = (0..lat.n_z()).map(|j| lat.z(j)).collect();
            let value = (0..lat.n_z())
                .map(|j| (lat.z(j) * lat.row_integral(j, 1.0, k)).max(0.0))
                .collect();
            Ok(Table1D { coordinate, value })
        }
        Joint::Mass(t) => {
            let mut value = vec![0.0; t.m_max() + 1];
            for e in t.entries() {
                value[e.m] += e.prob;
            }
            Ok(Table1D {
                coordinate: (0..=t.m_max()).map(|m| m as f64).collect(),
                value,
            })
        }
    }
}

const DEGENERATE: f64 = 1e-12;

/// Conditional density (mass) of the other variable given `axis = value`.
/// Continuous slices are sampled at `points` evenly spaced coordinates over
/// the support interval.
pub fn conditional(joint: Joint, axis: Axis, value: f64, points: usize) -> Result<Table1D> {
    match joint {
        Joint::Density(g) => {
            density_pdf(g)?;
            let lat = g.wedge()?;
            let n = g.n();
            let nf = n as f64;
            let points = points.max(2);
            let (lo, hi, marginal) = match axis {
                Axis::Max => {
                    if !(value > 0.0 && value <= lat.z_max()) {
                        return Err(Error::OutOfCoverage { y: value, z: value });
                    }
                    (value, nf * value, value * lat.integral_at(value, 1.0, nf))
                }
                Axis::Sum => {
                    if !(value > 0.0) {
                        return Err(Error::DegenerateSlice { value, marginal: 0.0 });
                    }
                    (value / nf, value.min(lat.z_max()), sum_density_at(&lat, n, value))
                }
            };
            if !(marginal > DEGENERATE) {
                return Err(Error::DegenerateSlice { value, marginal });
            }
            let step = (hi - lo) / (points - 1) as f64;
            let coordinate: Vec<f64> = (0..points).map(|p| lo + p as f64 * step).collect();
            let value_col = coordinate
                .iter()
                .map(|&c| {
                    let g = match axis {
                        Axis::Max => lat.eval(c, value),
                        Axis::Sum => lat.eval(value, c),
                    };
                    g.max(0.0) / marginal
                })
                .collect();
            Ok(Table1D {
                coordinate,
                value: value_col,
            })
        }
        Joint::Mass(t) => {
            if !(value >= 0.0) || value.fract() != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "discrete conditioning value must be a nonnegative integer, got {value}"
                )));
            }
            let v = value as usize;
            let n = t.n();
            let (coords, probs): (Vec<usize>, Vec<f64>) = match axis {
                Axis::Max => (v..=(n * v).min(t.l_max())).map(|l| (l, t.get(l, v))).unzip(),
                Axis::Sum => {
                    let lo = v.div_ceil(n);
                    (lo..=v.min(t.m_max())).map(|m| (m, t.get(v, m))).unzip()
                }
            };
            let marginal: f64 = probs.iter().sum();
            if !(marginal > DEGENERATE) {
                return Err(Error::DegenerateSlice { value, marginal });
            }
            Ok(Table1D {
                coordinate: coords.into_iter().map(|c| c as f64).collect(),
                value: probs.into_iter().map(|p| p / marginal).collect(),
            })
        }
    }
}

/// `E h(Y_n, Z_n)` over the restricted domain.
pub fn expectation<H: Fn(f64, f64) -> f64>(joint: Joint, h: H) -> Result<f64> {
    match joint {
        Joint::Density(g) => {
            density_pdf(g)?;
            let lat = g.wedge()?;
            let k = g.n() as f64;
            let mut bad: Option<(f64, f64)> = None;
            let rows: Vec<f64> = (0..lat.n_z())
                .map(|j| {
                    let w = lat.z(j);
                    if w == 0.0 {
                        return 0.0;
                    }
                    w * lat.row_integral_weighted(j, 1.0, k, |t| {
                        let v = h(t * w, w);
                        if !v.is_finite() && bad.is_none() {
                            bad = Some((t * w, w));
                        }
                        v
                    })
                })
                .collect();
            if let Some((y, z)) = bad {
                return Err(Error::NonFinite { y, z });
            }
            Ok(simpson_uniform(&rows, lat.h_z()))
        }
        Joint::Mass(t) => {
            let mut acc = 0.0;
            for e in t.entries() {
                if e.prob > 0.0 {
                    let v = h(e.l as f64, e.m as f64);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            y: e.l as f64,
                            z: e.m as f64,
                        });
                    }
                    acc += v * e.prob;
                }
            }
            Ok(acc)
        }
    }
}

/// `E(Y_n^a Z_n^b)`. Negative exponents on a density are refused when the
/// density is positive within one grid cell of the origin, where the moment
/// need not exist.
pub fn joint_moment(joint: Joint, a: f64, b: f64) -> Result<f64> {
    if let Joint::Density(g) = joint {
        if a < 0.0 || b < 0.0 {
            density_pdf(g)?;
            let lat = g.wedge()?;
            let width = (g.n() - 1) * lat.per_unit() + 1;
            let near_origin = (0..2).any(|j| (0..width).any(|p| lat.value(j, p) > 0.0));
            if near_origin {
                return Err(Error::InvalidArgument(format!(
                    "moment with exponents ({a}, {b}) is not defined: the density reaches the origin"
                )));
            }
        }
    }
    expectation(joint, |y, z| y.powf(a) * z.powf(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::pmf_recursive;
    use crate::models::DiscreteModel;
    use approx::assert_abs_diff_eq;

    fn bern3() -> PmfTriangle {
        let b = DiscreteModel::bernoulli(0.5).unwrap();
        pmf_recursive(&[b.clone(), b.clone(), b], None).unwrap()
    }

    #[test]
    fn discrete_papr_examples() {
        let t = bern3();
        let q = |a, b| PaprQuery::new(a, b, 3).unwrap();
        assert_abs_diff_eq!(papr_prob_discrete(&t, &q(1.0, 3.0)).unwrap(), 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(papr_prob_discrete(&t, &q(3.0, 3.0)).unwrap(), 0.375, epsilon = 1e-15);
        assert_eq!(papr_prob_discrete(&t, &q(0.2, 0.9)).unwrap(), 0.0);
        assert_abs_diff_eq!(prob_sum_zero(&t), 0.125, epsilon = 1e-15);
        assert!(papr_prob_discrete(&t, &PaprQuery::new(1.0, 2.0, 2).unwrap()).is_err());
        assert!(PaprQuery::new(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn discrete_marginals_and_conditionals() {
        let t = bern3();
        let mx = marginal_max(Joint::Mass(&t)).unwrap();
        assert_abs_diff_eq!(mx.value[0], 0.125, epsilon = 1e-15);
        let sm = marginal_sum(Joint::Mass(&t)).unwrap();
        assert_abs_diff_eq!(sm.value[2], 0.375, epsilon = 1e-15);
        let b = DiscreteModel::bernoulli(0.5).unwrap();
        let pair = pmf_recursive(&[b.clone(), b], None).unwrap();
        let c = conditional(Joint::Mass(&pair), Axis::Max, 0.0, 0).unwrap();
        assert_eq!(c.coordinate, vec![0.0]);
        assert_eq!(c.value, vec![1.0]);
        let c = conditional(Joint::Mass(&t), Axis::Sum, 2.0, 0).unwrap();
        assert_abs_diff_eq!(c.value.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            conditional(Joint::Mass(&t), Axis::Max, 2.0, 0),
            Err(Error::DegenerateSlice { .. })
        ));
        assert_abs_diff_eq!(expectation(Joint::Mass(&t), |y, _| y).unwrap(), 1.5, epsilon = 1e-15);
        assert!(joint_moment(Joint::Mass(&t), -1.0, 0.0).is_err());
    }
}
