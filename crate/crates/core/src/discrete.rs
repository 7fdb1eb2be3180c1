//! Exact joint CDF and PMF of the sum and maximum of integer variables.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::DiscreteModel;

/// `ĝ_n(l, m)` on the lattice triangle `m <= l <= n m`, truncated at `l_max`.
///
/// Row `m` stores `l = m ..= min(n m, l_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTriangle {
    n: usize,
    l_max: usize,
    rows: Vec<Vec<f64>>,
    dropped_mass: f64,
}

/// Serialized entry of a [`PmfTriangle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub l: usize,
    pub m: usize,
    pub prob: f64,
}

#[derive(Serialize, Deserialize)]
struct PmfJson {
    n: usize,
    l_max: usize,
    dropped_mass: f64,
    entries: Vec<PmfEntry>,
}

impl PmfTriangle {
    pub(crate) fn zeros(n: usize, l_max: usize, m_cap: usize) -> Self {
        let m_cap = m_cap.min(l_max);
        let rows = (0..=m_cap)
            .map(|m| vec![0.0; (n * m).min(l_max) - m + 1])
            .collect();
        Self {
            n,
            l_max,
            rows,
            dropped_mass: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Largest stored `m`.
    pub fn m_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Mass missing from the table: the truncated tails plus every entry with
    /// `l > l_max`.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped_mass
    }

    /// `ĝ_n(l, m)`; zero off the stored triangle.
    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        match self.rows.get(m) {
            Some(row) if l >= m => row.get(l - m).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    #[inline]
    fn get_i(&self, l: i64, m: i64) -> f64 {
        if l < 0 || m < 0 {
            0.0
        } else {
            self.get(l as usize, m as usize)
        }
    }

    #[inline]
    pub(crate) fn set(&mut self, l: usize, m: usize, v: f64) {
        self.rows[m][l - m] = v;
    }

    /// All stored `(l, m, prob)` entries in row order.
    pub fn entries(&self) -> impl Iterator<Item = PmfEntry> + '_ {
        self.rows.iter().enumerate().flat_map(|(m, row)| {
            row.iter().enumerate().map(move |(d, &prob)| PmfEntry { l: m + d, m, prob })
        })
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().flatten().sum()
    }

    pub(crate) fn finish(mut self) -> Self {
        self.dropped_mass = (1.0 - self.total()).max(0.0);
        self
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["l", "m", "prob"])?;
        for e in self.entries() {
            out.serialize((e.l, e.m, e.prob))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PmfJson {
            n: self.n,
            l_max: self.l_max,
            dropped_mass: self.dropped_mass,
            entries: self.entries().collect(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: PmfJson = serde_json::from_str(text)?;
        if j.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let m_cap = j.entries.iter().map(|e| e.m).max().unwrap_or(0);
        let mut t = Self::zeros(j.n, j.l_max, m_cap);
        for e in &j.entries {
            if e.l < e.m || e.l > j.n * e.m || e.l > j.l_max {
                return Err(Error::IndexMismatch(format!(
                    "entry ({}, {}) lies outside the triangle for n = {}",
                    e.l, e.m, j.n
                )));
            }
            t.set(e.l, e.m, e.prob);
        }
        t.dropped_mass = j.dropped_mass;
        Ok(t)
    }
}

/// The auxiliary table `ĥ_n` of the i.i.d. recurrence; same layout as
/// [`PmfTriangle`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuxTable(PmfTriangle);

impl AuxTable {
    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.0.get(l, m)
    }

    pub fn entries(&self) -> impl Iterator<Item = PmfEntry> + '_ {
        self.0.entries()
    }
}

pub(crate) fn masses_of(models: &[DiscreteModel]) -> Result<Vec<Vec<f64>>> {
    if models.is_empty() {
        return Err(Error::EmptyModels);
    }
    models
        .iter()
        .enumerate()
        .map(|(index, m)| {
            if m.shift() > 0 {
                Err(Error::ShiftedModel { index })
            } else {
                Ok(m.lattice_masses())
            }
        })
        .collect()
}

fn default_l_max(masses: &[Vec<f64>]) -> usize {
    masses.iter().map(|m| m.len() - 1).sum()
}

fn m_cap(masses: &[Vec<f64>], l_max: usize) -> usize {
    masses.iter().map(|m| m.len() - 1).max().unwrap_or(0).min(l_max)
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// `Ĝ_n(a, m)` for `a = 0..=a_max` at a fixed integer `m`, by the
/// one-dimensional sum recurrence.
pub(crate) fn cdf_column(masses: &[Vec<f64>], m: usize, a_max: usize) -> Vec<f64> {
    let f1 = &masses[0];
    let mut acc = 0.0;
    let cum: Vec<f64> = f1
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let mut t: Vec<f64> = (0..=a_max)
        .map(|a| cum[a.min(m).min(cum.len() - 1)])
        .collect();
    for f in &masses[1..] {
        let mut next = vec![0.0; a_max + 1];
        for (a, slot) in next.iter_mut().enumerate() {
            let top = a.min(m).min(f.len() - 1);
            let mut s = 0.0;
            for (j, p) in f.iter().enumerate().take(top + 1) {
                s += t[a - j] * p;
            }
            *slot = s;
        }
        t = next;
    }
    t
}

/// `Ĝ_n(y, z) = Pr(Ŷ_n <= y, Ẑ_n <= z)`; exact up to model truncation.
pub fn cdf_recursive_discrete(models: &[DiscreteModel], y: f64, z: f64) -> Result<f64> {
    let masses = masses_of(models)?;
    if !(y >= 0.0 && z >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "arguments must be nonnegative, got y = {y}, z = {z}"
        )));
    }
    let full = default_l_max(&masses);
    let a = (y.floor().min(full as f64)) as usize;
    let m = (z.floor().min(full as f64)) as usize;
    Ok(cdf_column(&masses, m, a)[a])
}

/// Which upper limit the second sum of the PMF recurrence uses. Only
/// [`SecondSumLimit::MMinusOne`] is correct; the other exists to show that
/// it double counts ties for the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondSumLimit {
    MMinusOne,
    M,
}

/// Exact joint PMF by the two-sum recurrence; `l_max` defaults to the sum of
/// the truncated supports.
pub fn pmf_recursive(models: &[DiscreteModel], l_max: Option<usize>) -> Result<PmfTriangle> {
    pmf_recursive_variant(models, l_max, SecondSumLimit::MMinusOne)
}

pub fn pmf_recursive_variant(
    models: &[DiscreteModel],
    l_max: Option<usize>,
    limit: SecondSumLimit,
) -> Result<PmfTriangle> {
    let masses = masses_of(models)?;
    let l_max = l_max.unwrap_or_else(|| default_l_max(&masses));
    let cap = m_cap(&masses, l_max);
    let f1 = &masses[0];
    let mut g = PmfTriangle::zeros(1, l_max, cap);
    for m in 0..=cap {
        g.set(m, m, f1.get(m).copied().unwrap_or(0.0));
    }
    for (idx, f) in masses.iter().enumerate().skip(1) {
        let k = idx + 1;
        let fm = |j: usize| f.get(j).copied().unwrap_or(0.0);
        let mut next = PmfTriangle::zeros(k, l_max, cap);
        for m in 0..=cap {
            for l in m..=(k * m).min(l_max) {
                let d = l - m;
                let mut v = 0.0;
                let fmm = fm(m);
                if fmm > 0.0 {
                    let mut s = 0.0;
                    for j in ceil_div(d, k - 1)..=d.min(m) {
                        s += g.get(d, j);
                    }
                    v += fmm * s;
                }
                let lo = (l as i64 - ((k - 1) * m) as i64).max(0);
                let hi = match limit {
                    SecondSumLimit::MMinusOne => (d as i64).min(m as i64 - 1),
                    SecondSumLimit::M => d.min(m) as i64,
                };
                let mut j = lo;
                while j <= hi {
                    v += fm(j as usize) * g.get_i(l as i64 - j, m as i64);
                    j += 1;
                }
                next.set(l, m, v);
            }
        }
        g = next;
    }
    Ok(g.finish())
}

/// PMF by four-corner differencing of the exact CDF table.
pub fn pmf_from_cdf_differencing(models: &[DiscreteModel], l_max: Option<usize>) -> Result<PmfTriangle> {
    let masses = masses_of(models)?;
    let n = masses.len();
    let l_max = l_max.unwrap_or_else(|| default_l_max(&masses));
    let cap = m_cap(&masses, l_max);
    let mut out = PmfTriangle::zeros(n, l_max, cap);
    let mut below = vec![0.0; l_max + 1];
    for m in 0..=cap {
        let col = cdf_column(&masses, m, l_max);
        for l in m..=(n * m).min(l_max) {
            let g = |t: &[f64], a: i64| if a < 0 { 0.0 } else { t[a as usize] };
            let li = l as i64;
            let v = g(&col, li) - g(&col, li - 1) + g(&below, li - 1) - g(&below, li);
            out.set(l, m, v);
        }
        below = col;
    }
    Ok(out.finish())
}

/// i.i.d. PMF with the auxiliary table; also returns `ĥ_n`.
pub fn pmf_iid_with_h_aux(model: &DiscreteModel, n: usize, l_max: Option<usize>) -> Result<(PmfTriangle, AuxTable)> {
    if n < 2 {
        return Err(Error::ModelCount {
            expected: "at least 2".into(),
            got: n,
        });
    }
    let masses = masses_of(std::slice::from_ref(model))?;
    let f = &masses[0];
    let fm = |j: usize| f.get(j).copied().unwrap_or(0.0);
    let all = vec![f.clone(); n];
    let l_max = l_max.unwrap_or_else(|| default_l_max(&all));
    let cap = m_cap(&all, l_max);
    let mut g = PmfTriangle::zeros(1, l_max, cap);
    for m in 0..=cap {
        g.set(m, m, fm(m));
    }
    let mut h = PmfTriangle::zeros(1, l_max, cap);
    for k in 2..=n {
        let mut gn = PmfTriangle::zeros(k, l_max, cap);
        let mut hn = PmfTriangle::zeros(k, l_max, cap);
        for m in 0..=cap {
            let fmm = fm(m);
            for l in m..=(k * m).min(l_max) {
                let d = l - m;
                let lo = l.saturating_sub((k - 1) * m);
                let mut hv = 0.0;
                for j in lo..=d.min(m) {
                    hv += fm(j) * h.get(l - j, m);
                }
                hv += fmm * g.get(d, m);
                let mut s = 0.0;
                if fmm > 0.0 {
                    for j in ceil_div(d, k - 1)..=d.min(m) {
                        s += g.get(d, j);
                    }
                }
                hn.set(l, m, hv);
                gn.set(l, m, k as f64 * fmm * s - hv);
            }
        }
        g = gn;
        h = hn;
    }
    Ok((g.finish(), AuxTable(h)))
}

pub fn pmf_iid_with_h(model: &DiscreteModel, n: usize, l_max: Option<usize>) -> Result<PmfTriangle> {
    Ok(pmf_iid_with_h_aux(model, n, l_max)?.0)
}

/// Nested-sum oracle for `2 <= n <= 4`:
/// `Σ … Σ Ĝ_1(y - Σ k_i, z) Π f̂_i(k_i)` over `k_i <= ⌊z⌋`.
pub fn cdf_direct_smalln_discrete(models: &[DiscreteModel], y: f64, z: f64) -> Result<f64> {
    let n = models.len();
    if !(2..=4).contains(&n) {
        return Err(Error::ModelCount {
            expected: "2 to 4".into(),
            got: n,
        });
    }
    let masses = masses_of(models)?;
    if !(y >= 0.0 && z >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "arguments must be nonnegative, got y = {y}, z = {z}"
        )));
    }
    let zf = z.floor();
    let f1 = &masses[0];
    let g1 = |rest: f64| -> f64 {
        if rest < 0.0 {
            return 0.0;
        }
        let top = rest.min(z).floor() as usize;
        f1.iter().take(top + 1).sum()
    };
    fn nest(level: usize, rest: f64, w: f64, ms: &[Vec<f64>], zf: f64, g1: &dyn Fn(f64) -> f64) -> f64 {
        if level == ms.len() {
            return w * g1(rest);
        }
        let mut acc = 0.0;
        for (k, &p) in ms[level].iter().enumerate() {
            if k as f64 > zf {
                break;
            }
            if p > 0.0 {
                acc += nest(level + 1, rest - k as f64, w * p, ms, zf, g1);
            }
        }
        acc
    }
    Ok(nest(0, y, 1.0, &masses[1..], zf, &g1))
}

/// Re-expresses shifted models against `λ = max λ_i`; returned shifts are
/// `λ_i - λ <= 0`.
pub fn discrete_common_shift(models: &[DiscreteModel]) -> (Vec<DiscreteModel>, i64) {
    let lambda = models.iter().map(|m| m.shift()).max().unwrap_or(0).max(0);
    (
        models.iter().map(|m| m.relocated(m.shift() - lambda)).collect(),
        lambda,
    )
}

/// `Ĝ'_n(y, z) = Ĝ_n(y + n λ, z + λ)`; zero below the shifted support.
pub fn cdf_shifted_discrete(models: &[DiscreteModel], y: f64, z: f64) -> Result<f64> {
    let (base, lambda) = discrete_common_shift(models);
    let n = models.len() as f64;
    let (ys, zs) = (y + n * lambda as f64, z + lambda as f64);
    if ys < 0.0 || zs < 0.0 {
        return Ok(0.0);
    }
    cdf_recursive_discrete(&base, ys, zs)
}

/// `ĝ'_n(l, m) = ĝ_n(l + n λ, m + λ)`.
pub fn pmf_shifted(models: &[DiscreteModel], l: i64, m: i64) -> Result<f64> {
    let (base, lambda) = discrete_common_shift(models);
    let n = models.len() as i64;
    let (ls, ms) = (l + n * lambda, m + lambda);
    if ls < 0 || ms < 0 {
        return Err(Error::InvalidArgument(format!(
            "shifted index ({ls}, {ms}) is negative"
        )));
    }
    let table = pmf_recursive(&base, Some(ls as usize))?;
    Ok(table.get(ls as usize, ms as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bern() -> DiscreteModel {
        DiscreteModel::bernoulli(0.5).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(cdf_recursive_discrete(&[bern()], 0.5, 3.0).unwrap(), 0.5);
        let u = DiscreteModel::uniform_int(0, 2).unwrap();
        let pair = [u.clone(), u.clone()];
        assert_abs_diff_eq!(cdf_recursive_discrete(&pair, 4.0, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cdf_recursive_discrete(&pair, 2.0, 1.0).unwrap(), 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cdf_direct_smalln_discrete(&pair, 2.0, 1.0).unwrap(), 4.0 / 9.0, epsilon = 1e-15);
        assert!(cdf_recursive_discrete(&pair, -1.0, 1.0).is_err());
        let three = [bern(), bern(), bern()];
        assert_abs_diff_eq!(cdf_direct_smalln_discrete(&three, 1.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cdf_direct_smalln_discrete(&[bern(), bern()], 2.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(cdf_direct_smalln_discrete(&[bern()], 1.0, 1.0).is_err());
    }

    #[test]
    fn pmf_examples() {
        let one = pmf_recursive(&[bern()], None).unwrap();
        assert_eq!(one.get(1, 1), 0.5);
        assert_eq!(one.get(1, 0), 0.0);
        let u = DiscreteModel::uniform_int(0, 2).unwrap();
        let two = pmf_recursive(&[u.clone(), u.clone()], None).unwrap();
        assert_abs_diff_eq!(two.get(2, 1), 1.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two.get(2, 2), 2.0 / 9.0, epsilon = 1e-15);
        let three = pmf_recursive(&[bern(), bern(), bern()], None).unwrap();
        assert_abs_diff_eq!(three.get(2, 1), 3.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(three.total(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn differencing_corner_and_agreement() {
        let u = DiscreteModel::uniform_int(0, 2).unwrap();
        let b = DiscreteModel::binomial(3, 0.4).unwrap();
        let models = [u.clone(), b.clone(), u.clone()];
        let diff = pmf_from_cdf_differencing(&models, None).unwrap();
        let rec = pmf_recursive(&models, None).unwrap();
        let corner: f64 = models.iter().map(|m| m.pmf(0)).product();
        assert_abs_diff_eq!(diff.get(0, 0), corner, epsilon = 1e-15);
        for e in rec.entries() {
            assert_abs_diff_eq!(e.prob, diff.get(e.l, e.m), epsilon = 1e-12);
        }
    }

    #[test]
    fn geometric_truncation_budget() {
        let g = DiscreteModel::geometric(0.5).unwrap();
        let t = pmf_from_cdf_differencing(&[g.clone(), g.clone(), g.clone()], Some(12)).unwrap();
        // l_max = 12 cuts more than the model tails; check the bookkeeping
        assert_abs_diff_eq!(t.total() + t.dropped_mass(), 1.0, epsilon = 1e-12);
        let full = pmf_from_cdf_differencing(&[g.clone(), g.clone(), g], None).unwrap();
        assert!(full.total() >= 1.0 - 3e-10);
    }

    #[test]
    fn iid_h_table_base() {
        let u = DiscreteModel::uniform_int(0, 3).unwrap();
        let (g, h) = pmf_iid_with_h_aux(&u, 2, None).unwrap();
        for m in 0..=3 {
            for l in m..=2 * m {
                let expect = if l == 2 * m { 1.0 / 16.0 } else { 0.0 };
                assert_abs_diff_eq!(h.get(l, m), expect, epsilon = 1e-15);
            }
        }
        let rec = pmf_recursive(&[u.clone(), u], None).unwrap();
        for e in rec.entries() {
            assert_abs_diff_eq!(e.prob, g.get(e.l, e.m), epsilon = 1e-15);
        }
    }

    #[test]
    fn second_sum_limit_matters() {
        let pair = [bern(), bern()];
        let good = pmf_recursive_variant(&pair, None, SecondSumLimit::MMinusOne).unwrap();
        let bad = pmf_recursive_variant(&pair, None, SecondSumLimit::M).unwrap();
        assert_abs_diff_eq!(good.total(), 1.0, epsilon = 1e-12);
        assert!(bad.total() > 1.0 + 1e-3);
    }

    #[test]
    fn shifted_wrappers() {
        let u = DiscreteModel::uniform_int(0, 2).unwrap();
        let plain = [u.clone(), u.clone()];
        let table = pmf_recursive(&plain, None).unwrap();
        assert_eq!(pmf_shifted(&plain, 2, 1).unwrap(), table.get(2, 1));
        let shifted = [u.clone().with_shift(1), u.with_shift(1)];
        assert_abs_diff_eq!(pmf_shifted(&shifted, 0, 0).unwrap(), 1.0 / 9.0, epsilon = 1e-15);
        assert_eq!(pmf_shifted(&shifted, 0, 0).unwrap(), table.get(2, 1));
        assert!(pmf_shifted(&shifted, -3, 0).is_err());
        assert_abs_diff_eq!(
            cdf_shifted_discrete(&shifted, 0.0, 0.0).unwrap(),
            cdf_recursive_discrete(&plain, 2.0, 1.0).unwrap(),
            epsilon = 1e-15
        );
        assert_eq!(cdf_shifted_discrete(&shifted, -3.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let t = pmf_recursive(&[bern(), bern(), bern()], None).unwrap();
        let back = PmfTriangle::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("l,m,prob\n0,0,0.125\n"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_model() -> impl Strategy<Value = DiscreteModel> {
            prop::collection::vec(0.0f64..1.0, 1..5).prop_filter_map("nonzero mass", |w| {
                let s: f64 = w.iter().sum();
                if s <= 1e-6 {
                    return None;
                }
                let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
                let rest = 1.0 - p.iter().sum::<f64>();
                p[0] += rest;
                DiscreteModel::explicit(p).ok()
            })
        }

        proptest! {
            #[test]
            fn permutation_invariance(models in prop::collection::vec(small_model(), 2..5)) {
                let a = pmf_recursive(&models, None).unwrap();
                let mut rev = models.clone();
                rev.reverse();
                let b = pmf_recursive(&rev, None).unwrap();
                for e in a.entries() {
                    prop_assert!((e.prob - b.get(e.l, e.m)).abs() <= 1e-12);
                }
            }

            #[test]
            fn nonnegative_and_normalized(models in prop::collection::vec(small_model(), 1..5)) {
                let t = pmf_recursive(&models, None).unwrap();
                prop_assert!(t.entries().all(|e| e.prob >= -1e-15));
                prop_assert!((t.total() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
