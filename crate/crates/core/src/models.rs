//! Per-variable input distributions.
//!
//! A [`ContinuousModel`] or [`DiscreteModel`] describes one nonnegative variable
//! `X`. An optional shift `c >= 0` turns it into `X' = X - c`, which is how
//! variables bounded below by `-c` are expressed. Engines work on unshifted
//! variables only; the shifted wrappers in [`crate::continuous`] and
//! [`crate::discrete`] translate queries.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::binomial;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Default tail mass dropped when truncating an infinite discrete support.
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-10;

/// Parametric or tabulated density of a nonnegative continuous variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ContinuousFamily {
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    /// Shape `k` and rate `θ`: `f(x) = θ^k x^(k-1) e^(-θx) / Γ(k)`.
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Piecewise-linear density through `(abscissae[i], densities[i])`, zero
    /// beyond the last abscissa.
    Tabulated {
        abscissae: Vec<f64>,
        densities: Vec<f64>,
    },
}

/// A validated continuous model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    family: ContinuousFamily,
    shift: f64,
    // tabulated only: cumulative mass at each abscissa
    cumulative: Vec<f64>,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidModel(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v > 0.0, || {
        format!("{name} must be positive and finite, got {v}")
    })
}

impl ContinuousModel {
    /// Validates `family` and builds an unshifted model.
    pub fn new(family: ContinuousFamily) -> Result<Self> {
        let mut cumulative = Vec::new();
        let family = match family {
            ContinuousFamily::Exponential { rate } => {
                positive("rate", rate)?;
                family
            }
            ContinuousFamily::Uniform { a, b } => {
                check(a.is_finite() && b.is_finite(), || "uniform bounds must be finite".into())?;
                check(a >= 0.0, || format!("uniform lower bound must be >= 0, got {a}"))?;
                check(b > a, || format!("uniform needs b > a, got a = {a}, b = {b}"))?;
                family
            }
            ContinuousFamily::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)?;
                family
            }
            ContinuousFamily::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
                family
            }
            ContinuousFamily::Tabulated {
                abscissae,
                mut densities,
            } => {
                check(abscissae.len() >= 2, || "tabulated density needs at least two points".into())?;
                check(abscissae.len() == densities.len(), || {
                    format!(
                        "tabulated density has {} abscissae but {} densities",
                        abscissae.len(),
                        densities.len()
                    )
                })?;
                check(abscissae[0] == 0.0, || "tabulated abscissae must start at 0".into())?;
                check(
                    abscissae.iter().all(|x| x.is_finite())
                        && abscissae.windows(2).all(|w| w[1] > w[0]),
                    || "tabulated abscissae must be finite and strictly increasing".into(),
                )?;
                check(densities.iter().all(|d| d.is_finite() && *d >= 0.0), || {
                    "tabulated densities must be finite and nonnegative".into()
                })?;
                let mass = trapezoid_cumulative(&abscissae, &densities);
                let total = *mass.last().unwrap();
                check((total - 1.0).abs() <= 1e-3, || {
                    format!("tabulated density integrates to {total}, not 1")
                })?;
                densities.iter_mut().for_each(|d| *d /= total);
                cumulative = mass.into_iter().map(|m| m / total).collect();
                ContinuousFamily::Tabulated {
                    abscissae,
                    densities,
                }
            }
        };
        Ok(Self {
            family,
            shift: 0.0,
            cumulative,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(ContinuousFamily::Exponential { rate })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(ContinuousFamily::Uniform { a, b })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(ContinuousFamily::Gamma { shape, rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(ContinuousFamily::Weibull { shape, scale })
    }

    pub fn tabulated(abscissae: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        Self::new(ContinuousFamily::Tabulated {
            abscissae,
            densities,
        })
    }

    /// Models `X' = X - c` for `c >= 0`.
    pub fn with_shift(mut self, c: f64) -> Result<Self> {
        check(c.is_finite() && c >= 0.0, || format!("shift must be finite and >= 0, got {c}"))?;
        self.shift = c;
        Ok(self)
    }

    /// Same base law with an arbitrary (possibly negative) shift. A negative
    /// shift moves the support to the right.
    pub(crate) fn relocated(&self, shift: f64) -> Self {
        Self {
            shift,
            ..self.clone()
        }
    }

    pub fn family(&self) -> &ContinuousFamily {
        &self.family
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        let u = x + self.shift;
        if !(u >= 0.0) {
            return 0.0;
        }
        match &self.family {
            ContinuousFamily::Exponential { rate } => rate * (-rate * u).exp(),
            ContinuousFamily::Uniform { a, b } => {
                if u >= *a && u <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            ContinuousFamily::Gamma { shape, rate } => {
                if u == 0.0 {
                    return if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        *rate
                    } else {
                        0.0
                    };
                }
                (shape * rate.ln() + (shape - 1.0) * u.ln() - rate * u - ln_gamma(*shape)).exp()
            }
            ContinuousFamily::Weibull { shape, scale } => {
                if u == 0.0 {
                    return if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                let r = u / scale;
                shape / scale * r.powf(shape - 1.0) * (-r.powf(*shape)).exp()
            }
            ContinuousFamily::Tabulated {
                abscissae,
                densities,
            } => {
                let last = *abscissae.last().unwrap();
                if u > last {
                    return 0.0;
                }
                let i = segment(abscissae, u);
                let (x0, x1) = (abscissae[i], abscissae[i + 1]);
                let s = (u - x0) / (x1 - x0);
                densities[i] + s * (densities[i + 1] - densities[i])
            }
        }
    }

    /// Distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let u = x + self.shift;
        if !(u > 0.0) {
            return 0.0;
        }
        let v = match &self.family {
            ContinuousFamily::Exponential { rate } => -(-rate * u).exp_m1(),
            ContinuousFamily::Uniform { a, b } => ((u - a) / (b - a)).clamp(0.0, 1.0),
            ContinuousFamily::Gamma { shape, rate } => gamma_lr(*shape, rate * u),
            ContinuousFamily::Weibull { shape, scale } => -(-(u / scale).powf(*shape)).exp_m1(),
            ContinuousFamily::Tabulated {
                abscissae,
                densities,
            } => {
                if u >= *abscissae.last().unwrap() {
                    return 1.0;
                }
                let i = segment(abscissae, u);
                let h = abscissae[i + 1] - abscissae[i];
                let s = u - abscissae[i];
                let (d0, d1) = (densities[i], densities[i + 1]);
                self.cumulative[i] + d0 * s + (d1 - d0) * s * s / (2.0 * h)
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Survival function `1 - F(x)`, computed without cancellation where possible.
    pub fn sf(&self, x: f64) -> f64 {
        let u = x + self.shift;
        if !(u > 0.0) {
            return 1.0;
        }
        match &self.family {
            ContinuousFamily::Exponential { rate } => (-rate * u).exp(),
            ContinuousFamily::Gamma { shape, rate } => gamma_ur(*shape, rate * u),
            ContinuousFamily::Weibull { shape, scale } => (-(u / scale).powf(*shape)).exp(),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Smallest `q` with `F(q) >= p`, for `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let base = match &self.family {
            ContinuousFamily::Exponential { rate } => -(-p).ln_1p() / rate,
            ContinuousFamily::Uniform { a, b } => a + p * (b - a),
            ContinuousFamily::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            ContinuousFamily::Gamma { .. } => self.bisect(|m, q| m.cdf(q) >= p),
            ContinuousFamily::Tabulated {
                abscissae,
                densities,
            } => tabulated_quantile(abscissae, densities, &self.cumulative, p),
        };
        base - self.shift
    }

    /// Truncation point `q` with `F(q) >= 1 - eps`. Bounded families return
    /// the upper end of their support.
    pub fn support_quantile(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation epsilon must lie in (0, 1), got {eps}"
            )));
        }
        let base = match &self.family {
            ContinuousFamily::Exponential { rate } => -eps.ln() / rate,
            ContinuousFamily::Uniform { b, .. } => *b,
            ContinuousFamily::Weibull { shape, scale } => scale * (-eps.ln()).powf(1.0 / shape),
            ContinuousFamily::Gamma { .. } => self.bisect(|m, q| m.sf(q) <= eps),
            ContinuousFamily::Tabulated { abscissae, .. } => *abscissae.last().unwrap(),
        };
        Ok(base - self.shift)
    }

    // Smallest unshifted q satisfying a monotone predicate on the unshifted model.
    fn bisect(&self, pred: impl Fn(&Self, f64) -> bool) -> f64 {
        let base = self.relocated(0.0);
        let mut hi = 1.0;
        while !pred(&base, hi) {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        if pred(&base, lo) {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if pred(&base, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }

    /// Abscissae (in the shifted coordinate) where the density jumps or kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.family {
            ContinuousFamily::Uniform { a, b } => vec![0.0, *a, *b],
            ContinuousFamily::Tabulated { abscissae, .. } => abscissae.clone(),
            _ => vec![0.0],
        };
        pts.dedup();
        pts.into_iter().map(|p| p - self.shift).collect()
    }

    /// Draws one variate. Gamma uses Marsaglia–Tsang; every other family uses
    /// inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            ContinuousFamily::Gamma { shape, rate } => {
                let g = Gamma::new(*shape, 1.0 / rate).expect("validated gamma parameters");
                g.sample(rng) - self.shift
            }
            _ => self.quantile(rng.random::<f64>()),
        }
    }

    pub fn mean(&self) -> f64 {
        let base = match &self.family {
            ContinuousFamily::Exponential { rate } => 1.0 / rate,
            ContinuousFamily::Uniform { a, b } => 0.5 * (a + b),
            ContinuousFamily::Gamma { shape, rate } => shape / rate,
            ContinuousFamily::Weibull { shape, scale } => {
                scale * ln_gamma(1.0 + 1.0 / shape).exp()
            }
            ContinuousFamily::Tabulated {
                abscissae,
                densities,
            } => abscissae
                .windows(2)
                .zip(densities.windows(2))
                .map(|(x, d)| {
                    // exact first moment of a linear density piece
                    let h = x[1] - x[0];
                    h / 6.0 * (d[0] * (2.0 * x[0] + x[1]) + d[1] * (x[0] + 2.0 * x[1]))
                })
                .sum(),
        };
        base - self.shift
    }

    pub(crate) fn canonical(&self) -> String {
        format!(
            "continuous:{}:shift={:?}",
            serde_json::to_string(&self.family).unwrap_or_default(),
            self.shift
        )
    }
}

fn trapezoid_cumulative(x: &[f64], d: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (d[i - 1] + d[i]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

// index i with x[i] <= u < x[i+1], clamped to the last segment
fn segment(x: &[f64], u: f64) -> usize {
    let i = x.partition_point(|&a| a <= u);
    i.saturating_sub(1).min(x.len() - 2)
}

fn tabulated_quantile(x: &[f64], d: &[f64], cum: &[f64], p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let i = cum.partition_point(|&c| c < p).clamp(1, x.len() - 1) - 1;
    let r = p - cum[i];
    if r <= 0.0 {
        return x[i];
    }
    let h = x[i + 1] - x[i];
    let (d0, d1) = (d[i], d[i + 1]);
    let a = (d1 - d0) / (2.0 * h);
    let s = if a.abs() < 1e-300 {
        r / d0
    } else {
        let disc = (d0 * d0 + 4.0 * a * r).max(0.0);
        2.0 * r / (d0 + disc.sqrt())
    };
    (x[i] + s).min(x[i + 1])
}

/// Probability mass function of a nonnegative integer variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiscreteFamily {
    Poisson { mean: f64 },
    /// Number of failures before the first success: `f(k) = p (1-p)^k`.
    Geometric { p: f64 },
    Binomial { trials: u64, p: f64 },
    UniformInt { lo: u64, hi: u64 },
    Explicit { probabilities: Vec<f64> },
}

/// A validated discrete model with its (possibly truncated) mass table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    family: DiscreteFamily,
    shift: i64,
    truncation_epsilon: f64,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    dropped: f64,
}

impl DiscreteModel {
    pub fn new(family: DiscreteFamily) -> Result<Self> {
        Self::with_truncation(family, DEFAULT_TRUNCATION_EPSILON)
    }

    /// Validates `family`; infinite supports are cut where the remaining tail
    /// mass drops to `truncation_epsilon` or below.
    pub fn with_truncation(family: DiscreteFamily, truncation_epsilon: f64) -> Result<Self> {
        check(truncation_epsilon > 0.0 && truncation_epsilon < 1.0, || {
            format!("truncation epsilon must lie in (0, 1), got {truncation_epsilon}")
        })?;
        let (masses, dropped) = match &family {
            DiscreteFamily::Poisson { mean } => {
                positive("mean", *mean)?;
                let mut k = 0u64;
                // P(X > k) = P(k + 1, mean), the regularized lower incomplete gamma
                while gamma_lr(k as f64 + 1.0, *mean) > truncation_epsilon {
                    k += 1;
                }
                let masses: Vec<f64> = (0..=k)
                    .map(|j| {
                        let j = j as f64;
                        (j * mean.ln() - mean - ln_gamma(j + 1.0)).exp()
                    })
                    .collect();
                (masses, gamma_lr(k as f64 + 1.0, *mean))
            }
            DiscreteFamily::Geometric { p } => {
                check(p.is_finite() && *p > 0.0 && *p <= 1.0, || {
                    format!("geometric p must lie in (0, 1], got {p}")
                })?;
                let q = 1.0 - p;
                let mut masses = vec![*p];
                let mut tail = q;
                while tail > truncation_epsilon {
                    masses.push(p * tail);
                    tail *= q;
                }
                (masses, tail)
            }
            DiscreteFamily::Binomial { trials, p } => {
                check(p.is_finite() && (0.0..=1.0).contains(p), || {
                    format!("binomial p must lie in [0, 1], got {p}")
                })?;
                let n = *trials;
                let masses = (0..=n)
                    .map(|k| {
                        binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
                    })
                    .collect();
                (masses, 0.0)
            }
            DiscreteFamily::UniformInt { lo, hi } => {
                check(hi >= lo, || format!("uniform_int needs hi >= lo, got lo = {lo}, hi = {hi}"))?;
                let w = 1.0 / (hi - lo + 1) as f64;
                let masses = (0..=*hi).map(|k| if k >= *lo { w } else { 0.0 }).collect();
                (masses, 0.0)
            }
            DiscreteFamily::Explicit { probabilities } => {
                check(!probabilities.is_empty(), || "explicit pmf is empty".into())?;
                check(probabilities.iter().all(|p| p.is_finite() && *p >= 0.0), || {
                    "explicit probabilities must be finite and nonnegative".into()
                })?;
                let total: f64 = probabilities.iter().sum();
                check((total - 1.0).abs() <= 1e-12, || {
                    format!("explicit probabilities sum to {total}, not 1")
                })?;
                (probabilities.clone(), 0.0)
            }
        };
        let mut acc = 0.0;
        let cumulative = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Ok(Self {
            family,
            shift: 0,
            truncation_epsilon,
            masses,
            cumulative,
            dropped,
        })
    }

    pub fn explicit(probabilities: Vec<f64>) -> Result<Self> {
        Self::new(DiscreteFamily::Explicit { probabilities })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::explicit(vec![1.0 - p, p])
    }

    pub fn uniform_int(lo: u64, hi: u64) -> Result<Self> {
        Self::new(DiscreteFamily::UniformInt { lo, hi })
    }

    pub fn binomial(trials: u64, p: f64) -> Result<Self> {
        Self::new(DiscreteFamily::Binomial { trials, p })
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        Self::new(DiscreteFamily::Poisson { mean })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(DiscreteFamily::Geometric { p })
    }

    /// Models `X' = X - lambda`.
    pub fn with_shift(mut self, lambda: u64) -> Self {
        self.shift = lambda as i64;
        self
    }

    pub(crate) fn relocated(&self, shift: i64) -> Self {
        Self {
            shift,
            ..self.clone()
        }
    }

    pub fn family(&self) -> &DiscreteFamily {
        &self.family
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn truncation_epsilon(&self) -> f64 {
        self.truncation_epsilon
    }

    /// Tail mass cut off by truncation.
    pub fn truncated_mass(&self) -> f64 {
        self.dropped
    }

    /// Largest base value kept after truncation (`K_max`).
    pub fn k_max(&self) -> usize {
        self.masses.len() - 1
    }

    /// Mass table of the unshifted variable, indexed by value.
    pub fn base_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn pmf(&self, k: i64) -> f64 {
        let b = k + self.shift;
        if b < 0 {
            return 0.0;
        }
        self.masses.get(b as usize).copied().unwrap_or(0.0)
    }

    /// `F(x) = sum over k <= floor(x)` of the mass function.
    pub fn cdf(&self, x: f64) -> f64 {
        let b = x + self.shift as f64;
        if !(b >= 0.0) {
            return 0.0;
        }
        let k = b.floor();
        if k >= self.k_max() as f64 {
            return *self.cumulative.last().unwrap();
        }
        self.cumulative[k as usize]
    }

    /// Inverse transform: smallest `k` with `F(k) > u`.
    pub fn quantile_from_uniform(&self, u: f64) -> i64 {
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.k_max());
        i as i64 - self.shift
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        self.quantile_from_uniform(rng.random::<f64>())
    }

    pub fn mean(&self) -> f64 {
        let m: f64 = self.masses.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        m - self.shift as f64
    }

    /// Masses indexed by value for an engine; the support must be nonnegative.
    pub(crate) fn lattice_masses(&self) -> Vec<f64> {
        debug_assert!(self.shift <= 0);
        let delay = (-self.shift) as usize;
        let mut v = vec![0.0; delay];
        v.extend_from_slice(&self.masses);
        v
    }

    pub(crate) fn canonical(&self) -> String {
        format!(
            "discrete:{}:shift={}:eps={:?}",
            serde_json::to_string(&self.family).unwrap_or_default(),
            self.shift,
            self.truncation_epsilon
        )
    }
}

/// One input variable of a mixed continuous/discrete sum.
#[derive(Debug, Clone, PartialEq)]
pub enum Variable {
    Continuous(ContinuousModel),
    Discrete(DiscreteModel),
}

impl Variable {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Variable::Continuous(m) => m.cdf(x),
            Variable::Discrete(m) => m.cdf(x),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Variable::Continuous(m) => m.sample(rng),
            Variable::Discrete(m) => m.sample(rng) as f64,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Variable::Discrete(_))
    }

    pub(crate) fn canonical(&self) -> String {
        match self {
            Variable::Continuous(m) => m.canonical(),
            Variable::Discrete(m) => m.canonical(),
        }
    }
}

impl From<ContinuousModel> for Variable {
    fn from(m: ContinuousModel) -> Self {
        Variable::Continuous(m)
    }
}

impl From<DiscreteModel> for Variable {
    fn from(m: DiscreteModel) -> Self {
        Variable::Discrete(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_continuous() -> Vec<ContinuousModel> {
        vec![
            ContinuousModel::exponential(1.0).unwrap(),
            ContinuousModel::exponential(2.5).unwrap(),
            ContinuousModel::uniform(0.0, 2.0).unwrap(),
            ContinuousModel::uniform(0.5, 1.5).unwrap(),
            ContinuousModel::gamma(2.0, 1.0).unwrap(),
            ContinuousModel::gamma(3.5, 2.0).unwrap(),
            ContinuousModel::weibull(1.5, 2.0).unwrap(),
            ContinuousModel::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap(),
        ]
    }

    #[test]
    fn pointwise_examples() {
        let e = ContinuousModel::exponential(1.0).unwrap();
        assert_eq!(e.pdf(0.0), 1.0);
        assert_eq!(e.pdf(-1.0), 0.0);
        assert_abs_diff_eq!(e.cdf(2f64.ln()), 0.5, epsilon = 1e-15);
        let u = ContinuousModel::uniform(0.0, 2.0).unwrap();
        assert_eq!(u.pdf(1.0), 0.5);
        assert_eq!(u.cdf(5.0), 1.0);
        for m in all_continuous() {
            assert_eq!(m.cdf(-3.0), 0.0);
        }
    }

    #[test]
    fn discrete_examples() {
        let b = DiscreteModel::binomial(3, 0.5).unwrap();
        assert_abs_diff_eq!(b.pmf(1), 0.375, epsilon = 1e-15);
        let g = DiscreteModel::geometric(0.5).unwrap();
        assert_eq!(g.pmf(0), 0.5);
        let u = DiscreteModel::uniform_int(0, 2).unwrap();
        assert_abs_diff_eq!(u.cdf(1.9), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(u.pmf(-1), 0.0);
        assert_eq!(u.quantile_from_uniform(0.0), 0);
        assert_eq!(u.quantile_from_uniform(0.333), 0);
        assert_eq!(u.quantile_from_uniform(0.34), 1);
    }

    #[test]
    fn support_quantiles() {
        let e = ContinuousModel::exponential(1.0).unwrap();
        assert_abs_diff_eq!(e.support_quantile((-5f64).exp()).unwrap(), 5.0, epsilon = 1e-12);
        let u = ContinuousModel::uniform(0.0, 2.0).unwrap();
        assert_eq!(u.support_quantile(1e-6).unwrap(), 2.0);
        let g = ContinuousModel::gamma(2.0, 1.0).unwrap();
        let q = g.support_quantile(1e-4).unwrap();
        // gamma(2,1) survival is (1 + q) e^-q; check the bracket by hand
        let sf = |x: f64| (1.0 + x) * (-x).exp();
        assert!(sf(q) <= 1e-4 * (1.0 + 1e-12));
        assert!(sf(q * (1.0 - 1e-9)) > 1e-4);
        assert!(e.support_quantile(0.0).is_err());
        assert!(e.support_quantile(1.0).is_err());
    }

    #[test]
    fn inverse_transform_exponential() {
        let e = ContinuousModel::exponential(1.0).unwrap();
        assert_abs_diff_eq!(e.quantile(0.5), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn exponential_sample_mean() {
        let e = ContinuousModel::exponential(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mean = (0..n).map(|_| e.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.004, "mean = {mean}");
    }

    #[test]
    fn gamma_sample_mean() {
        let g = ContinuousModel::gamma(3.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mean = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        // sd = sqrt(3)/2, 4 sigma band
        assert!((mean - 1.5).abs() < 4.0 * 0.866 / (n as f64).sqrt());
    }

    #[test]
    fn densities_integrate_to_one() {
        for m in all_continuous() {
            let q = m.support_quantile(1e-9).unwrap();
            let steps = 20_000;
            let h = q / steps as f64;
            let mut acc = 0.0;
            for i in 0..steps {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                acc += 0.5 * h * (m.pdf(a) + m.pdf(b));
            }
            // jumps at the support edges cost O(h) with the plain rule
            let tol = match m.family() {
                ContinuousFamily::Uniform { .. } | ContinuousFamily::Exponential { .. } => 1e-3,
                _ => 1e-5,
            };
            assert!((acc - 1.0).abs() < tol, "{:?}: {acc}", m.family());
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for m in all_continuous() {
            for &p in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                let q = m.quantile(p);
                assert_abs_diff_eq!(m.cdf(q), p, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tabulated_validation() {
        let err = ContinuousModel::tabulated(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("integrates to 0.5"));
        assert!(ContinuousModel::tabulated(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ContinuousModel::tabulated(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        // within 1e-3: renormalized
        let m = ContinuousModel::tabulated(vec![0.0, 1.0], vec![1.0005, 1.0005]).unwrap();
        assert_abs_diff_eq!(m.cdf(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.pdf(0.5), 1.0, epsilon = 1e-15);
        assert_eq!(m.pdf(1.5), 0.0);
    }

    #[test]
    fn discrete_truncation_accounting() {
        for model in [
            DiscreteModel::poisson(4.0).unwrap(),
            DiscreteModel::geometric(0.3).unwrap(),
            DiscreteModel::with_truncation(DiscreteFamily::Poisson { mean: 30.0 }, 1e-6).unwrap(),
        ] {
            let kept: f64 = model.base_masses().iter().sum();
            let delta = 1.0 - kept;
            assert!(delta >= -1e-15 && delta <= model.truncation_epsilon() + 1e-15);
            assert_abs_diff_eq!(delta, model.truncated_mass(), epsilon = 1e-13);
        }
        let bad = DiscreteModel::explicit(vec![0.5, 0.4]);
        assert!(bad.is_err());
    }

    #[test]
    fn shift_semantics() {
        let base = ContinuousModel::gamma(2.0, 1.5).unwrap();
        let shifted = base.clone().with_shift(0.7).unwrap();
        for &x in &[-0.7, -0.2, 0.0, 0.4, 2.0] {
            assert_eq!(shifted.pdf(x), base.pdf(x + 0.7));
            assert_eq!(shifted.cdf(x), base.cdf(x + 0.7));
        }
        assert!(base.clone().with_shift(-1.0).is_err());
        let d = DiscreteModel::uniform_int(0, 2).unwrap().with_shift(1);
        assert_abs_diff_eq!(d.pmf(-1), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(d.pmf(2), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cdf_is_monotone_and_bounded(idx in 0usize..8, a in -1.0f64..12.0, d in 0.0f64..5.0) {
                let m = &all_continuous()[idx];
                let (fa, fb) = (m.cdf(a), m.cdf(a + d));
                prop_assert!((0.0..=1.0).contains(&fa));
                prop_assert!((0.0..=1.0).contains(&fb));
                prop_assert!(fb >= fa);
            }

            #[test]
            fn discrete_cdf_is_monotone(mean in 0.1f64..20.0, a in -2.0f64..40.0, d in 0.0f64..5.0) {
                let m = DiscreteModel::poisson(mean).unwrap();
                let (fa, fb) = (m.cdf(a), m.cdf(a + d));
                prop_assert!((0.0..=1.0).contains(&fa));
                prop_assert!(fb >= fa);
            }
        }
    }
}
