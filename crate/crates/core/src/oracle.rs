//! Independent checks for the engines: Monte Carlo simulation of the pair
//! `(Y_n, Z_n)`, exhaustive enumeration of small discrete instances, and
//! comparison reports.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`). Samples are drawn in
//! batches of [`BATCH`]; batch `b` uses the generator seeded with the run
//! seed and switched to stream `b`, so a run is reproducible for a given seed
//! regardless of how batches are scheduled. Totals are accumulated in batch
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::{masses_of, PmfTriangle};
use crate::error::{Error, Result};
use crate::models::{DiscreteModel, Variable};

/// Samples per generator stream.
pub const BATCH: u64 = 65_536;

/// Minimum sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: u64 = 10_000;

/// Largest state space [`enumerate_discrete_joint`] will walk.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    MonteCarlo,
    Enumeration,
    NestedQuadrature,
}

/// One compared value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub coordinates: Vec<f64>,
    pub engine_value: Option<f64>,
    pub oracle_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub method: OracleMethod,
    /// Samples drawn or states enumerated.
    pub count: u64,
    pub max_abs_diff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
    pub per_point: Vec<PointRecord>,
    pub violations: usize,
}

impl OracleReport {
    /// A report holding oracle values only, ready for [`compare`].
    pub fn from_values(method: OracleMethod, count: u64, coordinates: Vec<Vec<f64>>, values: Vec<f64>) -> Self {
        let per_point = coordinates
            .into_iter()
            .zip(values)
            .map(|(coordinates, oracle_value)| PointRecord {
                coordinates,
                engine_value: None,
                oracle_value,
                stderr: None,
                flagged: false,
            })
            .collect();
        Self {
            method,
            count,
            max_abs_diff: 0.0,
            tv_distance: None,
            per_point,
            violations: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// When a difference counts as a violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TolerancePolicy {
    /// `|engine - oracle| <= tol`.
    Absolute { tol: f64 },
    /// `|engine - oracle| <= k stderr + budget`; `budget` covers the
    /// deterministic discretization error, `k stderr` the sampling noise.
    Sigma { k: f64, budget: f64 },
}

impl TolerancePolicy {
    fn allows(&self, diff: f64, stderr: Option<f64>) -> bool {
        match *self {
            TolerancePolicy::Absolute { tol } => diff <= tol,
            TolerancePolicy::Sigma { k, budget } => diff <= k * stderr.unwrap_or(0.0) + budget,
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} Monte Carlo samples, got {samples}"
        )));
    }
    Ok(())
}

/// Calls `visit(y, z)` for each simulated pair, in a fixed order.
pub fn simulate<F: FnMut(f64, f64)>(vars: &[Variable], samples: u64, seed: u64, mut visit: F) -> Result<()> {
    if vars.is_empty() {
        return Err(Error::EmptyModels);
    }
    let batches = samples.div_ceil(BATCH);
    for b in 0..batches {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let len = BATCH.min(samples - b * BATCH);
        for _ in 0..len {
            let mut y = 0.0;
            let mut z = f64::NEG_INFINITY;
            for v in vars {
                let x = v.sample(&mut rng);
                y += x;
                z = z.max(x);
            }
            visit(y, z);
        }
    }
    Ok(())
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Estimates `E h(Y_n, Z_n)`.
pub fn mc_expectation<H: Fn(f64, f64) -> f64>(vars: &[Variable], samples: u64, seed: u64, h: H) -> Result<McEstimate> {
    check_samples(samples)?;
    // Welford
    let mut count = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    simulate(vars, samples, seed, |y, z| {
        let v = h(y, z);
        count += 1;
        let d = v - mean;
        mean += d / count as f64;
        m2 += d * (v - mean);
    })?;
    let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        mean,
        stderr: (var / count as f64).sqrt(),
        samples: count,
    })
}

/// Empirical `Pr(Y_n <= y, Z_n <= z)` at each point with binomial standard
/// errors `sqrt(p (1 - p) / N)`.
pub fn mc_joint_cdf(vars: &[Variable], points: &[(f64, f64)], samples: u64, seed: u64) -> Result<OracleReport> {
    check_samples(samples)?;
    let mut hits = vec![0u64; points.len()];
    simulate(vars, samples, seed, |y, z| {
        for (h, &(py, pz)) in hits.iter_mut().zip(points) {
            if y <= py && z <= pz {
                *h += 1;
            }
        }
    })?;
    let nf = samples as f64;
    let per_point = points
        .iter()
        .zip(&hits)
        .map(|(&(y, z), &h)| {
            let p = h as f64 / nf;
            PointRecord {
                coordinates: vec![y, z],
                engine_value: None,
                oracle_value: p,
                stderr: Some((p * (1.0 - p) / nf).sqrt()),
                flagged: false,
            }
        })
        .collect();
    Ok(OracleReport {
        method: OracleMethod::MonteCarlo,
        count: samples,
        max_abs_diff: 0.0,
        tv_distance: None,
        per_point,
        violations: 0,
    })
}

/// Empirical `Pr(alpha <= n Z_n / Y_n <= beta)` over samples with `Y_n > 0`
/// counted against all samples.
pub fn mc_papr(vars: &[Variable], alpha: f64, beta: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    let n = vars.len() as f64;
    mc_expectation(vars, samples, seed, |y, z| {
        if y > 0.0 {
            let r = n * z / y;
            f64::from(u8::from(r >= alpha && r <= beta))
        } else {
            0.0
        }
    })
}

/// Exact joint PMF by walking every outcome `(k_1, .., k_n)` of the
/// (truncated) supports. `l_max` defaults to the largest reachable sum.
pub fn enumerate_discrete_joint(models: &[DiscreteModel], l_max: Option<usize>) -> Result<PmfTriangle> {
    let masses = masses_of(models)?;
    let states = masses.iter().map(|m| m.len() as u128).try_fold(1u128, |acc, s| acc.checked_mul(s));
    match states {
        Some(s) if s <= ENUMERATION_LIMIT => {}
        _ => {
            return Err(Error::StateSpaceTooLarge {
                states: states.unwrap_or(u128::MAX),
                limit: ENUMERATION_LIMIT,
            })
        }
    }
    let full: usize = masses.iter().map(|m| m.len() - 1).sum();
    let l_max = l_max.unwrap_or(full);
    let cap = masses.iter().map(|m| m.len() - 1).max().unwrap_or(0);
    let n = masses.len();
    let mut out = PmfTriangle::zeros(n, l_max, cap);
    let mut idx = vec![0usize; n];
    loop {
        let mut p = 1.0;
        let mut l = 0;
        let mut m = 0;
        for (k, f) in idx.iter().zip(&masses) {
            p *= f[*k];
            l += k;
            m = m.max(*k);
        }
        if p > 0.0 && l <= l_max {
            out.set(l, m, out.get(l, m) + p);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out.finish());
            }
            idx[pos] += 1;
            if idx[pos] < masses[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Fills `oracle` with engine values and flags each point under `policy`.
pub fn compare(engine: &[f64], mut oracle: OracleReport, policy: TolerancePolicy) -> Result<OracleReport> {
    if engine.len() != oracle.per_point.len() {
        return Err(Error::IndexMismatch(format!(
            "{} engine values against {} oracle points",
            engine.len(),
            oracle.per_point.len()
        )));
    }
    let mut max = 0.0f64;
    let mut violations = 0;
    for (rec, &e) in oracle.per_point.iter_mut().zip(engine) {
        if !e.is_finite() {
            return Err(Error::NonFinite {
                y: rec.coordinates.first().copied().unwrap_or(f64::NAN),
                z: rec.coordinates.get(1).copied().unwrap_or(f64::NAN),
            });
        }
        let diff = (e - rec.oracle_value).abs();
        rec.engine_value = Some(e);
        rec.flagged = !policy.allows(diff, rec.stderr);
        violations += usize::from(rec.flagged);
        max = max.max(diff);
    }
    oracle.max_abs_diff = max;
    oracle.violations = violations;
    Ok(oracle)
}

/// Entrywise comparison of two PMF tables over the union of their entries;
/// also reports the total-variation distance.
pub fn compare_tables(engine: &PmfTriangle, oracle: &PmfTriangle, tol: f64) -> Result<OracleReport> {
    if engine.n() != oracle.n() || engine.l_max() != oracle.l_max() {
        return Err(Error::IndexMismatch(format!(
            "tables differ in shape: (n = {}, l_max = {}) against (n = {}, l_max = {})",
            engine.n(),
            engine.l_max(),
            oracle.n(),
            oracle.l_max()
        )));
    }
    let m_max = engine.m_max().max(oracle.m_max());
    let n = engine.n();
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut engine_values = Vec::new();
    for m in 0..=m_max {
        for l in m..=(n * m).min(engine.l_max()) {
            coords.push(vec![l as f64, m as f64]);
            values.push(oracle.get(l, m));
            engine_values.push(engine.get(l, m));
        }
    }
    let tv = 0.5
        * engine_values
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    let count = values.len() as u64;
    let report = OracleReport::from_values(OracleMethod::Enumeration, count, coords, values);
    let mut report = compare(&engine_values, report, TolerancePolicy::Absolute { tol })?;
    report.tv_distance = Some(tv);
    Ok(report)
}
