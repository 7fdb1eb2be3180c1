use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use summax::oracle::simulate;
use summax::{
    cdf_mixed, cdf_recursive, cdf_shifted_discrete, cdf_shifted_points, common_shift, compare, compare_tables,
    conditional, discrete_common_shift, enumerate_discrete_joint, joint_moment, marginal_max, marginal_sum,
    mc_joint_cdf, papr_prob_continuous, papr_prob_discrete, pdf_recursive, pdf_shifted_points,
    pmf_from_cdf_differencing, pmf_iid_with_h, pmf_recursive, pmf_shifted, prob_sum_zero, total_mass,
    ContinuousModel, DiscreteModel, GridFunction2D, GridSpec, Joint, OracleReport, PaprQuery, PmfTriangle, Table1D,
    TolerancePolicy, Variable,
};

use crate::config::{Format, RunConfig, Task};

const DEFAULT_SAMPLES: u64 = 1000;
const VALIDATE_SAMPLES: u64 = 1_000_000;
const DEFAULT_RESOLUTION: usize = 201;

/// Result of a run, ready to be rendered.
#[derive(Debug, Clone)]
pub enum Output {
    Scalar { value: f64, extra: Vec<(&'static str, f64)> },
    Points(Vec<(f64, f64, f64)>),
    Grid(GridFunction2D),
    Lattice { entries: Vec<(i64, i64, f64)>, dropped_mass: f64 },
    Table(Table1D),
    Samples(Vec<(f64, f64)>),
    Validation(Vec<Check>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub report: OracleReport,
}

impl Output {
    /// `false` only for a validation run with a flagged check.
    pub fn passed(&self) -> bool {
        match self {
            Output::Validation(checks) => checks.iter().all(|c| c.report.passed()),
            _ => true,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
        }
    }

    fn json(&self) -> Result<String> {
        let v = match self {
            Output::Scalar { value, extra } => {
                let mut obj = serde_json::Map::new();
                obj.insert("value".into(), json!(value));
                for (k, v) in extra {
                    obj.insert((*k).into(), json!(v));
                }
                Value::Object(obj)
            }
            Output::Points(rows) => json!({
                "points": rows.iter().map(|(y, z, v)| json!({"y": y, "z": z, "value": v})).collect::<Vec<_>>()
            }),
            Output::Grid(g) => return Ok(g.to_json()?),
            Output::Lattice { entries, dropped_mass } => json!({
                "dropped_mass": dropped_mass,
                "entries": entries.iter().map(|(l, m, p)| json!({"l": l, "m": m, "prob": p})).collect::<Vec<_>>()
            }),
            Output::Table(t) => serde_json::to_value(t)?,
            Output::Samples(s) => json!({ "samples": s }),
            Output::Validation(checks) => json!({
                "passed": self.passed(),
                "checks": checks.iter().map(|c| json!({"name": c.name, "report": c.report})).collect::<Vec<_>>()
            }),
        };
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    fn csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        match self {
            Output::Grid(g) => g.write_csv(&mut buf)?,
            Output::Table(t) => t.write_csv(&mut buf)?,
            _ => {
                let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match self {
                    Output::Scalar { value, extra } => {
                        let mut h = vec!["value"];
                        h.extend(extra.iter().map(|e| e.0));
                        let mut r = vec![value.to_string()];
                        r.extend(extra.iter().map(|e| e.1.to_string()));
                        (h, vec![r])
                    }
                    Output::Points(rows) => (
                        vec!["y", "z", "value"],
                        rows.iter().map(|(y, z, v)| vec![y.to_string(), z.to_string(), v.to_string()]).collect(),
                    ),
                    Output::Lattice { entries, .. } => (
                        vec!["l", "m", "prob"],
                        entries.iter().map(|(l, m, p)| vec![l.to_string(), m.to_string(), p.to_string()]).collect(),
                    ),
                    Output::Samples(s) => (
                        vec!["y", "z"],
                        s.iter().map(|(y, z)| vec![y.to_string(), z.to_string()]).collect(),
                    ),
                    Output::Validation(checks) => (
                        vec!["check", "method", "count", "max_abs_diff", "violations", "passed"],
                        checks
                            .iter()
                            .map(|c| {
                                let method = serde_json::to_value(c.report.method).unwrap_or_default();
                                vec![
                                    c.name.clone(),
                                    method.as_str().unwrap_or_default().to_string(),
                                    c.report.count.to_string(),
                                    c.report.max_abs_diff.to_string(),
                                    c.report.violations.to_string(),
                                    c.report.passed().to_string(),
                                ]
                            })
                            .collect(),
                    ),
                    Output::Grid(_) | Output::Table(_) => unreachable!(),
                };
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&header)?;
                for r in rows {
                    w.write_record(&r)?;
                }
                w.flush()?;
            }
        }
        Ok(String::from_utf8(buf)?)
    }

    /// Human-readable pass/fail table for validation runs.
    pub fn summary(&self) -> Option<String> {
        let Output::Validation(checks) = self else {
            return None;
        };
        let mut s = format!("{:<28} {:>12} {:>10}  result\n", "check", "max |diff|", "violations");
        for c in checks {
            s += &format!(
                "{:<28} {:>12.3e} {:>10}  {}\n",
                c.name,
                c.report.max_abs_diff,
                c.report.violations,
                if c.report.passed() { "PASS" } else { "FAIL" }
            );
        }
        Some(s)
    }
}

struct Inputs {
    vars: Vec<Variable>,
    continuous: Vec<ContinuousModel>,
    discrete: Vec<DiscreteModel>,
}

impl Inputs {
    fn all_discrete(&self) -> bool {
        self.continuous.is_empty()
    }

    fn all_continuous(&self) -> bool {
        self.discrete.is_empty()
    }
}

/// Runs a validated config.
pub fn run(cfg: &RunConfig) -> Result<Output> {
    let vars = cfg.build_variables()?;
    let mut inputs = Inputs {
        vars,
        continuous: Vec::new(),
        discrete: Vec::new(),
    };
    for v in &inputs.vars {
        match v {
            Variable::Continuous(m) => inputs.continuous.push(m.clone()),
            Variable::Discrete(m) => inputs.discrete.push(m.clone()),
        }
    }
    let out = match cfg.task {
        Task::Cdf => cdf_task(cfg, &inputs),
        Task::Pdf => pdf_task(cfg, &inputs),
        Task::Pmf => pmf_task(cfg, &inputs),
        Task::Papr => papr_task(cfg, &inputs),
        Task::Marginal | Task::Conditional | Task::Moments => derived_task(cfg, &inputs),
        Task::Validate => validate_task(cfg, &inputs),
        Task::Sample => sample_task(cfg, &inputs),
    };
    out.with_context(|| format!("task {} failed", cfg.task))
}

fn points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.query.points.iter().map(|p| (p[0], p[1])).collect()
}

/// Grid for the unshifted computation, with the configured overrides.
fn grid_spec(cfg: &RunConfig, vars: &[Variable]) -> Result<GridSpec> {
    let g = &cfg.grid;
    if let (Some(y), Some(z)) = (g.y_max, g.z_max) {
        return Ok(GridSpec::new(y, z, g.n_y, g.n_z)?);
    }
    let cover = GridSpec::covering_variables(vars, cfg.epsilon, g.n_y, g.n_z).context("sizing the grid")?;
    Ok(GridSpec::new(
        g.y_max.unwrap_or(cover.y_max),
        g.z_max.unwrap_or(cover.z_max),
        g.n_y,
        g.n_z,
    )?)
}

fn continuous_spec(cfg: &RunConfig, models: &[ContinuousModel]) -> Result<GridSpec> {
    let (base, _) = common_shift(models);
    let vars: Vec<Variable> = base.into_iter().map(Variable::Continuous).collect();
    grid_spec(cfg, &vars)
}

fn with_points(pts: &[(f64, f64)], values: Vec<f64>) -> Output {
    if let [_] = pts {
        return Output::Scalar {
            value: values[0],
            extra: Vec::new(),
        };
    }
    Output::Points(pts.iter().zip(values).map(|(&(y, z), v)| (y, z, v)).collect())
}

fn cdf_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let pts = points(cfg);
    if inp.all_discrete() && !pts.is_empty() {
        let values = pts
            .iter()
            .map(|&(y, z)| cdf_shifted_discrete(&inp.discrete, y, z))
            .collect::<summax::Result<Vec<_>>>()?;
        return Ok(with_points(&pts, values));
    }
    if inp.all_continuous() {
        let spec = continuous_spec(cfg, &inp.continuous)?;
        if pts.is_empty() {
            return Ok(Output::Grid(cdf_recursive(&inp.continuous, &spec)?));
        }
        return Ok(with_points(&pts, cdf_shifted_points(&inp.continuous, &spec, &pts)?));
    }
    let spec = grid_spec(cfg, &inp.vars)?;
    let grid = cdf_mixed(&inp.vars, &spec)?;
    if pts.is_empty() {
        return Ok(Output::Grid(grid));
    }
    let values = pts.iter().map(|&(y, z)| grid.eval(y, z)).collect::<summax::Result<Vec<_>>>()?;
    Ok(with_points(&pts, values))
}

fn pdf_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let pts = points(cfg);
    let spec = continuous_spec(cfg, &inp.continuous)?;
    if pts.is_empty() {
        return Ok(Output::Grid(pdf_recursive(&inp.continuous, &spec)?));
    }
    Ok(with_points(&pts, pdf_shifted_points(&inp.continuous, &spec, &pts)?))
}

fn pmf_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let pts = points(cfg);
    if !pts.is_empty() {
        let values = pts
            .iter()
            .map(|&(l, m)| pmf_shifted(&inp.discrete, l as i64, m as i64))
            .collect::<summax::Result<Vec<_>>>()?;
        return Ok(with_points(&pts, values));
    }
    let (base, lambda) = discrete_common_shift(&inp.discrete);
    let n = base.len() as i64;
    let table = pmf_recursive(&base, cfg.query.l_max)?;
    Ok(Output::Lattice {
        entries: table
            .entries()
            .map(|e| (e.l as i64 - n * lambda, e.m as i64 - lambda, e.prob))
            .collect(),
        dropped_mass: table.dropped_mass(),
    })
}

fn papr_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let n = inp.vars.len();
    let q = PaprQuery::new(cfg.query.alpha.unwrap_or(1.0), cfg.query.beta.unwrap_or(n as f64), n)?;
    if inp.all_discrete() {
        let pmf = pmf_recursive(&inp.discrete, cfg.query.l_max)?;
        return Ok(Output::Scalar {
            value: papr_prob_discrete(&pmf, &q)?,
            extra: vec![("prob_sum_zero", prob_sum_zero(&pmf))],
        });
    }
    if n == 1 {
        // the ratio of a single variable is 1
        let hit = q.alpha <= 1.0 && 1.0 <= q.beta;
        return Ok(Output::Scalar {
            value: if hit { 1.0 } else { 0.0 },
            extra: Vec::new(),
        });
    }
    let spec = continuous_spec(cfg, &inp.continuous)?;
    let pdf = pdf_recursive(&inp.continuous, &spec)?;
    Ok(Output::Scalar {
        value: papr_prob_continuous(&pdf, &q)?,
        extra: Vec::new(),
    })
}

fn derived_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let pmf: PmfTriangle;
    let pdf: GridFunction2D;
    let joint = if inp.all_discrete() {
        pmf = pmf_recursive(&inp.discrete, cfg.query.l_max)?;
        Joint::Mass(&pmf)
    } else {
        let spec = continuous_spec(cfg, &inp.continuous)?;
        pdf = pdf_recursive(&inp.continuous, &spec)?;
        Joint::Density(&pdf)
    };
    let q = &cfg.query;
    Ok(match cfg.task {
        Task::Marginal => match q.axis {
            Some(summax::Axis::Sum) => Output::Table(marginal_sum(joint)?),
            Some(summax::Axis::Max) => Output::Table(marginal_max(joint)?),
            None => bail!("query.axis is required"),
        },
        Task::Conditional => {
            let (Some(axis), Some(value)) = (q.axis, q.value) else {
                bail!("query.axis and query.value are required");
            };
            Output::Table(conditional(joint, axis, value, q.resolution.unwrap_or(DEFAULT_RESOLUTION))?)
        }
        Task::Moments => {
            let Some([a, b]) = q.exponents else {
                bail!("query.exponents is required");
            };
            Output::Scalar {
                value: joint_moment(joint, a, b)?,
                extra: Vec::new(),
            }
        }
        _ => unreachable!("not a derived task"),
    })
}

fn sample_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let mut out = Vec::new();
    simulate(&inp.vars, cfg.query.samples.unwrap_or(DEFAULT_SAMPLES), cfg.seed, |y, z| out.push((y, z)))?;
    Ok(Output::Samples(out))
}

fn validate_task(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    if inp.all_discrete() {
        validate_discrete(cfg, inp)
    } else {
        validate_continuous(cfg, inp)
    }
}

fn validate_discrete(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let (base, _) = discrete_common_shift(&inp.discrete);
    let l_max = cfg.query.l_max;
    let truth = enumerate_discrete_joint(&base, l_max)?;
    let tol = cfg.tolerance.absolute;
    let mut checks = vec![
        Check {
            name: "pmf_recursive".into(),
            report: compare_tables(&pmf_recursive(&base, l_max)?, &truth, tol)?,
        },
        Check {
            name: "pmf_from_cdf_differencing".into(),
            report: compare_tables(&pmf_from_cdf_differencing(&base, l_max)?, &truth, tol)?,
        },
    ];
    if base.len() >= 2 && base.iter().all(|m| *m == base[0]) {
        checks.push(Check {
            name: "pmf_iid_with_h".into(),
            report: compare_tables(&pmf_iid_with_h(&base[0], base.len(), l_max)?, &truth, tol)?,
        });
    }
    Ok(Output::Validation(checks))
}

/// Points `(y, z)` with `z` at quantiles of the maximum and `y / z` spread
/// over `[1, n]`.
fn default_points(inp: &Inputs) -> Vec<(f64, f64)> {
    let n = inp.vars.len() as f64;
    let max_cdf = |z: f64| inp.vars.iter().map(|v| v.cdf(z)).product::<f64>();
    let mut pts = Vec::new();
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let (mut lo, mut hi) = (-1e3, 1.0);
        while max_cdf(hi) < p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if max_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            pts.push((hi * (1.0 + (n - 1.0).max(1.0) * s), hi));
        }
    }
    pts
}

fn validate_continuous(cfg: &RunConfig, inp: &Inputs) -> Result<Output> {
    let pts = if cfg.query.points.is_empty() {
        default_points(inp)
    } else {
        points(cfg)
    };
    let samples = cfg.query.samples.unwrap_or(VALIDATE_SAMPLES);
    let spec = continuous_spec(cfg, &inp.continuous)?;
    let engine = cdf_shifted_points(&inp.continuous, &spec, &pts)?;
    let mc = mc_joint_cdf(&inp.vars, &pts, samples, cfg.seed)?;
    let policy = TolerancePolicy::Sigma {
        k: cfg.tolerance.sigma,
        budget: cfg.tolerance.budget,
    };
    let mut checks = vec![Check {
        name: "cdf_vs_monte_carlo".into(),
        report: compare(&engine, mc, policy)?,
    }];
    if inp.continuous.len() >= 2 {
        let (base, _) = common_shift(&inp.continuous);
        let mass = total_mass(&pdf_recursive(&base, &spec)?)?;
        let report = OracleReport::from_values(
            summax::OracleMethod::NestedQuadrature,
            1,
            vec![Vec::new()],
            vec![1.0],
        );
        checks.push(Check {
            name: "pdf_total_mass".into(),
            report: compare(&[mass], report, TolerancePolicy::Absolute { tol: cfg.tolerance.budget })?,
        });
    }
    Ok(Output::Validation(checks))
}
