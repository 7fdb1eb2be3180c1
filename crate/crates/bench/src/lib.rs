//! Shared fixtures for the benchmarks.

use summax::{ContinuousModel, DiscreteModel, GridSpec, Variable};

pub fn exponentials(n: usize) -> Vec<ContinuousModel> {
    vec![ContinuousModel::exponential(1.0).expect("valid rate"); n]
}

pub fn square_grid(models: &[ContinuousModel], points: usize) -> GridSpec {
    GridSpec::covering(models, 1e-6, points, points).expect("valid grid")
}

/// Bernoulli, uniform on `{0..3}` and binomial(3, 0.4), cycled to length `n`.
pub fn small_discrete(n: usize) -> Vec<DiscreteModel> {
    let pool = [
        DiscreteModel::bernoulli(0.5).expect("valid"),
        DiscreteModel::uniform_int(0, 3).expect("valid"),
        DiscreteModel::binomial(3, 0.4).expect("valid"),
    ];
    (0..n).map(|i| pool[i % pool.len()].clone()).collect()
}

pub fn as_variables(models: &[ContinuousModel]) -> Vec<Variable> {
    models.iter().cloned().map(Variable::Continuous).collect()
}
