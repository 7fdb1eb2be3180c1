use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use summax::{
    cdf_recursive, enumerate_discrete_joint, mc_joint_cdf, papr_prob_continuous, pdf_iid_recursive, pdf_recursive,
    pmf_iid_with_h, pmf_recursive, DiscreteModel, PaprQuery,
};
use summax_bench::{as_variables, exponentials, small_discrete, square_grid};

fn continuous(c: &mut Criterion) {
    let mut g = c.benchmark_group("continuous");
    g.sample_size(10);
    for points in [128, 256, 512] {
        let models = exponentials(3);
        let spec = square_grid(&models, points);
        g.bench_with_input(BenchmarkId::new("cdf_recursive_n3", points), &spec, |b, s| {
            b.iter(|| cdf_recursive(black_box(&models), s).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pdf_recursive_n3", points), &spec, |b, s| {
            b.iter(|| pdf_recursive(black_box(&models), s).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pdf_iid_recursive_n3", points), &spec, |b, s| {
            b.iter(|| pdf_iid_recursive(black_box(&models[0]), 3, s).unwrap())
        });
    }
    let models = exponentials(3);
    let pdf = pdf_recursive(&models, &square_grid(&models, 256)).unwrap();
    let q = PaprQuery::new(1.0, 1.5, 3).unwrap();
    g.bench_function("papr_n3_256", |b| b.iter(|| papr_prob_continuous(black_box(&pdf), &q).unwrap()));
    g.finish();
}

fn discrete(c: &mut Criterion) {
    let mut g = c.benchmark_group("discrete");
    for n in [2, 4, 8] {
        let models = small_discrete(n);
        g.bench_with_input(BenchmarkId::new("pmf_recursive", n), &models, |b, m| {
            b.iter(|| pmf_recursive(black_box(m), None).unwrap())
        });
    }
    let poisson = DiscreteModel::poisson(4.0).unwrap();
    g.bench_function("pmf_iid_with_h_poisson_n8", |b| {
        b.iter(|| pmf_iid_with_h(black_box(&poisson), 8, None).unwrap())
    });
    let models = small_discrete(4);
    g.bench_function("enumerate_n4", |b| b.iter(|| enumerate_discrete_joint(black_box(&models), None).unwrap()));
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let vars = as_variables(&exponentials(3));
    let points = [(2.0, 1.0), (3.0, 1.5), (4.0, 2.0)];
    g.bench_function("mc_joint_cdf_1e5", |b| {
        b.iter(|| mc_joint_cdf(black_box(&vars), &points, 100_000, 1).unwrap())
    });
    g.finish();
}

criterion_group!(benches, continuous, discrete, monte_carlo);
criterion_main!(benches);
