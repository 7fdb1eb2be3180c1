use summax::{
    conditional, expectation, joint_moment, marginal_max, marginal_sum, mc_expectation, mc_papr, papr_prob_continuous,
    papr_prob_discrete, pdf_iid_recursive, pdf_recursive, pmf_recursive, prob_sum_zero, Axis, ContinuousModel,
    DiscreteModel, Error, GridFunction2D, GridSpec, Joint, PaprQuery, Variable,
};

fn exp_pdf(n: usize, size: usize) -> GridFunction2D {
    let m = ContinuousModel::exponential(1.0).unwrap();
    let spec = GridSpec::covering(&vec![m.clone(); n], 1e-6, size, size).unwrap();
    pdf_iid_recursive(&m, n, &spec).unwrap()
}

fn exp_vars(n: usize) -> Vec<Variable> {
    vec![Variable::Continuous(ContinuousModel::exponential(1.0).unwrap()); n]
}

#[test]
fn papr_trivial_ranges() {
    for n in 2..=4 {
        let pdf = exp_pdf(n, 256);
        let all = papr_prob_continuous(&pdf, &PaprQuery::new(1.0, n as f64, n).unwrap()).unwrap();
        assert!((all - 1.0).abs() < 5e-3, "n={n}: {all}");
        let none = papr_prob_continuous(&pdf, &PaprQuery::new(1.3, 1.3, n).unwrap()).unwrap();
        assert!(none.abs() < 5e-3, "n={n}: {none}");
    }
}

#[test]
fn papr_matches_monte_carlo() {
    let pdf = exp_pdf(2, 512);
    let v = papr_prob_continuous(&pdf, &PaprQuery::new(1.0, 1.5, 2).unwrap()).unwrap();
    let mc = mc_papr(&exp_vars(2), 1.0, 1.5, 1_000_000, 7).unwrap();
    assert!((v - mc.mean).abs() <= 3.0 * mc.stderr + 5e-3, "{v} vs {} +- {}", mc.mean, mc.stderr);
    // the ratio of an i.i.d. exponential pair is uniform on [1, 2]
    assert!((v - 0.5).abs() < 5e-3);
}

#[test]
fn papr_is_monotone_in_the_bounds() {
    let pdf = exp_pdf(3, 256);
    let betas = [1.0, 1.2, 1.5, 2.0, 2.5, 3.0];
    let mut last = 0.0;
    for b in betas {
        let v = papr_prob_continuous(&pdf, &PaprQuery::new(1.0, b, 3).unwrap()).unwrap();
        assert!(v >= last - 1e-12, "beta {b}");
        last = v;
    }
    let mut last = 1.0;
    for a in betas {
        let v = papr_prob_continuous(&pdf, &PaprQuery::new(a, 3.0, 3).unwrap()).unwrap();
        assert!(v <= last + 1e-12, "alpha {a}");
        last = v;
    }
}

#[test]
fn papr_discrete_and_zero_sum() {
    let b = DiscreteModel::bernoulli(0.5).unwrap();
    let pmf = pmf_recursive(&[b.clone(), b.clone(), b], None).unwrap();
    let p = |a, bb| papr_prob_discrete(&pmf, &PaprQuery::new(a, bb, 3).unwrap()).unwrap();
    assert!((p(1.0, 3.0) - 0.875).abs() < 1e-15);
    assert!((p(3.0, 3.0) - 0.375).abs() < 1e-15);
    assert_eq!(p(0.2, 0.8), 0.0);
    assert!((p(1.0, 3.0) + prob_sum_zero(&pmf) - 1.0).abs() < 1e-15);
    assert!(PaprQuery::new(2.0, 1.0, 3).is_err());
}

#[test]
fn continuous_marginals() {
    let pdf = exp_pdf(2, 512);
    let sum = marginal_sum(Joint::Density(&pdf)).unwrap();
    for (y, v) in sum.coordinate.iter().zip(&sum.value) {
        if *y <= 10.0 {
            assert!((v - y * (-y).exp()).abs() < 5e-3, "y={y}: {v}");
        }
    }
    let max = marginal_max(Joint::Density(&pdf)).unwrap();
    for (z, v) in max.coordinate.iter().zip(&max.value) {
        let want = 2.0 * (-z).exp() * (1.0 - (-z).exp());
        assert!((v - want).abs() < 5e-3, "z={z}: {v}");
    }
    assert!((max.trapezoid() - 1.0).abs() < 5e-3);
}

#[test]
fn discrete_max_marginal_is_a_product() {
    let models = [DiscreteModel::binomial(3, 0.4).unwrap(), DiscreteModel::uniform_int(0, 4).unwrap()];
    let pmf = pmf_recursive(&models, None).unwrap();
    let max = marginal_max(Joint::Mass(&pmf)).unwrap();
    let mut acc = 0.0;
    for (z, v) in max.coordinate.iter().zip(&max.value) {
        acc += v;
        let want: f64 = models.iter().map(|m| m.cdf(*z)).product();
        assert!((acc - want).abs() < 1e-12);
    }
    let sum = marginal_sum(Joint::Mass(&pmf)).unwrap();
    assert!((sum.value.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn conditional_slices() {
    let pdf = exp_pdf(2, 512);
    let slice = conditional(Joint::Density(&pdf), Axis::Max, 1.0, 201).unwrap();
    assert!((slice.trapezoid() - 1.0).abs() < 5e-3);
    // g_2(y, 1) = 2 e^{-y} on [1, 2], normalized by the max density at 1
    let norm = 2.0 * (-1.0f64).exp() * (1.0 - (-1.0f64).exp());
    for (y, v) in slice.coordinate.iter().zip(&slice.value) {
        assert!((1.0 - 1e-9..=2.0 + 1e-9).contains(y));
        assert!((v - 2.0 * (-y).exp() / norm).abs() < 5e-3, "y={y}: {v}");
    }
    let by_sum = conditional(Joint::Density(&pdf), Axis::Sum, 2.0, 201).unwrap();
    assert!((by_sum.trapezoid() - 1.0).abs() < 5e-3);

    let b = DiscreteModel::bernoulli(0.5).unwrap();
    let pmf = pmf_recursive(&[b.clone(), b], None).unwrap();
    let point = conditional(Joint::Mass(&pmf), Axis::Max, 0.0, 0).unwrap();
    assert_eq!(point.coordinate, vec![0.0]);
    assert!((point.value[0] - 1.0).abs() < 1e-12);
    let given_sum = conditional(Joint::Mass(&pmf), Axis::Sum, 1.0, 0).unwrap();
    assert!((given_sum.value.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(matches!(conditional(Joint::Mass(&pmf), Axis::Sum, 7.0, 0), Err(Error::DegenerateSlice { .. })));
}

#[test]
fn moments() {
    let pdf3 = exp_pdf(3, 512);
    let ey = expectation(Joint::Density(&pdf3), |y, _| y).unwrap();
    assert!((ey - 3.0).abs() < 2e-2, "{ey}");

    let pdf2 = exp_pdf(2, 512);
    let eyz = joint_moment(Joint::Density(&pdf2), 1.0, 1.0).unwrap();
    let mc = mc_expectation(&exp_vars(2), 1_000_000, 11, |y, z| y * z).unwrap();
    assert!((eyz - mc.mean).abs() <= 3.0 * mc.stderr + 5e-3, "{eyz} vs {} +- {}", mc.mean, mc.stderr);
    // E(Z_2) = 1.5 for two unit exponentials
    let ez = joint_moment(Joint::Density(&pdf2), 0.0, 1.0).unwrap();
    assert!((ez - 1.5).abs() < 5e-3);

    let b = DiscreteModel::bernoulli(0.5).unwrap();
    let pmf = pmf_recursive(&[b.clone(), b.clone(), b], None).unwrap();
    assert!((joint_moment(Joint::Mass(&pmf), 1.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
    assert!(expectation(Joint::Density(&pdf2), |_, _| f64::NAN).is_err());
}

#[test]
fn general_models_integrate_to_one() {
    let models = [
        ContinuousModel::gamma(2.0, 1.0).unwrap(),
        ContinuousModel::uniform(0.0, 2.0).unwrap(),
        ContinuousModel::weibull(1.5, 1.0).unwrap(),
    ];
    let spec = GridSpec::covering(&models, 1e-6, 384, 384).unwrap();
    let pdf = pdf_recursive(&models, &spec).unwrap();
    let mass = expectation(Joint::Density(&pdf), |_, _| 1.0).unwrap();
    assert!((mass - 1.0).abs() < 1e-2, "{mass}");
}
