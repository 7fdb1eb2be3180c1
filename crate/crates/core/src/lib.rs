//! Joint distribution of the sum `Y_n = X_1 + .. + X_n` and the maximum
//! `Z_n = max X_i` of independent nonnegative random variables.
//!
//! Continuous inputs go through grid engines for the joint CDF `G_n` and the
//! joint density `g_n`; integer-valued inputs get exact tables of the joint
//! CDF and PMF. [`derived`] builds peak-to-average ratio probabilities,
//! marginals, conditionals and moments on top, and [`oracle`] holds the
//! Monte Carlo and enumeration checks used to validate everything else.
//!
//! ```
//! use summax::{cdf_recursive, ContinuousModel, GridSpec};
//!
//! let m = ContinuousModel::exponential(1.0)?;
//! let models = vec![m.clone(), m];
//! let spec = GridSpec::covering(&models, 1e-6, 128, 128)?;
//! let cdf = cdf_recursive(&models, &spec)?;
//! let v = cdf.eval(2.0, 1.0)?;
//! assert!((v - (1.0 - (-1.0f64).exp()).powi(2)).abs() < 1e-3);
//! # Ok::<(), summax::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuous;
pub mod derived;
pub mod discrete;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod models;
pub mod oracle;
pub mod quadrature;

pub use continuous::{
    cdf_direct_smalln, cdf_from_pdf, cdf_mixed, cdf_points, cdf_recursive, cdf_shifted, cdf_shifted_points,
    common_shift, pdf_bootstrap_g2, pdf_iid_chain, pdf_iid_recursive, pdf_recursive, pdf_recursive_chain,
    pdf_shifted, pdf_shifted_points, total_mass,
};
pub use derived::{
    conditional, expectation, joint_moment, marginal_max, marginal_sum, papr_prob_continuous, papr_prob_discrete,
    prob_sum_zero, Axis, Joint, PaprQuery, Table1D,
};
pub use discrete::{
    cdf_direct_smalln_discrete, cdf_recursive_discrete, cdf_shifted_discrete, discrete_common_shift,
    pmf_from_cdf_differencing, pmf_iid_with_h, pmf_iid_with_h_aux, pmf_recursive, pmf_recursive_variant,
    pmf_shifted, AuxTable, PmfEntry, PmfTriangle, SecondSumLimit,
};
pub use error::{Error, Result};
pub use grid::{fingerprint, GridFunction2D, GridKind, GridSpec, IntegerJumps};
pub use lattice::WedgeLattice;
pub use models::{ContinuousFamily, ContinuousModel, DiscreteFamily, DiscreteModel, Variable};
pub use oracle::{
    compare, compare_tables, enumerate_discrete_joint, mc_expectation, mc_joint_cdf, mc_papr, McEstimate,
    OracleMethod, OracleReport, PointRecord, TolerancePolicy,
};
