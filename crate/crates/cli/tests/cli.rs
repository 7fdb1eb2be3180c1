use std::path::Path;
use std::process::Command;

use summax_cli::{parse_config, run, ConfigError, Format, Output, Task};

const BERNOULLI3: &str = r#"
[[variables]]
kind = "discrete"
family = "binomial"
trials = 1
p = 0.5

[[variables]]
kind = "discrete"
family = "binomial"
trials = 1
p = 0.5

[[variables]]
kind = "discrete"
family = "binomial"
trials = 1
p = 0.5
"#;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_summax")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(
        r#"
task = "cdf"
[[variables]]
kind = "continuous"
family = "exponential"
rate = 1
[query]
points = [[2.0, 1.0]]
"#,
    )
    .unwrap();
    assert_eq!(cfg.task, Task::Cdf);
    assert_eq!(cfg.seed, 42);
    assert_eq!(cfg.epsilon, 1e-6);
    assert_eq!((cfg.grid.n_y, cfg.grid.n_z), (512, 512));
    assert_eq!(cfg.query.points, vec![[2.0, 1.0]]);
}

#[test]
fn rejects_mixed_kinds_outside_cdf() {
    let text = r#"
task = "pmf"
[[variables]]
kind = "continuous"
family = "exponential"
rate = 1.0
[[variables]]
kind = "discrete"
family = "poisson"
mean = 2.0
"#;
    let err = parse_config(text).unwrap_err();
    assert_eq!(err.to_string(), "mixed kinds unsupported for pmf");
    assert!(parse_config(&text.replace("\"pmf\"", "\"cdf\"")).is_ok());
}

#[test]
fn model_errors_name_the_entry() {
    let text = r#"
task = "pdf"
[[variables]]
kind = "continuous"
family = "exponential"
rate = 1.0
[[variables]]
kind = "continuous"
family = "tabulated"
abscissae = [0.0, 1.0]
densities = [2.0, 2.0]
"#;
    let err = parse_config(text).unwrap_err();
    assert!(matches!(err, ConfigError::Variable { index: 1, .. }), "{err}");
    assert!(err.to_string().starts_with("variables[1]"), "{err}");

    let unknown = parse_config("task = \"cdf\"\n[[variables]]\nkind = \"continuous\"\nfamily = \"cauchy\"\n").unwrap_err();
    assert!(unknown.to_string().contains("cauchy"), "{unknown}");
    let missing = parse_config(&format!("task = \"papr\"\n{BERNOULLI3}")).unwrap_err();
    assert!(missing.to_string().starts_with("query.alpha"), "{missing}");
}

#[test]
fn config_round_trips() {
    let text = r#"
task = "cdf"
seed = 7
epsilon = 1e-8
[[variables]]
kind = "continuous"
family = "gamma"
shape = 2.0
rate = 1.5
shift = 0.25
[[variables]]
kind = "discrete"
family = "explicit"
probabilities = [0.25, 0.5, 0.25]
shift = 1
[[variables]]
kind = "discrete"
family = "geometric"
p = 0.4
truncation_epsilon = 1e-12
[grid]
n_y = 300
y_max = 40.0
[query]
points = [[1.0, 0.5], [3.0, 2.0]]
[output]
path = "out.csv"
format = "csv"
[tolerance]
budget = 1e-2
"#;
    let cfg = parse_config(text).unwrap();
    let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.grid.n_z, 512);
    assert_eq!(again.output.format, Some(Format::Csv));
}

#[test]
fn library_tasks() {
    let cfg = parse_config(&format!("task = \"papr\"\n[query]\nalpha = 1.0\nbeta = 3.0\n{BERNOULLI3}")).unwrap();
    match run(&cfg).unwrap() {
        Output::Scalar { value, extra } => {
            assert!((value - 0.875).abs() < 1e-15);
            assert_eq!(extra, vec![("prob_sum_zero", 0.125)]);
        }
        other => panic!("{other:?}"),
    }
    let cfg = parse_config(&format!("task = \"moments\"\n[query]\nexponents = [1.0, 0.0]\n{BERNOULLI3}")).unwrap();
    let Output::Scalar { value, .. } = run(&cfg).unwrap() else { panic!() };
    assert!((value - 1.5).abs() < 1e-15);
    let cfg = parse_config(&format!("task = \"pmf\"\n{BERNOULLI3}")).unwrap();
    let Output::Lattice { entries, .. } = run(&cfg).unwrap() else { panic!() };
    assert!(entries.contains(&(2, 1, 0.375)));
}

#[test]
fn cdf_single_point_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "task = \"cdf\"\n[[variables]]\nkind = \"continuous\"\nfamily = \"exponential\"\nrate = 1.0\n[query]\npoints = [[2.0, 1.0]]\n",
    );
    let out = Command::new(bin()).arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert_eq!(v.as_object().unwrap().len(), 1);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "task = \"sample\"\n[query]\nsamples = 500\n[[variables]]\nkind = \"continuous\"\nfamily = \"weibull\"\nshape = 1.5\nscale = 1.0\n[[variables]]\nkind = \"continuous\"\nfamily = \"uniform\"\na = 0.0\nb = 2.0\n",
    );
    let run_once = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let st = Command::new(bin())
            .args(["--seed", seed, "--quiet", "--config"])
            .arg(&cfg)
            .arg("--output")
            .arg(&path)
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(path).unwrap()
    };
    let a = run_once("a.json", "5");
    assert_eq!(a, run_once("b.json", "5"));
    assert_ne!(a, run_once("c.json", "6"));
}

#[test]
fn validate_bernoulli_triple() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", &format!("task = \"validate\"\n{BERNOULLI3}"));
    let report = dir.path().join("report.json");
    let out = Command::new(bin()).arg("--config").arg(&cfg).arg("--output").arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("pmf_iid_with_h") && table.contains("PASS"), "{table}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["report"]["max_abs_diff"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn failing_validation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // an impossible tolerance flags every check
    let cfg = write(
        dir.path(),
        "run.toml",
        "task = \"validate\"\n[query]\nsamples = 20000\n[tolerance]\nsigma = 0.0\nbudget = 0.0\n[[variables]]\nkind = \"continuous\"\nfamily = \"exponential\"\nrate = 1.0\n",
    );
    let st = Command::new(bin()).args(["--quiet", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn papr_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!("task = \"papr\"\n[query]\nalpha = 1.0\nbeta = 3.0\n{BERNOULLI3}"),
    );
    let out = Command::new(bin()).args(["--format", "csv", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "value,prob_sum_zero\n0.875,0.125\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = write(
        dir.path(),
        "mixed.toml",
        "task = \"papr\"\n[query]\nalpha = 1.0\nbeta = 2.0\n[[variables]]\nkind = \"continuous\"\nfamily = \"exponential\"\nrate = 1.0\n[[variables]]\nkind = \"discrete\"\nfamily = \"poisson\"\nmean = 1.0\n",
    );
    let out = Command::new(bin()).arg("--config").arg(&mixed).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mixed kinds unsupported for papr"));

    let missing = Command::new(bin()).arg("--config").arg(dir.path().join("nope.toml")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    // a point outside the grid is a runtime failure
    let far = write(
        dir.path(),
        "far.toml",
        "task = \"cdf\"\n[grid]\nn_y = 64\nn_z = 64\n[[variables]]\nkind = \"continuous\"\nfamily = \"exponential\"\nrate = 1.0\n[[variables]]\nkind = \"continuous\"\nfamily = \"exponential\"\nrate = 1.0\n[query]\npoints = [[1e6, 1.0]]\n",
    );
    let out = Command::new(bin()).arg("--config").arg(&far).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
