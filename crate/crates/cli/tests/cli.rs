use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gpdisc::report::io::{parse_archive, parse_band, parse_optimum, parse_parameter_summaries};
use tempfile::TempDir;

fn gpdisc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpdisc"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GPDISC_LOG")
        .output()
        .expect("spawn gpdisc")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const BASIC: &str = "scenario = \"gp\"\n[model]\nkind = \"basic-example\"\nn_rich = 100\nseed = 42\n[sampler]\ncycles = 0\n";

const LINEAR: &str = r#"
[model]
kind = "linear-gaussian"
n = 40
theta_true = [1.0, -0.5]
noise_sd = 0.5
seed = 5

[priors]
theta_bounds = [[-5.0, 5.0], [-5.0, 5.0]]

[sampler]
cycles = 400
thinning = 2
seed = 9

[predict]
max_samples = 200
"#;

fn setup(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

#[test]
fn generate_is_byte_identical() {
    let d = setup(BASIC);
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "a"], d.path()));
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "b"], d.path()));
    for f in ["sparse.csv", "rich.csv", "truth_sparse.csv", "truth_rich.csv", "dataset.toml"] {
        let a = fs::read(d.path().join("a").join(f)).unwrap();
        let b = fs::read(d.path().join("b").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn zero_cycles_give_empty_archive() {
    let d = setup(BASIC);
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "data"], d.path()));
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "inv"], d.path()));
    let text = fs::read_to_string(d.path().join("inv/archive.csv")).unwrap();
    let a = parse_archive(&text, "archive.csv").unwrap();
    assert!(a.is_empty());
    assert_eq!(a.cycles, 0);
    assert_eq!(a.model, "basic-example");
    assert_eq!(a.stream_names, vec!["sparse", "rich"]);
    assert!(text.lines().last().unwrap().starts_with("chain,generation,a,b,psi_sparse"));
}

#[test]
fn linear_gaussian_pipeline() {
    let d = setup(LINEAR);
    let p = d.path();
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "data"], p));
    assert!(p.join("data/design.csv").exists());
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "inv"], p));
    ok(&gpdisc(&["report", "--archive", "inv/archive.csv", "--out", "rep"], p));
    let (summary, _) =
        parse_parameter_summaries(&fs::read_to_string(p.join("rep/parameters.csv")).unwrap(), "p").unwrap();
    assert_eq!(summary.len(), 2);
    assert!(summary.iter().all(|s| s.rhat.is_some()));
    assert!(!p.join("rep/discrepancy.csv").exists());

    ok(&gpdisc(&["predict", "--archive", "inv/archive.csv", "--data", "data", "--out", "pred"], p));
    let band = parse_band(&fs::read_to_string(p.join("pred/band_y.csv")).unwrap(), "b").unwrap();
    assert_eq!(band.locations.len(), 40);
    assert!(band.process.is_none());

    ok(&gpdisc(&["optimize", "--config", "run.toml", "--data", "data", "--out", "opt"], p));
    let (opt, names) = parse_optimum(&fs::read_to_string(p.join("opt/optimum.csv")).unwrap(), "o").unwrap();
    assert!(opt.converged);
    assert_eq!(names, vec!["theta0", "theta1"]);
    // the sampled posterior median sits near the optimum of the flat-prior density
    for (s, t) in summary.iter().zip(&opt.theta_hat) {
        assert!((s.quantiles[1] - t).abs() < 3.0 * s.sd / (summary.len() as f64).sqrt() + 0.05);
    }
    assert!(p.join("opt/band_y.csv").exists());
}

#[test]
fn invert_seed_flag_changes_only_the_seed() {
    let d = setup(&LINEAR.replace("cycles = 400", "cycles = 30"));
    let p = d.path();
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "data"], p));
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "a", "--seed", "4"], p));
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "b", "--seed", "4"], p));
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "c", "--seed", "5"], p));
    let read = |x: &str| fs::read(p.join(x).join("archive.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn exit_codes() {
    let d = setup(BASIC);
    let p = d.path();
    ok(&gpdisc(&["generate", "--config", "run.toml", "--out", "data"], p));

    fs::write(p.join("bad.toml"), "[model]\nkind = \"basic-example\"\nn_rcih = 3\n").unwrap();
    let out = gpdisc(&["generate", "--config", "bad.toml", "--out", "x"], p);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_rcih"));

    let out = gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "x", "--scenario", "maybe"], p);
    assert_eq!(code(&out), 2);

    let out = gpdisc(&["invert", "--config", "missing.toml", "--data", "data", "--out", "x"], p);
    assert_eq!(code(&out), 4);

    let out = gpdisc(&["invert", "--config", "run.toml", "--data", "nowhere", "--out", "x"], p);
    assert_eq!(code(&out), 4);

    // malformed data file: diagnostic names file and line
    let sparse = fs::read_to_string(p.join("data/sparse.csv")).unwrap();
    let broken = sparse.replacen("e-3\n", "e-3\n0.5,abc,1.0\n", 1);
    fs::create_dir(p.join("broken")).unwrap();
    fs::write(p.join("broken/sparse.csv"), broken).unwrap();
    fs::copy(p.join("data/rich.csv"), p.join("broken/rich.csv")).unwrap();
    let out = gpdisc(&["invert", "--config", "run.toml", "--data", "broken", "--out", "x"], p);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sparse.csv:3"), "{err}");

    // an empty archive has nothing to summarize
    ok(&gpdisc(&["invert", "--config", "run.toml", "--data", "data", "--out", "inv"], p));
    let out = gpdisc(&["report", "--archive", "inv/archive.csv", "--out", "rep"], p);
    assert_eq!(code(&out), 3);

    let out = gpdisc(&["frobnicate"], p);
    assert_eq!(code(&out), 2);
}

#[test]
fn external_model_is_library_only() {
    let d = setup("[model]\nkind = \"external\"\n");
    let out = gpdisc(&["generate", "--config", "run.toml", "--out", "x"], d.path());
    assert_eq!(code(&out), 2);
}
