use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liouville"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cr_prints_value_and_log() {
    let o = run(&["cr", "0", "1", "2", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1.33333333333333, 0.287682072451781\n");
    let o = run(&["cr", "1", "1.5", "inf", "0"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1.50000000000000, 0.405465108108164\n");
    let o = run(&["cr", "0", "i", "1", "-1"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn cr_degenerate_exits_2() {
    assert_eq!(code(&run(&["cr", "0", "0", "1", "2"])), 2);
    assert_eq!(code(&run(&["cr", "0", "1", "2"])), 2);
    assert_eq!(code(&run(&["cr", "0", "one", "2", "3"])), 2);
}

#[test]
fn verify_shipped_configs_pass() {
    let dir = tempfile::tempdir().unwrap();
    for (check, cfg) in [("punctured-disk", "punctured_disk"), ("partition", "partition"), ("rate", "rate_identity")] {
        let out = dir.path().join(check);
        let o = run(&[
            "verify",
            check,
            "--config",
            configs().join(format!("{cfg}.cfg")).to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{check}: {}", String::from_utf8_lossy(&o.stderr));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["pass"], true);
        assert!(summary["samples"].as_u64().unwrap() > 0);
        let csv = std::fs::read_to_string(out.join(format!("{check}.csv"))).unwrap();
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().count() as u64, summary["samples"].as_u64().unwrap() + 1);
    }
}

#[test]
fn rate_slope_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("rate_identity.cfg");
    let o = run(&["verify", "rate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["slope"].as_f64().unwrap() <= -0.35);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("unknown_key.cfg", "[family]\nkind = power\nspeed = 3\n"),
        ("unknown_section.cfg", "[plot]\nkind = line\n"),
        ("out_of_range.cfg", "[family]\nkind = power\nr0 = 1.5\nt = 1.6\n"),
        ("bad_box.cfg", "[xi]\nkind = bump\nbox = 0, 1, 1, 2\n"),
    ];
    for (name, text) in cases {
        let cfg = write_cfg(d, name, text);
        let o = run(&["verify", "decay", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
    }
    let o = run(&["verify", "decay", "--config", d.join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "nonsense", "--config", "x"]);
    assert_eq!(code(&o), 2);
    // a group fixes 0 and ∞, which this support contains
    let cfg = write_cfg(d, "support.cfg", "[group]\nmultiplier = 2\n[xi]\nkind = bump\nbox = 0, 1, 2, 3\n");
    assert_eq!(code(&run(&["verify", "invariance", "--config", &cfg, "--out", d.to_str().unwrap()])), 2);
}

#[test]
fn non_convergence_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_cfg(
        d,
        "slow.cfg",
        "[family]\nkind = power\nr0 = 1.5\nt = 0.3\n[group]\nmultiplier = 2\n\
         [xi]\nkind = bump\nbox = 1, 1.5, 3, 4\n[params]\ntolerance = 1e-12\nn_max = 3\n",
    );
    assert_eq!(code(&run(&["verify", "invariance", "--config", &cfg, "--out", d.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["eval", "--config", &cfg, "--out", d.to_str().unwrap()])), 1);
    let csv = std::fs::read_to_string(d.join("eval.csv")).unwrap();
    assert!(csv.contains("not-converged"));
}

#[test]
fn outside_neighborhood_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_cfg(
        d,
        "twist.cfg",
        "[family]\nkind = power\nr0 = 1.9\nt = 1.8i\n[xi]\nkind = indicator\nbox = 0.1, 0.5, 2, 10\n\
         [params]\nguard = 0.05\n[verify]\nt0 = 1.8i\nradius = 0.05\npoints = 4\n",
    );
    assert_eq!(code(&run(&["verify", "holomorphy", "--config", &cfg, "--out", d.to_str().unwrap()])), 3);
}

#[test]
fn eval_rows_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = configs().join("eval_identity.cfg");
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--tolerance", "1e-4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(d.join("eval_identity.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["t_re", "t_im", "gamma", "p", "q", "r", "value_re", "value_im", "abs", "levels", "delta_last", "status"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12 + 1);
    let values: Vec<f64> = rows[..12].iter().map(|r| r[6].parse().unwrap()).collect();
    for v in &values {
        assert!((v - values[0]).abs() < 1e-8);
    }
    let sup: f64 = rows[12][6].parse().unwrap();
    assert_eq!(&rows[12][2], "seminorm");
    assert_eq!(sup, values.iter().copied().fold(0.0, f64::max));
    let trace = std::fs::read_to_string(d.join("trace.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    for key in ["n", "I_re", "I_im", "delta"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}

#[test]
fn eval_is_independent_of_seed_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("eval_quasi_fuchsian.cfg");
    let mut outputs = Vec::new();
    for (seed, threads) in [("1", "1"), ("77", "3")] {
        let out = dir.path().join(seed);
        let o = run(&[
            "--threads",
            threads,
            "eval",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "--tolerance",
            "1e-4",
        ]);
        assert_eq!(code(&o), 0);
        outputs.push(std::fs::read(out.join("eval_quasi_fuchsian.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let nonzero = rdr.records().filter(|r| r.as_ref().unwrap()[7].parse::<f64>().unwrap().abs() > 1e-6).count();
    assert!(nonzero > 0);
}
