use std::path::Path;
use std::process::{Command, Output};

fn gaussbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussbench"))
        .args(args)
        .env_remove("GB_SEED")
        .output()
        .expect("spawn gaussbench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap().to_string()
}

fn body(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn field<'a>(rows: &'a [Vec<String>], row: usize, col: &str) -> &'a str {
    let idx = rows[0].iter().position(|c| c == col).expect("column");
    &rows[row + 1][idx]
}

fn hash_of(o: &Output) -> String {
    header(o)
        .split_whitespace()
        .find_map(|w| w.strip_prefix("config_sha256="))
        .unwrap()
        .to_string()
}

#[test]
fn capacity_reports_known_values() {
    let o = gaussbench(&["capacity", "--tau", "0.5", "--m", "0.25", "--nbar", "1,10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = header(&o);
    assert!(h.starts_with(&format!("# gaussbench {} command=capacity", env!("CARGO_PKG_VERSION"))));
    let rows = body(&o);
    assert_eq!(rows.len(), 3);
    assert_eq!(field(&rows, 0, "C_sq"), "0.870603126618");
    assert_eq!(field(&rows, 0, "C_coh"), "0.584962500721");
    assert_eq!(field(&rows, 0, "scheme"), "squeezed");
    assert_eq!(field(&rows, 1, "scheme"), "coherent");
    assert_eq!(field(&rows, 0, "n_bar_crossover"), "8");
}

#[test]
fn loss_flag_matches_generic_channel() {
    let a = gaussbench(&["capacity", "--loss", "0.5", "--nbar", "3"]);
    let b = gaussbench(&["capacity", "--tau", "0.5", "--m", "0.25", "--nbar", "3"]);
    assert_eq!(body(&a), body(&b));
}

#[test]
fn efficiency_grid_matches_golden_file() {
    let o = gaussbench(&["efficiency-grid", "--tau", "0.7", "--resolution", "6", "--seed", "1"]);
    assert!(o.status.success());
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/efficiency_grid_tau07.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn crossover_locus_written_alongside() {
    let dir = tempfile::tempdir().unwrap();
    let locus = dir.path().join("locus.csv");
    let grid = dir.path().join("grid.csv");
    let o = gaussbench(&[
        "efficiency-grid",
        "--resolution",
        "4",
        "--crossover-out",
        locus.to_str().unwrap(),
        "--out",
        grid.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let locus = std::fs::read_to_string(locus).unwrap();
    let lines: Vec<&str> = locus.lines().collect();
    assert_eq!(lines[1], "n_th,n_bar_crossover");
    assert_eq!(lines.len(), 6);
    assert_eq!(std::fs::read_to_string(grid).unwrap().lines().count(), 18);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wf.toml");
    std::fs::write(&cfg, "lambdas = [1.0, 2.0, 5.0]\nbudget = 1.0\nseed = 42\n").unwrap();
    let file_only = gaussbench(&["waterfill", "--config", cfg.to_str().unwrap()]);
    assert!(file_only.status.success());
    assert!(header(&file_only).ends_with("seed=42"));
    assert_eq!(field(&body(&file_only), 0, "power"), "1");

    let overridden = gaussbench(&["waterfill", "--config", cfg.to_str().unwrap(), "--budget", "3", "--seed", "7"]);
    assert!(header(&overridden).ends_with("seed=7"));
    let rows = body(&overridden);
    assert_eq!(field(&rows, 0, "power"), "2");
    assert_eq!(field(&rows, 1, "power"), "1");
    assert_eq!(field(&rows, 2, "active"), "0");
}

#[test]
fn json_and_toml_configs_hash_alike() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("c.toml");
    let j = dir.path().join("c.json");
    std::fs::write(&t, "order = 16\nsigma = [\"inf\", 3]\nnbar = [2]\n").unwrap();
    std::fs::write(&j, r#"{"order": 16, "sigma": ["inf", 3], "nbar": [2]}"#).unwrap();
    let a = gaussbench(&["qam-heterodyne", "--config", t.to_str().unwrap()]);
    let b = gaussbench(&["qam-heterodyne", "--config", j.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let c = gaussbench(&["qam-heterodyne", "--order", "16", "--sigma", "inf,3", "--nbar", "2"]);
    assert_eq!(stdout(&a), stdout(&c));
    let d = gaussbench(&["qam-heterodyne", "--order", "16", "--sigma", "inf,3", "--nbar", "2.5"]);
    assert_ne!(hash_of(&a), hash_of(&d));
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaussbench"));
        cmd.args(["additivity-test", "--trials", "50"]).args(args).env_remove("GB_SEED");
        if let Some(v) = env {
            cmd.env("GB_SEED", v);
        }
        cmd.output().unwrap()
    };
    let a = run(Some("123"), &[]);
    assert!(header(&a).ends_with("seed=123"));
    let b = run(None, &["--seed", "123"]);
    assert_eq!(stdout(&a), stdout(&b));
    let c = run(Some("123"), &["--seed", "9"]);
    assert!(header(&c).ends_with("seed=9"));
    assert_ne!(body(&a), body(&c));
    assert_eq!(run(Some("abc"), &[]).status.code(), Some(2));
}

#[test]
fn output_independent_of_thread_count() {
    let args = ["becerra", "--order", "4", "--stages", "8", "--nbar", "1,3", "--trials", "2000"];
    let one = gaussbench(&[&args[..], &["--threads", "1"]].concat());
    let two = gaussbench(&[&args[..], &["--threads", "2"]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(stdout(&one), stdout(&two));
}

#[test]
fn becerra_columns() {
    let o = gaussbench(&["becerra", "--stages", "4", "--nbar", "1", "--trials", "1000", "--sigma", "2"]);
    assert!(o.status.success());
    let rows = body(&o);
    assert_eq!(
        rows[0].join(","),
        "eta,n_bar,delta,sigma,I_becerra,I_stderr,C_coh,C_sq,C_holevo,beats_gaussian"
    );
    assert_eq!(field(&rows, 0, "sigma"), "2");
    assert_eq!(field(&rows, 0, "eta"), "0.7");
}

#[test]
fn heterodyne_uniform_sigma_printed_as_inf() {
    let o = gaussbench(&["qam-heterodyne", "--order", "4", "--nbar", "1"]);
    let rows = body(&o);
    assert_eq!(rows[0].join(","), "M,eta,sigma,delta,n_bar,I_bits,C_coh_bits,past_marker");
    assert_eq!(field(&rows, 0, "sigma"), "inf");
    assert_eq!(field(&rows, 0, "M"), "4");
}

#[test]
fn config_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["capacity", "--tau", "0.5", "--m", "0.1", "--nbar", "1"],
        &["capacity", "--loss", "0.5"],
        &["capacity", "--loss", "0.5", "--amp", "2", "--nbar", "1"],
        &["waterfill", "--lambdas", "1,-2", "--budget", "1"],
        &["becerra", "--order", "8", "--nbar", "1"],
        &["qam-heterodyne", "--sigma", "-3", "--nbar", "1"],
        &["efficiency-grid", "--spacing", "cubic"],
        &["waterfill", "--config", "/definitely/missing.toml"],
        &["no-such-command"],
    ];
    for args in cases {
        let o = gaussbench(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unknown_config_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.toml");
    std::fs::write(&cfg, "lambdas = [1.0]\nbudget = 1.0\nbugdet = 2.0\n").unwrap();
    let o = gaussbench(&["waterfill", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bugdet"));
}

#[test]
fn additivity_violation_exits_4() {
    let ok = gaussbench(&["additivity-test", "--trials", "200"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(field(&body(&ok), 0, "violations"), "0");
    // a negative tolerance demands strictly positive gaps of at least 10 bits
    let strict = gaussbench(&["additivity-test", "--trials", "50", "--tolerance=-10"]);
    assert_eq!(strict.status.code(), Some(4));
    assert!(!strict.stdout.is_empty());
}

#[test]
fn selftest_passes() {
    let o = gaussbench(&["selftest", "--scale", "0.5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let rows = body(&o);
    assert!(rows.len() > 5);
    assert!(rows[1..].iter().all(|r| r[1] == "1"));
}

#[test]
fn unwritable_output_exits_1() {
    let o = gaussbench(&["waterfill", "--lambdas", "1", "--budget", "1", "--out", "/definitely/missing/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}
