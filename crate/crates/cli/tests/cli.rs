use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn nevkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevkit"))
        .args(args)
        .env("NEVKIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `(quantity, r, R, value, route)` rows of a characteristics table.
fn table(text: &str) -> Vec<(String, f64, Option<f64>, f64, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].to_string(),
                f[1].parse().unwrap(),
                (!f[2].is_empty()).then(|| f[2].parse().unwrap()),
                f[3].parse().unwrap(),
                f[4].to_string(),
            )
        })
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn characteristics_of_u5() {
    let model = data("u5.toml");
    let o = nevkit(&["characteristics", "--model", path_str(&model), "--radii", "0.5,2,4", "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = table(&stdout(&o));
    let value = |q: &str, r: f64, big_r: Option<f64>, route: &str| {
        rows.iter()
            .find(|row| row.0 == q && row.1 == r && row.2 == big_r && row.4 == route)
            .map(|row| row.3)
            .unwrap_or_else(|| panic!("missing {q} at {r}"))
    };
    assert!((value("C_U+", 4.0, None, "quadrature") - (5.0f64 / 4.0).ln()).abs() < 1e-6);
    assert!((value("C_U", 2.0, None, "closed_form") - (5.0f64 / 2.0).ln()).abs() < 1e-12);
    assert!((value("M_U", 2.0, None, "scan") - 5f64.ln()).abs() < 1e-9);
    assert_eq!(value("mu_rd", 2.0, None, "closed_form"), -1.0);
    let t = value("T_U", 0.5, Some(4.0), "positive_part");
    let t_sup = value("T_U", 0.5, Some(4.0), "sup_split");
    assert!((t - t_sup).abs() < 4e-6);
    assert!((value("T_bold_U", 0.5, Some(2.0), "positive_part") - 5f64.ln()).abs() < 1e-6);
}

#[test]
fn characteristics_of_empty_model_are_zero() {
    let model = data("empty.json");
    let o = nevkit(&["characteristics", "--model", path_str(&model), "--radii", "0.5,1,3", "--no-timestamp"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o));
    assert_eq!(rows.len(), 4 * 3 + 3 * 2);
    assert!(rows.iter().all(|r| r.3 == 0.0));
}

#[test]
fn malformed_model_exits_2_with_location() {
    let model = data("malformed.json");
    let o = nevkit(&["characteristics", "--model", path_str(&model), "--radii", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("malformed.json") && err.contains("line 1") && err.contains("mass"), "{err}");
}

#[test]
fn atom_on_grid_radius_exits_2_with_radius() {
    let model = data("u5.toml");
    let o = nevkit(&["characteristics", "--model", path_str(&model), "--radii", "0.5,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radius 1"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_3() {
    let o = nevkit(&["characteristics", "--model", "/nonexistent/model.json", "--radii", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_fixture_ratio() {
    let o = nevkit(&["verify", "--fixture", "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let ratio: f64 = row[4].parse().unwrap();
    assert!((ratio - 0.077).abs() < 1e-3, "{ratio}");
    assert_eq!(row[5], "pass");
    assert!(text.ends_with("# 1/1 passed\n"));
}

#[test]
fn verify_single_case_from_files_matches_fixture() {
    let (model, m) = (data("u5.toml"), data("linear.json"));
    let o = nevkit(&[
        "verify",
        "--model",
        path_str(&model),
        "--integrator",
        path_str(&m),
        "--window",
        "2:4",
        "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fixture = nevkit(&["verify", "--fixture", "--no-timestamp"]);
    let strip_seed = |s: String| {
        s.lines()
            .map(|l| l.splitn(3, ',').enumerate().filter(|(i, _)| *i != 1).map(|(_, f)| f).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip_seed(stdout(&o)), strip_seed(stdout(&fixture)));
}

#[test]
fn verify_with_jump_is_divergent_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("jump.toml");
    std::fs::write(&m, "end = 2.0\n\n[[jumps]]\nx = 1.0\nh = 1.0\n").unwrap();
    let model = data("u5.toml");
    let o = nevkit(&[
        "verify",
        "--model",
        path_str(&model),
        "--integrator",
        path_str(&m),
        "--window",
        "2:4",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",divergent,"));
}

#[test]
fn verify_is_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = nevkit(&["verify", "--seed", "11", "--cases", "6", "--no-timestamp", "--out", path_str(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 6 + 1);

    let o = nevkit(&["verify", "--seed", "11", "--cases", "6", "--out", path_str(&a)]);
    assert!(o.status.success());
    let stamped = std::fs::read_to_string(&a).unwrap();
    let (first, rest) = stamped.split_once('\n').unwrap();
    assert!(first.starts_with("# generated unix="));
    assert_eq!(rest, text);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn verify_unwritable_output_exits_3() {
    let o = nevkit(&["verify", "--fixture", "--out", "/nonexistent-dir/report.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_default_suite_passes() {
    let o = nevkit(&["verify", "--seed", "1", "--cases", "200", "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("# 200/200 passed\n"));
    assert!(stderr(&o).contains("200/200 passed"));
}

#[test]
fn counterexample_defaults_are_monotone() {
    let o = nevkit(&["counterexample", "--no-timestamp"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1] && w[1][2] > w[0][2]));
    let slope: f64 = text
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("log_slope="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.9..=1.1).contains(&slope), "{slope}");
}

#[test]
fn counterexample_unit_epsilon_matches_identity() {
    let o = nevkit(&["counterexample", "--eps", "1", "--no-timestamp"]);
    let text = stdout(&o);
    let lhs: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // m(t) = t/2: (m(2) - m(0)) ln 5 + ∫_0^1 (m(1+t) - m(1-t))/t dt = ln 5 + 1.
    assert!((lhs - (5f64.ln() + 1.0)).abs() < 1e-6 * lhs, "{lhs}");
}

#[test]
fn empty_epsilon_list_in_config_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"counterexample\"\nepsilons = []\nno_timestamp = true\nout = \"scan.csv\"\n").unwrap();
    let o = nevkit(&["--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::copy(data("u5.toml"), dir.path().join("model.toml")).unwrap();
    std::fs::write(
        &cfg,
        "command = \"characteristics\"\nmodel = \"model.toml\"\nradii = [0.5, 2.0]\nwindows = [[0.5, 2.0]]\n",
    )
    .unwrap();
    let o = nevkit(&["--config", path_str(&cfg), "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(table(&stdout(&o)).len(), 4 * 2 + 3);
    let o = nevkit(&["characteristics", "--config", path_str(&cfg), "--radii", "3", "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(table(&stdout(&o)).len(), 4 + 3);
}

#[test]
fn classical_check_passes() {
    let f = data("rational.json");
    let o = nevkit(&["classical", "--rational", path_str(&f), "--r", "2", "--k", "2", "--no-timestamp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).trim_end().ends_with(",pass"));
}

#[test]
fn invalid_flags_exit_2() {
    assert_eq!(nevkit(&["verify", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(nevkit(&["verify", "--cases", "0"]).status.code(), Some(2));
    assert_eq!(nevkit(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(nevkit(&["classical", "--rational", path_str(&data("rational.json")), "--r", "0.5"]).status.code(), Some(2));
}
