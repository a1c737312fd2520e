use std::path::Path;
use std::process::{Command, Output};

fn write_conf(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psea"))
        .args(args)
        .output()
        .unwrap()
}

// Small battery so analyze/simulate stay fast in debug builds.
const SMALL: &str = "\
p_a = 1 W
p_b = 1 W
n0 = -80 dBm
n1 = 5e-12 W
n2 = 5e-12 W
eta = 0.5
lambda = 0.9
m_a = 2
m_b = 2
sigma_a = 1
sigma_b = 1
d_ab = 20 m
d_ar = 8 m
alpha = 2
capacity = 0.2
levels = 20
delta = 4
n_blocks = 20000
seed = 7
";

#[test]
fn analyze_reports_finite_throughput() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", SMALL);
    let out = run(&["analyze", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("psi = "), "{text}");
    assert!(text.contains("p_mode2 = "), "{text}");
    // dBm noise resolves to watts in the provenance line
    assert!(text.contains("n0=1e-11"), "{text}");
}

#[test]
fn malformed_line_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", "p_a = 1 W\nwhat is this\n");
    let out = run(&["analyze", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", &format!("{SMALL}bogus_key = 1\n"));
    let out = run(&["analyze", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn delta_out_of_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", &SMALL.replace("delta = 4", "delta = 250"));
    let out = run(&["analyze", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("delta"), "{err}");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", SMALL);
    let a = run(&["simulate", "--config", conf.to_str().unwrap()]);
    let b = run(&["simulate", "--config", conf.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--config", conf.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn ps_no_ea_with_discrete_battery_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(
        dir.path(),
        "a.conf",
        &format!("{SMALL}scheme = ps_no_ea\nbattery_mode = discrete\n"),
    );
    let out = run(&["simulate", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_emits_ordered_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(
        dir.path(),
        "a.conf",
        &format!(
            "{}sweep_param = delta\nsweep_values = 2, 4, 6\n",
            SMALL.replace("n_blocks = 20000", "n_blocks = 2000")
        ),
    );
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# "), "{text}");
    assert_eq!(lines[1], "delta,psi_analytical,psi_sim,std_err,p_mode2");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("2,"));
    assert!(lines[4].starts_with("6,"));
}

#[test]
fn sweep_without_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", SMALL);
    let out = run(&["sweep", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_single_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(
        dir.path(),
        "a.conf",
        &format!("{SMALL}lambda_min = 0.9\nlambda_max = 0.9\nlambda_step = 0.1\n"),
    );
    let out = run(&["optimize", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("optimal_lambda = 0.9"), "{text}");
    assert!(text.contains("optimal_delta = "), "{text}");
}

#[test]
fn compare_single_power_point() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(
        dir.path(),
        "a.conf",
        &format!(
            "{}sweep_param = p\nsweep_values = 1.0\n\
             lambda_min = 0.5\nlambda_max = 0.9\nlambda_step = 0.2\n",
            SMALL
                .replace("n_blocks = 20000", "n_blocks = 2000")
                .replace("levels = 20", "levels = 10")
                .replace("delta = 4", "delta = 2")
        ),
    );
    let out = run(&["compare", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "p,psi_psea,psi_tsea,psi_psnoea");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1,"));
}

#[test]
fn analyze_self_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "a.conf", SMALL);
    let out = run(&["analyze", "--config", conf.to_str().unwrap(), "--self-check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("self_check = ok"));
}

#[test]
fn shipped_reference_config_parses() {
    let conf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.conf");
    let out = run(&["analyze", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("psi = "), "{text}");
}
