use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Shrinks the array and quadrature so a full 1 s / 1 kHz run takes a moment.
const FAST: [&str; 8] = [
    "--set",
    "array.nx=10",
    "--set",
    "array.ny=8",
    "--set",
    "quadrature.n_r=4",
    "--set",
    "quadrature.n_phi=8",
];

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn ushaptic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ushaptic"))
        .args(args)
        .env_remove("USHAPTIC_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_one_row_per_tick() {
    let out = tempfile::tempdir().unwrap();
    let curved = scenarios().join("curved.toml");
    let mut args = vec!["run", path_str(&curved), "-o", path_str(out.path())];
    args.extend(FAST);
    let o = ushaptic(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(out.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1002);
    assert!(trace.starts_with("t_s,x_fin_m,x_fin_tracked_m,x_fo_m,"));
    let profile = fs::read_to_string(out.path().join("profile.csv")).unwrap();
    assert!(profile.starts_with("x_m,height_m,slope_rad\n"));
    let summary = fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(summary.contains("ticks = 1001\n"));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), summary);
}

#[test]
fn quiet_run_prints_nothing() {
    let out = tempfile::tempdir().unwrap();
    let curved = scenarios().join("curved.toml");
    let mut args = vec!["run", path_str(&curved), "-o", path_str(out.path()), "--quiet", "--seed", "7"];
    args.extend(FAST);
    args.extend(["--set", "simulation.control_rate_hz=50"]);
    let o = ushaptic(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn alpha_override_on_edge_law_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let edge = scenarios().join("edge.toml");
    let o = ushaptic(&["run", path_str(&edge), "-o", path_str(out.path()), "--set", "control.alpha=0.5"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("control.alpha"), "{}", stderr(&o));
    assert!(!out.path().join("trace.csv").exists());
}

#[test]
fn missing_scenario_names_the_path() {
    let o = ushaptic(&["run", "/no/such/dir/missing.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/no/such/dir/missing.toml"));
}

#[test]
fn syntax_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[control]\nlaw = \"curved\"\nalpha = \n").unwrap();
    let o = ushaptic(&["run", path_str(&bad), "-o", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    fs::write(&bad, "[control]\nlaw = \"wavy\"\n").unwrap();
    let o = ushaptic(&["run", path_str(&bad), "-o", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("wavy"));

    fs::write(&bad, "[control]\nr_fo_m = 0.025\n").unwrap();
    let o = ushaptic(&["run", path_str(&bad), "-o", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("control.r_fo_m"));

    let o = ushaptic(&["run", path_str(&scenarios().join("curved.toml")), "--set", "control.speed=1"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("control.speed"));
}

#[test]
fn override_matches_file_edit_and_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(scenarios().join("curved.toml")).unwrap();
    let edited = dir.path().join("edited.toml");
    fs::write(&edited, base.replace("alpha = 1.0", "alpha = 0.6")).unwrap();

    let run_into = |scenario: &Path, sub: &str, extra: &[&str]| -> Vec<u8> {
        let out = dir.path().join(sub);
        let mut args = vec!["run", path_str(scenario), "-o", path_str(&out), "--quiet"];
        args.extend(FAST);
        args.extend(["--set", "simulation.control_rate_hz=100"]);
        args.extend(extra);
        let o = ushaptic(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("trace.csv")).unwrap()
    };
    let curved = scenarios().join("curved.toml");
    let a = run_into(&curved, "a", &["--set", "control.alpha=0.6"]);
    let b = run_into(&edited, "b", &[]);
    let c = run_into(&edited, "c", &[]);
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let curved = scenarios().join("curved.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_ushaptic"))
        .args(["phases", path_str(&curved), "--quiet"])
        .env("USHAPTIC_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("phases.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,phase_rad"));
    assert_eq!(csv.lines().count(), 997);
    for line in csv.lines().skip(1) {
        let phi: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..std::f64::consts::TAU).contains(&phi));
    }
}

#[test]
fn field_map_writes_the_slice() {
    let dir = tempfile::tempdir().unwrap();
    let curved = scenarios().join("curved.toml");
    let o = ushaptic(&[
        "field-map",
        path_str(&curved),
        "-o",
        path_str(dir.path()),
        "--focus",
        "0.005,0,0.2",
        "--set",
        "field_map.resolution=[21, 11]",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x_m,y_m,z_m,abs_p_pa,phase_rad"));
    assert_eq!(csv.lines().count(), 21 * 11 + 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("cells = 231"));

    let o = ushaptic(&["field-map", path_str(&curved), "--focus", "0,0.00508,0"]);
    assert_eq!(o.status.code(), Some(6), "{}", stderr(&o));
}

#[test]
fn solver_failure_keeps_the_partial_trace() {
    // the camera looks away from the device, so tracking fails on tick 0
    let dir = tempfile::tempdir().unwrap();
    let curved = scenarios().join("curved.toml");
    let mut args = vec![
        "run",
        path_str(&curved),
        "-o",
        path_str(dir.path()),
        "--set",
        "simulation.tracking_mode=synthetic_camera",
        "--set",
        "camera.rotation_rpy_rad=[0.0, 0.0, 0.0]",
    ];
    args.extend(FAST);
    let o = ushaptic(&args);
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("tick 0"), "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1);
}

#[test]
fn synthetic_frames_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let tracked = scenarios().join("tracked.toml");
    let mut args = vec!["run", path_str(&tracked), "-o", path_str(dir.path()), "--quiet"];
    args.extend(FAST);
    let o = ushaptic(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let frames = dir.path().join("frames");
    assert!(frames.join("frame_000000.ppm").exists());
    assert!(frames.join("frame_000200.depth").exists());
    let ppm = fs::read(frames.join("frame_000050.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n640 480\n255\n"));
    assert_eq!(fs::metadata(frames.join("frame_000050.depth")).unwrap().len(), 640 * 480 * 4);
}

#[test]
fn validate_reports_counts() {
    let o = ushaptic(&["validate", "--only", "1", "--only", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS  1 "));
    assert!(stdout.ends_with("passed 2/2\n"));
    let o = ushaptic(&["validate", "--only", "11"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = ushaptic(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
}
