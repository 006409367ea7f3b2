use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: [&str; 12] = [
    "--set",
    "grid.n_time=30",
    "--set",
    "grid.n_gap=20",
    "--set",
    "grid.n_belief=12",
    "--set",
    "grid.n_control=21",
    "--set",
    "sim.n_paths=500",
    "--set",
    "sim.dt=0.002",
];

fn ashjb(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ashjb"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("ASHJB_THREADS")
        .output()
        .expect("binary runs")
}

fn small(cmd: &str, extra: &[&str]) -> Vec<String> {
    let mut v = vec![cmd.to_string()];
    v.extend(SMALL.iter().map(|s| s.to_string()));
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_small(cmd: &str, extra: &[&str], out: &Path) -> Output {
    let args = small(cmd, extra);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ashjb(&refs, out)
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn boundary_prior_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small("values", &["--set", "model.prior_p0=1"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("prior_p0"));
}

#[test]
fn schema_errors_name_the_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small("band", &["--set", "sim.initial.p0=\"half\""], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sim.initial.p0"), "{}", stderr(&o));
    let o = run_small("band", &["--set", "grid.unknown=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid"), "{}", stderr(&o));
}

#[test]
fn small_run_emits_every_artifact_and_passes_checks() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["dominated", "nondominated"] {
        let out = dir.path().join(preset);
        let o = run_small("run", &["--config", preset], &out);
        assert_eq!(o.status.code(), Some(0), "{preset}: {}", stderr(&o));
        let headers = [
            ("band.csv", "t,W_lower,W_upper"),
            ("boundary.csv", "t,wbar,wunder,v0_upper,v0_lower,v1_upper,v1_lower"),
            ("field.csv", "t,s,p,y,w,z0_star,z1_star,boundary_flag"),
            ("values.csv", "p0,v_c,y0_c,y1_c,v_uc,y0_uc,y1_uc"),
            ("screening.csv", "p0,v_s,y0,y1c,y0c,y1"),
            ("comparison.csv", "p0,v_c,v_s,v_uc,ordering_ok"),
            ("trajectories.csv", "path,t,x,p,y0,y1,w_lower,w_upper,z0,z1,boundary_flag"),
        ];
        for (file, header) in headers {
            let text = fs::read_to_string(out.join(file)).unwrap();
            assert_eq!(text.lines().next(), Some(header), "{file}");
        }
        let s = summary(&out);
        assert_eq!(s["passed"], true);
        assert_eq!(s["checks"]["ordering"], true);
        for key in ["a_lower", "a_upper", "C0", "N0", "C", "C_bar", "C_under"] {
            assert!(s["constants"][key].is_number(), "{key}");
        }
        // band closes at the horizon
        let band = fs::read_to_string(out.join("band.csv")).unwrap();
        assert_eq!(band.lines().last(), Some("2,0,0"));
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_small("run", &["--threads", "1"], &a).status.success());
    assert!(run_small("run", &["--threads", "3"], &b).status.success());
    let mut n = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if Path::new(&name).extension().is_some_and(|e| e == "csv") {
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
            n += 1;
        }
    }
    assert_eq!(n, 7);
}

#[test]
fn single_prior_compare_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small("compare", &["--set", "sweep=[0.5]"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0.5,") && rows[1].ends_with(",1"));
}

#[test]
fn check_only_reuses_the_written_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small("solve", &["--check-only"], dir.path());
    assert_eq!(o.status.code(), Some(3), "missing field must be a failure");

    assert!(run_small("run", &["--set", "emit=[\"field\",\"values\",\"screening\",\"summary\"]"], dir.path())
        .status
        .success());
    let o = run_small("solve", &["--check-only"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let check: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(check["checks"]["ordering"], true);
    assert_eq!(check["checks"]["apriori_sandwich"], true);

    // a corrupted boundary node is caught
    let path = dir.path().join("field.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cols: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    assert_eq!(cols[7], "1");
    cols[4] = "0.5".into();
    lines[1] = cols.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = run_small("solve", &["--check-only"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("boundary_nodes_match"));
}

#[test]
fn bundled_dominated_preset_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let o = ashjb(&["run", "--config", "dominated"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(dir.path());
    assert_eq!(s["checks"]["ordering"], true);
    assert_eq!(s["passed"], true);
    let values = fs::read_to_string(dir.path().join("values.csv")).unwrap();
    assert_eq!(values.lines().count(), 20);
}
