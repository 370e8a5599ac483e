use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polycond::conditioning::{MeasureReport, MEASURE_CSV_HEADER};
use polycond::solvers::wolfe_mnp;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polycond"));
    c.env_remove("POLYCOND_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn polycond")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
}

fn floats(s: &str) -> Vec<f64> {
    s.split(',').map(|v| v.parse().unwrap()).collect()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn segment_min_norm_point() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "seg.txt", "0 1\n1 0\n");
    let o = run(&["solve", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(field(&out, "converged"), "true");
    for v in floats(field(&out, "x")) {
        assert!((v - 0.5).abs() < 1e-12);
    }
    assert!((field(&out, "objective").parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("# variant=wolfe"), "{err}");
}

#[test]
fn solve_matches_library_wolfe() {
    let pts = [
        [1.0, 2.0, 0.5],
        [2.0, -1.0, 1.5],
        [0.5, 0.5, 2.0],
        [3.0, 1.0, 1.0],
        [1.5, -0.5, 0.8],
        [2.5, 2.5, 2.5],
    ];
    let text: String = pts
        .iter()
        .map(|p| format!("{} {} {}\n", p[0], p[1], p[2]))
        .collect();
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "six.txt", &text);
    let o = run(&["solve", f.to_str().unwrap(), "--tol", "1e-12"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lib = wolfe_mnp(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>(), 1e-12).unwrap();
    let x = floats(field(&out, "x"));
    for (a, b) in x.iter().zip(&lib.x) {
        assert!((a - b).abs() < 1e-12, "{x:?} vs {:?}", lib.x);
    }
    assert!(field(&out, "residual").parse::<f64>().unwrap() < 1e-10);
}

#[test]
fn shifted_target_and_fw_variants_agree() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "tri.txt", "0 0\n4 0\n0 4\n");
    // Projection of (3, 3) onto the triangle is (2, 2) on the hypotenuse.
    for v in ["wolfe", "away", "pairwise"] {
        let o = run(&["solve", f.to_str().unwrap(), "--target", "3,3", "--variant", v]);
        assert_eq!(code(&o), 0, "{v}");
        let x = floats(field(&stdout(&o), "x"));
        assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] - 2.0).abs() < 1e-5, "{v}: {x:?}");
    }
    let o = run(&["solve", f.to_str().unwrap(), "--target", "-1,0.5", "--variant", "pairwise"]);
    assert_eq!(code(&o), 0);
    let x = floats(field(&stdout(&o), "x"));
    assert!(x[0].abs() < 1e-6 && (x[1] - 0.5).abs() < 1e-6, "{x:?}");
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "tri.txt", "0 0\n4 0\n0 4\n");
    let p = f.to_str().unwrap();
    // Vanilla FW zigzags toward an interior optimum and cannot reach 1e-12
    // in five steps.
    let o = run(&["solve", p, "--target", "1,1", "--variant", "vanilla", "--max-iter", "5", "--tol", "1e-12"]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&stdout(&o), "converged"), "false");
    assert_eq!(code(&run(&["solve", p, "--q-diag", "1,2"])), 1);
    assert_eq!(code(&run(&["solve", p, "--target", "1,2,3"])), 1);
    assert_eq!(code(&run(&["solve", p, "--variant", "newton"])), 1);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&run(&["solve", missing.to_str().unwrap()])), 1);
    let bad = write(dir.path(), "bad.txt", "0 0\n1 x\n");
    assert_eq!(code(&run(&["solve", bad.to_str().unwrap()])), 1);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["solve", "--help"])), 0);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn cube_measures() {
    let o = run(&["cond", "--cube", "4"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(MEASURE_CSV_HEADER));
    let r = MeasureReport::from_csv_row(lines.next().unwrap()).unwrap();
    assert_eq!(r.phi, Some(0.5));
    assert_eq!(r.vf, Some(1.0));
    assert_eq!(r.width, Some(1.0));
    assert_eq!(r.diam, 2.0);
}

#[test]
fn simplex_note_and_csv_file() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "tri.txt", "0 0\n1 0\n0 1\n");
    let csv = dir.path().join("m.csv");
    let o = run(&["cond", f.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("note:") && err.contains("simplex"), "{err}");
    let text = fs::read_to_string(&csv).unwrap();
    let row = text.lines().nth(1).unwrap();
    let r = MeasureReport::from_csv_row(row).unwrap();
    assert!(r.simplex);
    assert_eq!(r.to_csv_row(), row);
    // Right isosceles triangle: the shortest altitude is 1/sqrt(2).
    assert!((r.width.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.minwidth, r.width);
}

#[test]
fn cond_input_and_guard_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["cond"])), 1);
    assert_eq!(code(&run(&["cond", "--cube", "3", "--measures", "area"])), 1);
    let f = write(dir.path(), "pts.txt", "0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1.1\n0.9 0.2 0.7\n");
    let o = run(&["cond", f.to_str().unwrap(), "--measures", "phi", "--face-cap", "3"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    write(dir, name, body)
}

#[test]
fn experiment_writes_reproducible_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "ss.cfg",
        "experiment = smoothed_simplex\nd_min = 4\nd_max = 4\ntrials = 10\n",
    );
    let mut outputs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "3")] {
        let prefix = dir.path().join(tag);
        let o = run(&[
            "experiment",
            cfg.to_str().unwrap(),
            "--jobs",
            jobs,
            "--output",
            prefix.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let trials = data_lines(&dir.path().join(format!("{tag}.trials.csv")));
        assert_eq!(trials.len(), 11);
        assert!(dir.path().join(format!("{tag}.summary.txt")).exists());
        outputs.push((trials, data_lines(&dir.path().join(format!("{tag}.summary.csv")))));
    }
    assert_eq!(outputs[0], outputs[1]);
    // Seed precedence: flag over environment over default.
    let prefix = dir.path().join("env");
    let o = bin()
        .args(["experiment", cfg.to_str().unwrap(), "--output", prefix.to_str().unwrap()])
        .env("POLYCOND_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let env_rows = data_lines(&dir.path().join("env.trials.csv"));
    assert_ne!(env_rows, outputs[0].0);
    let prefix = dir.path().join("flag");
    let o = bin()
        .args(["experiment", cfg.to_str().unwrap(), "--seed", "7", "--output", prefix.to_str().unwrap()])
        .env("POLYCOND_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(data_lines(&dir.path().join("flag.trials.csv")), env_rows);
}

#[test]
fn sigma_decay_slope_is_negative() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "sd.cfg",
        "experiment = sigma_decay\nd_min = 4\nd_max = 6\ntrials = 20\n",
    );
    let prefix = dir.path().join("sd");
    let o = run(&["experiment", cfg.to_str().unwrap(), "--output", prefix.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let slope: f64 = data_lines(&dir.path().join("sd.summary.csv"))
        .iter()
        .find_map(|l| l.strip_prefix("slope,NA,min_sigma,median.slope,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope < 0.0, "{slope}");
}

#[test]
fn experiment_input_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "x.cfg", "experiment = nonsense\n");
    let o = run(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("smoothed_simplex") && err.contains("stats_toolkit"), "{err}");
    let cfg = config(dir.path(), "y.cfg", "experiment = chain\ncolour = blue\n");
    assert_eq!(code(&run(&["experiment", cfg.to_str().unwrap()])), 1);
    let cfg = config(dir.path(), "z.cfg", "experiment = chain\n");
    let o = bin()
        .args(["experiment", cfg.to_str().unwrap()])
        .env("POLYCOND_SEED", "-3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn report_reproduces_and_merges() {
    let dir = TempDir::new().unwrap();
    let full = config(
        dir.path(),
        "full.cfg",
        "experiment = vf_decay\nd_min = 2\nd_max = 3\ntrials = 6\n",
    );
    let o = run(&["experiment", full.to_str().unwrap(), "--output", dir.path().join("full").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep = dir.path().join("rep");
    let full_csv = dir.path().join("full.trials.csv");
    assert_eq!(code(&run(&["report", full_csv.to_str().unwrap(), "--out-dir", rep.to_str().unwrap()])), 0);
    assert_eq!(data_lines(&rep.join("summary.csv")), data_lines(&dir.path().join("full.summary.csv")));
    let dat = fs::read_to_string(rep.join("vf_median.dat")).unwrap();
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 2);

    // Two shards of three trials each reassemble the full run.
    let mut shards = Vec::new();
    for (i, offset) in [0, 3].into_iter().enumerate() {
        let cfg = config(
            dir.path(),
            &format!("s{i}.cfg"),
            &format!("experiment = vf_decay\nd_min = 2\nd_max = 3\ntrials = 3\ntrial_offset = {offset}\n"),
        );
        let prefix = dir.path().join(format!("s{i}"));
        assert_eq!(code(&run(&["experiment", cfg.to_str().unwrap(), "--output", prefix.to_str().unwrap()])), 0);
        shards.push(dir.path().join(format!("s{i}.trials.csv")));
    }
    let merged = dir.path().join("merged");
    let o = run(&[
        "report",
        shards[1].to_str().unwrap(),
        shards[0].to_str().unwrap(),
        "--out-dir",
        merged.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(data_lines(&merged.join("summary.csv")), data_lines(&dir.path().join("full.summary.csv")));

    // A single trial: every quantile is the value itself.
    let one = config(dir.path(), "one.cfg", "experiment = vf_decay\nd_min = 3\nd_max = 3\ntrials = 1\n");
    assert_eq!(code(&run(&["experiment", one.to_str().unwrap(), "--output", dir.path().join("one").to_str().unwrap()])), 0);
    let single = dir.path().join("single");
    let one_csv = dir.path().join("one.trials.csv");
    assert_eq!(code(&run(&["report", one_csv.to_str().unwrap(), "--out-dir", single.to_str().unwrap()])), 0);
    let rows = data_lines(&single.join("summary.csv"));
    let vals: Vec<&str> = rows
        .iter()
        .filter(|l| l.starts_with("group,3,vf,") && !l.contains(",count,"))
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(vals.len(), 6);
    assert!(vals.iter().all(|v| *v == vals[0]));
}

#[test]
fn report_rejects_mismatched_shards() {
    let dir = TempDir::new().unwrap();
    let a = config(dir.path(), "a.cfg", "experiment = vf_decay\nd_min = 2\nd_max = 2\ntrials = 2\n");
    let b = config(dir.path(), "b.cfg", "experiment = chain\nd_min = 2\nd_max = 2\ntrials = 2\n");
    for (cfg, tag) in [(&a, "a"), (&b, "b")] {
        let o = run(&["experiment", cfg.to_str().unwrap(), "--output", dir.path().join(tag).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&[
        "report",
        dir.path().join("a.trials.csv").to_str().unwrap(),
        dir.path().join("b.trials.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let bad = write(dir.path(), "bad.csv", "trial,d\n1,2\n");
    assert_eq!(code(&run(&["report", bad.to_str().unwrap()])), 1);
}
