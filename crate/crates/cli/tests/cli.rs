use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nxcsf(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nxcsf"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "population = 300\nexplore_trials = 40\nexploit_trials = 40\nsample_period = 20\n";

#[test]
fn validate_accepts_the_shipped_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let o = nxcsf(&["validate", p.to_str().unwrap()], &[]);
        assert_eq!(code(&o), 0, "{}: {}", p.display(), stderr(&o));
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn out_of_range_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.conf", "psi = 1.5\n");
    let o = nxcsf(&["validate", &cfg], &[]);
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(msg.contains("psi") && msg.contains("(0, 1]"), "{msg}");
}

#[test]
fn unknown_key_missing_file_and_bad_usage_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.conf", "populaton = 10\n");
    let o = nxcsf(&["validate", &cfg], &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown key populaton"));
    assert_eq!(code(&nxcsf(&["validate", "/no/such/file.conf"], &[])), 1);
    assert_eq!(code(&nxcsf(&["frobnicate"], &[])), 1);
    assert_eq!(code(&nxcsf(&["--help"], &[])), 0);
}

#[test]
fn environment_override_is_applied_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", SMALL);
    let o = nxcsf(&["validate", &cfg], &[("NXCSF_MODE", "tcs")]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("mode tcs"));
    let o = nxcsf(&["validate", &cfg], &[("NXCSF_BETA", "2")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("beta"));
}

#[test]
fn run_writes_per_replicate_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", SMALL);
    let out = dir.path().join("out");
    let o = nxcsf(&["run", &cfg, "--seed", "4", "--replicates", "2", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for i in 0..2 {
        let csv = fs::read_to_string(out.join(format!("replicate_{i}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.starts_with("trial,exploit_moves,"));
        assert!(out.join(format!("replicate_{i}.snapshot")).exists());
    }
    let seeds = fs::read_to_string(out.join("seeds.tsv")).unwrap();
    assert_eq!(seeds.lines().count(), 3);
}

#[test]
fn same_seed_same_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", SMALL);
    let mut files = Vec::new();
    for run in ["x", "y"] {
        let out = dir.path().join(run);
        assert_eq!(code(&nxcsf(&["run", &cfg, "--seed", "9", "--replicates", "1", "--out", out.to_str().unwrap()], &[])), 0);
        files.push(fs::read(out.join("replicate_0.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn trace_needs_temporal_mode_and_writes_logs() {
    let dir = tempfile::tempdir().unwrap();
    let mdp = write(dir.path(), "mdp.conf", SMALL);
    let out = dir.path().join("t");
    let o = nxcsf(&["trace", &mdp, "--replicates", "1", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 1);
    let tcs = write(dir.path(), "tcs.conf", &format!("{SMALL}mode = tcs\n"));
    let o = nxcsf(&["trace", &tcs, "--replicates", "1", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let log = fs::read_to_string(out.join("replicate_0.trace.tsv")).unwrap();
    let mut lines = log.lines();
    assert!(lines.next().unwrap().starts_with("trial\tkind\tformation"));
    assert!(lines.any(|l| l.contains("\tform\t")));
}

#[test]
fn runtime_failure_exits_2_and_names_the_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.conf", &format!("{SMALL}cover_attempts = 1\n"));
    let out = dir.path().join("o");
    let o = nxcsf(&["run", &cfg, "--replicates", "1", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("trial 1"), "{}", stderr(&o));
}

#[test]
fn summarize_identical_groups_gives_t_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", &format!("{SMALL}agent = qlearn\n"));
    let out = dir.path().join("q");
    assert_eq!(code(&nxcsf(&["run", &cfg, "--replicates", "3", "--out", out.to_str().unwrap()], &[])), 0);
    let files: Vec<String> =
        (0..3).map(|i| out.join(format!("replicate_{i}.csv")).to_string_lossy().into_owned()).collect();
    let mut args = vec!["summarize"];
    args.extend(files.iter().map(String::as_str));
    args.push("--against");
    args.extend(files.iter().map(String::as_str));
    let o = nxcsf(&args, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let header: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    let (ti, pi) = (header.iter().position(|h| *h == "t").unwrap(), header.iter().position(|h| *h == "p").unwrap());
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("exploit_moves\t")).unwrap().split('\t').collect();
    assert_eq!(row[ti], "0.0000");
    assert_eq!(row[pi], "1.0000");
}

#[test]
fn summarize_of_missing_file_is_a_runtime_error() {
    assert_eq!(code(&nxcsf(&["summarize", "/no/such.csv"], &[])), 2);
}
