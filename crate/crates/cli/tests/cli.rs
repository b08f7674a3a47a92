use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dyad_core::env::io::read_population;

const SMALL: &str = r#"
seed = 3
population_size = 12

[calibration]
targets = [0.5]
n_eval = 10
q_learning = { n_trajectories = 100 }

[trial]
algorithms = ["multi_agent_surrogate"]
n_dyads = 2
n_runs = 2

[collaboration]
n_dyads = 2
replicates = 1
sweep_grid = [0.0, 1.0]
sweep_rollouts = 10
"#;

fn dyad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyad")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = dyad(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa, fb);
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"curve_multi_agent_surrogate_vanilla_ste0.5.csv"));
    assert!(names.contains(&"curve_multi_agent_surrogate_vanilla_ste0.5_summed.csv"));
    assert!(names.contains(&"summary.csv"));
    let curve = String::from_utf8(fa.iter().find(|(n, _)| n == "curve_multi_agent_surrogate_vanilla_ste0.5.csv").unwrap().1.clone()).unwrap();
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "dyad_index,mean_improvement,sd,n_runs");
    assert_eq!(lines.len(), 3);
    assert!(curve.ends_with('\n'));
    let m = manifest(&a);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["subcommand"], "run");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["resolved_config"].as_str().unwrap().contains("n_runs = 2"));
}

#[test]
fn seed_and_runs_overrides_reach_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let o = dyad(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "8", "--runs", "3", "--jobs", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["seed"], 8);
    assert!(m["resolved_config"].as_str().unwrap().contains("n_runs = 3"));
    let curve = fs::read_to_string(out.join("curve_multi_agent_surrogate_vanilla_ste0.5.csv")).unwrap();
    assert!(curve.lines().nth(1).unwrap().ends_with(",3"));
}

#[test]
fn missing_config_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let o = dyad(&["run", "--config", tmp.path().join("absent.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn invalid_config_and_unknown_flag_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[trial]\nn_run = 4\n");
    let out = tmp.path().join("o");
    let o = dyad(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let o = dyad(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn existing_manifest_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let args = ["export-population", "--config", &cfg, "--out", out.to_str().unwrap()];
    assert!(dyad(&args).status.success());
    let o = dyad(&args);
    assert_eq!(o.status.code(), Some(5));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(dyad(&forced).status.success());
    let pop = read_population(fs::File::open(out.join("population.csv")).map(std::io::BufReader::new).unwrap()).unwrap();
    assert_eq!(pop.len(), 12);
}

#[test]
fn calibration_non_convergence_has_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("targets = [0.5]", "targets = [50.0]\nmax_iterations = 2");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    let o = dyad(&["calibrate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn calibrate_hits_each_target() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("targets = [0.5]", "targets = [0.15, 0.3, 0.5]").replace("population_size = 12", "population_size = 30");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    let o = dyad(&["calibrate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let beds = m["testbeds"].as_array().unwrap();
    assert_eq!(beds.len(), 3);
    for (bed, target) in beds.iter().zip([0.15, 0.3, 0.5]) {
        assert_eq!(bed["ste_target"], target);
        assert!((bed["ste"].as_f64().unwrap() - target).abs() <= 0.03);
        let name = format!("population_vanilla_ste{target}.csv");
        let f = fs::File::open(out.join(name)).unwrap();
        assert_eq!(read_population(std::io::BufReader::new(f)).unwrap().len(), 30);
    }
}

#[test]
fn collaborate_and_ablate_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[collaboration]", "[ablation]\nvariants = [{ kind = \"no_mediator\" }]\n\n[collaboration]");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("c");
    let o = dyad(&["collaborate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rates = fs::read_to_string(out.join("collaboration.csv")).unwrap();
    assert_eq!(rates.lines().count(), 1 + 2 * 2);
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 2 * 2);
    let out = tmp.path().join("a");
    let o = dyad(&["ablate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("no_mediator,0.5,"));
}
