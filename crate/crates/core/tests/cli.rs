use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coop-relay"));
    c.env_remove("COOP_RELAY_SEED");
    c
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const TOPOLOGY: &str = "\
# two sources, three relays
bs 50 50
s 10 10 10
s 90 80 10
r 30 30 10
r 70 60 10
r 20 80 10
";

const SMALL_RUN: &str = "\
sources = 2
sweep_values = [3, 4]
topologies = 3
initial_energy = 0.1
update_interval = 20
";

#[test]
fn assign_prints_one_line_per_source() {
    let dir = TempDir::new().unwrap();
    let topo = dir.path().join("net.topo");
    fs::write(&topo, TOPOLOGY).unwrap();
    for strategy in ["GLM-BM", "glm-mbm", "GLM_SRS", "MWTP-MWM", "MWTP-SRS"] {
        let out = stdout(&bin().arg("assign").arg(&topo).args(["--strategy", strategy]).output().unwrap());
        let pairs: Vec<&str> = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("source")).collect();
        assert_eq!(pairs.len(), 2, "{out}");
        let relays: Vec<&str> = pairs.iter().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
        assert_ne!(relays[0], relays[1]);
    }
}

#[test]
fn assign_json_is_machine_readable() {
    let dir = TempDir::new().unwrap();
    let topo = dir.path().join("net.topo");
    fs::write(&topo, TOPOLOGY).unwrap();
    let out = stdout(&bin().arg("assign").arg(&topo).args(["--json", "--ser", "1e-5"]).output().unwrap());
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
    assert_eq!(v["certified"], serde_json::Value::Bool(true));
    assert!(v["pairs"][0]["ps"].as_f64().unwrap() > 0.0);
}

#[test]
fn assign_reports_bad_lines() {
    let dir = TempDir::new().unwrap();
    let topo = dir.path().join("bad.topo");
    fs::write(&topo, "bs 50 50\ns 10 10\n").unwrap();
    let out = bin().arg("assign").arg(&topo).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.topo") && err.contains('2'), "{err}");
}

#[test]
fn simulate_is_reproducible_and_seeded() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let run = |extra: &[&str], env_seed: Option<&str>| {
        let mut c = bin();
        c.arg("simulate").arg("--config").arg(&cfg).args(extra);
        if let Some(s) = env_seed {
            c.env("COOP_RELAY_SEED", s);
        }
        stdout(&c.output().unwrap())
    };
    let a = run(&[], None);
    assert_eq!(a, run(&[], None));
    assert!(a.lines().next().unwrap().starts_with("# prng:"));
    assert_eq!(a.lines().nth(1).unwrap(), "strategy,sweep_name,sweep_value,mean_lifetime_packets,mean_energy_per_packet_j,mean_wasted_energy_j,n_topologies,seed");
    // 5 strategies x 2 relay counts
    assert_eq!(a.lines().count(), 2 + 10);

    let env = run(&[], Some("77"));
    assert!(env.lines().skip(2).all(|l| l.ends_with(",3,77")), "{env}");
    let flag = run(&["--seed", "5"], Some("77"));
    assert!(flag.lines().skip(2).all(|l| l.ends_with(",3,5")), "{flag}");
    assert_ne!(env, flag);
}

#[test]
fn simulate_writes_files_and_timeline() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let csv = dir.path().join("out.csv");
    let tl = dir.path().join("timeline.csv");
    let o = bin()
        .args(["sweep", "--fig", "3", "--topologies", "2", "--config"])
        .arg(&cfg)
        .arg("-o")
        .arg(&csv)
        .arg("--timeline")
        .arg(&tl)
        .output()
        .unwrap();
    stdout(&o);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.contains("update_interval,60,") && text.contains("update_interval,30000,"), "{text}");
    let timeline = fs::read_to_string(&tl).unwrap();
    assert!(timeline.starts_with("strategy,sweep_value,packets_delivered,source,relay,ps_w,pr_w"));
    assert!(timeline.lines().count() > 1);
}

#[test]
fn rejects_unknown_figures_and_keys() {
    assert!(!bin().args(["simulate", "--fig", "5"]).output().unwrap().status.success());
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "relay_count = 3\n").unwrap();
    assert!(!bin().arg("simulate").arg("--config").arg(&cfg).output().unwrap().status.success());
}

#[test]
fn oracle_cross_check_passes() {
    let out = stdout(&bin().args(["oracle", "--sources", "3", "--relays", "5", "--instances", "20"]).output().unwrap());
    assert!(out.contains("agrees 20/20"), "{out}");
}
