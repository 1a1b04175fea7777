use std::path::Path;
use std::process::{Command, Output};

fn dnafec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnafec")).args(args).env_remove("DNAFEC_THREADS").output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const BERNOULLI: &str = r#"{
  "experiment": { "kind": "bernoulli", "p": 0.1 },
  "sweep": { "name": "p", "values": [0.05, 0.2] },
  "trials": 300,
  "master_seed": 7
}
"#;

#[test]
fn simulate_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, BERNOULLI).unwrap();
    let a = dnafec(&["simulate", "--config", p(&cfg), "--seed", "42"]);
    let b = dnafec(&["simulate", "--config", p(&cfg), "--seed", "42", "--threads", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains(",42,"));
    let c = dnafec(&["simulate", "--config", p(&cfg), "--seed", "43"]);
    assert_ne!(text.as_bytes(), &c.stdout[..]);
}

#[test]
fn simulate_single_value_matches_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, BERNOULLI).unwrap();
    let all = String::from_utf8(dnafec(&["simulate", "--config", p(&cfg)]).stdout).unwrap();
    let one = String::from_utf8(dnafec(&["simulate", "--config", p(&cfg), "--value", "0.2"]).stdout).unwrap();
    assert_eq!(one.lines().nth(1), all.lines().nth(2));
    assert_eq!(dnafec(&["simulate", "--config", p(&cfg), "--value", "0.3"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("r.csv");
    std::fs::write(&cfg, BERNOULLI).unwrap();
    assert!(dnafec(&["sweep", "--config", p(&cfg), "--out", p(&out)]).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(dnafec(&["sweep", "--config", p(&cfg), "--out", p(&out)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let changed = dnafec(&["sweep", "--config", p(&cfg), "--out", p(&out), "--seed", "8"]);
    assert_eq!(changed.status.code(), Some(2));
    let inspect = dnafec(&["inspect", p(&out)]);
    assert!(String::from_utf8(inspect.stdout).unwrap().starts_with("points: 2"));
}

#[test]
fn rs_rs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.bin");
    let fasta = dir.path().join("oligos.fasta");
    let back = dir.path().join("back.bin");
    let data: Vec<u8> = (0..3000u32).map(|i| (i * 7 + i / 13) as u8).collect();
    std::fs::write(&input, &data).unwrap();
    let enc = dnafec(&["encode", "--pipeline", "rs_rs", "--in", p(&input), "--out", p(&fasta)]);
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    assert!(dir.path().join("oligos.fasta.manifest.json").exists());
    let dec = dnafec(&["decode", "--in", p(&fasta), "--out", p(&back)]);
    assert!(dec.status.success(), "{}", String::from_utf8_lossy(&dec.stderr));
    assert_eq!(std::fs::read(&back).unwrap(), data);

    let stats = String::from_utf8(dnafec(&["inspect", p(&fasta)]).stdout).unwrap();
    assert!(stats.starts_with("oligos: "));
}

#[test]
fn decode_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.bin");
    let fasta = dir.path().join("oligos.fasta");
    std::fs::write(&input, vec![0x5au8; 2000]).unwrap();
    assert!(dnafec(&["encode", "--pipeline", "rs_rs", "--in", p(&input), "--out", p(&fasta)]).status.success());
    let text = std::fs::read_to_string(&fasta).unwrap();
    let kept: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    std::fs::write(&fasta, kept).unwrap();
    let dec = dnafec(&["decode", "--in", p(&fasta), "--out", p(&dir.path().join("x"))]);
    assert_eq!(dec.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, BERNOULLI.replace("\"trials\": 300", "\"trials\": \"many\"")).unwrap();
    let out = dnafec(&["simulate", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4") && err.contains("trials"), "{err}");

    std::fs::write(&cfg, BERNOULLI.replace("[0.05, 0.2]", "[0.2, 0.05]")).unwrap();
    assert_eq!(dnafec(&["simulate", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let out = dnafec(&["simulate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
    assert_eq!(dnafec(&["encode", "--pipeline", "nope", "--in", "x", "--out", "y"]).status.code(), Some(2));
    assert_eq!(dnafec(&[]).status.code(), Some(2));
}
