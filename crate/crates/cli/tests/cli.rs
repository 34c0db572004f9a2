use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn qgame(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgame"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn file_digest(path: &Path) -> String {
    digest(&std::fs::read(path).unwrap())
}

const DELAY_TWICE: &str = "strategy delay_twice_exit kind=script arena=a4 script=delay_twice_exit\n";

const SMALL: &str = "arena g
vertex a owner=1
vertex b owner=2
vertex c owner=1
edge a b weight=-1
edge a c weight=0
edge b a weight=2
edge b c weight=1
edge c a weight=-1
edge c c weight=0
start a
";

/// Splits a CSV line, honouring double quotes.
fn csv_fields(line: &str) -> Vec<String> {
    let mut fields = vec![String::new()];
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(String::new()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    fields
}

#[test]
fn opposite_against_allzero_sits_at_minus_round() {
    let dir = TempDir::new().unwrap();
    let out = qgame(
        dir.path(),
        &["simulate", "--arena", "zoo:bitarena", "--p1", "opposite", "--p2", "allzero", "--horizon", "60"],
    );
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,from,to,weight,tp,mp,mem1,mem2"));
    let mut seen = 0;
    for line in lines {
        let cols = csv_fields(line);
        let (to, tp) = (cols[2].as_str(), cols[4].as_str());
        if let Some(i) = to.strip_prefix("v[").and_then(|r| r.strip_suffix(']')) {
            assert_eq!(tp, format!("-{i}"), "{line}");
            seen += 1;
        }
    }
    assert!(seen >= 5, "only {seen} round starts in 60 steps");
}

#[test]
fn defeat_then_verify() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("delay_twice_exit.str"), DELAY_TWICE).unwrap();
    let out = qgame(
        dir.path(),
        &["defeat", "--arena", "zoo:a4", "--strategy", "delay_twice_exit.str", "--window", "500", "--out", "cert.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = qgame(dir.path(), &["verify", "cert.json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("\"accepted\": true"));
}

#[test]
fn tampered_certificates_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = qgame(dir.path(), &["defeat", "--arena", "zoo:a4", "--strategy", "sigma_k?k=1", "--out", "cert.json"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("cert.json")).unwrap();

    let reweighted = text.replacen("\"weight\": \"-1\"", "\"weight\": \"-2\"", 1);
    assert_ne!(reweighted, text);
    std::fs::write(dir.path().join("a.json"), reweighted).unwrap();
    assert_eq!(code(&qgame(dir.path(), &["verify", "a.json"])), 1);

    // Same play, claimed against a strategy it is not consistent with.
    let out = qgame(dir.path(), &["verify", "cert.json", "--p1", "sigma_k?k=5"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));

    std::fs::write(dir.path().join("b.json"), &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&qgame(dir.path(), &["verify", "b.json"])), 1);
}

#[test]
fn tiny_window_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let out = qgame(dir.path(), &["defeat", "--arena", "zoo:a4", "--strategy", "random_fm?seed=2", "--window", "2"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synthesized_strategies_verify() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("g.txt"), SMALL).unwrap();
    for (arena, objective) in [
        ("g.txt", "mp:limsup:>=:0"),
        ("g.txt", "tp:limsup:>=:0"),
        ("zoo:bitarena", "tp:limsup:>=:0"),
    ] {
        let out = qgame(
            dir.path(),
            &["synthesize", "--arena", arena, "--objective", objective, "--m-max", "3", "--out", "s.str"],
        );
        assert_eq!(code(&out), 0, "{arena} {objective}: {}", String::from_utf8_lossy(&out.stderr));
        let out = qgame(dir.path(), &["verify", "s.str.cert.json"]);
        assert_eq!(code(&out), 0, "{arena} {objective}: {}", stdout(&out));
        let out = qgame(dir.path(), &["validate", "--arena", arena, "--strategy", "s.str"]);
        assert_eq!(code(&out), 0);
    }
}

#[test]
fn losing_start_is_an_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("g.txt"), SMALL.replace("edge c c weight=0", "edge c c weight=-1")).unwrap();
    let out = qgame(dir.path(), &["synthesize", "--arena", "g.txt", "--objective", "mp:limsup:>=:0"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("winning region"));
}

#[test]
fn exported_truncation_validates() {
    let dir = TempDir::new().unwrap();
    let out = qgame(dir.path(), &["zoo", "export", "zoo:a4", "--depth", "8", "--out", "a4.txt"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&qgame(dir.path(), &["validate", "--arena", "a4.txt"])), 0);
    let again = qgame(dir.path(), &["zoo", "export", "a4.txt"]);
    assert_eq!(stdout(&again).as_bytes(), std::fs::read(dir.path().join("a4.txt")).unwrap());
    // Generated arenas need a depth.
    assert_eq!(code(&qgame(dir.path(), &["zoo", "export", "zoo:a4"])), 1);
}

#[test]
fn errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qgame(dir.path(), &["validate", "--arena", "missing.txt"])), 1);
    assert_eq!(code(&qgame(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&qgame(dir.path(), &["simulate", "--arena", "zoo:nothing", "--p1", "first", "--p2", "first"])), 1);
    std::fs::write(dir.path().join("bad.txt"), "arena x\nvertex a owner=3\nstart a\n").unwrap();
    let out = qgame(dir.path(), &["validate", "--arena", "bad.txt"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // A failed write leaves nothing behind.
    let out = qgame(
        dir.path(),
        &["simulate", "--arena", "zoo:a1", "--p1", "first", "--p2", "first", "--out", "no/such/dir/x.csv"],
    );
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("no").exists());
}

/// Runs `args` in two fresh directories and compares the named artifact
/// (or stdout) byte for byte.
fn same_twice(args: &[&str], artifact: Option<&str>, setup: &dyn Fn(&Path)) -> String {
    let digests: Vec<String> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            setup(dir.path());
            let out = qgame(dir.path(), args);
            assert!(code(&out) == 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            match artifact {
                Some(name) => file_digest(&dir.path().join(name)),
                None => digest(&out.stdout),
            }
        })
        .collect();
    assert_eq!(digests[0], digests[1], "{args:?}");
    digests[0].clone()
}

#[test]
fn every_command_is_deterministic() {
    let none = |_: &Path| {};
    let small = |d: &Path| std::fs::write(d.join("g.txt"), SMALL).unwrap();
    let delay = |d: &Path| std::fs::write(d.join("d.str"), DELAY_TWICE).unwrap();
    let certified = |d: &Path| {
        std::fs::write(d.join("d.str"), DELAY_TWICE).unwrap();
        let out = qgame(d, &["defeat", "--arena", "zoo:a4", "--strategy", "d.str", "--out", "c.json"]);
        assert_eq!(code(&out), 0);
    };
    same_twice(&["zoo", "list"], None, &none);
    same_twice(&["zoo", "export", "zoo:a4guarded", "--depth", "7", "--out", "x.txt"], Some("x.txt"), &none);
    same_twice(&["zoo", "export", "zoo:bitarena", "--format", "dot", "--depth", "9"], None, &none);
    same_twice(&["validate", "--arena", "g.txt"], None, &small);
    same_twice(
        &["simulate", "--arena", "zoo:a4", "--p1", "random_fm?seed=9", "--p2", "first", "--horizon", "300", "--out", "p.csv"],
        Some("p.csv"),
        &none,
    );
    same_twice(&["defeat", "--arena", "zoo:a4", "--strategy", "d.str", "--out", "c.json"], Some("c.json"), &delay);
    same_twice(&["defeat", "--arena", "zoo:a3", "--strategy", "first"], None, &none);
    same_twice(&["verify", "c.json"], None, &certified);
    for objective in ["mp:limsup:>=:0", "tp:limsup:>=:0"] {
        let args = ["synthesize", "--arena", "g.txt", "--objective", objective, "--out", "s.str"];
        same_twice(&args, Some("s.str"), &small);
        same_twice(&args, Some("s.str.cert.json"), &small);
        same_twice(&args, None, &small);
    }
    let one = same_twice(&["bench", "--seed", "5", "--jobs", "1", "--out", "b.tsv"], Some("b.tsv"), &none);
    let four = same_twice(&["bench", "--seed", "5", "--jobs", "4", "--out", "b.tsv"], Some("b.tsv"), &none);
    assert_eq!(one, four, "thread count changes the bench table");
}
