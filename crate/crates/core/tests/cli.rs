use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use pabisim::cli::run_captured;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

/// Fresh path per call; tests run in parallel.
fn scratch(name: &str) -> String {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("pabisim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(format!("{}-{name}", NEXT.fetch_add(1, Ordering::Relaxed))).display().to_string()
}

fn kv(args: &[&str]) -> (i32, Vec<(String, String)>) {
    let mut full = vec!["pabisim", "--format", "kv"];
    full.extend_from_slice(args);
    let (code, out, err) = run_captured(full);
    let fields = out
        .lines()
        .filter_map(|l| l.split_once(": ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect();
    assert!(code == 2 || err.is_empty(), "stderr: {err}");
    (code, fields)
}

fn field<'a>(fields: &'a [(String, String)], key: &str) -> &'a str {
    fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).unwrap_or_else(|| panic!("no `{key}` in {fields:?}"))
}

fn exam1_file() -> String {
    let path = scratch("exam1.pa");
    let (code, _, err) = run_captured(["pabisim", "gen", "corpus", "exam1", "--eps1", "1/5", "--eps2", "1/10", "-o", &path]);
    assert_eq!(code, 0, "{err}");
    path
}

fn clique_file() -> String {
    let path = scratch("clique.pa");
    let (code, _, err) = run_captured(["pabisim", "gen", "clique", &corpus("undirect-graph.txt"), "-o", &path]);
    assert_eq!(code, 0, "{err}");
    path
}

#[test]
fn certificate_defaults_to_its_first_pair() {
    let (code, f) = kv(&["check-cert", &corpus("sim-coarser.pa"), &corpus("sim-coarser.plain.cert")]);
    assert_eq!(code, 0);
    assert_eq!(field(&f, "verdict"), "accepted");
    assert_eq!(field(&f, "semantics"), "plain");
}

#[test]
fn certificate_for_the_wrong_pair_is_rejected() {
    let (code, f) = kv(&[
        "check-cert",
        &corpus("sim-coarser.pa"),
        &corpus("sim-coarser.plain.cert"),
        "--mu",
        "s1:1",
        "--nu",
        "t2:1",
    ]);
    assert_eq!(code, 1);
    assert_eq!(field(&f, "verdict"), "rejected");
}

#[test]
fn distributed_certificate_on_the_composite() {
    let (code, f) = kv(&[
        "check-cert",
        &corpus("non-comp-left.pa"),
        &corpus("non-comp.distributed.cert"),
        "--with",
        &corpus("non-comp-right.pa"),
        "--sync",
        "a,b,c",
    ]);
    assert_eq!(code, 0);
    assert_eq!(field(&f, "semantics"), "distributed");
}

#[test]
fn late_refutation_exits_one() {
    let m = corpus("sim-coarser.pa");
    let (code, f) = kv(&["check", &m, "--mu", "s1:1/2,s2:1/2", "--nu", "t1:1/2,t2:1/2", "--rel", "late", "--depth", "2"]);
    assert_eq!(code, 1);
    assert_eq!(field(&f, "verdict"), "refuted");
    assert!(field(&f, "depth").parse::<usize>().unwrap() <= 2);
    let (code, f) = kv(&["check", &m, "--mu", "s1:1/2,s2:1/2", "--nu", "t1:1/2,t2:1/2", "--rel", "plain", "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(field(&f, "verdict"), "no-violation-up-to-3");
}

#[test]
fn exact_decision_and_partition() {
    let path = scratch("exam1-zero.pa");
    assert_eq!(run_captured(["pabisim", "gen", "corpus", "exam1", "--eps1", "0", "--eps2", "0", "-o", &path]).0, 0);
    let (code, f) = kv(&["check", &path, "--mu", "q:1", "--nu", "q':1"]);
    assert_eq!((code, field(&f, "verdict")), (0, "bisimilar"));
    let (code, f) = kv(&["check", &path, "--rel", "pbisim", "--mu", "q:1", "--nu", "q':1"]);
    assert_eq!((code, field(&f, "verdict")), (1, "separated"));
}

#[test]
fn metrics_on_the_perturbed_example() {
    let m = exam1_file();
    let (_, f) = kv(&["metric", "df", &m, "--mu", "q:1", "--nu", "q':1"]);
    assert_eq!((field(&f, "value"), field(&f, "status")), ("1/20", "exact-fixpoint"));
    let (_, f) = kv(&["metric", "df", &m, "--mu", "q:1", "--nu", "q':1", "--gamma", "1/2"]);
    assert_eq!(field(&f, "value"), "1/80");
    let (_, f) = kv(&["metric", "statedf", &m, "--mu", "q:1", "--nu", "q':1"]);
    assert_eq!(field(&f, "d(r1,r')"), "11/30");
    assert_eq!(field(&f, "lifted"), "19/60");
    let (_, f) = kv(&["logic", "distance-lb", &m, "--mu", "q:1", "--nu", "q':1", "--gamma", "1/2"]);
    assert_eq!((field(&f, "value"), field(&f, "witness")), ("1/80", "<a><a>B{{a}}"));
}

#[test]
fn clique_words_and_equivalence() {
    let c = clique_file();
    let (_, f) = kv(&["classify", &c]);
    assert_eq!(field(&f, "verdict"), "reactive");
    let (_, f) = kv(&["trace", "max-word", &c, "-k", "6"]);
    assert_eq!((field(&f, "value"), field(&f, "word")), ("1/6", "tau a b c tau"));
    let (_, f) = kv(&["verify-word", &c, "--word", "tau a b c tau"]);
    assert_eq!(field(&f, "value"), "1/6");
    let (code, f) = kv(&["equiv", "rabin", &c, &c]);
    assert_eq!((code, field(&f, "verdict")), (0, "equivalent"));
}

#[test]
fn inequivalent_reactive_pair_has_a_word() {
    let c = clique_file();
    let text = std::fs::read_to_string(&c).unwrap();
    // moving acceptance to the start state changes the empty word's value
    let other = scratch("clique-moved.pa");
    let moved = text.replace("state s\n", "state s label acc\n");
    assert_ne!(moved, text, "clique start state line not found");
    std::fs::write(&other, moved).unwrap();
    let (code, f) = kv(&["equiv", "rabin", &c, &other]);
    assert_eq!((code, field(&f, "verdict")), (1, "not-equivalent"));
}

#[test]
fn compose_round_trips_through_the_text_format() {
    let out = scratch("composed.pa");
    let (code, _, err) =
        run_captured(["pabisim", "compose", &corpus("non-comp-left.pa"), &corpus("non-comp-right.pa"), "--sync", "a,b,c", "-o", &out]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("s0|r0"), "{text}");
    let (code, f) = kv(&["check", &out, "--mu", "s0|r0:1", "--nu", "s5|r0:1/2,s6|r0:1/2", "--rel", "plain", "--depth", "4"]);
    assert_eq!((code, field(&f, "verdict")), (1, "refuted"));
}

#[test]
fn trace_witness_for_jan_late() {
    let (code, f) = kv(&[
        "trace",
        "tracedist",
        &corpus("jan-late.pa"),
        "--mu",
        "s1:1/3,s2:1/3,s3:1/3",
        "--nu",
        "t1:1/3,t2:1/3,t3:1/3",
        "-k",
        "2",
    ]);
    assert_eq!(code, 1);
    assert!(f.iter().any(|(_, v)| v.contains("a c: 1/3, a d: 1/3, b d: 1/3")), "{f:?}");
}

#[test]
fn errors_exit_two_with_a_module_tag() {
    let (code, _, err) = run_captured(["pabisim", "classify", "/nonexistent/model.pa"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error [automata]"), "{err}");
    let m = exam1_file();
    let (code, _, err) = run_captured(["pabisim", "metric", "df", &m, "--nu", "q:1", "--gamma", "x"]);
    assert_eq!(code, 2);
    assert!(err.contains("malformed rational"), "{err}");
    let bad = scratch("bad.pa");
    std::fs::write(&bad, "automaton b\nactions a\nstate x\ninit x:1\ntrans x a -> x:1/2\n").unwrap();
    let (code, _, err) = run_captured(["pabisim", "classify", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("line 5"), "{err}");
    let (code, _, _) = run_captured(["pabisim", "no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pabisim");
    let ok = Command::new(bin).args(["check-cert", &corpus("jan-late.pa"), &corpus("jan-late.dagger.cert")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("accepted"));
    let neg = Command::new(bin)
        .args(["check", &corpus("jan-late.pa"), "--rel", "late", "--nu", "t1:1/3,t2:1/3,t3:1/3", "--depth", "1"])
        .output()
        .unwrap();
    assert_eq!(neg.status.code(), Some(1));
    let usage = Command::new(bin).arg("--format").arg("yaml").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
