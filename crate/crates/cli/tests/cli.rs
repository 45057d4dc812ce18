use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const EXAMPLE: &str = "\
rule: borda
other: b p a c
team:
p c a b
p b a c
b p a c
b a c p
";

fn manego(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manego"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn instance_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn swf_prints_scores_and_order() {
    let f = instance_file(EXAMPLE);
    let out = manego(&["swf", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "scores: b=8 p=8 a=5 c=3\norder: b p a c\n");
}

#[test]
fn swf_rule_override() {
    let f = instance_file(EXAMPLE);
    let out = manego(&["swf", "--rule", "plurality", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).starts_with("scores: b=2 p=2 a=0 c=0\n"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn negotiate_prints_spe_and_rc() {
    let f = instance_file(&EXAMPLE.replace("other: b p a c", "other: p a b c"));
    let out = manego(&["negotiate", "--initiator", "other", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("spe(other): "), "{text}");
    assert!(text.contains("rc j=1: {}\n"), "{text}");
    assert!(text.contains("rc j=2: {p}\n"), "{text}");
    assert!(text.ends_with("rc: j=2 p\n"), "{text}");
}

#[test]
fn manipulate_example_one() {
    let f = instance_file(EXAMPLE);
    let out = manego(&[
        "manipulate",
        "--mode",
        "constructive",
        "--target",
        "p",
        "--k",
        "1",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("decision: yes\n"), "{text}");
    assert!(text.contains("vote: a p c b\n"), "{text}");
    assert!(text.contains("scores: p=10 a=8 b=8 c=4\n"), "{text}");
    assert!(text.contains("spe: team=p other=p\n"), "{text}");
}

#[test]
fn manipulate_trace_and_negative_exit() {
    let f = instance_file(EXAMPLE);
    let path = f.path().to_str().unwrap();
    let out = manego(&["manipulate", "--mode", "constructive", "--target", "p", "--trace", path]);
    let text = stdout(&out);
    assert!(text.contains("iter 1 stage 1: vote = p c a b"), "{text}");

    let out = manego(&["manipulate", "--mode", "constructive", "--target", "c", path]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "decision: no\n");
}

#[test]
fn oracle_agrees_on_example() {
    let f = instance_file(EXAMPLE);
    let out = manego(&[
        "oracle",
        "--compare",
        "--mode",
        "constructive",
        "--target",
        "p",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("estimate: 24 vote multisets\n"), "{text}");
    assert!(text.contains("oracle: yes\n"), "{text}");
    assert!(text.contains("agree: true\n"), "{text}");
}

#[test]
fn oracle_refusal_is_a_usage_error() {
    let f = instance_file(EXAMPLE);
    let out = manego(&[
        "oracle",
        "--mode",
        "constructive",
        "--target",
        "p",
        "--k",
        "3",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2600"));

    let out = manego(&[
        "oracle",
        "--mode",
        "constructive",
        "--target",
        "p",
        "--k",
        "3",
        "--max-manipulators",
        "3",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn generate_is_deterministic() {
    let args = ["generate", "--seed", "11", "--count", "3", "--m", "5", "--n", "2"];
    let a = manego(&args);
    let b = manego(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.matches("rule: borda").count(), 3);
    assert!(text.contains("# stream digest: "));
}

#[test]
fn experiment_reports_agreement() {
    let out = manego(&[
        "experiment",
        "--seed",
        "3",
        "--count",
        "20",
        "--m",
        "4",
        "--n",
        "3",
        "--rule",
        "approval:2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.starts_with("index,digest,mode,target,k,solver,oracle,agree,"),
        "{text}"
    );
    assert!(text.contains("# instances: 20\n"), "{text}");
    assert!(text.contains("# disagreements: 0\n"), "{text}");
}

#[test]
fn usage_and_parse_errors_exit_above_two() {
    assert_eq!(manego(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(manego(&["swf"]).status.code(), Some(3));
    assert_eq!(manego(&["swf", "/nonexistent/instance"]).status.code(), Some(3));
    let f = instance_file(&EXAMPLE.replace("b a c p", "b a c"));
    let out = manego(&["swf", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 7"));
    assert_eq!(manego(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_disagreement_exits_two_with_instance() {
    // a destructive instance the H-set search misses: the oracle keeps the
    // target on top of the team order and still blocks it
    let text = "\
rule: borda
other: c5 c3 c1 c4 c0 c2
team:
c5 c3 c4 c0 c1 c2
c1 c0 c4 c2 c3 c5
c1 c2 c0 c4 c3 c5
";
    let f = instance_file(text);
    let out = manego(&[
        "oracle",
        "--compare",
        "--mode",
        "destructive",
        "--target",
        "c1",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let printed = stdout(&out);
    assert!(printed.contains("oracle: yes\n"), "{printed}");
    assert!(printed.contains("agree: false\n"), "{printed}");
    assert!(printed.ends_with(text), "{printed}");
}
