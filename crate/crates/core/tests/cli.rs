use std::path::Path;
use std::process::{Command, Output};

use stackgen::harness::parse_report;

fn stackgen(dir: &Path, threads: usize, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackgen"))
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, threads: usize, args: &[&str]) -> String {
    let out = stackgen(dir, threads, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

fn gen_led(dir: &Path) {
    ok(dir, 1, &["gen", "--dataset", "led24", "--n", "150", "--seed", "3", "--out", "led.csv"]);
}

#[test]
fn gen_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (threads, name) in [(1, "a.csv"), (8, "b.csv")] {
        ok(d, threads, &["gen", "--dataset", "waveform", "--n", "80", "--seed", "5", "--width", "21", "--out", name]);
    }
    assert_eq!(read(d, "a.csv"), read(d, "b.csv"));
    assert_eq!(read(d, "a.schema"), read(d, "b.schema"));
    let text = String::from_utf8(read(d, "a.csv")).unwrap();
    assert_eq!(text.lines().count(), 80);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 22);
}

#[test]
fn compare_reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    let common = ["compare", "--data", "led.csv", "--schema", "led.schema", "--w", "3", "--j", "3", "--seed", "4"];
    let methods = ["--methods", "tree,nb,bestcv,vote,avg,stack:repr=probs,l1=mlr(iii),bag:h=5,base=tree"];
    let mut a = common.to_vec();
    a.extend(methods);
    a.extend(["--report", "a.json"]);
    let mut b = common.to_vec();
    b.extend(methods);
    b.extend(["--report", "b.json"]);
    let table = ok(d, 1, &a);
    ok(d, 8, &b);
    assert_eq!(read(d, "a.json"), read(d, "b.json"));
    assert!(table.contains("error %") && table.contains("weights of"), "{table}");

    let report = parse_report(&String::from_utf8(read(d, "a.json")).unwrap()).unwrap();
    assert_eq!(report.results.len(), 7);
    assert_eq!(report.weights.len(), 1);
    assert!(report.se_count.is_some());
}

#[test]
fn eval_and_trials_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    for (threads, name) in [(1, "e1.json"), (8, "e8.json")] {
        ok(d, threads, &["eval", "--data", "led.csv", "--schema", "led.schema", "--method", "stack", "--w", "3", "--report", name]);
    }
    assert_eq!(read(d, "e1.json"), read(d, "e8.json"));
    for (threads, name) in [(1, "t1.json"), (8, "t8.json")] {
        ok(
            d,
            threads,
            &[
                "trials", "--gen", "waveform:width=21", "--train-n", "60", "--test-n", "200", "--trials", "3", "--method",
                "stack:repr=labels,l1=nb", "--seed", "2", "--report", name,
            ],
        );
    }
    assert_eq!(read(d, "t1.json"), read(d, "t8.json"));
    let report = parse_report(&String::from_utf8(read(d, "t1.json")).unwrap()).unwrap();
    assert_eq!(report.results[0].runs, 3);
    assert_eq!(report.dataset.test_instances, Some(200));
}

#[test]
fn table_format_is_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    let stdout = ok(
        d,
        2,
        &["eval", "--data", "led.csv", "--schema", "led.schema", "--method", "nb", "--w", "3", "--report", "t.txt", "--format", "table"],
    );
    assert_eq!(String::from_utf8(read(d, "t.txt")).unwrap(), stdout);
}

#[test]
fn rerun_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    ok(
        d,
        4,
        &[
            "compare", "--data", "led.csv", "--schema", "led.schema", "--methods", "knn,stack:repr=probs,l1=mlr(full)", "--w",
            "2", "--j", "4", "--seed", "9", "--learners", "tree,nb", "--report", "first.json",
        ],
    );
    ok(d, 1, &["rerun", "--from", "first.json", "--report", "second.json"]);
    assert_eq!(read(d, "first.json"), read(d, "second.json"));
}

#[test]
fn stack_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    std::fs::write(
        d.join("stack.toml"),
        "version = 1\nmethod = \"stack:repr=probs,l1=mlr(iii)\"\nlearners = [\"tree\", \"nb\", \"knn:p=3\"]\nfolds = 5\nseed = 1\n",
    )
    .unwrap();
    for (threads, model, preds) in [(1, "m1.json", "p1.txt"), (8, "m8.json", "p8.txt")] {
        ok(d, threads, &["stack", "--data", "led.csv", "--schema", "led.schema", "--config", "stack.toml", "--out", model]);
        let stdout = ok(d, threads, &["predict", "--model", model, "--data", "led.csv", "--out", preds]);
        assert!(stdout.contains("accuracy on 150 labeled rows"), "{stdout}");
    }
    assert_eq!(read(d, "m1.json"), read(d, "m8.json"));
    assert_eq!(read(d, "p1.txt"), read(d, "p8.txt"));
    let preds = String::from_utf8(read(d, "p1.txt")).unwrap();
    assert_eq!(preds.lines().count(), 150);
    assert!(preds.lines().all(|l| l.len() == 1 && l.chars().all(|c| c.is_ascii_digit())), "{preds}");
}

#[test]
fn bad_input_exits_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_led(d);
    for args in [
        vec!["eval", "--data", "led.csv", "--schema", "led.schema", "--method", "stack:l1=svm", "--report", "x.json"],
        vec!["eval", "--data", "led.csv", "--schema", "led.schema", "--method", "tree", "--j", "1", "--report", "x.json"],
        vec!["eval", "--data", "missing.csv", "--schema", "led.schema", "--method", "tree", "--report", "x.json"],
        vec!["gen", "--dataset", "waveform", "--n", "10", "--width", "30", "--out", "w.csv"],
    ] {
        let out = stackgen(d, 1, &args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "), "{args:?}");
    }
    std::fs::write(d.join("bad.toml"), "version = 2\n").unwrap();
    let out = stackgen(d, 1, &["stack", "--data", "led.csv", "--schema", "led.schema", "--config", "bad.toml", "--out", "m.json"]);
    assert!(!out.status.success());
    assert!(!d.join("x.json").exists() && !d.join("m.json").exists());
}
