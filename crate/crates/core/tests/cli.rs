use std::path::Path;

use threadlab::cli::run;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("threadlab")
        .chain(args.iter().copied())
        .map(String::from)
        .collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(argv(&[
            "simulate", "--model", "urn", "--alpha", "2", "--k", "10", "--runs", "100", "--out", out
        ])),
        0
    );
    // Unknown subcommand, missing required flag, bad value.
    assert_eq!(run(argv(&["frobnicate"])), 2);
    assert_eq!(
        run(argv(&["simulate", "--model", "urn", "--alpha", "2", "--out", out])),
        2
    );
    assert_eq!(
        run(argv(&[
            "simulate", "--model", "urn", "--alpha", "0.5", "--k", "10", "--out", out
        ])),
        2
    );
    assert_eq!(run(argv(&["train", "--config", "/nonexistent/config.txt"])), 2);
    // Missing input file is a runtime failure.
    assert_eq!(
        run(argv(&[
            "train",
            "--threads",
            "/nonexistent/t.jsonl",
            "--edges",
            "/nonexistent/e.csv",
            "--out",
            out
        ])),
        1
    );
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let args = [
        "make-corpus",
        "--posters",
        "5",
        "--posts-per-poster",
        "4",
        "--alpha",
        "3",
        "--seed",
        "12",
    ];
    let mut a = argv(&args);
    a.extend(["--out".into(), first.display().to_string()]);
    assert_eq!(run(a), 0);

    let config = first.join("config.txt");
    assert!(read(&config).contains("posters=5"));
    let b = argv(&[
        "make-corpus",
        "--config",
        config.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(run(b), 0);
    assert_eq!(read(&first.join("threads.jsonl")), read(&second.join("threads.jsonl")));
    assert_eq!(read(&first.join("edges.csv")), read(&second.join("edges.csv")));
}

#[test]
fn train_then_evaluate_reloads_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let corpus = root.join("corpus");
    assert_eq!(
        run(argv(&[
            "make-corpus",
            "--posters",
            "20",
            "--alphas",
            "1.5,4",
            "--out",
            corpus.to_str().unwrap()
        ])),
        0
    );
    let threads = corpus.join("threads.jsonl");
    let edges = corpus.join("edges.csv");
    let io = [
        "--threads",
        threads.to_str().unwrap(),
        "--edges",
        edges.to_str().unwrap(),
    ];

    let train = root.join("train");
    let mut a = argv(&["train", "--trees", "10", "--out", train.to_str().unwrap()]);
    a.extend(io.map(String::from));
    assert_eq!(run(a), 0);

    let eval = root.join("eval");
    let model = train.join("model.json");
    let mut b = argv(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    b.extend(io.map(String::from));
    assert_eq!(run(b), 0);

    let trained: serde_json::Value = serde_json::from_str(&read(&train.join("metrics.json"))).unwrap();
    let evaluated: serde_json::Value = serde_json::from_str(&read(&eval.join("metrics.json"))).unwrap();
    assert_eq!(trained["bagged-trees"], evaluated["bagged-trees"]);
    assert!(read(&train.join("metrics.csv")).starts_with("method,ACC,AUC,RMSE,APR,CXE\n"));
}
