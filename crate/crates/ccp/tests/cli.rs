use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ccp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example1.json")
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| panic!("no {key:?} in {text}"))
}

#[test]
fn solves_the_example() {
    let o = ccp(&["solve", example().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "status").as_str(), "optimal");
    let obj: f64 = field(&text, "objective").parse().unwrap();
    assert!((obj - 59.0).abs() < 1e-6);
}

#[test]
fn every_search_option_agrees() {
    let file = example();
    for b in ["classic", "dominance"] {
        for p in ["off", "approx", "exact"] {
            for c in ["off", "mixing"] {
                let o = ccp(&[
                    "solve",
                    file.to_str().unwrap(),
                    "--branching",
                    b,
                    "--propagation",
                    p,
                    "--cuts",
                    c,
                    "--node-select",
                    "dfs",
                    "--branch-rule",
                    "pseudocost",
                ]);
                assert_eq!(o.status.code(), Some(0), "{b} {p} {c}");
                let obj: f64 = field(&stdout(&o), "objective").parse().unwrap();
                assert!((obj - 59.0).abs() < 1e-6, "{b} {p} {c}: {obj}");
            }
        }
    }
}

#[test]
fn oracle_matches_solver() {
    let o = ccp(&["oracle", example().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let obj: f64 = field(&stdout(&o), "objective").parse().unwrap();
    assert!((obj - 59.0).abs() < 1e-6);
}

#[test]
fn replayed_trees_shrink() {
    let counts: Vec<usize> = ["1", "2", "3"]
        .iter()
        .map(|f| {
            let o = ccp(&["solve", example().to_str().unwrap(), "--replay-figure", f]);
            assert_eq!(o.status.code(), Some(0));
            field(&stdout(&o), "nodes").parse().unwrap()
        })
        .collect();
    assert!(counts[0] > counts[1] && counts[1] > counts[2], "{counts:?}");
    assert_eq!(ccp(&["solve", example().to_str().unwrap(), "--replay-figure", "4"]).status.code(), Some(10));
}

#[test]
fn input_errors_exit_10() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(ccp(&["solve", missing.to_str().unwrap()]).status.code(), Some(10));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"name\": 3}").unwrap();
    assert_eq!(ccp(&["solve", bad.to_str().unwrap()]).status.code(), Some(10));
    assert_eq!(ccp(&["oracle", bad.to_str().unwrap()]).status.code(), Some(10));
    assert_eq!(
        ccp(&["solve", example().to_str().unwrap(), "--branching", "random"]).status.code(),
        Some(10)
    );
    assert_eq!(ccp(&["solve", example().to_str().unwrap(), "--time-limit", "-1"]).status.code(), Some(10));
    assert_eq!(ccp(&["frobnicate"]).status.code(), Some(10));
}

#[test]
fn node_limit_exits_2() {
    let o = ccp(&[
        "solve",
        example().to_str().unwrap(),
        "--branching",
        "classic",
        "--propagation",
        "off",
        "--node-limit",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(field(&stdout(&o), "status").as_str(), "node-limit");
}

#[test]
fn infeasible_exits_3() {
    // both scenarios must be covered but x is capped below them
    let doc = r#"{"name":"tight","d":1,"m":1,"n":2,"c":[1],"T":[[1]],"polyX":[],
        "bounds":{"lower":[0],"upper":[1]},"scenarios":[[5],[6]],
        "probs":[{"num":1,"den":2},{"num":1,"den":2}],"epsilon":{"num":1,"den":4}}"#;
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tight.json");
    fs::write(&file, doc).unwrap();
    let o = ccp(&["solve", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(ccp(&["oracle", file.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    for (family, extra) in [("ccrp", vec!["--resources", "3", "--services", "4"]), ("ccmpp", vec![]), ("ccls", vec!["--periods", "5"])] {
        let mut outputs = Vec::new();
        for (name, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
            let file = path(&format!("{family}-{name}.json"));
            let mut args = vec!["gen", family, "--n", "30", "--eps", "1/10", "--seed", seed];
            args.extend(&extra);
            args.extend(["-o", file.to_str().unwrap()]);
            assert_eq!(ccp(&args).status.code(), Some(0), "{family}");
            outputs.push(fs::read_to_string(&file).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{family}");
        assert_ne!(outputs[0], outputs[2], "{family}");
        assert!(outputs[0].contains("\"n\": 30"));
    }
}

#[test]
fn generation_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let out = out.to_str().unwrap();
    assert_eq!(ccp(&["gen", "ccls", "--n", "10", "--eps", "1/10", "--resources", "2", "-o", out]).status.code(), Some(10));
    assert_eq!(ccp(&["gen", "ccls", "--n", "10", "--eps", "0.1", "-o", out]).status.code(), Some(10));
    assert_eq!(ccp(&["gen", "ccrp", "--n", "10", "--eps", "3/2", "-o", out]).status.code(), Some(10));
    assert_eq!(ccp(&["gen", "ccmpp", "--n", "0", "--eps", "1/10", "-o", out]).status.code(), Some(10));
}

#[test]
fn trace_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let lp = dir.path().join("root.mps");
    let dom = dir.path().join("dom.txt");
    let o = ccp(&[
        "solve",
        example().to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--dump-lp",
        lp.to_str().unwrap(),
        "--dump-dominance",
        dom.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let trace = fs::read_to_string(trace).unwrap();
    assert!(trace.lines().any(|l| l.starts_with("node 0 parent - branch -")));
    assert!(trace.lines().any(|l| l.starts_with("prop ") && l.contains("mode approx")));
    let lp = fs::read_to_string(lp).unwrap();
    assert!(lp.starts_with("NAME          node0"));
    assert!(lp.trim_end().ends_with("ENDATA"));
    let dom = fs::read_to_string(dom).unwrap();
    assert_eq!(dom.lines().take(3).collect::<Vec<_>>(), ["1 -> 0", "3 -> 4", "5 -> 6"]);
    assert!(dom.contains("%DP 14.29"));
}

#[test]
fn bench_writes_rows_and_means() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let file = dir.path().join(format!("ccls-{seed}.json"));
        let args = ["gen", "ccls", "--n", "20", "--eps", "1/10", "--seed", seed, "--periods", "4", "-o", file.to_str().unwrap()];
        assert_eq!(ccp(&args).status.code(), Some(0));
    }
    let csv = tempfile::NamedTempFile::new().unwrap();
    let o = ccp(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--configs",
        "classic,dom+approx",
        "--out",
        csv.path().to_str().unwrap(),
        "--node-limit",
        "5000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(csv.path()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("instance,config,status,time,nodes"));
    assert_eq!(lines.len(), 1 + 4 + 2);
    assert!(lines[1].starts_with("ccls-1,classic,optimal"));
    assert!(lines[5].starts_with("sgm,classic,2/2"));
    assert!(lines[6].starts_with("sgm,dom+approx,2/2"));
    let objective = |l: &str| l.rsplit(',').next().unwrap().parse::<f64>().unwrap();
    assert!((objective(lines[1]) - objective(lines[2])).abs() < 1e-6);
    assert_eq!(ccp(&["bench", dir.path().to_str().unwrap(), "--configs", "dom+fast", "--out", "x.csv"]).status.code(), Some(10));
}
