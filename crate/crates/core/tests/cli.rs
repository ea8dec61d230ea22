use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uplift_core::cli::config::{data_seed, DataSource, RunConfig};
use uplift_core::dataset::{load_csv, synthesize, EffectModel, Schema, SyntheticConfig};
use uplift_core::learners::ClassifierModel;
use uplift_core::meta::TwoModel;
use uplift_core::method::{IteModel, IteModelKind};
use uplift_core::persist::{self, SavedModel};

fn uplift(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uplift")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

const SMALL_BENCH: &[&str] =
    &["bench", "--methods", "2m-logit", "--effect", "constant:0.1", "--n-rows", "1000", "--n-features", "3", "--n-iter", "2", "--seed", "5"];

#[test]
fn bench_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = uplift(&[SMALL_BENCH, &["--out", out]].concat(), tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let summary = lines(&tmp.path().join("a/summary.csv"));
    let methods: Vec<&str> = summary[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, vec!["2m-logit", "2m-logit"]);
    for f in uplift_core::cli::BENCH_FILES {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_method_lists_valid_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let o = uplift(&["bench", "--methods", "2m-svm", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("2m-svm") && e.contains("2m-logit") && e.contains("uplift-rf"), "{e}");
}

#[test]
fn full_method_set_reports_ten_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
seed = 3
n_iter = 2
out = "full"

[data]
source = "synthetic"
n_rows = 1200
n_features = 3
effect = { kind = "sign_flip", magnitude = 0.2 }
"#;
    fs::write(tmp.path().join("run.toml"), cfg).unwrap();
    let o = uplift(&["bench", "--config", "run.toml"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = lines(&tmp.path().join("full/summary.csv"));
    let mut methods: Vec<&str> = summary[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    methods.dedup();
    assert_eq!(methods, uplift_core::method::METHOD_IDS.to_vec());
    let echoed = RunConfig::from_toml(&fs::read_to_string(tmp.path().join("full/config.toml")).unwrap()).unwrap();
    assert_eq!(echoed.seed, 3);
    assert_eq!(echoed.methods.len(), 10);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), "seed = 1\nn_iter = 5\nout = \"from-file\"\n[[methods]]\nid = \"2m-logit\"\n").unwrap();
    let o = uplift(
        &["bench", "--config", "run.toml", "--seed", "2", "--n-iter", "2", "--n-rows", "600", "--out", "from-flag"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!tmp.path().join("from-file").exists());
    let echoed = RunConfig::from_toml(&fs::read_to_string(tmp.path().join("from-flag/config.toml")).unwrap()).unwrap();
    assert_eq!((echoed.seed, echoed.n_iter), (2, 2));
    assert_eq!(echoed.methods.len(), 1);
    match echoed.data {
        DataSource::Synthetic(s) => assert_eq!(s.n_rows, 600),
        DataSource::Csv(_) => panic!("expected synthetic data"),
    }
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(uplift(&["bench", "--n-iter", "many"], tmp.path()).status.code(), Some(1));
    assert_eq!(uplift(&["bench", "--n-iter", "1", "--out", "x"], tmp.path()).status.code(), Some(1));
    fs::write(tmp.path().join("bad.csv"), "f0,treatment,conversion\n0.1,1,0\nNaN,0,1\n").unwrap();
    let o = uplift(&["bench", "--data", "bad.csv", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    assert_eq!(uplift(&["bench", "--threads", "0", "--out", "x"], tmp.path()).status.code(), Some(1));
}

#[test]
fn simulate_writes_data_and_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let o = uplift(&["simulate", "--n-rows", "1000", "--n-features", "5", "--effect", "constant:0", "--seed", "8", "--out", "sim"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let data = tmp.path().join("sim/data.csv");
    let truth = lines(&tmp.path().join("sim/truth.csv"));
    assert_eq!(lines(&data).len(), 1001);
    assert_eq!(truth.len(), 1001);
    assert_eq!(truth[0], "row,true_ite,p_treated,p_control");
    assert!(truth[1..].iter().all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));

    let cfg = SyntheticConfig::new(1000, 5, EffectModel::Constant { effect: 0.0 });
    let (expected, _) = synthesize(&cfg, data_seed(8)).unwrap();
    assert_eq!(load_csv(&data, &Schema::inferred()).unwrap(), expected);
}

fn write_rows(path: &Path, d: usize, n: usize) {
    let mut text = (0..d).map(|j| format!("f{j}")).collect::<Vec<_>>().join(",") + "\n";
    for i in 0..n {
        text += &((0..d).map(|j| format!("{}", (i * (j + 1)) as f64 * 0.1)).collect::<Vec<_>>().join(",") + "\n");
    }
    fs::write(path, text).unwrap();
}

#[test]
fn score_with_a_saved_constant_model() {
    let tmp = tempfile::tempdir().unwrap();
    let two = TwoModel::new(ClassifierModel::constant(0.05, 2), ClassifierModel::constant(0.02, 2)).unwrap();
    let model = IteModel { method_id: "2m-logit".into(), model: IteModelKind::TwoModel(two) };
    persist::save(tmp.path().join("model.json"), &SavedModel::Ite(model)).unwrap();
    write_rows(&tmp.path().join("rows.csv"), 2, 3);
    let o = uplift(&["score", "--model", "model.json", "--data", "rows.csv", "--out", "s"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = lines(&tmp.path().join("s/scores.csv"));
    assert_eq!(out[0], "row,ite_score");
    assert_eq!(out.len(), 4);
    for (i, l) in out[1..].iter().enumerate() {
        let (row, v) = l.split_once(',').unwrap();
        assert_eq!(row.parse::<usize>().unwrap(), i);
        assert!((v.parse::<f64>().unwrap() - 0.03).abs() < 1e-15);
    }
}

#[test]
fn score_trains_saves_and_checks_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let o = uplift(&["simulate", "--n-rows", "400", "--n-features", "12", "--seed", "1", "--out", "train"], tmp.path());
    assert!(o.status.success());
    let o = uplift(
        &["score", "--method", "2m-gbt", "--train", "train/data.csv", "--data", "train/data.csv", "--save-model", "m.json", "--out", "s"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&tmp.path().join("s/scores.csv")).len(), 401);
    assert!(matches!(persist::load(tmp.path().join("m.json")).unwrap(), SavedModel::Ite(_)));

    write_rows(&tmp.path().join("narrow.csv"), 11, 5);
    let o = uplift(&["score", "--model", "m.json", "--data", "narrow.csv", "--out", "s2"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("12") && e.contains("11"), "{e}");
}

#[test]
fn summarize_reproduces_bench_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = uplift(
        &["bench", "--methods", "2m-logit,uplift-rf", "--n-rows", "1000", "--n-features", "3", "--n-iter", "3", "--seed", "4", "--out", "b"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = uplift(&["summarize", "b/iterations.csv", "--out", "s"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["summary.csv", "boxplot.csv", "summary.txt"] {
        assert_eq!(fs::read(tmp.path().join("b").join(f)).unwrap(), fs::read(tmp.path().join("s").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn summarize_small_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("method,iteration,metric,value\n");
    for (i, v) in [1, 2, 3, 4, 5].iter().enumerate() {
        text += &format!("m,{i},ate,{v}\n");
    }
    fs::write(tmp.path().join("it.csv"), text).unwrap();
    let o = uplift(&["summarize", "it.csv", "--out", "s"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let boxplot = lines(&tmp.path().join("s/boxplot.csv"));
    let f: Vec<f64> = boxplot[1].split(',').skip(2).take(5).map(|v| v.parse().unwrap()).collect();
    assert_eq!(f[1..4], [2.0, 3.0, 4.0]);

    fs::write(tmp.path().join("empty.csv"), "method,iteration,metric,value\n").unwrap();
    assert_ne!(uplift(&["summarize", "empty.csv", "--out", "s"], tmp.path()).status.code(), Some(0));
}
