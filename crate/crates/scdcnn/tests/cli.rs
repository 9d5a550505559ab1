use std::path::Path;
use std::process::{Command, Output};

use scdcnn::experiments::random_weight_set;
use scdcnn::{idx, netspec, scdw};

fn scdcnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scdcnn")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const SMALL_NET: &str = "\
input=28x28x1
pool=max
layer=conv filters=2 kernel=5
layer=conv filters=2 kernel=5
layer=fc out=4
layer=output classes=10
";

/// A small network spec, random weights for it, and a 3-image test set.
fn fixtures(dir: &Path) {
    std::fs::write(dir.join("net.txt"), SMALL_NET).unwrap();
    let spec = netspec::parse(SMALL_NET).unwrap();
    scdw::save_weights(&random_weight_set(&spec, 3).unwrap(), &dir.join("w.scdw")).unwrap();
    let images: Vec<Vec<u8>> = (0..3u32).map(|i| (0..784u32).map(|p| ((p * (i + 3)) % 256) as u8).collect()).collect();
    std::fs::write(dir.join("t10k-images-idx3-ubyte"), idx::encode_images(28, 28, &images)).unwrap();
    std::fs::write(dir.join("t10k-labels-idx1-ubyte"), idx::encode_labels(&[0, 4, 7])).unwrap();
}

#[test]
fn reruns_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["csv", "json"] {
        let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("{i}.{fmt}")).display().to_string()).collect();
        for p in &paths {
            let out = scdcnn(&["run", "table3", "--trials", "20", "--seed", "5", "--format", fmt, "--out", p]);
            assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        }
        assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
    }
    let a = scdcnn(&["run", "table4", "--trials", "10", "--n", "4", "--len", "64,128"]);
    let b = scdcnn(&["run", "table4", "--trials", "10", "--n", "4", "--len", "64,128", "--seed", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(String::from_utf8(a.stdout.clone()).unwrap().lines().count(), 3);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["run", "table9"][..],
        &["run", "table2", "--trials", "0"],
        &["run", "table2", "--bogus"],
        &["run", "table4", "--len", "100"],
        &["run", "fig9", "--k", "7", "--n", "16", "--len", "256", "--trials", "1"],
        &["run", "table1", "--sng-width", "40"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&scdcnn(args)), 2, "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_scdcnn"))
        .args(["run", "table3", "--trials", "1"])
        .env("SCDCNN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_external_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let d = dir.path().display().to_string();
    let w = dir.path().join("w.scdw").display().to_string();
    let out = scdcnn(&["run", "table6"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("external data required"));
    assert_eq!(code(&scdcnn(&["run", "table6", "--weights", &w])), 3);
    assert_eq!(code(&scdcnn(&["run", "fig10", "--mnist", &d])), 3);
}

#[test]
fn io_and_file_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let net = dir.path().join("net.txt").display().to_string();
    let bad_out = dir.path().join("missing/out.csv").display().to_string();
    assert_eq!(code(&scdcnn(&["run", "table3", "--trials", "1", "--out", &bad_out])), 4);

    let truncated = dir.path().join("t.scdw");
    let bytes = std::fs::read(dir.path().join("w.scdw")).unwrap();
    std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let t = truncated.display().to_string();
    let out = scdcnn(&["run", "fig11", "--net", &net, "--weights", &t, "--trials", "2"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at byte"));

    // LeNet5 weights do not fit the small network
    let other = dir.path().join("o.scdw");
    let spec = scdcnn_core::network::NetworkSpec::lenet5(scdcnn_core::feb::PoolKind::Max);
    scdw::save_weights(&random_weight_set(&spec, 1).unwrap(), &other).unwrap();
    let o = other.display().to_string();
    assert_eq!(code(&scdcnn(&["run", "fig11", "--net", &net, "--weights", &o, "--trials", "2"])), 4);
    assert_eq!(code(&scdcnn(&["run", "fig11", "--net", "/nonexistent/net.txt", "--trials", "2"])), 4);
}

#[test]
fn network_runs_with_external_data() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let d = dir.path().display().to_string();
    let net = dir.path().join("net.txt").display().to_string();
    let w = dir.path().join("w.scdw").display().to_string();

    let out = scdcnn(&["run", "fig10", "--net", &net, "--weights", &w, "--mnist", &d, "--w", "4,8", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["meta"]["metric"].as_str().unwrap().contains("misclassified"));
    assert_eq!(doc["cells"].as_array().unwrap().len(), 8);
    assert_eq!(doc["cells"][0]["trials"], 3);

    let out = scdcnn(&["run", "table6", "--net", &net, "--weights", &w, "--mnist", &d, "--trials", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "no,pooling,len,layer0,layer1,layer2,mean,std,trials,float_error");
    assert_eq!(rows.len(), 13);
    assert!(rows[1].starts_with("1,max,1024,mux,mux,apc,"));
    assert!(rows[12].starts_with("12,avg,256,apc,apc,apc,"));
}

#[test]
fn random_weights_warn() {
    let out = scdcnn(&["run", "fig11", "--trials", "3", "--amplitude", "0.1"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: no trained weights"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
}
