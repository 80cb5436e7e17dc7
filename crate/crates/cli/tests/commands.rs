mod common;

use std::path::Path;

use common::{run, s, write_corpus};
use serde_json::{json, Value};

fn generated(dir: &Path, count: &str) -> std::path::PathBuf {
    let manifest = write_corpus(&dir.join("corpus"), 14);
    let out = dir.join("out");
    let o = run(&["gen", "--manifest", s(&manifest), "--out", s(&out), "--count", count, "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("labels.json")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn split_of_ten_images() {
    let dir = tempfile::tempdir().unwrap();
    let labels = generated(dir.path(), "10");
    let split = dir.path().join("split.json");
    let o = run(&["split", "--labels", s(&labels), "--seed", "1", "--out", s(&split)]);
    assert!(o.status.success());
    let v = read(&split);
    let n = |k: &str| v[k].as_array().unwrap().len();
    // every record of this corpus succeeds, so all ten ids are present
    assert_eq!((n("train"), n("val"), n("test")), (5, 3, 2));
}

#[test]
fn stats_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let labels = generated(dir.path(), "8");
    let split = dir.path().join("split.json");
    assert!(run(&["split", "--labels", s(&labels), "--out", s(&split)]).status.success());
    let js = dir.path().join("stats.json");
    let o = run(&["stats", "--labels", s(&labels), "--split", s(&split), "--json", s(&js)]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("#pedestrians") && text.contains("occlusion bucket"), "{text}");
    let v = read(&js);
    let labels_total = v["labels"].as_u64().unwrap();
    let split_total: u64 = v["by_split"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(split_total, labels_total);
    assert_eq!(v["by_split"]["unassigned"], 0);
}

#[test]
fn eval_perfect_empty_and_hand_case() {
    let dir = tempfile::tempdir().unwrap();
    let labels = generated(dir.path(), "5");
    let set = read(&labels);
    let perfect: Vec<Value> = set["annotations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| json!({ "image_id": a["image_id"], "bbox": a["bbox"], "score": 0.9 }))
        .collect();
    let eval = |dets: &Value| {
        let dp = dir.path().join("dets.json");
        let rp = dir.path().join("report.json");
        std::fs::write(&dp, dets.to_string()).unwrap();
        let o = run(&["eval", "--detections", s(&dp), "--labels", s(&labels), "--json", s(&rp)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("AP75"));
        read(&rp)
    };
    let r = eval(&Value::Array(perfect));
    assert_eq!((r["ap"].as_f64(), r["ar"].as_f64()), (Some(1.0), Some(1.0)));
    let r = eval(&json!([]));
    assert_eq!((r["ap"].as_f64(), r["ar"].as_f64()), (Some(0.0), Some(0.0)));

    // 2 ground truths; detections TP 0.9, FP 0.8, TP 0.7
    let hand = dir.path().join("hand.json");
    std::fs::write(
        &hand,
        json!({
            "images": [{ "id": 0, "file_name": "x.png", "width": 100, "height": 100 }],
            "annotations": [
                { "id": 1, "image_id": 0, "category_id": 1, "bbox": [0, 0, 10, 20], "area": 200, "iscrowd": 0 },
                { "id": 2, "image_id": 0, "category_id": 1, "bbox": [50, 50, 10, 20], "area": 200, "iscrowd": 0 }
            ],
            "categories": [{ "id": 1, "name": "pedestrian" }]
        })
        .to_string(),
    )
    .unwrap();
    let dp = dir.path().join("hand_dets.json");
    std::fs::write(
        &dp,
        json!([
            { "image_id": 0, "bbox": [0, 0, 10, 20], "score": 0.9 },
            { "image_id": 0, "bbox": [30, 30, 10, 10], "score": 0.8 },
            { "image_id": 0, "bbox": [50, 50, 10, 20], "score": 0.7 }
        ])
        .to_string(),
    )
    .unwrap();
    let rp = dir.path().join("hand_report.json");
    let o = run(&["eval", "--detections", s(&dp), "--labels", s(&hand), "--json", s(&rp)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ap = read(&rp)["ap"].as_f64().unwrap();
    assert!((ap - 5.0 / 6.0).abs() < 1e-9);
}

#[test]
fn eval_missing_file_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eval", "--detections", s(&dir.path().join("d.json")), "--labels", s(&dir.path().join("l.json"))]);
    assert_eq!(o.status.code(), Some(2));
}
