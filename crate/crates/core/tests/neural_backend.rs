#![cfg(feature = "onnx")]

use std::path::PathBuf;

use image::{Rgb, RgbImage};

use crop_ensemble::infer::{classify_crop, load_backend, ChannelOrder, ModelManifest};
use crop_ensemble::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn manifest() -> ModelManifest {
    ModelManifest::from_path(fixture("tiny_gender.json")).unwrap()
}

// Same probes as make_tiny_model.py.
fn probe(kind: u32) -> RgbImage {
    RgbImage::from_fn(224, 224, |x, y| {
        let c = match kind {
            0 => [(x * 3 + y) % 256, (x * y) % 256, (255 - x) % 256],
            1 => [(y * 7) % 256, 40, (x + 2 * y) % 256],
            _ => [200, (x / 8 * 9) % 256, (y / 4 * 5) % 256],
        };
        Rgb(c.map(|v| v as u8))
    })
}

fn expected(order: &str) -> Vec<[f64; 2]> {
    let text = std::fs::read_to_string(fixture("tiny_gender_expected.json")).unwrap();
    let all: std::collections::BTreeMap<String, Vec<[f64; 2]>> = serde_json::from_str(&text).unwrap();
    all[order].clone()
}

#[test]
fn matches_reference_framework_within_tolerance() {
    for (order, channel_order) in [("RGB", ChannelOrder::Rgb), ("BGR", ChannelOrder::Bgr)] {
        let mut m = manifest();
        m.channel_order = channel_order;
        let handle = load_backend(&m).unwrap();
        for (k, want) in expected(order).iter().enumerate() {
            let got = classify_crop(&handle, &probe(k as u32)).unwrap();
            assert!((got.p_man() - want[0]).abs() < 1e-3, "{order} probe {k}: {} vs {}", got.p_man(), want[0]);
            assert!((got.p_woman() - want[1]).abs() < 1e-3);
            assert!((got.p_man() + got.p_woman() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn class_order_permutation_swaps_probabilities() {
    let mut m = manifest();
    m.class_order = vec!["Woman".into(), "Man".into()];
    let handle = load_backend(&m).unwrap();
    for (k, want) in expected("RGB").iter().enumerate() {
        let got = classify_crop(&handle, &probe(k as u32)).unwrap();
        assert!((got.p_man() - want[1]).abs() < 1e-3);
    }
}

#[test]
fn missing_normalization_is_rejected_before_loading() {
    let mut m = manifest();
    m.normalization = None;
    match load_backend(&m) {
        Err(Error::Validation(problems)) => assert!(problems.iter().any(|p| p.contains("normalization"))),
        other => panic!("expected a validation error, got {:?}", other.map(|h| h.describe())),
    }
}

#[test]
fn missing_or_corrupt_model_is_a_load_error() {
    let mut m = manifest();
    m.model_path = Some(fixture("absent.onnx"));
    assert!(matches!(load_backend(&m), Err(Error::ModelLoad { .. })));

    let tmp = tempfile::tempdir().unwrap();
    let corrupt = tmp.path().join("corrupt.onnx");
    std::fs::write(&corrupt, b"\x08\x07garbage").unwrap();
    m.model_path = Some(corrupt);
    assert!(matches!(load_backend(&m), Err(Error::ModelLoad { .. })));
}

#[test]
fn wrong_crop_shape_is_rejected() {
    let handle = load_backend(&manifest()).unwrap();
    assert!(matches!(
        classify_crop(&handle, &RgbImage::new(100, 224)),
        Err(Error::InvalidInput(_))
    ));
}
