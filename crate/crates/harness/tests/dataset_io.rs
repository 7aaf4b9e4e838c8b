use vistac_core::annotate::LabelKind;
use vistac_core::imageio::decode_gmap;
use vistac_harness::dataset_io::*;
use vistac_harness::detection::{make_samples, train_detector, DetectionConfig, Split};
use vistac_harness::HarnessError;
use vistac_nnet::TgcnnConfig;

fn tiny() -> DetectionConfig {
    let mut d = DetectionConfig { image_size: 32, ..DetectionConfig::default() };
    d.model = TgcnnConfig { enc1: 4, enc2: 8, dec2: 4, blocks: 1 };
    d.train.epochs = 1;
    d
}

#[test]
fn samples_round_trip_exactly() {
    let d = tiny();
    let samples = make_samples(&d, Split::UnseenBackgrounds, 6, 3, LabelKind::Gaussian).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &samples, Split::UnseenBackgrounds, 3, serde_json::to_value(&d).unwrap()).unwrap();
    let (m, back) = read_dataset(dir.path()).unwrap();
    assert_eq!(m.split, Split::UnseenBackgrounds);
    assert_eq!(back, samples);
    for (a, b) in back.iter().zip(&samples) {
        let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.label.q.data), bits(&b.label.q.data));
        assert_eq!(bits(&a.label.r.data), bits(&b.label.r.data));
    }
}

#[test]
fn corrupt_magic_is_a_format_error() {
    let d = tiny();
    let samples = make_samples(&d, Split::Train, 1, 0, LabelKind::Gaussian).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &samples, Split::Train, 0, serde_json::Value::Null).unwrap();
    let path = dir.path().join("labels/00000.gmap");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    assert!(matches!(decode_gmap(&bytes), Err(vistac_core::CoreError::Format(_))));
    // on disk the checksum catches it first
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_dataset(dir.path()), Err(HarnessError::Checksum(_))));
}

#[test]
fn version_mismatch_is_rejected() {
    let d = tiny();
    let samples = make_samples(&d, Split::Train, 1, 0, LabelKind::Gaussian).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &samples, Split::Train, 0, serde_json::Value::Null).unwrap();
    let mpath = dir.path().join("manifest.json");
    let mut m: serde_json::Value = serde_json::from_slice(&std::fs::read(&mpath).unwrap()).unwrap();
    m["version"] = serde_json::json!(DATASET_VERSION + 1);
    std::fs::write(&mpath, serde_json::to_vec(&m).unwrap()).unwrap();
    assert!(matches!(read_dataset(dir.path()), Err(HarnessError::Format(_))));

    let rec = encode_scene_record(&samples[0]).unwrap();
    let mut v: serde_json::Value = serde_json::from_slice(&rec).unwrap();
    v["format"] = serde_json::json!("something-else");
    assert!(matches!(decode_scene_record(&serde_json::to_vec(&v).unwrap()), Err(HarnessError::Format(_))));
}

#[test]
fn missing_dataset_is_a_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let err = read_dataset(&dir.path().join("nope")).unwrap_err();
    assert!(matches!(err, HarnessError::MissingArtifact(_)));
    assert_eq!(err.exit_code(), 3);
    assert!(matches!(load_detector(&dir.path().join("model")), Err(HarnessError::MissingArtifact(_))));
}

#[test]
fn thousand_image_manifest_lists_every_file() {
    let d = tiny();
    let samples = make_samples(&d, Split::Train, 1000, 9, LabelKind::Gaussian).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = write_dataset(dir.path(), &samples, Split::Train, 9, serde_json::Value::Null).unwrap();
    assert_eq!(m.files.len(), 3000);
    let mut on_disk = 0;
    for sub in ["images", "labels", "scenes"] {
        on_disk += std::fs::read_dir(dir.path().join(sub)).unwrap().count();
    }
    assert_eq!(on_disk, 3000);
    for e in &m.files {
        let bytes = std::fs::read(dir.path().join(&e.path)).unwrap();
        assert_eq!(e.bytes, bytes.len() as u64);
        assert_eq!(e.sha256, sha256_hex(&bytes));
    }
    assert_eq!(verify_dataset(dir.path()).unwrap(), m);
}

#[test]
fn sha256_known_vector() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn detector_checkpoint_round_trip() {
    let d = tiny();
    let samples = make_samples(&d, Split::Train, 4, 1, LabelKind::Gaussian).unwrap();
    let (model, _) = train_detector(&d, &samples, |_, _| {}).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("models/detector");
    save_detector(&model, d.r_max_px, &stem).unwrap();
    let back = load_detector(&stem).unwrap();
    assert_eq!(back.r_max, d.r_max_px);
    for s in &samples {
        let x = s.map_sample().unwrap().image;
        assert_eq!(model.predict(&x).unwrap(), back.model.predict(&x).unwrap());
    }
}
