mod common;

use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use hprlp::mps::{build_problem, load_mps, parse_mps, read_mps_file, to_free_mps};

use common::{compare, fixture_path, fixtures};

#[test]
fn corpus_matches_hand_derived_data() {
    let all = fixtures();
    assert!(all.len() >= 12);
    for exp in &all {
        let got = load_mps(fixture_path(exp.file)).unwrap_or_else(|e| panic!("{}: {e}", exp.file));
        compare(exp, &got).unwrap();
    }
}

#[test]
fn corpus_survives_a_write_read_cycle() {
    for exp in fixtures() {
        let original = load_mps(fixture_path(exp.file)).unwrap().problem;
        let text = to_free_mps(&original, exp.file);
        let back = build_problem(&parse_mps(text.as_bytes()).unwrap()).unwrap().problem;
        assert_eq!(back, original, "{}", exp.file);
    }
}

#[test]
fn gzip_input_by_extension() {
    let plain = std::fs::read(fixture_path("ranges_e.mps")).unwrap();
    let dir = std::env::temp_dir().join(format!("hprlp-gz-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ranges_e.mps.gz");
    let mut enc = GzEncoder::new(std::fs::File::create(&path).unwrap(), Compression::default());
    enc.write_all(&plain).unwrap();
    enc.finish().unwrap();
    let zipped = read_mps_file(&path).unwrap();
    let direct = read_mps_file(fixture_path("ranges_e.mps")).unwrap();
    assert_eq!(zipped, direct);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_mps(fixture_path("does_not_exist.mps")).unwrap_err();
    assert!(matches!(err, hprlp::mps::MpsError::Io(_)));
}
