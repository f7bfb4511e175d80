use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};
use lectureseg::ingest::{load_frame, load_manifest, FrameManifestEntry};
use lectureseg::{Error, Raster};
use proptest::prelude::*;
use tempfile::TempDir;

fn entry(path: &Path) -> FrameManifestEntry {
    FrameManifestEntry {
        frame_id: 0,
        timestamp_ms: 0,
        image_path: path.to_path_buf(),
        external_label: None,
    }
}

#[test]
fn solid_green_round_trip() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("green.png");
    RgbImage::from_pixel(320, 240, Rgb([0, 128, 0])).save(&path).unwrap();
    let r = load_frame(&entry(&path)).unwrap();
    assert_eq!((r.width(), r.height()), (320, 240));
    assert!(r.pixels().iter().all(|&p| p == [0, 128, 0]));
}

#[test]
fn grayscale_is_expanded() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("gray.png");
    GrayImage::from_fn(100, 60, |x, y| Luma([(x * 2 + y) as u8])).save(&path).unwrap();
    let r = load_frame(&entry(&path)).unwrap();
    for y in 0..60 {
        for x in 0..100 {
            let v = (x * 2 + y) as u8;
            assert_eq!(r.get(x, y), [v, v, v]);
        }
    }
}

#[test]
fn tiny_frames_are_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("small.png");
    RgbImage::new(32, 32).save(&path).unwrap();
    let e = load_frame(&entry(&path)).unwrap_err();
    assert!(matches!(e, Error::Dimension { width: 32, height: 32, .. }), "{e:?}");
    assert!(e.is_input_error());

    RgbImage::new(64, 48).save(&path).unwrap();
    assert!(load_frame(&entry(&path)).is_ok());
}

#[test]
fn undecodable_files_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.png");
    std::fs::write(&path, b"not an image").unwrap();
    let e = load_frame(&entry(&path)).unwrap_err();
    assert!(matches!(e, Error::Decode { .. }));
    assert!(e.is_input_error());
}

#[test]
fn manifest_paths_resolve_against_its_directory() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.tsv");
    std::fs::write(&m, "# id\tts\tpath\n0\t0\ta.png\n1\t15000\tsub/b.png\tppt\n").unwrap();
    let entries = load_manifest(&m).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[1].image_path, dir.path().join("sub/b.png"));
    assert_eq!(entries[1].external_label.as_deref(), Some("ppt"));
    assert_eq!(load_manifest(&m).unwrap(), entries);
}

#[test]
fn out_of_order_ids_name_the_line() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.tsv");
    std::fs::write(&m, "0\t0\ta.png\n2\t10\tb.png\n1\t20\tc.png\n").unwrap();
    match load_manifest(&m).unwrap_err() {
        Error::Order { line, .. } => assert_eq!(line, 3),
        e => panic!("{e:?}"),
    }
}

#[test]
fn missing_manifest_is_an_input_error() {
    let e = load_manifest(Path::new("/nonexistent/manifest.tsv")).unwrap_err();
    assert!(e.is_input_error());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lossless_round_trip(w in 64u32..200, h in 48u32..150, seed in any::<u64>()) {
        let mut s = seed | 1;
        let r = Raster::from_fn(w, h, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            [s as u8, (s >> 8) as u8, (s >> 16) as u8]
        });
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("f.png");
        r.to_rgb_image().save(&path).unwrap();
        let back = load_frame(&entry(&path)).unwrap();
        prop_assert_eq!(&back, &r);
        back.to_rgb_image().save(&path).unwrap();
        prop_assert_eq!(load_frame(&entry(&path)).unwrap(), r);
    }
}
