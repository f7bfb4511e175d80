use std::path::{Path, PathBuf};

use lectureseg::index::{build_index_from_entries, ERROR_MEDIA, SCHEMA_VERSION};
use lectureseg::synth::{self, Scene};
use lectureseg::{build_index, decode_runs, read_index, write_index, BuildOptions, Config, MediaType, Raster, TopicIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn save(dir: &Path, name: &str, r: &Raster) -> PathBuf {
    let p = dir.join(name);
    r.to_rgb_image().save(&p).unwrap();
    p
}

/// Two elaborating board frames, a podium shot and a sheet.
fn small_lecture(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut board = Scene::board(&mut rng);
    board.write(40, &[], &mut rng);
    save(dir, "b0.png", &board.render((0, 0), None, &mut rng).raster);
    board.write(4, &[], &mut rng);
    save(dir, "b1.png", &board.render((1, -1), None, &mut rng).raster);
    save(dir, "p.png", &synth::podium_frame(&mut rng));
    let mut sheet = Scene::sheet(&mut rng);
    sheet.write(40, &[], &mut rng);
    save(dir, "s.png", &sheet.render((0, 0), None, &mut rng).raster);
    let m = dir.join("lecture.tsv");
    std::fs::write(&m, "0\t0\tb0.png\n1\t15000\tb1.png\n2\t30000\tp.png\n3\t95000\ts.png\n").unwrap();
    m
}

fn options(dir: &Path) -> BuildOptions {
    BuildOptions {
        thumbs_dir: Some(dir.join("thumbs")),
        index_dir: Some(dir.to_path_buf()),
        ..BuildOptions::default()
    }
}

#[test]
fn small_lecture_index() {
    let dir = TempDir::new().unwrap();
    let m = small_lecture(dir.path());
    let idx = build_index(&m, &Config::default(), &options(dir.path())).unwrap();
    assert_eq!(idx.schema, SCHEMA_VERSION);
    assert_eq!(idx.video.title, "lecture");
    assert_eq!(idx.video.duration_ms, 95_000);
    assert_eq!(idx.runs, "A^2 X^1 B^1");
    let media: Vec<Option<MediaType>> = idx.frames.iter().map(|f| f.media()).collect();
    assert_eq!(
        media,
        [MediaType::Board, MediaType::Board, MediaType::Podium, MediaType::Sheet].map(Some).to_vec()
    );
    let a = idx.topic("A").unwrap();
    assert_eq!((a.media_type, a.frame_ids.clone(), a.contiguous), (MediaType::Board, vec![0, 1], true));
    assert_eq!((a.first_timestamp_ms, a.last_timestamp_ms), (0, 15_000));
    assert_eq!(idx.topic("B").unwrap().frame_ids, vec![3]);
    assert_eq!(decode_runs(&idx.runs).unwrap(), idx.labels());
    for f in &idx.frames {
        let thumb = dir.path().join(f.thumbnail_path.as_ref().unwrap());
        let img = image::open(&thumb).unwrap();
        assert_eq!((img.width(), img.height()), (160, 120));
    }
    let clustered: Vec<u64> = idx.topics.iter().flat_map(|t| t.frame_ids.clone()).collect();
    for f in &idx.frames {
        let is_clustered = f.media().is_some_and(|m| m.is_clusterable());
        assert_eq!(clustered.contains(&f.frame_id), is_clustered);
    }
}

#[test]
fn write_read_round_trip_is_canonical() {
    let dir = TempDir::new().unwrap();
    let m = small_lecture(dir.path());
    let idx = build_index(&m, &Config::default(), &options(dir.path())).unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_index(&idx, &a).unwrap();
    write_index(&idx, &b).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));
    assert_eq!(bytes.last(), Some(&b'\n'));
    assert_eq!(read_index(&a).unwrap(), idx);

    let again = build_index(&m, &Config::default(), &options(dir.path())).unwrap();
    write_index(&again, &b).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
}

#[test]
fn failed_writes_leave_nothing_behind() {
    let dir = TempDir::new().unwrap();
    let idx = TopicIndex::empty("t");
    assert!(write_index(&idx, &dir.path().join("missing/index.json")).is_err());

    let blocker = dir.path().join("index.json");
    std::fs::create_dir(&blocker).unwrap();
    std::fs::write(blocker.join("keep"), "x").unwrap();
    assert!(write_index(&idx, &blocker).is_err());
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("index.json")]);
    assert!(blocker.is_dir());
}

#[test]
fn corrupt_frames_are_kept_as_errors() {
    let dir = TempDir::new().unwrap();
    let m = small_lecture(dir.path());
    std::fs::write(dir.path().join("broken.png"), b"\x89PNG truncated").unwrap();
    std::fs::write(
        &m,
        "0\t0\tb0.png\n1\t15000\tb1.png\n2\t20000\tbroken.png\n3\t30000\tp.png\n4\t95000\ts.png\n",
    )
    .unwrap();
    let idx = build_index(&m, &Config::default(), &options(dir.path())).unwrap();
    assert_eq!(idx.frames.len(), 5);
    let broken = &idx.frames[2];
    assert_eq!(broken.media_type, ERROR_MEDIA);
    assert!(broken.error.is_some());
    assert_eq!(broken.topic_label, "Z");
    assert_eq!(idx.runs, "A^2 Z^1 X^1 B^1");
}

#[test]
fn empty_manifest_gives_empty_index() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("empty.tsv");
    std::fs::write(&m, "# nothing yet\n").unwrap();
    let idx = build_index(&m, &Config::default(), &BuildOptions::default()).unwrap();
    assert!(idx.frames.is_empty() && idx.topics.is_empty());
    assert_eq!(idx.runs, "");
    assert_eq!(idx, TopicIndex::empty("empty"));
}

#[test]
fn ppt_labels_skip_clustering() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = save(dir.path(), "slide.png", &synth::board_frame(&mut rng).raster);
    let entries = vec![lectureseg::FrameManifestEntry {
        frame_id: 7,
        timestamp_ms: 1000,
        image_path: p,
        external_label: Some("ppt".into()),
    }];
    let idx = build_index_from_entries(&entries, "slides", &Config::default(), &BuildOptions::default()).unwrap();
    assert_eq!(idx.frames[0].media(), Some(MediaType::Ppt));
    assert!(idx.topics.is_empty());
    assert_eq!(idx.frames[0].match_calls, None);
    assert_eq!(idx.runs, "Z^1");
}
