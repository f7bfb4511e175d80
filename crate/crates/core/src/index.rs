//! Whole-video pipeline and the JSON topic index.
//!
//! Frames are decoded, classified and filtered in parallel, then clustered
//! in video order. A frame that cannot be decoded or filtered stays in the
//! index with media type `error` and a reason.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{classify_traced, Classification, MediaType};
use crate::cluster::{cluster_frames, encode_runs, FrameId, OTHER_LABEL};
use crate::config::Config;
use crate::content::{extract_content, DerivedContentFrame};
use crate::error::{Error, Result};
use crate::ingest::{load_frame, load_manifest, FrameManifestEntry};
use crate::matcher::match_pair;
use crate::raster::Raster;

pub const SCHEMA_VERSION: u32 = 1;
pub const ERROR_MEDIA: &str = "error";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub title: String,
    pub duration_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: FrameId,
    pub timestamp_ms: u64,
    /// A media type name, or `error`.
    pub media_type: String,
    pub topic_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail_path: Option<String>,
    /// Oracle calls spent placing this frame; clustered frames only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_calls: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FrameRecord {
    pub fn media(&self) -> Option<MediaType> {
        self.media_type.parse().ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub label: String,
    pub media_type: MediaType,
    pub frame_ids: Vec<FrameId>,
    pub first_timestamp_ms: u64,
    pub last_timestamp_ms: u64,
    /// True when the topic's frames are adjacent in video order.
    pub contiguous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicIndex {
    pub schema: u32,
    pub video: VideoMeta,
    pub frames: Vec<FrameRecord>,
    /// Clustered topics in creation order.
    pub topics: Vec<TopicRecord>,
    pub runs: String,
}

impl TopicIndex {
    pub fn empty(title: &str) -> Self {
        TopicIndex {
            schema: SCHEMA_VERSION,
            video: VideoMeta {
                title: title.to_string(),
                duration_ms: 0,
            },
            frames: Vec::new(),
            topics: Vec::new(),
            runs: String::new(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.frames.iter().map(|f| f.topic_label.as_str()).collect()
    }

    pub fn topic(&self, label: &str) -> Option<&TopicRecord> {
        self.topics.iter().find(|t| t.label == label)
    }

    /// Canonical serialisation: sorted keys, two-space indent, LF endings and
    /// a trailing newline.
    pub fn to_canonical_json(&self) -> Result<String> {
        // serde_json's default map is ordered, so converting through a Value
        // sorts every object's keys.
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    /// Directory for frame thumbnails; none are written when unset.
    pub thumbs_dir: Option<PathBuf>,
    /// Directory of the index file; thumbnail paths are recorded relative
    /// to it when possible.
    pub index_dir: Option<PathBuf>,
    /// Directory for per-frame classification and filter-stage dumps.
    pub trace_dir: Option<PathBuf>,
    /// Video title; defaults to the manifest file stem.
    pub title: Option<String>,
}

/// Result of the per-frame parallel stage.
struct Prepared {
    media: std::result::Result<MediaType, String>,
    content: Option<DerivedContentFrame>,
    thumbnail: Option<String>,
}

fn thumbnail_record_path(path: &Path, opts: &BuildOptions) -> String {
    let rel = opts
        .index_dir
        .as_deref()
        .and_then(|d| path.strip_prefix(d).ok())
        .unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Downscales to `width` columns, keeping the aspect ratio.
pub fn thumbnail(r: &Raster, width: u32) -> image::RgbImage {
    let img = r.to_rgb_image();
    if width == 0 || width >= r.width() {
        return img;
    }
    let h = ((r.height() as f64 * width as f64 / r.width() as f64).round() as u32).max(1);
    image::imageops::resize(&img, width, h, image::imageops::FilterType::Triangle)
}

fn save_png(img: &image::RgbImage, path: &Path) -> Result<()> {
    img.save(path)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))
}

fn write_classification(dir: &Path, id: FrameId, c: &Classification) -> Result<()> {
    let path = dir.join(format!("{id}_classify.json"));
    let mut s = serde_json::to_string_pretty(c)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn prepare(entry: &FrameManifestEntry, cfg: &Config, opts: &BuildOptions) -> Result<Prepared> {
    let id = entry.frame_id;
    let raster = match load_frame(entry) {
        Ok(r) => r,
        Err(e) if e.is_input_error() => {
            return Ok(Prepared {
                media: Err(e.to_string()),
                content: None,
                thumbnail: None,
            })
        }
        Err(e) => return Err(e.for_frame(id)),
    };

    let thumbnail_path = match &opts.thumbs_dir {
        Some(dir) => {
            let path = dir.join(format!("{id}.png"));
            save_png(&thumbnail(&raster, cfg.index.thumb_width), &path).map_err(|e| e.for_frame(id))?;
            Some(thumbnail_record_path(&path, opts))
        }
        None => None,
    };

    let class = classify_traced(&raster, entry.external_label.as_deref(), cfg);
    let tracing = opts.trace_dir.is_some();
    if let Some(dir) = &opts.trace_dir {
        write_classification(dir, id, &class).map_err(|e| e.for_frame(id))?;
    }
    let media = class.media_type;
    let content = match extract_content(&raster, media, cfg, tracing) {
        Ok(Some((d, trace))) => {
            if let Some(dir) = &opts.trace_dir {
                trace.write_pngs(dir, id).map_err(|e| e.for_frame(id))?;
            }
            Some(d)
        }
        Ok(None) => None,
        Err(e) if e.is_input_error() => {
            return Ok(Prepared {
                media: Err(format!("{media} frame: {e}")),
                content: None,
                thumbnail: thumbnail_path,
            })
        }
        Err(e) => return Err(e.for_frame(id)),
    };
    Ok(Prepared {
        media: Ok(media),
        content,
        thumbnail: thumbnail_path,
    })
}

fn prepare_all(entries: &[FrameManifestEntry], cfg: &Config, opts: &BuildOptions) -> Result<Vec<Prepared>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        entries.par_iter().map(|e| prepare(e, cfg, opts)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        entries.iter().map(|e| prepare(e, cfg, opts)).collect()
    }
}

/// Runs the pipeline on every manifest entry.
pub fn build_index(manifest: &Path, cfg: &Config, opts: &BuildOptions) -> Result<TopicIndex> {
    let entries = load_manifest(manifest)?;
    let title = opts.title.clone().unwrap_or_else(|| {
        manifest
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    build_index_from_entries(&entries, &title, cfg, opts)
}

pub fn build_index_from_entries(entries: &[FrameManifestEntry], title: &str, cfg: &Config, opts: &BuildOptions) -> Result<TopicIndex> {
    for dir in [&opts.thumbs_dir, &opts.trace_dir].into_iter().flatten() {
        std::fs::create_dir_all(dir)?;
    }
    let prepared = prepare_all(entries, cfg, opts)?;

    let contents: BTreeMap<FrameId, &DerivedContentFrame> = entries
        .iter()
        .zip(&prepared)
        .filter_map(|(e, p)| p.content.as_ref().map(|c| (e.frame_id, c)))
        .collect();
    // Frames whose content could not be derived take no part in clustering.
    let sequence: Vec<(FrameId, Option<MediaType>)> = entries
        .iter()
        .zip(&prepared)
        .map(|(e, p)| (e.frame_id, p.media.as_ref().ok().copied()))
        .collect();
    let clusterable: Vec<(FrameId, MediaType)> = sequence
        .iter()
        .filter_map(|&(id, m)| m.map(|m| (id, m)))
        .collect();

    let mut match_error = None;
    let mut oracle = |older: FrameId, newer: FrameId| match match_pair(contents[&older], contents[&newer], cfg) {
        Ok(r) => r.accepted,
        Err(e) => {
            match_error.get_or_insert(e.for_frame(newer));
            false
        }
    };
    let run = cluster_frames(&clusterable, &mut oracle);
    if let Some(e) = match_error {
        return Err(e);
    }

    let labels: BTreeMap<FrameId, &str> = clusterable
        .iter()
        .zip(&run.labels)
        .map(|(&(id, _), l)| (id, l.as_str()))
        .collect();
    let calls: BTreeMap<FrameId, u64> = run.outcomes.iter().map(|o| (o.frame_id, o.match_calls)).collect();

    let frames: Vec<FrameRecord> = entries
        .iter()
        .zip(prepared)
        .map(|(e, p)| {
            let id = e.frame_id;
            let (media_type, error) = match p.media {
                Ok(m) => (m.as_str().to_string(), None),
                Err(reason) => (ERROR_MEDIA.to_string(), Some(reason)),
            };
            FrameRecord {
                frame_id: id,
                timestamp_ms: e.timestamp_ms,
                media_type,
                topic_label: labels.get(&id).copied().unwrap_or(OTHER_LABEL).to_string(),
                thumbnail_path: p.thumbnail,
                match_calls: calls.get(&id).copied(),
                error,
            }
        })
        .collect();

    let position: BTreeMap<FrameId, usize> = entries.iter().enumerate().map(|(i, e)| (e.frame_id, i)).collect();
    let timestamp: BTreeMap<FrameId, u64> = entries.iter().map(|e| (e.frame_id, e.timestamp_ms)).collect();
    let topics = run
        .topics
        .in_creation_order()
        .into_iter()
        .map(|t| TopicRecord {
            label: t.label.clone(),
            media_type: t.media,
            frame_ids: t.frame_ids.clone(),
            first_timestamp_ms: timestamp[&t.frame_ids[0]],
            last_timestamp_ms: timestamp[&t.most_recent_frame()],
            contiguous: t.frame_ids.windows(2).all(|w| position[&w[1]] == position[&w[0]] + 1),
        })
        .collect();

    let labels: Vec<&str> = frames.iter().map(|f| f.topic_label.as_str()).collect();
    let runs = encode_runs(&labels);
    Ok(TopicIndex {
        schema: SCHEMA_VERSION,
        video: VideoMeta {
            title: title.to_string(),
            duration_ms: entries.last().map_or(0, |e| e.timestamp_ms),
        },
        frames,
        topics,
        runs,
    })
}

/// Writes the canonical JSON through a temporary file in the destination
/// directory, then renames it into place.
pub fn write_index(idx: &TopicIndex, out: &Path) -> Result<()> {
    let json = idx.to_canonical_json()?;
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(json.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(out).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn read_index(path: &Path) -> Result<TopicIndex> {
    let text = std::fs::read_to_string(path)?;
    let idx: TopicIndex = serde_json::from_str(&text)?;
    if idx.schema != SCHEMA_VERSION {
        return Err(Error::Parse {
            line: 1,
            message: format!("unsupported index schema {}", idx.schema),
        });
    }
    Ok(idx)
}
