//! Frame manifest parsing and image decoding.
//!
//! A manifest is UTF-8 text with one key frame per line:
//!
//! ```text
//! frame_id <TAB> timestamp_ms <TAB> image_path [<TAB> label]
//! ```
//!
//! Lines starting with `#` are comments. Relative image paths are resolved
//! against the manifest's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

pub const MIN_WIDTH: u32 = 64;
pub const MIN_HEIGHT: u32 = 48;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameManifestEntry {
    pub frame_id: u64,
    pub timestamp_ms: u64,
    pub image_path: PathBuf,
    pub external_label: Option<String>,
}

pub fn load_manifest(path: &Path) -> Result<Vec<FrameManifestEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<FrameManifestEntry>> {
    let mut entries: Vec<FrameManifestEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let frame_id: u64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad frame_id {:?}", fields[0]),
        })?;
        let timestamp_ms: u64 = fields[1].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad timestamp_ms {:?}", fields[1]),
        })?;
        let rel = fields[2].trim();
        if rel.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty image_path".into(),
            });
        }
        let image_path = base.join(rel);
        let external_label = fields
            .get(3)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_owned);

        if let Some(prev) = entries.last() {
            if frame_id <= prev.frame_id {
                return Err(Error::Order {
                    line: line_no,
                    message: format!(
                        "frame_id {frame_id} does not increase (previous {})",
                        prev.frame_id
                    ),
                });
            }
            if timestamp_ms < prev.timestamp_ms {
                return Err(Error::Order {
                    line: line_no,
                    message: format!(
                        "timestamp {timestamp_ms} precedes previous {}",
                        prev.timestamp_ms
                    ),
                });
            }
        }
        entries.push(FrameManifestEntry {
            frame_id,
            timestamp_ms,
            image_path,
            external_label,
        });
    }
    Ok(entries)
}

/// Decodes the entry's image; grayscale and alpha inputs are flattened to RGB.
pub fn load_frame(entry: &FrameManifestEntry) -> Result<Raster> {
    let img = image::open(&entry.image_path).map_err(|e| Error::Decode {
        path: entry.image_path.clone(),
        message: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    if rgb.width() < MIN_WIDTH || rgb.height() < MIN_HEIGHT {
        return Err(Error::Dimension {
            width: rgb.width(),
            height: rgb.height(),
            min_width: MIN_WIDTH,
            min_height: MIN_HEIGHT,
        });
    }
    Raster::from_rgb_image(&rgb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_manifest() {
        assert!(parse_manifest("", Path::new("")).unwrap().is_empty());
        assert!(parse_manifest("# only a comment\n\n", Path::new("")).unwrap().is_empty());
    }

    #[test]
    fn three_lines_in_order() {
        let text = "0\t0\ta.png\n1\t20000\tb.png\tppt\n2\t41000\tc.png\n";
        let entries = parse_manifest(text, Path::new("/data")).unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(
            entries.iter().map(|e| e.frame_id).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(entries[1].external_label.as_deref(), Some("ppt"));
        assert_eq!(entries[2].image_path, Path::new("/data/c.png"));
    }

    #[test]
    fn out_of_order_ids_name_the_line() {
        let text = "0\t0\ta.png\n2\t10\tb.png\n1\t20\tc.png\n";
        match parse_manifest(text, Path::new("")) {
            Err(Error::Order { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected OrderError, got {other:?}"),
        }
    }

    #[test]
    fn decreasing_timestamp_is_an_order_error() {
        let text = "0\t50\ta.png\n1\t10\tb.png\n";
        assert!(matches!(
            parse_manifest(text, Path::new("")),
            Err(Error::Order { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        let text = "0\t0\ta.png\nnot a frame\n";
        assert!(matches!(
            parse_manifest(text, Path::new("")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_manifest("x\t0\ta.png\n", Path::new("")),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
