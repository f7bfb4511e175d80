//! Extraction of writing pixels from board and sheet frames.
//!
//! The board chain runs these stages (keys used in [`FilterTrace`]):
//!
//! | key | stage |
//! |-----|-------|
//! | a | original frame |
//! | b | background colour mask (green for boards) |
//! | c | largest flooded background region(s) |
//! | d | outline of the flooded region |
//! | e | outline flooded again, which fills the writing holes |
//! | f | 3x3 Laplacian edges |
//! | g | edges left after the colour similarity filter |
//! | h | majority denoise |
//! | i | 3x3 closing |
//! | j | e AND i |
//! | k | large blobs removed |
//!
//! Sheets use a white/light-gray background mask and skip g, h and i.

use std::collections::BTreeMap;
use std::path::Path;

use crate::classifier::{is_green, is_light_gray, is_white, MediaType};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::raster::{channel_distance, BinaryImage, Connectivity, Raster, Rgb};

/// Binary writing-pixel image produced for one board or sheet frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedContentFrame {
    pub media: MediaType,
    pub bits: BinaryImage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageImage {
    Color(Raster),
    Binary(BinaryImage),
}

/// Per-stage snapshots keyed by stage letter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterTrace {
    stages: BTreeMap<char, StageImage>,
}

impl FilterTrace {
    pub fn keys(&self) -> Vec<char> {
        self.stages.keys().copied().collect()
    }

    pub fn get(&self, stage: char) -> Option<&StageImage> {
        self.stages.get(&stage)
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Writes `<frame_id>_<stage>.png` for every captured stage.
    pub fn write_pngs(&self, dir: &Path, frame_id: u64) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (stage, img) in &self.stages {
            let path = dir.join(format!("{frame_id}_{stage}.png"));
            let res = match img {
                StageImage::Color(r) => r.to_rgb_image().save(&path),
                StageImage::Binary(b) => b.to_luma_image().save(&path),
            };
            res.map_err(|e| std::io::Error::other(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

struct Recorder {
    enabled: bool,
    trace: FilterTrace,
}

impl Recorder {
    fn binary(&mut self, stage: char, b: &BinaryImage) {
        if self.enabled {
            self.trace.stages.insert(stage, StageImage::Binary(b.clone()));
        }
    }
}

/// 3x3 Laplacian (4-neighbour kernel) on luminance; a pixel is an edge when
/// the absolute response reaches `t_edge`. Pixels without a full
/// neighbourhood are never edges.
pub fn laplacian_edge(r: &Raster, t_edge: i32) -> BinaryImage {
    let (w, h) = (r.width() as usize, r.height() as usize);
    let luma = r.luma_plane();
    let mut bits = vec![false; w * h];
    if w >= 3 && h >= 3 {
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let i = y * w + x;
                let c = luma[i] as i32;
                let resp = 4 * c
                    - luma[i - 1] as i32
                    - luma[i + 1] as i32
                    - luma[i - w] as i32
                    - luma[i + w] as i32;
                bits[i] = resp.abs() >= t_edge;
            }
        }
    }
    BinaryImage::from_bits(r.width(), r.height(), bits).expect("sized from raster")
}

fn homogeneous(pixels: &[Rgb], d_sim: u8) -> bool {
    pixels
        .iter()
        .all(|&p| channel_distance(p, pixels[0]) <= d_sim)
}

/// True when the pixels on either side of (x, y) along `axis` form two
/// homogeneous runs of different colour, for the pixel itself and its two
/// neighbours on each side across the axis.
fn on_region_border(r: &Raster, x: u32, y: u32, horizontal: bool, d_sim: u8, run: u32) -> bool {
    let (w, h) = (r.width() as i64, r.height() as i64);
    let run = run as i64;
    for across in -2i64..=2 {
        let (cx, cy) = if horizontal {
            (x as i64, y as i64 + across)
        } else {
            (x as i64 + across, y as i64)
        };
        let mut before = Vec::with_capacity(run as usize);
        let mut after = Vec::with_capacity(run as usize);
        for k in 1..=run {
            let (bx, by, ax, ay) = if horizontal {
                (cx - k, cy, cx + k, cy)
            } else {
                (cx, cy - k, cx, cy + k)
            };
            let inside = |px: i64, py: i64| (0..w).contains(&px) && (0..h).contains(&py);
            if !inside(bx, by) || !inside(ax, ay) {
                return false;
            }
            before.push(r.get(bx as u32, by as u32));
            after.push(r.get(ax as u32, ay as u32));
        }
        if !homogeneous(&before, d_sim)
            || !homogeneous(&after, d_sim)
            || channel_distance(before[0], after[0]) <= d_sim
        {
            return false;
        }
    }
    true
}

/// Clears edge pixels sitting on the border between two homogeneous colour
/// regions, horizontally or vertically. Edges next to thin writing strokes
/// are kept because one side of them is never homogeneous.
pub fn color_similarity_suppress(e: &BinaryImage, r: &Raster, d_sim: u8, run: u32) -> Result<BinaryImage> {
    if e.width() != r.width() || e.height() != r.height() {
        return Err(Error::DimensionMismatch(e.width(), e.height(), r.width(), r.height()));
    }
    let mut out = e.clone();
    for y in 0..e.height() {
        for x in 0..e.width() {
            if e.get(x, y)
                && (on_region_border(r, x, y, true, d_sim, run)
                    || on_region_border(r, x, y, false, d_sim, run))
            {
                out.set(x, y, false);
            }
        }
    }
    Ok(out)
}

/// Stages (c)-(e): the flooded background region(s), their outline and the
/// re-flooded outline.
pub struct FloodStages {
    pub flooded: BinaryImage,
    pub outline: BinaryImage,
    pub filled: BinaryImage,
}

/// Floods background-coloured pixels (4-connected, never through an edge),
/// keeps the largest region and any region at least `keep_ratio` of its
/// size, then outlines and re-floods so that writing holes are included.
/// Returns `None` when there is no background seed at all.
pub fn flood_background(background: &BinaryImage, edges: &BinaryImage, keep_ratio: f64) -> Result<Option<FloodStages>> {
    let passable = background.and_not(edges)?;
    let (labels, areas) = passable.label_components(Connectivity::Four);
    let largest = areas.iter().skip(1).copied().max().unwrap_or(0);
    if largest == 0 {
        return Ok(None);
    }
    let min_keep = keep_ratio * largest as f64;
    let flooded = BinaryImage::select_components(&labels, background.width(), background.height(), |l| {
        areas[l as usize] as f64 >= min_keep
    });
    let outline = flooded.outline();
    let filled = outline.fill_holes();
    Ok(Some(FloodStages {
        flooded,
        outline,
        filled,
    }))
}

/// Board mask of a green board: green seeds flooded without crossing `e`.
pub fn flood_board(r: &Raster, e: &BinaryImage, cfg: &Config) -> Result<BinaryImage> {
    let green = r.mask_where(|p| is_green(p, &cfg.classifier));
    flood_background(&green, e, cfg.filter.region_keep_ratio)?
        .map(|s| s.filled)
        .ok_or(Error::NoBoardFound)
}

/// Majority-style denoise: a pixel is set when at least 5 of its 8
/// neighbours are set, and an already set pixel survives with 2.
pub fn morph_denoise(b: &BinaryImage) -> BinaryImage {
    BinaryImage::from_fn(b.width(), b.height(), |x, y| {
        let n = b.neighbour_count(x, y);
        n >= 5 || (b.get(x, y) && n >= 2)
    })
}

/// 3x3 closing.
pub fn morph_restore(b: &BinaryImage) -> BinaryImage {
    b.close3()
}

/// Largest blob area kept by [`remove_large_blobs`] for a frame size.
pub fn blob_limit(width: u32, height: u32, blob_frac: f64) -> usize {
    (blob_frac * width as f64 * height as f64).floor() as usize
}

/// Drops 8-connected components larger than `a_max` pixels.
pub fn remove_large_blobs(b: &BinaryImage, a_max: usize) -> BinaryImage {
    let (labels, areas) = b.label_components(Connectivity::Eight);
    BinaryImage::select_components(&labels, b.width(), b.height(), |l| areas[l as usize] <= a_max)
}

fn extract(r: &Raster, cfg: &Config, media: MediaType, trace: bool) -> Result<(BinaryImage, FilterTrace)> {
    let f = &cfg.filter;
    let mut rec = Recorder {
        enabled: trace,
        trace: FilterTrace::default(),
    };
    if trace {
        rec.trace.stages.insert('a', StageImage::Color(r.clone()));
    }

    let background = match media {
        MediaType::Board => r.mask_where(|p| is_green(p, &cfg.classifier)),
        _ => r.mask_where(|p| is_white(p, &cfg.classifier) || is_light_gray(p, &cfg.classifier)),
    };
    rec.binary('b', &background);

    let edges = laplacian_edge(r, f.t_edge);
    let stages = flood_background(&background, &edges, f.region_keep_ratio)?.ok_or(match media {
        MediaType::Board => Error::NoBoardFound,
        _ => Error::NoSheetFound,
    })?;
    rec.binary('c', &stages.flooded);
    rec.binary('d', &stages.outline);
    rec.binary('e', &stages.filled);
    rec.binary('f', &edges);

    let foreground = if media == MediaType::Board {
        let g = color_similarity_suppress(&edges, r, f.d_sim, f.similarity_run)?;
        rec.binary('g', &g);
        let h = morph_denoise(&g);
        rec.binary('h', &h);
        let i = morph_restore(&h);
        rec.binary('i', &i);
        i
    } else {
        edges
    };

    let writing = stages.filled.and(&foreground)?;
    rec.binary('j', &writing);
    let content = remove_large_blobs(&writing, blob_limit(r.width(), r.height(), f.blob_frac));
    rec.binary('k', &content);
    Ok((content, rec.trace))
}

/// Runs the full board chain. The trace is empty unless `trace` is set.
pub fn extract_board_content(r: &Raster, cfg: &Config, trace: bool) -> Result<(BinaryImage, FilterTrace)> {
    extract(r, cfg, MediaType::Board, trace)
}

/// Runs the sheet chain (no similarity filter or morphology).
pub fn extract_sheet_content(r: &Raster, cfg: &Config, trace: bool) -> Result<(BinaryImage, FilterTrace)> {
    extract(r, cfg, MediaType::Sheet, trace)
}

/// Dispatches on media type; only board and sheet frames have content.
pub fn extract_content(r: &Raster, media: MediaType, cfg: &Config, trace: bool) -> Result<Option<(DerivedContentFrame, FilterTrace)>> {
    let (bits, t) = match media {
        MediaType::Board => extract_board_content(r, cfg, trace)?,
        MediaType::Sheet => extract_sheet_content(r, cfg, trace)?,
        _ => return Ok(None),
    };
    Ok(Some((DerivedContentFrame { media, bits }, t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLACK: Rgb = [0, 0, 0];
    const WHITE: Rgb = [255, 255, 255];

    fn true_set(b: &BinaryImage) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for y in 0..b.height() {
            for x in 0..b.width() {
                if b.get(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }

    #[test]
    fn laplacian_of_uniform_is_empty() {
        assert!(laplacian_edge(&Raster::filled(64, 48, [90, 140, 30]), 24).is_empty());
    }

    #[test]
    fn laplacian_single_pixel_lights_its_cross() {
        // centre responds 4*255, each 4-neighbour -255, diagonals 0
        let r = Raster::from_fn(9, 9, |x, y| if (x, y) == (4, 4) { WHITE } else { BLACK });
        let e = laplacian_edge(&r, 24);
        assert_eq!(true_set(&e), vec![(4, 3), (3, 4), (4, 4), (5, 4), (4, 5)]);
    }

    #[test]
    fn laplacian_step_gives_two_columns() {
        // columns 0..4 black, 4..8 white: column 3 responds -255, column 4 +255
        let r = Raster::from_fn(8, 8, |x, _| if x < 4 { BLACK } else { WHITE });
        let e = laplacian_edge(&r, 24);
        let expected: Vec<(u32, u32)> = (1..7).flat_map(|y| [(3, y), (4, y)]).collect();
        assert_eq!(true_set(&e), expected);
    }

    #[test]
    fn similarity_clears_region_borders() {
        let r = Raster::from_fn(80, 60, |x, _| if x < 40 { [200, 40, 40] } else { [40, 40, 200] });
        let e = laplacian_edge(&r, 24);
        assert!(e.count() > 0);
        let g = color_similarity_suppress(&e, &r, 20, 4).unwrap();
        // only the first/last two rows along the border survive, where the
        // five-row straightness check runs out of image
        assert!(g.count() <= 8, "{} edge pixels left", g.count());
    }

    #[test]
    fn similarity_keeps_thin_strokes() {
        let board: Rgb = [30, 100, 60];
        let chalk: Rgb = [225, 225, 215];
        let r = Raster::from_fn(80, 60, |x, y| {
            let jitter = ((x * 7 + y * 13) % 5) as u8;
            let stroke = ((20..23).contains(&y) && (10..40).contains(&x)) || ((25..55).contains(&y) && (50..52).contains(&x));
            if stroke {
                chalk
            } else {
                [board[0] + jitter, board[1] + jitter, board[2]]
            }
        });
        let e = laplacian_edge(&r, 24);
        let g = color_similarity_suppress(&e, &r, 20, 4).unwrap();
        assert_eq!(g.count(), e.count());
    }

    #[test]
    fn similarity_of_empty_edges() {
        let r = Raster::filled(64, 48, WHITE);
        let e = BinaryImage::new(64, 48);
        assert!(color_similarity_suppress(&e, &r, 20, 4).unwrap().is_empty());
        assert!(color_similarity_suppress(&BinaryImage::new(10, 10), &r, 20, 4).is_err());
    }

    #[test]
    fn flood_cases() {
        let cfg = Config::default();
        let green = Raster::filled(64, 48, [30, 100, 60]);
        let e = laplacian_edge(&green, 24);
        assert_eq!(flood_board(&green, &e, &cfg).unwrap().count(), 64 * 48);

        let brown = Raster::filled(64, 48, [120, 80, 40]);
        assert!(matches!(
            flood_board(&brown, &BinaryImage::new(64, 48), &cfg),
            Err(Error::NoBoardFound)
        ));

        let with_chalk = Raster::from_fn(64, 48, |x, y| {
            if (20..40).contains(&x) && (20..22).contains(&y) {
                [230, 230, 230]
            } else {
                [30, 100, 60]
            }
        });
        let e = laplacian_edge(&with_chalk, 24);
        let mask = flood_board(&with_chalk, &e, &cfg).unwrap();
        assert!(mask.get(30, 20) && mask.get(30, 21), "stroke pixels inside the board mask");
        assert_eq!(mask.count(), 64 * 48);
    }

    #[test]
    fn denoise_cases() {
        let mut speck = BinaryImage::new(10, 10);
        speck.set(5, 5, true);
        assert!(morph_denoise(&speck).is_empty());
        assert!(morph_denoise(&BinaryImage::new(10, 10)).is_empty());

        let stroke = BinaryImage::from_fn(40, 20, |x, y| (5..35).contains(&x) && (8..11).contains(&y));
        let out = morph_denoise(&stroke);
        let kept = stroke.and(&out).unwrap().count();
        assert!(kept as f64 >= 0.95 * stroke.count() as f64);
    }

    #[test]
    fn restore_cases() {
        let dashed = BinaryImage::from_fn(40, 10, |x, y| y == 5 && (5..35).contains(&x) && x % 3 != 0);
        let closed = morph_restore(&dashed);
        let (_, areas) = closed.label_components(Connectivity::Eight);
        assert_eq!(areas.len() - 1, 1);
        assert!(morph_restore(&BinaryImage::new(10, 10)).is_empty());
        let block = BinaryImage::from_fn(20, 20, |x, y| (5..12).contains(&x) && (4..15).contains(&y));
        assert_eq!(morph_restore(&block), block);
    }

    #[test]
    fn blob_limit_is_inclusive() {
        let mk = |area: u32| BinaryImage::from_fn(100, 100, |x, y| y == 50 && x < area);
        let a_max = 50;
        assert_eq!(remove_large_blobs(&mk(50), a_max).count(), 50);
        assert_eq!(remove_large_blobs(&mk(51), a_max).count(), 0);
        assert_eq!(blob_limit(320, 240, 0.005), 384);
    }

    #[test]
    fn sheet_trace_skips_noise_stages() {
        let r = Raster::from_fn(64, 48, |x, y| if y == 20 && (10..30).contains(&x) { [20, 20, 30] } else { [250, 250, 245] });
        let (_, trace) = extract_sheet_content(&r, &Config::default(), true).unwrap();
        assert_eq!(trace.keys(), vec!['a', 'b', 'c', 'd', 'e', 'f', 'j', 'k']);
        let (_, trace) = extract_sheet_content(&r, &Config::default(), false).unwrap();
        assert!(trace.is_empty());
    }

    #[test]
    fn blank_inputs_have_no_content() {
        let cfg = Config::default();
        let (b, t) = extract_board_content(&Raster::filled(64, 48, [30, 100, 60]), &cfg, true).unwrap();
        assert!(b.is_empty());
        assert_eq!(t.keys(), "abcdefghijk".chars().collect::<Vec<_>>());
        let (s, _) = extract_sheet_content(&Raster::filled(64, 48, [250, 250, 245]), &cfg, false).unwrap();
        assert!(s.is_empty());
        assert!(matches!(
            extract_sheet_content(&Raster::filled(64, 48, [30, 100, 60]), &cfg, false),
            Err(Error::NoSheetFound)
        ));
    }
}
