//! Media-type classification of key frames.
//!
//! A fixed decision tree over colour and structure features:
//!
//! 1. externally labelled frames keep their label (`ppt`, `class`);
//! 2. dark frames and frames padded with a black border are computer frames;
//! 3. predominantly green frames are board or podium, depending on where the
//!    green sits;
//! 4. predominantly white frames are computer (long horizontal lines) or
//!    sheet (enough white, light gray or skin);
//! 5. everything else is tested again for computer (lines or colour
//!    repetition), then for podium/board with a relaxed green threshold, and
//!    defaults to illustration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ClassifierConfig, Config};
use crate::content::laplacian_edge;
use crate::raster::{luminance, BinaryImage, Raster, Rgb};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaType {
    Board,
    Class,
    Computer,
    Illustration,
    Podium,
    Sheet,
    Ppt,
}

impl MediaType {
    pub const ALL: [MediaType; 7] = [
        MediaType::Board,
        MediaType::Class,
        MediaType::Computer,
        MediaType::Illustration,
        MediaType::Podium,
        MediaType::Sheet,
        MediaType::Ppt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MediaType::Board => "board",
            MediaType::Class => "class",
            MediaType::Computer => "computer",
            MediaType::Illustration => "illustration",
            MediaType::Podium => "podium",
            MediaType::Sheet => "sheet",
            MediaType::Ppt => "ppt",
        }
    }

    /// Board and sheet frames carry writing and take part in topic clustering.
    pub fn is_clusterable(self) -> bool {
        matches!(self, MediaType::Board | MediaType::Sheet)
    }
}

impl fmt::Display for MediaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MediaType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MediaType::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown media type {s:?}"))
    }
}

// ---------------------------------------------------------------------------
// Pixel classes

pub fn hsv(p: Rgb) -> (f64, f64, f64) {
    let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max / 255.0;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (h, s, v)
}

fn spread(p: Rgb) -> u8 {
    let max = p.iter().max().copied().unwrap_or(0);
    let min = p.iter().min().copied().unwrap_or(0);
    max - min
}

pub fn is_green(p: Rgb, cfg: &ClassifierConfig) -> bool {
    let (h, s, v) = hsv(p);
    (cfg.green_hue_min..=cfg.green_hue_max).contains(&h)
        && s >= cfg.green_sat_min
        && (cfg.green_val_min..=cfg.green_val_max).contains(&v)
}

pub fn is_white(p: Rgb, cfg: &ClassifierConfig) -> bool {
    p.iter().all(|&c| c >= cfg.white_min) && spread(p) <= cfg.white_spread
}

pub fn is_light_gray(p: Rgb, cfg: &ClassifierConfig) -> bool {
    p.iter().all(|&c| (cfg.gray_min..=cfg.gray_max).contains(&c)) && spread(p) <= cfg.gray_spread
}

pub fn is_skin(p: Rgb) -> bool {
    let [r, g, b] = p;
    r > 95 && g > 40 && b > 20 && r > g && g > b && r - b > 15
}

// ---------------------------------------------------------------------------
// Features

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorProfile {
    pub green_fraction: f64,
    /// Green fraction within the bottom 10% of rows.
    pub green_bottom10_fraction: f64,
    pub white_fraction: f64,
    pub light_gray_fraction: f64,
    pub skin_fraction: f64,
    pub mean_luminance: f64,
    /// Best black coverage over the 5%..10% border bands.
    pub border_dark_fraction: f64,
    /// Band width (fraction of each dimension) that achieved `border_dark_fraction`.
    pub border_band_fraction: f64,
    /// Green fraction in the 5%-wide top, bottom, left and right edge bands.
    pub green_edge_bands: [f64; 4],
}

fn band(dim: u32, frac: f64) -> u32 {
    ((dim as f64 * frac).round() as u32).clamp(1, dim)
}

fn border_dark_coverage(r: &Raster, pct: u32, t_black: u8) -> f64 {
    let (w, h) = (r.width(), r.height());
    let bw = band(w, pct as f64 / 100.0);
    let bh = band(h, pct as f64 / 100.0);
    let mut total = 0usize;
    let mut dark = 0usize;
    for y in 0..h {
        let row_in_band = y < bh || y >= h - bh;
        for x in 0..w {
            if row_in_band || x < bw || x >= w - bw {
                total += 1;
                if luminance(r.get(x, y)) < t_black {
                    dark += 1;
                }
            }
        }
    }
    dark as f64 / total as f64
}

pub fn color_profile(r: &Raster, cfg: &ClassifierConfig) -> ColorProfile {
    let (w, h) = (r.width(), r.height());
    let n = (w as usize * h as usize) as f64;
    let bottom_rows = band(h, 0.10);
    let bottom_start = h - bottom_rows;
    let ew = band(w, 0.05);
    let eh = band(h, 0.05);

    let (mut green, mut green_bottom, mut white, mut gray, mut skin) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut luma_sum = 0u64;
    let mut edge_green = [0usize; 4];
    for y in 0..h {
        for x in 0..w {
            let p = r.get(x, y);
            luma_sum += luminance(p) as u64;
            if is_green(p, cfg) {
                green += 1;
                if y >= bottom_start {
                    green_bottom += 1;
                }
                if y < eh {
                    edge_green[0] += 1;
                }
                if y >= h - eh {
                    edge_green[1] += 1;
                }
                if x < ew {
                    edge_green[2] += 1;
                }
                if x >= w - ew {
                    edge_green[3] += 1;
                }
            }
            if is_white(p, cfg) {
                white += 1;
            } else if is_light_gray(p, cfg) {
                gray += 1;
            }
            if is_skin(p) {
                skin += 1;
            }
        }
    }

    let (mut best, mut best_pct) = (0.0, 5);
    for pct in 5..=10 {
        let cov = border_dark_coverage(r, pct, cfg.t_black);
        if cov > best {
            best = cov;
            best_pct = pct;
        }
    }

    let row_band = (eh as usize * w as usize) as f64;
    let col_band = (ew as usize * h as usize) as f64;
    ColorProfile {
        green_fraction: green as f64 / n,
        green_bottom10_fraction: green_bottom as f64 / (bottom_rows as usize * w as usize) as f64,
        white_fraction: white as f64 / n,
        light_gray_fraction: gray as f64 / n,
        skin_fraction: skin as f64 / n,
        mean_luminance: luma_sum as f64 / n,
        border_dark_fraction: best,
        border_band_fraction: best_pct as f64 / 100.0,
        green_edge_bands: [
            edge_green[0] as f64 / row_band,
            edge_green[1] as f64 / row_band,
            edge_green[2] as f64 / col_band,
            edge_green[3] as f64 / col_band,
        ],
    }
}

pub fn is_dark_or_black_bordered(r: &Raster, cfg: &ClassifierConfig) -> bool {
    if r.mean_luminance() < cfg.t_dark {
        return true;
    }
    (5..=10).any(|pct| border_dark_coverage(r, pct, cfg.t_black) >= cfg.border_coverage)
}

/// Weighted horizontal-line measure of an edge image: every maximal
/// horizontal run of length `l >= W/16` adds `2^(8l/W)`; the sum is
/// normalised by the image area.
pub fn horizontal_line_measure_of_edges(edges: &BinaryImage) -> f64 {
    let w = edges.width() as f64;
    let min_run = w / 16.0;
    let mut sum = 0.0;
    let mut flush = |run: u32| {
        if run > 0 && run as f64 >= min_run {
            sum += (8.0 * run as f64 / w).exp2();
        }
    };
    for y in 0..edges.height() {
        let mut run = 0u32;
        for x in 0..edges.width() {
            if edges.get(x, y) {
                run += 1;
            } else {
                flush(run);
                run = 0;
            }
        }
        flush(run);
    }
    sum / (w * edges.height() as f64)
}

pub fn horizontal_line_measure(r: &Raster, t_edge: i32) -> f64 {
    horizontal_line_measure_of_edges(&laplacian_edge(r, t_edge))
}

const HIST_BINS: usize = 64;

#[inline]
fn color_bin(p: Rgb) -> usize {
    ((p[0] >> 6) as usize) << 4 | ((p[1] >> 6) as usize) << 2 | (p[2] >> 6) as usize
}

fn repetition_fraction(lines: &[[u32; HIST_BINS]], line_len: u32) -> f64 {
    if lines.len() < 2 {
        return 1.0;
    }
    let similar = lines
        .windows(2)
        .filter(|pair| {
            let inter: u32 = pair[0].iter().zip(pair[1].iter()).map(|(a, b)| a.min(b)).sum();
            inter as f64 / line_len as f64 >= 0.9
        })
        .count();
    similar as f64 / (lines.len() - 1) as f64
}

/// Largest fraction, over rows and over columns, of adjacent line pairs
/// whose 64-bin colour histograms intersect by at least 0.9.
pub fn color_repetition_measure(r: &Raster) -> f64 {
    let (w, h) = (r.width(), r.height());
    let mut rows = vec![[0u32; HIST_BINS]; h as usize];
    let mut cols = vec![[0u32; HIST_BINS]; w as usize];
    for y in 0..h {
        for x in 0..w {
            let b = color_bin(r.get(x, y));
            rows[y as usize][b] += 1;
            cols[x as usize][b] += 1;
        }
    }
    repetition_fraction(&rows, w).max(repetition_fraction(&cols, h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureProfile {
    pub horizontal_line_measure: f64,
    pub color_repetition_measure: f64,
}

// ---------------------------------------------------------------------------
// Decision tree

/// Tree nodes, in evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeNode {
    ExternalLabel,
    DarkOrBorder,
    Green,
    White,
    Residual,
}

/// The leaf that produced a classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    ExternalLabel,
    DarkOrBlackBorder,
    GreenPodium,
    GreenBoardLowerBorder,
    GreenBoardCompleteBorder,
    WhiteLines,
    WhiteSheet,
    ResidualLines,
    ResidualRepetition,
    RelaxedPodium,
    RelaxedBoard,
    DefaultIllustration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub media_type: MediaType,
    pub rule: Rule,
    /// Nodes evaluated on the way to the leaf.
    pub visited: Vec<TreeNode>,
}

fn green_branch(p: &ColorProfile, cfg: &ClassifierConfig, relaxed: bool) -> Option<(MediaType, Rule)> {
    let threshold = if relaxed { cfg.t_green_relaxed } else { cfg.t_green };
    if p.green_fraction < threshold {
        return None;
    }
    let (podium, lower, complete) = if relaxed {
        (Rule::RelaxedPodium, Rule::RelaxedBoard, Rule::RelaxedBoard)
    } else {
        (
            Rule::GreenPodium,
            Rule::GreenBoardLowerBorder,
            Rule::GreenBoardCompleteBorder,
        )
    };
    if p.green_bottom10_fraction < cfg.t_green_bottom {
        return Some((MediaType::Podium, podium));
    }
    if p.green_bottom10_fraction >= cfg.lower_border_green {
        return Some((MediaType::Board, lower));
    }
    if p.green_edge_bands.iter().all(|&g| g >= cfg.complete_border_green) {
        return Some((MediaType::Board, complete));
    }
    // Predominantly green with some green at the bottom but no board border:
    // keep it in the green family so that adding green never demotes it.
    if relaxed {
        None
    } else {
        Some((MediaType::Podium, podium))
    }
}

pub fn classify_traced(r: &Raster, external_label: Option<&str>, cfg: &Config) -> Classification {
    let c = &cfg.classifier;
    let mut visited = vec![TreeNode::ExternalLabel];
    let done = |media_type, rule, visited| Classification {
        media_type,
        rule,
        visited,
    };

    match external_label.map(str::to_ascii_lowercase).as_deref() {
        Some("ppt") => return done(MediaType::Ppt, Rule::ExternalLabel, visited),
        Some("class") => return done(MediaType::Class, Rule::ExternalLabel, visited),
        _ => {}
    }

    visited.push(TreeNode::DarkOrBorder);
    if is_dark_or_black_bordered(r, c) {
        return done(MediaType::Computer, Rule::DarkOrBlackBorder, visited);
    }

    let profile = color_profile(r, c);
    visited.push(TreeNode::Green);
    if let Some((m, rule)) = green_branch(&profile, c, false) {
        return done(m, rule, visited);
    }

    let lines = horizontal_line_measure(r, cfg.filter.t_edge);
    if profile.white_fraction >= c.t_white {
        visited.push(TreeNode::White);
        if lines >= c.theta_h {
            return done(MediaType::Computer, Rule::WhiteLines, visited);
        }
        let light = profile.white_fraction + profile.light_gray_fraction + profile.skin_fraction;
        if light >= c.t_sheet {
            return done(MediaType::Sheet, Rule::WhiteSheet, visited);
        }
    }

    visited.push(TreeNode::Residual);
    if lines >= c.theta_h {
        return done(MediaType::Computer, Rule::ResidualLines, visited);
    }
    if color_repetition_measure(r) >= c.theta_r {
        return done(MediaType::Computer, Rule::ResidualRepetition, visited);
    }
    if let Some((m, rule)) = green_branch(&profile, c, true) {
        return done(m, rule, visited);
    }
    done(MediaType::Illustration, Rule::DefaultIllustration, visited)
}

pub fn classify(r: &Raster, external_label: Option<&str>, cfg: &Config) -> MediaType {
    classify_traced(r, external_label, cfg).media_type
}
