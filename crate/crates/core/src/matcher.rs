//! Multi-scale window matching between two derived content frames.
//!
//! Frames are treated as collections of small local windows: windows chosen
//! in the older frame are located in a blurred copy of the newer one by
//! exhaustive binary template matching, and the correspondences are scored
//! by how many windows matched, how well, and how consistently they moved.
//! Zoom is handled by repeating the search over a fixed set of scale factors.

use serde::{Deserialize, Serialize};

use crate::classifier::MediaType;
use crate::config::{BlurMode, Config, MatchConfig};
use crate::content::DerivedContentFrame;
use crate::error::{Error, Result};
use crate::raster::BinaryImage;
use crate::windows::{select_windows, InterestWindow};

pub const SWEEP_LEN: usize = 14;
pub const SWEEP_MIN: f64 = 0.6;
pub const SWEEP_MAX: f64 = 1.7;

/// Fourteen zoom factors spaced geometrically from 0.6 to 1.7.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSweep {
    factors: [f64; SWEEP_LEN],
}

impl ScaleSweep {
    pub fn standard() -> Self {
        let ratio = SWEEP_MAX / SWEEP_MIN;
        let mut factors = [0.0; SWEEP_LEN];
        for (k, f) in factors.iter_mut().enumerate() {
            *f = SWEEP_MIN * ratio.powf(k as f64 / (SWEEP_LEN - 1) as f64);
        }
        factors[SWEEP_LEN - 1] = SWEEP_MAX;
        ScaleSweep { factors }
    }

    pub fn factors(&self) -> &[f64; SWEEP_LEN] {
        &self.factors
    }

    pub fn nearest(&self, s: f64) -> f64 {
        self.factors
            .iter()
            .copied()
            .min_by(|a, b| (a - s).abs().total_cmp(&(b - s).abs()))
            .expect("sweep is non-empty")
    }
}

impl Default for ScaleSweep {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Windows from the older frame searched in the newer one.
    Forward,
    /// Windows from the newer frame searched in the older one.
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowMatch {
    pub window: InterestWindow,
    pub best_position: (u32, u32),
    pub translation: (i64, i64),
    pub matched: usize,
    pub quality: f64,
}

impl WindowMatch {
    pub fn translation_length(&self) -> f64 {
        let (dx, dy) = self.translation;
        ((dx * dx + dy * dy) as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Windows whose quality reached `q_min`.
    pub n: usize,
    pub mean_quality: f64,
    pub translation_consistency: f64,
    pub spatial_consistency: f64,
    pub scale: f64,
    pub direction: Direction,
    pub total: f64,
    pub accepted: bool,
    pub matches: Vec<WindowMatch>,
}

impl MatchResult {
    /// Median displacement from the older frame to the newer one, in
    /// native pixels of a `width` x `height` frame. Each window above
    /// `q_min` is mapped back through the chosen zoom before taking the
    /// component-wise median.
    pub fn displacement(&self, q_min: f64, width: u32, height: u32) -> Option<(f64, f64)> {
        fn median(mut v: Vec<f64>) -> f64 {
            v.sort_by(f64::total_cmp);
            let k = v.len() / 2;
            if v.len() % 2 == 1 {
                v[k]
            } else {
                (v[k - 1] + v[k]) / 2.0
            }
        }
        let c = (width as f64 / 2.0, height as f64 / 2.0);
        let s = self.scale;
        let (dx, dy): (Vec<f64>, Vec<f64>) = self
            .matches
            .iter()
            .filter(|m| m.quality >= q_min)
            .map(|m| {
                let half = (m.window.w as f64 / 2.0, m.window.h as f64 / 2.0);
                let p = (m.window.x as f64 + half.0, m.window.y as f64 + half.1);
                let q = (m.best_position.0 as f64 + half.0, m.best_position.1 as f64 + half.1);
                match self.direction {
                    // q lies in the newer frame zoomed by 1/s
                    Direction::Forward => (c.0 + s * (q.0 - c.0) - p.0, c.1 + s * (q.1 - c.1) - p.1),
                    // q lies in the older frame zoomed by s
                    Direction::Reverse => (p.0 - c.0 - (q.0 - c.0) / s, p.1 - c.1 - (q.1 - c.1) / s),
                }
            })
            .unzip();
        if dx.is_empty() {
            return None;
        }
        Some((median(dx), median(dy)))
    }
}

/// Bit plane where `word(x, y)` holds the 64 pixels of row `y` starting at
/// column `x`, so any template row can be compared with one AND.
struct Packed {
    width: usize,
    height: usize,
    table: Vec<u64>,
}

impl Packed {
    fn new(b: &BinaryImage) -> Self {
        let (w, h) = (b.width() as usize, b.height() as usize);
        let words = w / 64 + 2;
        let mut row = vec![0u64; words];
        let mut table = vec![0u64; w * h];
        for y in 0..h {
            row.fill(0);
            for (x, &bit) in b.bits()[y * w..(y + 1) * w].iter().enumerate() {
                if bit {
                    row[x / 64] |= 1 << (x % 64);
                }
            }
            for x in 0..w {
                let (word, off) = (x / 64, x % 64);
                table[y * w + x] = if off == 0 {
                    row[word]
                } else {
                    (row[word] >> off) | (row[word + 1] << (64 - off))
                };
            }
        }
        Packed {
            width: w,
            height: h,
            table,
        }
    }

    #[inline]
    fn word(&self, x: usize, y: usize) -> u64 {
        if x < self.width {
            self.table[y * self.width + x]
        } else {
            0
        }
    }
}

/// Template rows packed into 64-bit chunks, zero beyond the window width.
struct Template {
    w: u32,
    h: u32,
    chunks: usize,
    rows: Vec<u64>,
    /// Content pixels in rows `ty..h`, indexed by `ty`.
    remaining: Vec<usize>,
    count: usize,
}

impl Template {
    fn cut(src: &BinaryImage, win: &InterestWindow) -> Self {
        let crop = src.crop(win.x, win.y, win.w, win.h);
        let chunks = (win.w as usize).div_ceil(64);
        let mut rows = vec![0u64; chunks * win.h as usize];
        for y in 0..win.h {
            for x in 0..win.w {
                if crop.get(x, y) {
                    rows[y as usize * chunks + x as usize / 64] |= 1 << (x % 64);
                }
            }
        }
        let mut remaining = vec![0usize; win.h as usize + 1];
        for ty in (0..win.h as usize).rev() {
            let ones: u32 = rows[ty * chunks..(ty + 1) * chunks].iter().map(|r| r.count_ones()).sum();
            remaining[ty] = remaining[ty + 1] + ones as usize;
        }
        Template {
            w: win.w,
            h: win.h,
            chunks,
            rows,
            count: remaining[0],
            remaining,
        }
    }

    /// Overlap with the target placed at (x, y), or `None` as soon as it
    /// can no longer exceed `floor`.
    #[inline]
    fn overlap_above(&self, target: &Packed, x: usize, y: usize, floor: Option<usize>) -> Option<usize> {
        let mut n = 0;
        for ty in 0..self.h as usize {
            if floor.is_some_and(|f| n + self.remaining[ty] <= f) {
                return None;
            }
            for c in 0..self.chunks {
                let t = self.rows[ty * self.chunks + c];
                if t != 0 {
                    n += (t & target.word(x + 64 * c, y + ty)).count_ones() as usize;
                }
            }
        }
        match floor {
            Some(f) if n <= f => None,
            _ => Some(n),
        }
    }
}

/// Candidate displacements inside the search radius, ordered by length, then
/// dy, then dx, so the first maximum found respects the tie-break rule.
fn search_offsets(radius: f64) -> Vec<(i64, i64)> {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    let mut v: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
        .collect();
    v.sort_by_key(|&(dx, dy)| (dx * dx + dy * dy, dy, dx));
    v
}

pub fn search_radius(width: u32, height: u32, cfg: &MatchConfig) -> f64 {
    cfg.search_radius_frac * width.min(height) as f64
}

/// Position, offset and overlap of the best placement so far.
type Placement = ((u32, u32), (i64, i64), usize);

fn locate_packed(tpl: &Template, win: &InterestWindow, target: &Packed, offsets: &[(i64, i64)]) -> WindowMatch {
    let max_x = target.width as i64 - tpl.w as i64;
    let max_y = target.height as i64 - tpl.h as i64;
    let mut best: Option<Placement> = None;
    for &(dx, dy) in offsets {
        let (px, py) = (win.x as i64 + dx, win.y as i64 + dy);
        if px < 0 || py < 0 || px > max_x || py > max_y {
            continue;
        }
        if let Some(n) = tpl.overlap_above(target, px as usize, py as usize, best.map(|b| b.2)) {
            best = Some(((px as u32, py as u32), (dx, dy), n));
            if n == tpl.count {
                break;
            }
        }
    }
    let (pos, translation, matched) = best.unwrap_or(((win.x, win.y), (0, 0), 0));
    WindowMatch {
        window: *win,
        best_position: pos,
        translation,
        matched,
        quality: if tpl.count == 0 { 0.0 } else { matched as f64 / tpl.count as f64 },
    }
}

/// Finds where the content of `window` (cut from `source`) best overlaps
/// `target`, searching displacements up to `radius` pixels.
pub fn locate_window(window: &InterestWindow, source: &BinaryImage, target: &BinaryImage, radius: f64) -> WindowMatch {
    let tpl = Template::cut(source, window);
    locate_packed(&tpl, window, &Packed::new(target), &search_offsets(radius))
}

pub fn blur_for_match(d: &BinaryImage, mode: BlurMode) -> BinaryImage {
    match mode {
        BlurMode::Dilate => d.dilate3(),
        BlurMode::Open => d.open3(),
    }
}

fn population_std(values: &[f64]) -> f64 {
    if values.len() <= 1 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Scores one set of window correspondences. Scale and direction are left
/// at 1.0 / forward for the caller to fill in.
pub fn score(ms: &[WindowMatch], window_h: u32, cfg: &MatchConfig) -> MatchResult {
    let good: Vec<&WindowMatch> = ms.iter().filter(|m| m.quality >= cfg.q_min).collect();
    let n = good.len();
    let h = window_h.max(1) as f64;
    let mean_quality = if n == 0 {
        0.0
    } else {
        good.iter().map(|m| m.quality).sum::<f64>() / n as f64
    };
    let lengths: Vec<f64> = good.iter().map(|m| m.translation_length()).collect();
    let translation_consistency = -population_std(&lengths) / h;

    let mut errors = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (wa, wb) = (&good[a].window, &good[b].window);
            let before = distance((wa.x as f64, wa.y as f64), (wb.x as f64, wb.y as f64));
            let (pa, pb) = (good[a].best_position, good[b].best_position);
            let after = distance((pa.0 as f64, pa.1 as f64), (pb.0 as f64, pb.1 as f64));
            errors.push(after - before);
        }
    }
    let spatial_consistency = -population_std(&errors) / h;

    let total = cfg.alpha * n as f64
        + cfg.beta * mean_quality
        + cfg.gamma * translation_consistency
        + cfg.delta * spatial_consistency;
    MatchResult {
        n,
        mean_quality,
        translation_consistency,
        spatial_consistency,
        scale: 1.0,
        direction: Direction::Forward,
        total,
        accepted: n >= 2 && total >= cfg.tau,
        matches: ms.to_vec(),
    }
}

/// Candidate zoom factors: the identity followed by the standard sweep.
pub fn candidate_scales() -> Vec<f64> {
    std::iter::once(1.0)
        .chain(ScaleSweep::standard().factors().iter().copied())
        .collect()
}

#[cfg(feature = "parallel")]
fn map_scales<T: Send>(scales: &[f64], f: impl Fn(f64) -> T + Sync) -> Vec<T> {
    use rayon::prelude::*;
    scales.par_iter().map(|&s| f(s)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_scales<T>(scales: &[f64], f: impl Fn(f64) -> T) -> Vec<T> {
    scales.iter().map(|&s| f(s)).collect()
}

fn better(a: &MatchResult, b: &MatchResult) -> bool {
    if a.accepted != b.accepted {
        return a.accepted;
    }
    if a.total != b.total {
        return a.total > b.total;
    }
    let (da, db) = (a.scale.ln().abs(), b.scale.ln().abs());
    if da != db {
        return da < db;
    }
    a.direction == Direction::Forward && b.direction == Direction::Reverse
}

fn sweep_direction(
    windows_from: &BinaryImage,
    search_in: &BinaryImage,
    direction: Direction,
    cfg: &Config,
    offsets: &[(i64, i64)],
) -> Vec<MatchResult> {
    let windows = select_windows(windows_from, &cfg.windows);
    let templates: Vec<Template> = windows.iter().map(|w| Template::cut(windows_from, w)).collect();
    let window_h = windows.first().map_or(1, |w| w.h);
    map_scales(&candidate_scales(), |s| {
        // forward: undo the newer frame's zoom; reverse: apply it to the older
        let zoom = match direction {
            Direction::Forward => 1.0 / s,
            Direction::Reverse => s,
        };
        let scaled = if s == 1.0 { search_in.clone() } else { search_in.zoom_nearest(zoom) };
        let target = Packed::new(&blur_for_match(&scaled, cfg.matching.blur));
        let ms: Vec<WindowMatch> = windows
            .iter()
            .zip(&templates)
            .map(|(w, t)| locate_packed(t, w, &target, offsets))
            .collect();
        let mut r = score(&ms, window_h, &cfg.matching);
        r.scale = s;
        r.direction = direction;
        r
    })
}

/// Decides whether `newer` elaborates `older`. Board pairs are also tried
/// in the reverse direction, since erasures remove older content.
pub fn match_pair(older: &DerivedContentFrame, newer: &DerivedContentFrame, cfg: &Config) -> Result<MatchResult> {
    if older.media != newer.media || !older.media.is_clusterable() {
        return Err(Error::MediaTypeMismatch(
            older.media.to_string(),
            newer.media.to_string(),
        ));
    }
    older.bits.same_dims(&newer.bits)?;
    let (w, h) = (older.bits.width(), older.bits.height());
    let offsets = search_offsets(search_radius(w, h, &cfg.matching));

    let mut results = sweep_direction(&older.bits, &newer.bits, Direction::Forward, cfg, &offsets);
    if older.media == MediaType::Board && cfg.matching.reverse_for_board {
        results.extend(sweep_direction(&newer.bits, &older.bits, Direction::Reverse, cfg, &offsets));
    }
    let mut best = results.remove(0);
    for r in results {
        if better(&r, &best) {
            best = r;
        }
    }
    Ok(best)
}
