//! Browser bindings for three pieces of the pipeline: the match-call cost
//! model, the board content filter on a synthetic frame, and pairwise
//! matching of a shifted or zoomed copy of some writing.

use lectureseg::cost::{bench, MatchProbabilities};
use lectureseg::matcher::Direction;
use lectureseg::synth::{self, Rect};
use lectureseg::{extract_board_content, match_pair, BinaryImage, Config, DerivedContentFrame, MediaType, Raster, ScaleSweep};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const W: u32 = synth::WIDTH;
const H: u32 = synth::HEIGHT;

fn raster_rgba(r: &Raster) -> Vec<u8> {
    r.pixels().iter().flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

fn binary_rgba(b: &BinaryImage, on: [u8; 3]) -> Vec<u8> {
    b.bits()
        .iter()
        .flat_map(|&v| if v { [on[0], on[1], on[2], 255] } else { [255, 255, 255, 255] })
        .collect()
}

#[derive(Serialize)]
struct CurvePoint {
    frames: usize,
    observed: f64,
    closed_form: f64,
}

#[derive(Serialize)]
struct Curve {
    points: Vec<CurvePoint>,
    fit_a: Option<f64>,
    fit_b: Option<f64>,
    mean_topics: f64,
}

/// Mean cumulative match calls against the closed form, as JSON.
pub fn cost_curve_json(frames: usize, p_exact: f64, p_prev: f64, p_new: f64, trials: usize, seed: u64) -> Result<String, String> {
    let p = MatchProbabilities::new(p_exact, p_prev, p_new).map_err(|e| e.to_string())?;
    let step = (frames / 40).max(1);
    let r = bench(frames, &p, p_new, trials.max(1), seed, step).map_err(|e| e.to_string())?;
    let curve = Curve {
        points: r
            .rows
            .iter()
            .map(|row| CurvePoint {
                frames: row.frames,
                observed: row.observed,
                closed_form: row.closed_form,
            })
            .collect(),
        fit_a: r.fit.map(|f| f.a),
        fit_b: r.fit.map(|f| f.b),
        mean_topics: r.mean_topics,
    };
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn cost_curve(frames: usize, p_exact: f64, p_prev: f64, p_new: f64, trials: usize, seed: u32) -> Result<String, JsError> {
    cost_curve_json(frames, p_exact, p_prev, p_new, trials, seed as u64).map_err(|e| JsError::new(&e))
}

/// A synthetic board frame next to its extracted writing.
#[wasm_bindgen]
pub struct FilterView {
    frame: Vec<u8>,
    content: Vec<u8>,
    truth_pixels: usize,
    found_pixels: usize,
    f1: f64,
}

#[wasm_bindgen]
impl FilterView {
    pub fn width(&self) -> u32 {
        W
    }

    pub fn height(&self) -> u32 {
        H
    }

    pub fn frame_rgba(&self) -> Vec<u8> {
        self.frame.clone()
    }

    pub fn content_rgba(&self) -> Vec<u8> {
        self.content.clone()
    }

    pub fn truth_pixels(&self) -> usize {
        self.truth_pixels
    }

    pub fn found_pixels(&self) -> usize {
        self.found_pixels
    }

    /// Pixel F1 with one pixel of slack.
    pub fn f1(&self) -> f64 {
        self.f1
    }
}

pub fn filter_view(seed: u64) -> Result<FilterView, String> {
    let f = synth::board_frame(&mut ChaCha8Rng::seed_from_u64(seed));
    let (out, _) = extract_board_content(&f.raster, &Config::default(), false).map_err(|e| e.to_string())?;
    Ok(FilterView {
        frame: raster_rgba(&f.raster),
        content: binary_rgba(&out, [20, 20, 30]),
        truth_pixels: f.truth.count(),
        found_pixels: out.count(),
        f1: synth::tolerant_f1(&out, &f.truth),
    })
}

#[wasm_bindgen]
pub fn board_filter(seed: u32) -> Result<FilterView, JsError> {
    filter_view(seed as u64).map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct WindowOut {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    best_x: u32,
    best_y: u32,
    quality: f64,
}

#[derive(Serialize)]
struct MatchSummary {
    accepted: bool,
    scale: f64,
    reverse: bool,
    windows_used: usize,
    mean_quality: f64,
    translation_consistency: f64,
    spatial_consistency: f64,
    total: f64,
    displacement: Option<(f64, f64)>,
    windows: Vec<WindowOut>,
}

/// An older frame, a transformed newer one and the match verdict.
#[wasm_bindgen]
pub struct MatchView {
    older: Vec<u8>,
    newer: Vec<u8>,
    summary: String,
}

#[wasm_bindgen]
impl MatchView {
    pub fn older_rgba(&self) -> Vec<u8> {
        self.older.clone()
    }

    pub fn newer_rgba(&self) -> Vec<u8> {
        self.newer.clone()
    }

    /// JSON with the score components and per-window placements.
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

pub fn sweep_factors() -> Vec<f64> {
    ScaleSweep::standard().factors().to_vec()
}

/// `zoom` indexes the standard sweep; out of range means no zoom. With
/// `unrelated` the newer frame gets fresh writing instead.
pub fn match_view(seed: u64, dx: i32, dy: i32, zoom: usize, unrelated: bool) -> Result<MatchView, String> {
    let area = Rect::new(70, 55, 180, 130);
    let text = |s: u64| synth::text_content(&mut ChaCha8Rng::seed_from_u64(s), W, H, area, 50).dilate3();
    let older = text(seed);
    let mut newer = if unrelated { text(seed ^ 0x9e37_79b9) } else { older.clone() };
    if let Some(&s) = sweep_factors().get(zoom) {
        newer = newer.zoom_nearest(s);
    }
    newer = newer.translate(dx as i64, dy as i64);

    let cfg = Config::default();
    let frame = |bits: &BinaryImage| DerivedContentFrame {
        media: MediaType::Board,
        bits: bits.clone(),
    };
    let r = match_pair(&frame(&older), &frame(&newer), &cfg).map_err(|e| e.to_string())?;
    let summary = MatchSummary {
        accepted: r.accepted,
        scale: r.scale,
        reverse: r.direction == Direction::Reverse,
        windows_used: r.n,
        mean_quality: r.mean_quality,
        translation_consistency: r.translation_consistency,
        spatial_consistency: r.spatial_consistency,
        total: r.total,
        displacement: r.displacement(cfg.matching.q_min, W, H),
        windows: r
            .matches
            .iter()
            .map(|m| WindowOut {
                x: m.window.x,
                y: m.window.y,
                w: m.window.w,
                h: m.window.h,
                best_x: m.best_position.0,
                best_y: m.best_position.1,
                quality: m.quality,
            })
            .collect(),
    };
    Ok(MatchView {
        older: binary_rgba(&older, [20, 20, 30]),
        newer: binary_rgba(&newer, [20, 60, 160]),
        summary: serde_json::to_string(&summary).map_err(|e| e.to_string())?,
    })
}

#[wasm_bindgen]
pub fn match_frames(seed: u32, dx: i32, dy: i32, zoom: usize, unrelated: bool) -> Result<MatchView, JsError> {
    match_view(seed as u64, dx, dy, zoom, unrelated).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn zoom_factors() -> Vec<f64> {
    sweep_factors()
}
