//! Pipeline configuration.
//!
//! The on-disk form is line-oriented `key = value` text. Keys are namespaced
//! by stage (`classifier.*`, `filter.*`, `windows.*`, `match.*`, `index.*`);
//! `#` starts a comment line and blank lines are ignored. Every key is
//! optional and falls back to the default below.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Mean luminance below which a frame counts as dark.
    pub t_dark: f64,
    /// Luminance below which a border pixel counts as black.
    pub t_black: u8,
    /// Fraction of border-band pixels that must be black.
    pub border_coverage: f64,
    pub t_green: f64,
    pub t_green_relaxed: f64,
    /// Green fraction in the bottom 10% rows below which a green frame is podium.
    pub t_green_bottom: f64,
    pub t_white: f64,
    pub t_sheet: f64,
    pub theta_h: f64,
    pub theta_r: f64,
    /// Green fraction within the bottom 10% rows for a "green lower border".
    pub lower_border_green: f64,
    /// Green fraction required in every 5% edge band for a "complete border".
    pub complete_border_green: f64,
    pub green_hue_min: f64,
    pub green_hue_max: f64,
    pub green_sat_min: f64,
    pub green_val_min: f64,
    pub green_val_max: f64,
    pub white_min: u8,
    pub white_spread: u8,
    pub gray_min: u8,
    pub gray_max: u8,
    pub gray_spread: u8,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            t_dark: 40.0,
            t_black: 32,
            border_coverage: 0.90,
            t_green: 0.50,
            t_green_relaxed: 0.30,
            t_green_bottom: 0.05,
            t_white: 0.60,
            t_sheet: 0.70,
            theta_h: 0.01,
            theta_r: 0.60,
            lower_border_green: 0.5,
            complete_border_green: 0.8,
            green_hue_min: 70.0,
            green_hue_max: 170.0,
            green_sat_min: 0.15,
            green_val_min: 0.10,
            green_val_max: 0.90,
            white_min: 200,
            white_spread: 30,
            gray_min: 140,
            gray_max: 200,
            gray_spread: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Absolute Laplacian response at or above which a pixel is an edge.
    pub t_edge: i32,
    /// Channel distance under which two colours are "similar".
    pub d_sim: u8,
    /// Pixels examined on each side of an edge by the similarity filter.
    pub similarity_run: u32,
    /// Largest kept blob, as a fraction of the frame area.
    pub blob_frac: f64,
    /// Board components within this ratio of the largest are kept.
    pub region_keep_ratio: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            t_edge: 24,
            d_sim: 20,
            similarity_run: 4,
            blob_frac: 0.005,
            region_keep_ratio: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Window height as a fraction of frame height; width is twice the height.
    pub height_frac: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            height_frac: 0.10,
            low: 0.05,
            high: 0.30,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlurMode {
    Dilate,
    Open,
}

impl FromStr for BlurMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dilate" => Ok(BlurMode::Dilate),
            "open" => Ok(BlurMode::Open),
            other => Err(format!("unknown blur mode {other:?} (expected dilate or open)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Weight of translation consistency.
    pub gamma: f64,
    /// Weight of spatial-arrangement consistency.
    pub delta: f64,
    pub tau: f64,
    pub q_min: f64,
    /// Search radius as a fraction of min(width, height).
    pub search_radius_frac: f64,
    pub blur: BlurMode,
    /// Also try windows from the newer frame for board pairs.
    pub reverse_for_board: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            alpha: 0.5,
            beta: 3.0,
            gamma: 6.0,
            delta: 6.0,
            tau: 3.0,
            q_min: 0.35,
            search_radius_frac: 0.35,
            blur: BlurMode::Dilate,
            reverse_for_board: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub thumb_width: u32,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { thumb_width: 160 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub classifier: ClassifierConfig,
    pub filter: FilterConfig,
    pub windows: WindowConfig,
    #[serde(rename = "match")]
    pub matching: MatchConfig,
    pub index: IndexConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    /// Applies a single `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?}"))
        }
        let c = &mut self.classifier;
        let f = &mut self.filter;
        let w = &mut self.windows;
        let m = &mut self.matching;
        match key {
            "classifier.t_dark" => c.t_dark = num(value)?,
            "classifier.t_black" => c.t_black = num(value)?,
            "classifier.border_coverage" => c.border_coverage = num(value)?,
            "classifier.t_green" => c.t_green = num(value)?,
            "classifier.t_green_relaxed" => c.t_green_relaxed = num(value)?,
            "classifier.t_green_bottom" => c.t_green_bottom = num(value)?,
            "classifier.t_white" => c.t_white = num(value)?,
            "classifier.t_sheet" => c.t_sheet = num(value)?,
            "classifier.theta_h" => c.theta_h = num(value)?,
            "classifier.theta_r" => c.theta_r = num(value)?,
            "classifier.lower_border_green" => c.lower_border_green = num(value)?,
            "classifier.complete_border_green" => c.complete_border_green = num(value)?,
            "classifier.green_hue_min" => c.green_hue_min = num(value)?,
            "classifier.green_hue_max" => c.green_hue_max = num(value)?,
            "classifier.green_sat_min" => c.green_sat_min = num(value)?,
            "classifier.green_val_min" => c.green_val_min = num(value)?,
            "classifier.green_val_max" => c.green_val_max = num(value)?,
            "classifier.white_min" => c.white_min = num(value)?,
            "classifier.white_spread" => c.white_spread = num(value)?,
            "classifier.gray_min" => c.gray_min = num(value)?,
            "classifier.gray_max" => c.gray_max = num(value)?,
            "classifier.gray_spread" => c.gray_spread = num(value)?,
            "filter.t_edge" => f.t_edge = num(value)?,
            "filter.d_sim" => f.d_sim = num(value)?,
            "filter.similarity_run" => f.similarity_run = num(value)?,
            "filter.blob_frac" => f.blob_frac = num(value)?,
            "filter.region_keep_ratio" => f.region_keep_ratio = num(value)?,
            "windows.height_frac" => w.height_frac = num(value)?,
            "windows.low" => w.low = num(value)?,
            "windows.high" => w.high = num(value)?,
            "match.alpha" => m.alpha = num(value)?,
            "match.beta" => m.beta = num(value)?,
            "match.gamma" => m.gamma = num(value)?,
            "match.delta" => m.delta = num(value)?,
            "match.tau" => m.tau = num(value)?,
            "match.q_min" => m.q_min = num(value)?,
            "match.search_radius_frac" => m.search_radius_frac = num(value)?,
            "match.blur" => m.blur = value.parse()?,
            "match.reverse_for_board" => m.reverse_for_board = num(value)?,
            "index.thumb_width" => self.index.thumb_width = num(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| Error::Config {
                    line: i + 1,
                    message,
                })?;
        }
        Ok(cfg)
    }
}
