//! Interest-window selection on derived content frames.
//!
//! The frame is split into three equal vertical strips. In each strip a
//! `2h x h` window is slid over a grid with step `h/2`, first top-down and
//! left-to-right, then bottom-up and right-to-left; each scan reports the
//! first placement whose content count lies in `[low, high]` of the window
//! area. Identical reports collapse to one, so a frame yields at most six
//! windows, two per strip.

use serde::{Deserialize, Serialize};

use crate::config::WindowConfig;
use crate::raster::BinaryImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strip {
    Left,
    Middle,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scan {
    TopDown,
    BottomUp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestWindow {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    /// Content pixels inside the window.
    pub cc: usize,
    pub strip: Strip,
    pub scan: Scan,
}

impl InterestWindow {
    pub fn area(&self) -> usize {
        self.w as usize * self.h as usize
    }
}

/// Window geometry derived from the frame height.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowGeometry {
    pub h: u32,
    pub w: u32,
    pub step: u32,
}

impl WindowGeometry {
    pub fn for_frame(height: u32, cfg: &WindowConfig) -> Self {
        let h = ((height as f64 * cfg.height_frac).round() as u32).max(2);
        WindowGeometry {
            h,
            w: 2 * h,
            step: (h / 2).max(1),
        }
    }

    /// Inclusive content-count bounds.
    pub fn bounds(&self, cfg: &WindowConfig) -> (usize, usize) {
        let area = (self.w * self.h) as f64;
        ((cfg.low * area).ceil() as usize, (cfg.high * area).floor() as usize)
    }
}

/// Summed-area table for O(1) rectangle counts.
struct Integral {
    stride: usize,
    sums: Vec<u32>,
}

impl Integral {
    fn new(b: &BinaryImage) -> Self {
        let (w, h) = (b.width() as usize, b.height() as usize);
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += b.get(x as u32, y as u32) as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral { stride, sums }
    }

    fn count(&self, x: u32, y: u32, w: u32, h: u32) -> usize {
        let s = self.stride;
        let (x0, y0, x1, y1) = (x as usize, y as usize, (x + w) as usize, (y + h) as usize);
        (self.sums[y1 * s + x1] + self.sums[y0 * s + x0] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]) as usize
    }
}

/// Horizontal pixel range `[start, end)` of each strip.
pub fn strip_bounds(width: u32) -> [(u32, u32, Strip); 3] {
    let third = |k: u32| (width as u64 * k as u64 / 3) as u32;
    [
        (third(0), third(1), Strip::Left),
        (third(1), third(2), Strip::Middle),
        (third(2), third(3), Strip::Right),
    ]
}

/// Grid placements of the window inside a strip, top-down row-major.
fn grid(strip: (u32, u32), height: u32, g: WindowGeometry) -> Vec<(u32, u32)> {
    let (x0, x1) = strip;
    let mut out = Vec::new();
    if x1 - x0 < g.w || height < g.h {
        return out;
    }
    let mut y = 0;
    while y + g.h <= height {
        let mut x = x0;
        while x + g.w <= x1 {
            out.push((x, y));
            x += g.step;
        }
        y += g.step;
    }
    out
}

pub fn select_windows(d: &BinaryImage, cfg: &WindowConfig) -> Vec<InterestWindow> {
    let g = WindowGeometry::for_frame(d.height(), cfg);
    let (low, high) = g.bounds(cfg);
    let integral = Integral::new(d);
    let mut out = Vec::with_capacity(6);
    for (x0, x1, strip) in strip_bounds(d.width()) {
        let places = grid((x0, x1), d.height(), g);
        let hit = |&(x, y): &(u32, u32)| {
            let cc = integral.count(x, y, g.w, g.h);
            (low..=high).contains(&cc).then_some((x, y, cc))
        };
        let down = places.iter().find_map(hit);
        let up = places.iter().rev().find_map(hit);
        let make = |(x, y, cc), scan| InterestWindow {
            x,
            y,
            w: g.w,
            h: g.h,
            cc,
            strip,
            scan,
        };
        if let Some(t) = down {
            out.push(make(t, Scan::TopDown));
        }
        if let Some(b) = up {
            if down.map(|t| (t.0, t.1)) != Some((b.0, b.1)) {
                out.push(make(b, Scan::BottomUp));
            }
        }
    }
    out
}
