//! Seeded synthetic key frames with known ground truth.
//!
//! Used by the test suites, the benchmark corpus and the browser demo. All
//! generators draw from the caller's RNG, so a seed fixes every pixel.

use std::path::{Path, PathBuf};

use rand::Rng;

use crate::classifier::{MediaType, Rule};
use crate::error::{Error, Result};
use crate::raster::{BinaryImage, Raster, Rgb};

pub const WIDTH: u32 = 320;
pub const HEIGHT: u32 = 240;

pub const BOARD_GREEN: Rgb = [30, 100, 60];
pub const CHALK: Rgb = [225, 225, 215];
pub const PAPER: Rgb = [250, 250, 245];
pub const INK: Rgb = [20, 20, 30];
pub const SKIN: Rgb = [205, 150, 120];
pub const CLOTH: Rgb = [50, 60, 110];
pub const DESK: Rgb = [130, 90, 55];

const WALLS: [Rgb; 4] = [[190, 180, 160], [170, 160, 150], [200, 195, 185], [150, 140, 135]];

/// Equal-luminance (110) colours in eight distinct 64-bins. The first four
/// form the background dither, the last four the shapes.
const DITHER_110: [Rgb; 8] = [
    [117, 105, 118],
    [162, 90, 74],
    [57, 122, 185],
    [186, 58, 175],
    [79, 118, 149],
    [146, 106, 32],
    [111, 88, 221],
    [244, 56, 35],
];

/// Dither with the luminance of [`BOARD_GREEN`] (75).
const DITHER_75: [Rgb; 4] = [[78, 74, 71], [119, 58, 48], [48, 70, 172], [146, 35, 95]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl Rect {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.w && y < self.y + self.h
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }

    pub fn inflate(&self, m: i64) -> Rect {
        Rect::new(self.x - m, self.y - m, self.w + 2 * m, self.h + 2 * m)
    }
}

fn noisy(p: Rgb, rng: &mut impl Rng, amp: i32) -> Rgb {
    if amp == 0 {
        return p;
    }
    p.map(|c| (c as i32 + rng.random_range(-amp..=amp)).clamp(0, 255) as u8)
}

/// Stamps a `t x t` brush along the segment from `a` to `b`.
pub fn draw_segment(ink: &mut BinaryImage, a: (i64, i64), b: (i64, i64), t: u32) {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        for oy in 0..t as i64 {
            for ox in 0..t as i64 {
                let (px, py) = (x + ox, y + oy);
                if px >= 0 && py >= 0 && px < ink.width() as i64 && py < ink.height() as i64 {
                    ink.set(px as u32, py as u32, true);
                }
            }
        }
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// One handwritten-looking glyph: 2-4 strokes between anchor points of a
/// 3x3 grid spanning the cell.
pub fn glyph(rng: &mut impl Rng, w: u32, h: u32, t: u32) -> BinaryImage {
    let (gw, gh) = (w - t, h - t);
    loop {
        let mut g = BinaryImage::new(w, h);
        let anchor = |i: usize| -> (i64, i64) { (((i % 3) as u32 * gw / 2) as i64, ((i / 3) as u32 * gh / 2) as i64) };
        let strokes = rng.random_range(2..=4);
        let mut from = rng.random_range(0..9);
        for _ in 0..strokes {
            let mut to = rng.random_range(0..9);
            while to == from {
                to = rng.random_range(0..9);
            }
            draw_segment(&mut g, anchor(from), anchor(to), t);
            // continue the pen path most of the time
            from = if rng.random_bool(0.7) { to } else { rng.random_range(0..9) };
        }
        if g.dilate3().count() <= 300 {
            return g;
        }
    }
}

/// Writes glyphs line by line into an area, remembering where it stopped.
#[derive(Clone, Debug)]
pub struct TextCursor {
    pub area: Rect,
    x: i64,
    y: i64,
    word_left: u32,
}

const LINE_PITCH: i64 = 24;
const GLYPH_GAP: i64 = 5;
const WORD_GAP: i64 = 12;

impl TextCursor {
    pub fn new(area: Rect) -> Self {
        TextCursor {
            area,
            x: area.x,
            y: area.y,
            word_left: 0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.y + 16 > self.area.y + self.area.h
    }

    /// Writes up to `n` glyphs, skipping positions that come within 5 px of
    /// an `avoid` rectangle. Returns the number written.
    pub fn write(&mut self, ink: &mut BinaryImage, n: usize, t: u32, avoid: &[Rect], rng: &mut impl Rng) -> usize {
        let mut written = 0;
        while written < n && !self.is_full() {
            if self.word_left == 0 {
                self.word_left = rng.random_range(2..=6);
            }
            let w = rng.random_range(9..=12);
            let h = rng.random_range(12..=15);
            if self.x + w as i64 > self.area.x + self.area.w {
                self.x = self.area.x;
                self.y += LINE_PITCH;
                self.word_left = 0;
                continue;
            }
            let cell = Rect::new(self.x, self.y, w as i64, h as i64);
            let blocked = avoid.iter().any(|a| a.inflate(5).intersects(&cell));
            if !blocked {
                let g = glyph(rng, w, h, t);
                for gy in 0..h {
                    for gx in 0..w {
                        if g.get(gx, gy) {
                            let (px, py) = (self.x + gx as i64, self.y + gy as i64);
                            if px >= 0 && py >= 0 && px < ink.width() as i64 && py < ink.height() as i64 {
                                ink.set(px as u32, py as u32, true);
                            }
                        }
                    }
                }
                written += 1;
            }
            self.x += w as i64 + GLYPH_GAP;
            self.word_left -= 1;
            if self.word_left == 0 {
                self.x += WORD_GAP;
            }
        }
        written
    }
}

/// Something standing in front of the writing surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Occluder {
    /// Lecturer in front of a board: body from `top` to the frame bottom,
    /// head centred above it.
    Person { x: i64, top: i64, width: i64 },
    /// Writing arm entering a sheet frame from the right edge at row `y`,
    /// reaching to the hand at (`hand_x`, `hand_y`).
    Arm { y: i64, hand_x: i64, hand_y: i64 },
}

const HEAD_W: i64 = 24;
const HEAD_H: i64 = 28;
const ARM_RADIUS: f64 = 18.0;
const HAND_RADIUS: f64 = 22.0;

impl Occluder {
    pub fn random_person(rng: &mut impl Rng) -> Self {
        let width = rng.random_range(50..=70);
        Occluder::Person {
            x: rng.random_range(20..=(WIDTH as i64 - 20 - width)),
            top: rng.random_range(100..=150),
            width,
        }
    }

    pub fn random_arm(rng: &mut impl Rng) -> Self {
        Occluder::Arm {
            y: rng.random_range(150..=200),
            hand_x: rng.random_range(190..=230),
            hand_y: rng.random_range(110..=150),
        }
    }

    /// Colour at (x, y) when the occluder covers it.
    pub fn color_at(&self, x: i64, y: i64) -> Option<Rgb> {
        match *self {
            Occluder::Person { x: bx, top, width } => {
                if Rect::new(bx, top, width, HEIGHT as i64).contains(x, y) {
                    return Some(CLOTH);
                }
                let hx = bx + (width - HEAD_W) / 2;
                Rect::new(hx, top - HEAD_H, HEAD_W, HEAD_H).contains(x, y).then_some(SKIN)
            }
            Occluder::Arm { y: ay, hand_x, hand_y } => {
                let a = (WIDTH as f64 + 10.0, ay as f64);
                let b = (hand_x as f64, hand_y as f64);
                let p = (x as f64, y as f64);
                let (vx, vy) = (b.0 - a.0, b.1 - a.1);
                let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
                let d_arm = ((p.0 - a.0 - t * vx).powi(2) + (p.1 - a.1 - t * vy).powi(2)).sqrt();
                let d_hand = ((p.0 - b.0).powi(2) + (p.1 - b.1).powi(2)).sqrt();
                (d_arm <= ARM_RADIUS || d_hand <= HAND_RADIUS).then_some(SKIN)
            }
        }
    }

    /// Bounding rectangles, for keeping writing clear of the occluder.
    pub fn bounds(&self) -> Vec<Rect> {
        match *self {
            Occluder::Person { x, top, width } => vec![
                Rect::new(x, top, width, HEIGHT as i64 - top),
                Rect::new(x + (width - HEAD_W) / 2, top - HEAD_H, HEAD_W, HEAD_H),
            ],
            Occluder::Arm { y, hand_x, hand_y } => {
                let r = HAND_RADIUS.max(ARM_RADIUS) as i64 + 1;
                let x0 = hand_x - r;
                let y0 = hand_y.min(y) - r;
                let y1 = hand_y.max(y) + r;
                vec![Rect::new(x0, y0, WIDTH as i64 + 20 - x0, y1 - y0)]
            }
        }
    }
}

/// A rendered frame together with the pixels that carry writing.
#[derive(Clone, Debug)]
pub struct GroundTruthFrame {
    pub raster: Raster,
    pub truth: BinaryImage,
    pub media: MediaType,
}

/// A writing surface (board or sheet) whose content accumulates over time.
#[derive(Clone, Debug)]
pub struct Scene {
    pub media: MediaType,
    /// Board or paper rectangle in scene coordinates.
    pub surface: Rect,
    pub surface_color: Rgb,
    pub surround: Rgb,
    pub ink_color: Rgb,
    pub thickness: u32,
    /// Writing pixels in scene coordinates.
    pub ink: BinaryImage,
    pub cursor: TextCursor,
}

impl Scene {
    /// Green board with wall visible around it; the bottom margin stays
    /// small so the board keeps a green lower border.
    pub fn board(rng: &mut impl Rng) -> Scene {
        let ml = if rng.random_bool(0.5) { rng.random_range(8..=20) } else { 0 };
        let mr = if rng.random_bool(0.5) { rng.random_range(8..=20) } else { 0 };
        let mt = if rng.random_bool(0.5) { rng.random_range(8..=20) } else { 0 };
        let mb = rng.random_range(0..=4);
        let surface = Rect::new(ml, mt, WIDTH as i64 - ml - mr, HEIGHT as i64 - mt - mb);
        Scene {
            media: MediaType::Board,
            surface,
            surface_color: BOARD_GREEN,
            surround: WALLS[rng.random_range(0..WALLS.len())],
            ink_color: CHALK,
            thickness: rng.random_range(2..=3),
            ink: BinaryImage::new(WIDTH, HEIGHT),
            cursor: TextCursor::new(surface.inflate(-12)),
        }
    }

    /// Paper lying on a desk: desk visible left, right and above, paper
    /// running off the bottom of the frame.
    pub fn sheet(rng: &mut impl Rng) -> Scene {
        let ml = rng.random_range(8..=20);
        let mr = rng.random_range(8..=20);
        let mt = rng.random_range(8..=20);
        let surface = Rect::new(ml, mt, WIDTH as i64 - ml - mr, HEIGHT as i64 + 40);
        let area = Rect::new(ml + 12, mt + 12, surface.w - 24, HEIGHT as i64 - mt - 24);
        Scene {
            media: MediaType::Sheet,
            surface,
            surface_color: PAPER,
            surround: DESK,
            ink_color: INK,
            thickness: 2,
            ink: BinaryImage::new(WIDTH, HEIGHT),
            cursor: TextCursor::new(area),
        }
    }

    pub fn write(&mut self, n: usize, avoid: &[Rect], rng: &mut impl Rng) -> usize {
        self.cursor.write(&mut self.ink, n, self.thickness, avoid, rng)
    }

    /// Renders the scene shifted by `pan`, with an optional occluder in
    /// frame coordinates. Truth holds the visible writing pixels.
    pub fn render(&self, pan: (i64, i64), occluder: Option<&Occluder>, rng: &mut impl Rng) -> GroundTruthFrame {
        let mut truth = BinaryImage::new(WIDTH, HEIGHT);
        let mut pixels = Vec::with_capacity((WIDTH * HEIGHT) as usize);
        for y in 0..HEIGHT as i64 {
            for x in 0..WIDTH as i64 {
                let (sx, sy) = (x - pan.0, y - pan.1);
                let on_surface = self.surface.contains(sx, sy);
                let mut p = if on_surface { self.surface_color } else { self.surround };
                if on_surface && self.ink.get_or(sx, sy, false) {
                    p = self.ink_color;
                    truth.set(x as u32, y as u32, true);
                }
                if let Some(c) = occluder.and_then(|o| o.color_at(x, y)) {
                    p = c;
                    truth.set(x as u32, y as u32, false);
                }
                pixels.push(noisy(p, rng, 2));
            }
        }
        GroundTruthFrame {
            raster: Raster::new(WIDTH, HEIGHT, pixels).expect("sized pixel buffer"),
            truth,
            media: self.media,
        }
    }
}

/// A board frame with 30-90 glyphs and, half the time, a lecturer standing
/// clear of the writing.
pub fn board_frame(rng: &mut impl Rng) -> GroundTruthFrame {
    let mut scene = Scene::board(rng);
    let occluder = rng.random_bool(0.5).then(|| Occluder::random_person(rng));
    let avoid = occluder.map(|o| o.bounds()).unwrap_or_default();
    let n = rng.random_range(30..=90);
    scene.write(n, &avoid, rng);
    scene.render((0, 0), occluder.as_ref(), rng)
}

/// A sheet frame with 30-90 glyphs and, half the time, a writing arm.
pub fn sheet_frame(rng: &mut impl Rng) -> GroundTruthFrame {
    let mut scene = Scene::sheet(rng);
    let occluder = rng.random_bool(0.5).then(|| Occluder::random_arm(rng));
    let avoid = occluder.map(|o| o.bounds()).unwrap_or_default();
    let n = rng.random_range(30..=90);
    scene.write(n, &avoid, rng);
    scene.render((0, 0), occluder.as_ref(), rng)
}

fn frame_from_fn(rng: &mut impl Rng, amp: i32, mut f: impl FnMut(i64, i64) -> Rgb) -> Raster {
    let mut pixels = Vec::with_capacity((WIDTH * HEIGHT) as usize);
    for y in 0..HEIGHT as i64 {
        for x in 0..WIDTH as i64 {
            pixels.push(noisy(f(x, y), rng, amp));
        }
    }
    Raster::new(WIDTH, HEIGHT, pixels).expect("sized pixel buffer")
}

/// Lecturer at a desk in front of a green board: the board fills the upper
/// part, the desk the bottom rows.
pub fn podium_frame(rng: &mut impl Rng) -> Raster {
    let desk_top = rng.random_range(190..=205);
    let person = Occluder::Person {
        x: rng.random_range(60..=200),
        top: rng.random_range(80..=120),
        width: rng.random_range(50..=70),
    };
    frame_from_fn(rng, 2, |x, y| {
        if y >= desk_top {
            DESK
        } else {
            person.color_at(x, y).unwrap_or(BOARD_GREEN)
        }
    })
}

/// Board with a chalk tray: green except a tray band above the bottom
/// edge, so only the complete-border rule applies.
pub fn tray_board_frame(rng: &mut impl Rng) -> Raster {
    let tray_color: Rgb = [110, 90, 70];
    let gap_x = rng.random_range(40..=200);
    frame_from_fn(rng, 2, |x, y| {
        let tray = (200..228).contains(&y) && (16..304).contains(&x);
        let bottom_gap = y >= 228 && (gap_x..gap_x + 58).contains(&x);
        if tray || bottom_gap {
            tray_color
        } else {
            BOARD_GREEN
        }
    })
}

/// Dark screen with a few light text rows.
pub fn dark_frame(rng: &mut impl Rng) -> Raster {
    let bg: Rgb = [rng.random_range(10..=25), rng.random_range(10..=25), rng.random_range(15..=35)];
    let rows: Vec<i64> = (0..rng.random_range(3..=8)).map(|_| rng.random_range(10..220)).collect();
    frame_from_fn(rng, 2, |x, y| {
        if rows.iter().any(|&r| (r..r + 3).contains(&y)) && (x / 5) % 3 != 0 {
            [180, 180, 180]
        } else {
            bg
        }
    })
}

/// Slide shown inside a black border.
pub fn bordered_slide_frame(rng: &mut impl Rng) -> Raster {
    let bw = rng.random_range(17..=30);
    let bh = rng.random_range(13..=22);
    let slide: Rgb = [rng.random_range(150..=240), rng.random_range(150..=240), rng.random_range(150..=240)];
    frame_from_fn(rng, 2, |x, y| {
        if x < bw || y < bh || x >= WIDTH as i64 - bw || y >= HEIGHT as i64 - bh {
            [5, 5, 5]
        } else if (y / 20) % 2 == 0 && (x / 9) % 2 == 0 {
            [40, 40, 90]
        } else {
            slide
        }
    })
}

/// White application window with dark menu and tool bars.
pub fn menu_bar_frame(rng: &mut impl Rng) -> Raster {
    let bars: Vec<(i64, i64)> = (0..rng.random_range(3..=5))
        .map(|i| (8 + 45 * i as i64 + rng.random_range(0..10), rng.random_range(4..=8)))
        .collect();
    frame_from_fn(rng, 1, |_, y| {
        if bars.iter().any(|&(top, h)| (top..top + h).contains(&y)) {
            [60, 60, 70]
        } else {
            [245, 245, 245]
        }
    })
}

/// Blue desktop with grey window title bars.
pub fn colored_bars_frame(rng: &mut impl Rng) -> Raster {
    let bg: Rgb = [rng.random_range(40..=70), rng.random_range(60..=90), rng.random_range(150..=180)];
    let bars: Vec<i64> = (0..rng.random_range(4..=6)).map(|i| 10 + 38 * i as i64).collect();
    frame_from_fn(rng, 1, |_, y| {
        if bars.iter().any(|&top| (top..top + 6).contains(&y)) {
            [170, 170, 170]
        } else {
            bg
        }
    })
}

/// Vertical colour stripes; every row has the same histogram.
pub fn stripes_frame(rng: &mut impl Rng) -> Raster {
    let a: Rgb = [rng.random_range(150..=190), 40, 40];
    let b: Rgb = [40, 40, rng.random_range(150..=190)];
    let period = rng.random_range(4..=8);
    frame_from_fn(rng, 1, |x, _| if (x / period) % 2 == 0 { a } else { b })
}

fn dither(x: i64, y: i64, set: &[Rgb]) -> Rgb {
    set[((y & 1) * 2 + (x & 1)) as usize]
}

/// Flat-shaded picture: an equal-luminance dither background with
/// rectangles and discs in a second dither of the same luminance, so it has
/// neither edges nor repeated lines.
pub fn illustration_frame(rng: &mut impl Rng) -> Raster {
    let shapes: Vec<(bool, i64, i64, i64, i64)> = (0..rng.random_range(2..=6))
        .map(|_| {
            (
                rng.random_bool(0.5),
                rng.random_range(0..WIDTH as i64),
                rng.random_range(0..HEIGHT as i64),
                rng.random_range(15..=80),
                rng.random_range(15..=60),
            )
        })
        .collect();
    frame_from_fn(rng, 0, |x, y| {
        let inside = shapes.iter().any(|&(disc, cx, cy, a, b)| {
            if disc {
                (x - cx).pow(2) + (y - cy).pow(2) <= a * a
            } else {
                (x - cx).abs() <= a && (y - cy).abs() <= b
            }
        });
        dither(x, y, if inside { &DITHER_110[4..] } else { &DITHER_110[..4] })
    })
}

/// Thin green frame (about 12% per side) around a dither of the same
/// luminance: green enough only for the relaxed threshold.
pub fn relaxed_board_frame(rng: &mut impl Rng) -> Raster {
    let bx = rng.random_range(36..=40);
    let by = rng.random_range(28..=30);
    frame_from_fn(rng, 0, |x, y| {
        if x < bx || y < by || x >= WIDTH as i64 - bx || y >= HEIGHT as i64 - by {
            BOARD_GREEN
        } else {
            dither(x, y, &DITHER_75)
        }
    })
}

/// Green block in the upper part of a dithered scene, none of it in the
/// bottom rows.
pub fn relaxed_podium_frame(rng: &mut impl Rng) -> Raster {
    let x0 = rng.random_range(20..=60);
    let w = rng.random_range(180..=220);
    let y0 = rng.random_range(10..=30);
    let h = rng.random_range(150..=170);
    frame_from_fn(rng, 0, |x, y| {
        if (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y) {
            BOARD_GREEN
        } else {
            dither(x, y, &DITHER_75)
        }
    })
}

/// A frame built to reach `rule`, with the label to pass alongside it.
/// The external-label rule uses an illustration raster labelled "ppt".
pub fn frame_for_rule(rule: Rule, rng: &mut impl Rng) -> (Raster, Option<&'static str>) {
    let r = match rule {
        Rule::ExternalLabel => return (illustration_frame(rng), Some("ppt")),
        Rule::DarkOrBlackBorder => {
            if rng.random_bool(0.5) {
                dark_frame(rng)
            } else {
                bordered_slide_frame(rng)
            }
        }
        Rule::GreenPodium => podium_frame(rng),
        Rule::GreenBoardLowerBorder => board_frame(rng).raster,
        Rule::GreenBoardCompleteBorder => tray_board_frame(rng),
        Rule::WhiteLines => menu_bar_frame(rng),
        Rule::WhiteSheet => sheet_frame(rng).raster,
        Rule::ResidualLines => colored_bars_frame(rng),
        Rule::ResidualRepetition => stripes_frame(rng),
        Rule::RelaxedPodium => relaxed_podium_frame(rng),
        Rule::RelaxedBoard => relaxed_board_frame(rng),
        Rule::DefaultIllustration => illustration_frame(rng),
    };
    (r, None)
}

/// Media type the tree must assign to frames from [`frame_for_rule`].
pub fn expected_media(rule: Rule) -> MediaType {
    match rule {
        Rule::ExternalLabel => MediaType::Ppt,
        Rule::DarkOrBlackBorder | Rule::WhiteLines | Rule::ResidualLines | Rule::ResidualRepetition => {
            MediaType::Computer
        }
        Rule::GreenPodium | Rule::RelaxedPodium => MediaType::Podium,
        Rule::GreenBoardLowerBorder | Rule::GreenBoardCompleteBorder | Rule::RelaxedBoard => MediaType::Board,
        Rule::WhiteSheet => MediaType::Sheet,
        Rule::DefaultIllustration => MediaType::Illustration,
    }
}

pub const ALL_RULES: [Rule; 12] = [
    Rule::ExternalLabel,
    Rule::DarkOrBlackBorder,
    Rule::GreenPodium,
    Rule::GreenBoardLowerBorder,
    Rule::GreenBoardCompleteBorder,
    Rule::WhiteLines,
    Rule::WhiteSheet,
    Rule::ResidualLines,
    Rule::ResidualRepetition,
    Rule::RelaxedPodium,
    Rule::RelaxedBoard,
    Rule::DefaultIllustration,
];

/// Binary text content confined to `area`, as a content frame would show it.
pub fn text_content(rng: &mut impl Rng, width: u32, height: u32, area: Rect, glyphs: usize) -> BinaryImage {
    let mut ink = BinaryImage::new(width, height);
    TextCursor::new(area).write(&mut ink, glyphs, 2, &[], rng);
    ink
}

/// One frame of a synthetic lecture.
#[derive(Clone, Debug)]
pub struct CorpusFrame {
    pub raster: Raster,
    pub media: MediaType,
    /// Index of the topic the frame shows; `None` for podium shots.
    pub topic: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusParams {
    pub frames: usize,
    /// Next frame continues the current topic.
    pub p_exact: f64,
    /// Next frame returns to an earlier topic.
    pub p_previous: f64,
    /// Next frame starts a topic (the remainder of the probability mass).
    pub p_podium: f64,
    pub p_sheet_topic: f64,
    pub p_occluder: f64,
    pub max_pan: i64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            frames: 200,
            p_exact: 0.89,
            p_previous: 0.036,
            p_podium: 0.05,
            p_sheet_topic: 0.25,
            p_occluder: 0.3,
            max_pan: 3,
        }
    }
}

/// A lecture whose topics grow by elaboration, with revisits and podium
/// shots in between.
#[derive(Clone, Debug)]
pub struct LectureCorpus {
    pub frames: Vec<CorpusFrame>,
    pub topics: usize,
}

impl LectureCorpus {
    /// Writes every frame as `NNNN.png` plus a `manifest.tsv` into `dir`,
    /// one frame every `interval_ms`, and returns the manifest path.
    pub fn write_manifest(&self, dir: &Path, interval_ms: u64) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = String::from("# frame_id\ttimestamp_ms\timage_path\n");
        for (i, f) in self.frames.iter().enumerate() {
            let name = format!("{i:04}.png");
            let path = dir.join(&name);
            f.raster
                .to_rgb_image()
                .save(&path)
                .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
            manifest.push_str(&format!("{i}\t{}\t{name}\n", i as u64 * interval_ms));
        }
        let path = dir.join("manifest.tsv");
        std::fs::write(&path, manifest)?;
        Ok(path)
    }
}

pub fn lecture_corpus(params: &CorpusParams, rng: &mut impl Rng) -> LectureCorpus {
    let mut scenes: Vec<Scene> = Vec::new();
    let mut current = 0usize;
    let mut frames = Vec::with_capacity(params.frames);
    for _ in 0..params.frames {
        if !scenes.is_empty() && rng.random_bool(params.p_podium) {
            frames.push(CorpusFrame {
                raster: podium_frame(rng),
                media: MediaType::Podium,
                topic: None,
            });
            continue;
        }
        let u: f64 = rng.random();
        let fresh = scenes.is_empty() || u >= params.p_exact + params.p_previous;
        if fresh {
            let mut s = if rng.random_bool(params.p_sheet_topic) {
                Scene::sheet(rng)
            } else {
                Scene::board(rng)
            };
            let n = rng.random_range(20..=30);
            s.write(n, &[], rng);
            scenes.push(s);
            current = scenes.len() - 1;
        } else if u >= params.p_exact && scenes.len() > 1 {
            let mut t = rng.random_range(0..scenes.len() - 1);
            if t >= current {
                t += 1;
            }
            current = t;
        }
        let scene = &mut scenes[current];
        if !fresh {
            let n = rng.random_range(1..=4);
            scene.write(n, &[], rng);
        }
        let occluder = rng.random_bool(params.p_occluder).then(|| match scene.media {
            MediaType::Board => Occluder::random_person(rng),
            _ => Occluder::random_arm(rng),
        });
        let m = params.max_pan;
        let pan = (rng.random_range(-m..=m), rng.random_range(-m..=m));
        let f = scene.render(pan, occluder.as_ref(), rng);
        frames.push(CorpusFrame {
            raster: f.raster,
            media: f.media,
            topic: Some(current),
        });
    }
    LectureCorpus {
        topics: scenes.len(),
        frames,
    }
}

/// [`lecture_corpus`] driven by a ChaCha8 stream seeded with `seed`.
pub fn seeded_corpus(params: &CorpusParams, seed: u64) -> LectureCorpus {
    use rand::SeedableRng;
    lecture_corpus(params, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
}

/// Pixel F1 with a one-pixel tolerance: a predicted pixel counts as correct
/// when a truth pixel lies in its 3x3 neighbourhood, and a truth pixel as
/// found when a predicted pixel does.
pub fn tolerant_f1(predicted: &BinaryImage, truth: &BinaryImage) -> f64 {
    let (pc, tc) = (predicted.count(), truth.count());
    if pc == 0 && tc == 0 {
        return 1.0;
    }
    if pc == 0 || tc == 0 {
        return 0.0;
    }
    let near_truth = truth.dilate3();
    let near_pred = predicted.dilate3();
    let precision = predicted.and(&near_truth).expect("same size").count() as f64 / pc as f64;
    let recall = truth.and(&near_pred).expect("same size").count() as f64 / tc as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
