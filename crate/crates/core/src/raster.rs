//! In-memory images: RGB rasters and binary planes.

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Integer Rec. 601 luma, rounded.
#[inline]
pub fn luminance(p: Rgb) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

/// Largest per-channel absolute difference.
#[inline]
pub fn channel_distance(a: Rgb, b: Rgb) -> u8 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

/// Row-major RGB image, 8 bits per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Raster {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!("{width}x{height} has no pixels")));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidRaster(format!(
                "{} pixels for {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        assert!(width > 0 && height > 0, "raster must be non-empty");
        Raster {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Rgb) -> Self {
        assert!(width > 0 && height > 0, "raster must be non-empty");
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Raster {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, p: Rgb) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = p;
    }

    pub fn fill_rect(&mut self, x0: u32, y0: u32, w: u32, h: u32, p: Rgb) {
        for y in y0..(y0 + h).min(self.height) {
            for x in x0..(x0 + w).min(self.width) {
                self.set(x, y, p);
            }
        }
    }

    pub fn luma_plane(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| luminance(p)).collect()
    }

    pub fn mean_luminance(&self) -> f64 {
        let sum: u64 = self.pixels.iter().map(|&p| luminance(p) as u64).sum();
        sum as f64 / self.pixels.len() as f64
    }

    pub fn mask_where(&self, pred: impl Fn(Rgb) -> bool) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: self.pixels.iter().map(|&p| pred(p)).collect(),
        }
    }

    pub fn to_rgb_image(&self) -> image::RgbImage {
        let mut buf = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            buf.extend_from_slice(p);
        }
        image::RgbImage::from_raw(self.width, self.height, buf).expect("buffer sized from raster")
    }

    pub fn from_rgb_image(img: &image::RgbImage) -> Result<Self> {
        let pixels = img.pixels().map(|p| p.0).collect();
        Raster::new(img.width(), img.height(), pixels)
    }
}

/// Pixel neighbourhood used for flooding and component labelling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Row-major boolean plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32) -> Self {
        BinaryImage {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::InvalidRaster(format!(
                "{} bits for {width}x{height}",
                bits.len()
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryImage {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds coordinates read as `outside`.
    #[inline]
    pub fn get_or(&self, x: i64, y: i64, outside: bool) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            outside
        } else {
            self.bits[y as usize * self.width as usize + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_dims(&self, other: &BinaryImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn and(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.same_dims(other)?;
        Ok(self.zip_with(other, |a, b| a && b))
    }

    pub fn or(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.same_dims(other)?;
        Ok(self.zip_with(other, |a, b| a || b))
    }

    pub fn and_not(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.same_dims(other)?;
        Ok(self.zip_with(other, |a, b| a && !b))
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(other.bits.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn not(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Number of true pixels in the rectangle, clipped to the image.
    pub fn count_rect(&self, x0: u32, y0: u32, w: u32, h: u32) -> usize {
        let mut n = 0;
        for y in y0..(y0 + h).min(self.height) {
            let row = y as usize * self.width as usize;
            for x in x0..(x0 + w).min(self.width) {
                n += self.bits[row + x as usize] as usize;
            }
        }
        n
    }

    /// Copies the rectangle into a new image; pixels outside `self` are false.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| {
            self.get_or(x0 as i64 + x as i64, y0 as i64 + y as i64, false)
        })
    }

    /// 3x3 dilation; pixels outside the image count as false.
    pub fn dilate3(&self) -> BinaryImage {
        self.filter3(false, true)
    }

    /// 3x3 erosion; pixels outside the image count as true so that
    /// content touching the frame edge is not eaten away.
    pub fn erode3(&self) -> BinaryImage {
        self.filter3(true, false)
    }

    pub fn open3(&self) -> BinaryImage {
        self.erode3().dilate3()
    }

    pub fn close3(&self) -> BinaryImage {
        self.dilate3().erode3()
    }

    /// Separable 3x3 OR (dilate) or AND (erode).
    fn filter3(&self, outside: bool, dilate: bool) -> BinaryImage {
        let (w, h) = (self.width as usize, self.height as usize);
        let op = |a: bool, b: bool| if dilate { a || b } else { a && b };
        let mut horiz = vec![false; w * h];
        for y in 0..h {
            let row = &self.bits[y * w..(y + 1) * w];
            for x in 0..w {
                let l = if x > 0 { row[x - 1] } else { outside };
                let r = if x + 1 < w { row[x + 1] } else { outside };
                horiz[y * w + x] = op(op(l, row[x]), r);
            }
        }
        let mut bits = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let u = if y > 0 { horiz[(y - 1) * w + x] } else { outside };
                let d = if y + 1 < h { horiz[(y + 1) * w + x] } else { outside };
                bits[y * w + x] = op(op(u, horiz[y * w + x]), d);
            }
        }
        BinaryImage {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Number of true pixels among the 8 neighbours of (x, y).
    pub fn neighbour_count(&self, x: u32, y: u32) -> u8 {
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy) != (0, 0) && self.get_or(x as i64 + dx, y as i64 + dy, false) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Labels connected components of true pixels. Returns a label per pixel
    /// (0 = background, components numbered from 1 in scan order) and the
    /// area of each component (index 0 unused).
    pub fn label_components(&self, conn: Connectivity) -> (Vec<u32>, Vec<usize>) {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut labels = vec![0u32; self.bits.len()];
        let mut areas = vec![0usize];
        let mut stack = Vec::new();
        let offsets: &[(i64, i64)] = match conn {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        };
        for start in 0..self.bits.len() {
            if !self.bits[start] || labels[start] != 0 {
                continue;
            }
            let label = areas.len() as u32;
            let mut area = 0;
            labels[start] = label;
            stack.push(start);
            while let Some(i) = stack.pop() {
                area += 1;
                let (x, y) = ((i as i64) % w, (i as i64) / w);
                for &(dx, dy) in offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if self.bits[j] && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
            areas.push(area);
        }
        (labels, areas)
    }

    /// Keeps only pixels whose component label satisfies `keep`.
    pub fn select_components(labels: &[u32], width: u32, height: u32, keep: impl Fn(u32) -> bool) -> BinaryImage {
        BinaryImage {
            width,
            height,
            bits: labels.iter().map(|&l| l != 0 && keep(l)).collect(),
        }
    }

    /// Fills every background region that does not touch the image border.
    pub fn fill_holes(&self) -> BinaryImage {
        let outside = self.not();
        let (labels, areas) = outside.label_components(Connectivity::Four);
        let mut touches = vec![false; areas.len()];
        let (w, h) = (self.width as usize, self.height as usize);
        for x in 0..w {
            touches[labels[x] as usize] = true;
            touches[labels[(h - 1) * w + x] as usize] = true;
        }
        for y in 0..h {
            touches[labels[y * w] as usize] = true;
            touches[labels[y * w + w - 1] as usize] = true;
        }
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: labels
                .iter()
                .zip(self.bits.iter())
                .map(|(&l, &b)| b || (l != 0 && !touches[l as usize]))
                .collect(),
        }
    }

    /// True pixels with at least one 4-neighbour that is false or outside
    /// the image.
    pub fn outline(&self) -> BinaryImage {
        let mut out = BinaryImage::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                let (xi, yi) = (x as i64, y as i64);
                let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(dx, dy)| !self.get_or(xi + dx, yi + dy, false));
                out.set(x, y, edge);
            }
        }
        out
    }

    /// Nearest-neighbour zoom about the image centre; the output keeps the
    /// input dimensions. A factor above 1 magnifies content.
    pub fn zoom_nearest(&self, factor: f64) -> BinaryImage {
        let source = |i: u32, len: u32| -> Option<usize> {
            let c = len as f64 / 2.0;
            let s = ((i as f64 + 0.5 - c) / factor + c).floor();
            (s >= 0.0 && s < len as f64).then_some(s as usize)
        };
        let xs: Vec<Option<usize>> = (0..self.width).map(|x| source(x, self.width)).collect();
        let w = self.width as usize;
        let mut bits = vec![false; self.bits.len()];
        for y in 0..self.height {
            if let Some(sy) = source(y, self.height) {
                let src = &self.bits[sy * w..(sy + 1) * w];
                let dst = &mut bits[y as usize * w..(y as usize + 1) * w];
                for (d, sx) in dst.iter_mut().zip(&xs) {
                    *d = sx.is_some_and(|sx| src[sx]);
                }
            }
        }
        BinaryImage {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Moves content by (dx, dy); vacated pixels are false.
    pub fn translate(&self, dx: i64, dy: i64) -> BinaryImage {
        BinaryImage::from_fn(self.width, self.height, |x, y| {
            self.get_or(x as i64 - dx, y as i64 - dy, false)
        })
    }

    pub fn to_luma_image(&self) -> image::GrayImage {
        let buf = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        image::GrayImage::from_raw(self.width, self.height, buf).expect("buffer sized from image")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_rejects_wrong_pixel_count() {
        assert!(Raster::new(4, 4, vec![[0; 3]; 15]).is_err());
        assert!(Raster::new(0, 4, vec![]).is_err());
    }

    #[test]
    fn luminance_extremes() {
        assert_eq!(luminance([0, 0, 0]), 0);
        assert_eq!(luminance([255, 255, 255]), 255);
    }

    #[test]
    fn fill_holes_ignores_border_touching_regions() {
        // ring around a 3x3 hole; the outside reaches the border
        let ring = BinaryImage::from_fn(9, 9, |x, y| {
            (2..=6).contains(&x) && (2..=6).contains(&y) && !((3..=5).contains(&x) && (3..=5).contains(&y))
        });
        let filled = ring.fill_holes();
        assert!(filled.get(4, 4));
        assert_eq!(filled.count(), 25);
        assert!(!filled.get(0, 0));
    }

    #[test]
    fn components_four_vs_eight() {
        let diag = BinaryImage::from_fn(3, 3, |x, y| x == y);
        assert_eq!(diag.label_components(Connectivity::Four).1.len() - 1, 3);
        assert_eq!(diag.label_components(Connectivity::Eight).1.len() - 1, 1);
    }

    #[test]
    fn closing_is_extensive_at_the_border() {
        let b = BinaryImage::from_fn(6, 6, |x, _| x < 2);
        assert_eq!(b.close3(), b);
        assert_eq!(b.open3(), b);
    }

    #[test]
    fn zoom_by_one_is_identity() {
        let b = BinaryImage::from_fn(20, 10, |x, y| (x * 7 + y * 3) % 5 == 0);
        assert_eq!(b.zoom_nearest(1.0), b);
    }
}
