//! Face-region geometry: reference rescaling, margin expansion, the
//! two-box/three-crop derivation and the 224×224 squeeze.
//!
//! Box corners are stored exactly as supplied. Only the x axis is normalized
//! (`corner_a.x <= corner_b.x`); the y ordering is kept so that the corner-wise
//! offset arithmetic reproduces hand-worked coordinates verbatim regardless of
//! which way the y axis points. Conversion to a min/max pixel rectangle happens
//! only when pixels are read.
//!
//! Coordinates are pixel indices: a rectangle `x_min..=x_max` covers
//! `x_max - x_min + 1` pixels, while the geometric width of a box is
//! `x_max - x_min`.

use std::fmt;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the square frame at which the crop offset is defined.
pub const REFERENCE_SIZE: u32 = 816;
/// Nominal corner offset, in reference-resolution pixels.
pub const DEFAULT_DELTA: u32 = 100;
/// Classifier input side length.
pub const CROP_SIZE: u32 = 224;

/// An RGB8 raster with a non-zero size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    image: RgbImage,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "frame must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(Error::InvalidInput(format!(
                "{width}x{height} RGB frame needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        let image = RgbImage::from_raw(width, height, pixels)
            .expect("buffer length checked against dimensions");
        Ok(Frame { image })
    }

    pub fn from_image(image: RgbImage) -> Result<Self> {
        if image.width() == 0 || image.height() == 0 {
            return Err(Error::InvalidInput(format!(
                "frame must be at least 1x1, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Ok(Frame { image })
    }

    /// Decodes an image file (any supported format) into an RGB frame.
    pub fn open(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let image = image::open(path).map_err(|e| Error::image(path, e))?;
        Frame::from_image(image.to_rgb8())
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        Frame::from_image(RgbImage::from_pixel(width, height, image::Rgb(rgb)))
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn pixels(&self) -> &[u8] {
        self.image.as_raw()
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    pub fn into_image(self) -> RgbImage {
        self.image
    }

    fn full_rect(&self) -> PixelRect {
        PixelRect {
            x_min: 0,
            y_min: 0,
            x_max: self.width() as i32 - 1,
            y_max: self.height() as i32 - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    fn offset(self, d: i32) -> Self {
        Point::new(self.x + d, self.y + d)
    }
}

/// A face region given by two corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceBox {
    corner_a: Point,
    corner_b: Point,
}

impl FaceBox {
    /// Builds a box from two corners, swapping them if needed so that
    /// `corner_a.x <= corner_b.x`. The y coordinates travel with their corner.
    pub fn new(a: Point, b: Point) -> Self {
        if a.x <= b.x {
            FaceBox { corner_a: a, corner_b: b }
        } else {
            FaceBox { corner_a: b, corner_b: a }
        }
    }

    pub fn from_coords(x_a: i32, y_a: i32, x_b: i32, y_b: i32) -> Self {
        FaceBox::new(Point::new(x_a, y_a), Point::new(x_b, y_b))
    }

    pub fn corner_a(&self) -> Point {
        self.corner_a
    }

    pub fn corner_b(&self) -> Point {
        self.corner_b
    }

    /// `(x_a, y_a, x_b, y_b)` in storage order.
    pub fn coords(&self) -> (i32, i32, i32, i32) {
        (self.corner_a.x, self.corner_a.y, self.corner_b.x, self.corner_b.y)
    }

    pub fn width(&self) -> u32 {
        self.corner_a.x.abs_diff(self.corner_b.x)
    }

    pub fn height(&self) -> u32 {
        self.corner_a.y.abs_diff(self.corner_b.y)
    }

    pub fn rect(&self) -> PixelRect {
        PixelRect {
            x_min: self.corner_a.x.min(self.corner_b.x),
            y_min: self.corner_a.y.min(self.corner_b.y),
            x_max: self.corner_a.x.max(self.corner_b.x),
            y_max: self.corner_a.y.max(self.corner_b.y),
        }
    }

    /// The same box moved by `(dx, dy)`.
    pub fn shifted(&self, dx: i32, dy: i32) -> FaceBox {
        FaceBox {
            corner_a: Point::new(self.corner_a.x + dx, self.corner_a.y + dy),
            corner_b: Point::new(self.corner_b.x + dx, self.corner_b.y + dy),
        }
    }

    fn clamp_to(&self, width: u32, height: u32) -> FaceBox {
        let clamp = |p: Point| {
            Point::new(
                p.x.clamp(0, width as i32 - 1),
                p.y.clamp(0, height as i32 - 1),
            )
        };
        FaceBox::new(clamp(self.corner_a), clamp(self.corner_b))
    }
}

impl fmt::Display for FaceBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) & ({}, {})",
            self.corner_a.x, self.corner_a.y, self.corner_b.x, self.corner_b.y
        )
    }
}

/// Inclusive min/max pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelRect {
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
}

impl PixelRect {
    /// Smallest rectangle containing both.
    pub fn union(&self, other: &PixelRect) -> PixelRect {
        PixelRect {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    fn clamp_to(&self, bounds: PixelRect) -> PixelRect {
        PixelRect {
            x_min: self.x_min.clamp(bounds.x_min, bounds.x_max),
            y_min: self.y_min.clamp(bounds.y_min, bounds.y_max),
            x_max: self.x_max.clamp(bounds.x_min, bounds.x_max),
            y_max: self.y_max.clamp(bounds.y_min, bounds.y_max),
        }
    }

    fn has_extent(&self) -> bool {
        self.x_max > self.x_min && self.y_max > self.y_min
    }

    fn pixel_width(&self) -> u32 {
        (self.x_max - self.x_min + 1) as u32
    }

    fn pixel_height(&self) -> u32 {
        (self.y_max - self.y_min + 1) as u32
    }
}

impl fmt::Display for PixelRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x∈[{}, {}], y∈[{}, {}]",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CropPosition {
    Left,
    Middle,
    Right,
}

impl CropPosition {
    pub const ALL: [CropPosition; 3] = [CropPosition::Left, CropPosition::Middle, CropPosition::Right];
}

impl fmt::Display for CropPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CropPosition::Left => "left",
            CropPosition::Middle => "middle",
            CropPosition::Right => "right",
        })
    }
}

/// Left and right boxes derived from an expanded face box, plus their overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxTriple {
    pub left_box: FaceBox,
    pub right_box: FaceBox,
    pub middle: FaceBox,
    /// Offset actually applied, after the small-face reduction.
    pub delta: u32,
}

impl BoxTriple {
    pub fn get(&self, position: CropPosition) -> &FaceBox {
        match position {
            CropPosition::Left => &self.left_box,
            CropPosition::Middle => &self.middle,
            CropPosition::Right => &self.right_box,
        }
    }
}

/// The three squeezed crops, ordered (Left, Middle, Right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CropSet {
    pub regions: BoxTriple,
    pub images: [RgbImage; 3],
}

/// Per-axis factors mapping native frame coordinates onto the reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScale {
    pub sx: f64,
    pub sy: f64,
}

impl ReferenceScale {
    pub fn for_frame(frame: &Frame) -> Self {
        ReferenceScale {
            sx: f64::from(REFERENCE_SIZE) / f64::from(frame.width()),
            sy: f64::from(REFERENCE_SIZE) / f64::from(frame.height()),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sx == 1.0 && self.sy == 1.0
    }

    /// Maps a native-resolution box into reference coordinates, corner-wise.
    pub fn to_reference(&self, face: &FaceBox) -> FaceBox {
        let max = REFERENCE_SIZE as i32 - 1;
        let map = |p: Point| {
            Point::new(
                ((f64::from(p.x) * self.sx).round() as i32).clamp(0, max),
                ((f64::from(p.y) * self.sy).round() as i32).clamp(0, max),
            )
        };
        FaceBox::new(map(face.corner_a), map(face.corner_b))
    }

    /// Inverse of [`ReferenceScale::to_reference`], rounded to the nearest pixel.
    pub fn to_native(&self, face: &FaceBox, frame_width: u32, frame_height: u32) -> FaceBox {
        let map = |p: Point| {
            Point::new(
                ((f64::from(p.x) / self.sx).round() as i32).clamp(0, frame_width as i32 - 1),
                ((f64::from(p.y) / self.sy).round() as i32).clamp(0, frame_height as i32 - 1),
            )
        };
        FaceBox::new(map(face.corner_a), map(face.corner_b))
    }
}

/// Rescales a frame to `REFERENCE_SIZE`×`REFERENCE_SIZE` with bilinear sampling.
/// A frame already at the reference size is returned unchanged.
pub fn normalize_to_reference(frame: &Frame) -> Frame {
    if frame.width() == REFERENCE_SIZE && frame.height() == REFERENCE_SIZE {
        return frame.clone();
    }
    let image = resample_bilinear(frame.image(), frame.full_rect(), REFERENCE_SIZE, REFERENCE_SIZE);
    Frame { image }
}

/// The pixels of `normalize_to_reference(frame)` inside `window` (reference
/// coordinates, clamped to the reference frame), computed without resampling
/// the rest of the frame.
pub fn reference_window(frame: &Frame, window: PixelRect) -> Frame {
    let max = REFERENCE_SIZE as i32 - 1;
    let w = PixelRect {
        x_min: window.x_min.clamp(0, max),
        y_min: window.y_min.clamp(0, max),
        x_max: window.x_max.clamp(0, max),
        y_max: window.y_max.clamp(0, max),
    };
    let xs = w.x_min as usize..=w.x_max as usize;
    let ys = w.y_min as usize..=w.y_max as usize;
    let image = if frame.width() == REFERENCE_SIZE && frame.height() == REFERENCE_SIZE {
        copy_region(frame.image(), w)
    } else {
        let xt = taps(frame.width(), REFERENCE_SIZE);
        let yt = taps(frame.height(), REFERENCE_SIZE);
        resample_with_taps(frame.image(), 0, 0, &xt[xs], &yt[ys])
    };
    Frame { image }
}

/// Rescales a frame and its detections to the reference resolution together.
pub fn normalize_with_boxes(frame: &Frame, boxes: &[FaceBox]) -> (Frame, Vec<FaceBox>) {
    let scale = ReferenceScale::for_frame(frame);
    let boxes = boxes.iter().map(|b| scale.to_reference(b)).collect();
    (normalize_to_reference(frame), boxes)
}

/// Grows a detected box by half its width on each side and half its height
/// above (toward smaller y), then clamps it to the frame.
///
/// Half extents are floored, which is the same as rounding the new edges
/// toward the frame interior.
pub fn expand_margin(face: &FaceBox, frame: &Frame) -> FaceBox {
    expand_margin_within(face, frame.width(), frame.height())
}

/// [`expand_margin`] for a frame known only by its size.
pub fn expand_margin_within(face: &FaceBox, width: u32, height: u32) -> FaceBox {
    let half_w = (face.width() / 2) as i32;
    let half_h = (face.height() / 2) as i32;

    let mut a = face.corner_a;
    let mut b = face.corner_b;
    a.x -= half_w;
    b.x += half_w;
    if a.y <= b.y {
        a.y -= half_h;
    } else {
        b.y -= half_h;
    }
    FaceBox::new(a, b).clamp_to(width, height)
}

/// Offset actually applied for a box of the given extent.
///
/// The nominal offset is kept whenever the middle crop stays non-empty
/// (`min_dim > 2 * nominal`). Smaller boxes fall back to
/// `min(nominal, floor(min_dim / 4))`, which leaves three distinct crops
/// down to a 4-pixel box.
pub fn effective_delta(width: u32, height: u32, nominal: u32) -> u32 {
    let min_dim = width.min(height);
    if u64::from(min_dim) > 2 * u64::from(nominal) {
        nominal
    } else {
        nominal.min(min_dim / 4)
    }
}

/// Derives the left, right and middle boxes with corner-wise offsets:
/// left = (a, b − δ), right = (a + δ, b), middle = (a + δ, b − δ).
pub fn make_box_triple(expanded: &FaceBox, delta_nominal: u32) -> Result<BoxTriple> {
    let (w, h) = (expanded.width(), expanded.height());
    if w == 0 || h == 0 {
        return Err(Error::InvalidInput(format!(
            "expanded box {expanded} has non-positive extent {w}x{h}"
        )));
    }
    let delta = effective_delta(w, h, delta_nominal);
    if delta == 0 {
        log::warn!("box {expanded} is too small for distinct crops; using the full box three times");
    }
    let d = delta as i32;
    let (a, b) = (expanded.corner_a, expanded.corner_b);
    Ok(BoxTriple {
        left_box: FaceBox::new(a, b.offset(-d)),
        right_box: FaceBox::new(a.offset(d), b),
        middle: FaceBox::new(a.offset(d), b.offset(-d)),
        delta,
    })
}

/// Clamps one box to the frame and squeezes it to `CROP_SIZE`×`CROP_SIZE`.
pub fn squeeze_region(frame: &Frame, face: &FaceBox, position: CropPosition) -> Result<RgbImage> {
    let rect = face.rect();
    let clamped = rect.clamp_to(frame.full_rect());
    if !clamped.has_extent() {
        return Err(Error::DegenerateCrop {
            position,
            region: rect.to_string(),
        });
    }
    Ok(resample_bilinear(frame.image(), clamped, CROP_SIZE, CROP_SIZE))
}

/// Extracts the three crops of a triple and squeezes each to 224×224,
/// ignoring aspect ratio.
pub fn extract_and_squeeze(frame: &Frame, triple: &BoxTriple) -> Result<CropSet> {
    let left = squeeze_region(frame, &triple.left_box, CropPosition::Left)?;
    let middle = squeeze_region(frame, &triple.middle, CropPosition::Middle)?;
    let right = squeeze_region(frame, &triple.right_box, CropPosition::Right)?;
    Ok(CropSet {
        regions: *triple,
        images: [left, middle, right],
    })
}

struct Tap {
    i0: usize,
    i1: usize,
    frac: f32,
}

fn taps(src_len: u32, dst_len: u32) -> Vec<Tap> {
    let ratio = f64::from(src_len) / f64::from(dst_len);
    let last = src_len as usize - 1;
    (0..dst_len)
        .map(|d| {
            let s = ((f64::from(d) + 0.5) * ratio - 0.5).clamp(0.0, last as f64);
            let i0 = s.floor() as usize;
            Tap {
                i0,
                i1: (i0 + 1).min(last),
                frac: (s - i0 as f64) as f32,
            }
        })
        .collect()
}

/// Bilinear resample of `region` (inclusive, already inside `src`) to `out_w`×`out_h`.
/// Sample points are aligned on pixel centers, so a same-size resample is an exact copy.
pub(crate) fn resample_bilinear(src: &RgbImage, region: PixelRect, out_w: u32, out_h: u32) -> RgbImage {
    if region.pixel_width() == out_w && region.pixel_height() == out_h {
        return copy_region(src, region);
    }
    let xt = taps(region.pixel_width(), out_w);
    let yt = taps(region.pixel_height(), out_h);
    resample_with_taps(src, region.x_min as usize, region.y_min as usize, &xt, &yt)
}

fn copy_region(src: &RgbImage, region: PixelRect) -> RgbImage {
    let (w, h) = (region.pixel_width(), region.pixel_height());
    let stride = src.width() as usize * 3;
    let raw = src.as_raw();
    let mut out = Vec::with_capacity(w as usize * h as usize * 3);
    for y in region.y_min as usize..=region.y_max as usize {
        let start = y * stride + region.x_min as usize * 3;
        out.extend_from_slice(&raw[start..start + w as usize * 3]);
    }
    RgbImage::from_raw(w, h, out).expect("sized buffer")
}

fn resample_with_taps(src: &RgbImage, x0: usize, y0: usize, xt: &[Tap], yt: &[Tap]) -> RgbImage {
    let (out_w, out_h) = (xt.len(), yt.len());
    let stride = src.width() as usize * 3;
    let raw = src.as_raw();
    // Byte offsets of the two source columns for every output column.
    let cols: Vec<(usize, usize, f32)> = xt
        .iter()
        .map(|t| ((x0 + t.i0) * 3, (x0 + t.i1) * 3, t.frac))
        .collect();
    let mut out = vec![0u8; out_w * out_h * 3];
    for (out_row, ty) in out.chunks_exact_mut(out_w * 3).zip(yt) {
        let row0 = &raw[(y0 + ty.i0) * stride..(y0 + ty.i0 + 1) * stride];
        let row1 = &raw[(y0 + ty.i1) * stride..(y0 + ty.i1 + 1) * stride];
        for (px, &(c0, c1, fx)) in out_row.chunks_exact_mut(3).zip(&cols) {
            let (a0, a1) = (&row0[c0..c0 + 3], &row0[c1..c1 + 3]);
            let (b0, b1) = (&row1[c0..c0 + 3], &row1[c1..c1 + 3]);
            for c in 0..3 {
                let top = lerp(a0[c], a1[c], fx);
                let bottom = lerp(b0[c], b1[c], fx);
                let v = top + (bottom - top) * ty.frac;
                px[c] = (v + 0.5).clamp(0.0, 255.0) as u8;
            }
        }
    }
    RgbImage::from_raw(out_w as u32, out_h as u32, out).expect("sized buffer")
}

#[inline]
fn lerp(a: u8, b: u8, t: f32) -> f32 {
    let a = f32::from(a);
    a + (f32::from(b) - a) * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_frame(w: u32, h: u32) -> Frame {
        let img = RgbImage::from_fn(w, h, |x, y| {
            image::Rgb([(x % 256) as u8, (y % 256) as u8, ((x * 7 + y * 13) % 256) as u8])
        });
        Frame::from_image(img).unwrap()
    }

    #[test]
    fn frame_rejects_zero_dimensions() {
        assert!(matches!(Frame::new(0, 5, vec![]), Err(Error::InvalidInput(_))));
        assert!(Frame::from_image(RgbImage::new(4, 0)).is_err());
        assert!(Frame::new(2, 2, vec![0; 11]).is_err());
    }

    #[test]
    fn normalize_250_to_reference() {
        let out = normalize_to_reference(&gradient_frame(250, 250));
        assert_eq!((out.width(), out.height()), (816, 816));
    }

    #[test]
    fn normalize_reference_is_identity() {
        let frame = gradient_frame(816, 816);
        assert_eq!(normalize_to_reference(&frame), frame);
    }

    #[test]
    fn normalize_rescales_boxes_per_axis() {
        let frame = gradient_frame(1632, 816);
        let (out, boxes) = normalize_with_boxes(&frame, &[FaceBox::from_coords(200, 100, 400, 300)]);
        assert_eq!((out.width(), out.height()), (816, 816));
        assert_eq!(boxes[0].coords(), (100, 100, 200, 300));
    }

    #[test]
    fn expand_margin_examples() {
        let frame = gradient_frame(816, 816);
        let expanded = expand_margin(&FaceBox::from_coords(100, 400, 300, 600), &frame);
        assert_eq!(expanded.coords(), (0, 300, 400, 600));

        let expanded = expand_margin(&FaceBox::from_coords(10, 60, 110, 160), &frame);
        assert_eq!(expanded.coords(), (0, 10, 160, 160));

        let expanded = expand_margin(&FaceBox::from_coords(0, 0, 815, 815), &frame);
        assert_eq!(expanded.coords(), (0, 0, 815, 815));
    }

    #[test]
    fn expand_margin_grows_toward_smaller_y_for_either_storage_order() {
        let frame = gradient_frame(816, 816);
        let expanded = expand_margin(&FaceBox::from_coords(100, 600, 300, 400), &frame);
        assert_eq!(expanded.coords(), (0, 600, 400, 300));
    }

    #[test]
    fn expand_margin_floors_odd_extents() {
        let frame = gradient_frame(816, 816);
        let expanded = expand_margin(&FaceBox::from_coords(200, 200, 301, 303), &frame);
        // half extents 50 and 51
        assert_eq!(expanded.coords(), (150, 149, 351, 303));
    }

    #[test]
    fn box_triple_worked_example() {
        let expanded = FaceBox::from_coords(211, 623, 702, 310);
        let t = make_box_triple(&expanded, DEFAULT_DELTA).unwrap();
        assert_eq!(t.delta, 100);
        assert_eq!(t.left_box.coords(), (211, 623, 602, 210));
        assert_eq!(t.right_box.coords(), (311, 723, 702, 310));
        assert_eq!(t.middle.coords(), (311, 723, 602, 210));
    }

    #[test]
    fn box_triple_symmetric_case() {
        let t = make_box_triple(&FaceBox::from_coords(0, 0, 400, 400), 100).unwrap();
        assert_eq!(t.left_box.coords(), (0, 0, 300, 300));
        assert_eq!(t.right_box.coords(), (100, 100, 400, 400));
        assert_eq!(t.middle.coords(), (100, 100, 300, 300));
    }

    #[test]
    fn box_triple_small_face_reduces_delta() {
        let t = make_box_triple(&FaceBox::from_coords(0, 0, 150, 150), 100).unwrap();
        assert_eq!(t.delta, 37);
        assert_eq!((t.middle.width(), t.middle.height()), (76, 76));
    }

    #[test]
    fn box_triple_tiny_face_replicates_full_box() {
        let b = FaceBox::from_coords(5, 5, 8, 9);
        let t = make_box_triple(&b, 100).unwrap();
        assert_eq!(t.delta, 0);
        assert_eq!((t.left_box, t.middle, t.right_box), (b, b, b));
    }

    #[test]
    fn box_triple_rejects_flat_boxes() {
        assert!(make_box_triple(&FaceBox::from_coords(10, 10, 10, 50), 100).is_err());
        assert!(make_box_triple(&FaceBox::from_coords(10, 10, 50, 10), 100).is_err());
    }

    #[test]
    fn squeeze_constant_region_stays_constant() {
        let frame = Frame::filled(600, 600, [90, 90, 90]).unwrap();
        let img = squeeze_region(&frame, &FaceBox::from_coords(10, 10, 457, 457), CropPosition::Left).unwrap();
        assert_eq!(img.dimensions(), (224, 224));
        assert!(img.pixels().all(|p| p.0 == [90, 90, 90]));
    }

    #[test]
    fn squeeze_same_size_region_is_bit_identical() {
        let frame = gradient_frame(300, 300);
        let img = squeeze_region(&frame, &FaceBox::from_coords(20, 30, 243, 253), CropPosition::Middle).unwrap();
        for (x, y, p) in img.enumerate_pixels() {
            assert_eq!(p, frame.image().get_pixel(x + 20, y + 30));
        }
    }

    #[test]
    fn worked_example_left_crop_region() {
        let t = make_box_triple(&FaceBox::from_coords(211, 623, 702, 310), 100).unwrap();
        assert_eq!(
            t.left_box.rect(),
            PixelRect { x_min: 211, y_min: 210, x_max: 602, y_max: 623 }
        );
        let frame = gradient_frame(816, 816);
        let crops = extract_and_squeeze(&frame, &t).unwrap();
        let direct = resample_bilinear(frame.image(), t.left_box.rect(), 224, 224);
        assert_eq!(crops.images[0], direct);
    }

    #[test]
    fn degenerate_region_names_the_box() {
        let frame = gradient_frame(100, 100);
        let triple = BoxTriple {
            left_box: FaceBox::from_coords(10, 10, 50, 50),
            right_box: FaceBox::from_coords(150, 150, 200, 200),
            middle: FaceBox::from_coords(20, 20, 40, 40),
            delta: 10,
        };
        match extract_and_squeeze(&frame, &triple) {
            Err(Error::DegenerateCrop { position, .. }) => assert_eq!(position, CropPosition::Right),
            other => panic!("expected degenerate crop, got {other:?}"),
        }
    }

    #[test]
    fn x_ordering_is_normalized_with_y_attached() {
        let b = FaceBox::from_coords(702, 310, 211, 623);
        assert_eq!(b.coords(), (211, 623, 702, 310));
    }

    #[test]
    fn reference_window_matches_full_resample() {
        for (w, h) in [(640, 480), (250, 250), (816, 816), (1000, 900)] {
            let frame = gradient_frame(w, h);
            let full = normalize_to_reference(&frame);
            let window = PixelRect { x_min: 37, y_min: 5, x_max: 500, y_max: 811 };
            let part = reference_window(&frame, window);
            assert_eq!(part.image(), &copy_region(full.image(), window), "{w}x{h}");
        }
    }
}
