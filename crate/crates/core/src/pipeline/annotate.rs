use image::{Rgb, RgbImage};

use super::FaceResult;
use crate::boxcrop::{FaceBox, Frame};
use crate::score::Gender;

pub const RED: Rgb<u8> = Rgb([255, 0, 0]);
pub const BLUE: Rgb<u8> = Rgb([0, 0, 255]);

const OUTLINE_PX: i32 = 3;
const GLYPH_SCALE: i32 = 2;

pub fn label_color(label: Gender) -> Rgb<u8> {
    match label {
        Gender::Man => RED,
        Gender::Woman => BLUE,
    }
}

/// Copies the frame and outlines each classified face in its label color,
/// with the label written above the box. Skipped faces are left unmarked.
pub fn annotate_frame(frame: &Frame, faces: &[FaceResult]) -> RgbImage {
    let mut out = frame.image().clone();
    for face in faces {
        if let Some(decision) = face.decision() {
            let color = label_color(decision.label);
            draw_outline(&mut out, &face.detection, color);
            let rect = face.detection.rect();
            let text_h = 7 * GLYPH_SCALE;
            let text_y = if rect.y_min - text_h - 2 >= 0 {
                rect.y_min - text_h - 2
            } else {
                rect.y_min + OUTLINE_PX + 1
            };
            draw_text(&mut out, rect.x_min, text_y, decision.label.as_str(), color);
        }
    }
    out
}

fn put(img: &mut RgbImage, x: i32, y: i32, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

fn draw_outline(img: &mut RgbImage, face: &FaceBox, color: Rgb<u8>) {
    let r = face.rect();
    for t in 0..OUTLINE_PX {
        for x in r.x_min..=r.x_max {
            put(img, x, r.y_min + t, color);
            put(img, x, r.y_max - t, color);
        }
        for y in r.y_min..=r.y_max {
            put(img, r.x_min + t, y, color);
            put(img, r.x_max - t, y, color);
        }
    }
}

// 5x7 glyphs, one byte per row, low five bits used, MSB of those on the left.
fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        _ => [0; 7],
    }
}

fn draw_text(img: &mut RgbImage, x0: i32, y0: i32, text: &str, color: Rgb<u8>) {
    for (i, c) in text.chars().enumerate() {
        let gx = x0 + i as i32 * 6 * GLYPH_SCALE;
        for (row, bits) in glyph(c).iter().enumerate() {
            for col in 0..5 {
                if bits & (0x10 >> col) != 0 {
                    for dy in 0..GLYPH_SCALE {
                        for dx in 0..GLYPH_SCALE {
                            put(img, gx + col * GLYPH_SCALE + dx, y0 + row as i32 * GLYPH_SCALE + dy, color);
                        }
                    }
                }
            }
        }
    }
}
