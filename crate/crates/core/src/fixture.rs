//! Synthetic text fixtures rendered from a built-in 5x7 bitmap font.
//!
//! Every glyph is drawn with orthogonally connected strokes so that each
//! character forms a single 4-connected component at any scale.

use thiserror::Error;

use crate::raster::GrayImage;
use crate::region::BoundingBox;

pub const GLYPH_COLS: u32 = 5;
pub const GLYPH_ROWS: u32 = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("fixture text is empty")]
    EmptyText,
    #[error("unsupported character {0:?} (font covers A-Z, 0-9 and space)")]
    UnsupportedChar(char),
    #[error("glyph height {0} is not a positive multiple of {GLYPH_ROWS}")]
    InvalidHeight(u32),
    #[error("text needs a {needed_w}x{needed_h} area at ({x},{y}) but the canvas is {width}x{height}")]
    OutOfCanvas { needed_w: u32, needed_h: u32, x: u32, y: u32, width: u32, height: u32 },
    #[error("text contains no ink")]
    NoInk,
}

fn glyph(c: char) -> Option<[&'static str; 7]> {
    Some(match c {
        'A' => ["#####", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"],
        'B' => ["####.", "#..#.", "#..#.", "#####", "#...#", "#...#", "#####"],
        'C' => ["#####", "#....", "#....", "#....", "#....", "#....", "#####"],
        'D' => ["####.", "#..##", "#...#", "#...#", "#...#", "#..##", "####."],
        'E' => ["#####", "#....", "#....", "####.", "#....", "#....", "#####"],
        'F' => ["#####", "#....", "#....", "####.", "#....", "#....", "#...."],
        'G' => ["#####", "#....", "#....", "#..##", "#...#", "#...#", "#####"],
        'H' => ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"],
        'I' => ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"],
        'J' => ["#####", "...#.", "...#.", "...#.", "...#.", "#..#.", "####."],
        'K' => ["#...#", "#...#", "#..##", "####.", "#..##", "#...#", "#...#"],
        'L' => ["#....", "#....", "#....", "#....", "#....", "#....", "#####"],
        'M' => ["#####", "#.#.#", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"],
        'N' => ["##..#", "##..#", "###.#", "#.#.#", "#.###", "#..##", "#..##"],
        'O' | '0' => ["#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"],
        'P' => ["#####", "#...#", "#...#", "#####", "#....", "#....", "#...."],
        'Q' => ["#####", "#...#", "#...#", "#...#", "#...#", "#####", "....#"],
        'R' => ["#####", "#...#", "#...#", "#####", "#..#.", "#..##", "#...#"],
        'S' | '5' => ["#####", "#....", "#....", "#####", "....#", "....#", "#####"],
        'T' => ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."],
        'U' => ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"],
        'V' => ["#...#", "#...#", "#...#", "##.##", ".#.#.", ".###.", "..#.."],
        'W' => ["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", "#####"],
        'X' => ["#...#", "#...#", "##.##", ".###.", "##.##", "#...#", "#...#"],
        'Y' => ["#...#", "#...#", "##.##", ".###.", "..#..", "..#..", "..#.."],
        'Z' => ["#####", "....#", "...##", "..##.", ".##..", "##...", "#####"],
        '1' => ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", "#####"],
        '2' => ["#####", "....#", "....#", "#####", "#....", "#....", "#####"],
        '3' => ["#####", "....#", "....#", "#####", "....#", "....#", "#####"],
        '4' => ["#...#", "#...#", "#...#", "#####", "....#", "....#", "....#"],
        '6' => ["#####", "#....", "#....", "#####", "#...#", "#...#", "#####"],
        '7' => ["#####", "....#", "....#", "....#", "....#", "....#", "....#"],
        '8' => ["#####", "#...#", "#...#", "#####", "#...#", "#...#", "#####"],
        '9' => ["#####", "#...#", "#...#", "#####", "....#", "....#", "#####"],
        ' ' => [".....", ".....", ".....", ".....", ".....", ".....", "....."],
        _ => return None,
    })
}

pub fn is_supported(c: char) -> bool {
    glyph(c).is_some()
}

/// Draws `text` black on `canvas` with every font column `col_px` wide and
/// every font row `row_px` tall, glyphs separated by one blank font column.
/// Returns the tight box around the ink.
pub fn draw_text(canvas: &mut GrayImage, text: &str, origin: (u32, u32), col_px: u32, row_px: u32) -> Result<BoundingBox, FixtureError> {
    if text.is_empty() {
        return Err(FixtureError::EmptyText);
    }
    let glyphs = text
        .chars()
        .map(|c| glyph(c).ok_or(FixtureError::UnsupportedChar(c)))
        .collect::<Result<Vec<_>, _>>()?;
    let n = glyphs.len() as u32;
    let needed_w = (n * GLYPH_COLS + (n - 1)) * col_px;
    let needed_h = GLYPH_ROWS * row_px;
    let (x0, y0) = origin;
    if x0 as u64 + needed_w as u64 > canvas.width() as u64 || y0 as u64 + needed_h as u64 > canvas.height() as u64 {
        return Err(FixtureError::OutOfCanvas {
            needed_w,
            needed_h,
            x: x0,
            y: y0,
            width: canvas.width(),
            height: canvas.height(),
        });
    }
    let mut ink: Option<BoundingBox> = None;
    for (i, rows) in glyphs.iter().enumerate() {
        let gx = x0 + i as u32 * (GLYPH_COLS + 1) * col_px;
        for (r, row) in rows.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                if ch != '#' {
                    continue;
                }
                let cell = BoundingBox::new(gx + c as u32 * col_px, y0 + r as u32 * row_px, col_px, row_px);
                for y in cell.y..cell.bottom() {
                    for x in cell.x..cell.right() {
                        canvas.set(x, y, 0);
                    }
                }
                ink = Some(ink.map_or(cell, |b| b.union(&cell)));
            }
        }
    }
    ink.ok_or(FixtureError::NoInk)
}

/// Black-on-white rendering of `text` at `glyph_height` (a multiple of 7) on
/// a white canvas, with the ground-truth ink box.
pub fn render_text_fixture(
    text: &str,
    glyph_height: u32,
    position: (u32, u32),
    canvas: (u32, u32),
) -> Result<(GrayImage, BoundingBox), FixtureError> {
    if glyph_height == 0 || !glyph_height.is_multiple_of(GLYPH_ROWS) {
        return Err(FixtureError::InvalidHeight(glyph_height));
    }
    let scale = glyph_height / GLYPH_ROWS;
    if canvas.0 == 0 || canvas.1 == 0 {
        return Err(FixtureError::OutOfCanvas {
            needed_w: 0,
            needed_h: glyph_height,
            x: position.0,
            y: position.1,
            width: canvas.0,
            height: canvas.1,
        });
    }
    let mut img = GrayImage::filled(canvas.0, canvas.1, 255);
    let truth = draw_text(&mut img, text, position, scale, scale)?;
    Ok((img, truth))
}

/// Width in pixels of `chars` glyphs at integer `scale`.
pub fn text_width(chars: u32, scale: u32) -> u32 {
    (chars * GLYPH_COLS + chars.saturating_sub(1)) * scale
}
