//! Portable graymap I/O. Masks are written as binary P5 with maxval 255
//! (foreground = 255); intensity rasters use 16-bit P5 (maxval 65535).

use std::fs;
use std::path::Path;

use super::mask::{BinaryMask, ScalarGrid};
use crate::error::{Error, Result};

pub fn encode_mask_p5(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.as_slice().iter().map(|&v| if v { 255u8 } else { 0 }));
    out
}

pub fn encode_mask_p2(mask: &BinaryMask) -> String {
    let mut out = format!("P2\n{} {}\n255\n", mask.width(), mask.height());
    for y in 0..mask.height() {
        let row: Vec<&str> = (0..mask.width())
            .map(|x| if *mask.get(x, y) { "255" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Values are clamped to `[0, 1]` and quantised to 16 bits (big-endian).
pub fn encode_gray16(grid: &ScalarGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", grid.width(), grid.height()).into_bytes();
    for &v in grid.as_slice() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    fs::write(path, encode_mask_p5(mask)).map_err(|e| Error::io(path, e))
}

pub fn write_mask_plain(path: &Path, mask: &BinaryMask) -> Result<()> {
    fs::write(path, encode_mask_p2(mask)).map_err(|e| Error::io(path, e))
}

pub fn write_gray16(path: &Path, grid: &ScalarGrid) -> Result<()> {
    fs::write(path, encode_gray16(grid)).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (grid, maxval) = decode(&bytes).map_err(|r| Error::format("pgm", path, r))?;
    Ok(grid.map(|&v| 2 * v > maxval))
}

/// Reads any P2/P5 graymap as intensities in `[0, 1]`.
pub fn read_gray(path: &Path) -> Result<ScalarGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (grid, maxval) = decode(&bytes).map_err(|r| Error::format("pgm", path, r))?;
    Ok(grid.map(|&v| v as f64 / maxval as f64))
}

fn decode(bytes: &[u8]) -> std::result::Result<(crate::raster::Grid<u32>, u32), String> {
    let mut pos = 0usize;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| s.parse::<u32>().map_err(|_| format!("bad number `{s}`"));
    let width = num(token()?)? as usize;
    let height = num(token()?)? as usize;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let n = width * height;
    let values: Vec<u32> = match magic.as_str() {
        "P5" => {
            // exactly one whitespace byte separates header and raster
            let data = &bytes[pos + 1..];
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            if data.len() < need {
                return Err(format!("raster has {} bytes, need {need}", data.len()));
            }
            if wide {
                data[..need]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                    .collect()
            } else {
                data[..n].iter().map(|&b| b as u32).collect()
            }
        }
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let vals: std::result::Result<Vec<u32>, _> =
                text.split_ascii_whitespace().take(n).map(str::parse).collect();
            let vals = vals.map_err(|_| "bad sample in P2 raster".to_string())?;
            if vals.len() != n {
                return Err(format!("P2 raster has {} samples, need {n}", vals.len()));
            }
            vals
        }
        other => return Err(format!("unsupported magic `{other}`")),
    };
    if values.iter().any(|&v| v > maxval) {
        return Err("sample exceeds maxval".into());
    }
    let grid = crate::raster::Grid::from_vec(width, height, values).map_err(|e| e.to_string())?;
    Ok((grid, maxval))
}
