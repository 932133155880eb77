//! `FFH1` float rasters: a 16-byte header (magic, u32 width, u32 height,
//! u32 reserved, all little-endian) followed by row-major little-endian f64
//! samples. A `<file>.txt` sidecar records units and gauge.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::raster::ScalarGrid;

pub const MAGIC: &[u8; 4] = b"FFH1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterMeta {
    pub units: String,
    pub gauge: String,
}

impl RasterMeta {
    pub fn new(units: &str, gauge: &str) -> Self {
        RasterMeta {
            units: units.into(),
            gauge: gauge.into(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

pub fn encode(grid: &ScalarGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * grid.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in grid.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<ScalarGrid, String> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err("missing FFH1 header".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h) = (word(4), word(8));
    let body = &bytes[16..];
    if body.len() != 8 * w * h {
        return Err(format!("expected {} sample bytes, found {}", 8 * w * h, body.len()));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarGrid::from_vec(w, h, data).map_err(|e| e.to_string())
}

pub fn write(path: &Path, grid: &ScalarGrid, meta: &RasterMeta) -> Result<()> {
    fs::write(path, encode(grid)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = format!("units = {}\ngauge = {}\n", meta.units, meta.gauge);
    fs::write(&side, text).map_err(|e| Error::io(side, e))
}

pub fn read(path: &Path) -> Result<ScalarGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|r| Error::format("ffh", path, r))
}

pub fn read_meta(path: &Path) -> Result<RasterMeta> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let mut units = None;
    let mut gauge = None;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            match k.trim() {
                "units" => units = Some(v.trim().to_string()),
                "gauge" => gauge = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
    match (units, gauge) {
        (Some(units), Some(gauge)) => Ok(RasterMeta { units, gauge }),
        _ => Err(Error::format("ffh sidecar", side, "needs `units` and `gauge`")),
    }
}
