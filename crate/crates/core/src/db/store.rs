//! Append-only on-disk layout: one directory per record holding
//! `mask.pgm`, `meta.json` and, for records with a tactile profile,
//! `height.ffh`, `gradx.ffh`, `grady.ffh` and `domain.pgm`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::record::{validate_id, FragmentRecord, RecordMeta};
use crate::error::{Error, Result};
use crate::matching::TactileProfile;
use crate::raster::pgm;
use crate::tactile::ffh::{self, RasterMeta};
use crate::tactile::{GradientField, HeightMap};

pub const FORMAT_VERSION: u32 = 1;

/// Records keyed by id. With a root directory every insert is written
/// through before it becomes visible.
#[derive(Debug, Clone, Default)]
pub struct FragmentDb {
    root: Option<PathBuf>,
    records: BTreeMap<String, FragmentRecord>,
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn save(dir: &Path, r: &FragmentRecord) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    pgm::write_mask(&dir.join("mask.pgm"), &r.visual_mask)?;
    if let Some(t) = &r.tactile {
        let slope = RasterMeta::new("height px per lateral px", "none");
        ffh::write(&dir.join("height.ffh"), t.height.values(), &RasterMeta::new("px", "zero mean over domain"))?;
        ffh::write(&dir.join("gradx.ffh"), &t.gradients.gx, &slope)?;
        ffh::write(&dir.join("grady.ffh"), &t.gradients.gy, &slope)?;
        pgm::write_mask(&dir.join("domain.pgm"), t.height.domain())?;
    }
    let meta = RecordMeta {
        format_version: FORMAT_VERSION,
        id: r.id.clone(),
        material: r.material,
        colour: r.colour,
        source_scene: r.source_scene.clone(),
        tactile_missing: r.tactile.is_none(),
        edge: r.tactile.as_ref().map(|t| t.edge.clone()).unwrap_or_default(),
        extrema: r.tactile.as_ref().map(|t| t.extrema.clone()),
    };
    write_json(&dir.join("meta.json"), &meta)
}

fn load(dir: &Path) -> Result<FragmentRecord> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: RecordMeta = serde_json::from_str(&text).map_err(|e| Error::format("record meta", &meta_path, e.to_string()))?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::format("record meta", &meta_path, format!("unsupported format_version {}", meta.format_version)));
    }
    let mask = pgm::read_mask(&dir.join("mask.pgm"))?;
    let tactile = if meta.tactile_missing {
        None
    } else {
        let domain = pgm::read_mask(&dir.join("domain.pgm"))?;
        let height = HeightMap::gauged(ffh::read(&dir.join("height.ffh"))?, domain.clone())?;
        let gradients = GradientField::new(ffh::read(&dir.join("gradx.ffh"))?, ffh::read(&dir.join("grady.ffh"))?, domain)?;
        let extrema = meta
            .extrema
            .clone()
            .ok_or_else(|| Error::format("record meta", &meta_path, "tactile record without extrema"))?;
        Some(TactileProfile {
            edge: meta.edge.clone(),
            gradients,
            height,
            extrema,
        })
    };
    FragmentRecord::new(meta.id, mask, tactile, meta.material, meta.colour, meta.source_scene)
}

impl FragmentDb {
    pub fn in_memory() -> Self {
        FragmentDb::default()
    }

    /// Opens `root`, creating it if absent, and loads every record in it.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let mut dirs: Vec<PathBuf> = fs::read_dir(&root)
            .map_err(|e| Error::io(&root, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(&root, err)))
            .collect::<Result<_>>()?;
        dirs.retain(|p| p.is_dir());
        dirs.sort();
        let mut records = BTreeMap::new();
        for d in dirs {
            let r = load(&d)?;
            let name = d.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name != r.id {
                return Err(Error::format("record", &d, format!("directory holds record `{}`", r.id)));
            }
            records.insert(r.id.clone(), r);
        }
        Ok(FragmentDb {
            root: Some(root),
            records,
        })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn insert(&mut self, record: FragmentRecord) -> Result<String> {
        validate_id(&record.id)?;
        if self.records.contains_key(&record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        record.validate()?;
        if let Some(root) = &self.root {
            let dir = root.join(&record.id);
            if dir.exists() {
                return Err(Error::DuplicateId(record.id));
            }
            save(&dir, &record)?;
        }
        let id = record.id.clone();
        self.records.insert(id.clone(), record);
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<&FragmentRecord> {
        self.records.get(id).ok_or_else(|| Error::UnknownId(id.into()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in id order.
    pub fn records(&self) -> impl Iterator<Item = &FragmentRecord> {
        self.records.values()
    }
}
