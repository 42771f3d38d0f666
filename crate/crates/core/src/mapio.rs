//! Map ingestion and export.
//!
//! Three interchange formats, all deliberately plain:
//!
//! * 2D occupancy maps as binary PGM (P5) images plus a key–value metadata
//!   file (`resolution`, `origin`, `negate`, `occupied_thresh`,
//!   `free_thresh`), following the common map-server convention: pixel value
//!   `v` becomes occupancy probability `p = (255 - v) / 255` (or `v / 255`
//!   when `negate` is set); `p > occupied_thresh` is occupied, `p <
//!   free_thresh` is free, anything between is unknown. Image row 0 is the
//!   highest y index.
//! * 3D voxel maps as `dsp3d v1` text: a header carrying resolution and
//!   origin, then one `x y z s` record per line with `s` in `{F, U, O}`;
//!   unlisted voxels are unknown, duplicates resolve to the last record.
//! * Update streams as JSON lines, one event per line with a strictly
//!   increasing sequence number, a change list, and an optional robot pose.
//!
//! Plus two outputs: planned paths as a JSON document (total cost, voxel
//! count, world polyline) and cost maps as PGM images where darker means
//! costlier.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridBounds, GridError, GridIndex, GridMeta, GridMode, VoxelGrid, VoxelState};
use crate::riskfield::CostField;
use crate::scalar::{cast, Real};

#[derive(Debug, Error)]
pub enum MapIoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {msg}")]
    MalformedHeader { path: String, msg: String },
    #[error("{path}: expected {expected} pixel bytes, found {found}")]
    SizeMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {key} = {value} outside [0, 1]")]
    ThresholdOutOfRange {
        path: String,
        key: String,
        value: f64,
    },
    #[error("{path}:{line}: {msg}")]
    MalformedRecord {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: event times must be strictly increasing")]
    NonMonotoneTime { path: String, line: usize },
    #[error("{0}")]
    Grid(#[from] GridError),
    #[error("{path}: {msg}")]
    Unsupported { path: String, msg: String },
}

/// PGM classification settings carried alongside a 2D map so that saving
/// reproduces the file it was loaded from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmSettings<S> {
    pub negate: bool,
    pub occupied_thresh: S,
    pub free_thresh: S,
}

impl<S: Real> Default for PgmSettings<S> {
    fn default() -> Self {
        Self {
            negate: false,
            occupied_thresh: cast(0.65),
            free_thresh: cast(0.196),
        }
    }
}

/// A grid together with the rectangular region the source file addressed.
#[derive(Debug, Clone)]
pub struct MapDocument<S: Real> {
    pub grid: VoxelGrid<S>,
    pub bounds: GridBounds,
    pub pgm: Option<PgmSettings<S>>,
}

/// One recorded map event: a sequence number, the voxel changes it carries,
/// and an optional robot pose in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateEvent {
    pub t: u64,
    pub changes: Vec<(i32, i32, i32, VoxelState)>,
    pub robot: Option<[f64; 3]>,
}

/// Ordered sequence of map events with strictly increasing `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateStream {
    pub events: Vec<UpdateEvent>,
}

fn path_str(p: &FsPath) -> String {
    p.display().to_string()
}

// ---------------------------------------------------------------------------
// PGM occupancy images

/// Pixel value written for a state so that reloading under the same settings
/// classifies it back: occupied saturates the occupancy probability, free
/// zeroes it, unknown lands midway between the two thresholds.
fn pixel_for_state<S: Real>(s: VoxelState, settings: &PgmSettings<S>) -> u8 {
    let p = match s {
        VoxelState::Occupied => 1.0,
        VoxelState::Free => 0.0,
        VoxelState::Unknown => {
            (settings.free_thresh.to_f64().unwrap() + settings.occupied_thresh.to_f64().unwrap())
                / 2.0
        }
    };
    let v = (255.0 * (1.0 - p)).round() as u8;
    if settings.negate {
        255 - v
    } else {
        v
    }
}

struct Pgm {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

fn read_pgm(path: &FsPath) -> Result<Pgm, MapIoError> {
    let bytes = fs::read(path)?;
    let header_err = |msg: &str| MapIoError::MalformedHeader {
        path: path_str(path),
        msg: msg.to_string(),
    };
    // tokenize the header: magic, width, height, maxval; '#' starts a comment
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 && pos < bytes.len() {
        let b = bytes[pos];
        if b == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
    }
    if tokens.len() < 4 {
        return Err(header_err("truncated header"));
    }
    if tokens[0] != "P5" {
        return Err(header_err(&format!(
            "expected binary PGM magic 'P5', found '{}'",
            tokens[0]
        )));
    }
    let width: usize = tokens[1].parse().map_err(|_| header_err("invalid width"))?;
    let height: usize = tokens[2]
        .parse()
        .map_err(|_| header_err("invalid height"))?;
    let maxval: usize = tokens[3]
        .parse()
        .map_err(|_| header_err("invalid maxval"))?;
    if maxval != 255 {
        return Err(header_err(&format!(
            "unsupported maxval {maxval}, need 255"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(header_err("missing raster separator"));
    }
    pos += 1;
    let data = bytes[pos..].to_vec();
    let expected = width * height;
    if data.len() != expected {
        return Err(MapIoError::SizeMismatch {
            path: path_str(path),
            expected,
            found: data.len(),
        });
    }
    Ok(Pgm {
        width,
        height,
        data,
    })
}

fn write_pgm(path: &FsPath, width: usize, height: usize, data: &[u8]) -> Result<(), MapIoError> {
    debug_assert_eq!(data.len(), width * height);
    let mut out = Vec::with_capacity(data.len() + 32);
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.extend_from_slice(data);
    fs::write(path, out)?;
    Ok(())
}

struct MetaFile<S> {
    resolution: S,
    origin: [S; 3],
    settings: PgmSettings<S>,
}

fn parse_meta<S: Real>(path: &FsPath) -> Result<MetaFile<S>, MapIoError> {
    let text = fs::read_to_string(path)?;
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(MapIoError::MalformedRecord {
                path: path_str(path),
                line: n + 1,
                msg: "expected 'key: value'".to_string(),
            });
        };
        fields.insert(key.trim().to_string(), value.trim().to_string());
    }
    let parse_f64 = |key: &str, default: Option<f64>| -> Result<f64, MapIoError> {
        match fields.get(key) {
            Some(v) => v.parse::<f64>().map_err(|_| MapIoError::MalformedHeader {
                path: path_str(path),
                msg: format!("invalid number for '{key}': {v}"),
            }),
            None => default.ok_or_else(|| MapIoError::MalformedHeader {
                path: path_str(path),
                msg: format!("missing required key '{key}'"),
            }),
        }
    };
    let resolution = parse_f64("resolution", None)?;
    let origin: [f64; 3] = match fields.get("origin") {
        Some(v) => {
            let inner = v.trim().trim_start_matches('[').trim_end_matches(']');
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(MapIoError::MalformedHeader {
                    path: path_str(path),
                    msg: format!("origin must be [x, y, z], found '{v}'"),
                });
            }
            let mut o = [0.0f64; 3];
            for (i, p) in parts.iter().enumerate() {
                o[i] = p.parse().map_err(|_| MapIoError::MalformedHeader {
                    path: path_str(path),
                    msg: format!("invalid origin component '{p}'"),
                })?;
            }
            o
        }
        None => [0.0; 3],
    };
    let negate = parse_f64("negate", Some(0.0))? != 0.0;
    let occupied_thresh = parse_f64("occupied_thresh", Some(0.65))?;
    let free_thresh = parse_f64("free_thresh", Some(0.196))?;
    for (key, value) in [
        ("occupied_thresh", occupied_thresh),
        ("free_thresh", free_thresh),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(MapIoError::ThresholdOutOfRange {
                path: path_str(path),
                key: key.to_string(),
                value,
            });
        }
    }
    Ok(MetaFile {
        resolution: cast(resolution),
        origin: [cast(origin[0]), cast(origin[1]), cast(origin[2])],
        settings: PgmSettings {
            negate,
            occupied_thresh: cast(occupied_thresh),
            free_thresh: cast(free_thresh),
        },
    })
}

/// Classify one pixel under the given settings.
fn classify_pixel<S: Real>(v: u8, settings: &PgmSettings<S>) -> VoxelState {
    let p: S = if settings.negate {
        cast(v as f64 / 255.0)
    } else {
        cast((255.0 - v as f64) / 255.0)
    };
    if p > settings.occupied_thresh {
        VoxelState::Occupied
    } else if p < settings.free_thresh {
        VoxelState::Free
    } else {
        VoxelState::Unknown
    }
}

/// Load a 2D occupancy map from a PGM image and its metadata file.
///
/// Image row 0 maps to the maximum y index (image origin top-left, world
/// origin bottom-left); the grid is 2D with `z = 0` everywhere.
pub fn load_grid2d<S: Real>(
    image_path: impl AsRef<FsPath>,
    meta_path: impl AsRef<FsPath>,
) -> Result<MapDocument<S>, MapIoError> {
    let image_path = image_path.as_ref();
    let meta = parse_meta::<S>(meta_path.as_ref())?;
    let pgm = read_pgm(image_path)?;
    let grid_meta = GridMeta::new(meta.resolution, meta.origin, GridMode::TwoD);
    let mut grid = VoxelGrid::new(grid_meta)?;
    let h = pgm.height as i32;
    let w = pgm.width as i32;
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            let v = pgm.data[(row * w + x) as usize];
            let state = classify_pixel(v, &meta.settings);
            grid.set_state(GridIndex::new(x, y, 0), state)?;
        }
    }
    Ok(MapDocument {
        grid,
        bounds: GridBounds::new(GridIndex::new(0, 0, 0), GridIndex::new(w - 1, h - 1, 0)),
        pgm: Some(meta.settings),
    })
}

/// Save a 2D map document as PGM plus metadata, canonical pixel values.
pub fn save_grid2d<S: Real>(
    doc: &MapDocument<S>,
    image_path: impl AsRef<FsPath>,
    meta_path: impl AsRef<FsPath>,
) -> Result<(), MapIoError> {
    let image_path = image_path.as_ref();
    let b = doc.bounds;
    if b.min.z != b.max.z {
        return Err(MapIoError::Unsupported {
            path: path_str(image_path),
            msg: "PGM export requires a single-layer document".to_string(),
        });
    }
    let settings = doc.pgm.unwrap_or_default();
    let w = (b.max.x - b.min.x + 1) as usize;
    let h = (b.max.y - b.min.y + 1) as usize;
    let mut data = vec![0u8; w * h];
    for row in 0..h as i32 {
        let y = b.max.y - row;
        for col in 0..w as i32 {
            let idx = GridIndex::new(b.min.x + col, y, b.min.z);
            let px = pixel_for_state(doc.grid.get_state(idx), &settings);
            data[(row * w as i32 + col) as usize] = px;
        }
    }
    write_pgm(image_path, w, h, &data)?;

    let meta = doc.grid.meta();
    let mut text = String::new();
    text.push_str(&format!("resolution: {}\n", meta.resolution));
    text.push_str(&format!(
        "origin: [{}, {}, {}]\n",
        meta.origin[0], meta.origin[1], meta.origin[2]
    ));
    text.push_str(&format!("negate: {}\n", u8::from(settings.negate)));
    text.push_str(&format!("occupied_thresh: {}\n", settings.occupied_thresh));
    text.push_str(&format!("free_thresh: {}\n", settings.free_thresh));
    fs::write(meta_path.as_ref(), text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// dsp3d voxel text format

/// Load a 3D voxel map from `dsp3d v1` text.
pub fn load_grid3d<S: Real>(path: impl AsRef<FsPath>) -> Result<MapDocument<S>, MapIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| MapIoError::MalformedHeader {
        path: path_str(path),
        msg: "empty file".to_string(),
    })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != "dsp3d" || tokens[1] != "v1" {
        return Err(MapIoError::MalformedHeader {
            path: path_str(path),
            msg: format!("expected 'dsp3d v1 <resolution> <ox> <oy> <oz>', found '{header}'"),
        });
    }
    let mut nums = [0.0f64; 4];
    for (i, t) in tokens[2..].iter().enumerate() {
        nums[i] = t.parse().map_err(|_| MapIoError::MalformedHeader {
            path: path_str(path),
            msg: format!("invalid header number '{t}'"),
        })?;
    }
    let meta = GridMeta::new(
        cast::<S>(nums[0]),
        [cast(nums[1]), cast(nums[2]), cast(nums[3])],
        GridMode::ThreeD,
    );
    let mut grid = VoxelGrid::new(meta)?;
    let mut bounds: Option<GridBounds> = None;
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let record_err = |msg: String| MapIoError::MalformedRecord {
            path: path_str(path),
            line: n + 1,
            msg,
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(record_err(format!(
                "expected 'x y z s', found {} fields",
                parts.len()
            )));
        }
        let mut coords = [0i32; 3];
        for (i, p) in parts[..3].iter().enumerate() {
            coords[i] = p
                .parse()
                .map_err(|_| record_err(format!("non-integer coordinate '{p}'")))?;
        }
        let state = parts[3]
            .chars()
            .next()
            .filter(|_| parts[3].len() == 1)
            .and_then(VoxelState::from_letter)
            .ok_or_else(|| record_err(format!("unknown state letter '{}'", parts[3])))?;
        let idx = GridIndex::new(coords[0], coords[1], coords[2]);
        grid.set_state(idx, state)?;
        bounds = Some(match bounds {
            Some(b) => b.including(idx),
            None => GridBounds::point(idx),
        });
    }
    Ok(MapDocument {
        grid,
        bounds: bounds.unwrap_or_else(|| GridBounds::point(GridIndex::new(0, 0, 0))),
        pgm: None,
    })
}

/// Save a voxel map as canonical `dsp3d v1` text: records sorted by
/// `(z, y, x)`, unknown voxels omitted.
pub fn save_grid3d<S: Real>(
    doc: &MapDocument<S>,
    path: impl AsRef<FsPath>,
) -> Result<(), MapIoError> {
    let meta = doc.grid.meta();
    let mut text = format!(
        "dsp3d v1 {} {} {} {}\n",
        meta.resolution, meta.origin[0], meta.origin[1], meta.origin[2]
    );
    let mut records: Vec<(GridIndex, VoxelState)> = doc
        .grid
        .iter_voxels()
        .filter(|&(_, s)| s != VoxelState::Unknown)
        .collect();
    records.sort_by_key(|(idx, _)| (idx.z, idx.y, idx.x));
    for (idx, s) in records {
        text.push_str(&format!("{} {} {} {}\n", idx.x, idx.y, idx.z, s.letter()));
    }
    fs::write(path.as_ref(), text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// update streams

/// Load an update stream from JSON-lines text, validating monotone times.
pub fn load_updates(path: impl AsRef<FsPath>) -> Result<UpdateStream, MapIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut events = Vec::new();
    let mut last_t: Option<u64> = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let event: UpdateEvent =
            serde_json::from_str(line).map_err(|e| MapIoError::MalformedRecord {
                path: path_str(path),
                line: n + 1,
                msg: e.to_string(),
            })?;
        if let Some(prev) = last_t {
            if event.t <= prev {
                return Err(MapIoError::NonMonotoneTime {
                    path: path_str(path),
                    line: n + 1,
                });
            }
        }
        last_t = Some(event.t);
        events.push(event);
    }
    Ok(UpdateStream { events })
}

/// Save an update stream as JSON lines.
pub fn save_updates(stream: &UpdateStream, path: impl AsRef<FsPath>) -> Result<(), MapIoError> {
    let mut text = String::new();
    for event in &stream.events {
        text.push_str(&serde_json::to_string(event).expect("events serialize"));
        text.push('\n');
    }
    fs::write(path.as_ref(), text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// path and costmap export

#[derive(Debug, Serialize, Deserialize)]
pub struct PathDocument {
    pub total_cost: f64,
    pub voxel_count: usize,
    pub points: Vec<[f64; 3]>,
}

/// Export a planned path with its world polyline.
pub fn save_path<S: Real>(
    path: &crate::planner::Path<S>,
    meta: &GridMeta<S>,
    out: impl AsRef<FsPath>,
) -> Result<(), MapIoError> {
    let doc = PathDocument {
        total_cost: path.total_cost.to_f64().expect("finite cost"),
        voxel_count: path.indices.len(),
        points: path
            .world_points(meta)
            .into_iter()
            .map(|p| {
                [
                    p[0].to_f64().unwrap(),
                    p[1].to_f64().unwrap(),
                    p[2].to_f64().unwrap(),
                ]
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("path serializes");
    text.push('\n');
    fs::write(out.as_ref(), text)?;
    Ok(())
}

/// Export the total-cost field over a single-layer region as a PGM image,
/// darker pixels meaning costlier voxels. Costs are clamped at twice the
/// unknown cost; occupied voxels are forced to black.
pub fn save_costmap<S: Real>(
    cf: &CostField<S>,
    bounds: GridBounds,
    out: impl AsRef<FsPath>,
) -> Result<(), MapIoError> {
    let out = out.as_ref();
    if bounds.min.z != bounds.max.z {
        return Err(MapIoError::Unsupported {
            path: path_str(out),
            msg: "costmap export requires a single-layer region".to_string(),
        });
    }
    let cap = cf.config().unknown().to_f64().unwrap() * 2.0;
    let w = (bounds.max.x - bounds.min.x + 1) as usize;
    let h = (bounds.max.y - bounds.min.y + 1) as usize;
    let mut data = vec![0u8; w * h];
    for row in 0..h as i32 {
        let y = bounds.max.y - row;
        for col in 0..w as i32 {
            let idx = GridIndex::new(bounds.min.x + col, y, bounds.min.z);
            let px = if cf.grid().get_state(idx) == VoxelState::Occupied {
                0
            } else {
                let total = cf.total_cost(idx).to_f64().unwrap_or(f64::INFINITY);
                let clamped = total.min(cap);
                (255.0 * (1.0 - clamped / cap)).round() as u8
            };
            data[(row * w as i32 + col) as usize] = px;
        }
    }
    write_pgm(out, w, h, &data)
}
