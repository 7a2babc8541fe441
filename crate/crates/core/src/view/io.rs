//! Map and image files.
//!
//! Binary maps are one JSON header line `{"dtype", "height", "width"}`
//! followed by little-endian samples, row-major. Images are binary PPM.

use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::overlay::Overlay;
use super::render::Maps;
use super::viewset::{View, ViewSet};
use super::ViewError;
use crate::scene::canonical_json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U32,
    F64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    dtype: Dtype,
    height: u32,
    width: u32,
}

fn header(width: u32, height: u32, dtype: Dtype) -> Vec<u8> {
    let mut out = serde_json::to_vec(&Header { dtype, height, width }).expect("header serializes");
    out.push(b'\n');
    out
}

pub fn encode_ids(maps: &Maps) -> Vec<u8> {
    let mut out = header(maps.width, maps.height, Dtype::U32);
    out.extend(maps.ids.iter().flat_map(|v| v.to_le_bytes()));
    out
}

pub fn encode_depth(maps: &Maps) -> Vec<u8> {
    let mut out = header(maps.width, maps.height, Dtype::F64);
    out.extend(maps.depth.iter().flat_map(|v| v.to_le_bytes()));
    out
}

fn decode(bytes: &[u8], want: Dtype) -> Result<(u32, u32, Vec<u8>), ViewError> {
    let mut reader = bytes;
    let mut line = String::new();
    reader
        .read_line(&mut line)
        .map_err(|e| ViewError::Format(e.to_string()))?;
    let h: Header = serde_json::from_str(line.trim_end()).map_err(|e| ViewError::Format(e.to_string()))?;
    if h.dtype != want {
        return Err(ViewError::Format(format!("expected dtype {want:?}, found {:?}", h.dtype)));
    }
    let size = if want == Dtype::U32 { 4 } else { 8 };
    let mut data = Vec::new();
    reader.read_to_end(&mut data).map_err(|e| ViewError::Format(e.to_string()))?;
    if data.len() != h.width as usize * h.height as usize * size {
        return Err(ViewError::Format("sample count does not match header".into()));
    }
    Ok((h.width, h.height, data))
}

pub fn decode_ids(bytes: &[u8]) -> Result<(u32, u32, Vec<u32>), ViewError> {
    let (w, h, data) = decode(bytes, Dtype::U32)?;
    let ids = data
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok((w, h, ids))
}

pub fn decode_depth(bytes: &[u8]) -> Result<(u32, u32, Vec<f64>), ViewError> {
    let (w, h, data) = decode(bytes, Dtype::F64)?;
    let depth = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((w, h, depth))
}

fn palette(ordinal: u32) -> [f64; 3] {
    // splitmix64 finalizer spreads neighbouring ordinals across hues.
    let mut z = (ordinal as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    [0, 1, 2].map(|k| 0.25 + 0.75 * ((z >> (k * 16)) & 0xFFFF) as f64 / 65535.0)
}

/// Visualization: palette color per element, darkened with distance, with
/// overlay anchors burned in as single white pixels.
pub fn to_ppm(maps: &Maps, overlays: &[Overlay]) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", maps.width, maps.height).into_bytes();
    let mut rgb: Vec<[u8; 3]> = maps
        .ids
        .iter()
        .zip(&maps.depth)
        .map(|(&id, &d)| {
            if id == 0 {
                return [0, 0, 0];
            }
            let shade = 0.35 + 0.65 / (1.0 + 0.15 * d);
            palette(id).map(|c| (255.0 * c * shade).round() as u8)
        })
        .collect();
    for o in overlays {
        let (u, v) = (o.pixel[0].round(), o.pixel[1].round());
        if u >= 0.0 && v >= 0.0 && (u as u32) < maps.width && (v as u32) < maps.height {
            rgb[(v as u32 * maps.width + u as u32) as usize] = [255, 255, 255];
        }
    }
    out.extend(rgb.into_iter().flatten());
    out
}

/// View metadata without the pixel data: camera, legend and overlays.
pub fn view_metadata(view: &View) -> serde_json::Value {
    canonical_json(&json!({
        "name": view.name,
        "camera": view.camera,
        "width": view.maps.width,
        "height": view.maps.height,
        "legend": view.maps.legend,
        "overlays": view.overlays,
    }))
}

impl ViewSet {
    /// Deterministic byte serialization: per view, a metadata line followed
    /// by the id and depth maps.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for v in &self.views {
            out.extend(serde_json::to_vec(&view_metadata(v)).expect("metadata serializes"));
            out.push(b'\n');
            out.extend(encode_ids(&v.maps));
            out.extend(encode_depth(&v.maps));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    #[test]
    fn maps_round_trip() {
        let maps = Maps {
            width: 3,
            height: 2,
            ids: vec![0, 1, 2, 3, 4, 5],
            depth: vec![f64::INFINITY, 1.5, 2.0, 0.25, 1e-9, 7.0],
            legend: BTreeMap::new(),
        };
        assert_eq!(decode_ids(&encode_ids(&maps)).unwrap(), (3, 2, maps.ids.clone()));
        assert_eq!(decode_depth(&encode_depth(&maps)).unwrap(), (3, 2, maps.depth.clone()));
        assert!(decode_depth(&encode_ids(&maps)).is_err());
        let ppm = to_ppm(&maps, &[]);
        assert!(ppm.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(ppm.len(), 11 + 18);
    }
}
