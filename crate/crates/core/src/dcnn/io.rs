//! Weight file: `"TFW1"`, `u32` LE header length, JSON header, then for
//! each layer in order its weights and biases as little-endian `f32`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{ConvLayer, Network, NetworkMeta};

pub const WEIGHT_MAGIC: &[u8; 4] = b"TFW1";
pub const WEIGHT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LayerShape {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    relu: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    #[serde(flatten)]
    meta: NetworkMeta,
    layers: Vec<LayerShape>,
}

pub fn weights_to_bytes(net: &Network<f32>) -> Vec<u8> {
    let header = Header {
        format_version: WEIGHT_FORMAT_VERSION,
        meta: net.meta.clone(),
        layers: net
            .layers
            .iter()
            .map(|l| LayerShape {
                in_channels: l.in_channels,
                out_channels: l.out_channels,
                kernel: l.kernel,
                relu: l.relu,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(8 + json.len() + 4 * net.parameter_count());
    out.extend_from_slice(WEIGHT_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for layer in &net.layers {
        for v in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_weights(net: &Network<f32>, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(Error::io(path))?;
    file.write_all(&weights_to_bytes(net)).map_err(Error::io(path))
}

pub fn weights_from_bytes(bytes: &[u8], path: &Path) -> Result<Network<f32>> {
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 8 || &bytes[..4] != WEIGHT_MAGIC {
        return Err(bad("missing TFW1 magic"));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body_start = 8 + header_len;
    if bytes.len() < body_start {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&bytes[8..body_start]).map_err(Error::json(path))?;
    if header.format_version != WEIGHT_FORMAT_VERSION {
        return Err(bad(&format!("unsupported format version {}", header.format_version)));
    }

    let mut floats = bytes[body_start..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")));
    let mut layers = Vec::with_capacity(header.layers.len());
    for shape in &header.layers {
        if shape.kernel % 2 == 0 {
            return Err(bad("even kernel size"));
        }
        let mut layer = ConvLayer::zeros(shape.in_channels, shape.out_channels, shape.kernel, shape.relu);
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = floats.next().ok_or_else(|| bad("truncated parameter data"))?;
        }
        if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
            return Err(bad("non-finite parameter"));
        }
        layers.push(layer);
    }
    if floats.next().is_some() || (bytes.len() - body_start) % 4 != 0 {
        return Err(bad("trailing bytes after parameters"));
    }
    if layers.len() != header.meta.depth {
        return Err(bad("layer count differs from depth"));
    }
    Ok(Network {
        layers,
        meta: header.meta,
    })
}

pub fn load_weights(path: &Path) -> Result<Network<f32>> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    weights_from_bytes(&bytes, path)
}
