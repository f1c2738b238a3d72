//! Labelled `(normalized WVD, ideal TFR)` corpora.
//!
//! Two signal classes are drawn at random: two cubic-phase (NLFM) components,
//! or one LFM plus one sinusoidal FM component. The signal parameters depend
//! only on `(class, master_seed)`, so corpora generated at different noise
//! levels share the same underlying signals and differ only in the noise.
//!
//! A dataset directory holds `manifest.json` and `tensors.tft`. The tensor
//! file is `"TFT1"`, `u32` rank (4), `u32` dims `[count, 2, T, T]`, then for
//! every sample its `X` block followed by its `Y` block as little-endian `f32`
//! in row-major order.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcnn::{FeatureMap, Sample};
use crate::seed;
use crate::signals::{Component, NoiseLevel, PhaseLaw, SignalModel};
use crate::tfr::{self, TfImage};
use crate::{Error, Result};

pub const SIGNAL_LEN: usize = 128;
pub const MIN_COUNT: usize = 5;
pub const MAX_REJECTIONS: usize = 1000;
pub const TRAIN_FRACTION: f64 = 0.8;
pub const TENSOR_MAGIC: &[u8; 4] = b"TFT1";
pub const DATASET_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TENSOR_FILE: &str = "tensors.tft";

/// Accepted instantaneous-frequency band for every drawn component.
pub const IF_BAND: (f64, f64) = (0.03, 0.47);
/// Range of the NLFM control points and the LFM end frequencies.
pub const CONTROL_RANGE: (f64, f64) = (0.05, 0.45);
/// Two NLFM ridges must differ by more than this at half the samples or more.
pub const MIN_SEPARATION: f64 = 0.01;

const SNR_CONVENTION: &str =
    "complex white Gaussian noise of per-sample variance 10^(-snr/10) relative to unit-amplitude components; \
     real and imaginary parts each carry half";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalClass {
    TwoNlfm,
    LfmPlusSfm,
}

impl SignalClass {
    pub const ALL: [SignalClass; 2] = [SignalClass::TwoNlfm, SignalClass::LfmPlusSfm];

    fn tag(self) -> u64 {
        match self {
            SignalClass::TwoNlfm => 1,
            SignalClass::LfmPlusSfm => 2,
        }
    }
}

impl fmt::Display for SignalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalClass::TwoNlfm => "two-nlfm",
            SignalClass::LfmPlusSfm => "lfm-plus-sfm",
        })
    }
}

impl FromStr for SignalClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-nlfm" => Ok(SignalClass::TwoNlfm),
            "lfm-plus-sfm" => Ok(SignalClass::LfmPlusSfm),
            _ => Err(Error::InvalidArgument(format!("unknown signal class '{s}' (two-nlfm | lfm-plus-sfm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub class: SignalClass,
    pub model: SignalModel,
    pub noise_snr_db: NoiseLevel,
    pub noise_seed: u64,
}

/// Cubic phase law whose IF passes through `f0`, `f_mid`, `f_end` at
/// `t = 0, T/2, T`.
pub fn cubic_from_control_points(f0: f64, f_mid: f64, f_end: f64) -> PhaseLaw {
    // IF = c1 + 2 c2 u + 3 c3 u², u = t/T
    let a = f_mid - f0;
    let b = f_end - f0;
    let c3 = (b - 2.0 * a) / 1.5;
    PhaseLaw::Cubic {
        c1: f0,
        c2: a - 0.75 * c3,
        c3,
    }
}

fn in_band(f: f64) -> bool {
    (IF_BAND.0..=IF_BAND.1).contains(&f)
}

/// Whether a cubic law keeps its IF inside [`IF_BAND`] on `[0, T]`.
fn cubic_in_band(law: &PhaseLaw, len: usize) -> bool {
    let PhaseLaw::Cubic { c2, c3, .. } = *law else {
        return false;
    };
    let samples_ok = (0..=len).all(|t| in_band(law.inst_freq(t as f64, len)));
    // The IF is a parabola in t; its vertex may fall between samples.
    let vertex_ok = if c3 != 0.0 {
        let u = -c2 / (3.0 * c3);
        !(0.0..=1.0).contains(&u) || in_band(law.inst_freq(u * len as f64, len))
    } else {
        true
    };
    samples_ok && vertex_ok
}

fn distinct(a: &PhaseLaw, b: &PhaseLaw, len: usize) -> bool {
    let apart = (0..len)
        .filter(|&t| (a.inst_freq(t as f64, len) - b.inst_freq(t as f64, len)).abs() > MIN_SEPARATION)
        .count();
    2 * apart >= len
}

/// Draws one noise-free signal model of `class` with `T = SIGNAL_LEN`.
pub fn sample_model(class: SignalClass, rng: &mut impl Rng) -> Result<SignalModel> {
    let (lo, hi) = CONTROL_RANGE;
    let len = SIGNAL_LEN;
    let exhausted = || Error::SamplingExhausted {
        class: class.to_string(),
        attempts: MAX_REJECTIONS,
    };
    let mut rejections = 0;
    let mut reject = || {
        rejections += 1;
        rejections < MAX_REJECTIONS
    };

    let laws = match class {
        SignalClass::TwoNlfm => loop {
            let mut draw = || cubic_from_control_points(rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi));
            let (a, b) = (draw(), draw());
            if cubic_in_band(&a, len) && cubic_in_band(&b, len) && distinct(&a, &b, len) {
                break [a, b];
            }
            if !reject() {
                return Err(exhausted());
            }
        },
        SignalClass::LfmPlusSfm => {
            let lfm = PhaseLaw::linear(rng.random_range(lo..hi), rng.random_range(lo..hi));
            let sfm = loop {
                let fc = rng.random_range(0.15..0.35);
                let fd = rng.random_range(0.05..0.15);
                let r = rng.random_range(0.5..2.0);
                let psi = rng.random_range(0.0..std::f64::consts::TAU);
                if in_band(fc - fd) && in_band(fc + fd) {
                    break PhaseLaw::Sinusoidal { fc, fd, r, psi };
                }
                if !reject() {
                    return Err(exhausted());
                }
            };
            [lfm, sfm]
        }
    };
    SignalModel::new(laws.into_iter().map(Component::unit).collect(), len)
}

/// `X = normalize_input(wvd(noisy signal))`, `Y = ideal_tfr(noise-free model)`.
pub fn build_sample(spec: &SampleSpec) -> Result<(TfImage, TfImage)> {
    let clean = spec.model.synthesize();
    let noisy = clean.add_noise(spec.noise_snr_db, spec.noise_seed);
    let x = tfr::normalize_input(&tfr::wvd(&noisy)?);
    let y = tfr::ideal_tfr(&spec.model)?;
    Ok((x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub split: Split,
    pub spec: SampleSpec,
    /// Byte offsets of the `X` and `Y` blocks in the tensor file.
    pub x_offset: u64,
    pub y_offset: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub class: SignalClass,
    pub noise_snr_db: NoiseLevel,
    pub master_seed: u64,
    pub signal_len: usize,
    pub count: usize,
    pub train_count: usize,
    pub val_count: usize,
    pub generator: String,
    pub snr_convention: String,
    pub tensor_file: String,
    pub samples: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
        let manifest: Self = serde_json::from_str(&text).map_err(Error::json(&path))?;
        if manifest.format_version != DATASET_FORMAT_VERSION {
            return Err(Error::Format {
                path,
                reason: format!("unsupported format version {}", manifest.format_version),
            });
        }
        Ok(manifest)
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(Error::io(&path))?;
        Ok(path)
    }
}

/// `floor(0.8 · count)` training samples; the rest validate.
pub fn train_count(count: usize) -> usize {
    (count as f64 * TRAIN_FRACTION).floor() as usize
}

/// The `count` specs of a corpus, in draw order.
pub fn draw_specs(class: SignalClass, noise: NoiseLevel, count: usize, master_seed: u64) -> Result<Vec<SampleSpec>> {
    let mut rng = seed::rng(seed::derive(master_seed, &[class.tag()]));
    (0..count)
        .map(|i| {
            Ok(SampleSpec {
                class,
                model: sample_model(class, &mut rng)?,
                noise_snr_db: noise,
                noise_seed: seed::derive(master_seed, &[class.tag(), i as u64]),
            })
        })
        .collect()
}

fn header_len() -> u64 {
    4 + 4 + 4 * 4
}

/// Draws, builds and writes a corpus into `out_dir` (created if missing).
pub fn generate_dataset(class: SignalClass, noise: NoiseLevel, count: usize, master_seed: u64, out_dir: &Path) -> Result<DatasetManifest> {
    if count < MIN_COUNT {
        return Err(Error::InvalidArgument(format!("count {count} is below the minimum of {MIN_COUNT}")));
    }
    let specs = draw_specs(class, noise, count, master_seed)?;
    let pairs = specs.par_iter().map(build_sample).collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(out_dir).map_err(Error::io(out_dir))?;
    let tensor_path = out_dir.join(TENSOR_FILE);
    let file = fs::File::create(&tensor_path).map_err(Error::io(&tensor_path))?;
    let mut writer = BufWriter::new(file);
    let len = SIGNAL_LEN;
    let mut header = Vec::with_capacity(header_len() as usize);
    header.extend_from_slice(TENSOR_MAGIC);
    for v in [4, count, 2, len, len] {
        header.extend_from_slice(&(v as u32).to_le_bytes());
    }
    writer.write_all(&header).map_err(Error::io(&tensor_path))?;

    let block = (len * len * 4) as u64;
    let n_train = train_count(count);
    let mut samples = Vec::with_capacity(count);
    let mut bytes = Vec::with_capacity(block as usize);
    for (i, (spec, (x, y))) in specs.into_iter().zip(&pairs).enumerate() {
        for image in [x, y] {
            bytes.clear();
            bytes.extend(image.as_slice().iter().flat_map(|&v| (v as f32).to_le_bytes()));
            writer.write_all(&bytes).map_err(Error::io(&tensor_path))?;
        }
        let x_offset = header_len() + 2 * block * i as u64;
        samples.push(ManifestEntry {
            index: i,
            split: if i < n_train { Split::Train } else { Split::Val },
            spec,
            x_offset,
            y_offset: x_offset + block,
        });
    }
    writer.flush().map_err(Error::io(&tensor_path))?;

    let manifest = DatasetManifest {
        format_version: DATASET_FORMAT_VERSION,
        class,
        noise_snr_db: noise,
        master_seed,
        signal_len: len,
        count,
        train_count: n_train,
        val_count: count - n_train,
        generator: seed::GENERATOR.to_string(),
        snr_convention: SNR_CONVENTION.to_string(),
        tensor_file: TENSOR_FILE.to_string(),
        samples,
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}

/// One stored pair, exactly as written (`f32` precision).
#[derive(Debug, Clone, PartialEq)]
pub struct StoredPair {
    pub x: Vec<f32>,
    pub y: Vec<f32>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub pairs: Vec<StoredPair>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = DatasetManifest::load(dir)?;
        let path = dir.join(&manifest.tensor_file);
        let bytes = fs::read(&path).map_err(Error::io(&path))?;
        let bad = |reason: String| Error::Format {
            path: path.clone(),
            reason,
        };
        if bytes.len() < header_len() as usize || &bytes[..4] != TENSOR_MAGIC {
            return Err(bad("missing TFT1 header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize;
        let len = manifest.signal_len;
        let dims = [word(0), word(1), word(2), word(3), word(4)];
        if dims != [4, manifest.count, 2, len, len] {
            return Err(bad(format!("header dims {dims:?} disagree with the manifest")));
        }
        let block = len * len * 4;
        if bytes.len() != header_len() as usize + 2 * block * manifest.count {
            return Err(bad(format!("file size {} does not match {} samples", bytes.len(), manifest.count)));
        }
        let read = |offset: u64| -> Vec<f32> {
            let start = offset as usize;
            bytes[start..start + block]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect()
        };
        let mut pairs = Vec::with_capacity(manifest.count);
        for entry in &manifest.samples {
            let end = entry.x_offset.max(entry.y_offset) as usize + block;
            if end > bytes.len() {
                return Err(bad(format!("sample {} lies past the end of the file", entry.index)));
            }
            pairs.push(StoredPair {
                x: read(entry.x_offset),
                y: read(entry.y_offset),
            });
        }
        Ok(Self { manifest, pairs })
    }

    fn to_samples(&self, split: Split) -> Vec<Sample<f32>> {
        let len = self.manifest.signal_len;
        self.manifest
            .samples
            .iter()
            .zip(&self.pairs)
            .filter(|(e, _)| e.split == split)
            .map(|(_, p)| Sample {
                input: FeatureMap::from_vec(1, len, len, p.x.clone()).expect("stored block has T² values"),
                label: FeatureMap::from_vec(1, len, len, p.y.clone()).expect("stored block has T² values"),
            })
            .collect()
    }

    pub fn train_samples(&self) -> Vec<Sample<f32>> {
        self.to_samples(Split::Train)
    }

    pub fn val_samples(&self) -> Vec<Sample<f32>> {
        self.to_samples(Split::Val)
    }
}
