//! NMSE metric, the three reference case studies, the method comparison
//! table and log-scale PGM rendering.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{l1prox_tfr, omp_tfr, L1ProxConfig, OmpConfig};
use crate::dcnn::Network;
use crate::seed;
use crate::signals::{ComplexSeries, Component, NoiseLevel, PhaseLaw, SignalModel};
use crate::tfr::{self, TfImage};
use crate::{Error, Result};

pub const CASE_LEN: usize = 128;
/// Value assigned to an exact match instead of `-∞`.
pub const NMSE_FLOOR_DB: f64 = -120.0;
/// Dynamic range of rendered images.
pub const RENDER_RANGE_DB: f64 = 15.0;
pub const DEFAULT_TRIALS: usize = 50;
pub const CSV_HEADER: &str = "case,snr_db,method,K,nmse_db";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseStudy {
    Case1,
    Case2,
    Case3,
}

impl CaseStudy {
    pub const ALL: [CaseStudy; 3] = [CaseStudy::Case1, CaseStudy::Case2, CaseStudy::Case3];

    pub fn id(self) -> u64 {
        match self {
            CaseStudy::Case1 => 1,
            CaseStudy::Case2 => 2,
            CaseStudy::Case3 => 3,
        }
    }

    /// Case 1: two crossing NLFMs. Case 2: two NLFMs that approach each
    /// other. Case 3: an SFM and an NLFM.
    pub fn model(self) -> SignalModel {
        let laws = match self {
            CaseStudy::Case1 => [
                PhaseLaw::Cubic {
                    c1: 0.06,
                    c2: 0.25,
                    c3: -0.15,
                },
                PhaseLaw::Cubic {
                    c1: 0.40,
                    c2: -0.25,
                    c3: 0.15,
                },
            ],
            CaseStudy::Case2 => [
                PhaseLaw::Cubic {
                    c1: 0.35,
                    c2: -0.50,
                    c3: 1.0 / 3.0,
                },
                PhaseLaw::Cubic {
                    c1: 0.10,
                    c2: 0.50,
                    c3: -1.0 / 3.0,
                },
            ],
            CaseStudy::Case3 => [
                PhaseLaw::Sinusoidal {
                    fc: 0.22,
                    fd: 0.12,
                    r: 1.0,
                    psi: PI,
                },
                PhaseLaw::Cubic {
                    c1: 0.10,
                    c2: 0.12,
                    c3: 0.0,
                },
            ],
        };
        SignalModel::new(laws.into_iter().map(Component::unit).collect(), CASE_LEN).expect("valid case model")
    }
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for CaseStudy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("case") {
            "1" => Ok(CaseStudy::Case1),
            "2" => Ok(CaseStudy::Case2),
            "3" => Ok(CaseStudy::Case3),
            _ => Err(Error::InvalidArgument(format!("unknown case '{s}' (1, 2 or 3)"))),
        }
    }
}

fn unit_frobenius(image: &TfImage) -> Option<TfImage> {
    let norm = image.frobenius_norm_sqr().sqrt();
    (norm > 0.0).then(|| image.scale(1.0 / norm))
}

/// `10 log10(‖Y - Ŷ‖² / ‖Y‖²)` after scaling both to unit Frobenius norm,
/// floored at [`NMSE_FLOOR_DB`]. An all-zero estimate scores 0 dB.
pub fn nmse_trial_db(label: &TfImage, estimate: &TfImage) -> Result<f64> {
    if label.shape() != estimate.shape() {
        return Err(Error::Shape(format!("label {:?} vs estimate {:?}", label.shape(), estimate.shape())));
    }
    let y = unit_frobenius(label).ok_or(Error::Empty("NMSE label is all zero"))?;
    let Some(e) = unit_frobenius(estimate) else {
        return Ok(0.0);
    };
    let err: f64 = y.as_slice().iter().zip(e.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    if err == 0.0 {
        return Ok(NMSE_FLOOR_DB);
    }
    Ok((10.0 * err.log10()).max(NMSE_FLOOR_DB))
}

/// Mean of the per-trial dB values.
pub fn nmse(label: &TfImage, estimates: &[TfImage]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("NMSE needs at least one estimate"));
    }
    let per_trial = estimates.iter().map(|e| nmse_trial_db(label, e)).collect::<Result<Vec<_>>>()?;
    Ok(per_trial.iter().sum::<f64>() / per_trial.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Wvd,
    Omp,
    L1Prox,
    Dcnn,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Wvd => "wvd",
            MethodKind::Omp => "omp",
            MethodKind::L1Prox => "l1prox",
            MethodKind::Dcnn => "dcnn",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wvd" => Ok(MethodKind::Wvd),
            "omp" => Ok(MethodKind::Omp),
            "l1prox" => Ok(MethodKind::L1Prox),
            "dcnn" => Ok(MethodKind::Dcnn),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}' (wvd, omp, l1prox, dcnn)"))),
        }
    }
}

/// A method fully configured for one noise level.
#[derive(Debug, Clone)]
pub enum Estimator {
    Wvd,
    Omp(OmpConfig),
    L1Prox(L1ProxConfig),
    Dcnn(Arc<Network<f32>>),
}

impl Estimator {
    pub fn kind(&self) -> MethodKind {
        match self {
            Estimator::Wvd => MethodKind::Wvd,
            Estimator::Omp(_) => MethodKind::Omp,
            Estimator::L1Prox(_) => MethodKind::L1Prox,
            Estimator::Dcnn(_) => MethodKind::Dcnn,
        }
    }

    /// TF image estimate from one noisy realization. The DCNN output is
    /// clamped at zero.
    pub fn estimate(&self, series: &ComplexSeries) -> Result<TfImage> {
        match self {
            Estimator::Wvd => Ok(tfr::normalize_input(&tfr::wvd(series)?)),
            Estimator::Omp(cfg) => omp_tfr(series, cfg),
            Estimator::L1Prox(cfg) => l1prox_tfr(series, cfg),
            Estimator::Dcnn(net) => {
                let input = tfr::normalize_input(&tfr::wvd(series)?);
                Ok(net.predict(&input)?.map(|&v| v.max(0.0)))
            }
        }
    }
}

/// A method for a whole table: the DCNN needs one network per noise level.
#[derive(Debug, Clone)]
pub enum MethodSpec {
    Wvd,
    Omp(OmpConfig),
    L1Prox(L1ProxConfig),
    Dcnn(Vec<(NoiseLevel, Arc<Network<f32>>)>),
}

impl MethodSpec {
    pub fn kind(&self) -> MethodKind {
        match self {
            MethodSpec::Wvd => MethodKind::Wvd,
            MethodSpec::Omp(_) => MethodKind::Omp,
            MethodSpec::L1Prox(_) => MethodKind::L1Prox,
            MethodSpec::Dcnn(_) => MethodKind::Dcnn,
        }
    }

    pub fn resolve(&self, snr: NoiseLevel) -> Result<Estimator> {
        Ok(match self {
            MethodSpec::Wvd => Estimator::Wvd,
            MethodSpec::Omp(c) => Estimator::Omp(*c),
            MethodSpec::L1Prox(c) => Estimator::L1Prox(*c),
            MethodSpec::Dcnn(nets) => Estimator::Dcnn(
                nets.iter()
                    .find(|(level, _)| *level == snr)
                    .map(|(_, n)| n.clone())
                    .ok_or_else(|| Error::InvalidArgument(format!("no DCNN weights for SNR {snr}")))?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmseReport {
    pub case: CaseStudy,
    pub snr_db: NoiseLevel,
    pub method: MethodKind,
    pub trials: usize,
    pub nmse_db: f64,
    pub per_trial_db: Vec<f64>,
}

impl NmseReport {
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{:.6}", self.case, self.snr_db, self.method, self.trials, self.nmse_db)
    }
}

/// Seed of trial `k`; shared by every method and noise level so methods are
/// compared on the same noise draws.
pub fn trial_seed(master_seed: u64, case: CaseStudy, trial: usize) -> u64 {
    seed::derive(master_seed, &[case.id(), trial as u64])
}

/// The noisy realization of one trial.
pub fn trial_series(case: CaseStudy, snr: NoiseLevel, master_seed: u64, trial: usize) -> ComplexSeries {
    case.model().synthesize().add_noise(snr, trial_seed(master_seed, case, trial))
}

/// `trials` noisy realizations of `case`, each scored against the ideal TFR.
/// Without noise every trial is identical and is computed once.
pub fn run_case(case: CaseStudy, estimator: &Estimator, snr: NoiseLevel, trials: usize, master_seed: u64) -> Result<NmseReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let label = tfr::ideal_tfr(&case.model())?;
    let distinct = if snr.is_noise_free() { 1 } else { trials };
    let scores = (0..distinct)
        .into_par_iter()
        .map(|k| nmse_trial_db(&label, &estimator.estimate(&trial_series(case, snr, master_seed, k))?))
        .collect::<Result<Vec<f64>>>()?;
    let per_trial_db: Vec<f64> = (0..trials).map(|k| scores[k % distinct]).collect();
    Ok(NmseReport {
        case,
        snr_db: snr,
        method: estimator.kind(),
        trials,
        nmse_db: per_trial_db.iter().sum::<f64>() / trials as f64,
        per_trial_db,
    })
}

/// Every `(case, snr, method)` combination, ordered case-major, then SNR
/// (noise-free first, then descending), then method in the given order.
pub fn comparison_table(cases: &[CaseStudy], snrs: &[NoiseLevel], methods: &[MethodSpec], trials: usize, master_seed: u64) -> Result<Vec<NmseReport>> {
    if cases.is_empty() || snrs.is_empty() || methods.is_empty() {
        return Err(Error::Empty("comparison table axes"));
    }
    let mut snrs = snrs.to_vec();
    snrs.sort_by(NoiseLevel::table_order);
    let mut rows = Vec::with_capacity(cases.len() * snrs.len() * methods.len());
    for &case in cases {
        for &snr in &snrs {
            for method in methods {
                rows.push(run_case(case, &method.resolve(snr)?, snr, trials, master_seed)?);
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[NmseReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// 8-bit log-magnitude image: negatives clamp to 0, the maximum maps to 255
/// and `-15 dB` (and below) to 0. Frequency runs upward, time to the right.
pub fn log_image_pixels(image: &TfImage) -> Result<(usize, usize, Vec<u8>)> {
    let max = image.max_value();
    if !(max > 0.0) {
        return Err(Error::InvalidArgument("cannot render an image without a positive maximum".into()));
    }
    let (times, freqs) = image.shape();
    let mut pixels = Vec::with_capacity(times * freqs);
    for k in (0..freqs).rev() {
        for n in 0..times {
            let v = image[(n, k)].max(0.0);
            let db = if v > 0.0 { 10.0 * (v / max).log10() } else { -RENDER_RANGE_DB };
            let level = 255.0 * (1.0 + db.max(-RENDER_RANGE_DB) / RENDER_RANGE_DB);
            pixels.push(level.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok((times, freqs, pixels))
}

/// Writes [`log_image_pixels`] as a binary PGM (P5, maxval 255).
pub fn render_log_image(image: &TfImage, path: &Path) -> Result<()> {
    let (width, height, pixels) = log_image_pixels(image)?;
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(&pixels);
    fs::write(path, bytes).map_err(Error::io(path))
}
