//! Multicomponent FM signal synthesis.
//!
//! A signal is a sum of constant-amplitude components `a_p exp(j φ_p(t))`
//! sampled at `t = 0, 1, ..., T-1`. Frequencies are in cycles per sample, so
//! the analytic band is `[0, 0.5)` once the WVD frequency axis is doubled.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::seed;
use crate::{Error, Result};

/// Phase law of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseLaw {
    /// `φ(t) = 2π (c1 t + c2 t²/T + c3 t³/T²)`.
    Cubic { c1: f64, c2: f64, c3: f64 },
    /// `φ(t) = 2π ((fd T / (2π r)) cos(2π r t / T + psi) + fc t)`.
    ///
    /// `fc` is the centre frequency, `fd` the peak deviation, `r` the number
    /// of modulation cycles over the record and `psi` the initial modulation
    /// phase. The instantaneous frequency is `fc - fd sin(2π r t / T + psi)`.
    Sinusoidal { fc: f64, fd: f64, r: f64, psi: f64 },
}

impl PhaseLaw {
    pub fn tone(freq: f64) -> Self {
        PhaseLaw::Cubic {
            c1: freq,
            c2: 0.0,
            c3: 0.0,
        }
    }

    /// Linear FM sweeping from `f_start` at `t = 0` to `f_end` at `t = T`.
    pub fn linear(f_start: f64, f_end: f64) -> Self {
        PhaseLaw::Cubic {
            c1: f_start,
            c2: (f_end - f_start) / 2.0,
            c3: 0.0,
        }
    }

    /// Phase in radians at (possibly fractional) sample time `t` for a record
    /// of `len` samples.
    pub fn phase(&self, t: f64, len: usize) -> f64 {
        let big_t = len as f64;
        match *self {
            PhaseLaw::Cubic { c1, c2, c3 } => {
                2.0 * PI * (c1 * t + c2 * t * t / big_t + c3 * t * t * t / (big_t * big_t))
            }
            PhaseLaw::Sinusoidal { fc, fd, r, psi } => {
                let arg = 2.0 * PI * r * t / big_t + psi;
                2.0 * PI * (fd * big_t / (2.0 * PI * r) * arg.cos() + fc * t)
            }
        }
    }

    /// Instantaneous frequency `dφ/dt / 2π` in cycles per sample.
    pub fn inst_freq(&self, t: f64, len: usize) -> f64 {
        let big_t = len as f64;
        match *self {
            PhaseLaw::Cubic { c1, c2, c3 } => {
                let u = t / big_t;
                c1 + 2.0 * c2 * u + 3.0 * c3 * u * u
            }
            PhaseLaw::Sinusoidal { fc, fd, r, psi } => {
                fc - fd * (2.0 * PI * r * t / big_t + psi).sin()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub amplitude: f64,
    pub law: PhaseLaw,
}

impl Component {
    pub fn unit(law: PhaseLaw) -> Self {
        Self {
            amplitude: 1.0,
            law,
        }
    }
}

/// `P ≥ 1` components observed over `len ≥ 2` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub components: Vec<Component>,
    pub len: usize,
}

impl SignalModel {
    pub fn new(components: Vec<Component>, len: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("signal model needs at least one component".into()));
        }
        if len < 2 {
            return Err(Error::InvalidArgument(format!("record length {len} < 2")));
        }
        if let Some(c) = components.iter().find(|c| !c.amplitude.is_finite() || c.amplitude < 0.0) {
            return Err(Error::InvalidArgument(format!("bad amplitude {}", c.amplitude)));
        }
        Ok(Self { components, len })
    }

    pub fn synthesize(&self) -> ComplexSeries {
        let samples = (0..self.len)
            .map(|t| {
                self.components
                    .iter()
                    .map(|c| Complex64::from_polar(c.amplitude, c.law.phase(t as f64, self.len)))
                    .sum()
            })
            .collect();
        ComplexSeries(samples)
    }
}

/// A realized complex signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries(pub Vec<Complex64>);

impl ComplexSeries {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// Adds circular complex white Gaussian noise of per-sample variance
    /// `10^(-snr/10)` (relative to a unit-amplitude component). Real and
    /// imaginary parts each get half of that variance. A noise-free level
    /// returns the input unchanged.
    pub fn add_noise(&self, level: NoiseLevel, seed: u64) -> ComplexSeries {
        let Some(variance) = level.noise_variance() else {
            return self.clone();
        };
        let sigma = (variance / 2.0).sqrt();
        let mut rng = seed::rng(seed);
        let samples = self
            .0
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                s + Complex64::new(sigma * re, sigma * im)
            })
            .collect();
        ComplexSeries(samples)
    }

    /// Mean of `|s[t]|²`.
    pub fn mean_power(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.0.len().max(1) as f64
    }
}

/// Input SNR in dB; `+∞` means noise-free.
///
/// Serialized as a JSON number, or the string `"inf"` when noise-free.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub const NOISE_FREE: NoiseLevel = NoiseLevel(f64::INFINITY);

    /// Panics on NaN or `-∞`.
    pub fn db(snr_db: f64) -> Self {
        assert!(!snr_db.is_nan() && snr_db != f64::NEG_INFINITY, "invalid SNR {snr_db}");
        NoiseLevel(snr_db)
    }

    pub fn snr_db(self) -> f64 {
        self.0
    }

    pub fn is_noise_free(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Per-sample complex noise variance, `None` when noise-free.
    pub fn noise_variance(self) -> Option<f64> {
        (!self.is_noise_free()).then(|| 10f64.powf(-self.0 / 10.0))
    }

    /// Canonical ordering used in tables: noise-free first, then descending SNR.
    pub fn table_order(a: &NoiseLevel, b: &NoiseLevel) -> std::cmp::Ordering {
        b.0.total_cmp(&a.0)
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_noise_free() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(NoiseLevel::NOISE_FREE);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(NoiseLevel(v)),
            _ => Err(Error::InvalidArgument(format!("bad SNR '{s}' (expected dB value or 'inf')"))),
        }
    }
}

impl Serialize for NoiseLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_noise_free() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for NoiseLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) if v.is_finite() => Ok(NoiseLevel(v)),
            Repr::Num(v) => Err(serde::de::Error::custom(format!("bad SNR {v}"))),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
