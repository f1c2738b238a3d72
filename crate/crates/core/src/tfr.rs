//! Bilinear time-frequency representations.
//!
//! Discrete conventions, for a length-`T` record (`T` even):
//!
//! - IAF: `R[n, m mod T] = s[n+m] s*[n-m]` for signed lags `-T/2 < m < T/2`
//!   with both indices inside the record, zero otherwise. Lag `m = -T/2` has
//!   no Hermitian partner and is always zero, which keeps the WVD exactly
//!   real.
//! - WVD: length-`T` forward DFT of each IAF row over the wrapped lag. The
//!   integer lag doubles the frequency axis, so bin `k` is `f = k / (2T)`
//!   cycles per sample.
//! - AF: length-`T` forward DFT of each IAF column over time.
//!
//! The AF and the complex WVD are related by the unitary map
//! [`AfTransform::forward`]: a forward DFT over time combined with an inverse
//! DFT over frequency, scaled by `1/T`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::matrix::Matrix;
use crate::signals::{ComplexSeries, SignalModel};
use crate::{Error, Result};

/// Real time-frequency image: row = time sample, column = frequency bin.
pub type TfImage = Matrix<f64>;

/// `T × T` complex plane (IAF, complex WVD, AF).
pub type ComplexPlane = Matrix<Complex64>;

/// Maximum tolerated `max|imag| / max|real|` of the WVD.
pub const REALNESS_TOLERANCE: f64 = 1e-6;

fn check_even(series: &ComplexSeries) -> Result<usize> {
    let len = series.len();
    if len == 0 || len % 2 != 0 {
        return Err(Error::Shape(format!("record length {len} must be even and nonzero")));
    }
    Ok(len)
}

/// Wrapped column index of signed lag `m`.
pub fn lag_column(m: isize, len: usize) -> usize {
    m.rem_euclid(len as isize) as usize
}

/// Signed lag of wrapped column `l`, in `[-T/2, T/2)`.
pub fn signed_lag(l: usize, len: usize) -> isize {
    if l < len / 2 {
        l as isize
    } else {
        l as isize - len as isize
    }
}

pub fn iaf(series: &ComplexSeries) -> Result<ComplexPlane> {
    let len = check_even(series)?;
    let s = series.as_slice();
    let half = (len / 2) as isize;
    let mut out = ComplexPlane::zeros(len, len);
    for n in 0..len as isize {
        for m in (1 - half)..half {
            let (a, b) = (n + m, n - m);
            if a < 0 || b < 0 || a >= len as isize || b >= len as isize {
                continue;
            }
            out[(n as usize, lag_column(m, len))] = s[a as usize] * s[b as usize].conj();
        }
    }
    Ok(out)
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

fn fft_rows(plane: &mut ComplexPlane, fft: &dyn Fft<f64>) {
    debug_assert_eq!(fft.len(), plane.cols());
    fft.process(plane.as_mut_slice());
}

fn fft_cols(plane: &ComplexPlane, fft: &dyn Fft<f64>) -> ComplexPlane {
    let mut t = plane.transpose();
    fft_rows(&mut t, fft);
    t.transpose()
}

/// WVD before taking the real part (row-wise lag DFT of the IAF).
pub fn wvd_complex(series: &ComplexSeries) -> Result<ComplexPlane> {
    let mut plane = iaf(series)?;
    let plans = Plans::new(plane.cols());
    fft_rows(&mut plane, plans.forward.as_ref());
    Ok(plane)
}

/// Real part of a complex WVD, after checking the imaginary residual.
pub fn real_part_checked(plane: &ComplexPlane) -> Result<TfImage> {
    let max_re = plane.as_slice().iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let max_im = plane.as_slice().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if max_im > REALNESS_TOLERANCE * max_re && max_im > f64::MIN_POSITIVE {
        let ratio = if max_re > 0.0 { max_im / max_re } else { f64::INFINITY };
        return Err(Error::NonRealWvd { ratio });
    }
    Ok(plane.map(|z| z.re))
}

pub fn wvd(series: &ComplexSeries) -> Result<TfImage> {
    real_part_checked(&wvd_complex(series)?)
}

/// Ambiguity function: time DFT of every IAF lag column. Rows are wrapped
/// Doppler indices, columns wrapped lag indices.
pub fn af(series: &ComplexSeries) -> Result<ComplexPlane> {
    let plane = iaf(series)?;
    let plans = Plans::new(plane.rows());
    Ok(fft_cols(&plane, plans.forward.as_ref()))
}

/// The unitary map between the (complex) TF plane and the AF plane.
pub struct AfTransform {
    len: usize,
    plans: Plans,
}

impl AfTransform {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            plans: Plans::new(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `A(θ, l) = (1/T) Σ_n Σ_k W(n, k) e^{-j2π nθ/T} e^{+j2π kl/T}`.
    ///
    /// Applied to [`wvd_complex`] this reproduces [`af`].
    pub fn forward(&self, plane: &ComplexPlane) -> ComplexPlane {
        assert_eq!(plane.shape(), (self.len, self.len));
        let mut rows = plane.clone();
        fft_rows(&mut rows, self.plans.inverse.as_ref());
        let mut out = fft_cols(&rows, self.plans.forward.as_ref());
        let scale = 1.0 / self.len as f64;
        out.as_mut_slice().iter_mut().for_each(|z| *z *= scale);
        out
    }

    /// Adjoint (and inverse) of [`AfTransform::forward`].
    pub fn adjoint(&self, plane: &ComplexPlane) -> ComplexPlane {
        assert_eq!(plane.shape(), (self.len, self.len));
        let mut out = fft_cols(plane, self.plans.inverse.as_ref());
        fft_rows(&mut out, self.plans.forward.as_ref());
        let scale = 1.0 / self.len as f64;
        out.as_mut_slice().iter_mut().for_each(|z| *z *= scale);
        out
    }
}

/// Frequency bin of a normalized frequency on the doubled WVD axis.
pub fn frequency_bin(freq: f64, len: usize) -> usize {
    ((2.0 * len as f64 * freq).round().max(0.0) as usize).min(len - 1)
}

/// Crossterm-free label: one delta of height `a_p²` per component per time
/// row, at the bin nearest to the component's instantaneous frequency.
pub fn ideal_tfr(model: &SignalModel) -> Result<TfImage> {
    let len = model.len;
    let mut out = TfImage::zeros(len, len);
    for (p, comp) in model.components.iter().enumerate() {
        let power = comp.amplitude * comp.amplitude;
        for n in 0..len {
            let freq = comp.law.inst_freq(n as f64, len);
            if !(0.0..0.5).contains(&freq) {
                return Err(Error::FrequencyOutOfBand {
                    component: p,
                    time: n,
                    freq,
                });
            }
            out[(n, frequency_bin(freq, len))] += power;
        }
    }
    Ok(out)
}

/// Scales an image by `1/T` (`T` = row count) so autoterm ridges are O(1).
pub fn normalize_input(image: &TfImage) -> TfImage {
    image.scale(1.0 / image.rows() as f64)
}
