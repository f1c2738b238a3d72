use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::signals::ComplexSeries;
use crate::tfr::{self, AfTransform, ComplexPlane, TfImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1ProxConfig {
    /// Kept Doppler indices `|θ| ≤ doppler_half_width`.
    pub doppler_half_width: usize,
    /// Kept lags `|m| ≤ lag_half_width`.
    pub lag_half_width: usize,
    /// Threshold weight; `None` selects `lambda_fraction · max|Φᴴ b|`.
    pub lambda: Option<f64>,
    pub lambda_fraction: f64,
    pub step: f64,
    pub max_iters: usize,
    /// Stop once the relative objective change falls below this.
    pub tolerance: f64,
}

impl Default for L1ProxConfig {
    fn default() -> Self {
        Self {
            doppler_half_width: 6,
            lag_half_width: 6,
            lambda: None,
            lambda_fraction: 0.01,
            step: 1.0,
            max_iters: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IstaOutcome {
    pub image: TfImage,
    pub lambda: f64,
    /// Objective at the starting point and after every iteration.
    pub objective: Vec<f64>,
}

impl IstaOutcome {
    pub fn iterations(&self) -> usize {
        self.objective.len() - 1
    }
}

/// `sign(x) · max(|x| - τ, 0)`.
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

fn wrapped_within(index: usize, len: usize, half_width: usize) -> bool {
    tfr::signed_lag(index, len).unsigned_abs() <= half_width
}

/// Centred `(2·dh+1) × (2·lh+1)` rectangle on the wrapped AF grid.
pub fn af_mask(len: usize, doppler_half_width: usize, lag_half_width: usize) -> Matrix<bool> {
    Matrix::from_fn(len, len, |theta, l| {
        wrapped_within(theta, len, doppler_half_width) && wrapped_within(l, len, lag_half_width)
    })
}

struct Problem<'a> {
    transform: AfTransform,
    mask: &'a Matrix<bool>,
    b: &'a ComplexPlane,
}

impl Problem<'_> {
    /// `M(Φ Y) - b`, zero off the mask.
    fn residual(&self, y: &TfImage) -> ComplexPlane {
        let mut r = self.transform.forward(&y.map(|&v| Complex64::new(v, 0.0)));
        for ((z, &keep), &bv) in r.as_mut_slice().iter_mut().zip(self.mask.as_slice()).zip(self.b.as_slice()) {
            *z = if keep { *z - bv } else { Complex64::new(0.0, 0.0) };
        }
        r
    }

    fn objective(&self, r: &ComplexPlane, y: &TfImage, lambda: f64) -> f64 {
        let fit = 0.5 * r.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let l1: f64 = y.as_slice().iter().map(|v| v.abs()).sum();
        // Avoids ∞ · 0 when an infinite threshold zeroes everything.
        fit + if l1 == 0.0 { 0.0 } else { lambda * l1 }
    }
}

/// ISTA on `min_Y ½‖M(Φ Y) - b‖² + λ‖Y‖₁` over real `Y`, where `Φ` is the
/// unitary TF-to-AF map and `b` is already zero off `mask`.
pub fn ista(b: &ComplexPlane, mask: &Matrix<bool>, cfg: &L1ProxConfig) -> Result<IstaOutcome> {
    if !(cfg.step > 0.0 && cfg.step <= 1.0) {
        return Err(Error::InvalidArgument(format!("ISTA step {} outside (0, 1]", cfg.step)));
    }
    let len = b.rows();
    let problem = Problem {
        transform: AfTransform::new(len),
        mask,
        b,
    };
    let lambda = match cfg.lambda {
        Some(l) if l >= 0.0 => l,
        Some(l) => return Err(Error::InvalidArgument(format!("negative λ {l}"))),
        None => {
            let back = problem.transform.adjoint(b);
            cfg.lambda_fraction * back.as_slice().iter().fold(0.0f64, |m, z| m.max(z.norm()))
        }
    };

    let mut y = TfImage::zeros(len, len);
    let mut r = problem.residual(&y);
    let mut objective = vec![problem.objective(&r, &y, lambda)];
    for _ in 0..cfg.max_iters {
        let grad = problem.transform.adjoint(&r);
        for (v, g) in y.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *v = soft_threshold(*v - cfg.step * g.re, cfg.step * lambda);
        }
        r = problem.residual(&y);
        let obj = problem.objective(&r, &y, lambda);
        let prev = *objective.last().expect("nonempty");
        objective.push(obj);
        if (prev - obj).abs() <= cfg.tolerance * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(IstaOutcome {
        image: y,
        lambda,
        objective,
    })
}

/// Masked-AF ℓ1 reconstruction of a signal's TF image.
pub fn l1prox_run(series: &ComplexSeries, cfg: &L1ProxConfig) -> Result<IstaOutcome> {
    let mut b = tfr::af(series)?;
    let len = b.rows();
    let mask = af_mask(len, cfg.doppler_half_width, cfg.lag_half_width);
    for (z, &keep) in b.as_mut_slice().iter_mut().zip(mask.as_slice()) {
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    ista(&b, &mask, cfg)
}

pub fn l1prox_tfr(series: &ComplexSeries, cfg: &L1ProxConfig) -> Result<TfImage> {
    Ok(l1prox_run(series, cfg)?.image)
}
