use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::signals::ComplexSeries;
use crate::tfr::{self, TfImage};
use crate::{Error, Result};

/// Residuals below this fraction of the row norm end the pursuit early.
const EXACT_FIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmpConfig {
    /// Atoms selected per time row (`K_omp ≥ 1`).
    pub sparsity: usize,
    /// Gaussian lag taper scale in samples; `f64::INFINITY` disables it.
    pub sigma_lag: f64,
}

impl OmpConfig {
    /// Two atoms per row and a taper of `T/8` lags.
    pub fn for_len(len: usize) -> Self {
        Self {
            sparsity: 2,
            sigma_lag: len as f64 / 8.0,
        }
    }
}

/// Result of one per-row pursuit.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFit {
    /// Selected frequency bins in selection order.
    pub support: Vec<usize>,
    /// Least-squares coefficients on `support`.
    pub coeffs: Vec<Complex64>,
    /// Residual norm before the first and after every selection.
    pub residual_norms: Vec<f64>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tapered atom `w[l] e^{j2π k l / T}` on the observed lags.
fn atom(k: usize, weights: &[f64]) -> Vec<Complex64> {
    let len = weights.len();
    weights
        .iter()
        .enumerate()
        .map(|(l, &w)| {
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(w, 2.0 * std::f64::consts::PI * ((k * l) % len) as f64 / len as f64)
            }
        })
        .collect()
}

/// Solves the `n × n` complex system `a x = b` by Gaussian elimination with
/// partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Orthogonal matching pursuit of `row` (already tapered, zero outside the
/// observed lags) over the tapered DFT atoms defined by `weights`.
pub fn omp_row(row: &[Complex64], weights: &[f64], sparsity: usize, fft: &dyn rustfft::Fft<f64>) -> RowFit {
    let len = row.len();
    let row_norm = norm(row);
    let mut fit = RowFit {
        support: Vec::new(),
        coeffs: Vec::new(),
        residual_norms: vec![row_norm],
    };
    if row_norm == 0.0 {
        return fit;
    }
    let mut residual = row.to_vec();
    let mut atoms: Vec<Vec<Complex64>> = Vec::new();
    let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
    while fit.support.len() < sparsity.min(len) {
        // <atom_k, r> = Σ_l w[l] r[l] e^{-j2π k l/T}: one forward DFT.
        for ((s, r), &w) in spectrum.iter_mut().zip(&residual).zip(weights) {
            *s = r * w;
        }
        fft.process(&mut spectrum);
        let best = (0..len)
            .filter(|k| !fit.support.contains(k))
            .fold(None, |best: Option<(usize, f64)>, k| {
                let c = spectrum[k].norm_sqr();
                match best {
                    Some((_, b)) if b >= c => best,
                    _ => Some((k, c)),
                }
            });
        let Some((k, _)) = best else { break };
        fit.support.push(k);
        atoms.push(atom(k, weights));

        let gram = atoms
            .iter()
            .map(|a| atoms.iter().map(|b| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()).collect())
            .collect();
        let rhs = atoms.iter().map(|a| a.iter().zip(row).map(|(x, y)| x.conj() * y).sum()).collect();
        let Some(coeffs) = solve(gram, rhs) else {
            fit.support.pop();
            atoms.pop();
            break;
        };
        residual.copy_from_slice(row);
        for (a, &c) in atoms.iter().zip(&coeffs) {
            for (r, &v) in residual.iter_mut().zip(a) {
                *r -= c * v;
            }
        }
        fit.coeffs = coeffs;
        let rn = norm(&residual);
        fit.residual_norms.push(rn);
        if rn <= EXACT_FIT * row_norm {
            break;
        }
    }
    fit
}

/// Lag weights of time row `n`: the Gaussian taper on observed lags, zero on
/// lags whose samples fall outside the record (and on lag `-T/2`).
pub fn lag_weights(n: usize, len: usize, sigma_lag: f64) -> Vec<f64> {
    (0..len)
        .map(|l| {
            let m = tfr::signed_lag(l, len);
            let (a, b) = (n as isize + m, n as isize - m);
            let observed = m != -(len as isize / 2) && a >= 0 && b >= 0 && a < len as isize && b < len as isize;
            if !observed {
                0.0
            } else if sigma_lag.is_infinite() {
                1.0
            } else {
                (-((m * m) as f64) / (2.0 * sigma_lag * sigma_lag)).exp()
            }
        })
        .collect()
}

/// Per-time-instant OMP on the tapered IAF. Row `n` of the output holds the
/// magnitudes of the selected DFT coefficients of IAF row `n`.
pub fn omp_tfr(series: &ComplexSeries, cfg: &OmpConfig) -> Result<TfImage> {
    if cfg.sparsity == 0 {
        return Err(Error::InvalidArgument("OMP sparsity must be at least 1".into()));
    }
    let plane = tfr::iaf(series)?;
    let len = plane.rows();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let rows: Vec<Vec<f64>> = (0..len)
        .into_par_iter()
        .map(|n| {
            let weights = lag_weights(n, len, cfg.sigma_lag);
            let row: Vec<Complex64> = plane.row(n).iter().zip(&weights).map(|(z, &w)| z * w).collect();
            let fit = omp_row(&row, &weights, cfg.sparsity, fft.as_ref());
            let mut out = vec![0.0; len];
            for (&k, c) in fit.support.iter().zip(&fit.coeffs) {
                out[k] = c.norm();
            }
            out
        })
        .collect();
    Ok(TfImage::from_vec(len, len, rows.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use crate::signals::{Component, NoiseLevel, PhaseLaw, SignalModel};
    use proptest::prelude::*;

    const T: usize = 128;

    fn tone(f: f64) -> ComplexSeries {
        SignalModel::new(vec![Component::unit(PhaseLaw::tone(f))], T).unwrap().synthesize()
    }

    fn fit_row(series: &ComplexSeries, n: usize, cfg: &OmpConfig) -> RowFit {
        let plane = tfr::iaf(series).unwrap();
        let w = lag_weights(n, T, cfg.sigma_lag);
        let row: Vec<Complex64> = plane.row(n).iter().zip(&w).map(|(z, &w)| z * w).collect();
        let fft = FftPlanner::new().plan_fft_forward(T);
        omp_row(&row, &w, cfg.sparsity, fft.as_ref())
    }

    #[test]
    fn zero_series_gives_zero_image() {
        let img = omp_tfr(&ComplexSeries::zeros(T), &OmpConfig::for_len(T)).unwrap();
        assert!(img.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quarter_band_tone_is_one_sparse() {
        let cfg = OmpConfig {
            sparsity: 1,
            ..OmpConfig::for_len(T)
        };
        for n in [20, 64, 100] {
            let fit = fit_row(&tone(0.25), n, &cfg);
            assert_eq!(fit.support, vec![64]);
            assert!(fit.residual_norms.last().unwrap() < &(1e-6 * fit.residual_norms[0]));
            assert!((fit.coeffs[0].norm() - 1.0).abs() < 1e-9);
        }
        let img = omp_tfr(&tone(0.25), &cfg).unwrap();
        assert!((img[(64, 64)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn untapered_dictionary_also_recovers_tones() {
        let cfg = OmpConfig {
            sparsity: 2,
            sigma_lag: f64::INFINITY,
        };
        let fit = fit_row(&tone(0.125), 50, &cfg);
        assert_eq!(fit.support, vec![32]);
    }

    #[test]
    fn solver_matches_known_system() {
        let c = |re, im| Complex64::new(re, im);
        let a = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]];
        let x = [c(1.0, -1.0), c(0.5, 2.0)];
        let b = a.iter().map(|r| r[0] * x[0] + r[1] * x[1]).collect();
        let got = solve(a, b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
        assert!(solve(vec![vec![c(0.0, 0.0)]], vec![c(1.0, 0.0)]).is_none());
    }

    #[test]
    fn rows_have_at_most_sparsity_nonzeros() {
        let model = SignalModel::new(
            vec![Component::unit(PhaseLaw::linear(0.1, 0.3)), Component::unit(PhaseLaw::tone(0.4))],
            T,
        )
        .unwrap();
        let noisy = model.synthesize().add_noise(NoiseLevel::db(0.0), 5);
        for k in [1, 2, 3] {
            let cfg = OmpConfig {
                sparsity: k,
                ..OmpConfig::for_len(T)
            };
            let img = omp_tfr(&noisy, &cfg).unwrap();
            for n in 0..T {
                assert!(img.row(n).iter().filter(|&&v| v != 0.0).count() <= k);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn residual_is_nonincreasing(s in any::<u64>(), n in 0usize..T, k in 1usize..6) {
            let mut rng = seed::rng(s);
            let series = ComplexSeries((0..T).map(|_| Complex64::new(
                rand::Rng::random_range(&mut rng, -1.0..1.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
            )).collect());
            let fit = fit_row(&series, n, &OmpConfig { sparsity: k, ..OmpConfig::for_len(T) });
            for w in fit.residual_norms.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}
