//! AVX-512 direct convolution for `f32`, used instead of im2col + GEMM when
//! the CPU supports it.
//!
//! Feature maps are copied into zero-padded planes of `(H+2P) × (W+2P)`
//! pixels and treated as flat rows: a tap `(ky, kx)` is then a constant
//! offset `(ky-P)·Wp + (kx-P)`, so every output row segment is a sum of
//! shifted input segments. Pad columns of the output are computed too and
//! discarded.

use std::arch::x86_64::*;

use super::{ConvLayer, FeatureMap};

/// Output channels per register tile in the forward kernel.
const MR: usize = 8;
/// 16-lane vectors per register tile row.
const NV: usize = 3;
const NT: usize = NV * 16;
/// Output channels per register tile in the weight-gradient kernel.
const CB: usize = 4;
/// Pixels per weight-gradient chunk.
const CHUNK: usize = 2048;

pub fn available() -> bool {
    is_x86_feature_detected!("avx512f")
}

/// Zero-padded copy of a feature map. The first interior row starts on a
/// 64-byte boundary and every plane stride is a multiple of 16 floats.
struct Padded {
    buf: Vec<f32>,
    /// Offset of pixel `(0, 0)` of the padded plane of channel 0.
    origin: usize,
    plane: usize,
    wp: usize,
}

impl Padded {
    fn new(channels: usize, h: usize, w: usize, p: usize) -> Self {
        let wp = w + 2 * p;
        let plane = ((h + 2 * p) * wp).next_multiple_of(16);
        // Front slack covers negative tap offsets, back slack the last tile.
        let len = 32 + channels * plane + NT + 2 * wp + 64;
        let buf = vec![0f32; len];
        let addr = buf.as_ptr() as usize / 4;
        let mut origin = 16;
        while (addr + origin + p * wp) % 16 != 0 {
            origin += 1;
        }
        Self { buf, origin, plane, wp }
    }

    fn from_map(map: &FeatureMap<f32>, p: usize, channels: usize) -> Self {
        let (h, w) = (map.height, map.width);
        let mut out = Self::new(channels, h, w, p);
        for c in 0..map.channels {
            let src = map.channel(c);
            for y in 0..h {
                let dst = out.origin + c * out.plane + (y + p) * out.wp + p;
                out.buf[dst..dst + w].copy_from_slice(&src[y * w..(y + 1) * w]);
            }
        }
        out
    }
}

/// `[cotile][ci][tap][MR]` packing of `[co][ci][tap]` weights, zero-filled
/// beyond `cout`.
fn pack(weights: &[f32], cout: usize, cin: usize, taps: usize) -> Vec<f32> {
    let tiles = cout.div_ceil(MR);
    let mut out = vec![0f32; tiles * cin * taps * MR];
    for co in 0..cout {
        let (t, i) = (co / MR, co % MR);
        for ci in 0..cin {
            for tap in 0..taps {
                out[((t * cin + ci) * taps + tap) * MR + i] = weights[(co * cin + ci) * taps + tap];
            }
        }
    }
    out
}

/// Runs the forward kernel and extracts the interior, adding `bias` and
/// applying ReLU when asked.
fn convolve(x: &Padded, cin: usize, h: usize, w: usize, d: usize, packed: &[f32], cout: usize, bias: Option<&[f32]>, relu: bool) -> FeatureMap<f32> {
    let p = d / 2;
    let mut raw = Padded::new(cout.next_multiple_of(MR), h, w, p);
    debug_assert_eq!(raw.plane, x.plane);
    unsafe { forward_kernel(x, cin, h, d, packed, cout, &mut raw) };
    let mut out = FeatureMap::zeros(cout, h, w);
    for (c, dst) in out.data.chunks_mut(h * w).enumerate() {
        let b = bias.map_or(0.0, |b| b[c]);
        for y in 0..h {
            let src = raw.origin + c * raw.plane + (y + p) * raw.wp + p;
            for (o, &v) in dst[y * w..(y + 1) * w].iter_mut().zip(&raw.buf[src..src + w]) {
                *o = if relu { (v + b).max(0.0) } else { v + b };
            }
        }
    }
    out
}

#[target_feature(enable = "avx512f")]
unsafe fn forward_kernel(x: &Padded, cin: usize, h: usize, d: usize, packed: &[f32], cout: usize, out: &mut Padded) {
    let (p, wp, plane) = (d / 2, x.wp, x.plane);
    let taps = d * d;
    let offs: Vec<isize> = (0..taps)
        .map(|t| ((t / d) as isize - p as isize) * wp as isize + (t % d) as isize - p as isize)
        .collect();
    let (qs, qe) = (p * wp, (p + h) * wp);
    let xin = x.buf.as_ptr().add(x.origin);
    let dst = out.buf.as_mut_ptr().add(out.origin);
    let mut q0 = qs;
    while q0 < qe {
        for ct in 0..cout.div_ceil(MR) {
            let mut acc = [_mm512_setzero_ps(); MR * NV];
            let mut wptr = packed.as_ptr().add(ct * cin * taps * MR);
            for ci in 0..cin {
                let base = xin.add(ci * plane + q0);
                for &off in &offs {
                    let bp = base.offset(off);
                    let b0 = _mm512_loadu_ps(bp);
                    let b1 = _mm512_loadu_ps(bp.add(16));
                    let b2 = _mm512_loadu_ps(bp.add(32));
                    for i in 0..MR {
                        let a = _mm512_set1_ps(*wptr.add(i));
                        acc[i * NV] = _mm512_fmadd_ps(a, b0, acc[i * NV]);
                        acc[i * NV + 1] = _mm512_fmadd_ps(a, b1, acc[i * NV + 1]);
                        acc[i * NV + 2] = _mm512_fmadd_ps(a, b2, acc[i * NV + 2]);
                    }
                    wptr = wptr.add(MR);
                }
            }
            for i in 0..MR {
                let o = dst.add((ct * MR + i) * plane + q0);
                for v in 0..NV {
                    _mm512_storeu_ps(o.add(16 * v), acc[i * NV + v]);
                }
            }
        }
        q0 += NT;
    }
}

/// `dw[co][ci][ky][kx0..kx0+K] += Σ_q dz[co, q] · x[ci, q + off(ky, kx)]`
/// over interior rows, in fixed chunk order.
#[target_feature(enable = "avx512f")]
unsafe fn weight_grad_kernel<const K: usize>(x: &Padded, cin: usize, dz: &Padded, cout: usize, h: usize, d: usize, kx0: usize, dw: &mut [f32]) {
    let (p, wp, plane) = (d / 2, x.wp, x.plane);
    let taps = d * d;
    let (qs, n) = (p * wp, h * wp);
    let xin = x.buf.as_ptr().add(x.origin);
    let dzp = dz.buf.as_ptr().add(dz.origin);
    let mut c0 = 0;
    while c0 < n {
        let c1 = (c0 + CHUNK).min(n);
        for cb in (0..cout).step_by(CB) {
            let rows = CB.min(cout - cb);
            for ci in 0..cin {
                for ky in 0..d {
                    let mut acc = [[_mm512_setzero_ps(); K]; CB];
                    // x pixel for output q and tap (ky, kx0): q + (ky-p)·wp + kx0 - p
                    let xb = xin.add(ci * plane + qs + ky * wp + kx0).sub(p * wp + p);
                    let db = dzp.add(cb * plane + qs);
                    let mut j = c0;
                    while j + 16 <= c1 {
                        let mut dv = [_mm512_setzero_ps(); CB];
                        for (r, v) in dv.iter_mut().enumerate() {
                            *v = _mm512_load_ps(db.add(r * plane + j));
                        }
                        for k in 0..K {
                            let xv = _mm512_loadu_ps(xb.add(j + k));
                            for r in 0..CB {
                                acc[r][k] = _mm512_fmadd_ps(dv[r], xv, acc[r][k]);
                            }
                        }
                        j += 16;
                    }
                    if j < c1 {
                        let m: __mmask16 = ((1u32 << (c1 - j)) - 1) as __mmask16;
                        let mut dv = [_mm512_setzero_ps(); CB];
                        for (r, v) in dv.iter_mut().enumerate() {
                            *v = _mm512_maskz_loadu_ps(m, db.add(r * plane + j));
                        }
                        for k in 0..K {
                            let xv = _mm512_maskz_loadu_ps(m, xb.add(j + k));
                            for r in 0..CB {
                                acc[r][k] = _mm512_fmadd_ps(dv[r], xv, acc[r][k]);
                            }
                        }
                    }
                    for (r, row) in acc.iter().enumerate().take(rows) {
                        for (k, &a) in row.iter().enumerate() {
                            dw[((cb + r) * cin + ci) * taps + ky * d + kx0 + k] += _mm512_reduce_add_ps(a);
                        }
                    }
                }
            }
        }
        c0 = c1;
    }
}

pub fn forward(layer: &ConvLayer<f32>, input: &FeatureMap<f32>) -> FeatureMap<f32> {
    let d = layer.kernel;
    let taps = d * d;
    let x = Padded::from_map(input, d / 2, input.channels);
    let packed = pack(&layer.weights, layer.out_channels, layer.in_channels, taps);
    convolve(&x, layer.in_channels, input.height, input.width, d, &packed, layer.out_channels, Some(&layer.bias), layer.relu)
}

/// Weight gradient accumulation and, optionally, the input gradient for an
/// already ReLU-masked `dz`.
pub fn backward(layer: &ConvLayer<f32>, input: &FeatureMap<f32>, dz: &FeatureMap<f32>, grad_weights: &mut [f32], want_input_grad: bool) -> Option<FeatureMap<f32>> {
    let (d, cin, cout) = (layer.kernel, layer.in_channels, layer.out_channels);
    let (h, w) = (input.height, input.width);
    let p = d / 2;
    let x = Padded::from_map(input, p, cin);
    // Extra zero channels let the gradient kernel always load CB rows.
    let dzp = Padded::from_map(dz, p, cout.next_multiple_of(CB));

    let mut kx0 = 0;
    while kx0 < d {
        let k = (d - kx0).min(5);
        unsafe {
            match k {
                5 => weight_grad_kernel::<5>(&x, cin, &dzp, cout, h, d, kx0, grad_weights),
                4 => weight_grad_kernel::<4>(&x, cin, &dzp, cout, h, d, kx0, grad_weights),
                3 => weight_grad_kernel::<3>(&x, cin, &dzp, cout, h, d, kx0, grad_weights),
                2 => weight_grad_kernel::<2>(&x, cin, &dzp, cout, h, d, kx0, grad_weights),
                _ => weight_grad_kernel::<1>(&x, cin, &dzp, cout, h, d, kx0, grad_weights),
            }
        }
        kx0 += k;
    }

    want_input_grad.then(|| {
        // Input gradient = correlation of dz with the spatially flipped,
        // channel-transposed kernel.
        let taps = d * d;
        let mut flipped = vec![0f32; cin * cout * taps];
        for co in 0..cout {
            for ci in 0..cin {
                for t in 0..taps {
                    flipped[(ci * cout + co) * taps + (taps - 1 - t)] = layer.weights[(co * cin + ci) * taps + t];
                }
            }
        }
        let packed = pack(&flipped, cin, cout, taps);
        convolve(&dzp, cout, h, w, d, &packed, cin, None, false)
    })
}
