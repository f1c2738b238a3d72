use crate::{Error, Result};

use super::{FeatureMap, Scalar};

/// Target number of output pixels per im2col block.
const BLOCK_PIXELS: usize = 512;

/// One stride-1, zero-padded `D × D` convolution (cross-correlation) with a
/// per-channel bias and optional ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<S> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `[out][in][ky][kx]`, row-major.
    pub weights: Vec<S>,
    pub bias: Vec<S>,
    pub relu: bool,
}

impl<S: Scalar> ConvLayer<S> {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, relu: bool) -> Self {
        assert!(kernel % 2 == 1, "kernel size must be odd");
        Self {
            in_channels,
            out_channels,
            kernel,
            weights: vec![S::zero(); out_channels * in_channels * kernel * kernel],
            bias: vec![S::zero(); out_channels],
            relu,
        }
    }

    /// Columns of the im2col matrix (= `in_channels · D²`).
    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }

    pub fn weight_index(&self, out: usize, inp: usize, ky: usize, kx: usize) -> usize {
        ((out * self.in_channels + inp) * self.kernel + ky) * self.kernel + kx
    }

    fn check_input(&self, input: &FeatureMap<S>) -> Result<()> {
        if input.channels != self.in_channels {
            return Err(Error::Shape(format!(
                "layer expects {} input channels, got {}",
                self.in_channels, input.channels
            )));
        }
        if input.height == 0 || input.width == 0 {
            return Err(Error::Shape("empty feature map".into()));
        }
        Ok(())
    }

    fn row_block(&self, width: usize) -> usize {
        (BLOCK_PIXELS / width).max(1)
    }

    pub fn forward(&self, input: &FeatureMap<S>) -> Result<FeatureMap<S>> {
        self.check_input(input)?;
        if let Some(out) = S::conv_forward_fast(self, input) {
            return Ok(out);
        }
        Ok(self.forward_generic(input))
    }

    /// im2col + GEMM forward pass, available for every scalar type.
    pub fn forward_generic(&self, input: &FeatureMap<S>) -> FeatureMap<S> {
        let (h, w) = (input.height, input.width);
        let plane = h * w;
        let k = self.fan_in();
        let mut out = FeatureMap::<S>::zeros(self.out_channels, h, w);
        let block = self.row_block(w);
        let mut col: Vec<S> = Vec::new();

        for r0 in (0..h).step_by(block) {
            let r1 = (r0 + block).min(h);
            let n = (r1 - r0) * w;
            im2col(input, self.kernel, r0, r1, &mut col);
            // out[:, r0*w .. r1*w] = W (out × k) · col (k × n)
            unsafe {
                S::gemm(
                    self.out_channels,
                    k,
                    n,
                    S::one(),
                    self.weights.as_ptr(),
                    k as isize,
                    1,
                    col.as_ptr(),
                    n as isize,
                    1,
                    S::zero(),
                    out.data.as_mut_ptr().add(r0 * w),
                    plane as isize,
                    1,
                );
            }
        }

        for (c, chunk) in out.data.chunks_mut(plane).enumerate() {
            let b = self.bias[c];
            if self.relu {
                chunk.iter_mut().for_each(|v| *v = (*v + b).max(S::zero()));
            } else {
                chunk.iter_mut().for_each(|v| *v += b);
            }
        }
        out
    }

    /// Backpropagates through the layer.
    ///
    /// `input` and `output` are the forward activations, `grad_output` the
    /// loss gradient w.r.t. `output`. Weight and bias gradients are
    /// accumulated into `grad_weights` / `grad_bias`; the gradient w.r.t.
    /// `input` is returned when `want_input_grad` is set. The ReLU
    /// subgradient at zero is zero.
    pub fn backward(
        &self,
        input: &FeatureMap<S>,
        output: &FeatureMap<S>,
        grad_output: FeatureMap<S>,
        grad_weights: &mut [S],
        grad_bias: &mut [S],
        want_input_grad: bool,
    ) -> Option<FeatureMap<S>> {
        let dz = self.mask_and_bias_grad(output, grad_output, grad_bias);
        if let Some(gi) = S::conv_backward_fast(self, input, &dz, grad_weights, want_input_grad) {
            return gi;
        }
        self.backward_generic(input, &dz, grad_weights, want_input_grad)
    }

    fn mask_and_bias_grad(&self, output: &FeatureMap<S>, mut grad_output: FeatureMap<S>, grad_bias: &mut [S]) -> FeatureMap<S> {
        let plane = output.plane_len();
        if self.relu {
            for (g, &a) in grad_output.data.iter_mut().zip(&output.data) {
                if a <= S::zero() {
                    *g = S::zero();
                }
            }
        }
        for (c, chunk) in grad_output.data.chunks(plane).enumerate() {
            grad_bias[c] += chunk.iter().copied().sum::<S>();
        }
        grad_output
    }

    /// im2col + GEMM weight and input gradients for a masked `dz`.
    pub fn backward_generic(&self, input: &FeatureMap<S>, dz: &FeatureMap<S>, grad_weights: &mut [S], want_input_grad: bool) -> Option<FeatureMap<S>> {
        let (h, w) = (input.height, input.width);
        let plane = h * w;
        let k = self.fan_in();

        let mut grad_input = want_input_grad.then(|| FeatureMap::zeros(self.in_channels, h, w));
        let block = self.row_block(w);
        let mut col = Vec::new();
        let mut dcol = Vec::new();

        for r0 in (0..h).step_by(block) {
            let r1 = (r0 + block).min(h);
            let n = (r1 - r0) * w;
            im2col(input, self.kernel, r0, r1, &mut col);
            // dW (out × k) += dz[:, block] (out × n) · colᵀ (n × k)
            unsafe {
                S::gemm(
                    self.out_channels,
                    n,
                    k,
                    S::one(),
                    dz.data.as_ptr().add(r0 * w),
                    plane as isize,
                    1,
                    col.as_ptr(),
                    1,
                    n as isize,
                    S::one(),
                    grad_weights.as_mut_ptr(),
                    k as isize,
                    1,
                );
            }
            if let Some(gi) = grad_input.as_mut() {
                dcol.clear();
                dcol.resize(k * n, S::zero());
                // dcol (k × n) = Wᵀ (k × out) · dz[:, block] (out × n)
                unsafe {
                    S::gemm(
                        k,
                        self.out_channels,
                        n,
                        S::one(),
                        self.weights.as_ptr(),
                        1,
                        k as isize,
                        dz.data.as_ptr().add(r0 * w),
                        plane as isize,
                        1,
                        S::zero(),
                        dcol.as_mut_ptr(),
                        n as isize,
                        1,
                    );
                }
                col2im(&dcol, self.kernel, r0, r1, gi);
            }
        }
        grad_input
    }
}

/// Unrolls rows `r0..r1` of `input` into `col`, a `(C·D²) × ((r1-r0)·W)`
/// row-major matrix of zero-padded `D × D` neighbourhoods.
fn im2col<S: Scalar>(input: &FeatureMap<S>, kernel: usize, r0: usize, r1: usize, col: &mut Vec<S>) {
    let (h, w) = (input.height as isize, input.width);
    let pad = (kernel / 2) as isize;
    let n = (r1 - r0) * w;
    col.clear();
    col.resize(input.channels * kernel * kernel * n, S::zero());
    let mut row = 0;
    for ci in 0..input.channels {
        let src = input.channel(ci);
        for ky in 0..kernel {
            for kx in 0..kernel {
                let dst = &mut col[row * n..(row + 1) * n];
                let dx = kx as isize - pad;
                // valid output columns x with 0 <= x + dx < w
                let x_lo = (-dx).max(0) as usize;
                let x_hi = ((w as isize - dx).min(w as isize)).max(0) as usize;
                for (i, y) in (r0..r1).enumerate() {
                    let iy = y as isize + ky as isize - pad;
                    if iy < 0 || iy >= h || x_lo >= x_hi {
                        continue;
                    }
                    let src_row = &src[iy as usize * w..(iy as usize + 1) * w];
                    let d = &mut dst[i * w..(i + 1) * w];
                    let sx_lo = (x_lo as isize + dx) as usize;
                    d[x_lo..x_hi].copy_from_slice(&src_row[sx_lo..sx_lo + (x_hi - x_lo)]);
                }
                row += 1;
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-adds `dcol` back onto the input gradient.
fn col2im<S: Scalar>(dcol: &[S], kernel: usize, r0: usize, r1: usize, grad: &mut FeatureMap<S>) {
    let (h, w) = (grad.height as isize, grad.width);
    let pad = (kernel / 2) as isize;
    let n = (r1 - r0) * w;
    let plane = grad.plane_len();
    let mut row = 0;
    for ci in 0..grad.channels {
        let dst_plane = &mut grad.data[ci * plane..(ci + 1) * plane];
        for ky in 0..kernel {
            for kx in 0..kernel {
                let src = &dcol[row * n..(row + 1) * n];
                let dx = kx as isize - pad;
                let x_lo = (-dx).max(0) as usize;
                let x_hi = ((w as isize - dx).min(w as isize)).max(0) as usize;
                for (i, y) in (r0..r1).enumerate() {
                    let iy = y as isize + ky as isize - pad;
                    if iy < 0 || iy >= h || x_lo >= x_hi {
                        continue;
                    }
                    let s = &src[i * w + x_lo..i * w + x_hi];
                    let sx_lo = (x_lo as isize + dx) as usize;
                    let d = &mut dst_plane[iy as usize * w + sx_lo..iy as usize * w + sx_lo + (x_hi - x_lo)];
                    for (dv, &sv) in d.iter_mut().zip(s) {
                        *dv += sv;
                    }
                }
                row += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct nested-loop convolution, independent of the im2col/GEMM path.
    fn naive_forward(layer: &ConvLayer<f64>, input: &FeatureMap<f64>) -> FeatureMap<f64> {
        let (h, w) = (input.height as isize, input.width as isize);
        let pad = (layer.kernel / 2) as isize;
        let mut out = FeatureMap::zeros(layer.out_channels, input.height, input.width);
        for o in 0..layer.out_channels {
            for y in 0..h {
                for x in 0..w {
                    let mut acc = layer.bias[o];
                    for i in 0..layer.in_channels {
                        for ky in 0..layer.kernel {
                            for kx in 0..layer.kernel {
                                let (iy, ix) = (y + ky as isize - pad, x + kx as isize - pad);
                                if iy < 0 || ix < 0 || iy >= h || ix >= w {
                                    continue;
                                }
                                acc += layer.weights[layer.weight_index(o, i, ky, kx)]
                                    * input.data[(i * input.height + iy as usize) * input.width + ix as usize];
                            }
                        }
                    }
                    if layer.relu {
                        acc = acc.max(0.0);
                    }
                    out.data[(o * input.height + y as usize) * input.width + x as usize] = acc;
                }
            }
        }
        out
    }

    fn pseudo_random(len: usize, salt: u64) -> Vec<f64> {
        let mut rng = crate::seed::rng(salt);
        (0..len).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect()
    }

    #[test]
    fn identity_kernel() {
        let mut layer = ConvLayer::<f64>::zeros(1, 1, 5, false);
        let centre = layer.weight_index(0, 0, 2, 2);
        layer.weights[centre] = 1.0;
        let input = FeatureMap::from_vec(1, 6, 7, pseudo_random(42, 1)).unwrap();
        assert_eq!(layer.forward(&input).unwrap(), input);
    }

    #[test]
    fn all_ones_kernel_counts_taps() {
        let mut layer = ConvLayer::<f64>::zeros(1, 1, 3, false);
        layer.weights.iter_mut().for_each(|v| *v = 1.0);
        let c = 2.5;
        let input = FeatureMap::from_vec(1, 5, 6, vec![c; 30]).unwrap();
        let out = layer.forward(&input).unwrap();
        let at = |y: usize, x: usize| out.data[y * 6 + x];
        assert_eq!(at(2, 2), 9.0 * c);
        assert_eq!(at(0, 2), 6.0 * c);
        assert_eq!(at(2, 0), 6.0 * c);
        assert_eq!(at(0, 0), 4.0 * c);
        assert_eq!(at(4, 5), 4.0 * c);
    }

    #[test]
    fn zero_input_with_bias_and_relu() {
        let mut layer = ConvLayer::<f64>::zeros(2, 3, 3, true);
        layer.bias = vec![0.7, -0.2, 0.0];
        let out = layer.forward(&FeatureMap::zeros(2, 4, 4)).unwrap();
        for (c, expected) in [0.7, 0.0, 0.0].into_iter().enumerate() {
            assert!(out.channel(c).iter().all(|&v| v == expected));
        }
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let layer = ConvLayer::<f32>::zeros(2, 3, 3, true);
        assert!(matches!(layer.forward(&FeatureMap::zeros(1, 4, 4)), Err(Error::Shape(_))));
    }

    #[test]
    fn gemm_path_matches_naive_loops() {
        // Tall enough to span several im2col blocks.
        for (h, w, relu) in [(7, 5, true), (70, 64, false), (3, 300, true)] {
            let mut layer = ConvLayer::<f64>::zeros(3, 4, 5, relu);
            layer.weights = pseudo_random(layer.weights.len(), 2);
            layer.bias = pseudo_random(4, 3);
            let input = FeatureMap::from_vec(3, h, w, pseudo_random(3 * h * w, 4)).unwrap();
            let fast = layer.forward(&input).unwrap();
            let slow = naive_forward(&layer, &input);
            for (a, b) in fast.data.iter().zip(&slow.data) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), c> == <x, col2im(c)>
        let (ch, h, w, kern) = (2, 9, 11, 5);
        let x = FeatureMap::from_vec(ch, h, w, pseudo_random(ch * h * w, 5)).unwrap();
        let mut col = Vec::new();
        im2col(&x, kern, 2, 7, &mut col);
        let c = pseudo_random(col.len(), 6);
        let lhs: f64 = col.iter().zip(&c).map(|(a, b)| a * b).sum();
        let mut back = FeatureMap::zeros(ch, h, w);
        col2im(&c, kern, 2, 7, &mut back);
        let rhs: f64 = x.data.iter().zip(&back.data).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    fn random_f32(len: usize, salt: u64) -> Vec<f32> {
        pseudo_random(len, salt).into_iter().map(|v| v as f32).collect()
    }

    fn max_rel_diff(a: &[f32], b: &[f32]) -> f32 {
        let scale = b.iter().fold(1e-6f32, |m, v| m.max(v.abs()));
        a.iter().zip(b).fold(0.0f32, |m, (x, y)| m.max((x - y).abs())) / scale
    }

    #[test]
    fn dispatched_path_matches_generic() {
        let shapes = [
            (1, 40, 5, 17, 23, true),
            (40, 1, 5, 20, 9, false),
            (6, 9, 3, 1, 1, true),
            (3, 5, 7, 11, 40, true),
            (8, 8, 5, 33, 64, true),
        ];
        for (i, &(cin, cout, d, h, w, relu)) in shapes.iter().enumerate() {
            let salt = 10 * i as u64;
            let mut layer = ConvLayer::<f32>::zeros(cin, cout, d, relu);
            layer.weights = random_f32(layer.weights.len(), salt);
            layer.bias = random_f32(cout, salt + 1);
            let input = FeatureMap::from_vec(cin, h, w, random_f32(cin * h * w, salt + 2)).unwrap();

            let out = layer.forward(&input).unwrap();
            let reference = layer.forward_generic(&input);
            assert!(max_rel_diff(&out.data, &reference.data) < 1e-5, "forward {i}");

            let grad = FeatureMap::from_vec(cout, h, w, random_f32(cout * h * w, salt + 3)).unwrap();
            let mut gw = vec![0.5f32; layer.weights.len()];
            let mut gb = vec![0.0f32; cout];
            let gi = layer.backward(&input, &out, grad.clone(), &mut gw, &mut gb, true).unwrap();

            let dz = layer.mask_and_bias_grad(&out, grad, &mut vec![0.0; cout]);
            let mut gw_ref = vec![0.5f32; layer.weights.len()];
            let gi_ref = layer.backward_generic(&input, &dz, &mut gw_ref, true).unwrap();
            assert!(max_rel_diff(&gw, &gw_ref) < 1e-5, "weight grad {i}");
            assert!(max_rel_diff(&gi.data, &gi_ref.data) < 1e-5, "input grad {i}");
        }
    }
}
