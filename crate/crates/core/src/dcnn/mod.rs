//! From-scratch deep convolutional network.
//!
//! `N` same-size convolution layers: the first `N-1` are Conv+ReLU with `C`
//! output channels, the last is a plain single-channel Conv. All layers use
//! stride 1 and `(D-1)/2` zero padding, so every feature map keeps the input
//! size and one output pixel sees a `(DN-N+1) × (DN-N+1)` input window.
//!
//! Training minimises `(1/2M) Σ_m ‖Ŷ_m - Y_m‖_F²` with Adam. Convolutions
//! lower to GEMM through an im2col buffer built over blocks of rows, or for
//! `f32` on AVX-512 machines to a direct vectorised kernel. All reductions
//! run in a fixed order so results are bit-reproducible on a given machine.

mod adam;
mod conv;
mod io;
mod network;
#[cfg(target_arch = "x86_64")]
mod simd;
mod tensor;
mod train;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign};

pub use adam::{AdamConfig, AdamState};
pub use conv::ConvLayer;
pub use io::{load_weights, save_weights, WEIGHT_FORMAT_VERSION, WEIGHT_MAGIC};
pub use network::{mse_loss, Gradients, Network, NetworkMeta, Trace};
pub use tensor::FeatureMap;
pub use train::{train, EpochRecord, LossHistory, Sample, TrainConfig, TrainOutcome};

/// Defaults from the reference architecture.
pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_CHANNELS: usize = 40;
pub const DEFAULT_KERNEL: usize = 5;
pub const DEFAULT_BATCH: usize = 32;

/// Floating-point element type of network tensors (`f32` for training,
/// `f64` for gradient checks).
pub trait Scalar:
    num_traits::Float + Default + Debug + Send + Sync + AddAssign + MulAssign + Sum + 'static
{
    /// `C ← α A B + β C` on strided row-major views.
    ///
    /// # Safety
    /// The pointers and strides must describe valid, non-aliasing `m × k`,
    /// `k × n` and `m × n` matrices.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    /// Specialised convolution forward pass, if one exists for this type
    /// on this machine.
    fn conv_forward_fast(_layer: &ConvLayer<Self>, _input: &FeatureMap<Self>) -> Option<FeatureMap<Self>> {
        None
    }

    /// Specialised weight/input gradient for a ReLU-masked `dz`; the outer
    /// `None` means no fast path.
    fn conv_backward_fast(
        _layer: &ConvLayer<Self>,
        _input: &FeatureMap<Self>,
        _dz: &FeatureMap<Self>,
        _grad_weights: &mut [Self],
        _want_input_grad: bool,
    ) -> Option<Option<FeatureMap<Self>>> {
        None
    }

    fn from_f64(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("finite cast")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite cast")
    }
}

impl Scalar for f32 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }

    #[cfg(target_arch = "x86_64")]
    fn conv_forward_fast(layer: &ConvLayer<f32>, input: &FeatureMap<f32>) -> Option<FeatureMap<f32>> {
        fast_enabled().then(|| simd::forward(layer, input))
    }

    #[cfg(target_arch = "x86_64")]
    fn conv_backward_fast(
        layer: &ConvLayer<f32>,
        input: &FeatureMap<f32>,
        dz: &FeatureMap<f32>,
        grad_weights: &mut [f32],
        want_input_grad: bool,
    ) -> Option<Option<FeatureMap<f32>>> {
        fast_enabled().then(|| simd::backward(layer, input, dz, grad_weights, want_input_grad))
    }
}

impl Scalar for f64 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// Whether `f32` convolutions use the AVX-512 kernels. Set `TFNET_GENERIC_CONV`
/// to force the portable path.
#[cfg(target_arch = "x86_64")]
fn fast_enabled() -> bool {
    static ENABLED: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
    *ENABLED.get_or_init(|| simd::available() && std::env::var_os("TFNET_GENERIC_CONV").is_none())
}
