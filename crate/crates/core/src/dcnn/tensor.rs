use crate::tfr::TfImage;
use crate::{Error, Result};

use super::Scalar;

/// Channel-major (`C × H × W`) feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<S> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> FeatureMap<S> {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![S::zero(); channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "{} values for a {channels}×{height}×{width} feature map",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn from_image(image: &TfImage) -> Self {
        Self {
            channels: 1,
            height: image.rows(),
            width: image.cols(),
            data: image.as_slice().iter().map(|&v| S::from_f64(v)).collect(),
        }
    }

    /// Panics unless the map has a single channel.
    pub fn to_image(&self) -> TfImage {
        assert_eq!(self.channels, 1, "only single-channel maps convert to images");
        TfImage::from_vec(self.height, self.width, self.data.iter().map(|v| v.as_f64()).collect())
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn channel(&self, c: usize) -> &[S] {
        let p = self.plane_len();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn cast<T: Scalar>(&self) -> FeatureMap<T> {
        FeatureMap {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| T::from_f64(v.as_f64())).collect(),
        }
    }

    /// `0.5 ‖self - other‖²`, accumulated in `f64`.
    pub fn half_sq_distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = a.as_f64() - b.as_f64();
                d * d
            })
            .sum::<f64>()
            * 0.5
    }
}
