//! Dense per-pixel float maps.

use crate::error::{Error, Result};
use crate::geometry::BitMask;
use crate::scalar::Scalar;

/// Row-major `H x W` map of scalars (probabilities, gradients).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap<T = f32> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> ScalarMap<T> {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, T::zero())
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        assert!(height > 0 && width > 0, "map dimensions must be positive");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width],
                found: vec![data.len()],
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// `1` where the mask is set, `0` elsewhere.
    pub fn from_mask(mask: &BitMask) -> Self {
        let data = mask
            .bits()
            .iter()
            .map(|&b| if b { T::one() } else { T::zero() })
            .collect();
        Self {
            height: mask.height(),
            width: mask.width(),
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn cast<U: Scalar>(&self) -> ScalarMap<U> {
        ScalarMap {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

/// Row-major `H x W x 2` field of per-pixel `(dx, dy)` vectors in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftField<T = f32> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> ShiftField<T> {
    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "field dimensions must be positive");
        Self {
            height,
            width,
            data: vec![T::zero(); height * width * 2],
        }
    }

    /// Wraps interleaved `(dx, dy)` data of length `2 * height * width`.
    pub fn from_interleaved(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width * 2 {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width, 2],
                found: vec![data.len()],
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (T, T) {
        let i = 2 * (y * self.width + x);
        (self.data[i], self.data[i + 1])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: (T, T)) {
        let i = 2 * (y * self.width + x);
        self.data[i] = v.0;
        self.data[i + 1] = v.1;
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn is_zero_at(&self, x: usize, y: usize) -> bool {
        let (dx, dy) = self.get(x, y);
        dx == T::zero() && dy == T::zero()
    }

    pub fn cast<U: Scalar>(&self) -> ShiftField<U> {
        ShiftField {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

/// Network-style outputs: kernel probability map and predicted shift field.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMaps<T = f32> {
    pub prob_map: ScalarMap<T>,
    pub shift_field: ShiftField<T>,
}

impl<T: Scalar> PredictionMaps<T> {
    pub fn new(prob_map: ScalarMap<T>, shift_field: ShiftField<T>) -> Result<Self> {
        crate::error::check_dims(prob_map.dims(), shift_field.dims())?;
        Ok(Self {
            prob_map,
            shift_field,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.prob_map.dims()
    }

    pub fn cast<U: Scalar>(&self) -> PredictionMaps<U> {
        PredictionMaps {
            prob_map: self.prob_map.cast(),
            shift_field: self.shift_field.cast(),
        }
    }

    /// First non-finite shift component, as a pixel position.
    pub fn first_non_finite_shift(&self) -> Option<(usize, usize)> {
        let w = self.shift_field.width();
        self.shift_field
            .data()
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| ((i / 2) % w, (i / 2) / w))
    }
}
