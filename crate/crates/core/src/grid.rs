//! Grid, signal, spectral-support and region types.
//!
//! The domain is a periodic N-dimensional grid stored in row-major order
//! (last axis fastest). Frequency bins use the unshifted DFT layout: the DC
//! bin sits at index 0 on every axis and index `k` stands for the wrapped
//! frequency `k` for `k <= d/2`, `k - d` otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fourier::NdFft;

/// Tolerance on `|sum(weights) - 1|` accepted by [`WeightedRegionSet`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::param("grid shape needs at least one axis"));
        }
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(Error::param(format!("grid axis {axis} has zero length")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::param("grid element count overflows"))?;
        Ok(GridShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for (slot, &d) in index.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        index
    }

    /// Flat index of the bin `-k mod dims`.
    pub fn mirror(&self, flat: usize) -> usize {
        let index = self.unravel(flat);
        let mirrored: Vec<usize> = index
            .iter()
            .zip(&self.dims)
            .map(|(&k, &d)| (d - k) % d)
            .collect();
        self.flat_index(&mirrored)
    }

    pub(crate) fn ensure_same(&self, other: &GridShape, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::param(format!(
                "{what}: shape {:?} does not match {:?}",
                other.dims, self.dims
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Signed frequency of bin `k` on an axis of length `d`.
pub fn wrapped_frequency(k: usize, d: usize) -> i64 {
    if k <= d / 2 {
        k as i64
    } else {
        k as i64 - d as i64
    }
}

/// Real-valued field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    shape: GridShape,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::param(format!(
                "signal has {} values but shape {shape} needs {}",
                values.len(),
                shape.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("signal value {i} is not finite")));
        }
        Ok(Signal { shape, values })
    }

    /// Skips the finiteness check; the engine inspects iterates itself.
    pub(crate) fn from_raw(shape: GridShape, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.len());
        Signal { shape, values }
    }

    pub fn zeros(shape: &GridShape) -> Self {
        Signal {
            values: vec![0.0; shape.len()],
            shape: shape.clone(),
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Signal) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖self - other‖`.
    pub fn distance(&self, other: &Signal) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal::from_raw(
            self.shape.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Signal) -> Signal {
        Signal::from_raw(
            self.shape.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        self.add_scaled(-1.0, other)
    }
}

/// Hermitian-symmetric Boolean mask over DFT bins describing the passband.
///
/// Carries the FFT plans for its shape so every projection reuses them.
#[derive(Clone)]
pub struct SpectralSupport {
    shape: GridShape,
    mask: Vec<bool>,
    count: usize,
    fft: Arc<NdFft>,
}

impl fmt::Debug for SpectralSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralSupport")
            .field("shape", &self.shape)
            .field("bins", &self.count)
            .finish()
    }
}

impl PartialEq for SpectralSupport {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.mask == other.mask
    }
}

impl SpectralSupport {
    /// Rectangular lowpass: bins whose wrapped frequency magnitude is at most
    /// `half_bandwidth[i]` on every axis `i`.
    pub fn lowpass(shape: &GridShape, half_bandwidth: &[usize]) -> Result<Self> {
        if half_bandwidth.len() != shape.ndim() {
            return Err(Error::param(format!(
                "expected {} half-bandwidths, got {}",
                shape.ndim(),
                half_bandwidth.len()
            )));
        }
        for (axis, (&hb, &d)) in half_bandwidth.iter().zip(shape.dims()).enumerate() {
            // hb < d/2, written without integer division.
            if 2 * hb >= d {
                return Err(Error::param(format!(
                    "half-bandwidth {hb} on axis {axis} must be below {d}/2"
                )));
            }
        }
        let mask = (0..shape.len())
            .map(|flat| {
                shape
                    .unravel(flat)
                    .iter()
                    .zip(shape.dims())
                    .zip(half_bandwidth)
                    .all(|((&k, &d), &hb)| wrapped_frequency(k, d).unsigned_abs() <= hb as u64)
            })
            .collect();
        Self::from_mask(shape.clone(), mask)
    }

    pub fn from_mask(shape: GridShape, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != shape.len() {
            return Err(Error::param("support mask length does not match shape"));
        }
        for (flat, &set) in mask.iter().enumerate() {
            if set != mask[shape.mirror(flat)] {
                return Err(Error::param(format!(
                    "support mask is not Hermitian-symmetric at bin {:?}",
                    shape.unravel(flat)
                )));
            }
        }
        let count = mask.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::param("support mask has no bins set"));
        }
        let fft = Arc::new(NdFft::new(shape.dims()));
        Ok(SpectralSupport {
            shape,
            mask,
            count,
            fft,
        })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    /// Number of in-band bins, which is also the real dimension of the
    /// bandlimited subspace.
    pub fn count(&self) -> usize {
        self.count
    }

    pub(crate) fn fft(&self) -> &NdFft {
        &self.fft
    }
}

/// Spatial Boolean mask marking where a measurement is known.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    shape: GridShape,
    mask: Vec<bool>,
    count: usize,
}

impl Region {
    pub fn from_mask(shape: GridShape, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != shape.len() {
            return Err(Error::param("region mask length does not match shape"));
        }
        let count = mask.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::param("region has no samples"));
        }
        Ok(Region { shape, mask, count })
    }

    /// Axis-aligned box `[corner, corner + extent)`.
    pub fn from_rect(shape: &GridShape, corner: &[usize], extent: &[usize]) -> Result<Self> {
        let n = shape.ndim();
        if corner.len() != n || extent.len() != n {
            return Err(Error::param(format!(
                "box corner/extent must have {n} entries"
            )));
        }
        for axis in 0..n {
            if extent[axis] == 0 {
                return Err(Error::param(format!("box extent on axis {axis} is zero")));
            }
            if corner[axis] + extent[axis] > shape.dims()[axis] {
                return Err(Error::param(format!(
                    "box [{}, {}) leaves axis {axis} of length {}",
                    corner[axis],
                    corner[axis] + extent[axis],
                    shape.dims()[axis]
                )));
            }
        }
        let mask = (0..shape.len())
            .map(|flat| {
                shape
                    .unravel(flat)
                    .iter()
                    .enumerate()
                    .all(|(a, &i)| i >= corner[a] && i < corner[a] + extent[a])
            })
            .collect();
        Self::from_mask(shape.clone(), mask)
    }

    pub fn full(shape: &GridShape) -> Self {
        Region {
            shape: shape.clone(),
            mask: vec![true; shape.len()],
            count: shape.len(),
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Regions with convex weights: every weight in `(0, 1]`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRegionSet {
    regions: Vec<Region>,
    weights: Vec<f64>,
}

impl WeightedRegionSet {
    pub fn new(regions: Vec<Region>, weights: Vec<f64>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Validation {
                index: None,
                message: "at least one region is required".into(),
            });
        }
        if regions.len() != weights.len() {
            return Err(Error::Validation {
                index: None,
                message: format!("{} regions but {} weights", regions.len(), weights.len()),
            });
        }
        let shape = regions[0].shape();
        for (i, r) in regions.iter().enumerate().skip(1) {
            if r.shape() != shape {
                return Err(Error::Validation {
                    index: Some(i),
                    message: format!("region shape {} differs from {}", r.shape(), shape),
                });
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Validation {
                    index: Some(i),
                    message: format!("weight {w} is outside (0, 1]"),
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Validation {
                index: None,
                message: format!("weights sum to {sum}, expected 1"),
            });
        }
        Ok(WeightedRegionSet { regions, weights })
    }

    pub fn uniform(regions: Vec<Region>) -> Result<Self> {
        let m = regions.len().max(1);
        Self::new(regions, vec![1.0 / m as f64; m])
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn shape(&self) -> &GridShape {
        self.regions[0].shape()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Region, f64)> {
        self.regions.iter().zip(self.weights.iter().copied())
    }

    pub fn union_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.shape().len()];
        for r in &self.regions {
            for (u, &b) in mask.iter_mut().zip(r.mask()) {
                *u |= b;
            }
        }
        mask
    }
}

/// The measured field: values of `h` on the union of the regions, zero
/// elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSignal {
    regions: WeightedRegionSet,
    samples: Signal,
}

impl MeasuredSignal {
    /// Takes stored samples that must already vanish outside the union.
    pub fn new(regions: WeightedRegionSet, samples: Signal) -> Result<Self> {
        regions
            .shape()
            .ensure_same(samples.shape(), "measured samples")?;
        let union = regions.union_mask();
        if let Some(i) = union
            .iter()
            .zip(samples.values())
            .position(|(&inside, &v)| !inside && v != 0.0)
        {
            return Err(Error::param(format!(
                "measured sample {:?} is nonzero outside every region",
                regions.shape().unravel(i)
            )));
        }
        Ok(MeasuredSignal { regions, samples })
    }

    /// Measures a full field on the regions.
    pub fn observe(regions: WeightedRegionSet, field: &Signal) -> Result<Self> {
        regions
            .shape()
            .ensure_same(field.shape(), "observed field")?;
        let union = regions.union_mask();
        let values = field
            .values()
            .iter()
            .zip(&union)
            .map(|(&v, &inside)| if inside { v } else { 0.0 })
            .collect();
        Ok(MeasuredSignal {
            samples: Signal::from_raw(field.shape().clone(), values),
            regions,
        })
    }

    pub fn regions(&self) -> &WeightedRegionSet {
        &self.regions
    }

    pub fn samples(&self) -> &Signal {
        &self.samples
    }

    pub fn shape(&self) -> &GridShape {
        self.samples.shape()
    }
}
