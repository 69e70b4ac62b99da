//! Per-region intensity statistics: the 20-descriptor block computed from
//! the whole ROI, the segmented lesion, and the union of kept blobs.
//!
//! Conventions, fixed for layout v1:
//! - variance/std are population moments; skewness and kurtosis are the
//!   standardized third/fourth moments (kurtosis not excess), 0 on constant
//!   regions;
//! - entropy and uniformity use a 256-bin histogram of the region's own
//!   [min, max] range, entropy in bits;
//! - correlation, contrast, homogeneity, inverse difference moment and
//!   energy come from a distance-1, 16-level GLCM of the region;
//! - smoothness is `1 - 1/(1 + (sigma/range)^2)`, 0 on constant regions;
//! - "suspicious regions volume" is the region's pixel count.

use crate::error::{Error, Result};
use crate::imaging::Grid;
use crate::segmentation::{BlobSet, LesionMask};
use crate::texture::glcm::{glcm_of_quantized, scalars};
use crate::texture::{quantize_region, QuantGrid};

/// A real-valued raster restricted to an optional mask.
#[derive(Clone, Copy)]
pub struct Region<'a> {
    pub grid: &'a Grid,
    pub mask: Option<&'a [bool]>,
}

impl<'a> Region<'a> {
    pub fn full(grid: &'a Grid) -> Self {
        Region { grid, mask: None }
    }

    pub fn masked(grid: &'a Grid, mask: &'a [bool]) -> Self {
        assert_eq!(mask.len(), grid.data.len());
        Region {
            grid,
            mask: Some(mask),
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid
            .data
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.mask.map(|m| m[*i]).unwrap_or(true))
            .map(|(_, &v)| v)
    }

    fn quantized(&self, levels: u16) -> Result<QuantGrid> {
        quantize_region(self.grid, self.mask, levels)
    }
}

/// The 20 per-region statistics in fixed order (see `STAT_NAMES`).
pub fn stats20(region: Region<'_>) -> Result<[f64; 20]> {
    let mut values: Vec<f64> = region.values().collect();
    let n = values.len();
    if n == 0 {
        return Err(Error::DegenerateInput("empty region".into()));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    let mut mad = 0.0;
    let mut sumsq = 0.0;
    for &v in &values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += d.abs();
        sumsq += v * v;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    mad /= nf;
    let variance = m2;
    let std = variance.sqrt();
    let (skewness, kurtosis) = if std > 0.0 {
        (m3 / (std * std * std), m4 / (variance * variance))
    } else {
        (0.0, 0.0)
    };
    let rms = (sumsq / nf).sqrt();

    values.sort_by(|a, b| a.partial_cmp(b).expect("finite pixel values"));
    let min = values[0];
    let max = values[n - 1];
    let range = max - min;
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };

    // Histogram statistics over the region's own range.
    let (entropy, uniformity) = if range > 0.0 {
        let mut hist = [0u64; 256];
        for &v in &values {
            let b = (((v - min) / range) * 256.0) as usize;
            hist[b.min(255)] += 1;
        }
        let mut ent = 0.0;
        let mut uni = 0.0;
        for &c in &hist {
            if c > 0 {
                let p = c as f64 / nf;
                ent -= p * p.log2();
                uni += p * p;
            }
        }
        (ent, uni)
    } else {
        (0.0, 1.0)
    };

    let smoothness = if range > 0.0 {
        let s = std / range;
        1.0 - 1.0 / (1.0 + s * s)
    } else {
        0.0
    };

    // Spatial texture scalars from a distance-1 GLCM of the region.
    let q = region.quantized(16)?;
    let m = glcm_of_quantized(&q, 1);
    let correlation = scalars::correlation(&m);
    let energy = scalars::asm(&m);
    let contrast = scalars::contrast(&m);
    let homogeneity = scalars::inverse_difference(&m);
    let idm = scalars::idm(&m);

    Ok([
        mean,
        variance,
        skewness,
        kurtosis,
        entropy,
        correlation,
        energy,
        rms,
        uniformity,
        max,
        min,
        median,
        range,
        mad,
        contrast,
        homogeneity,
        smoothness,
        idm,
        nf,
        std,
    ])
}

/// The 60-value statistics group: stats20 over (1) the whole ROI, (2) the
/// segmented lesion, (3) the union of all kept blobs, concatenated.
pub fn stats_group(grid: &Grid, lesion: &LesionMask, blobs: &BlobSet) -> Result<[f64; 60]> {
    let roi_stats = stats20(Region::full(grid))?;
    let lesion_stats = stats20(Region::masked(grid, lesion.bits()))?;
    let union = blobs.union_mask();
    let blob_stats = stats20(Region::masked(grid, &union.bits))?;
    let mut out = [0.0; 60];
    out[..20].copy_from_slice(&roi_stats);
    out[20..40].copy_from_slice(&lesion_stats);
    out[40..].copy_from_slice(&blob_stats);
    Ok(out)
}
