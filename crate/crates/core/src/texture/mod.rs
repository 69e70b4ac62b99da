//! The 181-value feature pool: layout contract, shared quantization, and
//! vector assembly.
//!
//! Group order and sizes are frozen as layout v1:
//! statistics (60), GLRLM (7), GLDM (24), GLCM (44), wavelet (23),
//! geometry (23).

pub mod geometry;
pub mod glcm;
pub mod gldm;
pub mod glrlm;
pub mod stats;

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::imaging::Grid;

/// Feature families making up the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureGroup {
    Stats,
    Glrlm,
    Gldm,
    Glcm,
    Wavelet,
    Geom,
}

impl FeatureGroup {
    pub fn expected_len(self) -> usize {
        match self {
            FeatureGroup::Stats => 60,
            FeatureGroup::Glrlm => 7,
            FeatureGroup::Gldm => 24,
            FeatureGroup::Glcm => 44,
            FeatureGroup::Wavelet => 23,
            FeatureGroup::Geom => 23,
        }
    }
}

/// Ordered, named layout of the 181 features.
#[derive(Debug)]
pub struct FeatureLayout {
    version: &'static str,
    entries: Vec<(String, FeatureGroup)>,
}

impl FeatureLayout {
    pub fn version(&self) -> &'static str {
        self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.entries[idx].0
    }

    pub fn group(&self, idx: usize) -> FeatureGroup {
        self.entries[idx].1
    }

    pub fn group_len(&self, group: FeatureGroup) -> usize {
        self.entries.iter().filter(|(_, g)| *g == group).count()
    }
}

/// Per-region statistic names, in the fixed order used for each source.
pub const STAT_NAMES: [&str; 20] = [
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "entropy",
    "correlation",
    "energy",
    "rms",
    "uniformity",
    "max",
    "min",
    "median",
    "range",
    "mad",
    "contrast",
    "homogeneity",
    "smoothness",
    "idm",
    "volume",
    "std",
];

pub const GLRLM_NAMES: [&str; 7] = [
    "glrlm_short_run_emphasis",
    "glrlm_long_run_emphasis",
    "glrlm_gray_level_nonuniformity",
    "glrlm_run_percentage",
    "glrlm_run_length_nonuniformity",
    "glrlm_low_gray_level_run_emphasis",
    "glrlm_high_gray_level_run_emphasis",
];

pub const GLCM_NAMES: [&str; 44] = [
    "glcm_asm",
    "glcm_contrast",
    "glcm_correlation",
    "glcm_sum_of_squares",
    "glcm_idm",
    "glcm_sum_average",
    "glcm_sum_variance",
    "glcm_sum_entropy",
    "glcm_entropy",
    "glcm_difference_variance",
    "glcm_difference_entropy",
    "glcm_imc1",
    "glcm_imc2",
    "glcm_mcc",
    "glcm_autocorrelation",
    "glcm_joint_average",
    "glcm_cluster_tendency",
    "glcm_cluster_shade",
    "glcm_cluster_prominence",
    "glcm_dissimilarity",
    "glcm_difference_mad",
    "glcm_maximum_probability",
    "glcm_inverse_difference",
    "glcm_inverse_difference_normalized",
    "glcm_idm_normalized",
    "glcm_inverse_variance",
    "glcm_difference_average",
    "glcm_sum_mad",
    "glcm_sum_rms",
    "glcm_marginal_entropy",
    "glcm_marginal_energy",
    "glcm_covariance",
    "glcm_diagonal_mass",
    "glcm_near_diagonal_mass",
    "glcm_contrast_fourth_moment",
    "glcm_max_marginal",
    "glcm_sum_skewness",
    "glcm_sum_kurtosis",
    "glcm_difference_skewness",
    "glcm_difference_kurtosis",
    "glcm_sum_uniformity",
    "glcm_difference_uniformity",
    "glcm_marginal_skewness",
    "glcm_marginal_kurtosis",
];

/// Table-style wavelet descriptor names; the ROI source uses all 13, the
/// lesion source the first 10.
pub const WAVELET_NAMES: [&str; 13] = [
    "contrast",
    "correlation",
    "energy",
    "homogeneity",
    "mean",
    "std",
    "entropy",
    "rms",
    "variance",
    "smoothness",
    "kurtosis",
    "skewness",
    "idm",
];

pub const GEOM_NAMES: [&str; 23] = [
    "geom_area",
    "geom_major_axis_length",
    "geom_minor_axis_length",
    "geom_eccentricity",
    "geom_orientation",
    "geom_convex_area",
    "geom_circularity",
    "geom_filled_area",
    "geom_euler_number",
    "geom_equivalent_diameter",
    "geom_solidity",
    "geom_extent",
    "geom_perimeter",
    "geom_perimeter_old",
    "geom_max_feret_diameter",
    "geom_max_feret_angle",
    "geom_min_feret_diameter",
    "geom_min_feret_angle",
    "geom_roundness_ratio",
    // Derived shape ratios closing the 23-feature group count.
    "geom_aspect_ratio",
    "geom_compactness",
    "geom_convex_perimeter_ratio",
    "geom_feret_aspect_ratio",
];

fn build_layout_v1() -> FeatureLayout {
    let mut entries = Vec::with_capacity(181);
    for src in ["roi", "lesion", "blobs"] {
        for name in STAT_NAMES {
            entries.push((format!("stats_{src}_{name}"), FeatureGroup::Stats));
        }
    }
    for name in GLRLM_NAMES {
        entries.push((name.to_string(), FeatureGroup::Glrlm));
    }
    for dir in ["0", "45", "90", "135"] {
        for name in ["std", "rms", "m1", "m2", "m3", "m4"] {
            entries.push((format!("gldm_d{dir}_{name}"), FeatureGroup::Gldm));
        }
    }
    for name in GLCM_NAMES {
        entries.push((name.to_string(), FeatureGroup::Glcm));
    }
    for name in WAVELET_NAMES {
        entries.push((format!("wavelet_roi_{name}"), FeatureGroup::Wavelet));
    }
    for name in WAVELET_NAMES.iter().take(10) {
        entries.push((format!("wavelet_lesion_{name}"), FeatureGroup::Wavelet));
    }
    for name in GEOM_NAMES {
        entries.push((name.to_string(), FeatureGroup::Geom));
    }
    debug_assert_eq!(entries.len(), 181);
    FeatureLayout {
        version: "v1",
        entries,
    }
}

/// The frozen v1 layout.
pub fn layout_v1() -> &'static FeatureLayout {
    static LAYOUT: OnceLock<FeatureLayout> = OnceLock::new();
    LAYOUT.get_or_init(build_layout_v1)
}

/// One region's 181 feature values in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    layout_version: &'static str,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout_version(&self) -> &'static str {
        self.layout_version
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rebuilds a vector from raw values (e.g. parsed from a feature matrix
    /// file), validating length and finiteness against the v1 layout.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let layout = layout_v1();
        if values.len() != layout.len() {
            return Err(Error::FeatureMatrix(format!(
                "expected {} values, got {}",
                layout.len(),
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FeatureMatrix(format!(
                "non-finite value for feature {}",
                layout.name(idx)
            )));
        }
        Ok(FeatureVector {
            values,
            layout_version: layout.version(),
        })
    }
}

/// Concatenates the six group slices in layout order into one validated
/// 181-value vector. Reports the offending feature name on any non-finite
/// value or wrong group length.
pub fn assemble_feature_vector(
    stats: &[f64],
    glrlm: &[f64],
    gldm: &[f64],
    glcm: &[f64],
    wavelet: &[f64],
    geom: &[f64],
) -> Result<FeatureVector> {
    let groups: [(&[f64], FeatureGroup); 6] = [
        (stats, FeatureGroup::Stats),
        (glrlm, FeatureGroup::Glrlm),
        (gldm, FeatureGroup::Gldm),
        (glcm, FeatureGroup::Glcm),
        (wavelet, FeatureGroup::Wavelet),
        (geom, FeatureGroup::Geom),
    ];
    for (slice, group) in groups {
        if slice.len() != group.expected_len() {
            return Err(Error::FeatureMatrix(format!(
                "group {group:?} has {} values, expected {}",
                slice.len(),
                group.expected_len()
            )));
        }
    }
    let values: Vec<f64> = groups.iter().flat_map(|(s, _)| s.iter().copied()).collect();
    FeatureVector::from_values(values)
}

/// Quantized raster shared by the co-occurrence style matrices: values binned
/// uniformly over the (masked) region's [min, max] into `levels` levels, with
/// a validity bit per pixel. A constant region maps everywhere to level 0.
#[derive(Debug, Clone)]
pub struct QuantGrid {
    pub width: usize,
    pub height: usize,
    pub levels: u16,
    pub data: Vec<u16>,
    pub valid: Vec<bool>,
}

impl QuantGrid {
    #[inline]
    pub fn level(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }
}

/// Quantizes a real-valued grid restricted to an optional mask.
pub fn quantize_region(grid: &Grid, mask: Option<&[bool]>, levels: u16) -> Result<QuantGrid> {
    if levels < 2 {
        return Err(Error::InvalidArgument("levels must be >= 2".into()));
    }
    let valid: Vec<bool> = match mask {
        Some(bits) => {
            assert_eq!(bits.len(), grid.data.len());
            bits.to_vec()
        }
        None => vec![true; grid.data.len()],
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (v, &ok) in grid.data.iter().zip(&valid) {
        if ok {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let span = hi - lo;
    let lf = f64::from(levels);
    let data = grid
        .data
        .iter()
        .zip(&valid)
        .map(|(&v, &ok)| {
            if !ok || !(span > 0.0) {
                0
            } else {
                let b = ((v - lo) / span * lf) as u16;
                b.min(levels - 1)
            }
        })
        .collect();
    Ok(QuantGrid {
        width: grid.width,
        height: grid.height,
        levels,
        data,
        valid,
    })
}
