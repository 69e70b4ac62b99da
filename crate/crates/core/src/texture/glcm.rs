//! Gray-level co-occurrence matrix: distance-2 pair statistics summed over
//! the four lattice directions, and the frozen 44-descriptor set.
//!
//! Descriptor conventions, fixed for layout v1:
//! - levels take 1-based values `1..=L` in all formulas;
//! - entropies use log base 2, with `0 log 0 = 0`;
//! - correlation-style terms are 0 when a marginal variance vanishes;
//! - the information measures use natural log internally for `imc2`;
//! - a matrix with no valid pixel pairs degenerates to a point mass at the
//!   level of the first valid pixel.

use crate::error::Result;
use crate::imaging::Roi;
use crate::linalg::jacobi_eigen_symmetric;
use crate::texture::{quantize_region, QuantGrid};

/// Lattice displacements for directions 0, 45, 90, 135 degrees at distance d.
pub fn direction_offsets(d: isize) -> [(isize, isize); 4] {
    [(d, 0), (d, d), (0, d), (-d, d)]
}

/// Normalized, symmetrized, direction-summed co-occurrence matrix.
#[derive(Debug, Clone)]
pub struct GlcmMatrix {
    levels: usize,
    distance: usize,
    /// Row-major L x L probabilities summing to 1.
    p: Vec<f64>,
    normalized: bool,
}

impl GlcmMatrix {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels + j]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Builds a matrix directly from probabilities (tests, toy inputs).
    pub fn from_probabilities(levels: usize, distance: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), levels * levels);
        GlcmMatrix {
            levels,
            distance,
            p,
            normalized: true,
        }
    }
}

/// Co-occurrence matrix of a quantized (possibly masked) raster.
///
/// Pairs are accumulated at the four direction offsets, both orderings
/// counted (symmetrization), as exact integer counts before one final
/// normalization, so direction order never affects the result bitwise.
pub fn glcm_of_quantized(q: &QuantGrid, distance: usize) -> GlcmMatrix {
    let levels = q.levels as usize;
    let mut counts = vec![0u64; levels * levels];
    let d = distance as isize;
    let (w, h) = (q.width as isize, q.height as isize);
    for &(dx, dy) in &direction_offsets(d) {
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let (xu, yu) = (x as usize, y as usize);
                let (nxu, nyu) = (nx as usize, ny as usize);
                if !q.is_valid(xu, yu) || !q.is_valid(nxu, nyu) {
                    continue;
                }
                let a = q.level(xu, yu) as usize;
                let b = q.level(nxu, nyu) as usize;
                counts[a * levels + b] += 1;
                counts[b * levels + a] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let p = if total == 0 {
        // No valid pairs: point mass at the first valid pixel's level.
        let level = (0..q.data.len())
            .find(|&i| q.valid[i])
            .map(|i| q.data[i] as usize)
            .unwrap_or(0);
        let mut p = vec![0.0; levels * levels];
        p[level * levels + level] = 1.0;
        p
    } else {
        let t = total as f64;
        counts.iter().map(|&c| c as f64 / t).collect()
    };
    GlcmMatrix {
        levels,
        distance,
        p,
        normalized: true,
    }
}

/// Quantizes a full ROI to `levels` levels and accumulates co-occurrences at
/// the given distance (the paper-configured group uses 16 levels, d = 2).
pub fn glcm(roi: &Roi, levels: u16, distance: usize) -> Result<GlcmMatrix> {
    let grid = roi.to_grid();
    let q = quantize_region(&grid, None, levels)?;
    Ok(glcm_of_quantized(&q, distance))
}

fn entropy_log2(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

fn skew_kurt(values: impl Iterator<Item = (f64, f64)> + Clone, mean: f64, var: f64) -> (f64, f64) {
    if var <= 0.0 {
        return (0.0, 0.0);
    }
    let sd = var.sqrt();
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for (x, p) in values {
        let z = (x - mean) / sd;
        m3 += z * z * z * p;
        m4 += z * z * z * z * p;
    }
    (m3, m4)
}

/// Scalar helpers reused by the per-region statistics (distance-1 GLCM).
pub mod scalars {
    use super::GlcmMatrix;

    pub fn asm(m: &GlcmMatrix) -> f64 {
        m.probabilities().iter().map(|&p| p * p).sum()
    }

    pub fn contrast(m: &GlcmMatrix) -> f64 {
        let l = m.levels();
        let mut s = 0.0;
        for i in 0..l {
            for j in 0..l {
                let d = i as f64 - j as f64;
                s += d * d * m.get(i, j);
            }
        }
        s
    }

    pub fn correlation(m: &GlcmMatrix) -> f64 {
        let l = m.levels();
        let mut px = vec![0.0; l];
        let mut py = vec![0.0; l];
        for i in 0..l {
            for j in 0..l {
                px[i] += m.get(i, j);
                py[j] += m.get(i, j);
            }
        }
        let mean = |p: &[f64]| -> f64 { p.iter().enumerate().map(|(i, &v)| (i + 1) as f64 * v).sum() };
        let mu_x = mean(&px);
        let mu_y = mean(&py);
        let var = |p: &[f64], mu: f64| -> f64 {
            p.iter()
                .enumerate()
                .map(|(i, &v)| ((i + 1) as f64 - mu).powi(2) * v)
                .sum()
        };
        let sx = var(&px, mu_x).sqrt();
        let sy = var(&py, mu_y).sqrt();
        if sx <= 0.0 || sy <= 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..l {
            for j in 0..l {
                s += ((i + 1) as f64 - mu_x) * ((j + 1) as f64 - mu_y) * m.get(i, j);
            }
        }
        s / (sx * sy)
    }

    /// Inverse difference: sum of P / (1 + |i-j|).
    pub fn inverse_difference(m: &GlcmMatrix) -> f64 {
        let l = m.levels();
        let mut s = 0.0;
        for i in 0..l {
            for j in 0..l {
                s += m.get(i, j) / (1.0 + (i as f64 - j as f64).abs());
            }
        }
        s
    }

    /// Inverse difference moment: sum of P / (1 + (i-j)^2).
    pub fn idm(m: &GlcmMatrix) -> f64 {
        let l = m.levels();
        let mut s = 0.0;
        for i in 0..l {
            for j in 0..l {
                let d = i as f64 - j as f64;
                s += m.get(i, j) / (1.0 + d * d);
            }
        }
        s
    }
}

/// The frozen 44-descriptor vector (order matches `GLCM_NAMES`).
pub fn glcm_features(m: &GlcmMatrix) -> [f64; 44] {
    let l = m.levels();
    let lf = l as f64;
    let val = |i: usize| (i + 1) as f64;

    // Marginals and derived distributions.
    let mut px = vec![0.0; l];
    let mut py = vec![0.0; l];
    let mut p_sum = vec![0.0; 2 * l - 1]; // index k-2 for k = a+b in 2..=2L
    let mut p_diff = vec![0.0; l]; // index |a-b| in 0..l-1
    for i in 0..l {
        for j in 0..l {
            let p = m.get(i, j);
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            p_diff[i.abs_diff(j)] += p;
        }
    }
    let mu_x: f64 = px.iter().enumerate().map(|(i, &p)| val(i) * p).sum();
    let mu_y: f64 = py.iter().enumerate().map(|(i, &p)| val(i) * p).sum();
    let var_x: f64 = px
        .iter()
        .enumerate()
        .map(|(i, &p)| (val(i) - mu_x).powi(2) * p)
        .sum();
    let var_y: f64 = py
        .iter()
        .enumerate()
        .map(|(i, &p)| (val(i) - mu_y).powi(2) * p)
        .sum();
    let sigma_x = var_x.sqrt();
    let sigma_y = var_y.sqrt();

    let sum_val = |k: usize| (k + 2) as f64; // p_sum index -> value a+b
    let diff_val = |k: usize| k as f64;

    // 1-14: the canonical set.
    let asm: f64 = m.probabilities().iter().map(|&p| p * p).sum();
    let mut contrast = 0.0;
    let mut correlation_num = 0.0;
    let mut idm = 0.0;
    let mut autocorr = 0.0;
    let mut cluster2 = 0.0;
    let mut cluster3 = 0.0;
    let mut cluster4 = 0.0;
    let mut dissimilarity = 0.0;
    let mut inv_diff = 0.0;
    let mut inv_diff_norm = 0.0;
    let mut idm_norm = 0.0;
    let mut inverse_variance = 0.0;
    let mut contrast4 = 0.0;
    let mut max_p = 0.0f64;
    for i in 0..l {
        for j in 0..l {
            let p = m.get(i, j);
            let a = val(i);
            let b = val(j);
            let d = a - b;
            let dd = d * d;
            contrast += dd * p;
            correlation_num += (a - mu_x) * (b - mu_y) * p;
            idm += p / (1.0 + dd);
            autocorr += a * b * p;
            let c = a + b - mu_x - mu_y;
            cluster2 += c * c * p;
            cluster3 += c * c * c * p;
            cluster4 += c * c * c * c * p;
            dissimilarity += d.abs() * p;
            inv_diff += p / (1.0 + d.abs());
            inv_diff_norm += p / (1.0 + d.abs() / lf);
            idm_norm += p / (1.0 + dd / (lf * lf));
            if i != j {
                inverse_variance += p / dd;
            }
            contrast4 += dd * dd * p;
            max_p = max_p.max(p);
        }
    }
    let correlation = if sigma_x > 0.0 && sigma_y > 0.0 {
        correlation_num / (sigma_x * sigma_y)
    } else {
        0.0
    };
    let sum_of_squares = var_x;
    let sum_average: f64 = p_sum.iter().enumerate().map(|(k, &p)| sum_val(k) * p).sum();
    let sum_entropy = entropy_log2(p_sum.iter().copied());
    let sum_variance: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &p)| (sum_val(k) - sum_entropy).powi(2) * p)
        .sum();
    let entropy = entropy_log2(m.probabilities().iter().copied());
    let diff_average: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &p)| diff_val(k) * p)
        .sum();
    let difference_variance: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &p)| (diff_val(k) - diff_average).powi(2) * p)
        .sum();
    let difference_entropy = entropy_log2(p_diff.iter().copied());

    // Information measures of correlation.
    let hx = entropy_log2(px.iter().copied());
    let hy = entropy_log2(py.iter().copied());
    let hxy = entropy;
    let mut hxy1 = 0.0;
    let mut hxy_nats = 0.0;
    let mut hxy2_nats = 0.0;
    for i in 0..l {
        for j in 0..l {
            let joint = px[i] * py[j];
            if joint > 0.0 {
                let p = m.get(i, j);
                if p > 0.0 {
                    hxy1 -= p * joint.log2();
                    hxy_nats -= p * p.ln();
                }
                hxy2_nats -= joint * joint.ln();
            }
        }
    }
    let denom = hx.max(hy);
    let imc1 = if denom > 0.0 { (hxy - hxy1) / denom } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2_nats - hxy_nats)).exp()).max(0.0).sqrt();

    // Maximal correlation coefficient: second eigenvalue of the Q matrix,
    // computed on the sub-matrix of levels with nonzero marginal mass via a
    // symmetric similarity transform.
    let active: Vec<usize> = (0..l).filter(|&i| px[i] > 0.0).collect();
    let mcc = if active.len() < 2 {
        0.0
    } else {
        let n = active.len();
        let mut s = vec![0.0; n * n];
        for (ai, &i) in active.iter().enumerate() {
            for (aj, &j) in active.iter().enumerate() {
                let mut acc = 0.0;
                for &k in &active {
                    // py == px for a symmetric matrix, but keep the general form.
                    if py[k] > 0.0 {
                        acc += m.get(i, k) * m.get(j, k) / py[k];
                    }
                }
                s[ai * n + aj] = acc / (px[i] * px[j]).sqrt();
            }
        }
        let (vals, _) = jacobi_eigen_symmetric(&s, n);
        vals.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0).sqrt()
    };

    // Extended moments of the derived distributions.
    let sum_mad: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &p)| (sum_val(k) - sum_average).abs() * p)
        .sum();
    let diff_mad: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &p)| (diff_val(k) - diff_average).abs() * p)
        .sum();
    let sum_rms: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &p)| sum_val(k) * sum_val(k) * p)
        .sum::<f64>()
        .sqrt();
    let marginal_energy: f64 = px.iter().map(|&p| p * p).sum();
    let covariance = correlation_num;
    let diagonal_mass = p_diff[0];
    let near_diagonal_mass = p_diff[0] + if l > 1 { p_diff[1] } else { 0.0 };
    let max_marginal = px.iter().copied().fold(0.0f64, f64::max);
    let sum_var_about_mean: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &p)| (sum_val(k) - sum_average).powi(2) * p)
        .sum();
    let (sum_skew, sum_kurt) = skew_kurt(
        p_sum.iter().enumerate().map(|(k, &p)| (sum_val(k), p)),
        sum_average,
        sum_var_about_mean,
    );
    let (diff_skew, diff_kurt) = skew_kurt(
        p_diff.iter().enumerate().map(|(k, &p)| (diff_val(k), p)),
        diff_average,
        difference_variance,
    );
    let (marg_skew, marg_kurt) = skew_kurt(
        px.iter().enumerate().map(|(i, &p)| (val(i), p)),
        mu_x,
        var_x,
    );
    let sum_uniformity: f64 = p_sum.iter().map(|&p| p * p).sum();
    let diff_uniformity: f64 = p_diff.iter().map(|&p| p * p).sum();

    [
        asm,
        contrast,
        correlation,
        sum_of_squares,
        idm,
        sum_average,
        sum_variance,
        sum_entropy,
        entropy,
        difference_variance,
        difference_entropy,
        imc1,
        imc2,
        mcc,
        autocorr,
        mu_x,
        cluster2,
        cluster3,
        cluster4,
        dissimilarity,
        diff_mad,
        max_p,
        inv_diff,
        inv_diff_norm,
        idm_norm,
        inverse_variance,
        diff_average,
        sum_mad,
        sum_rms,
        hx,
        marginal_energy,
        covariance,
        diagonal_mass,
        near_diagonal_mass,
        contrast4,
        max_marginal,
        sum_skew,
        sum_kurt,
        diff_skew,
        diff_kurt,
        sum_uniformity,
        diff_uniformity,
        marg_skew,
        marg_kurt,
    ]
}
