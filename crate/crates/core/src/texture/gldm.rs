//! Gray-level difference method: per-direction PDFs of absolute intensity
//! differences at a fixed displacement, and their moment descriptors.

use crate::error::{Error, Result};
use crate::imaging::Roi;

/// Probability distribution of absolute gray-level differences for one
/// displacement direction. `probs[i]` is P(|difference| = i).
#[derive(Debug, Clone)]
pub struct GldmPdf {
    probs: Vec<f64>,
    /// Raw pair counts when the PDF came from an image; kept so moment
    /// formulas can be evaluated in exact integer arithmetic.
    counts: Option<(Vec<u64>, u64)>,
    displacement: (isize, isize),
}

impl GldmPdf {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn displacement(&self) -> (isize, isize) {
        self.displacement
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Builds a PDF from probabilities (toy inputs and tests).
    pub fn from_probs(probs: Vec<f64>) -> Self {
        GldmPdf {
            probs,
            counts: None,
            displacement: (0, 0),
        }
    }

    fn from_counts(counts: Vec<u64>, displacement: (isize, isize)) -> Self {
        let total: u64 = counts.iter().sum();
        let t = total as f64;
        GldmPdf {
            probs: counts.iter().map(|&c| c as f64 / t).collect(),
            counts: Some((counts, total)),
            displacement,
        }
    }
}

/// Displacement offsets for directions 0, 45, 90, 135 degrees with
/// d_x = d_y = d.
pub fn gldm_offsets(d: isize) -> [(isize, isize); 4] {
    [(d, 0), (d, d), (0, d), (-d, d)]
}

/// The four direction PDFs of absolute differences at displacement `d`
/// (paper setting d = 11), over all in-bounds pixel pairs of the ROI.
pub fn gldm_pdfs(roi: &Roi, d: usize) -> Result<[GldmPdf; 4]> {
    let side = roi.image().width();
    if d < 1 || d >= side {
        return Err(Error::InvalidArgument(format!(
            "displacement {d} out of range 1..{side}"
        )));
    }
    let img = roi.image();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut pdfs = Vec::with_capacity(4);
    for &(dx, dy) in &gldm_offsets(d as isize) {
        let mut counts: Vec<u64> = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let a = img.get(x as usize, y as usize);
                let b = img.get(nx as usize, ny as usize);
                let diff = a.abs_diff(b) as usize;
                if diff >= counts.len() {
                    counts.resize(diff + 1, 0);
                }
                counts[diff] += 1;
            }
        }
        if counts.is_empty() {
            counts.push(0);
        }
        pdfs.push(GldmPdf::from_counts(counts, (dx, dy)));
    }
    Ok(pdfs.try_into().expect("four directions"))
}

/// Mean, standard deviation, RMS level and the first four central moments of
/// a difference PDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mean: f64,
    pub std: f64,
    pub rms: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// Moments of a PDF over support values 0, 1, 2, ...
///
/// When exact pair counts are available the mean and first central moment are
/// evaluated in integer arithmetic, so `m1` is exactly zero rather than
/// rounding noise.
pub fn moments_of_pdf(pdf: &GldmPdf) -> MomentSet {
    match &pdf.counts {
        Some((counts, total)) => {
            let t = *total as f64;
            // Exact integer first raw moment.
            let m_num: u64 = counts
                .iter()
                .enumerate()
                .map(|(x, &c)| c * x as u64)
                .sum();
            let mean = m_num as f64 / t;
            // m1 * total^2 = sum_i c_i * (x_i * total - M): every term and all
            // partial sums are integers far below 2^53, so this is exact.
            let m1_num: f64 = counts
                .iter()
                .enumerate()
                .map(|(x, &c)| c as f64 * ((x as u64 * total) as i64 - m_num as i64) as f64)
                .sum();
            let m1 = m1_num / (t * t);
            let mut m2 = 0.0;
            let mut m3 = 0.0;
            let mut m4 = 0.0;
            let mut sq = 0.0;
            for (x, &c) in counts.iter().enumerate() {
                let p = c as f64 / t;
                let d = x as f64 - mean;
                m2 += p * d * d;
                m3 += p * d * d * d;
                m4 += p * d * d * d * d;
                sq += p * (x * x) as f64;
            }
            MomentSet {
                mean,
                std: m2.sqrt(),
                rms: sq.sqrt(),
                m1,
                m2,
                m3,
                m4,
            }
        }
        None => {
            let mean: f64 = pdf
                .probs
                .iter()
                .enumerate()
                .map(|(x, &p)| p * x as f64)
                .sum();
            let mut m = [0.0f64; 4];
            let mut sq = 0.0;
            for (x, &p) in pdf.probs.iter().enumerate() {
                let d = x as f64 - mean;
                m[0] += p * d;
                m[1] += p * d * d;
                m[2] += p * d * d * d;
                m[3] += p * d * d * d * d;
                sq += p * (x * x) as f64;
            }
            MomentSet {
                mean,
                std: m[1].sqrt(),
                rms: sq.sqrt(),
                m1: m[0],
                m2: m[1],
                m3: m[2],
                m4: m[3],
            }
        }
    }
}

/// Six descriptors per direction PDF (std, RMS, central moments 1-4),
/// concatenated over the four directions: 24 values.
pub fn gldm_features(pdfs: &[GldmPdf; 4]) -> [f64; 24] {
    let mut out = [0.0; 24];
    for (i, pdf) in pdfs.iter().enumerate() {
        let m = moments_of_pdf(pdf);
        out[i * 6] = m.std;
        out[i * 6 + 1] = m.rms;
        out[i * 6 + 2] = m.m1;
        out[i * 6 + 3] = m.m2;
        out[i * 6 + 4] = m.m3;
        out[i * 6 + 5] = m.m4;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{GrayImage, Roi, ROI_SIDE};
    use crate::manifest::View;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn roi_from_fn(mut f: impl FnMut(usize, usize) -> u16) -> Roi {
        let mut pixels = Vec::with_capacity(ROI_SIDE * ROI_SIDE);
        for y in 0..ROI_SIDE {
            for x in 0..ROI_SIDE {
                pixels.push(f(x, y));
            }
        }
        Roi::new(
            GrayImage::new(ROI_SIDE, ROI_SIDE, 16, pixels).unwrap(),
            "t".into(),
            View::Cc,
        )
        .unwrap()
    }

    #[test]
    fn constant_roi_is_point_mass_at_zero() {
        let roi = roi_from_fn(|_, _| 12345);
        let pdfs = gldm_pdfs(&roi, 11).unwrap();
        for pdf in &pdfs {
            assert_eq!(pdf.probs().len(), 1);
            assert!((pdf.probs()[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pdfs_sum_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let roi = roi_from_fn(|_, _| rng.gen_range(0..65535));
        let pdfs = gldm_pdfs(&roi, 11).unwrap();
        for pdf in &pdfs {
            assert!((pdf.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_out_of_range_errors() {
        let roi = roi_from_fn(|_, _| 0);
        assert!(gldm_pdfs(&roi, 0).is_err());
        assert!(gldm_pdfs(&roi, 150).is_err());
        assert!(gldm_pdfs(&roi, 149).is_ok());
    }

    #[test]
    fn stripe_pattern_matches_pair_enumeration() {
        // Vertical stripes of period 2d with values {0, q}: the direction-0
        // PDF has mass only at differences 0 and q, with exact pair counts.
        let d = 11usize;
        let q = 1000u16;
        let roi = roi_from_fn(|x, _| if (x / d) % 2 == 0 { 0 } else { q });
        let pdfs = gldm_pdfs(&roi, d).unwrap();
        let pdf0 = &pdfs[0];
        // Exhaustive enumeration oracle.
        let mut zero_pairs = 0u64;
        let mut q_pairs = 0u64;
        for y in 0..ROI_SIDE {
            for x in 0..ROI_SIDE - d {
                let a = if (x / d) % 2 == 0 { 0 } else { q };
                let b = if ((x + d) / d) % 2 == 0 { 0 } else { q };
                if a == b {
                    zero_pairs += 1;
                } else {
                    q_pairs += 1;
                }
                let _ = y;
            }
        }
        let total = (zero_pairs + q_pairs) as f64;
        assert!((pdf0.probs()[0] - zero_pairs as f64 / total).abs() < 1e-15);
        assert!((pdf0.probs()[q as usize] - q_pairs as f64 / total).abs() < 1e-15);
        let other_mass: f64 = pdf0
            .probs()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != 0 && i != q as usize)
            .map(|(_, &p)| p)
            .sum();
        assert_eq!(other_mass, 0.0);
    }

    #[test]
    fn point_mass_pdf_features() {
        // All mass at difference 7: every descriptor 0 except RMS = 7.
        let mut probs = vec![0.0; 8];
        probs[7] = 1.0;
        let pdf = GldmPdf::from_probs(probs);
        let m = moments_of_pdf(&pdf);
        assert_eq!(m.std, 0.0);
        assert!((m.rms - 7.0).abs() < 1e-12);
        assert_eq!(m.m1, 0.0);
        assert_eq!(m.m2, 0.0);
        assert_eq!(m.m3, 0.0);
        assert_eq!(m.m4, 0.0);
    }

    #[test]
    fn two_point_pdf_hand_evaluated() {
        // {0: 1/2, 4: 1/2}: mean 2, m2 = 4, m3 = 0, m4 = 16.
        let pdf = GldmPdf::from_probs(vec![0.5, 0.0, 0.0, 0.0, 0.5]);
        let m = moments_of_pdf(&pdf);
        assert!((m.mean - 2.0).abs() < 1e-15);
        assert!((m.m2 - 4.0).abs() < 1e-15);
        assert_eq!(m.m3, 0.0);
        assert!((m.m4 - 16.0).abs() < 1e-15);
        assert!((m.std - 2.0).abs() < 1e-15);
        assert!((m.rms - (8.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn first_central_moment_is_zero_for_image_pdfs() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..5 {
            let roi = roi_from_fn(|_, _| rng.gen_range(0..65535));
            let pdfs = gldm_pdfs(&roi, 11).unwrap();
            for pdf in &pdfs {
                let m = moments_of_pdf(pdf);
                assert!(m.m1.abs() < 1e-12, "m1 = {}", m.m1);
                // m2 equals the squared std by construction.
                assert!((m.m2 - m.std * m.std).abs() < 1e-9 * m.m2.max(1.0));
            }
        }
    }

    #[test]
    fn features_layout_per_direction() {
        let roi = roi_from_fn(|x, y| ((x * 17 + y * 5) % 4000) as u16);
        let pdfs = gldm_pdfs(&roi, 11).unwrap();
        let f = gldm_features(&pdfs);
        for dir in 0..4 {
            let m = moments_of_pdf(&pdfs[dir]);
            assert_eq!(f[dir * 6], m.std);
            assert_eq!(f[dir * 6 + 1], m.rms);
            assert_eq!(f[dir * 6 + 3], m.m2);
        }
    }

    #[test]
    fn moments_match_direct_summation_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let roi = roi_from_fn(|_, _| rng.gen_range(0..30000));
        let pdfs = gldm_pdfs(&roi, 11).unwrap();
        for pdf in &pdfs {
            let m = moments_of_pdf(pdf);
            // naive double-pass oracle on the probabilities
            let mean: f64 = pdf
                .probs()
                .iter()
                .enumerate()
                .map(|(x, &p)| p * x as f64)
                .sum();
            let central = |n: i32| -> f64 {
                pdf.probs()
                    .iter()
                    .enumerate()
                    .map(|(x, &p)| p * (x as f64 - mean).powi(n))
                    .sum()
            };
            assert!((m.mean - mean).abs() < 1e-9);
            assert!((m.m2 - central(2)).abs() < 1e-9 * central(2).max(1.0));
            assert!((m.m3 - central(3)).abs() < 1e-6 * central(2).max(1.0).powf(1.5));
            assert!((m.m4 - central(4)).abs() < 1e-6 * central(4).max(1.0));
        }
    }
}
