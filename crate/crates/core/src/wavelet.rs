//! Db4 multiresolution decomposition and the wavelet feature group.
//!
//! The transform is the separable orthonormal Daubechies-4 (8-tap) filter
//! bank with periodic extension, downsampled by two per level. Odd-sized
//! planes are zero-padded to even length before filtering, which keeps the
//! transform orthonormal per level (Parseval holds against the unpadded
//! input, since zero cells carry no energy) and makes subband sides follow
//! ceiling division. Three levels are applied; the deepest four subbands
//! feed an uncentered principal-component analysis whose first component
//! map carries the descriptors.
//!
//! No critically sampled orthonormal two-channel transform exists on an
//! odd-length plane, and any energy-free pad value (zero) breaks the
//! vanishing-moment property on constant planes at deeper levels. The
//! feature path therefore works on sizes where every level stays even and
//! the pad never engages: the ROI is cropped centrally to 144x144 (the
//! largest multiple of 8 inside 150) and the lesion window is rounded up to
//! multiples of 8.

use crate::error::{Error, Result};
use crate::imaging::{Grid, Roi};
use crate::linalg::jacobi_eigen_symmetric;
use crate::segmentation::LesionMask;
use crate::texture::stats::{stats20, Region};

/// Db4 scaling (lowpass analysis) coefficients; sum = sqrt(2).
const DB4_LO: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

fn db4_hi() -> [f64; 8] {
    let mut g = [0.0; 8];
    for (n, g_n) in g.iter_mut().enumerate() {
        let h = DB4_LO[7 - n];
        *g_n = if n % 2 == 0 { h } else { -h };
    }
    g
}

/// One decomposition level: the four quadrants plus the input plane size
/// (pre-padding), needed for exact reconstruction.
#[derive(Debug, Clone)]
pub struct WaveletLevel {
    pub input_width: usize,
    pub input_height: usize,
    pub ll: Grid,
    pub lh: Grid,
    pub hl: Grid,
    pub hh: Grid,
}

/// Three-level Db4 subband pyramid.
#[derive(Debug, Clone)]
pub struct SubbandSet {
    levels: Vec<WaveletLevel>,
}

impl SubbandSet {
    pub fn levels(&self) -> &[WaveletLevel] {
        &self.levels
    }

    pub fn deepest(&self) -> &WaveletLevel {
        self.levels.last().expect("at least one level")
    }

    /// Total energy over the deepest LL plus every detail subband.
    pub fn coefficient_energy(&self) -> f64 {
        let mut e: f64 = self
            .deepest()
            .ll
            .data
            .iter()
            .map(|&v| v * v)
            .sum();
        for level in &self.levels {
            for band in [&level.lh, &level.hl, &level.hh] {
                e += band.data.iter().map(|&v| v * v).sum::<f64>();
            }
        }
        e
    }
}

fn pad_even(grid: &Grid) -> Grid {
    let w = grid.width + grid.width % 2;
    let h = grid.height + grid.height % 2;
    if (w, h) == (grid.width, grid.height) {
        return grid.clone();
    }
    let mut out = Grid::zeros(w, h);
    for y in 0..grid.height {
        for x in 0..grid.width {
            out.set(x, y, grid.get(x, y));
        }
    }
    out
}

fn analyze_1d(x: &[f64], lo_out: &mut [f64], hi_out: &mut [f64]) {
    let n = x.len();
    debug_assert!(n % 2 == 0);
    let g = db4_hi();
    for k in 0..n / 2 {
        let mut a = 0.0;
        let mut d = 0.0;
        for t in 0..8 {
            let v = x[(2 * k + t) % n];
            a += DB4_LO[t] * v;
            d += g[t] * v;
        }
        lo_out[k] = a;
        hi_out[k] = d;
    }
}

fn synthesize_1d(lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let n = out.len();
    debug_assert_eq!(lo.len(), n / 2);
    let g = db4_hi();
    out.fill(0.0);
    for k in 0..n / 2 {
        for t in 0..8 {
            let i = (2 * k + t) % n;
            out[i] += lo[k] * DB4_LO[t] + hi[k] * g[t];
        }
    }
}

fn dwt2_step(input: &Grid) -> WaveletLevel {
    let padded = pad_even(input);
    let (w, h) = (padded.width, padded.height);
    let (hw, hh_len) = (w / 2, h / 2);

    // Row pass.
    let mut row_lo = Grid::zeros(hw, h);
    let mut row_hi = Grid::zeros(hw, h);
    let mut lo_buf = vec![0.0; hw];
    let mut hi_buf = vec![0.0; hw];
    for y in 0..h {
        let row: Vec<f64> = (0..w).map(|x| padded.get(x, y)).collect();
        analyze_1d(&row, &mut lo_buf, &mut hi_buf);
        for x in 0..hw {
            row_lo.set(x, y, lo_buf[x]);
            row_hi.set(x, y, hi_buf[x]);
        }
    }

    // Column pass.
    let mut ll = Grid::zeros(hw, hh_len);
    let mut lh = Grid::zeros(hw, hh_len);
    let mut hl = Grid::zeros(hw, hh_len);
    let mut hh = Grid::zeros(hw, hh_len);
    let mut lo_col = vec![0.0; hh_len];
    let mut hi_col = vec![0.0; hh_len];
    for x in 0..hw {
        let col: Vec<f64> = (0..h).map(|y| row_lo.get(x, y)).collect();
        analyze_1d(&col, &mut lo_col, &mut hi_col);
        for y in 0..hh_len {
            ll.set(x, y, lo_col[y]);
            lh.set(x, y, hi_col[y]);
        }
        let col: Vec<f64> = (0..h).map(|y| row_hi.get(x, y)).collect();
        analyze_1d(&col, &mut lo_col, &mut hi_col);
        for y in 0..hh_len {
            hl.set(x, y, lo_col[y]);
            hh.set(x, y, hi_col[y]);
        }
    }
    WaveletLevel {
        input_width: input.width,
        input_height: input.height,
        ll,
        lh,
        hl,
        hh,
    }
}

fn idwt2_step(level: &WaveletLevel) -> Grid {
    let (hw, hh_len) = (level.ll.width, level.ll.height);
    let (w, h) = (hw * 2, hh_len * 2);
    // Inverse column pass.
    let mut row_lo = Grid::zeros(hw, h);
    let mut row_hi = Grid::zeros(hw, h);
    let mut out_col = vec![0.0; h];
    for x in 0..hw {
        let lo: Vec<f64> = (0..hh_len).map(|y| level.ll.get(x, y)).collect();
        let hi: Vec<f64> = (0..hh_len).map(|y| level.lh.get(x, y)).collect();
        synthesize_1d(&lo, &hi, &mut out_col);
        for y in 0..h {
            row_lo.set(x, y, out_col[y]);
        }
        let lo: Vec<f64> = (0..hh_len).map(|y| level.hl.get(x, y)).collect();
        let hi: Vec<f64> = (0..hh_len).map(|y| level.hh.get(x, y)).collect();
        synthesize_1d(&lo, &hi, &mut out_col);
        for y in 0..h {
            row_hi.set(x, y, out_col[y]);
        }
    }
    // Inverse row pass, then drop padding.
    let mut padded = Grid::zeros(w, h);
    let mut out_row = vec![0.0; w];
    for y in 0..h {
        let lo: Vec<f64> = (0..hw).map(|x| row_lo.get(x, y)).collect();
        let hi: Vec<f64> = (0..hw).map(|x| row_hi.get(x, y)).collect();
        synthesize_1d(&lo, &hi, &mut out_row);
        for x in 0..w {
            padded.set(x, y, out_row[x]);
        }
    }
    if (level.input_width, level.input_height) == (w, h) {
        padded
    } else {
        Grid::from_fn(level.input_width, level.input_height, |x, y| padded.get(x, y))
    }
}

/// Three-level (by default) separable Db4 analysis.
pub fn dwt2_db4(image: &Grid, levels: usize) -> Result<SubbandSet> {
    if image.width < 8 || image.height < 8 {
        return Err(Error::InvalidArgument(format!(
            "image {}x{} too small for Db4 analysis",
            image.width, image.height
        )));
    }
    if levels < 1 {
        return Err(Error::InvalidArgument("levels must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(levels);
    let mut current = image.clone();
    for _ in 0..levels {
        let level = dwt2_step(&current);
        current = level.ll.clone();
        out.push(level);
    }
    Ok(SubbandSet { levels: out })
}

/// Inverse of [`dwt2_db4`].
pub fn idwt2_db4(bands: &SubbandSet) -> Grid {
    let mut current = bands.deepest().ll.clone();
    for level in bands.levels.iter().rev() {
        let step = WaveletLevel {
            input_width: level.input_width,
            input_height: level.input_height,
            ll: current,
            lh: level.lh.clone(),
            hl: level.hl.clone(),
            hh: level.hh.clone(),
        };
        current = idwt2_step(&step);
    }
    current
}

/// Principal directions of the stacked deepest-subband matrix.
///
/// The four deepest subbands are flattened to the rows of a 4 x M matrix X;
/// directions and variances are the eigenpairs of X X^T / M (uncentered, so
/// the first component of a smooth image carries its DC content).
#[derive(Debug, Clone)]
pub struct SubbandPcaBasis {
    directions: Vec<[f64; 4]>,
    variances: Vec<f64>,
    rows: [Vec<f64>; 4],
    width: usize,
    height: usize,
}

impl SubbandPcaBasis {
    pub fn directions(&self) -> &[[f64; 4]] {
        &self.directions
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Projection of the subband matrix onto the k-th principal direction,
    /// reshaped to the deepest-level plane.
    pub fn principal_map(&self, k: usize) -> Grid {
        let dir = self.directions[k];
        let m = self.width * self.height;
        let mut data = vec![0.0; m];
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..m {
                data[j] += dir[i] * row[j];
            }
        }
        Grid {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// PCA over the four deepest subbands.
pub fn subband_pca(bands: &SubbandSet) -> Result<SubbandPcaBasis> {
    let deepest = bands.deepest();
    let (w, h) = (deepest.ll.width, deepest.ll.height);
    let m = w * h;
    let rows: [Vec<f64>; 4] = [
        deepest.ll.data.clone(),
        deepest.lh.data.clone(),
        deepest.hl.data.clone(),
        deepest.hh.data.clone(),
    ];
    let total: f64 = rows.iter().flat_map(|r| r.iter()).map(|&v| v * v).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput(
            "all-zero subband matrix has no principal directions".into(),
        ));
    }
    let mut gram = [0.0f64; 16];
    for i in 0..4 {
        for j in i..4 {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram[i * 4 + j] = dot / m as f64;
            gram[j * 4 + i] = gram[i * 4 + j];
        }
    }
    let (variances, vecs) = jacobi_eigen_symmetric(&gram, 4);
    let directions: Vec<[f64; 4]> = (0..4)
        .map(|k| [vecs[k * 4], vecs[k * 4 + 1], vecs[k * 4 + 2], vecs[k * 4 + 3]])
        .collect();
    Ok(SubbandPcaBasis {
        directions,
        variances,
        rows,
        width: w,
        height: h,
    })
}

// Indices into the stats20 block for the Table-style descriptor order:
// contrast, correlation, energy, homogeneity, mean, std, entropy, rms,
// variance, smoothness, kurtosis, skewness, idm.
const DESCRIPTOR_MAP: [usize; 13] = [14, 5, 6, 15, 0, 19, 4, 7, 1, 16, 3, 2, 17];

fn descriptors(map: &Grid, count: usize) -> Result<Vec<f64>> {
    let s = stats20(Region::full(map))?;
    Ok(DESCRIPTOR_MAP[..count].iter().map(|&i| s[i]).collect())
}

/// Central crop to the largest multiple-of-8 square inside the ROI, so all
/// three decomposition levels keep even sides.
fn feature_plane(grid: &Grid) -> Grid {
    let side = (grid.width.min(grid.height) / 8) * 8;
    let x0 = (grid.width - side) / 2;
    let y0 = (grid.height - side) / 2;
    Grid::from_fn(side, side, |x, y| grid.get(x0 + x, y0 + y))
}

/// Crops the lesion's bounding box (grown to a multiple of 8, at least 8,
/// pixels a side), filling out-of-mask pixels with the lesion mean.
fn lesion_plane(grid: &Grid, lesion: &LesionMask) -> Result<Grid> {
    let bits = lesion.bits();
    let (w, h) = (grid.width, grid.height);
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in 0..h {
        for x in 0..w {
            if bits[y * w + x] {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                sum += grid.get(x, y);
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::DegenerateInput("empty lesion region".into()));
    }
    let mean = sum / n as f64;
    // Grow the window to the next multiple of 8, staying inside the plane.
    let grow = |lo: usize, hi: usize, max: usize| -> (usize, usize) {
        let target = ((hi - lo + 1).max(8)).div_ceil(8) * 8;
        let mut lo = lo;
        let mut hi = hi;
        while hi - lo + 1 < target {
            if lo > 0 {
                lo -= 1;
            }
            if hi - lo + 1 < target && hi + 1 < max {
                hi += 1;
            }
        }
        (lo, hi)
    };
    let (x0, x1) = grow(x0, x1, w);
    let (y0, y1) = grow(y0, y1, h);
    Ok(Grid::from_fn(x1 - x0 + 1, y1 - y0 + 1, |x, y| {
        let (gx, gy) = (x0 + x, y0 + y);
        if bits[gy * w + gx] {
            grid.get(gx, gy)
        } else {
            mean
        }
    }))
}

/// The 23 wavelet features: 13 descriptors from the ROI's first principal
/// map, 10 from the segmented lesion's.
pub fn wavelet_features(roi: &Roi, lesion: &LesionMask) -> Result<[f64; 23]> {
    let grid = roi.to_grid();
    let plane = feature_plane(&grid);
    let roi_map = subband_pca(&dwt2_db4(&plane, 3)?)?.principal_map(0);
    let roi_desc = descriptors(&roi_map, 13)?;

    let lesion_grid = lesion_plane(&grid, lesion)?;
    let lesion_map = subband_pca(&dwt2_db4(&lesion_grid, 3)?)?.principal_map(0);
    let lesion_desc = descriptors(&lesion_map, 10)?;

    let mut out = [0.0; 23];
    out[..13].copy_from_slice(&roi_desc);
    out[13..].copy_from_slice(&lesion_desc);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{GrayImage, ROI_SIDE};
    use crate::manifest::View;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_grid(w: usize, h: usize, seed: u64) -> Grid {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Grid::from_fn(w, h, |_, _| rng.gen_range(-100.0..100.0))
    }

    #[test]
    fn constant_image_has_zero_detail() {
        // 152 keeps every level's input even (152 -> 76 -> 38), so the
        // vanishing-moment property holds exactly at all three levels.
        let grid = Grid::from_fn(152, 152, |_, _| 7.25);
        let bands = dwt2_db4(&grid, 3).unwrap();
        for level in bands.levels() {
            for band in [&level.lh, &level.hl, &level.hh] {
                for &v in &band.data {
                    assert!(v.abs() < 1e-10, "detail coefficient {v}");
                }
            }
        }
        // LL gains 2x per level.
        let ll = &bands.deepest().ll;
        assert!((ll.get(5, 5) - 7.25 * 8.0).abs() < 1e-9);

        // On a 150-sided constant plane level 1 is still pad-free.
        let grid150 = Grid::from_fn(150, 150, |_, _| 7.25);
        let bands150 = dwt2_db4(&grid150, 1).unwrap();
        let l1 = &bands150.levels()[0];
        for band in [&l1.lh, &l1.hl, &l1.hh] {
            assert!(band.data.iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn subband_sizes_follow_ceiling_division() {
        let grid = random_grid(150, 150, 1);
        let bands = dwt2_db4(&grid, 3).unwrap();
        let sizes: Vec<(usize, usize)> = bands
            .levels()
            .iter()
            .map(|l| (l.ll.width, l.ll.height))
            .collect();
        assert_eq!(sizes, [(75, 75), (38, 38), (19, 19)]);
    }

    #[test]
    fn energy_conservation() {
        for seed in 0..5 {
            let grid = random_grid(150, 150, seed);
            let bands = dwt2_db4(&grid, 3).unwrap();
            let pixel_energy: f64 = grid.data.iter().map(|&v| v * v).sum();
            let coef_energy = bands.coefficient_energy();
            assert!(
                (coef_energy - pixel_energy).abs() < 1e-9 * pixel_energy,
                "seed {seed}: {coef_energy} vs {pixel_energy}"
            );
        }
    }

    #[test]
    fn perfect_reconstruction() {
        for seed in 0..5 {
            let grid = random_grid(150, 150, 100 + seed);
            let bands = dwt2_db4(&grid, 3).unwrap();
            let back = idwt2_db4(&bands);
            assert_eq!((back.width, back.height), (150, 150));
            let max_err = grid
                .data
                .iter()
                .zip(&back.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err < 1e-9, "seed {seed}: max error {max_err}");
        }
    }

    #[test]
    fn perfect_reconstruction_odd_sizes() {
        let grid = random_grid(37, 51, 9);
        let bands = dwt2_db4(&grid, 2).unwrap();
        let back = idwt2_db4(&bands);
        assert_eq!((back.width, back.height), (37, 51));
        let max_err = grid
            .data
            .iter()
            .zip(&back.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-9, "max error {max_err}");
    }

    #[test]
    fn too_small_image_errors() {
        let grid = Grid::zeros(7, 20);
        assert!(dwt2_db4(&grid, 3).is_err());
    }

    #[test]
    fn rank_one_subbands_have_one_nonzero_variance() {
        // Build a SubbandSet whose deepest four bands are proportional.
        let base = random_grid(19, 19, 3);
        let mk = |s: f64| Grid {
            width: 19,
            height: 19,
            data: base.data.iter().map(|&v| v * s).collect(),
        };
        let level = WaveletLevel {
            input_width: 38,
            input_height: 38,
            ll: mk(1.0),
            lh: mk(0.5),
            hl: mk(-2.0),
            hh: mk(0.25),
        };
        let bands = SubbandSet {
            levels: vec![level],
        };
        let basis = subband_pca(&bands).unwrap();
        let v = basis.variances();
        assert!(v[0] > 1e-6);
        for &x in &v[1..] {
            assert!(x.abs() < 1e-8 * v[0], "trailing variance {x}");
        }
    }

    #[test]
    fn pca_directions_orthonormal_and_variances_match_eigensolver() {
        let grid = random_grid(150, 150, 42);
        let bands = dwt2_db4(&grid, 3).unwrap();
        let basis = subband_pca(&bands).unwrap();
        let dirs = basis.directions();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| dirs[i][k] * dirs[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8, "dirs {i},{j} dot {dot}");
            }
        }
        for w in basis.variances().windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "variances not sorted");
        }
        // Independent oracle: nalgebra symmetric eigensolver on the same Gram.
        let deepest = bands.deepest();
        let m = (deepest.ll.width * deepest.ll.height) as f64;
        let rows = [
            &deepest.ll.data,
            &deepest.lh.data,
            &deepest.hl.data,
            &deepest.hh.data,
        ];
        let mut gram = nalgebra::Matrix4::<f64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = rows[i].iter().zip(rows[j]).map(|(a, b)| a * b).sum();
                gram[(i, j)] = dot / m;
            }
        }
        let mut eig: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in basis.variances().iter().zip(&eig) {
            assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

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

    fn center_disk_mask(r: f64) -> LesionMask {
        let mut bits = vec![false; ROI_SIDE * ROI_SIDE];
        for y in 0..ROI_SIDE {
            for x in 0..ROI_SIDE {
                let dx = x as f64 - 75.0;
                let dy = y as f64 - 75.0;
                if dx * dx + dy * dy <= r * r {
                    bits[y * ROI_SIDE + x] = true;
                }
            }
        }
        LesionMask::from_bits(ROI_SIDE, ROI_SIDE, bits).unwrap()
    }

    #[test]
    fn feature_group_has_23_values_and_is_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let roi = roi_from_fn(|_, _| rng.gen_range(1000..40000));
        let lesion = center_disk_mask(25.0);
        let a = wavelet_features(&roi, &lesion).unwrap();
        let b = wavelet_features(&roi, &lesion).unwrap();
        assert_eq!(a.len(), 23);
        assert_eq!(a, b, "bit-identical across runs");
        assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_roi_descriptor_values() {
        let roi = roi_from_fn(|_, _| 4096);
        let lesion = center_disk_mask(20.0);
        let f = wavelet_features(&roi, &lesion).unwrap();
        // Table order: entropy is index 6, variance index 8, rms index 7,
        // mean index 4.
        // The detail filter's alternating sum is ~1e-17 in floats, so "zero"
        // here means below absolute float noise, not bit-exact zero.
        assert!(f[6].abs() < 1e-9, "entropy {}", f[6]);
        assert!(f[8].abs() < 1e-9, "variance {}", f[8]);
        // First principal map of a constant plane is (+/-) its LL content:
        // |map| = 8 * c uniformly, so RMS = |DC|.
        assert!((f[7] - 8.0 * 4096.0).abs() < 1e-6, "rms {}", f[7]);
        assert!((f[4].abs() - 8.0 * 4096.0).abs() < 1e-6, "mean {}", f[4]);
        // Lesion-source block: mean fill makes that plane constant too.
        assert!(f[13 + 6].abs() < 1e-9, "lesion entropy {}", f[13 + 6]);
        assert!(f[13 + 8].abs() < 1e-9, "lesion variance {}", f[13 + 8]);
    }
}
