//! Lesion segmentation: low-pass differencing, contrast enhancement, Otsu
//! binarization, morphological cleanup, and largest-blob selection.

use crate::error::{Error, Result};
use crate::imaging::{Grid, Roi};

/// Tunable parameters of the segmentation chain.
#[derive(Debug, Clone, Copy)]
pub struct SegmentationParams {
    /// Box-filter window side (default 30).
    pub window: usize,
    /// Disk structuring-element radius for opening/closing (default 3).
    pub se_radius: usize,
    /// Blobs with at most this many pixels are discarded (default 50).
    pub min_blob_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            window: 30,
            se_radius: 3,
            min_blob_area: 50,
        }
    }
}

/// Binary raster with row-major bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height);
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask::new(width, height, vec![false; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Connected components surviving the minimum-area filter.
///
/// `labels` holds 0 for background/discarded pixels and 1-based contiguous
/// labels, assigned in scan order, for kept blobs. `areas[i]` is the pixel
/// count of label `i + 1`.
#[derive(Debug, Clone)]
pub struct BlobSet {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub areas: Vec<usize>,
}

impl BlobSet {
    pub fn blob_count(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    /// Mask covering every kept blob.
    pub fn union_mask(&self) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l != 0).collect(),
        )
    }

    /// Mask of one labeled blob (1-based label).
    pub fn blob_mask(&self, label: u32) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l == label).collect(),
        )
    }
}

/// Binary segmentation of the dominant lesion blob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesionMask {
    mask: BinaryMask,
    blob_area: usize,
}

impl LesionMask {
    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn blob_area(&self) -> usize {
        self.blob_area
    }

    pub fn bits(&self) -> &[bool] {
        &self.mask.bits
    }

    pub fn width(&self) -> usize {
        self.mask.width
    }

    pub fn height(&self) -> usize {
        self.mask.height
    }

    /// Builds a mask directly from bits, validating the single-component
    /// invariant. Intended for ground-truth masks and tests.
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        let mask = BinaryMask::new(width, height, bits);
        let blobs = label_blobs(&mask, 0);
        if blobs.blob_count() != 1 {
            return Err(Error::InvalidArgument(format!(
                "lesion mask must have exactly one component, found {}",
                blobs.blob_count()
            )));
        }
        let blob_area = blobs.areas[0];
        Ok(LesionMask { mask, blob_area })
    }
}

/// Mean (box) filter with replicate padding.
///
/// An even window of side `w` is anchored at offset `w/2`, so window 30
/// covers offsets -15..=14 around each output pixel; window 1 is identity.
pub fn mean_filter(grid: &Grid, window: usize) -> Result<Grid> {
    if window < 1 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    if window > 2 * grid.width.min(grid.height) {
        return Err(Error::InvalidArgument(format!(
            "window {window} larger than twice the image side"
        )));
    }
    let (w, h) = (grid.width, grid.height);
    let anchor = window / 2;
    let lo = anchor as isize; // pixels before the anchor
    let hi = (window - 1 - anchor) as isize; // pixels after the anchor

    // Integral image with replicate padding folded in via coordinate clamping.
    let clamp = |v: isize, max: usize| (v.clamp(0, max as isize - 1)) as usize;
    let mut integral = vec![0.0f64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0.0;
        for x in 0..w {
            row_sum += grid.get(x, y);
            integral[(y + 1) * (w + 1) + (x + 1)] = integral[y * (w + 1) + (x + 1)] + row_sum;
        }
    }
    let rect_sum = |x0: usize, y0: usize, x1: usize, y1: usize| -> f64 {
        // inclusive coordinates
        integral[(y1 + 1) * (w + 1) + (x1 + 1)] - integral[y0 * (w + 1) + (x1 + 1)]
            - integral[(y1 + 1) * (w + 1) + x0]
            + integral[y0 * (w + 1) + x0]
    };

    let area = (window * window) as f64;
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            // Replicate padding: out-of-bounds rows/cols repeat the edge, so
            // the window sum is the in-bounds rectangle sum plus edge strips
            // weighted by how far the window hangs over. Computing via clamped
            // per-line sums keeps this exact.
            let mut sum = 0.0;
            let y_from = y as isize - lo;
            let y_to = y as isize + hi;
            let x_from = x as isize - lo;
            let x_to = x as isize + hi;
            // Count multiplicity of each clamped row index.
            // Rows below 0 clamp to 0, above h-1 clamp to h-1.
            let under_y = (-y_from).max(0) as f64;
            let over_y = (y_to - (h as isize - 1)).max(0) as f64;
            let y0 = clamp(y_from, h);
            let y1 = clamp(y_to, h);
            let under_x = (-x_from).max(0) as f64;
            let over_x = (x_to - (w as isize - 1)).max(0) as f64;
            let x0 = clamp(x_from, w);
            let x1 = clamp(x_to, w);

            // Central block (each in-bounds row/col once).
            let central = rect_sum(x0, y0, x1, y1);
            // Horizontal overhang adds copies of the edge columns.
            let left_col = rect_sum(x0, y0, x0, y1);
            let right_col = rect_sum(x1, y0, x1, y1);
            let row_block = central + under_x * left_col + over_x * right_col;
            sum += row_block;
            // Vertical overhang replicates the (already horizontally extended) top/bottom rows.
            if under_y > 0.0 {
                let top = rect_sum(x0, y0, x1, y0);
                let top_l = grid.get(x0, y0);
                let top_r = grid.get(x1, y0);
                sum += under_y * (top + under_x * top_l + over_x * top_r);
            }
            if over_y > 0.0 {
                let bot = rect_sum(x0, y1, x1, y1);
                let bot_l = grid.get(x0, y1);
                let bot_r = grid.get(x1, y1);
                sum += over_y * (bot + under_x * bot_l + over_x * bot_r);
            }
            out.set(x, y, sum / area);
        }
    }
    Ok(out)
}

/// Absolute difference between the ROI and its 30-window low-pass version.
pub fn highpass_residual(roi: &Roi) -> Result<Grid> {
    let grid = roi.to_grid();
    highpass_residual_grid(&grid, 30)
}

pub fn highpass_residual_grid(grid: &Grid, window: usize) -> Result<Grid> {
    let low = mean_filter(grid, window)?;
    let data = grid
        .data
        .iter()
        .zip(&low.data)
        .map(|(&a, &b)| (a - b).abs())
        .collect();
    Ok(Grid {
        width: grid.width,
        height: grid.height,
        data,
    })
}

/// Sum of the min-max normalized ROI and residual, rescaled to [0, 1].
pub fn enhance(roi: &Grid, residual: &Grid) -> Result<Grid> {
    if roi.width != residual.width || roi.height != residual.height {
        return Err(Error::InvalidArgument("shape mismatch in enhance".into()));
    }
    let a = roi.normalized01();
    let b = residual.normalized01();
    let combined = Grid {
        width: roi.width,
        height: roi.height,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect(),
    };
    Ok(combined.normalized01())
}

/// Otsu threshold over a 256-bin histogram of the grid's value range.
///
/// Returns the binary mask and the threshold value (lower edge of the first
/// foreground bin). Errors on constant input.
pub fn binarize_otsu(grid: &Grid) -> Result<(BinaryMask, f64)> {
    let (lo, hi) = grid.min_max();
    if !(hi > lo) {
        return Err(Error::DegenerateInput(
            "constant image has no Otsu threshold".into(),
        ));
    }
    const BINS: usize = 256;
    let span = hi - lo;
    let bin_of = |v: f64| -> usize {
        let b = ((v - lo) / span * BINS as f64) as usize;
        b.min(BINS - 1)
    };
    let mut hist = [0usize; BINS];
    for &v in &grid.data {
        hist[bin_of(v)] += 1;
    }
    let total = grid.data.len() as f64;
    let global_mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum::<f64>()
        / total;

    let mut best_t = None;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for t in 0..BINS - 1 {
        w0 += hist[t] as f64 / total;
        sum0 += t as f64 * hist[t] as f64 / total;
        let w1 = 1.0 - w0;
        if w0 <= 0.0 || w1 <= 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (global_mean - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = Some(t);
        }
    }
    let t = best_t.ok_or_else(|| {
        Error::DegenerateInput("no valid Otsu split in histogram".into())
    })?;
    let bits = grid.data.iter().map(|&v| bin_of(v) > t).collect();
    let threshold = lo + (t + 1) as f64 * span / BINS as f64;
    Ok((BinaryMask::new(grid.width, grid.height, bits), threshold))
}

// Structuring element: the radius-r disk in the Chebyshev metric, i.e. a
// (2r+1)x(2r+1) box. Unlike a Euclidean disk it leaves large axis-aligned
// convex shapes exactly invariant under opening/closing while still
// removing specks smaller than the blob-area floor.
fn disk_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut offs = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            offs.push((dx, dy));
        }
    }
    offs
}

/// Erosion with a disk SE; out-of-bounds neighbors count as foreground so
/// the image border never erodes shapes by itself.
pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let offs = disk_offsets(radius);
    let (w, h) = (mask.width as isize, mask.height as isize);
    let mut bits = vec![false; mask.bits.len()];
    for y in 0..h {
        for x in 0..w {
            let mut keep = mask.get(x as usize, y as usize);
            if keep {
                for &(dx, dy) in &offs {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h
                        && !mask.get(nx as usize, ny as usize)
                    {
                        keep = false;
                        break;
                    }
                }
            }
            bits[(y * w + x) as usize] = keep;
        }
    }
    BinaryMask::new(mask.width, mask.height, bits)
}

/// Dilation with a disk SE; out-of-bounds neighbors count as background.
pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let offs = disk_offsets(radius);
    let (w, h) = (mask.width as isize, mask.height as isize);
    let mut bits = vec![false; mask.bits.len()];
    for y in 0..h {
        for x in 0..w {
            let mut hit = false;
            for &(dx, dy) in &offs {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h && mask.get(nx as usize, ny as usize) {
                    hit = true;
                    break;
                }
            }
            bits[(y * w + x) as usize] = hit;
        }
    }
    BinaryMask::new(mask.width, mask.height, bits)
}

pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}

/// Opening followed by closing with the same disk SE.
pub fn morph_open_close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    close(&open(mask, radius), radius)
}

/// 4-connected component labeling keeping blobs of area strictly greater
/// than `min_area`.
pub fn label_blobs(mask: &BinaryMask, min_area: usize) -> BlobSet {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![0u32; w * h];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    let mut next = 1u32;
    for start in 0..w * h {
        if !mask.bits[start] || labels[start] != 0 {
            continue;
        }
        // flood fill
        let mut area = 0usize;
        stack.push(start);
        labels[start] = next;
        while let Some(idx) = stack.pop() {
            area += 1;
            let (x, y) = (idx % w, idx / w);
            let mut visit = |nx: usize, ny: usize| {
                let nidx = ny * w + nx;
                if mask.bits[nidx] && labels[nidx] == 0 {
                    labels[nidx] = next;
                    stack.push(nidx);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
        }
        areas.push(area);
        next += 1;
    }
    // Drop small blobs and relabel contiguously in scan order.
    let mut remap = vec![0u32; areas.len() + 1];
    let mut kept_areas = Vec::new();
    let mut kept = 0u32;
    for (i, &a) in areas.iter().enumerate() {
        if a > min_area {
            kept += 1;
            remap[i + 1] = kept;
            kept_areas.push(a);
        }
    }
    for l in labels.iter_mut() {
        *l = remap[*l as usize];
    }
    BlobSet {
        width: w,
        height: h,
        labels,
        areas: kept_areas,
    }
}

/// Picks the maximum-area blob; ties go to the smallest label (scan order).
pub fn select_largest_blob(blobs: &BlobSet) -> Result<LesionMask> {
    if blobs.is_empty() {
        return Err(Error::NoLesion("no blob above minimum area".into()));
    }
    let mut best = 0usize;
    for (i, &a) in blobs.areas.iter().enumerate() {
        if a > blobs.areas[best] {
            best = i;
        }
    }
    let label = best as u32 + 1;
    let mask = blobs.blob_mask(label);
    Ok(LesionMask {
        mask,
        blob_area: blobs.areas[best],
    })
}

/// View of the ROI pixels selected by a mask; out-of-mask pixels are
/// excluded from statistics rather than zero-filled.
pub struct MaskedRegion<'a> {
    pub roi: &'a Roi,
    pub bits: &'a [bool],
}

impl<'a> MaskedRegion<'a> {
    pub fn values(&self) -> impl Iterator<Item = u16> + '_ {
        self.roi
            .image()
            .pixels()
            .iter()
            .zip(self.bits)
            .filter(|(_, &b)| b)
            .map(|(&p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn mean(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for v in self.values() {
            sum += f64::from(v);
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

pub fn apply_mask<'a>(roi: &'a Roi, mask: &'a LesionMask) -> MaskedRegion<'a> {
    MaskedRegion {
        roi,
        bits: mask.bits(),
    }
}

/// All intermediates of the Fig.-2-style chain, for debug dumps.
pub struct SegmentationStages {
    pub roi: Grid,
    pub residual: Grid,
    pub enhanced: Grid,
    pub binarized: BinaryMask,
    pub cleaned: BinaryMask,
    pub blobs: BlobSet,
    pub lesion: LesionMask,
}

/// Runs the full segmentation chain on one ROI.
pub fn segment_lesion(roi: &Roi, params: &SegmentationParams) -> Result<LesionMask> {
    segment_lesion_stages(roi, params).map(|s| s.lesion)
}

pub fn segment_lesion_stages(
    roi: &Roi,
    params: &SegmentationParams,
) -> Result<SegmentationStages> {
    let grid = roi.to_grid();
    let residual = highpass_residual_grid(&grid, params.window)?;
    let enhanced = enhance(&grid, &residual)?;
    let (binarized, _threshold) = binarize_otsu(&enhanced)?;
    let cleaned = morph_open_close(&binarized, params.se_radius);
    let blobs = label_blobs(&cleaned, params.min_blob_area);
    let lesion = select_largest_blob(&blobs)?;
    Ok(SegmentationStages {
        roi: grid,
        residual,
        enhanced,
        binarized,
        cleaned,
        blobs,
        lesion,
    })
}
