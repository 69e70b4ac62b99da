//! Gray-level run-length matrix over four directions with a direction-summed
//! form, and the seven classical run descriptors.

use crate::error::{Error, Result};
use crate::imaging::Roi;
use crate::texture::{quantize_region, QuantGrid};

/// Per-direction and direction-summed run-length counts.
///
/// `count(g, len)` is the number of maximal runs of quantized level `g`
/// (0-based index) with exactly `len` pixels (1-based length).
#[derive(Debug, Clone)]
pub struct GlrlmMatrix {
    levels: usize,
    max_len: usize,
    /// One L x max_len count grid per direction (0, 45, 90, 135 degrees).
    per_direction: [Vec<u64>; 4],
    summed: Vec<u64>,
    pixel_count: usize,
}

impl GlrlmMatrix {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    #[inline]
    pub fn direction_count(&self, dir: usize, level: usize, len: usize) -> u64 {
        debug_assert!(len >= 1);
        self.per_direction[dir][level * self.max_len + (len - 1)]
    }

    #[inline]
    pub fn summed_count(&self, level: usize, len: usize) -> u64 {
        debug_assert!(len >= 1);
        self.summed[level * self.max_len + (len - 1)]
    }

    pub fn summed(&self) -> &[u64] {
        &self.summed
    }

    /// Builds a toy matrix directly from a direction-summed count grid
    /// (level-major, length-minor; lengths 1-based).
    pub fn from_summed_counts(levels: usize, max_len: usize, summed: Vec<u64>) -> Self {
        assert_eq!(summed.len(), levels * max_len);
        let pixel_count = summed
            .iter()
            .enumerate()
            .map(|(i, &c)| c * ((i % max_len) as u64 + 1))
            .sum::<u64>() as usize;
        GlrlmMatrix {
            levels,
            max_len,
            per_direction: [
                summed.clone(),
                vec![0; levels * max_len],
                vec![0; levels * max_len],
                vec![0; levels * max_len],
            ],
            summed,
            pixel_count,
        }
    }
}

// Scan-line start points and step for each direction over a w x h raster.
fn direction_lines(dir: usize, w: usize, h: usize) -> (Vec<(isize, isize)>, (isize, isize)) {
    let (wi, hi) = (w as isize, h as isize);
    match dir {
        // 0 degrees: rows, stepping +x.
        0 => ((0..hi).map(|y| (0, y)).collect(), (1, 0)),
        // 45 degrees: diagonals stepping (+x, +y) from the top row and left column.
        1 => {
            let mut starts: Vec<(isize, isize)> = (0..wi).map(|x| (x, 0)).collect();
            starts.extend((1..hi).map(|y| (0, y)));
            (starts, (1, 1))
        }
        // 90 degrees: columns, stepping +y.
        2 => ((0..wi).map(|x| (x, 0)).collect(), (0, 1)),
        // 135 degrees: anti-diagonals stepping (-x, +y) from the top row and
        // right column.
        3 => {
            let mut starts: Vec<(isize, isize)> = (0..wi).map(|x| (x, 0)).collect();
            starts.extend((1..hi).map(|y| (wi - 1, y)));
            (starts, (-1, 1))
        }
        _ => unreachable!(),
    }
}

/// Run-length matrix of a quantized raster over the four directions.
pub fn glrlm_of_quantized(q: &QuantGrid) -> GlrlmMatrix {
    let levels = q.levels as usize;
    let (w, h) = (q.width, q.height);
    let max_len = w.max(h);
    let mut per_direction: [Vec<u64>; 4] = [
        vec![0; levels * max_len],
        vec![0; levels * max_len],
        vec![0; levels * max_len],
        vec![0; levels * max_len],
    ];
    for (dir, counts) in per_direction.iter_mut().enumerate() {
        let (starts, (dx, dy)) = direction_lines(dir, w, h);
        for &(sx, sy) in &starts {
            let mut x = sx;
            let mut y = sy;
            let mut run_level: Option<u16> = None;
            let mut run_len = 0usize;
            loop {
                let in_bounds = x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h;
                let cell = if in_bounds {
                    let (xu, yu) = (x as usize, y as usize);
                    if q.is_valid(xu, yu) {
                        Some(q.level(xu, yu))
                    } else {
                        None
                    }
                } else {
                    None
                };
                match (run_level, cell) {
                    (Some(l), Some(c)) if c == l => run_len += 1,
                    (prev, cur) => {
                        if let Some(l) = prev {
                            counts[l as usize * max_len + (run_len - 1)] += 1;
                        }
                        run_level = cur;
                        run_len = usize::from(cur.is_some());
                    }
                }
                if !in_bounds {
                    break;
                }
                x += dx;
                y += dy;
            }
        }
    }
    let mut summed = vec![0u64; levels * max_len];
    for counts in &per_direction {
        for (s, &c) in summed.iter_mut().zip(counts) {
            *s += c;
        }
    }
    let pixel_count = q.valid.iter().filter(|&&v| v).count();
    GlrlmMatrix {
        levels,
        max_len,
        per_direction,
        summed,
        pixel_count,
    }
}

/// Run-length matrix of a full ROI at the given quantization (the paper
/// setting is 16 levels).
pub fn glrlm(roi: &Roi, levels: u16) -> Result<GlrlmMatrix> {
    let grid = roi.to_grid();
    let q = quantize_region(&grid, None, levels)?;
    Ok(glrlm_of_quantized(&q))
}

/// The seven classical run-length descriptors, computed on the
/// direction-summed matrix. Gray levels take 1-based values; run percentage
/// divides by the matrix's own pixel accounting so direction summation
/// keeps it in [0, 1].
pub fn glrlm_features(m: &GlrlmMatrix) -> Result<[f64; 7]> {
    let mut n_runs = 0.0f64;
    let mut pixel_mass = 0.0f64;
    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut lgre = 0.0;
    let mut hgre = 0.0;
    let mut per_level = vec![0.0f64; m.levels];
    let mut per_len = vec![0.0f64; m.max_len];
    for level in 0..m.levels {
        for len in 1..=m.max_len {
            let c = m.summed_count(level, len) as f64;
            if c == 0.0 {
                continue;
            }
            let l = len as f64;
            let g = (level + 1) as f64;
            n_runs += c;
            pixel_mass += c * l;
            sre += c / (l * l);
            lre += c * l * l;
            lgre += c / (g * g);
            hgre += c * g * g;
            per_level[level] += c;
            per_len[len - 1] += c;
        }
    }
    if n_runs == 0.0 {
        return Err(Error::DegenerateInput("empty run-length matrix".into()));
    }
    let gln: f64 = per_level.iter().map(|&c| c * c).sum::<f64>() / n_runs;
    let rln: f64 = per_len.iter().map(|&c| c * c).sum::<f64>() / n_runs;
    Ok([
        sre / n_runs,
        lre / n_runs,
        gln,
        n_runs / pixel_mass,
        rln,
        lgre / n_runs,
        hgre / n_runs,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{GrayImage, Grid, Roi, ROI_SIDE};
    use crate::manifest::View;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn quant_from_levels(w: usize, h: usize, levels: u16, data: Vec<u16>) -> QuantGrid {
        QuantGrid {
            width: w,
            height: h,
            levels,
            valid: vec![true; w * h],
            data,
        }
    }

    #[test]
    fn constant_roi_direction_zero_is_150_runs_of_150() {
        let roi = Roi::new(
            GrayImage::new(ROI_SIDE, ROI_SIDE, 16, vec![500; ROI_SIDE * ROI_SIDE]).unwrap(),
            "t".into(),
            View::Cc,
        )
        .unwrap();
        let m = glrlm(&roi, 16).unwrap();
        assert_eq!(m.direction_count(0, 0, 150), 150);
        let total_dir0: u64 = (0..16)
            .flat_map(|g| (1..=150).map(move |l| (g, l)))
            .map(|(g, l)| m.direction_count(0, g, l))
            .sum();
        assert_eq!(total_dir0, 150);
    }

    #[test]
    fn short_row_runs() {
        // Row [a, a, b]: one run of length 2 and one of length 1.
        let q = quant_from_levels(3, 1, 4, vec![1, 1, 2]);
        let m = glrlm_of_quantized(&q);
        assert_eq!(m.direction_count(0, 1, 2), 1);
        assert_eq!(m.direction_count(0, 2, 1), 1);
        assert_eq!(m.direction_count(0, 1, 1), 0);
    }

    /// Independent scan-line oracle: walk each direction's lines and count
    /// maximal runs into a map.
    fn oracle_counts(
        q: &QuantGrid,
        dx: isize,
        dy: isize,
        starts: &[(isize, isize)],
    ) -> std::collections::HashMap<(u16, usize), u64> {
        let mut out = std::collections::HashMap::new();
        for &(sx, sy) in starts {
            let mut line = Vec::new();
            let (mut x, mut y) = (sx, sy);
            while x >= 0 && y >= 0 && (x as usize) < q.width && (y as usize) < q.height {
                line.push(q.level(x as usize, y as usize));
                x += dx;
                y += dy;
            }
            let mut i = 0;
            while i < line.len() {
                let mut j = i + 1;
                while j < line.len() && line[j] == line[i] {
                    j += 1;
                }
                *out.entry((line[i], j - i)).or_insert(0) += 1;
                i = j;
            }
        }
        out
    }

    #[test]
    fn random_image_matches_scanline_oracle_and_pixel_accounting() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (w, h) = (8usize, 8usize);
            let data: Vec<u16> = (0..w * h).map(|_| rng.gen_range(0..4)).collect();
            let q = quant_from_levels(w, h, 4, data);
            let m = glrlm_of_quantized(&q);
            let specs: [((isize, isize), Vec<(isize, isize)>); 4] = [
                ((1, 0), (0..h as isize).map(|y| (0, y)).collect()),
                ((1, 1), {
                    let mut s: Vec<(isize, isize)> = (0..w as isize).map(|x| (x, 0)).collect();
                    s.extend((1..h as isize).map(|y| (0, y)));
                    s
                }),
                ((0, 1), (0..w as isize).map(|x| (x, 0)).collect()),
                ((-1, 1), {
                    let mut s: Vec<(isize, isize)> = (0..w as isize).map(|x| (x, 0)).collect();
                    s.extend((1..h as isize).map(|y| (w as isize - 1, y)));
                    s
                }),
            ];
            for (dir, ((dx, dy), starts)) in specs.iter().enumerate() {
                let oracle = oracle_counts(&q, *dx, *dy, starts);
                // every oracle entry matches
                for (&(g, len), &c) in &oracle {
                    assert_eq!(
                        m.direction_count(dir, g as usize, len),
                        c,
                        "dir {dir} level {g} len {len}"
                    );
                }
                // pixel accounting per direction
                let mass: u64 = (0..4)
                    .flat_map(|g| (1..=m.max_len()).map(move |l| (g, l)))
                    .map(|(g, l)| m.direction_count(dir, g, l) * l as u64)
                    .sum();
                assert_eq!(mass, (w * h) as u64, "direction {dir} pixel accounting");
            }
        }
    }

    #[test]
    fn all_runs_length_one() {
        // 2x2 tile of four distinct levels: every neighbor differs along all
        // four directions, so every run has length 1.
        let q = quant_from_levels(
            6,
            6,
            4,
            (0..36)
                .map(|i| {
                    let (x, y) = (i % 6, i / 6);
                    ((x % 2) + 2 * (y % 2)) as u16
                })
                .collect(),
        );
        let m = glrlm_of_quantized(&q);
        let f = glrlm_features(&m).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-12, "short-run emphasis");
        assert!((f[3] - 1.0).abs() < 1e-12, "run percentage");
    }

    #[test]
    fn single_whole_row_run_long_run_emphasis() {
        let n = 150usize;
        let mut counts = vec![0u64; 16 * n];
        counts[3 * n + (n - 1)] = 1; // one run, level 3, length 150
        let m = GlrlmMatrix::from_summed_counts(16, n, counts);
        let f = glrlm_features(&m).unwrap();
        assert!((f[1] - (n * n) as f64).abs() < 1e-9, "long-run emphasis");
    }

    #[test]
    fn toy_matrix_features_match_direct_summation() {
        // Hand-built summed matrix; all 7 descriptors via naive loops.
        let levels = 3;
        let max_len = 4;
        #[rustfmt::skip]
        let counts = vec![
            // lengths 1  2  3  4
            2, 1, 0, 0, // level 1
            0, 3, 0, 1, // level 2
            5, 0, 2, 0, // level 3
        ];
        let m = GlrlmMatrix::from_summed_counts(levels, max_len, counts.clone());
        let f = glrlm_features(&m).unwrap();
        let mut nr = 0.0;
        let mut mass = 0.0;
        let (mut sre, mut lre, mut lgre, mut hgre) = (0.0, 0.0, 0.0, 0.0);
        let mut pl = [0.0; 3];
        let mut pn = [0.0; 4];
        for g in 0..3 {
            for len in 1..=4 {
                let c = counts[g * 4 + len - 1] as f64;
                nr += c;
                mass += c * len as f64;
                sre += c / (len * len) as f64;
                lre += c * (len * len) as f64;
                lgre += c / ((g + 1) * (g + 1)) as f64;
                hgre += c * ((g + 1) * (g + 1)) as f64;
                pl[g] += c;
                pn[len - 1] += c;
            }
        }
        let expect = [
            sre / nr,
            lre / nr,
            pl.iter().map(|c| c * c).sum::<f64>() / nr,
            nr / mass,
            pn.iter().map(|c| c * c).sum::<f64>() / nr,
            lgre / nr,
            hgre / nr,
        ];
        for (i, (&got, &want)) in f.iter().zip(&expect).enumerate() {
            assert!((got - want).abs() < 1e-12, "descriptor {i}");
        }
    }

    #[test]
    fn empty_matrix_errors() {
        let m = GlrlmMatrix::from_summed_counts(4, 4, vec![0; 16]);
        assert!(glrlm_features(&m).is_err());
    }

    #[test]
    fn rotation_by_90_degrees_bit_identical_features() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..5 {
            let grid = Grid::from_fn(ROI_SIDE, ROI_SIDE, |_, _| {
                f64::from(rng.gen_range(0u16..65535))
            });
            let rotated = Grid::from_fn(ROI_SIDE, ROI_SIDE, |x, y| grid.get(ROI_SIDE - 1 - y, x));
            let qa = quantize_region(&grid, None, 16).unwrap();
            let qb = quantize_region(&rotated, None, 16).unwrap();
            let fa = glrlm_features(&glrlm_of_quantized(&qa)).unwrap();
            let fb = glrlm_features(&glrlm_of_quantized(&qb)).unwrap();
            assert_eq!(fa, fb);
        }
    }
}
