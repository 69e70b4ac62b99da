//! Shape descriptors of the segmented lesion mask.
//!
//! Conventions, fixed for layout v1:
//! - axis lengths come from the second-moment ellipse with the 1/12
//!   pixel-extent term, so even degenerate masks have nonzero axes;
//! - orientation and Feret angles are degrees in (-90, 90], measured
//!   counterclockwise from the x-axis with y pointing up;
//! - perimeter is the corner-corrected boundary-chain estimate
//!   (0.980 per axial step, 1.406 per diagonal step, -0.091 per corner);
//!   `perimeter_old` is the plain chain length (1 / sqrt(2) weights);
//! - the convex hull is taken over pixel corners, so hull area and Feret
//!   widths measure the pixel squares rather than center points;
//! - holes use 8-connected background components (complement of the
//!   4-connected foreground), Euler number = 1 - holes.

use crate::error::{Error, Result};
use crate::segmentation::LesionMask;

/// All 23 geometry descriptors in layout order (see `GEOM_NAMES`).
pub fn geometric_features(mask: &LesionMask) -> Result<[f64; 23]> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if bits[y * w + x] {
                n += 1;
                sx += x as f64;
                sy += y as f64;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
        }
    }
    if n == 0 {
        return Err(Error::DegenerateInput("empty mask".into()));
    }
    let nf = n as f64;
    let area = nf;
    let (cx, cy) = (sx / nf, sy / nf);

    // Second-moment ellipse (pixel treated as a unit square: +1/12).
    let (mut mxx, mut myy, mut mxy) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..h {
        for x in 0..w {
            if bits[y * w + x] {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                mxx += dx * dx;
                myy += dy * dy;
                mxy += dx * dy;
            }
        }
    }
    mxx = mxx / nf + 1.0 / 12.0;
    myy = myy / nf + 1.0 / 12.0;
    mxy /= nf;
    let common = ((mxx - myy).powi(2) + 4.0 * mxy * mxy).sqrt();
    let major = 2.0 * (2.0f64).sqrt() * (mxx + myy + common).sqrt();
    let minor = 2.0 * (2.0f64).sqrt() * (mxx + myy - common).max(0.0).sqrt();
    let eccentricity = (1.0 - (minor / major).powi(2)).max(0.0).sqrt();
    // y-up sign convention for the reported angle.
    let orientation = 0.5 * (-2.0 * mxy).atan2(mxx - myy).to_degrees();

    // Convex hull over pixel corners.
    let mut corners: Vec<(f64, f64)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if bits[y * w + x] {
                // Only boundary pixels contribute hull candidates.
                let interior = x > 0
                    && y > 0
                    && x + 1 < w
                    && y + 1 < h
                    && bits[y * w + x - 1]
                    && bits[y * w + x + 1]
                    && bits[(y - 1) * w + x]
                    && bits[(y + 1) * w + x];
                if !interior {
                    let (xf, yf) = (x as f64, y as f64);
                    corners.push((xf, yf));
                    corners.push((xf + 1.0, yf));
                    corners.push((xf, yf + 1.0));
                    corners.push((xf + 1.0, yf + 1.0));
                }
            }
        }
    }
    let hull = convex_hull(&mut corners);
    let convex_area = polygon_area(&hull);
    let convex_perimeter = polygon_perimeter(&hull);

    // Boundary chain and perimeter estimates.
    let (n_even, n_odd, n_corners) = boundary_chain_stats(bits, w, h);
    let perimeter = 0.980 * n_even as f64 + 1.406 * n_odd as f64 - 0.091 * n_corners as f64;
    let perimeter_old = n_even as f64 + std::f64::consts::SQRT_2 * n_odd as f64;

    // Hole filling: 8-connected background reachable from the border.
    let (filled_area, n_holes) = fill_holes(bits, w, h);
    let euler_number = 1.0 - n_holes as f64;

    let equivalent_diameter = (4.0 * area / std::f64::consts::PI).sqrt();
    let solidity = if convex_area > 0.0 {
        area / convex_area
    } else {
        1.0
    };
    let bbox_area = ((max_x - min_x + 1) * (max_y - min_y + 1)) as f64;
    let extent = area / bbox_area;
    let circularity = 4.0 * std::f64::consts::PI * area / (perimeter * perimeter);

    let (max_feret, max_feret_angle) = max_feret_diameter(&hull);
    let (min_feret, min_feret_angle) = min_feret_diameter(&hull);
    let roundness_ratio = 4.0 * area / (std::f64::consts::PI * major * major);

    let aspect_ratio = major / minor;
    let compactness = perimeter * perimeter / (4.0 * std::f64::consts::PI * area);
    let convex_perimeter_ratio = convex_perimeter / perimeter;
    let feret_aspect_ratio = max_feret / min_feret;

    Ok([
        area,
        major,
        minor,
        eccentricity,
        orientation,
        convex_area,
        circularity,
        filled_area,
        euler_number,
        equivalent_diameter,
        solidity,
        extent,
        perimeter,
        perimeter_old,
        max_feret,
        max_feret_angle,
        min_feret,
        min_feret_angle,
        roundness_ratio,
        aspect_ratio,
        compactness,
        convex_perimeter_ratio,
        feret_aspect_ratio,
    ])
}

/// Andrew monotone chain; returns hull vertices in order without repeats.
fn convex_hull(points: &mut Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    points.dedup();
    let n = points.len();
    if n <= 2 {
        return points.clone();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    for &p in points.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in points.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % poly.len()];
        s += x0 * y1 - x1 * y0;
    }
    s.abs() / 2.0
}

fn polygon_perimeter(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % poly.len()];
        s += ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    }
    s
}

// Moore neighborhood in clockwise order starting East (y grows downward).
const MOORE: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Traces the outer boundary (Moore tracing, Jacob's stopping criterion) and
/// returns (axial steps, diagonal steps, corner count) of the cyclic chain.
/// A single-pixel mask uses the pixel-edge convention (4 axial, 4 corners).
fn boundary_chain_stats(bits: &[bool], w: usize, h: usize) -> (usize, usize, usize) {
    let start = bits.iter().position(|&b| b).expect("nonempty mask");
    let (sx, sy) = ((start % w) as isize, (start / w) as isize);
    let fg = |x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && bits[y as usize * w + x as usize]
    };
    // Scan-order start pixel has a background West neighbor.
    let mut boundary: Vec<(isize, isize)> = vec![(sx, sy)];
    let mut current = (sx, sy);
    let mut entry_dir = 4usize; // came from the West neighbor
    let first_state;
    // Find the first move; if none, the mask is a single pixel.
    let mut found = None;
    for k in 1..=8 {
        let dir = (entry_dir + k) % 8;
        let cand = (current.0 + MOORE[dir].0, current.1 + MOORE[dir].1);
        if fg(cand.0, cand.1) {
            found = Some((cand, dir));
            break;
        }
    }
    match found {
        None => return (4, 0, 4),
        Some((next, dir)) => {
            first_state = (current, dir);
            current = next;
            entry_dir = (dir + 4) % 8; // direction back to the previous pixel
            boundary.push(current);
        }
    }
    let mut chain: Vec<usize> = vec![first_state.1];
    let limit = 8 * bits.len() + 16;
    for _ in 0..limit {
        let mut moved = false;
        for k in 1..=8 {
            let dir = (entry_dir + k) % 8;
            let cand = (current.0 + MOORE[dir].0, current.1 + MOORE[dir].1);
            if fg(cand.0, cand.1) {
                if (current, dir) == first_state {
                    // Completed the cycle.
                    boundary.pop(); // last element equals the start pixel
                    let n_even = chain.iter().filter(|&&c| c % 2 == 0).count();
                    let n_odd = chain.len() - n_even;
                    let mut corners = 0;
                    for i in 0..chain.len() {
                        if chain[i] != chain[(i + 1) % chain.len()] {
                            corners += 1;
                        }
                    }
                    return (n_even, n_odd, corners);
                }
                chain.push(dir);
                current = cand;
                entry_dir = (dir + 4) % 8;
                boundary.push(current);
                moved = true;
                break;
            }
        }
        if !moved {
            break; // isolated pixel reached unexpectedly
        }
    }
    // Fallback for degenerate traces (should not happen for 4-connected masks).
    let n_even = chain.iter().filter(|&&c| c % 2 == 0).count();
    let n_odd = chain.len() - n_even;
    let mut corners = 0;
    for i in 0..chain.len() {
        if chain[i] != chain[(i + 1) % chain.len().max(1)] {
            corners += 1;
        }
    }
    (n_even, n_odd, corners)
}

/// Returns (filled area, hole count) using 8-connected background.
fn fill_holes(bits: &[bool], w: usize, h: usize) -> (f64, usize) {
    let mut reachable = vec![false; w * h];
    let mut stack = Vec::new();
    for x in 0..w {
        for y in [0, h - 1] {
            let i = y * w + x;
            if !bits[i] && !reachable[i] {
                reachable[i] = true;
                stack.push(i);
            }
        }
    }
    for y in 0..h {
        for x in [0, w - 1] {
            let i = y * w + x;
            if !bits[i] && !reachable[i] {
                reachable[i] = true;
                stack.push(i);
            }
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (dx, dy) in MOORE {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                let ni = ny as usize * w + nx as usize;
                if !bits[ni] && !reachable[ni] {
                    reachable[ni] = true;
                    stack.push(ni);
                }
            }
        }
    }
    // Interior background pixels form the holes.
    let mut hole_label = vec![false; w * h];
    let mut filled = 0usize;
    let mut holes = 0usize;
    for i in 0..w * h {
        if bits[i] {
            filled += 1;
        } else if !reachable[i] {
            filled += 1;
            if !hole_label[i] {
                holes += 1;
                hole_label[i] = true;
                let mut s = vec![i];
                while let Some(j) = s.pop() {
                    let (x, y) = ((j % w) as isize, (j / w) as isize);
                    for (dx, dy) in MOORE {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                            let nj = ny as usize * w + nx as usize;
                            if !bits[nj] && !reachable[nj] && !hole_label[nj] {
                                hole_label[nj] = true;
                                s.push(nj);
                            }
                        }
                    }
                }
            }
        }
    }
    (filled as f64, holes)
}

/// Angle in degrees folded into (-90, 90], y-up convention.
fn fold_angle_deg(dx: f64, dy: f64) -> f64 {
    let mut a = (-dy).atan2(dx).to_degrees();
    if a <= -90.0 {
        a += 180.0;
    }
    if a > 90.0 {
        a -= 180.0;
    }
    a
}

/// Largest pairwise distance over hull vertices and its direction.
fn max_feret_diameter(hull: &[(f64, f64)]) -> (f64, f64) {
    if hull.len() < 2 {
        return (1.0, 0.0); // single pixel: unit square width
    }
    let mut best = 0.0f64;
    let mut pair = ((0.0, 0.0), (0.0, 0.0));
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            let d2 = (hull[i].0 - hull[j].0).powi(2) + (hull[i].1 - hull[j].1).powi(2);
            if d2 > best {
                best = d2;
                pair = (hull[i], hull[j]);
            }
        }
    }
    let angle = fold_angle_deg(pair.1 .0 - pair.0 .0, pair.1 .1 - pair.0 .1);
    (best.sqrt(), angle)
}

/// Minimum caliper width over hull edges (rotating calipers) and the
/// direction along which that width is measured.
fn min_feret_diameter(hull: &[(f64, f64)]) -> (f64, f64) {
    if hull.len() < 2 {
        return (1.0, 90.0);
    }
    if hull.len() == 2 {
        return (0.0, fold_angle_deg(hull[1].0 - hull[0].0, hull[1].1 - hull[0].1));
    }
    let mut best = f64::INFINITY;
    let mut best_angle = 0.0;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let ex = b.0 - a.0;
        let ey = b.1 - a.1;
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        let mut width = 0.0f64;
        for &(px, py) in hull {
            let d = ((px - a.0) * ey - (py - a.1) * ex).abs() / len;
            width = width.max(d);
        }
        if width < best {
            best = width;
            // Width is measured perpendicular to the supporting edge.
            best_angle = fold_angle_deg(-ey, ex);
        }
    }
    (best, best_angle)
}
