//! Grayscale raster types, 16-bit PNG IO, and ROI extraction.

use std::path::Path;

use crate::error::{Error, Result};

/// Side length of every region of interest.
pub const ROI_SIDE: usize = 150;

/// Row-major grayscale raster with 8- or 16-bit intensities stored as `u16`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    bit_depth: u8,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, bit_depth: u8, pixels: Vec<u16>) -> Result<Self> {
        if bit_depth != 8 && bit_depth != 16 {
            return Err(Error::InvalidArgument(format!(
                "bit depth must be 8 or 16, got {bit_depth}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if bit_depth == 8 {
            if let Some(p) = pixels.iter().find(|&&p| p > 0xff) {
                return Err(Error::InvalidArgument(format!(
                    "intensity {p} exceeds 8-bit range"
                )));
            }
        }
        Ok(GrayImage {
            width,
            height,
            bit_depth,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Intensity at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    /// Copies the raster into a real-valued grid.
    pub fn to_grid(&self) -> Grid {
        Grid {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }
}

/// A 150x150 lesion-centered crop together with its provenance.
#[derive(Debug, Clone)]
pub struct Roi {
    image: GrayImage,
    pub case_id: String,
    pub view: crate::manifest::View,
}

impl Roi {
    pub fn new(image: GrayImage, case_id: String, view: crate::manifest::View) -> Result<Self> {
        if image.width() != ROI_SIDE || image.height() != ROI_SIDE {
            return Err(Error::InvalidArgument(format!(
                "ROI must be {ROI_SIDE}x{ROI_SIDE}, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Ok(Roi {
            image,
            case_id,
            view,
        })
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn to_grid(&self) -> Grid {
        self.image.to_grid()
    }
}

/// Real-valued row-major raster used for filter outputs, wavelet planes and
/// other intermediates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(width: usize, height: usize) -> Self {
        Grid {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Affinely rescales values to [0, 1]; a constant grid maps to all zeros.
    pub fn normalized01(&self) -> Grid {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        let data = if span > 0.0 {
            self.data.iter().map(|&v| (v - lo) / span).collect()
        } else {
            vec![0.0; self.data.len()]
        };
        Grid {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Loads an 8- or 16-bit grayscale PNG losslessly.
pub fn load_png16(path: &Path) -> Result<GrayImage> {
    let dynimg = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::PngDecode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    match dynimg {
        image::DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let pixels = img.into_raw().into_iter().map(u16::from).collect();
            GrayImage::new(w, h, 8, pixels)
        }
        image::DynamicImage::ImageLuma16(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            GrayImage::new(w, h, 16, img.into_raw())
        }
        other => Err(Error::UnsupportedImage {
            path: path.to_path_buf(),
            message: format!("expected grayscale 8/16-bit PNG, got {other:?}"),
        }),
    }
}

/// Saves a [`GrayImage`] as a grayscale PNG, preserving bit depth.
pub fn save_png16(img: &GrayImage, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    match img.bit_depth() {
        8 => {
            let raw: Vec<u8> = img.pixels().iter().map(|&p| p as u8).collect();
            let buf = image::GrayImage::from_raw(w, h, raw).expect("buffer sized by construction");
            buf.save(path).map_err(|e| Error::PngDecode {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
        _ => {
            let buf = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(
                w,
                h,
                img.pixels().to_vec(),
            )
            .expect("buffer sized by construction");
            buf.save(path).map_err(|e| Error::PngDecode {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
    }
}

/// Cuts the 150x150 ROI whose center is the annotated lesion position.
///
/// When the window would cross an image border, it is shifted to lie fully
/// inside the image (never padded), so all 150x150 pixels are real data.
/// The annotated center maps to ROI pixel (75, 75) for interior crops.
pub fn extract_roi(
    image: &GrayImage,
    center: (usize, usize),
    case_id: &str,
    view: crate::manifest::View,
) -> Result<Roi> {
    let (cx, cy) = center;
    if !image.contains(cx, cy) {
        return Err(Error::OutOfBounds {
            x: cx,
            y: cy,
            width: image.width(),
            height: image.height(),
        });
    }
    if image.width() < ROI_SIDE || image.height() < ROI_SIDE {
        return Err(Error::InvalidArgument(format!(
            "image {}x{} smaller than ROI {ROI_SIDE}x{ROI_SIDE}",
            image.width(),
            image.height()
        )));
    }
    let half = ROI_SIDE / 2;
    let x0 = cx
        .saturating_sub(half)
        .min(image.width() - ROI_SIDE);
    let y0 = cy
        .saturating_sub(half)
        .min(image.height() - ROI_SIDE);
    let mut pixels = Vec::with_capacity(ROI_SIDE * ROI_SIDE);
    for y in y0..y0 + ROI_SIDE {
        let row = &image.pixels()[y * image.width() + x0..y * image.width() + x0 + ROI_SIDE];
        pixels.extend_from_slice(row);
    }
    let cropped = GrayImage::new(ROI_SIDE, ROI_SIDE, image.bit_depth(), pixels)?;
    Roi::new(cropped, case_id.to_string(), view)
}
