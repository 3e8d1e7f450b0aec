//! Signal ingestion and evaluation: binary PGM/PPM images, a raw voxel
//! occupancy format, PSNR / IoU / bits-per-pixel metrics, network rendering,
//! and deterministic procedural test images.
//!
//! PSNR is always computed on the [0, 1] float representation, before any
//! 8-bit write-out, so the metric never depends on double quantization.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::fastmath;
use crate::inr::{coordinate_grid, encode_inputs, forward, Network};
use crate::mat::Mat;
use crate::rng::SplitMix64;
use crate::Result;

/// Rows of the coordinate grid evaluated per forward call while rendering;
/// keeps peak memory flat for volumetric grids.
const RENDER_CHUNK: usize = 16384;

/// A raster image with float samples in [0, 1], row-major (y outer, x inner),
/// channel-interleaved. `channels` is 1 (grayscale) or 3 (RGB).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSignal {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl ImageSignal {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<ImageSignal> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!("images carry 1 or 3 channels, not {channels}")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "pixel buffer holds {} values, {}x{}x{} needs {}",
                pixels.len(),
                width,
                height,
                channels,
                width * height * channels
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("pixel value {bad} escapes [0, 1]")));
        }
        Ok(ImageSignal { width, height, channels, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Training targets: one row per grid point of `coordinate_grid([height,
    /// width])`, one column per channel. Pixel order and grid order coincide.
    pub fn to_targets(&self) -> Mat {
        Mat::from_vec(self.width * self.height, self.channels, self.pixels.clone())
            .expect("pixel count is validated at construction")
    }
}

/// A binary occupancy grid: voxel (ix, iy, iz) lives at index
/// `(ix * ny + iy) * nz + iz` (x outermost, z fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    voxels: Vec<u8>,
}

impl OccupancyGrid {
    pub fn new(nx: usize, ny: usize, nz: usize, voxels: Vec<u8>) -> Result<OccupancyGrid> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::invalid("voxel grid dimensions must be positive"));
        }
        if voxels.len() != nx * ny * nz {
            return Err(Error::invalid(format!(
                "voxel buffer holds {} values, {}x{}x{} needs {}",
                voxels.len(),
                nx,
                ny,
                nz,
                nx * ny * nz
            )));
        }
        if let Some(bad) = voxels.iter().find(|v| **v > 1) {
            return Err(Error::invalid(format!("voxel value {bad} is not binary")));
        }
        Ok(OccupancyGrid { nx, ny, nz, voxels })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }

    pub fn occupied_count(&self) -> usize {
        self.voxels.iter().filter(|v| **v == 1).count()
    }

    /// Training targets: one row per grid point of `coordinate_grid([nx, ny,
    /// nz])`, single column of 0.0/1.0 values.
    pub fn to_targets(&self) -> Mat {
        Mat::from_vec(self.voxels.len(), 1, self.voxels.iter().map(|v| *v as f64).collect())
            .expect("voxel count is validated at construction")
    }
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

/// Pulls the next whitespace-delimited ASCII token, skipping `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("truncated image header"));
    }
    Ok(&bytes[start..*pos])
}

fn parse_header_int(token: &[u8]) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| Error::format("image header field is not a decimal integer"))
}

/// Reads a binary PGM (P5, grayscale) or PPM (P6, RGB) file with maxval 255.
/// Each byte v maps to the float v/255.
pub fn load_image(path: &Path) -> Result<ImageSignal> {
    let bytes = fs::read(path)?;
    let mut pos = 0;
    let magic = next_token(&bytes, &mut pos)?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::format(format!(
                "unsupported image magic {:?} (binary P5/P6 only)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = parse_header_int(next_token(&bytes, &mut pos)?)?;
    let height = parse_header_int(next_token(&bytes, &mut pos)?)?;
    let maxval = parse_header_int(next_token(&bytes, &mut pos)?)?;
    if maxval != 255 {
        return Err(Error::format(format!("unsupported maxval {maxval} (only 255)")));
    }
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format("missing separator before image payload"));
    }
    pos += 1;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format("image dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() != expected {
        return Err(Error::format(format!(
            "image payload holds {} bytes, header promises {}",
            payload.len(),
            expected
        )));
    }
    let pixels = payload.iter().map(|v| *v as f64 / 255.0).collect();
    ImageSignal::new(width, height, channels, pixels)
}

/// Writes a binary PGM/PPM with maxval 255. Each float maps to
/// round(v * 255), clamped to [0, 255].
pub fn save_image(img: &ImageSignal, path: &Path) -> Result<()> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = Vec::with_capacity(32 + img.pixels.len());
    write!(out, "{magic}\n{} {}\n255\n", img.width, img.height)?;
    out.extend(img.pixels.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// SVOX voxel grids
// ---------------------------------------------------------------------------

const SVOX_MAGIC: &[u8; 4] = b"SVOX";

/// Reads the raw voxel format: "SVOX", u32 nx/ny/nz little-endian, then
/// nx*ny*nz payload bytes, each 0 or 1.
pub fn load_voxels(path: &Path) -> Result<OccupancyGrid> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(Error::format("voxel file shorter than its header"));
    }
    if &bytes[..4] != SVOX_MAGIC {
        return Err(Error::format("voxel file magic mismatch (want SVOX)"));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (nx, ny, nz) = (dim(4), dim(8), dim(12));
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(nz))
        .ok_or_else(|| Error::format("voxel dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != expected {
        return Err(Error::format(format!(
            "voxel payload holds {} bytes, header promises {}",
            payload.len(),
            expected
        )));
    }
    if let Some(bad) = payload.iter().find(|v| **v > 1) {
        return Err(Error::format(format!("voxel byte {bad} is not binary")));
    }
    OccupancyGrid::new(nx, ny, nz, payload.to_vec())
}

pub fn save_voxels(grid: &OccupancyGrid, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(16 + grid.voxels.len());
    out.extend_from_slice(SVOX_MAGIC);
    out.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    out.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    out.extend_from_slice(&(grid.nz as u32).to_le_bytes());
    out.extend_from_slice(&grid.voxels);
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Mean squared error over all pixel values of two same-shaped images.
pub fn image_mse(reference: &ImageSignal, test: &ImageSignal) -> Result<f64> {
    if reference.width != test.width
        || reference.height != test.height
        || reference.channels != test.channels
    {
        return Err(Error::invalid(format!(
            "image shapes differ: {}x{}x{} vs {}x{}x{}",
            reference.width,
            reference.height,
            reference.channels,
            test.width,
            test.height,
            test.channels
        )));
    }
    let se: f64 = reference
        .pixels
        .iter()
        .zip(&test.pixels)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(se / reference.pixels.len() as f64)
}

/// Peak signal-to-noise ratio in dB for [0, 1] signals: 10 log10(1 / MSE).
/// Identical images yield +infinity; see [`display_db`] for the capped form.
pub fn psnr(reference: &ImageSignal, test: &ImageSignal) -> Result<f64> {
    let mse = image_mse(reference, test)?;
    Ok(psnr_from_mse(mse))
}

/// PSNR of a [0, 1] signal with the given mean squared error.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// dB value as reported in human-facing output: +infinity caps at 200 dB.
pub fn display_db(db: f64) -> f64 {
    db.min(200.0)
}

/// Intersection over union of two same-shaped binary grids. Two empty grids
/// agree perfectly and score 1.
pub fn iou(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!(
            "voxel grid shapes differ: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let mut inter = 0u64;
    let mut union = 0u64;
    for (va, vb) in a.voxels.iter().zip(&b.voxels) {
        inter += (*va == 1 && *vb == 1) as u64;
        union += (*va == 1 || *vb == 1) as u64;
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

/// Bits per pixel of a `file_bytes`-byte artifact describing a width x height
/// signal: 8 * bytes / (width * height).
pub fn bpp(file_bytes: u64, width: usize, height: usize) -> Result<f64> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("bpp needs positive dimensions"));
    }
    Ok(8.0 * file_bytes as f64 / (width * height) as f64)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Evaluates the network on every row of `grid` in fixed-size chunks,
/// returning the flat output buffer (rows x output_dim).
fn forward_over_grid(net: &Network, grid: &Mat) -> Result<Vec<f64>> {
    let inputs = encode_inputs(&net.arch, grid)?;
    let out_dim = net.arch.output_dim;
    let cols = inputs.cols();
    let mut out = Vec::with_capacity(inputs.rows() * out_dim);
    let mut start = 0;
    while start < inputs.rows() {
        let rows = (inputs.rows() - start).min(RENDER_CHUNK);
        let chunk =
            Mat::from_vec(rows, cols, inputs.as_slice()[start * cols..(start + rows) * cols].to_vec())?;
        let y = forward(net, &chunk)?;
        out.extend_from_slice(y.as_slice());
        start += rows;
    }
    Ok(out)
}

/// Renders the network over the inclusive [-1, 1] image grid (y outer, x
/// inner), clamping outputs into [0, 1].
pub fn render_inr_image(net: &Network, width: usize, height: usize) -> Result<ImageSignal> {
    if net.arch.input_dim != 2 {
        return Err(Error::invalid(format!(
            "image rendering needs a 2-input network, got {}",
            net.arch.input_dim
        )));
    }
    let grid = coordinate_grid(&[height, width])?;
    let raw = forward_over_grid(net, &grid)?;
    let pixels = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    ImageSignal::new(width, height, net.arch.output_dim, pixels)
}

/// Renders the network over a 3D grid and binarizes at `threshold`
/// (strictly-greater comparison).
pub fn render_inr_occupancy(
    net: &Network,
    dims: (usize, usize, usize),
    threshold: f64,
) -> Result<OccupancyGrid> {
    if net.arch.input_dim != 3 || net.arch.output_dim != 1 {
        return Err(Error::invalid(format!(
            "occupancy rendering needs a 3 -> 1 network, got {} -> {}",
            net.arch.input_dim, net.arch.output_dim
        )));
    }
    let (nx, ny, nz) = dims;
    let grid = coordinate_grid(&[nx, ny, nz])?;
    let raw = forward_over_grid(net, &grid)?;
    let voxels = raw.iter().map(|v| (*v > threshold) as u8).collect();
    OccupancyGrid::new(nx, ny, nz, voxels)
}

/// Rasterizes the sphere |c| <= radius on the inclusive [-1, 1]^3 grid —
/// the analytic reference for occupancy experiments.
pub fn analytic_sphere(n: usize, radius: f64) -> Result<OccupancyGrid> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::invalid("sphere radius must lie in [0, 1]"));
    }
    let tick = |i: usize| -1.0 + 2.0 * (i as f64 / (n - 1) as f64);
    let mut voxels = Vec::with_capacity(n * n * n);
    for ix in 0..n {
        let x = tick(ix);
        for iy in 0..n {
            let y = tick(iy);
            for iz in 0..n {
                let z = tick(iz);
                voxels.push((x * x + y * y + z * z <= radius * radius) as u8);
            }
        }
    }
    OccupancyGrid::new(n, n, n, voxels)
}

// ---------------------------------------------------------------------------
// Procedural test images
// ---------------------------------------------------------------------------

fn normalize_to_unit(values: &mut [f64]) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if hi - lo <= 0.0 {
        values.iter_mut().for_each(|v| *v = 0.5);
        return;
    }
    // true division: guarantees the max maps to exactly 1.0 and nothing
    // rounds past the ends of [0, 1]
    let span = hi - lo;
    values.iter_mut().for_each(|v| *v = (*v - lo) / span);
}

/// A smooth diagonal gradient: pixel (x, y) = (x/(w-1) + y/(h-1)) / 2.
pub fn gradient_image(width: usize, height: usize) -> Result<ImageSignal> {
    if width < 2 || height < 2 {
        return Err(Error::invalid("gradient image needs at least 2x2 pixels"));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 / (height - 1) as f64;
        for x in 0..width {
            let fx = x as f64 / (width - 1) as f64;
            pixels.push(0.5 * (fx + fy));
        }
    }
    ImageSignal::new(width, height, 1, pixels)
}

/// A sum of `bumps` random isotropic Gaussians, min-max normalized to [0, 1].
pub fn gaussian_bumps_image(
    width: usize,
    height: usize,
    bumps: usize,
    seed: u64,
) -> Result<ImageSignal> {
    if width < 2 || height < 2 || bumps == 0 {
        return Err(Error::invalid("bump image needs 2x2 pixels and at least one bump"));
    }
    let mut rng = SplitMix64::new(seed);
    let params: Vec<(f64, f64, f64, f64)> = (0..bumps)
        .map(|_| {
            let cx = rng.next_f64();
            let cy = rng.next_f64();
            let sigma = 0.05 + 0.15 * rng.next_f64();
            let amp = rng.next_symmetric(1.0);
            (cx, cy, sigma, amp)
        })
        .collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 / (height - 1) as f64;
        for x in 0..width {
            let fx = x as f64 / (width - 1) as f64;
            let mut v = 0.0;
            for (cx, cy, sigma, amp) in &params {
                let d2 = (fx - cx) * (fx - cx) + (fy - cy) * (fy - cy);
                v += amp * fastmath::exp(-d2 / (2.0 * sigma * sigma));
            }
            pixels.push(v);
        }
    }
    normalize_to_unit(&mut pixels);
    ImageSignal::new(width, height, 1, pixels)
}

/// Band-limited noise: a sum of random sinusoids with per-axis frequencies
/// bounded by `cutoff` cycles across the image, min-max normalized.
pub fn band_limited_noise_image(
    width: usize,
    height: usize,
    cutoff: f64,
    seed: u64,
) -> Result<ImageSignal> {
    if width < 2 || height < 2 || !(cutoff > 0.0) {
        return Err(Error::invalid("noise image needs 2x2 pixels and a positive cutoff"));
    }
    const COMPONENTS: usize = 24;
    let mut rng = SplitMix64::new(seed);
    let params: Vec<(f64, f64, f64, f64)> = (0..COMPONENTS)
        .map(|_| {
            let fx = rng.next_symmetric(cutoff);
            let fy = rng.next_symmetric(cutoff);
            let phase = rng.next_f64() * std::f64::consts::TAU;
            let amp = 0.5 + 0.5 * rng.next_f64();
            (fx, fy, phase, amp)
        })
        .collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 / (height - 1) as f64;
        for x in 0..width {
            let fx = x as f64 / (width - 1) as f64;
            let mut v = 0.0;
            for (wx, wy, phase, amp) in &params {
                v += amp * fastmath::sin(std::f64::consts::TAU * (wx * fx + wy * fy) + phase);
            }
            pixels.push(v);
        }
    }
    normalize_to_unit(&mut pixels);
    ImageSignal::new(width, height, 1, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inr::{init_network, Activation, ActivationKind, Architecture};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("sinr-signals-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn pgm_bytes_map_to_unit_floats() {
        let path = tmp("two_by_two.pgm");
        fs::write(&path, b"P5\n2 2\n255\n\x00\xff\x80\x40").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 2, 1));
        assert_eq!(img.pixels(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn minimal_ppm_parses() {
        let path = tmp("one_pixel.ppm");
        fs::write(&path, b"P6 1 1 255\n\x10\x20\x30").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (1, 1, 3));
        assert_eq!(img.pixels(), &[16.0 / 255.0, 32.0 / 255.0, 48.0 / 255.0]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let path = tmp("commented.pgm");
        fs::write(&path, b"P5\n# made by hand\n2 1\n# trailing note\n255\n\x00\xff").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn save_then_load_is_identity_on_eight_bit_values() {
        let mut rng = SplitMix64::new(11);
        let pixels: Vec<f64> =
            (0..12 * 7 * 3).map(|_| (rng.next_u64() % 256) as f64 / 255.0).collect();
        let img = ImageSignal::new(12, 7, 3, pixels).unwrap();
        let path = tmp("roundtrip.ppm");
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn save_quantizes_within_half_step() {
        let img = ImageSignal::new(2, 1, 1, vec![0.30001, 0.69999]).unwrap();
        let path = tmp("halfstep.pgm");
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn malformed_images_are_rejected() {
        let bad_magic = tmp("bad_magic.pgm");
        fs::write(&bad_magic, b"P2\n2 2\n255\n....").unwrap();
        assert!(load_image(&bad_magic).is_err());

        let bad_maxval = tmp("bad_maxval.pgm");
        fs::write(&bad_maxval, b"P5\n2 2\n65535\n\x00\x00\x00\x00").unwrap();
        assert!(load_image(&bad_maxval).is_err());

        let truncated = tmp("truncated.pgm");
        fs::write(&truncated, b"P5\n2 2\n255\n\x00\x00\x00").unwrap();
        assert!(load_image(&truncated).is_err());

        let no_header = tmp("no_header.pgm");
        fs::write(&no_header, b"P5 2").unwrap();
        assert!(load_image(&no_header).is_err());
    }

    #[test]
    fn svox_round_trip_and_size() {
        let grid = OccupancyGrid::new(2, 2, 2, vec![1; 8]).unwrap();
        let path = tmp("cube.svox");
        save_voxels(&grid, &path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 24);
        assert_eq!(load_voxels(&path).unwrap(), grid);
    }

    #[test]
    fn svox_rejects_bad_files() {
        let bad_magic = tmp("bad.svox");
        fs::write(&bad_magic, b"VOXS\x01\x00\x00\x00\x01\x00\x00\x00\x01\x00\x00\x00\x01").unwrap();
        assert!(load_voxels(&bad_magic).is_err());

        let bad_byte = tmp("ternary.svox");
        fs::write(&bad_byte, b"SVOX\x01\x00\x00\x00\x01\x00\x00\x00\x01\x00\x00\x00\x02").unwrap();
        assert!(matches!(load_voxels(&bad_byte), Err(Error::Format(_))));

        let short = tmp("short.svox");
        fs::write(&short, b"SVOX\x02\x00\x00\x00\x02\x00\x00\x00\x02\x00\x00\x00\x01\x01").unwrap();
        assert!(load_voxels(&short).is_err());
    }

    #[test]
    fn psnr_matches_formula_and_sentinel() {
        let a = ImageSignal::new(4, 4, 1, vec![0.5; 16]).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert_eq!(display_db(f64::INFINITY), 200.0);

        let b = ImageSignal::new(4, 4, 1, vec![0.6; 16]).unwrap();
        let db = psnr(&a, &b).unwrap();
        assert!((db - 20.0).abs() < 1e-9, "uniform 0.1 error gives {db} dB");
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());

        let mse = image_mse(&a, &b).unwrap();
        assert_eq!(db, 10.0 * (1.0 / mse).log10());
    }

    #[test]
    fn psnr_rejects_shape_mismatch() {
        let a = ImageSignal::new(4, 4, 1, vec![0.5; 16]).unwrap();
        let b = ImageSignal::new(2, 8, 1, vec![0.5; 16]).unwrap();
        assert!(psnr(&a, &b).is_err());
    }

    #[test]
    fn iou_counting_cases() {
        let a = OccupancyGrid::new(10, 10, 1, {
            let mut v = vec![0u8; 100];
            v[..50].fill(1);
            v
        })
        .unwrap();
        let b = OccupancyGrid::new(10, 10, 1, {
            let mut v = vec![0u8; 100];
            v[..100].fill(1);
            v
        })
        .unwrap();
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &b).unwrap(), 0.5);

        let empty = OccupancyGrid::new(10, 10, 1, vec![0; 100]).unwrap();
        assert_eq!(iou(&empty, &empty).unwrap(), 1.0);

        let disjoint = OccupancyGrid::new(10, 10, 1, {
            let mut v = vec![0u8; 100];
            v[50..].fill(1);
            v
        })
        .unwrap();
        assert_eq!(iou(&a, &disjoint).unwrap(), 0.0);
    }

    #[test]
    fn iou_never_rises_as_a_copy_flips_voxels() {
        let base = OccupancyGrid::new(4, 4, 4, {
            let mut v = vec![0u8; 64];
            v[..32].fill(1);
            v
        })
        .unwrap();
        let mut flipped = base.voxels().to_vec();
        let mut last = 1.0;
        for i in 0..32 {
            flipped[i] = 0;
            let other = OccupancyGrid::new(4, 4, 4, flipped.clone()).unwrap();
            let v = iou(&base, &other).unwrap();
            assert!(v <= last + 1e-15 && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn bpp_reference_points() {
        assert_eq!(bpp(49152, 768, 512).unwrap(), 1.0);
        assert_eq!(bpp(0, 10, 10).unwrap(), 0.0);
        let one = bpp(1000, 64, 64).unwrap();
        let two = bpp(2000, 64, 64).unwrap();
        assert_eq!(two, 2.0 * one);
        assert!(bpp(1, 0, 5).is_err());
    }

    #[test]
    fn zero_network_renders_black() {
        let arch = Architecture {
            input_dim: 2,
            output_dim: 1,
            hidden_layers: 0,
            width: 8,
            activation: Activation::new(ActivationKind::Sine),
            pe_levels: 0,
        };
        let mut net = init_network(&arch, 1).unwrap();
        for w in &mut net.weights {
            w.fill(0.0);
        }
        let img = render_inr_image(&net, 5, 3).unwrap();
        assert_eq!((img.width(), img.height()), (5, 3));
        assert!(img.pixels().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_output_nets_binarize_cleanly() {
        let arch = Architecture {
            input_dim: 3,
            output_dim: 1,
            hidden_layers: 0,
            width: 4,
            activation: Activation::new(ActivationKind::Gaussian),
            pe_levels: 0,
        };
        let mut net = init_network(&arch, 1).unwrap();
        for w in &mut net.weights {
            w.fill(0.0);
        }
        net.biases[1][0] = 0.9;
        let grid = render_inr_occupancy(&net, (4, 4, 4), 0.5).unwrap();
        assert_eq!(grid.occupied_count(), 64);
        net.biases[1][0] = 0.1;
        let grid = render_inr_occupancy(&net, (4, 4, 4), 0.5).unwrap();
        assert_eq!(grid.occupied_count(), 0);
    }

    #[test]
    fn render_matches_unchunked_forward() {
        let arch = Architecture {
            input_dim: 2,
            output_dim: 1,
            hidden_layers: 1,
            width: 8,
            activation: Activation::new(ActivationKind::Sine),
            pe_levels: 2,
        };
        let net = init_network(&arch, 5).unwrap();
        let img = render_inr_image(&net, 9, 7).unwrap();
        let grid = coordinate_grid(&[7, 9]).unwrap();
        let enc = encode_inputs(&net.arch, &grid).unwrap();
        let direct = forward(&net, &enc).unwrap();
        for (a, b) in img.pixels().iter().zip(direct.as_slice()) {
            assert_eq!(*a, b.clamp(0.0, 1.0));
        }
    }

    #[test]
    fn analytic_sphere_is_centered_and_plausible() {
        let grid = analytic_sphere(33, 0.6).unwrap();
        let (nx, ny, nz) = grid.dims();
        assert_eq!((nx, ny, nz), (33, 33, 33));
        // center voxel occupied, corners empty
        let center = (16 * 33 + 16) * 33 + 16;
        assert_eq!(grid.voxels()[center], 1);
        assert_eq!(grid.voxels()[0], 0);
        // occupied fraction near (4/3)pi r^3 / 8
        let frac = grid.occupied_count() as f64 / (33.0f64).powi(3);
        let want = (4.0 / 3.0) * std::f64::consts::PI * 0.6f64.powi(3) / 8.0;
        assert!((frac - want).abs() < 0.02, "fraction {frac} vs {want}");
    }

    #[test]
    fn procedural_images_are_deterministic_and_in_range() {
        let g = gradient_image(16, 16).unwrap();
        assert_eq!(g.pixels()[0], 0.0);
        assert_eq!(g.pixels()[16 * 16 - 1], 1.0);

        let b1 = gaussian_bumps_image(32, 32, 6, 9).unwrap();
        let b2 = gaussian_bumps_image(32, 32, 6, 9).unwrap();
        assert_eq!(b1, b2);
        let b3 = gaussian_bumps_image(32, 32, 6, 10).unwrap();
        assert_ne!(b1, b3);

        let n1 = band_limited_noise_image(32, 32, 4.0, 1).unwrap();
        let n2 = band_limited_noise_image(32, 32, 4.0, 1).unwrap();
        assert_eq!(n1, n2);
        for img in [&b1, &n1] {
            assert!(img.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
            let lo = img.pixels().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = img.pixels().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(lo, 0.0);
            assert_eq!(hi, 1.0);
        }
    }
}
