//! Synthetic stand-in for the real image data, for environments without
//! the dataset files and for fast deterministic tests.
//!
//! The generator is built to reproduce the training regime of a real
//! image benchmark, not just its shapes: classes are mixtures of several
//! smooth templates (so no linear separator exists), class pairs share
//! part of their structure (so they are confusable), pixel noise keeps
//! per-pixel SNR below one, and a small fraction of labels is resampled
//! to give the task an irreducible error floor. A linearly separable toy
//! set would be fitted within a few epochs, the gradients would die, and
//! the slow weight-variance growth this crate studies would never appear.

use crate::data::idx::{encode_idx_images, encode_idx_labels};
use crate::data::{Dataset, NUM_CLASSES};
use crate::error::Result;
use crate::numerics::matrix::Matrix;
use crate::numerics::rng::RngStream;
use std::path::Path;

/// Stream-id range reserved for synthetic generation.
const SYNTHETIC_BASE: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Image side length; dimension is side^2.
    pub side: usize,
    /// Coarse template grid resolution.
    pub template_grid: usize,
    /// Distinct templates per class.
    pub modes_per_class: usize,
    /// Template amplitude relative to pixel noise.
    pub signal: f64,
    pub noise: f64,
    /// Fraction of labels resampled uniformly (both splits).
    pub label_noise: f64,
    /// Maximum per-image cyclic translation, in pixels per axis. Dense
    /// layers have no translation prior, so shifts make the class
    /// structure slow to extract, like real image data.
    pub max_shift: usize,
    /// Upper bound of the per-image blend toward the paired class.
    pub pair_mix: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            train_per_class: 600,
            test_per_class: 100,
            side: 28,
            template_grid: 7,
            modes_per_class: 8,
            signal: 0.8,
            noise: 0.7,
            label_noise: 0.05,
            max_shift: 4,
            pair_mix: 0.4,
            seed: 20260810,
        }
    }
}

struct Templates {
    /// [class][mode] -> side*side field.
    per_class: Vec<Vec<Vec<f64>>>,
}

fn bilinear_upsample(coarse: &[f64], grid: usize, side: usize) -> Vec<f64> {
    let mut out = vec![0.0; side * side];
    let scale = (grid - 1) as f64 / (side - 1) as f64;
    for y in 0..side {
        for x in 0..side {
            let gy = y as f64 * scale;
            let gx = x as f64 * scale;
            let (y0, x0) = (gy.floor() as usize, gx.floor() as usize);
            let (y1, x1) = ((y0 + 1).min(grid - 1), (x0 + 1).min(grid - 1));
            let (fy, fx) = (gy - y0 as f64, gx - x0 as f64);
            let v00 = coarse[y0 * grid + x0];
            let v01 = coarse[y0 * grid + x1];
            let v10 = coarse[y1 * grid + x0];
            let v11 = coarse[y1 * grid + x1];
            out[y * side + x] = v00 * (1.0 - fy) * (1.0 - fx)
                + v01 * (1.0 - fy) * fx
                + v10 * fy * (1.0 - fx)
                + v11 * fy * fx;
        }
    }
    out
}

fn make_templates(spec: &SyntheticSpec) -> Templates {
    let g = spec.template_grid;
    let field = |stream: u64| {
        let mut rng = RngStream::new(spec.seed, stream);
        rng.normal_vec(g * g, 0.0, 1.0)
    };
    let mut per_class = Vec::new();
    for c in 0..NUM_CLASSES {
        let pair_shared = field(SYNTHETIC_BASE + (c / 2) as u64);
        let class_core = field(SYNTHETIC_BASE + 16 + c as u64);
        let mut modes = Vec::new();
        for m in 0..spec.modes_per_class {
            let own = field(SYNTHETIC_BASE + 64 + (c * spec.modes_per_class + m) as u64);
            let coarse: Vec<f64> = pair_shared
                .iter()
                .zip(&class_core)
                .zip(&own)
                // Shared pair structure + class core + mode detail,
                // combined to roughly unit variance.
                .map(|((s, k), o)| 0.5 * s + 0.55 * k + 0.67 * o)
                .collect();
            modes.push(bilinear_upsample(&coarse, g, spec.side));
        }
        per_class.push(modes);
    }
    Templates { per_class }
}

/// u8 pixels and labels for one split; images of class c are contiguous.
fn render_split(
    spec: &SyntheticSpec,
    templates: &Templates,
    per_class: usize,
    stream_base: u64,
) -> (Vec<u8>, Vec<u8>) {
    let side = spec.side;
    let dim = side * side;
    let mut pixels = Vec::with_capacity(per_class * NUM_CLASSES * dim);
    let mut labels = Vec::with_capacity(per_class * NUM_CLASSES);
    for c in 0..NUM_CLASSES {
        let pair = c ^ 1;
        for k in 0..per_class {
            let img_stream = stream_base + (c * per_class + k) as u64;
            let mut rng = RngStream::new(spec.seed, img_stream);
            let own = &templates.per_class[c][rng.uniform_index(spec.modes_per_class)];
            let other = &templates.per_class[pair][rng.uniform_index(spec.modes_per_class)];
            let beta = spec.pair_mix * rng.uniform();
            let contrast = 1.0 + 0.15 * rng.normal();
            let (dy, dx) = if spec.max_shift > 0 {
                let span = 2 * spec.max_shift + 1;
                (
                    rng.uniform_index(span) as isize - spec.max_shift as isize,
                    rng.uniform_index(span) as isize - spec.max_shift as isize,
                )
            } else {
                (0, 0)
            };
            for y in 0..side {
                for x in 0..side {
                    let sy = (y as isize - dy).rem_euclid(side as isize) as usize;
                    let sx = (x as isize - dx).rem_euclid(side as isize) as usize;
                    let t = (1.0 - beta) * own[sy * side + sx] + beta * other[sy * side + sx];
                    let raw = contrast * spec.signal * t + spec.noise * rng.normal();
                    let v = (110.0 + 70.0 * raw).round().clamp(0.0, 255.0) as u8;
                    pixels.push(v);
                }
            }
            let label = if rng.uniform() < spec.label_noise {
                rng.uniform_index(NUM_CLASSES) as u8
            } else {
                c as u8
            };
            labels.push(label);
        }
    }
    (pixels, labels)
}

fn splits(spec: &SyntheticSpec) -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
    let templates = make_templates(spec);
    let (train_px, train_lb) = render_split(
        spec,
        &templates,
        spec.train_per_class,
        SYNTHETIC_BASE + 4096,
    );
    let (test_px, test_lb) = render_split(
        spec,
        &templates,
        spec.test_per_class,
        SYNTHETIC_BASE + 4096 + (spec.train_per_class * NUM_CLASSES) as u64,
    );
    (train_px, train_lb, test_px, test_lb)
}

fn to_dataset(pixels: &[u8], labels: Vec<u8>, dim: usize) -> Result<Dataset> {
    let data: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let images = Matrix::from_vec(labels.len(), dim, data)?;
    Dataset::new(images, labels)
}

/// Generates (train, test) datasets.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<(Dataset, Dataset)> {
    let dim = spec.side * spec.side;
    let (train_px, train_lb, test_px, test_lb) = splits(spec);
    Ok((
        to_dataset(&train_px, train_lb, dim)?,
        to_dataset(&test_px, test_lb, dim)?,
    ))
}

/// Writes the synthetic splits as the four canonical IDX files under
/// `dir`, so the normal ingestion path can read them.
pub fn write_synthetic_idx(spec: &SyntheticSpec, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let (train_px, train_lb, test_px, test_lb) = splits(spec);
    let s = spec.side;
    std::fs::write(
        dir.join("train-images-idx3-ubyte"),
        encode_idx_images(train_lb.len(), s, s, &train_px),
    )?;
    std::fs::write(
        dir.join("train-labels-idx1-ubyte"),
        encode_idx_labels(&train_lb),
    )?;
    std::fs::write(
        dir.join("t10k-images-idx3-ubyte"),
        encode_idx_images(test_lb.len(), s, s, &test_px),
    )?;
    std::fs::write(
        dir.join("t10k-labels-idx1-ubyte"),
        encode_idx_labels(&test_lb),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::load_idx_dir;

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            train_per_class: 20,
            test_per_class: 5,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn shapes_and_ranges() {
        let (train, test) = synthetic_dataset(&small_spec()).unwrap();
        assert_eq!(train.n_samples(), 200);
        assert_eq!(test.n_samples(), 50);
        assert_eq!(train.dim(), 784);
        let max = train.images().as_slice().iter().cloned().fold(0.0, f64::max);
        let min = train.images().as_slice().iter().cloned().fold(1.0, f64::min);
        assert_eq!(max, 1.0, "saturated pixels present");
        assert_eq!(min, 0.0, "dark pixels present");
    }

    #[test]
    fn labels_mostly_match_the_generating_class() {
        let (train, _) = synthetic_dataset(&small_spec()).unwrap();
        let per_class = 20;
        let mut clean = 0;
        for (i, &l) in train.labels().iter().enumerate() {
            if l as usize == i / per_class {
                clean += 1;
            }
        }
        let frac = clean as f64 / train.n_samples() as f64;
        assert!(frac > 0.8 && frac < 1.0, "clean fraction {frac}");
    }

    #[test]
    fn deterministic() {
        let a = synthetic_dataset(&small_spec()).unwrap();
        let b = synthetic_dataset(&small_spec()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn idx_round_trip_matches_in_memory() {
        let spec = small_spec();
        let tmp = tempfile::tempdir().unwrap();
        write_synthetic_idx(&spec, tmp.path()).unwrap();
        let (train_file, test_file) = load_idx_dir(tmp.path()).unwrap();
        let (train_mem, test_mem) = synthetic_dataset(&spec).unwrap();
        assert_eq!(train_file, train_mem);
        assert_eq!(test_file, test_mem);
    }
}
