//! IDX container parsing (the MNIST-family format): big-endian headers,
//! optional gzip compression auto-detected from the leading magic bytes.

use crate::data::Dataset;
use crate::error::{CoreError, Result};
use crate::numerics::matrix::Matrix;
use flate2::read::GzDecoder;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// The four canonical Fashion-MNIST file names (searched with and without
/// a .gz suffix).
#[derive(Debug, Clone)]
pub struct DataFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

pub const CANONICAL_NAMES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

impl DataFiles {
    /// Resolves the canonical names under `dir`, preferring uncompressed
    /// files and falling back to `.gz`.
    pub fn locate(dir: &Path) -> Result<Self> {
        let find = |name: &str| -> Result<PathBuf> {
            let plain = dir.join(name);
            if plain.exists() {
                return Ok(plain);
            }
            let gz = dir.join(format!("{name}.gz"));
            if gz.exists() {
                return Ok(gz);
            }
            Err(CoreError::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} (or .gz) not found in {}", name, dir.display()),
            )))
        };
        Ok(DataFiles {
            train_images: find(CANONICAL_NAMES[0])?,
            train_labels: find(CANONICAL_NAMES[1])?,
            test_images: find(CANONICAL_NAMES[2])?,
            test_labels: find(CANONICAL_NAMES[3])?,
        })
    }
}

/// Reads a whole file, transparently decompressing when the gzip magic
/// bytes 0x1f 0x8b lead.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| {
            CoreError::parse("gzip stream", format!("{}: {e}", path.display()))
        })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl<'a> Reader<'a> {
    fn u32_be(&mut self, field: &str) -> Result<u32> {
        if self.pos + 4 > self.buf.len() {
            return Err(CoreError::parse(
                format!("{} {field}", self.what),
                "file truncated",
            ));
        }
        let v = u32::from_be_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn bytes(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::parse(
                format!("{} {field}", self.what),
                format!("expected {n} bytes, file truncated"),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Parses an IDX image file into (count, rows, cols, pixels).
pub fn parse_idx_images(data: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    let mut r = Reader {
        buf: data,
        pos: 0,
        what: "image",
    };
    let magic = r.u32_be("magic")?;
    if magic != IMAGE_MAGIC {
        return Err(CoreError::parse(
            "image magic",
            format!("expected 0x{IMAGE_MAGIC:08x}, got 0x{magic:08x}"),
        ));
    }
    let count = r.u32_be("count")? as usize;
    let rows = r.u32_be("rows")? as usize;
    let cols = r.u32_be("cols")? as usize;
    let pixels = r.bytes(count * rows * cols, "pixels")?.to_vec();
    Ok((count, rows, cols, pixels))
}

/// Parses an IDX label file into label bytes.
pub fn parse_idx_labels(data: &[u8]) -> Result<Vec<u8>> {
    let mut r = Reader {
        buf: data,
        pos: 0,
        what: "label",
    };
    let magic = r.u32_be("magic")?;
    if magic != LABEL_MAGIC {
        return Err(CoreError::parse(
            "label magic",
            format!("expected 0x{LABEL_MAGIC:08x}, got 0x{magic:08x}"),
        ));
    }
    let count = r.u32_be("count")? as usize;
    Ok(r.bytes(count, "labels")?.to_vec())
}

/// Loads one images/labels pair: pixels divided by 255, each image
/// flattened row-major.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let (count, rows, cols, pixels) = parse_idx_images(&read_maybe_gz(images_path)?)?;
    let labels = parse_idx_labels(&read_maybe_gz(labels_path)?)?;
    if labels.len() != count {
        return Err(CoreError::parse(
            "count",
            format!("{count} images but {} labels", labels.len()),
        ));
    }
    let dim = rows * cols;
    let data: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let images = Matrix::from_vec(count, dim, data)?;
    Dataset::new(images, labels)
}

/// Loads the train and test splits from a directory holding the canonical
/// Fashion-MNIST files.
pub fn load_idx_dir(dir: &Path) -> Result<(Dataset, Dataset)> {
    let files = DataFiles::locate(dir)?;
    let train = load_idx(&files.train_images, &files.train_labels)?;
    let test = load_idx(&files.test_images, &files.test_labels)?;
    Ok((train, test))
}

/// Serializes images (u8 pixels) into IDX bytes.
pub fn encode_idx_images(count: usize, rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), count * rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(count as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    out
}

/// Serializes labels into IDX bytes.
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        // Two 2x2 images with known bytes.
        let images = encode_idx_images(2, 2, 2, &[0, 51, 102, 255, 10, 20, 30, 40]);
        let labels = encode_idx_labels(&[3, 7]);
        (images, labels)
    }

    fn write_temp(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, bytes).unwrap();
        p
    }

    #[test]
    fn parses_handcrafted_fixture() {
        let tmp = tempfile::tempdir().unwrap();
        let (im, lb) = fixture();
        let ip = write_temp(tmp.path(), "im", &im);
        let lp = write_temp(tmp.path(), "lb", &lb);
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.image(0), &[0.0, 51.0 / 255.0, 102.0 / 255.0, 1.0]);
        assert_eq!(ds.labels(), &[3, 7]);
    }

    #[test]
    fn gzip_is_autodetected() {
        let tmp = tempfile::tempdir().unwrap();
        let (im, lb) = fixture();
        let gz = |bytes: &[u8]| {
            let mut enc = GzEncoder::new(Vec::new(), Compression::default());
            enc.write_all(bytes).unwrap();
            enc.finish().unwrap()
        };
        let ip = write_temp(tmp.path(), "im.gz", &gz(&im));
        let lp = write_temp(tmp.path(), "lb.gz", &gz(&lb));
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.image(1), &[10.0 / 255.0, 20.0 / 255.0, 30.0 / 255.0, 40.0 / 255.0]);
    }

    #[test]
    fn wrong_magic_names_the_field() {
        let mut im = fixture().0;
        im[3] = 0x99;
        let err = parse_idx_images(&im).unwrap_err();
        assert!(err.to_string().contains("image magic"), "{err}");

        let mut lb = fixture().1;
        lb[3] = 0x99;
        let err = parse_idx_labels(&lb).unwrap_err();
        assert!(err.to_string().contains("label magic"), "{err}");
    }

    #[test]
    fn truncation_names_the_field() {
        let im = fixture().0;
        let err = parse_idx_images(&im[..10]).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        let err = parse_idx_images(&im[..im.len() - 1]).unwrap_err();
        assert!(err.to_string().contains("pixels"), "{err}");
    }

    #[test]
    fn count_mismatch_is_detected() {
        let tmp = tempfile::tempdir().unwrap();
        let (im, _) = fixture();
        let lb = encode_idx_labels(&[1]);
        let ip = write_temp(tmp.path(), "im", &im);
        let lp = write_temp(tmp.path(), "lb", &lb);
        let err = load_idx(&ip, &lp).unwrap_err();
        assert!(err.to_string().contains("2 images but 1 labels"), "{err}");
    }
}
