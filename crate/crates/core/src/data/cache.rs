//! Binary dataset cache with a bit-exact round trip.
//!
//! Layout: 8-byte magic, u32 LE sample count, u32 LE dimension, label
//! bytes, then the image matrix as little-endian f64 words.

use crate::data::Dataset;
use crate::error::{CoreError, Result};
use crate::numerics::matrix::Matrix;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"CEDC0001";

pub fn save_cache(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&(dataset.n_samples() as u32).to_le_bytes())?;
    f.write_all(&(dataset.dim() as u32).to_le_bytes())?;
    f.write_all(dataset.labels())?;
    for v in dataset.images().as_slice() {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<Dataset> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)
        .map_err(|_| CoreError::parse("cache magic", "file truncated"))?;
    if &magic != MAGIC {
        return Err(CoreError::parse("cache magic", "not a dataset cache"));
    }
    let mut word = [0u8; 4];
    f.read_exact(&mut word)
        .map_err(|_| CoreError::parse("cache count", "file truncated"))?;
    let count = u32::from_le_bytes(word) as usize;
    f.read_exact(&mut word)
        .map_err(|_| CoreError::parse("cache dim", "file truncated"))?;
    let dim = u32::from_le_bytes(word) as usize;
    let mut labels = vec![0u8; count];
    f.read_exact(&mut labels)
        .map_err(|_| CoreError::parse("cache labels", "file truncated"))?;
    let mut data = vec![0.0f64; count * dim];
    let mut buf = [0u8; 8];
    for v in &mut data {
        f.read_exact(&mut buf)
            .map_err(|_| CoreError::parse("cache pixels", "file truncated"))?;
        *v = f64::from_le_bytes(buf);
    }
    Dataset::new(Matrix::from_vec(count, dim, data)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{synthetic_dataset, SyntheticSpec};

    #[test]
    fn round_trip_is_bit_identical() {
        let spec = SyntheticSpec {
            train_per_class: 5,
            test_per_class: 2,
            ..SyntheticSpec::default()
        };
        let (train, _) = synthetic_dataset(&spec).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("train.cache");
        save_cache(&train, &path).unwrap();
        let back = load_cache(&path).unwrap();
        assert_eq!(train, back);
        // And the serialized bytes themselves are stable.
        let path2 = tmp.path().join("again.cache");
        save_cache(&back, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn rejects_foreign_files() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("junk");
        std::fs::write(&path, b"definitely not a cache").unwrap();
        assert!(load_cache(&path).is_err());
    }
}
