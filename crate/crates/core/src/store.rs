//! Binary checkpoint and dataset files.
//!
//! Both formats are little-endian and end with a CRC-32 of every preceding byte.
//!
//! | model (`SNPW`)            | dataset (`SNPD`)                     |
//! |---------------------------|--------------------------------------|
//! | magic `[u8; 4]`           | magic `[u8; 4]`                      |
//! | format version `u16` = 1  | format version `u16` = 1             |
//! | encoder version `u16`     | encoder version `u16`                |
//! | inputs, hidden, outputs `u32 x 3` | record count `u64`           |
//! | `w1` (hidden rows), `b1`, `w2`, `b2` as `f32` | per record 173 `f32` then label `u8` |
//! | CRC-32 `u32`              | CRC-32 `u32`                         |

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::encoder::{FeatureVector, ENCODER_VERSION, FEATURES};
use crate::error::{Result, StoreError};
use crate::neuralnet::Mlp;
use crate::trainer::{ReplayDataset, ReplaySample};

pub const MODEL_MAGIC: [u8; 4] = *b"SNPW";
pub const DATASET_MAGIC: [u8; 4] = *b"SNPD";
pub const FORMAT_VERSION: u16 = 1;

const RECORD_BYTES: usize = FEATURES * 4 + 1;

fn seal(mut bytes: Vec<u8>) -> Vec<u8> {
    let crc = crc32fast::hash(&bytes);
    bytes.extend_from_slice(&crc.to_le_bytes());
    bytes
}

fn put_f32s<'a>(out: &mut Vec<u8>, values: impl IntoIterator<Item = &'a f32>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn model_to_bytes(mlp: &Mlp) -> Vec<u8> {
    let (hidden, inputs) = mlp.w1.dim();
    let mut out = Vec::with_capacity(24 + 4 * (hidden * inputs + 2 * hidden + 1));
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&mlp.encoder_version.to_le_bytes());
    for d in [inputs, hidden, 1] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    put_f32s(&mut out, mlp.w1.iter());
    put_f32s(&mut out, mlp.b1.iter());
    put_f32s(&mut out, mlp.w2.iter());
    put_f32s(&mut out, [mlp.b2].iter());
    seal(out)
}

pub fn dataset_to_bytes(data: &ReplayDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + data.len() * RECORD_BYTES);
    out.extend_from_slice(&DATASET_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&data.encoder_version.to_le_bytes());
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for s in &data.samples {
        put_f32s(&mut out, s.x.0.iter());
        out.push(s.g);
    }
    seal(out)
}

/// Checks magic and checksum, then returns the bytes between the magic and the trailer.
fn unseal(bytes: &[u8], magic: [u8; 4]) -> Result<&[u8], StoreError> {
    if bytes.len() < 4 || bytes[..4] != magic {
        return Err(StoreError::BadMagic {
            expected: magic,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < 8 {
        return Err(StoreError::Checksum);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(StoreError::Checksum);
    }
    Ok(&body[4..])
}

struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        if self.rest.len() < n {
            return Err(StoreError::Truncated);
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16, StoreError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, StoreError> {
        let raw = self.take(n.checked_mul(4).ok_or(StoreError::Truncated)?)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}

fn check_versions(r: &mut Reader<'_>) -> Result<u16, StoreError> {
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    let encoder = r.u16()?;
    if encoder != ENCODER_VERSION {
        return Err(StoreError::EncoderVersion {
            found: encoder,
            expected: ENCODER_VERSION,
        });
    }
    Ok(encoder)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<Mlp, StoreError> {
    let mut r = Reader {
        rest: unseal(bytes, MODEL_MAGIC)?,
    };
    let encoder_version = check_versions(&mut r)?;
    let dims = [r.u32()?, r.u32()?, r.u32()?];
    let [inputs, hidden, outputs] = dims.map(|d| d as usize);
    if inputs != FEATURES || hidden == 0 || outputs != 1 {
        return Err(StoreError::Dims(dims));
    }
    let w1 = Array2::from_shape_vec((hidden, inputs), r.f32s(hidden * inputs)?)
        .expect("length matches shape");
    let b1 = Array1::from(r.f32s(hidden)?);
    let w2 = Array1::from(r.f32s(hidden)?);
    let b2 = r.f32s(1)?[0];
    if !r.rest.is_empty() {
        return Err(StoreError::Truncated);
    }
    Ok(Mlp {
        w1,
        b1,
        w2,
        b2,
        encoder_version,
    })
}

pub fn dataset_from_bytes(bytes: &[u8]) -> Result<ReplayDataset, StoreError> {
    let mut r = Reader {
        rest: unseal(bytes, DATASET_MAGIC)?,
    };
    let encoder_version = check_versions(&mut r)?;
    let declared = r.u64()?;
    if !r.rest.len().is_multiple_of(RECORD_BYTES) {
        return Err(StoreError::Truncated);
    }
    let actual = (r.rest.len() / RECORD_BYTES) as u64;
    if declared != actual {
        return Err(StoreError::CountMismatch { declared, actual });
    }
    let mut samples = Vec::with_capacity(actual as usize);
    for record in r.rest.chunks_exact(RECORD_BYTES) {
        let mut x = [0f32; FEATURES];
        for (v, c) in x.iter_mut().zip(record[..FEATURES * 4].chunks_exact(4)) {
            *v = f32::from_le_bytes(c.try_into().expect("4 bytes"));
        }
        let g = record[FEATURES * 4];
        if g > 1 {
            return Err(StoreError::Label(g));
        }
        samples.push(ReplaySample {
            x: FeatureVector(x),
            g,
        });
    }
    Ok(ReplayDataset {
        encoder_version,
        samples,
    })
}

pub fn save_model(mlp: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, model_to_bytes(mlp))?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Mlp> {
    Ok(model_from_bytes(&fs::read(path)?)?)
}

pub fn save_dataset(data: &ReplayDataset, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, dataset_to_bytes(data))?)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<ReplayDataset> {
    Ok(dataset_from_bytes(&fs::read(path)?)?)
}
