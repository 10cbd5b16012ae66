//! Binary container shared by field (`VTF1`) and sinogram (`VTS1`) files:
//! an 8-byte magic, a `u64` little-endian byte count followed by a UTF-8 JSON
//! header, then little-endian `f64` samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub fn write<H: Serialize>(path: &Path, magic: &[u8; 8], header: &H, payload: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let json = serde_json::to_vec(header)?;
    w.write_all(magic)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in payload {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read<H: DeserializeOwned>(path: &Path, magic: &[u8; 8]) -> Result<(H, Vec<f64>)> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bad = |reason: &str| Error::Container { path: Some(path.to_path_buf()), reason: reason.to_string() };
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(bad("bad magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header = serde_json::from_slice(body)?;
    let rest = &bytes[16 + len..];
    if rest.len() % 8 != 0 {
        return Err(bad("payload is not a whole number of f64"));
    }
    let payload = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((header, payload))
}
