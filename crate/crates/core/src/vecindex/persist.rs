//! Binary index file, all integers little-endian:
//!
//! ```text
//! "CBVX" | version u16 | dim u32 | count u64 | normalized u8
//! | count x (key_len u32, key utf-8 bytes)
//! | count*dim x f32
//! | crc32 u32 over every preceding byte
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{FlatIndex, IndexError};

pub const MAGIC: &[u8; 4] = b"CBVX";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 8 + 1;

pub fn encode(index: &FlatIndex) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + index.raw_rows().len() * 4 + 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(index.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(index.len() as u64).to_le_bytes());
    buf.push(u8::from(index.normalized()));
    for key in index.keys() {
        buf.extend_from_slice(&(key.len() as u32).to_le_bytes());
        buf.extend_from_slice(key.as_bytes());
    }
    for x in index.raw_rows() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end =
            self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("truncated payload"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn corrupt(msg: &str) -> IndexError {
    IndexError::Corrupt(msg.to_string())
}

pub fn decode(bytes: &[u8]) -> Result<FlatIndex, IndexError> {
    if bytes.len() < 6 || &bytes[..4] != MAGIC {
        return Err(corrupt("missing CBVX header"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(IndexError::Version(version));
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(corrupt("truncated header"));
    }
    let (payload, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
    if crc32fast::hash(payload) != stored {
        return Err(corrupt("checksum mismatch"));
    }

    let mut r = Reader { buf: payload, pos: 6 };
    let dim = r.u32()? as usize;
    let count = usize::try_from(r.u64()?).map_err(|_| corrupt("count overflows"))?;
    let normalized = match r.take(1)?[0] {
        0 => false,
        1 => true,
        _ => return Err(corrupt("bad normalize flag")),
    };
    if count > 0 && dim == 0 {
        return Err(corrupt("non-empty index with dimension 0"));
    }
    let mut keys = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let key = std::str::from_utf8(r.take(len)?).map_err(|_| corrupt("key is not UTF-8"))?;
        keys.push(key.to_string());
    }
    let n_values = count.checked_mul(dim).ok_or_else(|| corrupt("row matrix too large"))?;
    let raw = r.take(n_values.checked_mul(4).ok_or_else(|| corrupt("row matrix too large"))?)?;
    let rows: Vec<f32> = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes"))).collect();
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(corrupt("non-finite row value"));
    }
    if r.pos != payload.len() {
        return Err(corrupt("trailing bytes"));
    }
    let mut unique = std::collections::HashSet::with_capacity(keys.len());
    if let Some(dup) = keys.iter().find(|k| !unique.insert(k.as_str())) {
        return Err(IndexError::DuplicateKey(dup.clone()));
    }
    Ok(FlatIndex::from_parts(dim, keys, rows, normalized))
}

/// Writes through a temporary sibling file and renames it into place.
pub fn save_index(index: &FlatIndex, path: &Path) -> Result<(), IndexError> {
    let tmp = path.with_extension("cbvx.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(index))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<FlatIndex, IndexError> {
    decode(&fs::read(path)?)
}
