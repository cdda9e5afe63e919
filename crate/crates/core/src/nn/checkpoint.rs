use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{ParamStore, Tensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"GFCK";
pub const CHECKPOINT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEntry {
    pub name: String,
    pub value: Tensor,
    pub frozen: bool,
}

fn put_u32(out: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{v} exceeds u32")))?;
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

/// Writes every parameter as (name, shape, f64 data, frozen flag), in
/// registry order.
pub fn save_checkpoint(store: &ParamStore, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    put_u32(&mut out, store.len())?;
    for (_, name, p) in store.iter() {
        put_u32(&mut out, name.len())?;
        out.write_all(name.as_bytes())?;
        put_u32(&mut out, p.value.shape().len())?;
        for &d in p.value.shape() {
            put_u32(&mut out, d)?;
        }
        for v in p.value.data() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&[p.frozen as u8])?;
    }
    out.flush()?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> std::result::Result<&[u8], String> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.at))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
}

fn parse(bytes: &[u8]) -> std::result::Result<Vec<CheckpointEntry>, String> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let count = r.u32()?;
    let mut entries = Vec::new();
    for _ in 0..count {
        let len = r.u32()?;
        let name = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| "parameter name is not UTF-8".to_string())?;
        let rank = r.u32()?;
        let shape = (0..rank).map(|_| r.u32()).collect::<std::result::Result<Vec<_>, _>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or("shape overflows")?;
        let raw = r.take(n.checked_mul(8).ok_or("shape overflows")?)?;
        let data = raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
        let frozen = match r.take(1)?[0] {
            0 => false,
            1 => true,
            b => return Err(format!("frozen flag {b} for `{name}`")),
        };
        let value = Tensor::new(&shape, data).map_err(|e| e.to_string())?;
        entries.push(CheckpointEntry { name, value, frozen });
    }
    if r.at != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.at));
    }
    Ok(entries)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Vec<CheckpointEntry>> {
    let path = path.as_ref();
    parse(&fs::read(path)?).map_err(|reason| Error::corrupt(path, reason))
}

impl ParamStore {
    /// Replaces values and frozen flags from checkpoint entries. Names and
    /// shapes must match the registry exactly.
    pub fn load_entries(&mut self, entries: &[CheckpointEntry]) -> Result<()> {
        if entries.len() != self.len() {
            return Err(Error::shape("load_entries", &[self.len()], &[entries.len()]));
        }
        for ((name, p), e) in self.params_mut().zip(entries) {
            if name != e.name {
                return Err(Error::InvalidArgument(format!("checkpoint has `{}` where `{name}` was expected", e.name)));
            }
            if p.value.shape() != e.value.shape() {
                return Err(Error::shape("load_entries", p.value.shape(), e.value.shape()));
            }
            p.value = e.value.clone();
            p.frozen = e.frozen;
        }
        Ok(())
    }

    pub fn to_entries(&self) -> Vec<CheckpointEntry> {
        self.iter()
            .map(|(_, name, p)| CheckpointEntry {
                name: name.to_string(),
                value: p.value.clone(),
                frozen: p.frozen,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore {
        let mut s = ParamStore::new();
        s.add("trunk.w", Tensor::new(&[2, 2], vec![0.1, -2.5, 3.0, 1e-300]).unwrap()).unwrap();
        let b = s.add("head.b", Tensor::new(&[3], vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        s.get_mut(b).frozen = true;
        s
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.gfck");
        let s = store();
        save_checkpoint(&s, &path).unwrap();
        let entries = load_checkpoint(&path).unwrap();
        let mut other = store();
        other.unfreeze_all();
        other.load_entries(&entries).unwrap();
        assert_eq!(other, s);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.gfck");
        save_checkpoint(&store(), &path).unwrap();
        let mut s = ParamStore::new();
        s.add("trunk.w", Tensor::zeros(&[4])).unwrap();
        s.add("head.b", Tensor::zeros(&[3])).unwrap();
        assert!(matches!(s.load_entries(&load_checkpoint(&path).unwrap()), Err(Error::Shape { .. })));
    }

    #[test]
    fn truncation_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.gfck");
        save_checkpoint(&store(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Corrupt { .. })));
    }
}
