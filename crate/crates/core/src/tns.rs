//! `.tns` binary tensor container.
//!
//! Layout: the magic bytes `TNS1`, one `u8` order N, N little-endian `u64`
//! extents, then the entries as little-endian `f64` in C order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"TNS1";

pub fn write_to(t: &Tensor, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[t.order() as u8])?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_from(mut r: impl Read) -> Result<Tensor> {
    let io = |e: std::io::Error| Error::Format(e.to_string());

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut order = [0u8; 1];
    r.read_exact(&mut order).map_err(io)?;
    if order[0] == 0 {
        return Err(Error::Format("order 0".into()));
    }

    let mut dims = Vec::with_capacity(order[0] as usize);
    let mut word = [0u8; 8];
    for _ in 0..order[0] {
        r.read_exact(&mut word).map_err(io)?;
        let d = usize::try_from(u64::from_le_bytes(word))
            .map_err(|_| Error::Format("extent overflows usize".into()))?;
        dims.push(d);
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("entry count overflows".into()))?;

    let mut data = Vec::with_capacity(count.min(1 << 28));
    for _ in 0..count {
        r.read_exact(&mut word).map_err(io)?;
        data.push(f64::from_le_bytes(word));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io)? != 0 {
        return Err(Error::Format("trailing bytes after data".into()));
    }
    Tensor::from_vec(&dims, data)
}

pub fn save(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_to(t, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_from(BufReader::new(file))
}
