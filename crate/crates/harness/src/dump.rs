//! Binary tensor files.
//!
//! Little-endian layout: magic `CYLA`, version `u32`, order `u32`, extents
//! `u32[order]`, then `(re, im)` `f64` pairs in canonical (first index
//! fastest) order.

use std::io::{self, Read, Write};

use thiserror::Error;
use ucya_core::{ComplexTensor, C64};

pub const MAGIC: [u8; 4] = *b"CYLA";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("not a tensor dump (bad magic)")]
    Magic,
    #[error("unsupported dump version {0}")]
    Version(u32),
    #[error("extent {0} does not fit in u32")]
    Extent(usize),
    #[error("malformed tensor: {0}")]
    Tensor(#[from] ucya_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_tensor<W: Write>(mut w: W, t: &ComplexTensor) -> Result<(), DumpError> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(t.order() as u32).to_le_bytes())?;
    for &e in t.shape() {
        let e = u32::try_from(e).map_err(|_| DumpError::Extent(e))?;
        w.write_all(&e.to_le_bytes())?;
    }
    for z in t.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_tensor<R: Read>(mut r: R) -> Result<ComplexTensor, DumpError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(DumpError::Magic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DumpError::Version(version));
    }
    let order = read_u32(&mut r)? as usize;
    let shape = (0..order).map(|_| read_u32(&mut r).map(|e| e as usize)).collect::<io::Result<Vec<_>>>()?;
    let len = shape.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e)).ok_or(DumpError::Extent(usize::MAX))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        data.push(C64::new(re, im));
    }
    Ok(ComplexTensor::new(shape, data)?)
}
