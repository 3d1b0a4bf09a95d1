//! Little-endian binary containers for coefficients (`AUDC`) and masks
//! (`AUDM`).
//!
//! Both start with magic, `u16` version, `u16` flags, `f64` sample rate,
//! `u64` signal length and `u32` channel count, followed per channel by
//! `f64` center, `f64` bandwidth, `u32` factor, `u64` length and the data.
//! Coefficient data are interleaved `(re, im)` pairs, `f64` when flag bit 0
//! is set and `f32` otherwise; a 32-byte bank fingerprint closes the file.
//! Mask data are `f32` values in `[0, 1]`.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::processing::Mask;
use crate::transform::Coefficients;

pub const COEF_MAGIC: &[u8; 4] = b"AUDC";
pub const MASK_MAGIC: &[u8; 4] = b"AUDM";
pub const FORMAT_VERSION: u16 = 1;

/// Storage precision of coefficient values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Complex64,
    Complex128,
}

fn write_header(w: &mut impl Write, magic: &[u8; 4], flags: u16, fs: f64, len: usize, geo: &[(f64, f64, usize, usize)]) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&fs.to_le_bytes())?;
    w.write_all(&(len as u64).to_le_bytes())?;
    w.write_all(&(geo.len() as u32).to_le_bytes())?;
    Ok(())
}

fn write_channel_header(w: &mut impl Write, center: f64, bw: f64, d: usize, n: usize) -> Result<()> {
    w.write_all(&center.to_le_bytes())?;
    w.write_all(&bw.to_le_bytes())?;
    w.write_all(&(d as u32).to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Format(format!("file truncated at byte {}", self.pos)));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn read_header(cur: &mut Cursor, magic: &[u8; 4]) -> Result<(u16, f64, u64, u32)> {
    let m = cur.take(4)?;
    if m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = cur.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let flags = cur.u16()?;
    let fs = cur.f64()?;
    let len = cur.u64()?;
    let count = cur.u32()?;
    Ok((flags, fs, len, count))
}

fn read_channel_header(cur: &mut Cursor, len: u64) -> Result<(f64, f64, u32, u64)> {
    let center = cur.f64()?;
    let bw = cur.f64()?;
    let d = cur.u32()?;
    let n = cur.u64()?;
    if d == 0 || n.checked_mul(d as u64) != Some(len) {
        return Err(Error::Format(format!("channel length {n} with d = {d} inconsistent with L = {len}")));
    }
    Ok((center, bw, d, n))
}

/// Writes coefficients to an `AUDC` file.
pub fn write_coefficients(path: impl AsRef<Path>, c: &Coefficients, precision: Precision) -> Result<()> {
    c.validate()?;
    let mut buf: Vec<u8> = Vec::with_capacity(64 + 16 * c.total_len());
    let flags = if precision == Precision::Complex128 { 1 } else { 0 };
    let geo: Vec<(f64, f64, usize, usize)> =
        (0..c.channels.len()).map(|k| (c.centers[k], c.bandwidths[k], c.d[k], c.channels[k].len())).collect();
    write_header(&mut buf, COEF_MAGIC, flags, c.fs, c.len, &geo)?;
    for (k, y) in c.channels.iter().enumerate() {
        write_channel_header(&mut buf, c.centers[k], c.bandwidths[k], c.d[k], y.len())?;
        for v in y {
            match precision {
                Precision::Complex128 => {
                    buf.extend_from_slice(&v.re.to_le_bytes());
                    buf.extend_from_slice(&v.im.to_le_bytes());
                }
                Precision::Complex64 => {
                    buf.extend_from_slice(&(v.re as f32).to_le_bytes());
                    buf.extend_from_slice(&(v.im as f32).to_le_bytes());
                }
            }
        }
    }
    buf.extend_from_slice(&c.fingerprint);
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn read_all(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    Ok(data)
}

/// Reads an `AUDC` file. With `expected`, the stored fingerprint must match.
pub fn read_coefficients(path: impl AsRef<Path>, expected: Option<[u8; 32]>) -> Result<Coefficients> {
    let data = read_all(path)?;
    let mut cur = Cursor { data: &data, pos: 0 };
    let (flags, fs, len, count) = read_header(&mut cur, COEF_MAGIC)?;
    let wide = flags & 1 == 1;
    let mut geometry = Vec::with_capacity(count as usize);
    let mut channels = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let g = read_channel_header(&mut cur, len)?;
        let mut y = Vec::with_capacity(g.3 as usize);
        for _ in 0..g.3 {
            let v = if wide {
                Complex64::new(cur.f64()?, cur.f64()?)
            } else {
                Complex64::new(cur.f32()? as f64, cur.f32()? as f64)
            };
            y.push(v);
        }
        geometry.push(g);
        channels.push(y);
    }
    let fingerprint: [u8; 32] = cur.take(32)?.try_into().unwrap();
    if cur.pos != data.len() {
        return Err(Error::Format(format!("{} trailing bytes", data.len() - cur.pos)));
    }
    if let Some(exp) = expected {
        if exp != fingerprint {
            return Err(Error::Format("coefficient file fingerprint does not match the bank".into()));
        }
    }
    Ok(Coefficients {
        channels,
        d: geometry.iter().map(|g| g.2 as usize).collect(),
        centers: geometry.iter().map(|g| g.0).collect(),
        bandwidths: geometry.iter().map(|g| g.1).collect(),
        len: len as usize,
        fs,
        fingerprint,
    })
}

/// Writes a mask laid out like `like` to an `AUDM` file.
pub fn write_mask(path: impl AsRef<Path>, m: &Mask, like: &Coefficients) -> Result<()> {
    m.validate()?;
    if m.channels.len() != like.channels.len() || m.channels.iter().zip(&like.channels).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Domain("mask shape does not match the coefficient layout".into()));
    }
    let mut buf: Vec<u8> = Vec::new();
    let geo: Vec<(f64, f64, usize, usize)> =
        (0..m.channels.len()).map(|k| (like.centers[k], like.bandwidths[k], like.d[k], m.channels[k].len())).collect();
    write_header(&mut buf, MASK_MAGIC, 0, like.fs, like.len, &geo)?;
    for (k, vals) in m.channels.iter().enumerate() {
        write_channel_header(&mut buf, geo[k].0, geo[k].1, geo[k].2, geo[k].3)?;
        for &v in vals {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

/// Reads an `AUDM` file, rejecting values outside `[0, 1]`. With `like`, the
/// stored geometry must match those coefficients.
pub fn read_mask(path: impl AsRef<Path>, like: Option<&Coefficients>) -> Result<Mask> {
    let data = read_all(path)?;
    let mut cur = Cursor { data: &data, pos: 0 };
    let (_flags, fs, len, count) = read_header(&mut cur, MASK_MAGIC)?;
    let mut channels = Vec::with_capacity(count as usize);
    let mut geo = Vec::with_capacity(count as usize);
    for k in 0..count {
        let g = read_channel_header(&mut cur, len)?;
        let mut vals = Vec::with_capacity(g.3 as usize);
        for _ in 0..g.3 {
            let v = cur.f32()? as f64;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Format(format!("mask channel {k} holds {v}, outside [0, 1]")));
            }
            vals.push(v);
        }
        geo.push(g);
        channels.push(vals);
    }
    if cur.pos != data.len() {
        return Err(Error::Format(format!("{} trailing bytes", data.len() - cur.pos)));
    }
    if let Some(c) = like {
        let same = c.len as u64 == len
            && c.fs == fs
            && c.channels.len() == geo.len()
            && geo.iter().zip(&c.d).all(|(g, &d)| g.2 as usize == d);
        if !same {
            return Err(Error::Format("mask geometry does not match the coefficients".into()));
        }
    }
    Ok(Mask { channels })
}
